#include "ajwt/rs/replay.hpp"

namespace ajwt::rs {

bool ReplayCache::insert_if_absent(const std::string& jti, const std::string& signature,
                                   std::int64_t token_exp) {
  auto [it, inserted] = seen_.try_emplace({jti, signature}, token_exp);
  (void)it;
  return inserted;
}

void ReplayCache::evict_expired(std::int64_t now) {
  for (auto it = seen_.begin(); it != seen_.end();) {
    if (it->second <= now)
      it = seen_.erase(it);
    else
      ++it;
  }
}

}  // namespace ajwt::rs
