#pragma once

// Replay cache for proof-of-possession requests. A request is a replay only
// when the exact (jti, signature value) pair is presented again: the nonce in
// every Signature-Input keeps two legitimate same-second calls distinct, and
// one token may sign many requests within its lifetime. Entries expire with
// the token so the cache stays bounded.

#include <cstdint>
#include <map>
#include <string>
#include <utility>

namespace ajwt::rs {

class ReplayCache {
 public:
  // Returns true when the pair was absent and is now recorded; false means
  // this exact signed request was already presented (replay).
  bool insert_if_absent(const std::string& jti, const std::string& signature,
                        std::int64_t token_exp);

  // Drops entries whose token expiry has passed; expired tokens are rejected
  // before the replay check, so their pairs can never match again.
  void evict_expired(std::int64_t now);

  std::size_t size() const { return seen_.size(); }

 private:
  std::map<std::pair<std::string, std::string>, std::int64_t> seen_;
};

}  // namespace ajwt::rs
