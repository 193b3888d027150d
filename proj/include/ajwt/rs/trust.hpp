#pragma once

// Pulls verifier trust anchors (issuer JWKS, published shim versions) from the
// issuer's /.well-known endpoints, with a TTL cache. On refresh failure the
// last good snapshot keeps serving: availability of already-fetched anchors
// beats freshness, and tokens still verify against the cached keys.

#include <cstdint>
#include <functional>
#include <mutex>
#include <optional>
#include <string>

#include <json.hpp>

#include "ajwt/rs/verify.hpp"

namespace ajwt::rs {

// Fetches the JSON document at `path` (e.g. "/.well-known/jwks"); nullopt on
// any transport or parse failure.
using JsonFetcher = std::function<std::optional<nlohmann::json>(const std::string& path)>;

class TrustStoreClient {
 public:
  TrustStoreClient(JsonFetcher fetcher, std::string expected_issuer,
                   std::string expected_audience, std::int64_t ttl_secs = 300);

  // GET-over-HTTP fetcher bound to an issuer base URL like
  // "http://127.0.0.1:8080".
  static JsonFetcher http_fetcher(const std::string& idp_base_url);

  // Returns the current trust snapshot, refreshing when the TTL lapsed.
  // Throws std::runtime_error when no snapshot was ever fetched and the
  // issuer is unreachable.
  TrustMaterial material(std::int64_t now);

  std::int64_t refresh_count() const;  // how many fetch rounds succeeded

 private:
  bool refresh_locked();

  JsonFetcher fetcher_;
  std::string expected_issuer_;
  std::string expected_audience_;
  std::int64_t ttl_secs_;

  mutable std::mutex mutex_;
  std::optional<TrustMaterial> cached_;
  std::int64_t fetched_at_ = 0;
  std::int64_t refreshes_ = 0;
};

}  // namespace ajwt::rs
