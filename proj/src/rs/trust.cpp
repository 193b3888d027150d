#include "ajwt/rs/trust.hpp"

#include <stdexcept>
#include <utility>

#include <httplib.h>

namespace ajwt::rs {

TrustStoreClient::TrustStoreClient(JsonFetcher fetcher, std::string expected_issuer,
                                   std::string expected_audience, std::int64_t ttl_secs)
    : fetcher_(std::move(fetcher)),
      expected_issuer_(std::move(expected_issuer)),
      expected_audience_(std::move(expected_audience)),
      ttl_secs_(ttl_secs) {}

JsonFetcher TrustStoreClient::http_fetcher(const std::string& idp_base_url) {
  return [idp_base_url](const std::string& path) -> std::optional<nlohmann::json> {
    httplib::Client client(idp_base_url);
    client.set_connection_timeout(5);
    client.set_read_timeout(5);
    auto res = client.Get(path);
    if (!res || res->status != 200) return std::nullopt;
    nlohmann::json doc = nlohmann::json::parse(res->body, nullptr, /*allow_exceptions=*/false);
    if (doc.is_discarded()) return std::nullopt;
    return doc;
  };
}

bool TrustStoreClient::refresh_locked() {
  auto jwks = fetcher_("/.well-known/jwks");
  auto shim_versions = fetcher_("/.well-known/shim-versions");
  if (!jwks || !shim_versions) return false;

  TrustMaterial material;
  material.expected_issuer = expected_issuer_;
  material.expected_audience = expected_audience_;
  material.issuer_keys = token::trusted_keys_from_jwks(*jwks);
  if (material.issuer_keys.empty()) return false;

  auto versions = shim_versions->find("versions");
  if (versions == shim_versions->end() || !versions->is_object()) return false;
  for (const auto& [version, value] : versions->items()) {
    if (!value.is_string()) return false;
    auto checksum = token::Checksum::parse(value.get<std::string>());
    if (!checksum) return false;
    material.shim_versions.emplace(version, *checksum);
  }

  cached_ = std::move(material);
  ++refreshes_;
  return true;
}

TrustMaterial TrustStoreClient::material(std::int64_t now) {
  std::scoped_lock lock(mutex_);
  bool stale = !cached_ || now - fetched_at_ >= ttl_secs_;
  if (stale && refresh_locked()) fetched_at_ = now;
  if (!cached_)
    throw std::runtime_error("trust store: issuer unreachable and no cached anchors");
  return *cached_;
}

std::int64_t TrustStoreClient::refresh_count() const {
  std::scoped_lock lock(mutex_);
  return refreshes_;
}

}  // namespace ajwt::rs
