#include "ajwt/token/pop.hpp"

#include <charconv>
#include <ctime>
#include <stdexcept>

namespace ajwt::token {

namespace {

const std::vector<std::string> kCoveredComponents = {"@method", "@path", "authorization",
                                                     "content-digest"};

std::string iso8601_minutes(std::int64_t unix_seconds) {
  std::time_t t = static_cast<std::time_t>(unix_seconds);
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%MZ", &tm);
  return buf;
}

std::string quoted(const std::string& text) { return "\"" + text + "\""; }

std::string signature_params(const SignatureInputParams& params) {
  std::string out = "(";
  for (std::size_t i = 0; i < params.components.size(); ++i) {
    if (i > 0) out += ' ';
    out += quoted(params.components[i]);
  }
  out += ");alg=" + quoted(params.alg);
  out += ";created=" + std::to_string(params.created);
  out += ";keyid=" + quoted(params.keyid);
  out += ";nonce=" + quoted(params.nonce);
  return out;
}

// The byte string actually signed: one line per covered component, then the
// @signature-params line. LF separators, no trailing newline.
std::string signature_base(const std::string& method, const std::string& path,
                           const std::string& authorization, const Checksum& content_digest,
                           const SignatureInputParams& params) {
  std::string base;
  base += "\"@method\": " + method + "\n";
  base += "\"@path\": " + path + "\n";
  base += "\"authorization\": " + authorization + "\n";
  base += "\"content-digest\": " + content_digest.to_string() + "\n";
  base += "\"@signature-params\": " + signature_params(params);
  return base;
}

}  // namespace

PopKeyPair PopKeyPair::generate(const std::string& agent_id, std::int64_t now) {
  PopKeyPair pair;
  pair.kid = "agent:" + agent_id + "#" + iso8601_minutes(now);
  pair.key = generate_ed25519_key();
  pair.public_key = ed25519_public_raw(pair.key);
  return pair;
}

PopKeyPair PopKeyPair::from_seed(const std::string& kid, std::span<const std::uint8_t> seed) {
  PopKeyPair pair;
  pair.kid = kid;
  pair.key = ed25519_private_from_seed(seed);
  pair.public_key = ed25519_public_raw(pair.key);
  return pair;
}

Bytes PopKeyPair::seed() const { return ed25519_seed_raw(key); }

Checksum jwk_thumbprint(std::span<const std::uint8_t> public_key) {
  if (public_key.size() != 32)
    throw std::invalid_argument("unsupported key type for thumbprint");
  // Required members in lexicographic order, compact rendering.
  std::string jwk = R"({"crv":"Ed25519","kty":"OKP","x":")" +
                    base64url_encode(public_key) + R"("})";
  return compute_checksum(jwk);
}

SignatureHeaders sign_http_request(const std::string& method, const std::string& path,
                                   const std::string& authorization,
                                   const Checksum& content_digest, const PopKeyPair& key,
                                   std::int64_t created, const std::string& nonce) {
  if (method.empty() || path.empty()) throw std::invalid_argument("method and path required");
  if (authorization.empty()) throw std::invalid_argument("missing covered header: authorization");
  SignatureInputParams params;
  params.components = kCoveredComponents;
  params.alg = "ed25519";
  params.created = created;
  params.keyid = key.kid;
  params.nonce = nonce;
  std::string base = signature_base(method, path, authorization, content_digest, params);
  Bytes sig = ed25519_sign(key.key, as_bytes(base));
  return SignatureHeaders{"sig=" + signature_params(params),
                          "sig=:" + base64_encode(sig) + ":"};
}

namespace {

// Reads a quoted string starting at text[pos] == '"'; advances pos past it.
std::optional<std::string> read_quoted(const std::string& text, std::size_t& pos) {
  if (pos >= text.size() || text[pos] != '"') return std::nullopt;
  std::size_t end = text.find('"', pos + 1);
  if (end == std::string::npos) return std::nullopt;
  std::string out = text.substr(pos + 1, end - pos - 1);
  pos = end + 1;
  return out;
}

}  // namespace

std::optional<SignatureInputParams> parse_signature_input(const std::string& signature_input) {
  constexpr std::string_view kLabel = "sig=(";
  if (!signature_input.starts_with(kLabel)) return std::nullopt;
  SignatureInputParams params;
  std::size_t pos = kLabel.size() - 1;  // at '('
  std::size_t close = signature_input.find(')', pos);
  if (close == std::string::npos) return std::nullopt;
  std::size_t cursor = pos + 1;
  while (cursor < close) {
    if (signature_input[cursor] == ' ') {
      ++cursor;
      continue;
    }
    auto component = read_quoted(signature_input, cursor);
    if (!component || cursor > close) return std::nullopt;
    params.components.push_back(std::move(*component));
  }
  pos = close + 1;
  bool have_created = false;
  while (pos < signature_input.size()) {
    if (signature_input[pos] != ';') return std::nullopt;
    ++pos;
    std::size_t eq = signature_input.find('=', pos);
    if (eq == std::string::npos) return std::nullopt;
    std::string name = signature_input.substr(pos, eq - pos);
    pos = eq + 1;
    if (name == "created") {
      std::size_t end = pos;
      while (end < signature_input.size() && signature_input[end] != ';') ++end;
      auto [ptr, ec] = std::from_chars(signature_input.data() + pos,
                                       signature_input.data() + end, params.created);
      if (ec != std::errc() || ptr != signature_input.data() + end) return std::nullopt;
      have_created = true;
      pos = end;
    } else {
      auto value = read_quoted(signature_input, pos);
      if (!value) return std::nullopt;
      if (name == "alg") params.alg = std::move(*value);
      else if (name == "keyid") params.keyid = std::move(*value);
      else if (name == "nonce") params.nonce = std::move(*value);
      // unknown parameters are ignored (but were not signed — see below)
    }
  }
  if (!have_created) return std::nullopt;
  return params;
}

PopStatus verify_http_signature(const std::string& method, const std::string& path,
                                const std::string& authorization,
                                const Checksum& content_digest,
                                const std::string& signature_input,
                                const std::string& signature,
                                std::span<const std::uint8_t> public_key, std::int64_t now,
                                std::int64_t max_skew) {
  auto params = parse_signature_input(signature_input);
  if (!params) return PopStatus::malformed;
  if (params->components != kCoveredComponents || params->alg != "ed25519")
    return PopStatus::malformed;
  if (authorization.empty()) return PopStatus::malformed;

  constexpr std::string_view kSigPrefix = "sig=:";
  if (!signature.starts_with(kSigPrefix) || !signature.ends_with(':'))
    return PopStatus::malformed;
  auto raw = base64_decode(
      signature.substr(kSigPrefix.size(), signature.size() - kSigPrefix.size() - 1));
  if (!raw || raw->size() != 64) return PopStatus::malformed;

  // Rebuild the base from what the verifier itself sees; any mismatch with
  // what was signed (path, token, body digest, parameters) fails here.
  std::string base = signature_base(method, path, authorization, content_digest, *params);
  EvpKey key = ed25519_public_from_raw(public_key);
  if (!ed25519_verify(key, as_bytes(base), *raw)) return PopStatus::bad_signature;

  std::int64_t skew = now > params->created ? now - params->created : params->created - now;
  if (skew > max_skew) return PopStatus::stale;
  return PopStatus::ok;
}

}  // namespace ajwt::token
