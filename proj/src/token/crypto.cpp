#include "ajwt/token/crypto.hpp"

#include <openssl/bio.h>
#include <openssl/core_names.h>
#include <openssl/crypto.h>
#include <openssl/err.h>
#include <openssl/evp.h>
#include <openssl/param_build.h>
#include <openssl/pem.h>
#include <openssl/rand.h>

#include <cstring>
#include <stdexcept>

namespace ajwt::token {

namespace {

[[noreturn]] void throw_openssl(const char* what) {
  unsigned long code = ERR_get_error();
  char buf[256] = {0};
  if (code != 0) ERR_error_string_n(code, buf, sizeof(buf));
  throw std::runtime_error(std::string("openssl: ") + what +
                           (code != 0 ? std::string(": ") + buf : std::string()));
}

constexpr char kHexDigits[] = "0123456789abcdef";

int hex_nibble(char c) {
  if (c >= '0' && c <= '9') return c - '0';
  if (c >= 'a' && c <= 'f') return c - 'a' + 10;
  if (c >= 'A' && c <= 'F') return c - 'A' + 10;
  return -1;
}

constexpr std::string_view kB64Url = "ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz0123456789-_";
constexpr std::string_view kB64Std = "ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz0123456789+/";

std::string b64_encode(std::span<const std::uint8_t> data, std::string_view alphabet, bool pad) {
  std::string out;
  out.reserve((data.size() + 2) / 3 * 4);
  std::size_t i = 0;
  while (i + 3 <= data.size()) {
    std::uint32_t v = (data[i] << 16) | (data[i + 1] << 8) | data[i + 2];
    out += alphabet[(v >> 18) & 63];
    out += alphabet[(v >> 12) & 63];
    out += alphabet[(v >> 6) & 63];
    out += alphabet[v & 63];
    i += 3;
  }
  std::size_t rest = data.size() - i;
  if (rest == 1) {
    std::uint32_t v = data[i] << 16;
    out += alphabet[(v >> 18) & 63];
    out += alphabet[(v >> 12) & 63];
    if (pad) out += "==";
  } else if (rest == 2) {
    std::uint32_t v = (data[i] << 16) | (data[i + 1] << 8);
    out += alphabet[(v >> 18) & 63];
    out += alphabet[(v >> 12) & 63];
    out += alphabet[(v >> 6) & 63];
    if (pad) out += '=';
  }
  return out;
}

std::optional<Bytes> b64_decode(std::string_view text, std::string_view alphabet) {
  std::array<std::int8_t, 256> rev;
  rev.fill(-1);
  for (std::size_t i = 0; i < alphabet.size(); ++i)
    rev[static_cast<unsigned char>(alphabet[i])] = static_cast<std::int8_t>(i);

  while (!text.empty() && text.back() == '=') text.remove_suffix(1);
  if (text.size() % 4 == 1) return std::nullopt;

  Bytes out;
  out.reserve(text.size() * 3 / 4);
  std::uint32_t acc = 0;
  int bits = 0;
  for (char c : text) {
    std::int8_t v = rev[static_cast<unsigned char>(c)];
    if (v < 0) return std::nullopt;
    acc = (acc << 6) | static_cast<std::uint32_t>(v);
    bits += 6;
    if (bits >= 8) {
      bits -= 8;
      out.push_back(static_cast<std::uint8_t>((acc >> bits) & 0xff));
    }
  }
  // Leftover bits must be zero padding, or the input was not canonical.
  if (bits > 0 && (acc & ((1u << bits) - 1)) != 0) return std::nullopt;
  return out;
}

struct PkeyCtxFree {
  void operator()(EVP_PKEY_CTX* p) const { EVP_PKEY_CTX_free(p); }
};
struct MdCtxFree {
  void operator()(EVP_MD_CTX* p) const { EVP_MD_CTX_free(p); }
};

Bytes digest_sign(const EvpKey& key, const EVP_MD* md, std::span<const std::uint8_t> data) {
  std::unique_ptr<EVP_MD_CTX, MdCtxFree> ctx(EVP_MD_CTX_new());
  if (!ctx) throw_openssl("EVP_MD_CTX_new");
  if (EVP_DigestSignInit(ctx.get(), nullptr, md, nullptr, key.get()) != 1)
    throw_openssl("EVP_DigestSignInit");
  std::size_t len = 0;
  if (EVP_DigestSign(ctx.get(), nullptr, &len, data.data(), data.size()) != 1)
    throw_openssl("EVP_DigestSign(size)");
  Bytes sig(len);
  if (EVP_DigestSign(ctx.get(), sig.data(), &len, data.data(), data.size()) != 1)
    throw_openssl("EVP_DigestSign");
  sig.resize(len);
  return sig;
}

bool digest_verify(const EvpKey& key, const EVP_MD* md, std::span<const std::uint8_t> data,
                   std::span<const std::uint8_t> signature) {
  std::unique_ptr<EVP_MD_CTX, MdCtxFree> ctx(EVP_MD_CTX_new());
  if (!ctx) throw_openssl("EVP_MD_CTX_new");
  if (EVP_DigestVerifyInit(ctx.get(), nullptr, md, nullptr, key.get()) != 1)
    throw_openssl("EVP_DigestVerifyInit");
  return EVP_DigestVerify(ctx.get(), signature.data(), signature.size(), data.data(),
                          data.size()) == 1;
}

}  // namespace

std::string to_hex(std::span<const std::uint8_t> data) {
  std::string out;
  out.reserve(data.size() * 2);
  for (std::uint8_t b : data) {
    out += kHexDigits[b >> 4];
    out += kHexDigits[b & 0x0f];
  }
  return out;
}

std::optional<Bytes> from_hex(std::string_view hex) {
  if (hex.size() % 2 != 0) return std::nullopt;
  Bytes out;
  out.reserve(hex.size() / 2);
  for (std::size_t i = 0; i < hex.size(); i += 2) {
    int hi = hex_nibble(hex[i]);
    int lo = hex_nibble(hex[i + 1]);
    if (hi < 0 || lo < 0) return std::nullopt;
    out.push_back(static_cast<std::uint8_t>((hi << 4) | lo));
  }
  return out;
}

std::string base64url_encode(std::span<const std::uint8_t> data) {
  return b64_encode(data, kB64Url, /*pad=*/false);
}

std::optional<Bytes> base64url_decode(std::string_view text) {
  return b64_decode(text, kB64Url);
}

std::string base64_encode(std::span<const std::uint8_t> data) {
  return b64_encode(data, kB64Std, /*pad=*/true);
}

std::optional<Bytes> base64_decode(std::string_view text) {
  return b64_decode(text, kB64Std);
}

std::array<std::uint8_t, 32> sha256(std::span<const std::uint8_t> data) {
  std::array<std::uint8_t, 32> out{};
  unsigned int len = 0;
  if (EVP_Digest(data.data(), data.size(), out.data(), &len, EVP_sha256(), nullptr) != 1 ||
      len != out.size())
    throw_openssl("EVP_Digest(sha256)");
  return out;
}

std::array<std::uint8_t, 32> hmac_sha256(std::span<const std::uint8_t> key,
                                         std::span<const std::uint8_t> data) {
  EvpKey mac_key(EVP_PKEY_new_raw_private_key(EVP_PKEY_HMAC, nullptr, key.data(), key.size()));
  if (!mac_key) throw_openssl("EVP_PKEY_new_raw_private_key(HMAC)");
  Bytes mac = digest_sign(mac_key, EVP_sha256(), data);
  if (mac.size() != 32) throw std::runtime_error("openssl: unexpected HMAC length");
  std::array<std::uint8_t, 32> out{};
  std::memcpy(out.data(), mac.data(), out.size());
  return out;
}

bool constant_time_equal(std::span<const std::uint8_t> a, std::span<const std::uint8_t> b) {
  if (a.size() != b.size()) return false;
  return CRYPTO_memcmp(a.data(), b.data(), a.size()) == 0;
}

Bytes random_bytes(std::size_t n) {
  Bytes out(n);
  if (n > 0 && RAND_bytes(out.data(), static_cast<int>(n)) != 1) throw_openssl("RAND_bytes");
  return out;
}

EvpKey::EvpKey(EVP_PKEY* owned) : key_(owned, [](EVP_PKEY* p) { EVP_PKEY_free(p); }) {}

EvpKey generate_rsa_key() {
  EVP_PKEY* key = EVP_PKEY_Q_keygen(nullptr, nullptr, "RSA", static_cast<std::size_t>(2048));
  if (key == nullptr) throw_openssl("EVP_PKEY_Q_keygen(RSA)");
  return EvpKey(key);
}

Bytes rs256_sign(const EvpKey& private_key, std::span<const std::uint8_t> data) {
  return digest_sign(private_key, EVP_sha256(), data);
}

bool rs256_verify(const EvpKey& public_key, std::span<const std::uint8_t> data,
                  std::span<const std::uint8_t> signature) {
  return digest_verify(public_key, EVP_sha256(), data, signature);
}

RsaPublicParts rsa_public_parts(const EvpKey& key) {
  BIGNUM* n = nullptr;
  BIGNUM* e = nullptr;
  if (EVP_PKEY_get_bn_param(key.get(), OSSL_PKEY_PARAM_RSA_N, &n) != 1 ||
      EVP_PKEY_get_bn_param(key.get(), OSSL_PKEY_PARAM_RSA_E, &e) != 1) {
    BN_free(n);
    throw_openssl("EVP_PKEY_get_bn_param(RSA)");
  }
  RsaPublicParts parts;
  parts.n.resize(static_cast<std::size_t>(BN_num_bytes(n)));
  parts.e.resize(static_cast<std::size_t>(BN_num_bytes(e)));
  BN_bn2bin(n, parts.n.data());
  BN_bn2bin(e, parts.e.data());
  BN_free(n);
  BN_free(e);
  return parts;
}

EvpKey rsa_public_from_parts(const RsaPublicParts& parts) {
  BIGNUM* n = BN_bin2bn(parts.n.data(), static_cast<int>(parts.n.size()), nullptr);
  BIGNUM* e = BN_bin2bn(parts.e.data(), static_cast<int>(parts.e.size()), nullptr);
  OSSL_PARAM_BLD* bld = OSSL_PARAM_BLD_new();
  OSSL_PARAM* params = nullptr;
  EVP_PKEY* key = nullptr;
  bool ok = n != nullptr && e != nullptr && bld != nullptr &&
            OSSL_PARAM_BLD_push_BN(bld, OSSL_PKEY_PARAM_RSA_N, n) == 1 &&
            OSSL_PARAM_BLD_push_BN(bld, OSSL_PKEY_PARAM_RSA_E, e) == 1 &&
            (params = OSSL_PARAM_BLD_to_param(bld)) != nullptr;
  if (ok) {
    std::unique_ptr<EVP_PKEY_CTX, PkeyCtxFree> ctx(
        EVP_PKEY_CTX_new_from_name(nullptr, "RSA", nullptr));
    ok = ctx && EVP_PKEY_fromdata_init(ctx.get()) == 1 &&
         EVP_PKEY_fromdata(ctx.get(), &key, EVP_PKEY_PUBLIC_KEY, params) == 1;
  }
  OSSL_PARAM_free(params);
  OSSL_PARAM_BLD_free(bld);
  BN_free(n);
  BN_free(e);
  if (!ok || key == nullptr) throw_openssl("EVP_PKEY_fromdata(RSA)");
  return EvpKey(key);
}

std::string rsa_private_to_pem(const EvpKey& key) {
  BIO* bio = BIO_new(BIO_s_mem());
  if (bio == nullptr) throw_openssl("BIO_new");
  if (PEM_write_bio_PrivateKey(bio, key.get(), nullptr, nullptr, 0, nullptr, nullptr) != 1) {
    BIO_free(bio);
    throw_openssl("PEM_write_bio_PrivateKey");
  }
  char* data = nullptr;
  long len = BIO_get_mem_data(bio, &data);
  std::string pem(data, static_cast<std::size_t>(len));
  BIO_free(bio);
  return pem;
}

EvpKey rsa_private_from_pem(const std::string& pem) {
  BIO* bio = BIO_new_mem_buf(pem.data(), static_cast<int>(pem.size()));
  if (bio == nullptr) throw_openssl("BIO_new_mem_buf");
  EVP_PKEY* key = PEM_read_bio_PrivateKey(bio, nullptr, nullptr, nullptr);
  BIO_free(bio);
  if (key == nullptr) throw_openssl("PEM_read_bio_PrivateKey");
  return EvpKey(key);
}

EvpKey generate_ed25519_key() {
  EVP_PKEY* key = EVP_PKEY_Q_keygen(nullptr, nullptr, "ED25519");
  if (key == nullptr) throw_openssl("EVP_PKEY_Q_keygen(ED25519)");
  return EvpKey(key);
}

EvpKey ed25519_private_from_seed(std::span<const std::uint8_t> seed) {
  if (seed.size() != 32) throw std::invalid_argument("ed25519 seed must be 32 bytes");
  EVP_PKEY* key =
      EVP_PKEY_new_raw_private_key(EVP_PKEY_ED25519, nullptr, seed.data(), seed.size());
  if (key == nullptr) throw_openssl("EVP_PKEY_new_raw_private_key(ED25519)");
  return EvpKey(key);
}

EvpKey ed25519_public_from_raw(std::span<const std::uint8_t> pub) {
  if (pub.size() != 32) throw std::invalid_argument("ed25519 public key must be 32 bytes");
  EVP_PKEY* key = EVP_PKEY_new_raw_public_key(EVP_PKEY_ED25519, nullptr, pub.data(), pub.size());
  if (key == nullptr) throw_openssl("EVP_PKEY_new_raw_public_key(ED25519)");
  return EvpKey(key);
}

Bytes ed25519_public_raw(const EvpKey& key) {
  std::size_t len = 0;
  if (EVP_PKEY_get_raw_public_key(key.get(), nullptr, &len) != 1)
    throw_openssl("EVP_PKEY_get_raw_public_key(size)");
  Bytes out(len);
  if (EVP_PKEY_get_raw_public_key(key.get(), out.data(), &len) != 1)
    throw_openssl("EVP_PKEY_get_raw_public_key");
  out.resize(len);
  return out;
}

Bytes ed25519_seed_raw(const EvpKey& private_key) {
  std::size_t len = 0;
  if (EVP_PKEY_get_raw_private_key(private_key.get(), nullptr, &len) != 1)
    throw_openssl("EVP_PKEY_get_raw_private_key(size)");
  Bytes out(len);
  if (EVP_PKEY_get_raw_private_key(private_key.get(), out.data(), &len) != 1)
    throw_openssl("EVP_PKEY_get_raw_private_key");
  out.resize(len);
  return out;
}

Bytes ed25519_sign(const EvpKey& private_key, std::span<const std::uint8_t> data) {
  return digest_sign(private_key, nullptr, data);
}

bool ed25519_verify(const EvpKey& public_key, std::span<const std::uint8_t> data,
                    std::span<const std::uint8_t> signature) {
  return digest_verify(public_key, nullptr, data, signature);
}

}  // namespace ajwt::token
