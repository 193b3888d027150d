// ajwt — operator tooling for the agentic intent-token stack.
//
// One-shot commands, each a plain client of the public module interfaces:
//   keygen      mint an Ed25519 proof-of-possession key pair as JWK files
//   register    submit a client / agent / workflow manifest to the issuer
//   inspect     verify a token against the issuer's keys and print its claims
//   serve-idp   run the issuer from a config file
//   serve-rs    run a guarded resource server bound to a running issuer
//   demo        walk the golden workflow end to end and report both logs
//   threats     run the threat suite, or --bench the enforcement hot paths
//
// Exit codes: 0 success / expectations met, 1 operational or usage error,
// 2 a verdict ran to completion but came out against expectations.

#include <cstdint>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iomanip>
#include <iostream>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <sys/stat.h>
#include <vector>

#include <CLI11.hpp>
#include <httplib.h>
#include <json.hpp>

#include "ajwt/harness/bench.hpp"
#include "ajwt/harness/demo.hpp"
#include "ajwt/harness/runner.hpp"
#include "ajwt/harness/scenarios.hpp"
#include "ajwt/idp/http_server.hpp"
#include "ajwt/idp/service.hpp"
#include "ajwt/idp/store.hpp"
#include "ajwt/rs/http_server.hpp"
#include "ajwt/rs/policy.hpp"
#include "ajwt/rs/trust.hpp"
#include "ajwt/token/jwt.hpp"
#include "ajwt/token/pop.hpp"

namespace {

namespace fs = std::filesystem;
using ajwt::token::Bytes;

int fail(const std::string& message) {
  std::cerr << "error: " << message << "\n";
  return 1;
}

std::optional<std::string> read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) return std::nullopt;
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

std::optional<nlohmann::json> read_json_file(const std::string& path) {
  auto text = read_text_file(path);
  if (!text) return std::nullopt;
  auto doc = nlohmann::json::parse(*text, nullptr, /*allow_exceptions=*/false);
  if (doc.is_discarded()) return std::nullopt;
  return doc;
}

bool write_text_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) return false;
  out << text;
  return bool(out);
}

struct WireReply {
  int status = 0;
  nlohmann::json body;
};

std::optional<WireReply> http_json(const std::string& base_url, const std::string& method,
                                   const std::string& path, const nlohmann::json* doc) {
  httplib::Client client(base_url);
  client.set_connection_timeout(5, 0);
  client.set_read_timeout(10, 0);
  httplib::Result res = method == "POST" ? client.Post(path, doc->dump(), "application/json")
                                         : client.Get(path);
  if (!res) return std::nullopt;
  WireReply reply;
  reply.status = res->status;
  reply.body = nlohmann::json::parse(res->body, nullptr, /*allow_exceptions=*/false);
  if (reply.body.is_discarded()) reply.body = nlohmann::json{{"raw", res->body}};
  return reply;
}

// ---- keygen -------------------------------------------------------------------

struct KeygenArgs {
  std::string out_dir = ".";
  std::string name = "agent-key";
};

int cmd_keygen(const KeygenArgs& args) {
  using namespace ajwt::token;
  // A random suffix keeps kids distinct even across same-second invocations.
  const std::string kid = args.name + "-" + to_hex(random_bytes(6));
  PopKeyPair pair = PopKeyPair::from_seed(kid, random_bytes(32));

  nlohmann::json public_jwk{
      {"kty", "OKP"}, {"crv", "Ed25519"}, {"kid", kid}, {"x", base64url_encode(pair.public_key)}};
  nlohmann::json private_jwk = public_jwk;
  private_jwk["d"] = base64url_encode(pair.seed());

  std::error_code ec;
  fs::create_directories(args.out_dir, ec);
  const fs::path private_path = fs::path(args.out_dir) / (args.name + ".jwk.json");
  const fs::path public_path = fs::path(args.out_dir) / (args.name + ".pub.jwk.json");
  if (!write_text_file(private_path.string(), private_jwk.dump(2) + "\n"))
    return fail("could not write " + private_path.string());
  ::chmod(private_path.c_str(), 0600);
  if (!write_text_file(public_path.string(), public_jwk.dump(2) + "\n"))
    return fail("could not write " + public_path.string());

  std::cout << "kid:         " << kid << "\n"
            << "thumbprint:  " << jwk_thumbprint(pair.public_key).to_string() << "\n"
            << "private jwk: " << private_path.string() << "  (keep offline)\n"
            << "public jwk:  " << public_path.string() << "  (embed as pop_jwk in the agent manifest)\n";
  return 0;
}

// ---- register -----------------------------------------------------------------

struct RegisterArgs {
  std::string kind;
  std::string manifest;
  std::string idp_url;
};

int cmd_register(const RegisterArgs& args) {
  static const std::map<std::string, std::string> kEndpoints = {
      {"client", "/clients"}, {"agent", "/agents"}, {"workflow", "/workflows"}};
  auto manifest = read_json_file(args.manifest);
  if (!manifest || !manifest->is_object())
    return fail("manifest " + args.manifest + " is not a JSON object");
  auto reply = http_json(args.idp_url, "POST", kEndpoints.at(args.kind), &*manifest);
  if (!reply) return fail("issuer unreachable at " + args.idp_url);
  if (reply->status / 100 == 2) {
    std::cout << reply->body.dump(2) << "\n";
    return 0;
  }
  std::ostringstream message;
  message << "registration refused (http " << reply->status
          << "): " << reply->body.value("error", "unknown_error");
  const std::string reason = reply->body.value("reason", "");
  if (!reason.empty()) message << " — " << reason;
  return fail(message.str());
}

// ---- inspect ------------------------------------------------------------------

struct InspectArgs {
  std::string token;
  std::string token_file;
  std::string jwks_file;
  std::string idp_url;
  std::string issuer;    // optional pins; default = the token's own claims
  std::string audience;
  std::int64_t at = 0;   // verification instant; default = the token's iat
};

void print_row(const std::string& label, const std::string& value) {
  std::cout << "  " << std::left << std::setw(20) << label << value << "\n";
}

int cmd_inspect(const InspectArgs& args) {
  using namespace ajwt::token;
  std::string text = args.token;
  if (text.empty() && !args.token_file.empty()) {
    auto loaded = read_text_file(args.token_file);
    if (!loaded) return fail("could not read " + args.token_file);
    text = *loaded;
    while (!text.empty() && (text.back() == '\n' || text.back() == '\r')) text.pop_back();
  }
  if (text.empty()) return fail("provide --token or --token-file");

  nlohmann::json jwks;
  if (!args.jwks_file.empty()) {
    auto doc = read_json_file(args.jwks_file);
    if (!doc) return fail("could not read jwks document " + args.jwks_file);
    jwks = std::move(*doc);
  } else if (!args.idp_url.empty()) {
    auto reply = http_json(args.idp_url, "GET", "/.well-known/jwks", nullptr);
    if (!reply || reply->status != 200)
      return fail("could not fetch /.well-known/jwks from " + args.idp_url);
    jwks = std::move(reply->body);
  } else {
    return fail("provide --jwks-file or --idp-url so the signature can be checked");
  }
  TrustedKeys keys = trusted_keys_from_jwks(jwks);
  if (keys.empty()) return fail("no usable issuer keys in the jwks document");

  auto decoded = decode_token_unverified(text);
  if (!decoded)
    return fail(std::string("verification failed: ") + token_error_name(TokenError::malformed));
  const std::string expected_iss =
      !args.issuer.empty() ? args.issuer : decoded->payload.value("iss", "");
  const std::string expected_aud =
      !args.audience.empty() ? args.audience : decoded->payload.value("aud", "");
  // Verified at the token's own issue instant unless pinned, so an authentic
  // but stale token still renders; staleness is reported separately below.
  const std::int64_t at = args.at != 0
                              ? args.at
                              : decoded->payload.value("iat", std::int64_t(std::time(nullptr)));

  TokenVerifyResult verified = verify_token(text, keys, expected_iss, expected_aud, at);
  if (!verified.ok())
    return fail(std::string("verification failed: ") + token_error_name(verified.error));

  const TokenClaims& claims = verified.claims;
  std::cout << "signature verified against kid " << decoded->header.value("kid", "?") << "\n";
  print_row("issuer", claims.iss);
  print_row("subject", claims.sub);
  print_row("audience", claims.aud);
  print_row("issued at", std::to_string(claims.iat));
  print_row("expires", std::to_string(claims.exp) +
                           (claims.exp < std::time(nullptr) ? "  (stale by wall clock)" : ""));
  print_row("jti", claims.jti);
  print_row("scope", claims.scope);

  if (claims.intent) {
    const auto& intent = *claims.intent;
    std::cout << "intent\n";
    print_row("workflow", intent.workflow_id);
    print_row("step", intent.workflow_step);
    print_row("executed by", intent.executed_by);
    print_row("initiated by", intent.initiated_by);
    std::string chain;
    for (const auto& hop : intent.delegation_chain) chain += (chain.empty() ? "" : " -> ") + hop;
    print_row("delegation", chain);
    print_row("sequence hash", intent.step_sequence_hash.to_string());
    for (const auto& [key, value] : intent.execution_context)
      print_row("context." + key, value);
    print_row("chain tag", intent.chain_tag.empty() ? "(unsealed)" : intent.chain_tag);
  }
  if (claims.agent_proof) {
    std::cout << "agent proof\n";
    print_row("checksum", claims.agent_proof->agent_checksum.to_string());
    print_row("registration", claims.agent_proof->registration_id);
    print_row("version", claims.agent_proof->version);
  }
  if (claims.cnf) {
    std::cout << "proof-of-possession\n";
    print_row("jkt", claims.cnf->jkt.to_string());
    print_row("kid", claims.cnf->kid);
  }
  if (!claims.intent) std::cout << "no intent claims (legacy token)\n";
  return 0;
}

// ---- serve-idp ----------------------------------------------------------------

struct ServeIdpArgs {
  std::string config;
  std::string host = "127.0.0.1";
  int port = 8780;
  std::string store;  // optional state file; empty = in-memory only
  std::uint64_t seed = 0;
  bool seed_set = false;
};

int cmd_serve_idp(const ServeIdpArgs& args) {
  using namespace ajwt;
  auto doc = read_json_file(args.config);
  if (!doc || !doc->is_object()) return fail("could not read config " + args.config);

  idp::IdpConfig config;
  config.issuer = doc->value("issuer", config.issuer);
  config.default_audience = doc->value("default_audience", config.default_audience);
  config.token_lifetime_secs = doc->value("token_lifetime_secs", config.token_lifetime_secs);
  auto grants = doc->find("authorization_grants");
  if (grants == doc->end() || !grants->is_object() || grants->empty())
    return fail("config needs authorization_grants: {\"<grant>\": [\"scope\", ...]}");
  for (const auto& [grant, scopes] : grants->items()) {
    if (!scopes.is_array()) return fail("authorization_grants." + grant + " must be an array");
    for (const auto& scope : scopes) {
      if (!scope.is_string()) return fail("authorization_grants." + grant + " holds a non-string");
      config.authorization_grants[grant].insert(scope.get<std::string>());
    }
  }
  const std::string mac_key = doc->value("chain_mac_key", "");
  if (mac_key.size() < 16) return fail("config needs chain_mac_key of at least 16 characters");
  config.chain_mac_key = Bytes(mac_key.begin(), mac_key.end());
  const std::string issuer_name = config.issuer;

  auto issuer_key = token::IssuerKey::generate(
      doc->value("issuer_kid", "idp-" + token::to_hex(token::random_bytes(4))));
  std::unique_ptr<idp::StoreBackend> backend;
  if (args.store.empty())
    backend = std::make_unique<idp::InMemoryBackend>();
  else
    backend = std::make_unique<idp::FileBackend>(args.store);
  const std::uint64_t seed = args.seed_set
                                 ? args.seed
                                 : std::uint64_t(std::random_device{}()) << 32 ^ std::random_device{}();
  idp::IdpService service(
      std::move(config), std::move(issuer_key), std::move(backend),
      [] { return std::int64_t(std::time(nullptr)); }, seed);

  if (auto versions = doc->find("shim_versions"); versions != doc->end()) {
    if (!versions->is_object()) return fail("shim_versions must map version -> sha256:<hex>");
    for (const auto& [version, checksum_text] : versions->items()) {
      auto checksum = checksum_text.is_string()
                          ? token::Checksum::parse(checksum_text.get<std::string>())
                          : std::nullopt;
      if (!checksum) return fail("shim_versions[" + version + "] is not sha256:<64 hex>");
      service.add_shim_version(version, *checksum);
    }
  }

  idp::IdpHttpServer server(service);
  std::cout << "issuer " << issuer_name << " listening on http://" << args.host << ":"
            << args.port << (args.store.empty() ? " (in-memory state)" : " (state: " + args.store + ")")
            << "\n"
            << std::flush;
  if (!server.listen(args.host, args.port))
    return fail("could not bind " + args.host + ":" + std::to_string(args.port));
  return 0;
}

// ---- serve-rs -----------------------------------------------------------------

struct ServeRsArgs {
  std::string config;
  std::string idp_url;
  std::string host = "127.0.0.1";
  int port = 8781;
};

int cmd_serve_rs(const ServeRsArgs& args) {
  using namespace ajwt;
  auto doc = read_json_file(args.config);
  if (!doc || !doc->is_object()) return fail("could not read config " + args.config);
  const std::string expected_issuer = doc->value("expected_issuer", "");
  const std::string expected_audience = doc->value("expected_audience", "");
  if (expected_issuer.empty() || expected_audience.empty())
    return fail("config needs expected_issuer and expected_audience");
  auto policy = rs::PolicyConfig::from_json(doc->value("policy", nlohmann::json()));
  if (!policy || policy->endpoints.empty())
    return fail("config needs a policy object with at least one endpoint");

  auto trust = std::make_shared<rs::TrustStoreClient>(
      rs::TrustStoreClient::http_fetcher(args.idp_url), expected_issuer, expected_audience,
      doc->value("trust_ttl_secs", std::int64_t(300)));
  try {
    trust->material(std::time(nullptr));
  } catch (const std::exception& e) {
    return fail("issuer key fetch from " + args.idp_url + " failed: " + e.what());
  }

  rs::RsHttpServer server(*policy, [trust](std::int64_t now) { return trust->material(now); });
  // Echo handlers: prove the guard end to end and reflect the verified
  // identity back to the caller. Real deployments mount their own handlers.
  for (const auto& endpoint : policy->endpoints) {
    if (endpoint.route.find('*') != std::string::npos) {
      std::cerr << "note: policy route " << endpoint.route
                << " stays enforced but gets no echo handler (exact paths only)\n";
      continue;
    }
    server.route(endpoint.method, endpoint.route,
                 [](const httplib::Request& req, httplib::Response& res,
                    const token::TokenClaims& claims) {
                   nlohmann::json body{{"ok", true}, {"method", req.method}, {"path", req.path}};
                   if (claims.intent) {
                     body["agent_id"] = claims.intent->executed_by;
                     body["step"] = claims.intent->workflow_step;
                   }
                   res.status = 200;
                   res.set_content(body.dump(), "application/json");
                 });
  }
  std::cout << "resource server for " << expected_audience << " listening on http://" << args.host
            << ":" << args.port << " (issuer keys from " << args.idp_url << ")\n"
            << std::flush;
  if (!server.listen(args.host, args.port))
    return fail("could not bind " + args.host + ":" + std::to_string(args.port));
  return 0;
}

// ---- demo ---------------------------------------------------------------------

struct DemoArgs {
  std::uint64_t seed = 1234;
  std::string out;
};

int cmd_demo(const DemoArgs& args) {
  auto report = ajwt::harness::run_demo(args.seed);
  std::cout << ajwt::harness::demo_table(report);
  if (!args.out.empty() &&
      !write_text_file(args.out, ajwt::harness::demo_to_json(report).dump(2) + "\n"))
    return fail("could not write " + args.out);
  return report.ok() ? 0 : 2;
}

// ---- threats ------------------------------------------------------------------

struct ThreatArgs {
  std::string phase_text = "after";
  std::vector<std::string> ids;
  std::uint64_t seed = 1234;
  bool stress = false;
  std::string out;
  std::string config;
  bool bench = false;
  std::size_t iterations = 10000;
};

int cmd_threats(const CLI::App* sub, const ThreatArgs& args) {
  using namespace ajwt::harness;
  RunOptions options;
  std::string out_path = args.out;
  if (!args.config.empty()) {
    auto doc = read_json_file(args.config);
    if (!doc) return fail("could not read config " + args.config);
    auto parsed = HarnessConfig::from_json(*doc);
    if (!parsed)
      return fail("config " + args.config + " rejected: unknown phase, threat id, or field type");
    options = parsed->options;
    if (out_path.empty()) out_path = parsed->out_path;
  }
  if (sub->count("--phase")) options.phase = *parse_phase(args.phase_text);
  if (sub->count("--seed")) options.seed = args.seed;
  if (args.stress) options.stress = true;
  if (!args.ids.empty()) options.threat_ids = args.ids;

  if (args.bench) {
    auto results = run_benchmarks(args.iterations);
    std::cout << bench_table(results);
    if (!out_path.empty() && !write_text_file(out_path, bench_to_json(results).dump(2) + "\n"))
      return fail("could not write " + out_path);
    return all_within_budget(results) ? 0 : 2;
  }

  for (const auto& id : options.threat_ids)
    if (!find_scenario(id)) {
      std::cerr << "usage error: unknown threat id '" << id << "' (catalog: T1..T12)\n";
      return 1;
    }
  Summary summary = run_all(options);
  std::cout << summary_table(summary);
  if (!out_path.empty() && !write_text_file(out_path, summary_to_json(summary).dump(2) + "\n"))
    return fail("could not write " + out_path);
  return summary.all_matched ? 0 : 2;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"operator tooling for the agentic intent-token stack"};
  app.require_subcommand(1);
  std::function<int()> action;

  KeygenArgs keygen_args;
  auto* keygen = app.add_subcommand("keygen", "mint an Ed25519 proof-of-possession key pair");
  keygen->add_option("--out", keygen_args.out_dir, "directory for the key files")
      ->capture_default_str();
  keygen->add_option("--name", keygen_args.name, "file basename and kid prefix")
      ->capture_default_str();
  keygen->callback([&] { action = [&] { return cmd_keygen(keygen_args); }; });

  RegisterArgs register_args;
  auto* register_cmd =
      app.add_subcommand("register", "submit a manifest to the issuer's governance endpoints");
  register_cmd->add_option("kind", register_args.kind, "what the manifest describes")
      ->required()
      ->check(CLI::IsMember({"client", "agent", "workflow"}));
  register_cmd->add_option("--manifest", register_args.manifest, "manifest JSON file")
      ->required();
  register_cmd->add_option("--idp-url", register_args.idp_url, "issuer base URL")->required();
  register_cmd->callback([&] { action = [&] { return cmd_register(register_args); }; });

  InspectArgs inspect_args;
  auto* inspect = app.add_subcommand("inspect", "verify a token and print its claims");
  inspect->add_option("--token", inspect_args.token, "compact JWS text");
  inspect->add_option("--token-file", inspect_args.token_file, "file holding the token");
  inspect->add_option("--jwks-file", inspect_args.jwks_file, "issuer JWKS document on disk");
  inspect->add_option("--idp-url", inspect_args.idp_url, "issuer base URL for a live JWKS fetch");
  inspect->add_option("--issuer", inspect_args.issuer, "pin the expected issuer");
  inspect->add_option("--audience", inspect_args.audience, "pin the expected audience");
  inspect->add_option("--at", inspect_args.at, "verify at this unix time instead of the token's iat");
  inspect->callback([&] { action = [&] { return cmd_inspect(inspect_args); }; });

  ServeIdpArgs serve_idp_args;
  auto* serve_idp = app.add_subcommand("serve-idp", "run the issuer from a config file");
  serve_idp->add_option("--config", serve_idp_args.config, "issuer config JSON")->required();
  serve_idp->add_option("--host", serve_idp_args.host, "bind address")->capture_default_str();
  serve_idp->add_option("--port", serve_idp_args.port, "bind port")->capture_default_str();
  serve_idp->add_option("--store", serve_idp_args.store, "persist registry state to this file");
  serve_idp->add_option("--seed", serve_idp_args.seed, "deterministic id/jti stream")
      ->each([&](const std::string&) { serve_idp_args.seed_set = true; });
  serve_idp->callback([&] { action = [&] { return cmd_serve_idp(serve_idp_args); }; });

  ServeRsArgs serve_rs_args;
  auto* serve_rs = app.add_subcommand("serve-rs", "run a guarded resource server");
  serve_rs->add_option("--config", serve_rs_args.config, "policy + trust config JSON")->required();
  serve_rs->add_option("--idp-url", serve_rs_args.idp_url, "issuer base URL for key fetches")
      ->required();
  serve_rs->add_option("--host", serve_rs_args.host, "bind address")->capture_default_str();
  serve_rs->add_option("--port", serve_rs_args.port, "bind port")->capture_default_str();
  serve_rs->callback([&] { action = [&] { return cmd_serve_rs(serve_rs_args); }; });

  DemoArgs demo_args;
  auto* demo = app.add_subcommand("demo", "walk the golden workflow end to end");
  demo->add_option("--seed", demo_args.seed, "world seed")->capture_default_str();
  demo->add_option("--out", demo_args.out, "write the full report (tokens, jwks, logs) here");
  demo->callback([&] { action = [&] { return cmd_demo(demo_args); }; });

  ThreatArgs threat_args;
  auto* threats = app.add_subcommand("threats", "run the threat suite against a fresh deployment");
  threats->add_option("ids", threat_args.ids, "threat ids to run (default: the full catalog)");
  threats->add_option("--phase", threat_args.phase_text, "before = legacy bearer, after = hardened")
      ->check(CLI::IsMember({"before", "after"}))
      ->capture_default_str();
  threats->add_option("--seed", threat_args.seed, "base seed")->capture_default_str();
  threats->add_option("--config", threat_args.config, "run selection JSON (flags override it)");
  threats->add_option("--out", threat_args.out, "write the JSON report here");
  threats->add_flag("--stress", threat_args.stress, "run scenarios concurrently, one world each");
  threats->add_flag("--bench", threat_args.bench, "measure the enforcement hot paths instead");
  threats->add_option("--iterations", threat_args.iterations, "bench iterations")
      ->capture_default_str()
      ->check(CLI::PositiveNumber);
  threats->callback([&] { action = [&] { return cmd_threats(threats, threat_args); }; });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;  // usage problems are operational errors
  }
  try {
    return action();
  } catch (const std::exception& e) {
    return fail(e.what());
  }
}
