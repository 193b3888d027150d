#include "ajwt/idp/http_server.hpp"

#include <httplib.h>

namespace ajwt::idp {

namespace {

void reply_json(httplib::Response& res, int status, const nlohmann::json& body) {
  res.status = status;
  res.set_content(body.dump(), "application/json");
}

void reply_error(httplib::Response& res, int status, const std::string& error,
                 const std::string& reason) {
  reply_json(res, status, {{"error", error}, {"reason", reason}});
}

nlohmann::json parse_body(const httplib::Request& req) {
  return nlohmann::json::parse(req.body, nullptr, /*allow_exceptions=*/false);
}

std::string get_string(const nlohmann::json& obj, const char* key) {
  auto it = obj.find(key);
  return it != obj.end() && it->is_string() ? it->get<std::string>() : std::string();
}

std::optional<token::AgentSignature> signature_from_json(const nlohmann::json& obj) {
  if (!obj.is_object()) return std::nullopt;
  token::AgentSignature sig;
  sig.prompt_template = get_string(obj, "prompt_template");
  if (auto slots = obj.find("substitution_slots"); slots != obj.end() && slots->is_array())
    for (const auto& slot : *slots) {
      if (!slot.is_string()) return std::nullopt;
      sig.substitution_slots.push_back(slot.get<std::string>());
    }
  if (auto tools = obj.find("tools"); tools != obj.end() && tools->is_array())
    for (const auto& tool : *tools)
      sig.tools.push_back({get_string(tool, "name"), get_string(tool, "signature"),
                           get_string(tool, "description")});
  if (auto config = obj.find("config"); config != obj.end() && config->is_object())
    for (const auto& [key, value] : config->items()) sig.config[key] = value;
  return sig;
}

std::optional<std::set<std::string>> split_scope_field(const nlohmann::json& body,
                                                       const char* key) {
  auto it = body.find(key);
  if (it == body.end()) return std::nullopt;
  std::set<std::string> scopes;
  if (it->is_string()) {
    std::string text = it->get<std::string>();
    std::size_t pos = 0;
    while (pos < text.size()) {
      std::size_t space = text.find(' ', pos);
      if (space == std::string::npos) space = text.size();
      if (space > pos) scopes.insert(text.substr(pos, space - pos));
      pos = space + 1;
    }
  } else if (it->is_array()) {
    for (const auto& scope : *it)
      if (scope.is_string()) scopes.insert(scope.get<std::string>());
  }
  return scopes;
}

}  // namespace

IdpHttpServer::IdpHttpServer(IdpService& service)
    : service_(service), http_(std::make_unique<httplib::Server>()) {
  mount_routes();
}

IdpHttpServer::~IdpHttpServer() { stop(); }

void IdpHttpServer::mount_routes() {
  // Shim release attestation: when a caller states which shim build it runs,
  // the claim must match a known release or the request is refused outright.
  http_->set_pre_routing_handler([this](const httplib::Request& req, httplib::Response& res) {
    std::string claimed = req.get_header_value("X-Shim-Checksum");
    if (claimed.empty()) return httplib::Server::HandlerResponse::Unhandled;
    auto parsed = Checksum::parse(claimed);
    bool known = false;
    if (parsed)
      for (const auto& [version, checksum] : service_.well_known_shim_versions())
        known = known || checksum == *parsed;
    if (!known) {
      reply_error(res, 401, "access_denied", kDenyShimChecksumUnknown);
      return httplib::Server::HandlerResponse::Handled;
    }
    return httplib::Server::HandlerResponse::Unhandled;
  });

  http_->Post("/clients", [this](const httplib::Request& req, httplib::Response& res) {
    auto body = parse_body(req);
    if (body.is_discarded() || !body.is_object())
      return reply_error(res, 400, "invalid_request", "body must be a JSON object");
    auto result = service_.register_client(get_string(body, "authorization_grant"),
                                           get_string(body, "client_checksum"));
    if (!result.ok()) return reply_error(res, 400, result.error, result.detail);
    nlohmann::json out{{"client_id", result.value->client_id}};
    if (result.value->created) out["client_secret"] = result.value->client_secret;
    reply_json(res, result.value->created ? 201 : 200, out);
  });

  http_->Post("/agents", [this](const httplib::Request& req, httplib::Response& res) {
    auto body = parse_body(req);
    if (body.is_discarded() || !body.is_object())
      return reply_error(res, 400, "invalid_request", "body must be a JSON object");
    auto signature = signature_from_json(body.value("signature", nlohmann::json::object()));
    if (!signature) return reply_error(res, 400, "invalid_request", "bad signature object");
    Bytes pop_key;
    std::string pop_kid;
    if (auto jwk = body.find("pop_jwk"); jwk != body.end() && jwk->is_object()) {
      if (get_string(*jwk, "kty") != "OKP" || get_string(*jwk, "crv") != "Ed25519")
        return reply_error(res, 400, "malformed_pop_key", "expected OKP/Ed25519 JWK");
      auto raw = token::base64url_decode(get_string(*jwk, "x"));
      if (raw) pop_key = *raw;
      pop_kid = get_string(*jwk, "kid");
    }
    auto result =
        service_.register_agent(get_string(body, "client_id"), get_string(body, "client_secret"),
                                get_string(body, "agent_id"), *signature, pop_key, pop_kid,
                                get_string(body, "version"));
    if (!result.ok()) {
      int status = result.error == kDenyBadClientCredential ? 401
                   : result.error == "duplicate_agent_checksum" ? 409
                                                                : 400;
      return reply_error(res, status, result.error, result.detail);
    }
    reply_json(res, 201,
               {{"agent_id", result.value->agent_id},
                {"agent_checksum", result.value->agent_checksum.to_string()},
                {"registration_id", result.value->registration_id},
                {"version", result.value->version},
                {"created_at", result.value->created_at}});
  });

  // Registry view for shim startup verification: digests only, never prompt
  // text, tool schemas, or config values.
  http_->Get("/agents", [this](const httplib::Request& req, httplib::Response& res) {
    auto result = service_.list_agents(req.get_param_value("client_id"),
                                       req.get_header_value("X-Client-Secret"));
    if (!result.ok())
      return reply_error(res, result.error == kDenyUnknownClient ? 404 : 401, result.error,
                         result.detail);
    nlohmann::json agents = nlohmann::json::array();
    for (const AgentRecord& record : *result.value)
      agents.push_back({{"agent_id", record.agent_id},
                        {"agent_checksum", record.agent_checksum.to_string()},
                        {"registration_id", record.registration_id},
                        {"version", record.version},
                        {"pop_kid", record.pop_kid},
                        {"created_at", record.created_at}});
    reply_json(res, 200, {{"agents", std::move(agents)}});
  });

  http_->Post("/workflows", [this](const httplib::Request& req, httplib::Response& res) {
    auto body = parse_body(req);
    if (body.is_discarded() || !body.is_object())
      return reply_error(res, 400, "invalid_request", "body must be a JSON object");
    auto definition = workflow_from_json(body.value("workflow", nlohmann::json::object()));
    if (!definition) return reply_error(res, 400, "invalid_request", "bad workflow object");
    auto result = service_.register_workflow(get_string(body, "client_id"),
                                             get_string(body, "client_secret"),
                                             std::move(*definition));
    if (!result.ok())
      return reply_error(res, result.error == kDenyBadClientCredential ? 401 : 400,
                         result.error, result.detail);
    reply_json(res, 201,
               {{"workflow_id", body["workflow"]["workflow_id"]}, {"version", *result.value}});
  });

  http_->Post("/token", [this](const httplib::Request& req, httplib::Response& res) {
    auto body = parse_body(req);
    if (body.is_discarded() || !body.is_object())
      return reply_error(res, 400, "invalid_request", "body must be a JSON object");
    std::string grant_type = get_string(body, "grant_type");

    if (grant_type == "client_credentials") {
      auto outcome = service_.issue_access_token(
          get_string(body, "client_id"), get_string(body, "client_secret"),
          split_scope_field(body, "scope"), get_string(body, "audience"));
      if (!outcome.issued) return reply_error(res, 400, "access_denied", outcome.deny_reason);
      return reply_json(res, 200,
                        {{"access_token", outcome.access_token},
                         {"token_type", "Bearer"},
                         {"expires_in", outcome.expires_in},
                         {"scope", outcome.scope}});
    }
    if (grant_type != "agent_checksum")
      return reply_error(res, 400, "unsupported_grant_type", grant_type);

    TokenRequest request;
    request.grant_type = grant_type;
    request.client_id = get_string(body, "client_id");
    request.client_secret = get_string(body, "client_secret");
    request.client_access_token = get_string(body, "client_access_token");
    request.agent_id = get_string(body, "agent_id");
    request.workflow_id = get_string(body, "workflow_id");
    request.workflow_step = get_string(body, "workflow_step");
    request.audience = get_string(body, "audience");
    if (auto checksum = Checksum::parse(get_string(body, "runtime_checksum")))
      request.runtime_checksum = *checksum;
    if (auto checksum = Checksum::parse(get_string(body, "shim_checksum")))
      request.shim_checksum = *checksum;
    if (auto steps = body.find("executed_steps"); steps != body.end() && steps->is_array())
      for (const auto& step : *steps)
        if (step.is_string()) request.executed_steps.push_back(step.get<std::string>());
    if (auto chain = body.find("delegation_chain"); chain != body.end() && chain->is_array())
      for (const auto& link : *chain)
        if (link.is_string()) request.delegation_chain.push_back(link.get<std::string>());
    if (auto ctx = body.find("execution_context"); ctx != body.end() && ctx->is_object())
      for (const auto& [key, value] : ctx->items())
        if (value.is_string()) request.execution_context[key] = value.get<std::string>();
    request.requested_scopes = split_scope_field(body, "requested_scope");

    auto outcome = service_.issue_intent_token(request);
    if (!outcome.issued) return reply_error(res, 400, "access_denied", outcome.deny_reason);
    reply_json(res, 200,
               {{"access_token", outcome.access_token},
                {"token_type", "Bearer"},
                {"expires_in", outcome.expires_in},
                {"scope", outcome.scope}});
  });

  http_->Get("/.well-known/shim-versions",
             [this](const httplib::Request&, httplib::Response& res) {
               nlohmann::json versions = nlohmann::json::object();
               for (const auto& [version, checksum] : service_.well_known_shim_versions())
                 versions[version] = checksum.to_string();
               reply_json(res, 200, {{"versions", std::move(versions)}});
             });

  http_->Get("/.well-known/jwks", [this](const httplib::Request&, httplib::Response& res) {
    reply_json(res, 200, service_.jwks());
  });

  http_->Get("/log/verify", [this](const httplib::Request&, httplib::Response& res) {
    auto head = service_.event_head();
    reply_json(res, 200,
               {{"valid", service_.verify_log_integrity()},
                {"entries", head.sequence_no},
                {"head",
                 {{"sequence_no", head.sequence_no},
                  {"entry_hash", head.entry_hash.to_string()}}}});
  });
}

int IdpHttpServer::start() {
  port_ = http_->bind_to_any_port("127.0.0.1");
  if (port_ <= 0) throw std::runtime_error("idp: failed to bind a listening port");
  worker_ = std::thread([this] { http_->listen_after_bind(); });
  http_->wait_until_ready();
  return port_;
}

bool IdpHttpServer::listen(const std::string& host, int port) {
  port_ = port;
  return http_->listen(host, port);
}

void IdpHttpServer::stop() {
  if (http_) http_->stop();
  if (worker_.joinable()) worker_.join();
}

}  // namespace ajwt::idp
