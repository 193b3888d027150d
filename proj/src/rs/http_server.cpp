#include "ajwt/rs/http_server.hpp"

#include <stdexcept>
#include <utility>

#include <httplib.h>

namespace ajwt::rs {

namespace {

void reply_json(httplib::Response& res, int status, const nlohmann::json& body) {
  res.status = status;
  res.set_content(body.dump(), "application/json");
}

std::int64_t system_now() {
  return static_cast<std::int64_t>(::time(nullptr));
}

}  // namespace

RsHttpServer::RsHttpServer(PolicyConfig policy, TrustProvider trust, Clock clock)
    : policy_(std::move(policy)),
      trust_(std::move(trust)),
      clock_(clock ? std::move(clock) : Clock(system_now)),
      http_(std::make_unique<httplib::Server>()) {
  // Introspection: decision-log integrity, mirroring the issuer's /log/verify.
  http_->Get("/decisions/verify", [this](const httplib::Request&, httplib::Response& res) {
    std::scoped_lock lock(mutex_);
    reply_json(res, 200,
               {{"valid", verify_decision_chain(decisions_, head_)},
                {"entries", decisions_.size()},
                {"head",
                 {{"sequence_no", head_.sequence_no},
                  {"entry_hash", head_.entry_hash.to_string()}}}});
  });
  http_->Get("/decisions", [this](const httplib::Request&, httplib::Response& res) {
    nlohmann::json list = nlohmann::json::array();
    std::scoped_lock lock(mutex_);
    for (const DecisionRecord& record : decisions_) list.push_back(record.to_json());
    reply_json(res, 200, {{"decisions", std::move(list)}});
  });
}

RsHttpServer::~RsHttpServer() { stop(); }

void RsHttpServer::route(const std::string& method, const std::string& path, Handler handler) {
  auto guarded = [this, handler = std::move(handler)](const httplib::Request& req,
                                                      httplib::Response& res) {
    handle(req, res, handler);
  };
  if (method == "GET")
    http_->Get(path, guarded);
  else if (method == "POST")
    http_->Post(path, guarded);
  else if (method == "PUT")
    http_->Put(path, guarded);
  else if (method == "DELETE")
    http_->Delete(path, guarded);
  else if (method == "PATCH")
    http_->Patch(path, guarded);
  else
    throw std::invalid_argument("unsupported method: " + method);
}

void RsHttpServer::handle(const httplib::Request& req, httplib::Response& res,
                          const Handler& handler) {
  RequestView view;
  view.method = req.method;
  view.path = req.path;
  view.authorization = req.get_header_value("Authorization");
  view.body = req.body;
  view.signature_input = req.get_header_value("Signature-Input");
  view.signature = req.get_header_value("Signature");
  view.shim_checksum = req.get_header_value("X-Shim-Checksum");

  const EndpointPolicy* policy = policy_.match(view.method, view.path);
  Decision decision;
  if (!policy) {
    // A handler exists but no policy covers the path: configuration error,
    // refuse rather than guess.
    decision.allowed = false;
    decision.deny_reason = "unpolicied_route";
    decision.http_status = 403;
  } else {
    TrustMaterial trust = trust_(clock_());
    std::scoped_lock lock(mutex_);
    decision = verify_request(view, *policy, trust, replay_, clock_());
    if (++requests_seen_ % 1024 == 0) replay_.evict_expired(clock_());
  }
  log_decision(req, decision);

  if (!decision.allowed) {
    reply_json(res, decision.http_status,
               {{"error", "access_denied"}, {"reason", decision.deny_reason}});
    return;
  }
  handler(req, res, *decision.claims);
}

void RsHttpServer::log_decision(const httplib::Request& req, const Decision& decision) {
  DecisionRecord record;
  record.timestamp = clock_();
  record.method = req.method;
  record.path = req.path;
  record.outcome = decision.allowed ? "allowed" : "denied:" + decision.deny_reason;
  if (decision.claims) {
    record.jti = decision.claims->jti;
    if (decision.claims->intent) {
      record.agent_id = decision.claims->intent->executed_by;
      record.step = decision.claims->intent->workflow_step;
    }
  }
  std::scoped_lock lock(mutex_);
  decision_append(decisions_, head_, std::move(record));
}

int RsHttpServer::start() {
  port_ = http_->bind_to_any_port("127.0.0.1");
  if (port_ <= 0) throw std::runtime_error("resource server: bind failed");
  worker_ = std::thread([this] { http_->listen_after_bind(); });
  http_->wait_until_ready();
  return port_;
}

bool RsHttpServer::listen(const std::string& host, int port) {
  port_ = port;
  return http_->listen(host, port);
}

void RsHttpServer::stop() {
  if (http_) http_->stop();
  if (worker_.joinable()) worker_.join();
}

std::vector<DecisionRecord> RsHttpServer::decisions() const {
  std::scoped_lock lock(mutex_);
  return decisions_;
}

DecisionChainHead RsHttpServer::decision_head() const {
  std::scoped_lock lock(mutex_);
  return head_;
}

bool RsHttpServer::verify_decision_log() const {
  std::scoped_lock lock(mutex_);
  return verify_decision_chain(decisions_, head_);
}

}  // namespace ajwt::rs
