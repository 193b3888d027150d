#pragma once

// HTTP adapter around the verify_request core: every registered route runs
// the full pipeline before its handler, every decision lands in the
// hash-chained decision log. Handlers receive the verified claims and never
// see an unverified request.

#include <cstdint>
#include <functional>
#include <memory>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

#include "ajwt/rs/decision_log.hpp"
#include "ajwt/rs/policy.hpp"
#include "ajwt/rs/replay.hpp"
#include "ajwt/rs/verify.hpp"

namespace httplib {
class Server;
struct Request;
struct Response;
}  // namespace httplib

namespace ajwt::rs {

class RsHttpServer {
 public:
  using Handler = std::function<void(const httplib::Request&, httplib::Response&,
                                     const token::TokenClaims&)>;
  using TrustProvider = std::function<TrustMaterial(std::int64_t now)>;
  using Clock = std::function<std::int64_t()>;

  // `trust` is consulted per request (so a TTL-refreshing trust store slots
  // in directly); pass a lambda returning a fixed TrustMaterial for tests.
  RsHttpServer(PolicyConfig policy, TrustProvider trust, Clock clock = {});
  ~RsHttpServer();

  RsHttpServer(const RsHttpServer&) = delete;
  RsHttpServer& operator=(const RsHttpServer&) = delete;

  // Registers a guarded route. `path` must be an exact path; the policy used
  // at request time is matched against the actual request path, and a route
  // with no covering policy entry denies fail-closed.
  void route(const std::string& method, const std::string& path, Handler handler);

  // Binds an OS-chosen port on 127.0.0.1, serves from a background thread,
  // returns the port. Throws on bind failure.
  int start();
  // Serves on a fixed port in the calling thread (CLI `serve-rs`).
  bool listen(const std::string& host, int port);
  void stop();

  int port() const { return port_; }

  std::vector<DecisionRecord> decisions() const;
  DecisionChainHead decision_head() const;
  bool verify_decision_log() const;

 private:
  void handle(const httplib::Request& req, httplib::Response& res, const Handler& handler);
  void log_decision(const httplib::Request& req, const Decision& decision);

  PolicyConfig policy_;
  TrustProvider trust_;
  Clock clock_;

  std::unique_ptr<httplib::Server> http_;
  std::thread worker_;
  int port_ = 0;

  mutable std::mutex mutex_;
  ReplayCache replay_;
  std::vector<DecisionRecord> decisions_;
  DecisionChainHead head_;
  std::uint64_t requests_seen_ = 0;
};

}  // namespace ajwt::rs
