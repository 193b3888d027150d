#pragma once

// HTTP face of the IDP. JSON in/out; error bodies carry {error, reason}.
// Every route validates X-Shim-Checksum when the header is present.

#include <memory>
#include <string>
#include <thread>

#include "ajwt/idp/service.hpp"

namespace httplib {
class Server;
}

namespace ajwt::idp {

class IdpHttpServer {
 public:
  explicit IdpHttpServer(IdpService& service);
  ~IdpHttpServer();

  IdpHttpServer(const IdpHttpServer&) = delete;
  IdpHttpServer& operator=(const IdpHttpServer&) = delete;

  // Binds to an OS-chosen port on 127.0.0.1 and serves from a background
  // thread; returns the port. Throws on bind failure.
  int start();
  // Serves on a fixed port in the calling thread (CLI `serve-idp`).
  bool listen(const std::string& host, int port);
  void stop();

  int port() const { return port_; }

 private:
  void mount_routes();

  IdpService& service_;
  std::unique_ptr<httplib::Server> http_;
  std::thread worker_;
  int port_ = 0;
};

}  // namespace ajwt::idp
