#pragma once

#include <memory>
#include <string>

#include "stratos/match.hpp"
#include "stratos/registry.hpp"

namespace stratos {

struct GatewayConfig {
  std::string host = "127.0.0.1";
  int port = 8080;  // 0 picks a free port
  MatchParams params;
};

/// HTTP gateway over a Registry. Mutations funnel through the registry's
/// single-writer contract; reads pin snapshots, so concurrent requests are
/// safe and deterministic.
class HttpGateway {
 public:
  HttpGateway(Registry& registry, GatewayConfig config = {});
  ~HttpGateway();

  /// Binds and serves on a background thread; returns the bound port.
  int start();
  void stop();

  /// Binds and serves on the calling thread until stop() is called.
  bool serve_blocking();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace stratos
