#pragma once

#include <memory>
#include <string>
#include <thread>

#include "clonar/error.hpp"
#include "clonar/server/service.hpp"

namespace clonar::server {

/// HTTP status used for an error code in API responses.
int httpStatus(ErrorCode code);

/// JSON/HTTP front end for PipelineService. Every error response carries
/// {"error":{"code","message"}}.
class HttpApi {
 public:
  explicit HttpApi(PipelineService& service);
  ~HttpApi();

  HttpApi(const HttpApi&) = delete;
  HttpApi& operator=(const HttpApi&) = delete;

  /// Binds and serves on a background thread. port 0 picks a free port.
  /// Returns the bound port. Throws InvalidArgument when binding fails.
  int start(const std::string& host, int port);

  /// Binds and serves on the calling thread until stop().
  void run(const std::string& host, int port);

  void stop();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
  std::thread thread_;
};

}  // namespace clonar::server
