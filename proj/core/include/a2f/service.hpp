#pragma once

#include <atomic>
#include <memory>
#include <string>
#include <thread>

#include "a2f/pipeline.hpp"

namespace a2f {

struct ServiceOptions {
  std::string host = "127.0.0.1";
  int port = 8080;  // 0 picks a free port
  std::string cors_origin = "*";
};

struct HttpResponse {
  int status = 200;
  std::string body;
  std::string content_type = "application/json";
};

// JSON API over a PipelineSession:
//   GET  /healthz
//   GET  /schema      -> {attributes: [{name, group, default}], fingerprint}
//   POST /synthesize  {attributes: {name: v} | [v...], seed?, flags?}
//                     -> {seed, images: {stage1, stage2, stage3}, meta}
//   POST /sweep       {attribute, base?, seed?, weights?, flags?}
//                     -> {seed, attribute, weights, images: [...]}
// Images are base64 PNG. Until a session is set every endpoint except
// /healthz answers 503.
class InferenceService {
 public:
  explicit InferenceService(ServiceOptions options = {});
  ~InferenceService();
  InferenceService(const InferenceService&) = delete;
  InferenceService& operator=(const InferenceService&) = delete;

  void set_session(std::shared_ptr<const PipelineSession> session);
  [[nodiscard]] bool ready() const;

  // Transport-free dispatch, also used by the HTTP handlers.
  [[nodiscard]] HttpResponse handle(const std::string& method, const std::string& path,
                                    const std::string& body) const;

  // Binds and serves on a background thread; returns the bound port.
  int start();
  // Blocks until stop() is called from another thread or a signal handler.
  void run();
  void stop();

 private:
  struct Server;
  ServiceOptions options_;
  std::shared_ptr<const PipelineSession> session_;
  std::unique_ptr<Server> server_;
  std::thread thread_;
  int bound_port_ = 0;
};

}  // namespace a2f
