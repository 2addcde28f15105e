#include "a2f/service.hpp"

#include <random>

#include "a2f/errors.hpp"
#include "a2f/log.hpp"
#include "a2f/util.hpp"
#include "httplib.h"
#include "json.hpp"

namespace a2f {

using nlohmann::json;

namespace {

struct HttpError : std::runtime_error {
  HttpError(int s, const std::string& m) : std::runtime_error(m), status(s) {}
  int status;
};

HttpResponse json_response(int status, const json& body) { return {status, body.dump(), "application/json"}; }

HttpResponse error_response(int status, const std::string& message) {
  return json_response(status, {{"error", message}});
}

std::string png_base64(const Image& image) { return base64_encode(encode_png(image)); }

// Seeds are kept below 2^53 so they survive JSON number round-trips.
std::uint64_t draw_seed() {
  std::random_device rd;
  const std::uint64_t hi = rd();
  return ((hi << 32) | rd()) & ((std::uint64_t{1} << 53) - 1);
}

std::uint64_t seed_from(const json& body) {
  if (!body.contains("seed") || body["seed"].is_null()) return draw_seed();
  const auto& s = body["seed"];
  if (!s.is_number_integer() || (s.is_number_integer() && s.get<std::int64_t>() < 0 && !s.is_number_unsigned())) {
    throw HttpError(400, "seed must be a non-negative integer");
  }
  return s.get<std::uint64_t>();
}

double attribute_value(const json& v, const std::string& name) {
  if (!v.is_number()) throw HttpError(400, "attribute '" + name + "' must be a number");
  const double x = v.get<double>();
  if (!(x >= -1.0 && x <= 1.0)) throw HttpError(400, "attribute '" + name + "' is outside [-1, 1]");
  return x;
}

AttributeVector attributes_from(const json& body, const char* field, const AttributeSchema& schema) {
  std::vector<double> values(schema.size(), -1.0);
  if (!body.contains(field) || body[field].is_null()) return AttributeVector(values);
  const auto& a = body[field];
  const auto names = schema.names();
  if (a.is_object()) {
    for (const auto& [name, v] : a.items()) {
      if (!schema.contains(name)) throw HttpError(400, "unknown attribute '" + name + "'");
      values[schema.index_of(name)] = attribute_value(v, name);
    }
  } else if (a.is_array()) {
    if (a.size() != schema.size()) {
      throw HttpError(422, "attribute array has " + std::to_string(a.size()) + " entries, schema has " +
                               std::to_string(schema.size()));
    }
    for (std::size_t i = 0; i < a.size(); ++i) values[i] = attribute_value(a[i], names[i]);
  } else {
    throw HttpError(400, std::string("'") + field + "' must be an object or an array");
  }
  return AttributeVector(values);
}

AblationFlags flags_from(const json& body, const AblationFlags& defaults) {
  AblationFlags f = defaults;
  if (!body.contains("flags") || body["flags"].is_null()) return f;
  const auto& j = body["flags"];
  if (!j.is_object()) throw HttpError(400, "'flags' must be an object");
  for (const auto& [k, v] : j.items()) {
    if (!v.is_boolean()) throw HttpError(400, "flag '" + k + "' must be a boolean");
    if (k == "skip_stage2") f.skip_stage2 = v;
    else if (k == "no_attr_stage2") f.no_attr_stage2 = v;
    else if (k == "no_attr_stage3") f.no_attr_stage3 = v;
    else throw HttpError(400, "unknown flag '" + k + "'");
  }
  return f;
}

void check_fingerprint(const json& body, const AttributeSchema& schema) {
  if (body.contains("schema_fingerprint") && body["schema_fingerprint"] != schema.fingerprint()) {
    throw HttpError(422, "request was built for a different schema");
  }
}

json schema_json(const AttributeSchema& schema) {
  auto j = json::parse(schema.to_json());
  j["fingerprint"] = schema.fingerprint();
  return j;
}

HttpResponse synthesize_endpoint(const PipelineSession& session, const json& body) {
  check_fingerprint(body, session.schema);
  const auto attrs = attributes_from(body, "attributes", session.schema);
  const auto seed = seed_from(body);
  const auto flags = flags_from(body, session.flags);
  if (!flags.skip_stage2 && !session.stage2) throw HttpError(422, "Stage 2 is not loaded; set skip_stage2");
  const auto r = synthesize(session, attrs, seed, flags);
  return json_response(200, {{"seed", seed},
                             {"images",
                              {{"stage1", png_base64(r.coarse_sketch)},
                               {"stage2", png_base64(r.enhanced_sketch)},
                               {"stage3", png_base64(r.face)}}},
                             {"meta", json::parse(result_meta_json(r, session))}});
}

HttpResponse sweep_endpoint(const PipelineSession& session, const json& body) {
  check_fingerprint(body, session.schema);
  if (!body.contains("attribute") || !body["attribute"].is_string()) {
    throw HttpError(400, "'attribute' must name a schema attribute");
  }
  const std::string attribute = body["attribute"];
  if (!session.schema.contains(attribute)) throw HttpError(400, "unknown attribute '" + attribute + "'");
  const auto base = attributes_from(body, "base", session.schema);
  std::vector<double> weights(std::begin(kSweepWeights), std::end(kSweepWeights));
  if (body.contains("weights") && !body["weights"].is_null()) {
    if (!body["weights"].is_array()) throw HttpError(400, "'weights' must be an array");
    weights.clear();
    for (const auto& w : body["weights"]) weights.push_back(attribute_value(w, "weights"));
  }
  const auto seed = seed_from(body);
  const auto flags = flags_from(body, session.flags);
  if (!flags.skip_stage2 && !session.stage2) throw HttpError(422, "Stage 2 is not loaded; set skip_stage2");
  const auto results = sweep(session, base, session.schema.index_of(attribute), seed, weights, flags);
  json images = json::array();
  for (const auto& r : results) images.push_back(png_base64(r.face));
  return json_response(200, {{"seed", seed}, {"attribute", attribute}, {"weights", weights}, {"images", images}});
}

}  // namespace

struct InferenceService::Server {
  httplib::Server http;
};

InferenceService::InferenceService(ServiceOptions options) : options_(std::move(options)) {}

InferenceService::~InferenceService() { stop(); }

void InferenceService::set_session(std::shared_ptr<const PipelineSession> session) {
  std::atomic_store(&session_, std::move(session));
}

bool InferenceService::ready() const { return std::atomic_load(&session_) != nullptr; }

HttpResponse InferenceService::handle(const std::string& method, const std::string& path,
                                      const std::string& body) const {
  if (path == "/healthz") {
    if (method != "GET") return error_response(405, "method not allowed");
    return json_response(200, {{"status", "ok"}, {"ready", ready()}});
  }
  const bool known = path == "/schema" || path == "/synthesize" || path == "/sweep";
  if (!known) return error_response(404, "no such endpoint");
  const bool get_ok = path == "/schema";
  if ((get_ok && method != "GET") || (!get_ok && method != "POST")) return error_response(405, "method not allowed");
  const auto session = std::atomic_load(&session_);
  if (!session) return error_response(503, "session not loaded");
  try {
    if (path == "/schema") return json_response(200, schema_json(session->schema));
    json request;
    try {
      request = body.empty() ? json::object() : json::parse(body);
    } catch (const json::exception&) {
      return error_response(400, "request body is not valid JSON");
    }
    if (!request.is_object()) return error_response(400, "request body must be a JSON object");
    if (path == "/synthesize") return synthesize_endpoint(*session, request);
    return sweep_endpoint(*session, request);
  } catch (const HttpError& e) {
    return error_response(e.status, e.what());
  } catch (const SchemaError& e) {
    return error_response(422, e.what());
  } catch (const std::exception& e) {
    log::error("request ", path, " failed: ", e.what());
    return error_response(500, e.what());
  }
}

int InferenceService::start() {
  if (server_) return bound_port_;
  server_ = std::make_unique<Server>();
  auto& http = server_->http;
  const auto cors = options_.cors_origin;
  http.set_default_headers({{"Access-Control-Allow-Origin", cors},
                            {"Access-Control-Allow-Methods", "GET, POST, OPTIONS"},
                            {"Access-Control-Allow-Headers", "Content-Type"}});
  auto forward = [this](const httplib::Request& req, httplib::Response& res) {
    const auto r = handle(req.method, req.path, req.body);
    res.status = r.status;
    res.set_content(r.body, r.content_type);
  };
  for (const char* p : {"/healthz", "/schema", "/synthesize", "/sweep"}) {
    http.Get(p, forward);
    http.Post(p, forward);
  }
  http.Options(R"(/.*)", [](const httplib::Request&, httplib::Response& res) { res.status = 204; });
  bound_port_ = options_.port == 0 ? http.bind_to_any_port(options_.host)
                                   : (http.bind_to_port(options_.host, options_.port) ? options_.port : -1);
  if (bound_port_ <= 0) {
    server_.reset();
    throw ConfigError("cannot bind " + options_.host + ":" + std::to_string(options_.port));
  }
  thread_ = std::thread([this] { server_->http.listen_after_bind(); });
  log::info("serving on http://", options_.host, ":", bound_port_);
  return bound_port_;
}

void InferenceService::run() {
  start();
  if (thread_.joinable()) thread_.join();
}

void InferenceService::stop() {
  if (server_) server_->http.stop();
  if (thread_.joinable()) thread_.join();
  server_.reset();
}

}  // namespace a2f
