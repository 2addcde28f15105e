#include "testing.hpp"

#include <httplib.h>
#include <json.hpp>

#include "a2f/image.hpp"
#include "a2f/service.hpp"
#include "a2f/util.hpp"
#include "fixtures.hpp"

using namespace a2f;
using nlohmann::json;

namespace {

InferenceService& ready_service() {
  static InferenceService service;
  if (!service.ready()) service.set_session(testing::tiny_session());
  return service;
}

json post(const std::string& path, const json& body, int expect = 200) {
  const auto r = ready_service().handle("POST", path, body.dump());
  CHECK(r.status == expect);
  return json::parse(r.body);
}

}  // namespace

TEST_CASE("503 until a session is loaded, health always answers") {
  InferenceService cold;
  CHECK_FALSE(cold.ready());
  CHECK(cold.handle("GET", "/healthz", "").status == 200);
  CHECK(json::parse(cold.handle("GET", "/healthz", "").body)["ready"] == false);
  CHECK(cold.handle("GET", "/schema", "").status == 503);
  CHECK(cold.handle("POST", "/synthesize", "{}").status == 503);
  CHECK(cold.handle("POST", "/sweep", "{}").status == 503);
}

TEST_CASE("schema lists 19 grouped attributes in checkpoint order") {
  const auto r = ready_service().handle("GET", "/schema", "");
  REQUIRE(r.status == 200);
  const auto s = AttributeSchema::from_json(r.body);
  CHECK(s == default_schema());
  const auto j = json::parse(r.body);
  CHECK(j["attributes"].size() == 19);
  CHECK(j["attributes"][0]["group"] == "texture");
  CHECK(j["attributes"][18]["group"] == "color");
  CHECK(j["fingerprint"] == default_schema().fingerprint());
}

TEST_CASE("synthesize is deterministic for an explicit seed") {
  const json body = {{"attributes", {{"Male", 1.0}, {"Smiling", 0.4}}}, {"seed", 11}};
  const auto a = post("/synthesize", body);
  const auto b = post("/synthesize", body);
  CHECK(a["seed"] == 11);
  for (const char* k : {"stage1", "stage2", "stage3"}) {
    CHECK(a["images"][k] == b["images"][k]);
    const auto png = base64_decode(a["images"][k].get<std::string>());
    CHECK(decode_image(png).width == 64);
  }
  CHECK(a["meta"]["seed"] == 11);
}

TEST_CASE("a missing seed is drawn, echoed and replayable") {
  const auto a = post("/synthesize", {{"attributes", json::object()}});
  REQUIRE(a.contains("seed"));
  const auto replay = post("/synthesize", {{"attributes", json::object()}, {"seed", a["seed"]}});
  CHECK(replay["images"]["stage3"] == a["images"]["stage3"]);
}

TEST_CASE("attribute arrays must match the schema") {
  std::vector<double> v(19, -1.0);
  CHECK(post("/synthesize", {{"attributes", v}, {"seed", 1}})["seed"] == 1);
  v.pop_back();
  post("/synthesize", {{"attributes", v}, {"seed", 1}}, 422);
  post("/synthesize", {{"attributes", json::object()}, {"schema_fingerprint", "0000"}}, 422);
}

TEST_CASE("bad requests are 400") {
  post("/synthesize", {{"attributes", {{"Male", 1.5}}}}, 400);
  post("/synthesize", {{"attributes", {{"Wearing_Hat", 1.0}}}}, 400);
  post("/synthesize", {{"attributes", {{"Male", "yes"}}}}, 400);
  post("/synthesize", {{"attributes", json::object()}, {"flags", {{"turbo", true}}}}, 400);
  CHECK(ready_service().handle("POST", "/synthesize", "{not json").status == 400);
  post("/sweep", {{"attribute", "Wearing_Hat"}}, 400);
}

TEST_CASE("unknown routes and methods") {
  CHECK(ready_service().handle("GET", "/nope", "").status == 404);
  CHECK(ready_service().handle("GET", "/synthesize", "").status == 405);
}

TEST_CASE("sweep returns one stage-3 image per weight") {
  const auto strip = post("/sweep", {{"attribute", "Male"}, {"seed", 4}});
  CHECK(strip["images"].size() == 6);
  CHECK(strip["weights"] == json(std::vector<double>(std::begin(kSweepWeights), std::end(kSweepWeights))));
  CHECK(post("/sweep", {{"attribute", "Male"}, {"seed", 4}})["images"] == strip["images"]);
  CHECK(post("/sweep", {{"attribute", "Male"}, {"weights", {0.5}}})["images"].size() == 1);
  post("/sweep", {{"attribute", "Male"}, {"weights", {2.0}}}, 400);
}

TEST_CASE("flags select ablations over the same session") {
  const json base = {{"attributes", {{"Male", 1.0}}}, {"seed", 2}};
  auto flagged = base;
  flagged["flags"] = {{"no_attr_stage3", true}};
  const auto a = post("/synthesize", base);
  const auto b = post("/synthesize", flagged);
  CHECK(a["images"]["stage2"] == b["images"]["stage2"]);
  CHECK(a["images"]["stage3"] != b["images"]["stage3"]);
}

TEST_CASE("HTTP transport with CORS") {
  InferenceService service(ServiceOptions{"127.0.0.1", 0, "http://localhost:5173"});
  service.set_session(testing::tiny_session());
  const int port = service.start();
  REQUIRE(port > 0);
  httplib::Client client("127.0.0.1", port);
  auto health = client.Get("/healthz");
  REQUIRE(health);
  CHECK(health->status == 200);
  CHECK(health->get_header_value("Access-Control-Allow-Origin") == "http://localhost:5173");
  auto pre = client.Options("/synthesize");
  REQUIRE(pre);
  CHECK(pre->status == 204);
  auto r = client.Post("/synthesize", json{{"attributes", json::object()}, {"seed", 3}}.dump(), "application/json");
  REQUIRE(r);
  CHECK(r->status == 200);
  CHECK(json::parse(r->body)["seed"] == 3);
  auto bad = client.Post("/synthesize", "{}x", "application/json");
  REQUIRE(bad);
  CHECK(bad->status == 400);
  service.stop();
}
