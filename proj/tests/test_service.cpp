#include <gtest/gtest.h>

#include <unistd.h>

#include <chrono>

#include "generators.hpp"
#include "hypso/service.hpp"

using namespace hypso;

namespace {

const std::string kFixtures = HYPSO_FIXTURES;

std::string text(const std::string& path) {
  const auto b = read_file(path);
  return {b.begin(), b.end()};
}

TransferConfig quick() {
  TransferConfig c;
  c.zones = 4;
  c.optimizer.iterations = 40;
  c.optimizer.population = 16;
  return c;
}

httplib::MultipartFormDataItems job_form(const std::string& image = "autumn.png", const std::string& dem = "ridge.asc",
                                         const Json& params = Json::object()) {
  httplib::MultipartFormDataItems items = {
      {"image", text(kFixtures + "/" + image), image, "application/octet-stream"},
      {"dem", text(kFixtures + "/" + dem), dem, "application/octet-stream"},
  };
  if (!params.empty()) items.push_back({"params", params.dump(), "params.json", "application/json"});
  return items;
}

struct Harness {
  explicit Harness(ServiceOptions opts = {}) : service(std::move(opts)), port(service.start()), client("127.0.0.1", port) {
    client.set_read_timeout(60, 0);
  }
  Service service;
  int port;
  httplib::Client client;

  Json get_json(const std::string& path, int expect = 200) {
    const auto res = client.Get(path);
    EXPECT_TRUE(res);
    if (!res) return {};
    EXPECT_EQ(res->status, expect) << path << ": " << res->body;
    return Json::parse(res->body);
  }

  std::string submit(const httplib::MultipartFormDataItems& form) {
    const auto res = client.Post("/api/jobs", form);
    EXPECT_TRUE(res);
    EXPECT_EQ(res->status, 202) << res->body;
    return Json::parse(res->body).at("id").get<std::string>();
  }
};

ServiceOptions defaults() {
  ServiceOptions o;
  o.defaults = quick();
  return o;
}

}  // namespace

TEST(Service, Health) {
  Harness h;
  const auto j = h.get_json("/api/health");
  EXPECT_EQ(j["schema"], kApiSchema);
  EXPECT_EQ(j["status"], "ok");
  EXPECT_EQ(j["version"], kVersion);
}

TEST(Service, AnalyzeReturnsTheGrid) {
  Harness h;
  httplib::MultipartFormDataItems form = {{"image", text(kFixtures + "/sunset.jpg"), "sunset.jpg", "image/jpeg"},
                                          {"params", R"({"grid_size": 6})", "", "application/json"}};
  const auto res = h.client.Post("/api/analyze", form);
  ASSERT_TRUE(res);
  ASSERT_EQ(res->status, 200) << res->body;
  const auto j = Json::parse(res->body);
  EXPECT_EQ(j["schema"], kApiSchema);
  EXPECT_EQ(j["w"], 6);
  EXPECT_FALSE(j["dominants"].empty());
}

TEST(Service, JobLifecycle) {
  auto opts = defaults();
  opts.start_paused = true;
  Harness h(opts);
  const auto id = h.submit(job_form());
  EXPECT_EQ(h.get_json("/api/jobs/" + id)["status"], "pending");
  EXPECT_EQ(h.get_json("/api/jobs/" + id + "/scheme", 409)["schema"], kApiSchema);
  h.service.resume();
  h.service.drain();
  const auto done = h.get_json("/api/jobs/" + id);
  EXPECT_EQ(done["status"], "done");
  EXPECT_EQ(done["history"], (Json{"pending", "running", "done"}));
  EXPECT_FALSE(done["pareto"]["solutions"].empty());
  EXPECT_EQ(done["zones"]["n"], 4);
  EXPECT_EQ(done["manifest"]["schema"], "hypso.manifest/1");
}

TEST(Service, MatchesTheLibraryRun) {
  Harness h(defaults());
  const auto id = h.submit(job_form());
  h.service.drain();
  const auto doc = h.get_json("/api/jobs/" + id);
  const auto local = run_transfer(image_from_file(kFixtures + "/autumn.png"), DemInput::from_file(kFixtures + "/ridge.asc"), quick());
  EXPECT_EQ(doc["pareto"], pareto_to_json(local.archive));
  EXPECT_EQ(doc["manifest"]["result"], local.manifest.document["result"]);
}

TEST(Service, RenderAndSchemeEndpoints) {
  Harness h(defaults());
  const auto id = h.submit(job_form());
  h.service.drain();
  const auto doc = h.get_json("/api/jobs/" + id);
  const auto front_size = doc["pareto"]["solutions"].size();
  const auto mid = doc["pareto"]["midpoint"].get<std::size_t>();

  const auto png = h.client.Get("/api/jobs/" + id + "/render");
  ASSERT_TRUE(png);
  ASSERT_EQ(png->status, 200);
  EXPECT_EQ(png->get_header_value("Content-Type"), "image/png");
  const auto img = decode_image(Bytes(png->body.begin(), png->body.end()));
  const auto dem = load_dem(kFixtures + "/ridge.asc");
  EXPECT_EQ(img.width, dem.cols);

  const auto small = h.client.Get("/api/jobs/" + id + "/render?solution=0&width=64");
  ASSERT_TRUE(small);
  ASSERT_EQ(small->status, 200);
  EXPECT_EQ(decode_image(Bytes(small->body.begin(), small->body.end())).width, 64);

  EXPECT_EQ(h.client.Get("/api/jobs/" + id + "/render?solution=" + std::to_string(front_size))->status, 404);
  EXPECT_EQ(h.client.Get("/api/jobs/" + id + "/render?solution=-1")->status, 404);
  EXPECT_EQ(h.client.Get("/api/jobs/" + id + "/render?width=0")->status, 400);
  EXPECT_EQ(h.client.Get("/api/jobs/" + id + "/render?width=5000")->status, 400);
  EXPECT_EQ(h.client.Get("/api/jobs/" + id + "/render?solution=abc")->status, 400);

  // The default scheme is the midpoint, and it is byte-identical to the
  // library's export of the same solution.
  const auto scheme = h.client.Get("/api/jobs/" + id + "/scheme");
  ASSERT_TRUE(scheme);
  const auto explicit_mid = h.client.Get("/api/jobs/" + id + "/scheme?solution=" + std::to_string(mid));
  EXPECT_EQ(scheme->body, explicit_mid->body);
  const auto local = run_transfer(image_from_file(kFixtures + "/autumn.png"), DemInput::from_file(kFixtures + "/ridge.asc"), quick());
  EXPECT_EQ(scheme->body, scheme_document(local.midpoint).dump());
}

TEST(Service, ErrorStatuses) {
  Harness h(defaults());
  EXPECT_EQ(h.get_json("/api/jobs/job-999", 404)["schema"], kApiSchema);
  EXPECT_EQ(h.client.Get("/api/jobs/job-999/render")->status, 404);

  httplib::MultipartFormDataItems missing = {{"image", text(kFixtures + "/autumn.png"), "autumn.png", ""}};
  EXPECT_EQ(h.client.Post("/api/jobs", missing)->status, 400);
  EXPECT_EQ(h.client.Post("/api/jobs", job_form("autumn.png", "ridge.asc", Json{{"gama", 3}}))->status, 400);
  EXPECT_EQ(h.client.Post("/api/jobs", job_form("autumn.png", "ridge.asc", Json{{"zones", 1}}))->status, 400);

  httplib::MultipartFormDataItems bad = {{"image", "not an image", "x.png", ""}};
  const auto res = h.client.Post("/api/analyze", bad);
  ASSERT_TRUE(res);
  EXPECT_EQ(res->status, 400);
  EXPECT_EQ(Json::parse(res->body)["stage"], "load_image");
}

TEST(Service, FailedJobsCarryTheirStage) {
  Harness h(defaults());
  const auto id = h.submit(job_form("truncated.png"));
  h.service.drain();
  const auto doc = h.get_json("/api/jobs/" + id);
  EXPECT_EQ(doc["status"], "failed");
  EXPECT_EQ(doc["error"]["stage"], "load_image");
  EXPECT_EQ(doc["history"], (Json{"pending", "running", "failed"}));
}

TEST(Service, HealthAnswersWhileAJobRuns) {
  auto opts = defaults();
  opts.defaults.optimizer.iterations = 4000;
  Harness h(opts);
  const auto id = h.submit(job_form());
  const auto t0 = std::chrono::steady_clock::now();
  const auto j = h.get_json("/api/health");
  const auto elapsed = std::chrono::steady_clock::now() - t0;
  EXPECT_EQ(j["status"], "ok");
  EXPECT_LT(elapsed, std::chrono::milliseconds(500));
  EXPECT_NE(h.get_json("/api/jobs/" + id)["status"], "done");
  h.service.drain();
  EXPECT_EQ(h.get_json("/api/jobs/" + id)["status"], "done");
}

TEST(Service, JobsRunInSubmissionOrder) {
  auto opts = defaults();
  opts.start_paused = true;
  Harness h(opts);
  const auto a = h.submit(job_form());
  const auto b = h.submit(job_form("meadow.png"));
  EXPECT_EQ(a, "job-1");
  EXPECT_EQ(b, "job-2");
  h.service.resume();
  h.service.drain();
  EXPECT_EQ(h.get_json("/api/jobs/" + a)["status"], "done");
  EXPECT_EQ(h.get_json("/api/jobs/" + b)["status"], "done");
}

TEST(Service, PersistsResults) {
  const auto dir = std::filesystem::temp_directory_path() / ("hypso-persist-" + std::to_string(::getpid()));
  std::filesystem::remove_all(dir);
  auto opts = defaults();
  opts.persist_dir = dir;
  {
    Harness h(opts);
    const auto id = h.submit(job_form());
    h.service.drain();
    for (const char* f : {"manifest.json", "pareto.json", "zones.json"}) EXPECT_TRUE(std::filesystem::exists(dir / id / f)) << f;
    const auto manifest = Json::parse(text((dir / id / "manifest.json").string()));
    EXPECT_EQ(manifest, h.get_json("/api/jobs/" + id)["manifest"]);
  }
  std::filesystem::remove_all(dir);
}

TEST(Service, HeightmapWithSidecarField) {
  Harness h(defaults());
  auto form = job_form("meadow.png", "mountain.png");
  form.push_back({"dem_sidecar", text(kFixtures + "/mountain.json"), "mountain.json", "application/json"});
  const auto id = h.submit(form);
  h.service.drain();
  EXPECT_EQ(h.get_json("/api/jobs/" + id)["status"], "done");

  const auto no_sidecar = h.submit(job_form("meadow.png", "mountain.png"));
  h.service.drain();
  EXPECT_EQ(h.get_json("/api/jobs/" + no_sidecar)["error"]["stage"], "load_dem");
}
