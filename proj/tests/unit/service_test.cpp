#include <gtest/gtest.h>

#include <httplib.h>

#include <fstream>
#include <json.hpp>
#include <thread>

#include "service/fixtures.hpp"
#include "service/http_server.hpp"
#include "service/manifest.hpp"
#include "service/pipeline.hpp"
#include "service/query_engine.hpp"
#include "tda/error.hpp"
#include "test_support.hpp"

namespace tda::service {
namespace {

using nlohmann::json;

struct Project {
  std::filesystem::path dir;
  std::size_t n = 4000;

  Project() {
    dir = test::scratch_dir("service_project");
    const auto mixture = two_gaussians();
    write_csv(synth_gaussian_mixture(2, mixture, n, 5), dir / "input.csv");
    run_ingest({{dir / "input.csv", TableFormat::csv, {}}, dir / "p", std::nullopt});
    run_topology({dir / "p", {"f", Transform::identity}, {16, 1.0, WitnessMode::strict, true},
                  GradientMode::difference_over_distance});
    CubeOptions cubes;
    cubes.project = dir / "p";
    cubes.max_leaves = 8;
    run_cubes(cubes);
  }
};

const Project& project() {
  static const Project p;
  return p;
}

const QueryEngine& engine() {
  static const QueryEngine e(project().dir / "p");
  return e;
}

TEST(Manifest, ListsArtifactsWithHashes) {
  const auto m = load_manifest(project().dir / "p");
  EXPECT_EQ(m.engine_version, kEngineVersion);
  ASSERT_TRUE(m.topology);
  ASSERT_TRUE(m.cubes);
  EXPECT_EQ(m.dataset.n, project().n);
  EXPECT_EQ(m.topology->artifact.sha256, sha256_file(project().dir / "p" / kTopologyFile));
  EXPECT_EQ(m.cubes->topology_sha256, m.topology->artifact.sha256);
  EXPECT_EQ(m.cubes->max_leaves, 8u);
  EXPECT_NO_THROW(verify_artifacts(project().dir / "p", m));
}

TEST(Manifest, Sha256OfKnownInput) {
  const auto dir = test::scratch_dir("sha");
  std::ofstream(dir / "abc") << "abc";
  EXPECT_EQ(sha256_file(dir / "abc"), "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
}

TEST(Manifest, DetectsTamperedArtifact) {
  const auto dir = test::scratch_dir("tamper");
  std::filesystem::copy(project().dir / "p", dir / "p");
  {
    std::fstream io(dir / "p" / kCubesFile, std::ios::in | std::ios::out | std::ios::binary);
    io.seekp(100);
    io.put('\x7f');
  }
  try {
    verify_artifacts(dir / "p", load_manifest(dir / "p"));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::format);
  }
}

TEST(Manifest, MissingProjectIsInputError) {
  try {
    load_manifest("/nonexistent/project");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::input);
  }
}

TEST(Manifest, EnumNamesRoundTrip) {
  for (const auto m : {WitnessMode::strict, WitnessMode::relaxed}) EXPECT_EQ(parse_witness_mode(to_string(m)), m);
  for (const auto t : {Transform::identity, Transform::negate}) EXPECT_EQ(parse_transform(to_string(t)), t);
  for (const auto g : {GradientMode::difference_over_distance, GradientMode::raw_difference})
    EXPECT_EQ(parse_gradient_mode(to_string(g)), g);
  EXPECT_THROW(parse_witness_mode("loose"), Error);
  EXPECT_EQ(function_axis_name({"err", Transform::negate}), "-err");
}

TEST(Pipeline, StagesAreIdempotent) {
  const auto dir = test::scratch_dir("idempotent");
  std::filesystem::copy(project().dir / "p", dir / "p");
  const auto before_t = test::read_bytes(dir / "p" / kTopologyFile);
  const auto before_c = test::read_bytes(dir / "p" / kCubesFile);
  run_topology({dir / "p", {"f", Transform::identity}, {16, 1.0, WitnessMode::strict, true},
                GradientMode::difference_over_distance});
  EXPECT_FALSE(load_manifest(dir / "p").cubes) << "topology stage must drop stale cubes";
  CubeOptions cubes;
  cubes.project = dir / "p";
  cubes.max_leaves = 8;
  run_cubes(cubes);
  EXPECT_EQ(test::read_bytes(dir / "p" / kTopologyFile), before_t);
  EXPECT_EQ(test::read_bytes(dir / "p" / kCubesFile), before_c);
}

TEST(Pipeline, CubesNeedTopology) {
  const auto dir = test::scratch_dir("no_topology");
  run_ingest({{project().dir / "input.csv", TableFormat::csv, {}}, dir / "p", std::nullopt});
  CubeOptions cubes;
  cubes.project = dir / "p";
  try {
    run_cubes(cubes);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::config);
  }
}

TEST(Pipeline, IngestWithDensity) {
  const auto dir = test::scratch_dir("density");
  const auto s = run_ingest({{project().dir / "input.csv", TableFormat::csv, {}}, dir / "p", 20});
  EXPECT_EQ(s.measure_dims, 2u);
  EXPECT_EQ(load_manifest(dir / "p").dataset.measures.back(), "density_k20");
}

TEST(Pipeline, GraphStatsOnSquare) {
  const auto dir = test::scratch_dir("graph_stats");
  write_csv(test::square_corners(), dir / "sq.csv");
  const auto csv = run_graph_stats({{dir / "sq.csv", TableFormat::csv, {}}, {8, 16, 32}, 1.0, WitnessMode::strict});
  EXPECT_EQ(csv, "k_requested,k,edges\n8,3,4\n16,3,4\n32,3,4\n");
}

TEST(Pipeline, OracleChecksPass) {
  const auto dir = test::scratch_dir("oracle");
  write_csv(synth_gaussian_mixture(2, two_gaussians(), 400, 3), dir / "small.csv");
  const auto checks = run_oracle({{dir / "small.csv", TableFormat::csv, {}}, {"f", Transform::identity},
                                  {10, 1.0, WitnessMode::strict, true}});
  ASSERT_GE(checks.size(), 7u);
  for (const auto& c : checks) EXPECT_TRUE(c.passed) << c.name << ": " << c.detail;
}

AggregateCube all_segments(double t, const std::vector<VertexId>& segments) {
  const auto& e = engine();
  const MaximaMap map(e.topology().hierarchy, e.topology().base.maxima, t);
  std::vector<LeafCube> chosen;
  for (const auto& leaf : e.cubes().leaves)
    if (segments.empty() || std::count(segments.begin(), segments.end(), map(leaf.leaf)))
      chosen.push_back(leaf);
  return merge_cubes(std::span<const LeafCube>(chosen));
}

TEST(QueryEngine, SegmentsAtOneCoverEverything) {
  const auto body = engine().segments(1.0);
  ASSERT_EQ(body.at("segments").size(), 1u);
  EXPECT_EQ(body.at("segments")[0].at("count").get<std::size_t>(), project().n);
  EXPECT_EQ(body.at("total").get<std::size_t>(), project().n);
}

TEST(QueryEngine, SegmentsMatchLibrary) {
  const auto& e = engine();
  for (const double t : {e.cubes().t_base, 0.3, 1.0}) {
    const auto body = e.segments(t);
    const auto cubes = segment_cubes(e.cubes(), e.topology(), t);
    const MaximaMap map(e.topology().hierarchy, e.topology().base.maxima, t);
    ASSERT_EQ(body.at("segments").size(), cubes.size());
    for (std::size_t i = 0; i < cubes.size(); ++i) {
      EXPECT_EQ(body.at("segments")[i].at("id").get<VertexId>(), map.survivors()[i]);
      EXPECT_EQ(body.at("segments")[i].at("count").get<std::uint64_t>(), cubes[i].counts.count);
      EXPECT_EQ(body.at("segments")[i].at("f_max").get<double>(), e.function()[map.survivors()[i]]);
    }
  }
}

TEST(QueryEngine, Hist2dMatchesLibraryAndSegments) {
  const auto& e = engine();
  const double t = 0.3;
  const auto segs = e.segments(t).at("segments");
  for (const auto& s : segs) {
    const VertexId id = s.at("id").get<VertexId>();
    const auto body = e.hist2d(t, {id}, "x0", "x1");
    const auto want = hist2d(all_segments(t, {id}), 0, 1);
    EXPECT_EQ(body.at("counts").get<std::vector<std::uint64_t>>(), want);
    EXPECT_EQ(std::accumulate(want.begin(), want.end(), std::uint64_t{0}), s.at("count").get<std::uint64_t>());
    EXPECT_EQ(body.at("total").get<std::uint64_t>(), s.at("count").get<std::uint64_t>());
  }
}

TEST(QueryEngine, PcpMatchesMergeThenPcp) {
  const auto& e = engine();
  const auto& layout = *e.cubes().layout;
  const double t = 0.3;
  const auto body = e.pcp(t, {}, {});
  std::vector<std::size_t> order(layout.axis_count());
  std::iota(order.begin(), order.end(), 0);
  const auto grids = pcp_pairs(all_segments(t, {}), order);
  ASSERT_EQ(body.at("grids").size(), grids.size());
  for (std::size_t k = 0; k < grids.size(); ++k)
    EXPECT_EQ(body.at("grids")[k].at("counts").get<std::vector<std::uint64_t>>(), grids[k]);

  const auto reordered = e.pcp(t, {}, {"f", "x1", "x0"});
  const std::size_t custom[] = {layout.axis_index("f"), 1, 0};
  const auto custom_grids = pcp_pairs(all_segments(t, {}), custom);
  for (std::size_t k = 0; k < 2; ++k)
    EXPECT_EQ(reordered.at("grids")[k].at("counts").get<std::vector<std::uint64_t>>(), custom_grids[k]);
}

TEST(QueryEngine, SpineMatchesLibrary) {
  const auto& e = engine();
  const auto body = e.spine(0.3);
  const auto spine = build_spine(e.table(), e.function(), e.topology(), e.cubes(), 0.3, e.spine_config());
  EXPECT_EQ(body, json::parse(spine_json(spine)));
}

TEST(QueryEngine, PersistenceCurveMatchesLibrary) {
  const auto& e = engine();
  const auto body = e.persistence_curve();
  const auto curve = persistence_curve(e.topology().hierarchy);
  ASSERT_EQ(body.at("points").size(), curve.size());
  for (std::size_t i = 0; i < curve.size(); ++i) {
    EXPECT_EQ(body.at("points")[i].at("t").get<double>(), curve[i].t);
    EXPECT_EQ(body.at("points")[i].at("count").get<std::size_t>(), curve[i].count);
  }
  EXPECT_EQ(body.at("events").size(), e.topology().hierarchy.events.size());
}

TEST(QueryEngine, MetaDescribesTable) {
  const auto body = engine().meta();
  EXPECT_EQ(body.at("n").get<std::size_t>(), project().n);
  EXPECT_EQ(body.at("d").get<std::size_t>(), 2u);
  EXPECT_EQ(body.at("axes").size(), 3u);
  EXPECT_EQ(body.at("resolution").get<std::size_t>(), 64u);
  EXPECT_LE(body.at("leaves").get<std::size_t>(), 8u);
}

TEST(QueryEngine, SelectionMatchesLibrary) {
  const auto& e = engine();
  const double t = 0.3;
  const json request = {{"t", t},
                        {"predicate", {{"ranges", {{{"axis", "x0"}, {"lo", 0.0}, {"hi", 0.5}}}}}},
                        {"scatter", {{"x", "x0"}, {"y", "x1"}}}};
  bool hit = true;
  const auto body = e.selection(request, &hit);
  EXPECT_FALSE(hit);
  auto spine = build_spine(e.table(), e.function(), e.topology(), e.cubes(), t, e.spine_config());
  const auto levels = spine_levels(spine);
  const auto seg = segmentation_at(e.topology().hierarchy, e.topology().base, t);
  const auto& layout = *e.cubes().layout;
  const auto result = selection_scan(e.table(), e.function(), layout, seg, {{{"x0", 0.0, 0.5}}}, levels,
                                     ScatterRequest{0, 1, {}});
  shade_contours(spine, result, t);
  ASSERT_EQ(body.at("segments").size(), result.segments.size());
  for (std::size_t i = 0; i < result.segments.size(); ++i) {
    EXPECT_EQ(body.at("segments")[i].at("selected").get<std::uint64_t>(), result.segments[i].selected);
    EXPECT_EQ(body.at("segments")[i].at("total").get<std::uint64_t>(), result.segments[i].total);
  }
  ASSERT_EQ(body.at("contours").size(), spine.contours.size());
  for (std::size_t i = 0; i < spine.contours.size(); ++i)
    EXPECT_EQ(body.at("contours")[i].at("fraction").get<double>(), spine.contours[i].fraction);
  EXPECT_EQ(body.at("scatter").at("counts").get<std::vector<std::uint64_t>>(), result.scatter);

  const auto again = e.selection(request, &hit);
  EXPECT_TRUE(hit);
  EXPECT_EQ(again.dump(), body.dump());
}

TEST(QueryEngine, ErrorsMapToStatus) {
  const auto& e = engine();
  EXPECT_EQ(e.handle_get("/v1/segments", {}).status, 400);
  EXPECT_EQ(e.handle_get("/v1/segments", {{"t", "abc"}}).status, 400);
  EXPECT_EQ(e.handle_get("/v1/segments", {{"t", "1.5"}}).status, 400);
  EXPECT_EQ(e.handle_get("/v1/hist2d", {{"t", "0.5"}, {"x", "x0"}, {"y", "zz"}}).status, 404);
  EXPECT_EQ(e.handle_get("/v1/hist2d", {{"t", "0.5"}, {"x", "x0"}, {"y", "x1"}, {"segments", "999999"}}).status, 404);
  EXPECT_EQ(e.handle_get("/v1/nope", {}).status, 404);
  EXPECT_EQ(e.handle_post("/v1/selection", "{not json").status, 400);
  EXPECT_EQ(e.handle_post("/v1/selection", R"({"t": 0.5, "predicate": {"ranges": [{"axis": "x0", "lo": 1, "hi": 0}]}})").status,
            400);
  const auto err = json::parse(e.handle_get("/v1/segments", {}).body);
  EXPECT_EQ(err.at("error").at("code"), "E_CONFIG");
}

TEST(QueryEngine, BelowLeafLevelIsConflict) {
  const auto& e = engine();
  ASSERT_GT(e.cubes().t_base, 0.0) << "fixture should need simplification to reach 8 leaves";
  const auto response = e.handle_get("/v1/segments", {{"t", std::to_string(e.cubes().t_base / 2)}});
  EXPECT_EQ(response.status, 409);
  EXPECT_EQ(json::parse(response.body).at("error").at("code"), "E_CONFLICT");
}

TEST(QueryEngine, RequiresCubes) {
  const auto dir = test::scratch_dir("no_cubes");
  run_ingest({{project().dir / "input.csv", TableFormat::csv, {}}, dir / "p", std::nullopt});
  try {
    QueryEngine e(dir / "p");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::config);
  }
}

class HttpFixture : public ::testing::Test {
 protected:
  void SetUp() override {
    server_ = std::make_unique<HttpServer>(engine());
    port_ = server_->bind("127.0.0.1", 0);
    thread_ = std::thread([this] { server_->listen(); });
    server_->wait_until_ready();
  }
  void TearDown() override {
    server_->stop();
    thread_.join();
  }
  httplib::Client client() const { return httplib::Client("127.0.0.1", port_); }

  std::unique_ptr<HttpServer> server_;
  int port_ = 0;
  std::thread thread_;
};

TEST_F(HttpFixture, EndpointsMatchEngine) {
  auto c = client();
  const auto& e = engine();
  const std::pair<std::string, json> cases[] = {
      {"/v1/meta", e.meta()},
      {"/v1/persistence-curve", e.persistence_curve()},
      {"/v1/segments?t=0.3", e.segments(0.3)},
      {"/v1/spine?t=0.3", e.spine(0.3)},
      {"/v1/hist2d?t=0.3&x=x1&y=f", e.hist2d(0.3, {}, "x1", "f")},
      {"/v1/pcp?t=0.3&order=x1,x0,f", e.pcp(0.3, {}, {"x1", "x0", "f"})},
  };
  for (const auto& [path, want] : cases) {
    const auto res = c.Get(path);
    ASSERT_TRUE(res) << path;
    EXPECT_EQ(res->status, 200) << path;
    EXPECT_EQ(res->get_header_value("Content-Type"), "application/json");
    EXPECT_EQ(json::parse(res->body), want) << path;
  }
}

TEST_F(HttpFixture, SelectionIsDeterministicAndEchoesRequestId) {
  auto c = client();
  const std::string body = R"({"t": 0.3, "predicate": {"ranges": [{"axis": "x1", "lo": 0.2, "hi": 0.6}]}})";
  const httplib::Headers headers = {{"X-Request-Id", "req-42"}};
  const auto a = c.Post("/v1/selection", headers, body, "application/json");
  const auto b = c.Post("/v1/selection", headers, body, "application/json");
  ASSERT_TRUE(a && b);
  EXPECT_EQ(a->status, 200);
  EXPECT_EQ(a->body, b->body);
  EXPECT_EQ(a->get_header_value("X-Request-Id"), "req-42");
  EXPECT_EQ(b->get_header_value("X-Cache"), "hit");
  EXPECT_FALSE(a->get_header_value("X-Scan-Ms").empty());
}

TEST_F(HttpFixture, ErrorStatusCodes) {
  auto c = client();
  EXPECT_EQ(c.Get("/v1/segments?t=-1")->status, 400);
  EXPECT_EQ(c.Get("/v1/hist2d?t=0.5&x=x0&y=missing")->status, 404);
  EXPECT_EQ(c.Get("/v1/unknown")->status, 404);
  EXPECT_EQ(c.Get("/elsewhere")->status, 404);
  const auto conflict = c.Get(("/v1/pcp?t=" + std::to_string(engine().cubes().t_base / 2)).c_str());
  EXPECT_EQ(conflict->status, 409);
}

TEST_F(HttpFixture, ConcurrentClientsAgree) {
  const auto want = engine().hist2d(0.3, {}, "x0", "x1").dump();
  std::vector<std::thread> threads;
  std::atomic<int> mismatches{0};
  for (int i = 0; i < 4; ++i)
    threads.emplace_back([&] {
      auto c = client();
      for (int k = 0; k < 5; ++k) {
        const auto res = c.Get("/v1/hist2d?t=0.3&x=x0&y=x1");
        if (!res || res->status != 200 || json::parse(res->body).dump() != want) ++mismatches;
      }
    });
  for (auto& t : threads) t.join();
  EXPECT_EQ(mismatches.load(), 0);
}

}  // namespace
}  // namespace tda::service
