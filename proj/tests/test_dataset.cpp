#include <catch2/catch_amalgamated.hpp>

#include <aeroduo/dataset.hpp>

#include <cctype>
#include <sstream>

#include "test_util.hpp"

using namespace aeroduo;
using testutil::flat_world;
using testutil::make_target;

namespace {

// Independent clearance oracle: a low-path vertex must keep the collision
// radius away from every obstacle tall enough to reach the flight plane.
bool vertex_clear(const WorldModel& world, const Vec3& v, const ExpertConfig& cfg) {
  for (const auto& b : world.obstacles) {
    if (b.height < cfg.z_low - cfg.clearance) continue;
    if (b.distance_to({v.x, v.y, cfg.z_low}) <= cfg.collision_radius) return false;
  }
  return true;
}

}  // namespace

TEST_CASE("gen_low_traj: feasible path clears obstacles and reaches the target") {
  WorldModel world = flat_world(400.0);
  world.obstacles.push_back({150.0, 100.0, 170.0, 300.0, 40.0});  // wall with gaps at the ends
  ExpertConfig cfg;
  const Vec3 start{100.0, 200.0, cfg.z_low};
  const Vec3 target{300.0, 200.0, 0.0};

  auto path = gen_low_traj(world, start, target, cfg);
  REQUIRE(path.has_value());
  CHECK(distance_xy(path->front(), start) <= cfg.cell_size);
  CHECK(distance_xy(path->back(), target) <= cfg.reach_radius);
  for (const auto& v : *path) {
    CHECK(v.z == cfg.z_low);
    CHECK(vertex_clear(world, v, cfg));
  }
  // Detour around a 200 m wall: noticeably longer than the straight line.
  CHECK(polyline_length(*path) > 200.0 + 80.0);
}

TEST_CASE("gen_low_traj: enclosed target and blocked start are infeasible") {
  WorldModel world = flat_world(400.0);
  // Closed ring of walls around the target, taller than the flight plane.
  world.obstacles.push_back({180.0, 180.0, 220.0, 184.0, 40.0});
  world.obstacles.push_back({180.0, 216.0, 220.0, 220.0, 40.0});
  world.obstacles.push_back({180.0, 184.0, 184.0, 216.0, 40.0});
  world.obstacles.push_back({216.0, 184.0, 220.0, 216.0, 40.0});
  CHECK_FALSE(gen_low_traj(world, {100.0, 100.0, 20.0}, {200.0, 200.0, 0.0}).has_value());

  WorldModel blocked = flat_world(400.0);
  blocked.obstacles.push_back({90.0, 90.0, 110.0, 110.0, 40.0});
  CHECK_FALSE(gen_low_traj(blocked, {100.0, 100.0, 20.0}, {300.0, 300.0, 0.0}).has_value());
}

TEST_CASE("gen_low_traj: collision oracle over generated worlds") {
  ExpertConfig cfg;
  Rng rng(31);
  int feasible = 0;
  for (std::uint64_t seed = 50; seed < 56; ++seed) {
    WorldModel world = generate_world(seed, WorldGenParams{});
    for (int k = 0; k < 5; ++k) {
      const Vec3 start{rng.uniform(20.0, 380.0), rng.uniform(20.0, 380.0), cfg.z_low};
      const auto& tgt = world.targets[k % world.targets.size()];
      auto path = gen_low_traj(world, start, tgt.position, cfg);
      if (!path) continue;
      ++feasible;
      for (const auto& v : *path) CHECK(vertex_clear(world, v, cfg));
      // Segment midpoints too: consecutive cells are at most one diagonal apart.
      for (std::size_t i = 1; i < path->size(); ++i)
        CHECK(vertex_clear(world, ((*path)[i - 1] + (*path)[i]) * 0.5, cfg));
    }
  }
  CHECK(feasible > 10);
}

TEST_CASE("coverage_check: accepts covered paths, rejects gaps") {
  std::vector<Vec3> low = {{0.0, 0.0, 20.0}, {50.0, 0.0, 20.0}, {100.0, 0.0, 20.0}};
  // One pose at 100 m altitude with fov pi/2: half-side 100 covers everything.
  CHECK(coverage_check(low, {{50.0, 0.0, 100.0}}, kPi / 2.0));
  // Same pose at 40 m: half-side 40 misses the far endpoint.
  CHECK_FALSE(coverage_check(low, {{0.0, 0.0, 40.0}}, kPi / 2.0));
  CHECK(coverage_check(low, {{0.0, 0.0, 40.0}, {85.0, 0.0, 40.0}}, kPi / 2.0));
  CHECK(coverage_check({}, {}, kPi / 2.0));  // vacuously true
}

TEST_CASE("gen_high_traj: seeded runs always satisfy coverage and bounds") {
  WorldModel world = flat_world(400.0);
  ExpertConfig cfg;
  auto low = gen_low_traj(world, {50.0, 50.0, cfg.z_low}, {350.0, 350.0, 0.0}, cfg);
  REQUIRE(low.has_value());
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    auto high = gen_high_traj(*low, world, seed, cfg);
    REQUIRE_FALSE(high.empty());
    CHECK(coverage_check(*low, high, cfg.bev_fov));
    for (const auto& p : high) {
      CHECK(world.bounds.contains(p));
      CHECK(p.z >= cfg.z_high_min);
    }
  }
  CHECK_THROWS_AS(gen_high_traj({}, world, 0, cfg), std::invalid_argument);
}

TEST_CASE("make_instruction: grounded content, no coordinates or routes") {
  WorldModel world = flat_world(400.0);
  Target t = make_target(3, "red kiosk", {300.0, 200.0, 0.0}, {"small", "near building"});
  Instruction ins = make_instruction(world, t, {100.0, 200.0, 20.0});
  CHECK(ins.target_category == "red kiosk");
  CHECK(ins.direction_hint == 0);  // due east
  REQUIRE(ins.surroundings_tags.size() == 1);
  CHECK(ins.surroundings_tags[0] == "near building");
  REQUIRE(ins.attribute_tags.size() == 1);
  CHECK(ins.attribute_tags[0] == "small");
  CHECK(ins.text.find("east") != std::string::npos);
  CHECK(ins.text.find("red kiosk") != std::string::npos);

  // Determinism.
  CHECK(make_instruction(world, t, {100.0, 200.0, 20.0}).text == ins.text);

  // Lexical scan across generated worlds: instructions never leak numbers,
  // coordinates, or turn-by-turn phrasing.
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    WorldModel w = generate_world(seed, WorldGenParams{});
    for (const auto& tgt : w.targets) {
      Instruction i = make_instruction(w, tgt, {200.0, 200.0, 20.0});
      for (char c : i.text) CHECK_FALSE(std::isdigit(static_cast<unsigned char>(c)));
      for (const char* banned : {"meter", "turn left", "turn right", "waypoint", "(", ")"})
        CHECK(i.text.find(banned) == std::string::npos);
    }
  }
}

TEST_CASE("build_dataset: splits, feasibility, and reproducibility") {
  WorldModel w1 = generate_world(101, WorldGenParams{});
  WorldModel w2 = generate_world(102, WorldGenParams{});
  WorldModel w3 = generate_world(103, WorldGenParams{});
  std::vector<Scene> scenes = {{"scene_1", &w1}, {"scene_2", &w2}, {"scene_3", &w3}};

  DatasetParams params;
  params.pairs_per_scene = 5;
  params.unseen_map_scenes = {"scene_2"};
  params.unseen_object_categories = {w1.targets.front().category};

  DatasetManifest m = build_dataset(scenes, params, 2024);
  REQUIRE(m.pairs.size() == m.splits.size());
  CHECK(m.pairs.size() >= 12);
  CHECK(m.params_hash == hash_params(params));

  for (std::size_t i = 0; i < m.pairs.size(); ++i) {
    const auto& p = m.pairs[i];
    const Split s = m.splits[i];
    if (p.scene_id == "scene_2")
      CHECK(s == Split::UnseenMap);
    else if (params.unseen_object_categories.count(p.category))
      CHECK(s == Split::UnseenObject);
    else
      CHECK(s == Split::Train);

    REQUIRE_FALSE(p.low_path.empty());
    CHECK(distance_xy(p.low_path.front(), p.target) >= 2.0 * params.expert.reach_radius);
    CHECK(distance_xy(p.low_path.back(), p.target) <= params.expert.reach_radius);
    CHECK(coverage_check(p.low_path, p.high_path, params.expert.bev_fov));
    CHECK(p.l_star == Catch::Approx(polyline_length(p.low_path)));
    CHECK(p.t_star == Catch::Approx(p.l_star / params.expert.cruise_speed));
  }

  DatasetManifest again = build_dataset(scenes, params, 2024);
  std::ostringstream sa, sb;
  save_manifest(sa, m, "out/");
  save_manifest(sb, again, "out/");
  CHECK(sa.str() == sb.str());
  CHECK(sa.str().rfind("MANIFEST v1 2024 ", 0) == 0);

  DatasetManifest other = build_dataset(scenes, params, 2025);
  std::ostringstream sc;
  save_manifest(sc, other, "out/");
  CHECK(sc.str() != sa.str());
}

TEST_CASE("build_dataset: input validation") {
  WorldModel w1 = generate_world(101, WorldGenParams{});
  WorldModel w2 = generate_world(102, WorldGenParams{});
  WorldModel w3 = generate_world(103, WorldGenParams{});
  DatasetParams params;
  params.pairs_per_scene = 2;

  CHECK_THROWS_AS(build_dataset({{"a", &w1}, {"b", &w2}}, params, 1), std::invalid_argument);

  DatasetParams bad_holdout = params;
  bad_holdout.unseen_map_scenes = {"nonexistent"};
  CHECK_THROWS_AS(
      build_dataset({{"a", &w1}, {"b", &w2}, {"c", &w3}}, bad_holdout, 1),
      std::invalid_argument);

  WorldModel f1 = flat_world(400.0), f2 = flat_world(400.0), f3 = flat_world(400.0);
  f1.targets.push_back(make_target(0, "kiosk", {100.0, 100.0, 0.0}));
  f2.targets.push_back(make_target(0, "kiosk", {200.0, 100.0, 0.0}));
  f3.targets.push_back(make_target(0, "kiosk", {300.0, 100.0, 0.0}));
  CHECK_THROWS_AS(build_dataset({{"a", &f1}, {"b", &f2}, {"c", &f3}}, params, 1),
                  std::invalid_argument);
}

TEST_CASE("polyline_length: simple sums") {
  CHECK(polyline_length({}) == 0.0);
  CHECK(polyline_length({{0, 0, 0}}) == 0.0);
  CHECK(polyline_length({{0, 0, 0}, {3, 4, 0}, {3, 4, 12}}) == Catch::Approx(17.0));
}
