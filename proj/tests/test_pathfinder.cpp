#include <catch2/catch_amalgamated.hpp>

#include <aeroduo/pathfinder.hpp>

#include <queue>

#include "test_util.hpp"

using namespace aeroduo;
using testutil::flat_world;
using testutil::make_target;

namespace {

OccupancyGrid make_occ(int w, int h, double cell = 1.0) {
  OccupancyGrid g;
  g.frame = {0.0, 0.0, cell};
  g.cells = Grid2D<std::uint8_t>(w, h, 1);
  return g;
}

// Independent BFS shortest-path oracle (4-connected, unit cost).
int bfs_dist(const OccupancyGrid& g, CellIndex s, CellIndex t) {
  const int w = g.cells.width(), h = g.cells.height();
  std::vector<int> dist(static_cast<std::size_t>(w) * h, -1);
  std::queue<CellIndex> q;
  dist[static_cast<std::size_t>(s.iy) * w + s.ix] = 0;
  q.push(s);
  while (!q.empty()) {
    CellIndex c = q.front();
    q.pop();
    const int d = dist[static_cast<std::size_t>(c.iy) * w + c.ix];
    if (c.ix == t.ix && c.iy == t.iy) return d;
    const int dx[4] = {1, -1, 0, 0}, dy[4] = {0, 0, 1, -1};
    for (int k = 0; k < 4; ++k) {
      const int nx = c.ix + dx[k], ny = c.iy + dy[k];
      if (nx < 0 || nx >= w || ny < 0 || ny >= h) continue;
      if (!g.cells.at(nx, ny)) continue;
      auto& dn = dist[static_cast<std::size_t>(ny) * w + nx];
      if (dn < 0) {
        dn = d + 1;
        q.push({nx, ny});
      }
    }
  }
  return -1;
}

GlobalDepthMap depth_map(int w, int h, double fill, double ref = 100.0) {
  GlobalDepthMap d;
  d.frame = {0.0, 0.0, 1.0};
  d.depth = Grid2D<double>(w, h, fill);
  d.valid = Grid2D<unsigned char>(w, h, 1);
  d.reference_altitude = ref;
  return d;
}

}  // namespace

TEST_CASE("occupancy_from_depth: unit step with inclusive boundary") {
  GlobalDepthMap d = depth_map(3, 1, 50.0);
  d.depth.at(1, 0) = 10.0;
  d.depth.at(2, 0) = 30.0;
  OccupancyGrid occ = occupancy_from_depth(d, 30.0);
  CHECK(occ.cells.at(0, 0) == 1);  // u(20) = 1
  CHECK(occ.cells.at(1, 0) == 0);  // u(-20) = 0
  CHECK(occ.cells.at(2, 0) == 1);  // u(0) = 1, boundary inclusive

  d.valid.at(0, 0) = 0;
  CHECK(occupancy_from_depth(d, 30.0).cells.at(0, 0) == 0);
  CHECK_THROWS_AS(occupancy_from_depth(d, 0.0), std::domain_error);
}

TEST_CASE("erode: identity, edge convention, dilation oracle") {
  OccupancyGrid g = make_occ(8, 8);
  CHECK(erode(g, 0).cells == g.cells);

  OccupancyGrid ring = erode(g, 1);
  for (int iy = 0; iy < 8; ++iy)
    for (int ix = 0; ix < 8; ++ix) {
      const bool edge = ix == 0 || iy == 0 || ix == 7 || iy == 7;
      CHECK(ring.cells.at(ix, iy) == (edge ? 0 : 1));
    }

  OccupancyGrid hole = make_occ(9, 9);
  hole.cells.at(4, 4) = 0;
  OccupancyGrid e = erode(hole, 1);
  for (int iy = 1; iy < 8; ++iy)
    for (int ix = 1; ix < 8; ++ix) {
      const bool in_block = std::abs(ix - 4) <= 1 && std::abs(iy - 4) <= 1;
      CHECK(e.cells.at(ix, iy) == (in_block ? 0 : 1));
    }
}

TEST_CASE("erode: composition equals summed radius on random grids") {
  Rng rng(42);
  for (int trial = 0; trial < 20; ++trial) {
    OccupancyGrid g = make_occ(16, 16);
    for (auto& c : g.cells.raw()) c = rng.uniform() < 0.85 ? 1 : 0;
    const OccupancyGrid two_pass = erode(erode(g, 1), 1);
    const OccupancyGrid direct = erode(g, 2);
    CHECK(two_pass.cells == direct.cells);
  }
}

TEST_CASE("astar: trivial cases and 5x5 Manhattan bound") {
  OccupancyGrid g = make_occ(5, 5);
  auto self = astar(g, {2, 2}, {2, 2});
  REQUIRE(self.size() == 1);
  CHECK(self.front().ix == 2);

  auto diag = astar(g, {0, 0}, {4, 4});
  CHECK(diag.size() == 9);  // length 8

  g.cells.at(0, 0) = 0;
  CHECK_THROWS_AS(astar(g, {0, 0}, {4, 4}), std::invalid_argument);
}

TEST_CASE("astar matches BFS on random grids") {
  Rng rng(7);
  int checked = 0;
  for (int trial = 0; trial < 200; ++trial) {
    OccupancyGrid g = make_occ(20, 20);
    const double density = rng.uniform(0.6, 0.9);
    for (auto& c : g.cells.raw()) c = rng.uniform() < density ? 1 : 0;
    CellIndex s{static_cast<int>(rng.uniform_int(0, 19)), static_cast<int>(rng.uniform_int(0, 19))};
    CellIndex t{static_cast<int>(rng.uniform_int(0, 19)), static_cast<int>(rng.uniform_int(0, 19))};
    if (!g.cells.at(s.ix, s.iy)) continue;
    const int d = bfs_dist(g, s, t);
    if (d < 0 || !g.cells.at(t.ix, t.iy)) continue;
    auto path = astar(g, s, t);
    CHECK(static_cast<int>(path.size()) - 1 == d);
    for (const auto& c : path) CHECK(g.cells.at(c.ix, c.iy) == 1);
    ++checked;
  }
  CHECK(checked > 50);
}

TEST_CASE("astar: blocked goal resolves to nearest reachable cell") {
  OccupancyGrid g = make_occ(7, 7);
  for (int iy = 0; iy < 7; ++iy) g.cells.at(4, iy) = 0;  // full wall: right side unreachable
  auto path = astar(g, {0, 3}, {6, 3});
  // Best reachable cell minimizes Manhattan distance to the goal: column 3.
  CHECK(path.back().ix == 3);
  CHECK(path.back().iy == 3);
}

TEST_CASE("segment: spacing arithmetic and polyline interpolation") {
  GridFrame frame{0.0, 0.0, 1.0};

  auto single = segment({{3, 3}}, frame, 20.0, 10.0);
  REQUIRE(single.waypoints.size() == 1);
  CHECK(single.waypoints[0].x == Catch::Approx(3.5));

  // Straight 100 m path along +x, spacing 25 -> waypoints at 25/50/75/100 m.
  std::vector<CellIndex> straight;
  for (int i = 0; i <= 100; ++i) straight.push_back({i, 0});
  auto plan = segment(straight, frame, 25.0, 10.0);
  REQUIRE(plan.waypoints.size() == 4);
  for (int k = 0; k < 4; ++k) {
    CHECK(plan.waypoints[k].x == Catch::Approx(0.5 + 25.0 * (k + 1)));
    CHECK(plan.waypoints[k].y == Catch::Approx(0.5));
    CHECK(plan.waypoints[k].z == Catch::Approx(10.0));
  }

  // L-shaped 60 m path: 30 m east then 30 m north, spacing 30 -> K=2.
  std::vector<CellIndex> ell;
  for (int i = 0; i <= 30; ++i) ell.push_back({i, 0});
  for (int j = 1; j <= 30; ++j) ell.push_back({30, j});
  auto lplan = segment(ell, frame, 30.0, 10.0);
  REQUIRE(lplan.waypoints.size() == 2);
  CHECK(lplan.waypoints[0].x == Catch::Approx(30.5));  // arc midpoint sits at the corner
  CHECK(lplan.waypoints[0].y == Catch::Approx(0.5));
  CHECK(lplan.waypoints[1].x == Catch::Approx(30.5));
  CHECK(lplan.waypoints[1].y == Catch::Approx(30.5));

  // Equal arc-length gaps along the polyline.
  double prev = 0.0;
  double gap0 = -1.0;
  for (std::size_t k = 0; k < plan.waypoints.size(); ++k) {
    const double arc = plan.waypoints[k].x - 0.5;
    if (gap0 < 0.0)
      gap0 = arc - prev;
    else
      CHECK(arc - prev == Catch::Approx(gap0).epsilon(1e-6));
    prev = arc;
  }
}

TEST_CASE("encode_rays: defaults, single hit, rotation invariance") {
  SensorConfig cfg;
  UAVState state;
  state.position = {0.0, 0.0, 0.0};

  RayScan empty = encode_rays({}, state, cfg);
  for (double r : empty.ranges.raw()) CHECK(r == cfg.lidar_max_range);
  for (double n : empty.normalized.raw()) CHECK(n == 1.0);

  PointCloud one{{0.0, 5.0, 0.0}};  // 5 m due north at the horizon
  RayScan scan = encode_rays(one, state, cfg);
  int touched = 0;
  for (int ie = 0; ie < scan.ranges.height(); ++ie)
    for (int ia = 0; ia < scan.ranges.width(); ++ia)
      if (scan.ranges.at(ia, ie) < cfg.lidar_max_range) {
        ++touched;
        CHECK(scan.ranges.at(ia, ie) == Catch::Approx(5.0));
      }
  CHECK(touched == 1);

  // Rotating cloud and yaw together leaves the scan unchanged.
  Rng rng(3);
  PointCloud cloud;
  for (int i = 0; i < 40; ++i)
    cloud.push_back({rng.uniform(-30.0, 30.0), rng.uniform(-30.0, 30.0), rng.uniform(-20.0, 5.0)});
  const double rot = 0.7;
  PointCloud rotated;
  for (const auto& p : cloud)
    rotated.push_back({p.x * std::cos(rot) - p.y * std::sin(rot),
                       p.x * std::sin(rot) + p.y * std::cos(rot), p.z});
  UAVState turned = state;
  turned.yaw = rot;
  RayScan a = encode_rays(cloud, state, cfg);
  RayScan b = encode_rays(rotated, turned, cfg);
  for (int ie = 0; ie < a.ranges.height(); ++ie)
    for (int ia = 0; ia < a.ranges.width(); ++ia)
      CHECK(a.ranges.at(ia, ie) == Catch::Approx(b.ranges.at(ia, ie)).margin(1e-9));
}

TEST_CASE("navigate_step: attraction, arrival, lateral avoidance, speed cap") {
  SensorConfig scfg;
  NavConfig cfg;
  UAVState state;
  RayScan clear = encode_rays({}, state, scfg);

  NavCommand cmd = navigate_step(clear, {10.0, 0.0, 0.0}, {0.0, 0.0, 0.0}, {}, {}, cfg);
  CHECK(cmd.velocity.y == Catch::Approx(0.0).margin(1e-9));
  CHECK(cmd.velocity.x > 0.0);

  NavCommand arrived = navigate_step(clear, {0.1, 0.0, 0.0}, {0.0, 0.0, 0.0}, {}, {}, cfg);
  CHECK(arrived.velocity.norm() == 0.0);

  // Single obstacle point 1 m away on the subgoal bearing.
  PointCloud obstacle{{1.0, 0.02, 0.0}};
  RayScan blocked = encode_rays(obstacle, state, scfg);
  NavCommand avoid = navigate_step(blocked, {10.0, 0.0, 0.0}, {0.0, 0.0, 0.0}, {}, {}, cfg);
  CHECK(std::abs(avoid.velocity.y) + std::abs(avoid.velocity.z) > 1e-6);

  Rng rng(9);
  for (int i = 0; i < 100; ++i) {
    PointCloud cloud;
    for (int k = 0; k < 10; ++k)
      cloud.push_back({rng.uniform(-6.0, 6.0), rng.uniform(-6.0, 6.0), rng.uniform(-6.0, 6.0)});
    RayScan scan = encode_rays(cloud, state, scfg);
    Vec3 goal{rng.uniform(-50.0, 50.0), rng.uniform(-50.0, 50.0), 0.0};
    NavCommand c = navigate_step(scan, goal, {0.0, 0.0, 0.0}, {}, {}, cfg);
    CHECK(c.velocity.norm() <= cfg.v_max + 1e-9);
  }
}

TEST_CASE("detect_target: confidence, cone, and line of sight") {
  WorldModel world = flat_world(400.0);
  world.targets.push_back(make_target(0, "fountain", {210.0, 200.0, 0.0}));
  SensorConfig cfg;
  Instruction ins;
  ins.target_category = "fountain";

  UAVState uav;
  uav.position = {200.0, 200.0, 1.0};  // level with the 1 m target head: range 10
  uav.yaw = 0.0;
  auto det = detect_target(world, uav, ins, cfg);
  REQUIRE(det.has_value());
  CHECK(det->target_id == 0);
  CHECK(det->confidence == Catch::Approx(1.0 - det->range / cfg.forward_range));
  CHECK(det->confidence == Catch::Approx(0.8333).margin(0.001));

  uav.yaw = kPi;  // target behind
  CHECK_FALSE(detect_target(world, uav, ins, cfg).has_value());

  uav.yaw = 0.0;
  world.obstacles.push_back({204.0, 195.0, 206.0, 205.0, 30.0});
  CHECK_FALSE(detect_target(world, uav, ins, cfg).has_value());

  Instruction other;
  other.target_category = "statue";
  world.obstacles.clear();
  CHECK_FALSE(detect_target(world, uav, other, cfg).has_value());
}

TEST_CASE("detect_target: monotone under approach") {
  WorldModel world = flat_world(400.0);
  world.targets.push_back(make_target(0, "kiosk", {250.0, 200.0, 0.0}));
  SensorConfig cfg;
  Instruction ins;
  ins.target_category = "kiosk";
  double last_conf = -1.0;
  for (double x = 195.0; x <= 245.0; x += 5.0) {
    UAVState uav;
    uav.position = {x, 200.0, 5.0};
    auto det = detect_target(world, uav, ins, cfg);
    if (last_conf >= 0.0) REQUIRE(det.has_value());
    if (det) {
      CHECK(det->confidence >= last_conf);
      last_conf = det->confidence;
    }
  }
}
