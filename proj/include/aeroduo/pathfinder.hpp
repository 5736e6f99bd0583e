#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <queue>
#include <stdexcept>
#include <tuple>
#include <vector>

#include "aeroduo/orthomap.hpp"
#include "aeroduo/world.hpp"

namespace aeroduo {

// 1 = traversable at the low UAV's altitude, 0 = blocked or unmapped.
struct OccupancyGrid {
  Grid2D<unsigned char> cells;
  GridFrame frame;
  double delta_z = 0.0;
};

inline OccupancyGrid occupancy_from_depth(const GlobalDepthMap& depth, double delta_z) {
  if (delta_z <= 0.0)
    throw std::domain_error("occupancy_from_depth: high UAV must be above low UAV");
  OccupancyGrid occ;
  occ.frame = depth.frame;
  occ.delta_z = delta_z;
  occ.cells = Grid2D<unsigned char>(depth.depth.width(), depth.depth.height(), 0);
  for (int iy = 0; iy < depth.depth.height(); ++iy)
    for (int ix = 0; ix < depth.depth.width(); ++ix)
      if (depth.valid.at(ix, iy) && depth.depth.at(ix, iy) - delta_z >= 0.0)
        occ.cells.at(ix, iy) = 1;
  return occ;
}

// Morphological erosion of the free region with a square element of half-width
// radius_cells; cells beyond the frame edge count as blocked. Separable min filter.
inline OccupancyGrid erode(const OccupancyGrid& occ, int radius_cells) {
  if (radius_cells < 0) throw std::invalid_argument("erode: negative radius");
  if (radius_cells == 0) return occ;
  const int w = occ.cells.width(), h = occ.cells.height(), r = radius_cells;
  OccupancyGrid out = occ;
  Grid2D<unsigned char> tmp(w, h, 0);
  for (int iy = 0; iy < h; ++iy)
    for (int ix = 0; ix < w; ++ix) {
      unsigned char v = (ix - r >= 0 && ix + r < w) ? 1 : 0;
      for (int k = std::max(0, ix - r); v && k <= std::min(w - 1, ix + r); ++k)
        v = occ.cells.at(k, iy);
      tmp.at(ix, iy) = v;
    }
  for (int iy = 0; iy < h; ++iy)
    for (int ix = 0; ix < w; ++ix) {
      unsigned char v = (iy - r >= 0 && iy + r < h) ? 1 : 0;
      for (int k = std::max(0, iy - r); v && k <= std::min(h - 1, iy + r); ++k)
        v = tmp.at(ix, k);
      out.cells.at(ix, iy) = v;
    }
  return out;
}

struct CellIndex {
  int ix = 0;
  int iy = 0;
  bool operator==(const CellIndex&) const = default;
};

inline int manhattan(const CellIndex& a, const CellIndex& b) {
  return std::abs(a.ix - b.ix) + std::abs(a.iy - b.iy);
}

// 4-connected unit-cost A* with Manhattan heuristic. If the goal is blocked or
// unreachable, plans to the reached free cell minimizing Manhattan distance to
// the goal (ties: lowest row, then lowest column).
inline std::vector<CellIndex> astar(const OccupancyGrid& occ, CellIndex start, CellIndex goal) {
  const int w = occ.cells.width(), h = occ.cells.height();
  if (!occ.cells.in_bounds(start.ix, start.iy) || !occ.cells.at(start.ix, start.iy))
    throw std::invalid_argument("astar: start cell is not free");
  goal.ix = std::clamp(goal.ix, 0, w - 1);
  goal.iy = std::clamp(goal.iy, 0, h - 1);

  const int n = w * h;
  std::vector<int> g(n, std::numeric_limits<int>::max());
  std::vector<int> parent(n, -1);
  auto idx = [w](const CellIndex& c) { return c.iy * w + c.ix; };

  using Node = std::tuple<int, int, int>;  // f, iy, ix
  std::priority_queue<Node, std::vector<Node>, std::greater<>> open;
  g[idx(start)] = 0;
  open.emplace(manhattan(start, goal), start.iy, start.ix);
  int best = idx(start);
  int best_h = manhattan(start, goal);
  bool found = false;

  while (!open.empty()) {
    auto [f, cy, cx] = open.top();
    open.pop();
    const CellIndex c{cx, cy};
    const int ci = idx(c);
    if (f > g[ci] + manhattan(c, goal)) continue;  // stale entry
    const int hc = manhattan(c, goal);
    if (hc < best_h || (hc == best_h && (cy < best / w || (cy == best / w && cx < best % w)))) {
      best = ci;
      best_h = hc;
    }
    if (c == goal) { found = true; break; }
    static constexpr int dx[4] = {1, -1, 0, 0};
    static constexpr int dy[4] = {0, 0, 1, -1};
    for (int k = 0; k < 4; ++k) {
      const CellIndex nb{cx + dx[k], cy + dy[k]};
      if (!occ.cells.in_bounds(nb.ix, nb.iy) || !occ.cells.at(nb.ix, nb.iy)) continue;
      const int ni = idx(nb);
      if (g[ci] + 1 < g[ni]) {
        g[ni] = g[ci] + 1;
        parent[ni] = ci;
        open.emplace(g[ni] + manhattan(nb, goal), nb.iy, nb.ix);
      }
    }
  }

  int end = found ? idx(goal) : best;
  std::vector<CellIndex> path;
  for (int i = end; i != -1; i = parent[i]) path.push_back({i % w, i / w});
  std::reverse(path.begin(), path.end());
  return path;
}

struct WaypointPlan {
  std::vector<Vec3> waypoints;
  int source_tau = 0;
};

// K = max(1, ceil(length/spacing)) waypoints at equal arc-length fractions
// along the cell-center polyline, lifted to altitude z_l. Final waypoint is the
// path end.
inline WaypointPlan segment(const std::vector<CellIndex>& path, const GridFrame& frame,
                            double spacing, double z_l) {
  if (path.empty()) throw std::invalid_argument("segment: empty path");
  std::vector<Vec3> pts;
  pts.reserve(path.size());
  for (const auto& c : path)
    pts.push_back({frame.center_x(c.ix), frame.center_y(c.iy), z_l});
  double total = 0.0;
  for (std::size_t i = 1; i < pts.size(); ++i) total += distance(pts[i - 1], pts[i]);

  WaypointPlan plan;
  if (total <= 0.0) {
    plan.waypoints.push_back(pts.front());
    return plan;
  }
  const int k = std::max(1, static_cast<int>(std::ceil(total / spacing)));
  std::size_t seg = 1;
  double walked = 0.0;
  for (int i = 1; i <= k; ++i) {
    const double want = total * i / k;
    while (seg < pts.size() - 1 && walked + distance(pts[seg - 1], pts[seg]) < want) {
      walked += distance(pts[seg - 1], pts[seg]);
      ++seg;
    }
    const double len = distance(pts[seg - 1], pts[seg]);
    const double a = len > 0.0 ? std::clamp((want - walked) / len, 0.0, 1.0) : 0.0;
    plan.waypoints.push_back(pts[seg - 1] + (pts[seg] - pts[seg - 1]) * a);
  }
  plan.waypoints.back() = pts.back();
  return plan;
}

struct RayScan {
  Grid2D<double> ranges;      // azimuth x elevation, meters
  Grid2D<double> normalized;  // ranges / max_range
  double max_range = 0.0;
  double yaw = 0.0;
  double elev_min = 0.0, elev_max = 0.0;

  // World-frame direction of a bin center.
  Vec3 bin_direction(int ia, int ie) const {
    const int A = ranges.width(), E = ranges.height();
    const double az = yaw + 2.0 * kPi * (ia + 0.5) / A;
    const double el = elev_min + (ie + 0.5) / E * (elev_max - elev_min);
    return {std::cos(el) * std::cos(az), std::cos(el) * std::sin(az), std::sin(el)};
  }
};

inline RayScan encode_rays(const PointCloud& cloud, const UAVState& state,
                           const SensorConfig& cfg) {
  const int A = cfg.lidar_azimuth_bins, E = cfg.lidar_elevation_bins;
  RayScan scan;
  scan.ranges = Grid2D<double>(A, E, cfg.lidar_max_range);
  scan.max_range = cfg.lidar_max_range;
  scan.yaw = state.yaw;
  scan.elev_min = cfg.lidar_elev_min;
  scan.elev_max = cfg.lidar_elev_max;
  for (const auto& p : cloud) {
    const Vec3 rel = p - state.position;
    const double range = rel.norm();
    if (range <= 0.0) continue;
    double az = std::atan2(rel.y, rel.x) - state.yaw;
    az = az - 2.0 * kPi * std::floor(az / (2.0 * kPi));  // [0, 2pi)
    const double el = std::asin(std::clamp(rel.z / range, -1.0, 1.0));
    const int ia = std::min(A - 1, static_cast<int>(az / (2.0 * kPi) * A));
    const int ie = std::clamp(
        static_cast<int>((el - cfg.lidar_elev_min) / (cfg.lidar_elev_max - cfg.lidar_elev_min) * E),
        0, E - 1);
    double& cell = scan.ranges.at(ia, ie);
    cell = std::min(cell, std::min(range, cfg.lidar_max_range));
  }
  scan.normalized = scan.ranges;
  for (auto& v : scan.normalized.raw()) v /= cfg.lidar_max_range;
  return scan;
}

struct NavCommand {
  Vec3 velocity;
};

struct NavConfig {
  double k_attract = 4.0;
  double k_repulse = 12.0;
  double k_damp = 0.3;
  double r_safe = 5.0;
  double v_max = 8.0;
  double arrive_eps = 0.5;
};

// Reactive velocity command: attraction toward the subgoal, inverse-range
// repulsion from near bins, damping against the previous command.
inline NavCommand navigate_step(const RayScan& scan, const Vec3& subgoal, const Vec3& pos,
                                const Vec3& vel, const Vec3& prev_cmd, const NavConfig& cfg) {
  const Vec3 to_goal = subgoal - pos;
  if (to_goal.norm() < cfg.arrive_eps) return {};
  Vec3 cmd = cfg.k_attract * to_goal.normalized();
  for (int ie = 0; ie < scan.ranges.height(); ++ie)
    for (int ia = 0; ia < scan.ranges.width(); ++ia) {
      const double range = scan.ranges.at(ia, ie);
      if (range < cfg.r_safe && range > 1e-9)
        cmd += cfg.k_repulse * (1.0 / range - 1.0 / cfg.r_safe) * (-1.0 * scan.bin_direction(ia, ie));
    }
  cmd += -cfg.k_damp * (vel - prev_cmd);
  const double mag = cmd.norm();
  if (mag > cfg.v_max) cmd = cmd * (cfg.v_max / mag);
  return {cmd};
}

struct Detection {
  int target_id = 0;
  double confidence = 0.0;
  double bearing = 0.0;  // world-frame horizontal bearing to the target
  double range = 0.0;
};

struct Instruction {
  std::string target_category;
  int direction_hint = -1;  // 8 compass sectors, -1 = none
  std::vector<std::string> attribute_tags;
  std::vector<std::string> surroundings_tags;
  std::string text;
};

// Oracle grounding detector: instructed category visible in the forward cone,
// within range, with clear line of sight. Confidence decays linearly in range.
inline std::optional<Detection> detect_target(const WorldModel& world, const UAVState& state,
                                              const Instruction& instruction,
                                              const SensorConfig& cfg) {
  std::optional<Detection> best;
  for (const auto& t : world.targets) {
    if (t.category != instruction.target_category) continue;
    const Vec3 aim = t.position + Vec3{0.0, 0.0, 1.0};
    const Vec3 rel = aim - state.position;
    const double range = rel.norm();
    if (range > cfg.forward_range || range <= 0.0) continue;
    const double bearing = std::atan2(rel.y, rel.x);
    if (std::abs(wrap_angle(bearing - state.yaw)) > cfg.forward_fov / 2.0) continue;
    auto hit = ray_world_intersect(world, state.position, rel / range, range * (1.0 - 1e-9));
    if (hit) continue;
    const double conf = std::clamp(1.0 - range / cfg.forward_range, 0.0, 1.0);
    if (!best || conf > best->confidence)
      best = Detection{t.id, conf, bearing, range};
  }
  return best;
}

// `PLAN v1 tau K` followed by one `x y z` line per waypoint.
inline void dump_plan(std::ostream& os, const WaypointPlan& plan) {
  os << "PLAN v1 " << plan.source_tau << ' ' << plan.waypoints.size() << '\n';
  for (const auto& p : plan.waypoints)
    os << format_double(p.x) << ' ' << format_double(p.y) << ' ' << format_double(p.z) << '\n';
}

}  // namespace aeroduo
