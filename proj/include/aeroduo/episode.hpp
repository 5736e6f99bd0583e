#pragma once

#include <cmath>
#include <deque>
#include <functional>
#include <optional>
#include <ostream>
#include <stdexcept>
#include <vector>

#include "aeroduo/pilot.hpp"

namespace aeroduo {

struct EpisodeSpec {
  const WorldModel* world = nullptr;
  Instruction instruction;
  UAVState start_low;
  UAVState start_high;
  Vec3 target;
  double success_radius = 20.0;  // d
  double time_limit = 300.0;     // simulated seconds
  double tick = 0.1;
};

enum class Outcome { Success, Timeout, Collision, DegeneratePilot };

inline const char* outcome_name(Outcome o) {
  switch (o) {
    case Outcome::Success: return "Success";
    case Outcome::Timeout: return "Timeout";
    case Outcome::Collision: return "Collision";
    default: return "DegeneratePilot";
  }
}

struct TimedPoint {
  double t = 0.0;
  Vec3 p;
};

struct EpisodeResult {
  Outcome outcome = Outcome::Timeout;
  std::vector<TimedPoint> low_traj;
  std::vector<TimedPoint> high_traj;
  double search_time = 0.0;   // T
  double path_length = 0.0;   // L, low UAV
  bool oracle_hit = false;
  Vec3 stop_point;
  double nav_error = 0.0;     // NE, horizontal stop-to-target
  int decision_count = 0;
  bool high_collision = false;
  std::vector<WaypointPlan> plans;
  ProbabilityMap last_prob_map;
};

struct EpisodeConfig {
  double waypoint_spacing = 20.0;
  double waypoint_eps = 3.0;
  double waypoint_eps_z = 3.0;
  double detector_threshold = 0.5;
  int detection_latency = 0;      // ticks between observation and detector result
  double high_cruise_speed = 10.0;
  double z_high_min = 80.0;
  int ortho_size = 256;
  double ortho_base_cell = 1.0;
  int erosion_extra = 2;
  bool use_global_map = true;     // false: pilot sees only the latest BEV frame
  int max_decisions = 64;
  int stall_tick_limit = 80;
  NavConfig nav;
  SensorConfig sensors;
};

using DetectorFn = std::function<std::optional<Detection>(
    const WorldModel&, const UAVState&, const Instruction&, const SensorConfig&)>;
using NavigatorFn = std::function<NavCommand(const RayScan&, const Vec3&, const Vec3&,
                                             const Vec3&, const Vec3&, const NavConfig&)>;

inline bool waypoint_reached(const Vec3& pos, const Vec3& waypoint, double eps,
                             double eps_z = 3.0) {
  if (eps <= 0.0) throw std::invalid_argument("waypoint_reached: eps must be positive");
  return distance_xy(pos, waypoint) <= eps && std::abs(pos.z - waypoint.z) <= eps_z;
}

// Lattice-aligned region covering a ground rectangle.
inline MapRegion lattice_region(double x1, double y1, double x2, double y2, double cell) {
  const int ix0 = static_cast<int>(std::floor(x1 / cell));
  const int iy0 = static_cast<int>(std::floor(y1 / cell));
  const int ix1 = static_cast<int>(std::ceil(x2 / cell));
  const int iy1 = static_cast<int>(std::ceil(y2 / cell));
  return {{ix0 * cell, iy0 * cell, cell}, ix1 - ix0, iy1 - iy0};
}

inline std::optional<CellIndex> nearest_free_cell(const OccupancyGrid& occ, const Vec3& pos) {
  std::optional<CellIndex> best;
  double bd = std::numeric_limits<double>::infinity();
  for (int iy = 0; iy < occ.cells.height(); ++iy)
    for (int ix = 0; ix < occ.cells.width(); ++ix) {
      if (!occ.cells.at(ix, iy)) continue;
      const double dx = occ.frame.center_x(ix) - pos.x;
      const double dy = occ.frame.center_y(iy) - pos.y;
      const double d2 = dx * dx + dy * dy;
      if (d2 < bd) {
        bd = d2;
        best = CellIndex{ix, iy};
      }
    }
  return best;
}

inline EpisodeResult run_episode(const EpisodeSpec& spec, PilotPolicy& pilot,
                                 const EpisodeConfig& cfg,
                                 const DetectorFn& detector = detect_target,
                                 const NavigatorFn& navigator = navigate_step) {
  if (!spec.world) throw std::invalid_argument("run_episode: null world");
  if (std::abs(spec.start_low.position.x - spec.start_high.position.x) > 1e-9 ||
      std::abs(spec.start_low.position.y - spec.start_high.position.y) > 1e-9)
    throw std::invalid_argument("run_episode: UAVs must start at the same (x, y)");
  if (spec.start_high.position.z <= spec.start_low.position.z)
    throw std::invalid_argument("run_episode: high UAV must start above low UAV");
  if (spec.success_radius <= 0.0 || spec.tick <= 0.0)
    throw std::invalid_argument("run_episode: invalid spec");

  const WorldModel& world = *spec.world;
  UAVState low = spec.start_low;
  UAVState high = spec.start_high;
  EpisodeResult res;
  double t = 0.0;
  long steps = 0;
  Vec3 prev_cmd;
  std::deque<UAVState> low_snapshots;

  auto record = [&] {
    if (!res.low_traj.empty())
      res.path_length += distance(res.low_traj.back().p, low.position);
    res.low_traj.push_back({t, low.position});
    res.high_traj.push_back({t, high.position});
    if (distance_xy(low.position, spec.target) <= spec.success_radius) res.oracle_hit = true;
  };
  auto finalize = [&](Outcome o) {
    res.outcome = o;
    res.search_time = steps * spec.tick;
    res.stop_point = low.position;
    res.nav_error = distance_xy(low.position, spec.target);
    return res;
  };

  record();
  if (check_collision(world, low)) return finalize(Outcome::Collision);
  if (check_collision(world, high)) {
    res.high_collision = true;
    return finalize(Outcome::Collision);
  }
  if (spec.time_limit <= 0.0) return finalize(Outcome::Timeout);

  OrthoMap ortho(cfg.ortho_size, cfg.ortho_base_cell);
  std::vector<PointCloud> clouds;
  std::vector<Vec3> high_hist{high.position};

  // Per-tick motion + bookkeeping; returns terminal outcome if the episode ends.
  bool approaching = false;
  Vec3 approach_dir;
  auto advance_tick = [&](const Vec3& low_cmd, double& remaining_high_step,
                          const Vec3& high_dir) -> std::optional<Outcome> {
    low.position += low_cmd * spec.tick;
    low.velocity = low_cmd;
    if (low_cmd.norm_xy() > 1e-9 && !approaching) low.yaw = std::atan2(low_cmd.y, low_cmd.x);
    if (remaining_high_step > 0.0) {
      const double adv = std::min(remaining_high_step, cfg.high_cruise_speed * spec.tick);
      high.position += high_dir * adv;
      remaining_high_step -= adv;
      high.position.x = std::clamp(high.position.x, world.bounds.x_min, world.bounds.x_max);
      high.position.y = std::clamp(high.position.y, world.bounds.y_min, world.bounds.y_max);
      high.position.z = std::max(high.position.z, cfg.z_high_min);
    }
    t += spec.tick;
    ++steps;
    record();
    if (check_collision(world, low)) return Outcome::Collision;
    if (check_collision(world, high)) {
      res.high_collision = true;
      return Outcome::Collision;
    }
    return std::nullopt;
  };

  auto latent_state = [&]() -> UAVState {
    low_snapshots.push_back(low);
    const std::size_t cap = static_cast<std::size_t>(cfg.detection_latency) + 1;
    while (low_snapshots.size() > cap) low_snapshots.pop_front();
    return low_snapshots.front();
  };

  // Approach phase: fly along the detection bearing until the estimated
  // horizontal range drops under d/2 or line of sight is lost, then halt.
  auto approach_and_halt = [&](Detection det) -> Outcome {
    approaching = true;
    double no_high = 0.0;
    while (true) {
      const double dz = low.position.z - 1.0;  // ground targets sit near z = 0
      const double horiz = std::sqrt(std::max(det.range * det.range - dz * dz, 0.0));
      if (horiz <= spec.success_radius / 2.0) break;
      if (t + spec.tick > spec.time_limit + 1e-9) return Outcome::Timeout;
      low.yaw = det.bearing;
      const Vec3 dir{std::cos(det.bearing), std::sin(det.bearing), 0.0};
      const Vec3 aim = low.position + dir * horiz;
      const RayScan scan = encode_rays(capture_lidar(world, low, cfg.sensors), low, cfg.sensors);
      NavCommand cmd = navigate_step(scan, aim, low.position, low.velocity, prev_cmd, cfg.nav);
      cmd.velocity.z = 0.0;
      prev_cmd = cmd.velocity;
      if (auto term = advance_tick(cmd.velocity, no_high, {})) return *term;
      low.yaw = det.bearing;
      auto next = detector(world, low, spec.instruction, cfg.sensors);
      if (!next) break;  // LOS lost
      det = *next;
    }
    return distance_xy(low.position, spec.target) <= spec.success_radius ? Outcome::Success
                                                                         : Outcome::Timeout;
  };

  for (int tau = 1; tau <= cfg.max_decisions; ++tau) {
    res.decision_count = tau;
    // High-altitude perception + decision.
    BEVObservation bev = capture_bev(world, high, cfg.sensors);
    clouds.push_back(capture_lidar(world, high, cfg.sensors));
    const MapRegion tile_region =
        lattice_region(bev.x1, bev.y1, bev.x2, bev.y2, cfg.ortho_base_cell);
    const ReconElevation recon = reconstruct_elevation(clouds, tile_region);
    const OrthoTile tile = reproject(bev, recon, tile_region);
    ortho = stitch(ortho, tile, high);
    OrthoMap latest(cfg.ortho_size, cfg.ortho_base_cell);
    if (!cfg.use_global_map) latest = stitch(latest, tile, high);
    const OrthoMap& pilot_map = cfg.use_global_map ? ortho : latest;

    GlobalDepthMap depth = global_depth(pilot_map, high.position.z);
    PilotDecision dec;
    try {
      dec = pilot.decide(pilot_map, depth, high_hist, spec.instruction);
    } catch (const DegenerateMapError&) {
      return finalize(Outcome::DegeneratePilot);
    }
    res.last_prob_map = dec.prob_map;

    // Low-altitude key waypoint decision.
    OccupancyGrid occ = occupancy_from_depth(depth, high.position.z - low.position.z);
    const int radius =
        static_cast<int>(std::ceil(low.collision_radius / occ.frame.cell)) + cfg.erosion_extra;
    OccupancyGrid eroded = erode(occ, radius);
    CellIndex start{eroded.frame.cell_x(low.position.x), eroded.frame.cell_y(low.position.y)};
    if (!eroded.cells.in_bounds(start.ix, start.iy) || !eroded.cells.at(start.ix, start.iy)) {
      auto nf = nearest_free_cell(eroded, low.position);
      if (!nf) return finalize(Outcome::DegeneratePilot);
      start = *nf;
    }
    const auto [cx, cy] = centroid(dec.prob_map);
    const Vec3 goal_w = map_to_global(cx, cy, dec.prob_map.frame, low.position.z);
    const CellIndex goal{eroded.frame.cell_x(goal_w.x), eroded.frame.cell_y(goal_w.y)};
    WaypointPlan plan =
        segment(astar(eroded, start, goal), eroded.frame, cfg.waypoint_spacing, low.position.z);
    plan.source_tau = tau;
    res.plans.push_back(plan);

    double high_step = dec.high_step;
    const Vec3 high_dir{std::cos(dec.high_heading), std::sin(dec.high_heading), 0.0};

    // Execute the plan at 10 Hz, attempting detection every tick.
    for (const Vec3& wp : plan.waypoints) {
      long budget =
          static_cast<long>(distance_xy(low.position, wp) / cfg.nav.v_max / spec.tick * 4) + 100;
      double best_dist = distance_xy(low.position, wp);
      int stall_ticks = 0;
      while (!waypoint_reached(low.position, wp, cfg.waypoint_eps, cfg.waypoint_eps_z)) {
        if (budget-- <= 0) break;
        // Skip ahead when wedged in a potential-field equilibrium.
        const double d_wp = distance_xy(low.position, wp);
        if (d_wp < best_dist - 0.5) {
          best_dist = d_wp;
          stall_ticks = 0;
        } else if (++stall_ticks > cfg.stall_tick_limit) {
          break;
        }
        if (t + spec.tick > spec.time_limit + 1e-9) return finalize(Outcome::Timeout);
        const PointCloud cloud = capture_lidar(world, low, cfg.sensors);
        const RayScan scan = encode_rays(cloud, low, cfg.sensors);
        NavCommand cmd = navigator(scan, wp, low.position, low.velocity, prev_cmd, cfg.nav);
        cmd.velocity.z = 0.0;  // cruise phase holds the fixed low altitude
        prev_cmd = cmd.velocity;
        if (auto term = advance_tick(cmd.velocity, high_step, high_dir))
          return finalize(*term);
        const UAVState obs = latent_state();
        if (auto det = detector(world, obs, spec.instruction, cfg.sensors);
            det && det->confidence >= cfg.detector_threshold)
          return finalize(approach_and_halt(*det));
      }
    }
    high_hist.push_back(high.position);
    // Plan exhausted without detection: request the next decision.
  }
  return finalize(Outcome::Timeout);
}

// --- TRAJ v1 text dumps ----------------------------------------------------

inline void dump_traj(std::ostream& os, const std::vector<TimedPoint>& traj) {
  os << "TRAJ v1 " << traj.size() << '\n';
  for (const auto& tp : traj)
    os << format_double(tp.t) << ' ' << format_double(tp.p.x) << ' ' << format_double(tp.p.y)
       << ' ' << format_double(tp.p.z) << '\n';
}

inline std::vector<TimedPoint> load_traj(std::istream& is) {
  std::string magic, ver;
  std::size_t n = 0;
  is >> magic >> ver >> n;
  if (magic != "TRAJ" || ver != "v1") throw std::runtime_error("bad TRAJ header");
  std::vector<TimedPoint> traj(n);
  for (auto& tp : traj) is >> tp.t >> tp.p.x >> tp.p.y >> tp.p.z;
  if (!is) throw std::runtime_error("truncated TRAJ block");
  return traj;
}

}  // namespace aeroduo
