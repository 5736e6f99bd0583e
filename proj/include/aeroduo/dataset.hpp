#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <ostream>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "aeroduo/episode.hpp"

namespace aeroduo {

struct ExpertConfig {
  double z_low = 20.0;
  double clearance = 2.0;       // required headroom below the flight plane
  double cell_size = 2.0;
  double collision_radius = 1.0;
  int erosion_extra = 1;
  double reach_radius = 20.0;   // path end must come this close to the target
  double z_high_min = 80.0;
  double z_high_max = 140.0;
  double high_step = 50.0;      // L_h
  double bev_fov = kPi / 2.0;
  double cruise_speed = 5.0;    // nominal low UAV speed for T*
  int retries = 40;
};

// Ground-truth traversability at altitude z: free iff the surface stays below
// z - clearance.
inline OccupancyGrid ground_truth_occupancy(const WorldModel& world, double z,
                                            double clearance, double cell_size) {
  const auto& b = world.bounds;
  OccupancyGrid occ;
  occ.frame = {b.x_min, b.y_min, cell_size};
  occ.delta_z = clearance;
  const int w = static_cast<int>(std::ceil((b.x_max - b.x_min) / cell_size));
  const int h = static_cast<int>(std::ceil((b.y_max - b.y_min) / cell_size));
  occ.cells = Grid2D<unsigned char>(w, h, 0);
  for (int iy = 0; iy < h; ++iy)
    for (int ix = 0; ix < w; ++ix) {
      const double x = std::min(occ.frame.center_x(ix), b.x_max);
      const double y = std::min(occ.frame.center_y(iy), b.y_max);
      if (surface_height(world, x, y) < z - clearance) occ.cells.at(ix, iy) = 1;
    }
  return occ;
}

// Expert low-altitude path: eroded ground-truth occupancy + A*, as a world
// polyline at the flight altitude. Returns nullopt when the target region is
// unreachable from the start.
inline std::optional<std::vector<Vec3>> gen_low_traj(const WorldModel& world, const Vec3& start,
                                                     const Vec3& target,
                                                     const ExpertConfig& cfg = {}) {
  OccupancyGrid occ = ground_truth_occupancy(world, cfg.z_low, cfg.clearance, cfg.cell_size);
  const int radius =
      static_cast<int>(std::ceil(cfg.collision_radius / cfg.cell_size)) + cfg.erosion_extra;
  OccupancyGrid eroded = erode(occ, radius);
  CellIndex s{eroded.frame.cell_x(start.x), eroded.frame.cell_y(start.y)};
  if (!eroded.cells.in_bounds(s.ix, s.iy) || !eroded.cells.at(s.ix, s.iy)) return std::nullopt;
  const CellIndex g{eroded.frame.cell_x(target.x), eroded.frame.cell_y(target.y)};
  const auto path = astar(eroded, s, g);
  const auto& end = path.back();
  const double ex = eroded.frame.center_x(end.ix), ey = eroded.frame.center_y(end.iy);
  if (std::hypot(ex - target.x, ey - target.y) > cfg.reach_radius) return std::nullopt;
  std::vector<Vec3> poly;
  poly.reserve(path.size());
  for (const auto& c : path)
    poly.push_back({eroded.frame.center_x(c.ix), eroded.frame.center_y(c.iy), cfg.z_low});
  return poly;
}

inline double polyline_length(const std::vector<Vec3>& poly) {
  double len = 0.0;
  for (std::size_t i = 1; i < poly.size(); ++i) len += distance(poly[i - 1], poly[i]);
  return len;
}

// Every low-path vertex must lie inside the square BEV footprint of at least
// one high-path pose.
inline bool coverage_check(const std::vector<Vec3>& low_path,
                           const std::vector<Vec3>& high_path, double bev_fov) {
  for (const auto& v : low_path) {
    bool covered = false;
    for (const auto& p : high_path) {
      const double half = p.z * std::tan(bev_fov / 2.0);
      if (std::abs(v.x - p.x) <= half && std::abs(v.y - p.y) <= half) {
        covered = true;
        break;
      }
    }
    if (!covered) return false;
  }
  return true;
}

// Rejection sampling over a jittered walk along the low path; retries raise the
// altitude (wider footprint) until coverage holds.
inline std::vector<Vec3> gen_high_traj(const std::vector<Vec3>& low_path,
                                       const WorldModel& world, std::uint64_t seed,
                                       const ExpertConfig& cfg = {}) {
  if (low_path.empty()) throw std::invalid_argument("gen_high_traj: empty low path");
  Rng rng(seed);
  double z_lo = cfg.z_high_min, z_hi = cfg.z_high_max;
  for (int attempt = 0; attempt < cfg.retries; ++attempt) {
    const double z = rng.uniform(z_lo, z_hi);
    // Anchor vertices every ~0.8 L_h of low-path arc length, jittered.
    std::vector<Vec3> cand;
    cand.push_back({low_path.front().x, low_path.front().y, z});
    const double stride = cfg.high_step * 0.8;
    double walked = 0.0;
    for (std::size_t i = 1; i < low_path.size(); ++i) {
      walked += distance(low_path[i - 1], low_path[i]);
      if (walked >= stride || i + 1 == low_path.size()) {
        walked = 0.0;
        const double jx = rng.uniform(-cfg.high_step / 4.0, cfg.high_step / 4.0);
        const double jy = rng.uniform(-cfg.high_step / 4.0, cfg.high_step / 4.0);
        cand.push_back({low_path[i].x + jx, low_path[i].y + jy, z});
      }
    }
    bool in_bounds = true;
    for (const auto& p : cand)
      if (!world.bounds.contains(p)) in_bounds = false;
    if (in_bounds && coverage_check(low_path, cand, cfg.bev_fov)) return cand;
    // Widen footprints on later attempts.
    z_lo = std::min(z_lo * 1.1, world.bounds.z_max);
    z_hi = std::min(z_hi * 1.1, world.bounds.z_max);
  }
  throw std::runtime_error("gen_high_traj: coverage constraint unsatisfiable");
}

// Target-oriented instruction from annotations: category, compass sector,
// attributes and context. Never embeds coordinates or turn-by-turn routes.
inline Instruction make_instruction(const WorldModel& world, const Target& target,
                                    const Vec3& start) {
  Instruction ins;
  ins.target_category = target.category;
  const double bx = target.position.x - start.x, by = target.position.y - start.y;
  if (bx != 0.0 || by != 0.0) ins.direction_hint = compass_sector(std::atan2(by, bx));
  for (const auto& tag : target.tags) {
    if (tag == "near building" || tag == "open plaza")
      ins.surroundings_tags.push_back(tag);
    else
      ins.attribute_tags.push_back(tag);
  }
  std::ostringstream text;
  text << "Search the "
       << (ins.direction_hint >= 0 ? compass_name(ins.direction_hint) : "surrounding")
       << " area for a ";
  for (const auto& a : ins.attribute_tags) text << a << ' ';
  text << target.category;
  if (!ins.surroundings_tags.empty()) text << ", " << ins.surroundings_tags.front();
  text << '.';
  ins.text = text.str();
  return ins;
}

struct TrajectoryPair {
  std::size_t pair_id = 0;
  std::string scene_id;
  std::string category;
  int target_id = 0;
  Vec3 target;
  std::vector<Vec3> low_path;
  std::vector<Vec3> high_path;
  Instruction instruction;
  double t_star = 0.0;
  double l_star = 0.0;
};

enum class Split { Train, UnseenMap, UnseenObject };

inline const char* split_name(Split s) {
  switch (s) {
    case Split::Train: return "train";
    case Split::UnseenMap: return "unseen_map";
    default: return "unseen_object";
  }
}

struct DatasetParams {
  int pairs_per_scene = 20;
  std::set<std::string> unseen_map_scenes;
  std::set<std::string> unseen_object_categories;
  ExpertConfig expert;
};

struct DatasetManifest {
  std::vector<TrajectoryPair> pairs;
  std::vector<Split> splits;  // parallel to pairs
  std::uint64_t seed = 0;
  std::uint64_t params_hash = 0;
};

inline std::uint64_t fnv1a(const std::string& s) {
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

inline std::uint64_t hash_params(const DatasetParams& p) {
  std::ostringstream os;
  os << p.pairs_per_scene;
  for (const auto& s : p.unseen_map_scenes) os << '|' << s;
  for (const auto& c : p.unseen_object_categories) os << '#' << c;
  os << '@' << p.expert.z_low << ',' << p.expert.cell_size << ',' << p.expert.high_step;
  return fnv1a(os.str());
}

struct Scene {
  std::string scene_id;
  const WorldModel* world = nullptr;
};

inline DatasetManifest build_dataset(const std::vector<Scene>& scenes, const DatasetParams& params,
                                     std::uint64_t seed) {
  if (scenes.size() < 3)
    throw std::invalid_argument("build_dataset: need at least 3 scenes");
  std::set<std::string> categories;
  for (const auto& sc : scenes)
    for (const auto& t : sc.world->targets) categories.insert(t.category);
  if (categories.size() < 2)
    throw std::invalid_argument("build_dataset: need at least 2 target categories");
  for (const auto& held : params.unseen_map_scenes) {
    bool known = false;
    for (const auto& sc : scenes) known = known || sc.scene_id == held;
    if (!known) throw std::invalid_argument("build_dataset: unknown held-out scene " + held);
  }

  DatasetManifest manifest;
  manifest.seed = seed;
  manifest.params_hash = hash_params(params);
  Rng root(seed);
  for (std::size_t si = 0; si < scenes.size(); ++si) {
    const auto& scene = scenes[si];
    const WorldModel& world = *scene.world;
    Rng rng = root.fork(si + 1);
    OccupancyGrid occ = ground_truth_occupancy(world, params.expert.z_low,
                                               params.expert.clearance, params.expert.cell_size);
    OccupancyGrid eroded =
        erode(occ, static_cast<int>(std::ceil(params.expert.collision_radius /
                                              params.expert.cell_size)) +
                       params.expert.erosion_extra);
    int made = 0;
    for (int attempt = 0; attempt < params.pairs_per_scene * 20 && made < params.pairs_per_scene;
         ++attempt) {
      if (world.targets.empty()) break;
      const auto& target = world.targets[static_cast<std::size_t>(
          rng.uniform_int(0, static_cast<std::int64_t>(world.targets.size()) - 1))];
      // Free start cell.
      const int ix = static_cast<int>(rng.uniform_int(0, eroded.cells.width() - 1));
      const int iy = static_cast<int>(rng.uniform_int(0, eroded.cells.height() - 1));
      if (!eroded.cells.at(ix, iy)) continue;
      const Vec3 start{eroded.frame.center_x(ix), eroded.frame.center_y(iy),
                       params.expert.z_low};
      if (distance_xy(start, target.position) < 2.0 * params.expert.reach_radius) continue;
      auto low = gen_low_traj(world, start, target.position, params.expert);
      if (!low) continue;
      std::vector<Vec3> high;
      try {
        high = gen_high_traj(*low, world, rng.next_u64(), params.expert);
      } catch (const std::runtime_error&) {
        continue;
      }
      TrajectoryPair pair;
      pair.pair_id = manifest.pairs.size();
      pair.scene_id = scene.scene_id;
      pair.category = target.category;
      pair.target_id = target.id;
      pair.target = target.position;
      pair.low_path = std::move(*low);
      pair.high_path = std::move(high);
      pair.instruction = make_instruction(world, target, start);
      pair.l_star = polyline_length(pair.low_path);
      pair.t_star = pair.l_star / params.expert.cruise_speed;
      Split split = Split::Train;
      if (params.unseen_map_scenes.count(pair.scene_id))
        split = Split::UnseenMap;
      else if (params.unseen_object_categories.count(pair.category))
        split = Split::UnseenObject;
      manifest.pairs.push_back(std::move(pair));
      manifest.splits.push_back(split);
      ++made;
    }
  }
  return manifest;
}

// `MANIFEST v1 seed params_hash n` then one record per pair.
inline void save_manifest(std::ostream& os, const DatasetManifest& m,
                          const std::string& dump_prefix) {
  os << "MANIFEST v1 " << m.seed << ' ' << m.params_hash << ' ' << m.pairs.size() << '\n';
  for (std::size_t i = 0; i < m.pairs.size(); ++i) {
    const auto& p = m.pairs[i];
    std::string cat = p.category;
    std::replace(cat.begin(), cat.end(), ' ', '_');
    os << p.pair_id << ' ' << p.scene_id << ' ' << cat << ' ' << split_name(m.splits[i]) << ' '
       << format_double(p.t_star) << ' ' << format_double(p.l_star) << ' ' << dump_prefix
       << "pair_" << p.pair_id << "_low.traj " << dump_prefix << "pair_" << p.pair_id
       << "_high.traj " << dump_prefix << p.scene_id << ".world\n";
  }
}

}  // namespace aeroduo
