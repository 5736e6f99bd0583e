#pragma once

#include <algorithm>
#include <cmath>
#include <istream>
#include <ostream>
#include <stdexcept>
#include <string>
#include <vector>

#include "aeroduo/geometry.hpp"
#include "aeroduo/grid.hpp"
#include "aeroduo/rng.hpp"

namespace aeroduo {

// Semantic label layout shared by BEV capture and the ortho map.
constexpr int kLabelTerrain = 0;
constexpr int kLabelObstacleBase = 1;      // obstacle i -> 1 + i
constexpr int kLabelTargetBase = 10000;    // target id t -> 10000 + t

struct ElevationGrid {
  Grid2D<double> heights;  // heights.at(ix, iy), meters
  GridFrame frame;

  double height_at(double x, double y) const {
    int ix = std::clamp(frame.cell_x(x), 0, heights.width() - 1);
    int iy = std::clamp(frame.cell_y(y), 0, heights.height() - 1);
    return heights.at(ix, iy);
  }
};

struct Target {
  int id = 0;
  std::string category;
  Vec3 position;
  std::vector<std::string> tags;
  double radius = 2.0;  // ground footprint used for BEV labeling
};

struct WorldBounds {
  double x_min = 0.0, x_max = 0.0, y_min = 0.0, y_max = 0.0, z_max = 500.0;

  bool contains_xy(double x, double y) const {
    return x >= x_min && x <= x_max && y >= y_min && y <= y_max;
  }
  bool contains(const Vec3& p) const {
    return contains_xy(p.x, p.y) && p.z >= 0.0 && p.z <= z_max;
  }
};

// Immutable after construction; safe to share across concurrent episodes.
struct WorldModel {
  ElevationGrid terrain;
  std::vector<Box> obstacles;
  std::vector<Target> targets;
  WorldBounds bounds;
};

struct UAVState {
  Vec3 position;
  Vec3 velocity;
  double yaw = 0.0;
  double collision_radius = 1.0;
};

struct SensorConfig {
  double bev_fov = kPi / 2.0;
  double forward_fov = kPi / 2.0;
  double forward_range = 60.0;
  int lidar_azimuth_bins = 36;
  int lidar_elevation_bins = 8;
  double lidar_max_range = 50.0;
  int bev_resolution = 128;
  // Elevation band biased downward where obstacles are.
  double lidar_elev_min = -kPi / 2.0;
  double lidar_elev_max = kPi / 6.0;
};

struct BEVObservation {
  Grid2D<double> depth;
  Grid2D<int> semantic;
  Grid2D<unsigned char> valid;
  UAVState camera_pose;
  // Ground footprint rectangle [x1,x2] x [y1,y2].
  double x1 = 0.0, y1 = 0.0, x2 = 0.0, y2 = 0.0;
};

using PointCloud = std::vector<Vec3>;

inline double surface_height(const WorldModel& world, double x, double y) {
  if (!world.bounds.contains_xy(x, y))
    throw std::out_of_range("surface_height: query outside world bounds");
  double h = world.terrain.height_at(x, y);
  for (const auto& box : world.obstacles)
    if (box.footprint_contains(x, y)) h = std::max(h, box.height);
  return h;
}

inline int semantic_label_at(const WorldModel& world, double x, double y) {
  for (const auto& t : world.targets) {
    double dx = x - t.position.x, dy = y - t.position.y;
    if (dx * dx + dy * dy <= t.radius * t.radius) return kLabelTargetBase + t.id;
  }
  for (std::size_t i = 0; i < world.obstacles.size(); ++i)
    if (world.obstacles[i].footprint_contains(x, y))
      return kLabelObstacleBase + static_cast<int>(i);
  return kLabelTerrain;
}

inline BEVObservation capture_bev(const WorldModel& world, const UAVState& pose,
                                  const SensorConfig& cfg) {
  if (world.bounds.contains_xy(pose.position.x, pose.position.y) &&
      pose.position.z <= surface_height(world, pose.position.x, pose.position.y))
    throw std::domain_error("capture_bev: UAV at or below surface");
  const int n = cfg.bev_resolution;
  const double side = 2.0 * pose.position.z * std::tan(cfg.bev_fov / 2.0);
  BEVObservation obs;
  obs.depth = Grid2D<double>(n, n);
  obs.semantic = Grid2D<int>(n, n);
  obs.valid = Grid2D<unsigned char>(n, n, 0);
  obs.camera_pose = pose;
  obs.x1 = pose.position.x - side / 2.0;
  obs.y1 = pose.position.y - side / 2.0;
  obs.x2 = pose.position.x + side / 2.0;
  obs.y2 = pose.position.y + side / 2.0;
  const double px = side / n;
  for (int iy = 0; iy < n; ++iy) {
    for (int ix = 0; ix < n; ++ix) {
      const double gx = obs.x1 + (ix + 0.5) * px;
      const double gy = obs.y1 + (iy + 0.5) * px;
      if (!world.bounds.contains_xy(gx, gy)) continue;
      obs.depth.at(ix, iy) = pose.position.z - surface_height(world, gx, gy);
      obs.semantic.at(ix, iy) = semantic_label_at(world, gx, gy);
      obs.valid.at(ix, iy) = 1;
    }
  }
  return obs;
}

// First terrain intersection along origin + t*dir within [0, tmax], walking the
// heightfield cells (piecewise-constant surface). Returns hit t or nullopt.
inline std::optional<double> ray_terrain_intersect(const ElevationGrid& terrain,
                                                   const Vec3& origin, const Vec3& dir,
                                                   double tmax) {
  const GridFrame& f = terrain.frame;
  const int w = terrain.heights.width(), h = terrain.heights.height();
  const double x_max = f.x0 + w * f.cell, y_max = f.y0 + h * f.cell;

  // Clip the ray to the grid's xy extent.
  double t0 = 0.0, t1 = tmax;
  auto clip = [&](double o, double d, double lo, double hi) {
    if (d == 0.0) return o >= lo && o <= hi;
    double a = (lo - o) / d, b = (hi - o) / d;
    if (a > b) std::swap(a, b);
    t0 = std::max(t0, a);
    t1 = std::min(t1, b);
    return t0 <= t1;
  };
  if (!clip(origin.x, dir.x, f.x0, x_max) || !clip(origin.y, dir.y, f.y0, y_max))
    return std::nullopt;

  int ix = std::clamp(f.cell_x(origin.x + t0 * dir.x), 0, w - 1);
  int iy = std::clamp(f.cell_y(origin.y + t0 * dir.y), 0, h - 1);
  const int step_x = dir.x > 0 ? 1 : -1;
  const int step_y = dir.y > 0 ? 1 : -1;
  double t = t0;
  while (t <= t1) {
    // Exit parameter of the current cell.
    double tx = std::numeric_limits<double>::infinity();
    double ty = std::numeric_limits<double>::infinity();
    if (dir.x != 0.0)
      tx = (f.x0 + (ix + (step_x > 0 ? 1 : 0)) * f.cell - origin.x) / dir.x;
    if (dir.y != 0.0)
      ty = (f.y0 + (iy + (step_y > 0 ? 1 : 0)) * f.cell - origin.y) / dir.y;
    const double t_exit = std::min({tx, ty, t1});

    const double surf = terrain.heights.at(ix, iy);
    const double z_enter = origin.z + t * dir.z;
    if (z_enter <= surf) return t;  // entered the cell below its surface
    if (dir.z < 0.0) {
      const double t_cross = (surf - origin.z) / dir.z;
      if (t_cross >= t && t_cross <= t_exit) return t_cross;
    }
    if (t_exit >= t1) break;
    if (tx < ty) {
      ix += step_x;
      if (ix < 0 || ix >= w) break;
    } else {
      iy += step_y;
      if (iy < 0 || iy >= h) break;
    }
    t = t_exit;
  }
  return std::nullopt;
}

inline std::optional<double> ray_world_intersect(const WorldModel& world, const Vec3& origin,
                                                 const Vec3& dir, double tmax) {
  std::optional<double> best = ray_terrain_intersect(world.terrain, origin, dir, tmax);
  for (const auto& box : world.obstacles) {
    auto t = ray_box_intersect(origin, dir, box);
    if (t && *t <= tmax && (!best || *t < *best)) best = t;
  }
  return best;
}

inline PointCloud capture_lidar(const WorldModel& world, const UAVState& state,
                                const SensorConfig& cfg) {
  if (!world.bounds.contains(state.position))
    throw std::out_of_range("capture_lidar: UAV outside bounds");
  PointCloud cloud;
  const int A = cfg.lidar_azimuth_bins, E = cfg.lidar_elevation_bins;
  for (int j = 0; j < E; ++j) {
    const double elev =
        cfg.lidar_elev_min + (j + 0.5) / E * (cfg.lidar_elev_max - cfg.lidar_elev_min);
    for (int i = 0; i < A; ++i) {
      const double az = 2.0 * kPi * i / A;
      const Vec3 dir{std::cos(elev) * std::cos(az), std::cos(elev) * std::sin(az),
                     std::sin(elev)};
      auto t = ray_world_intersect(world, state.position, dir, cfg.lidar_max_range);
      if (t) cloud.push_back(state.position + dir * *t);
    }
  }
  return cloud;
}

inline bool check_collision(const WorldModel& world, const UAVState& state) {
  if (!world.bounds.contains(state.position)) return true;
  for (const auto& box : world.obstacles)
    if (box.distance_to(state.position) < state.collision_radius) return true;
  const double ground = world.terrain.height_at(state.position.x, state.position.y);
  return state.position.z - ground < state.collision_radius;
}

struct WorldGenParams {
  double size = 400.0;            // square side, meters
  double cell_size = 2.0;
  int building_count = 40;
  double building_side_min = 10.0;
  double building_side_max = 40.0;
  double building_height_min = 25.0;
  double building_height_max = 60.0;
  int target_count = 6;
  std::vector<std::string> categories = {"red car",  "blue truck", "fountain",
                                         "statue",   "bus stop",   "kiosk",
                                         "billboard", "water tower"};
  std::vector<std::string> attributes = {"tall", "small", "bright", "weathered",
                                         "round", "striped"};
  double z_max = 500.0;
};

inline WorldModel generate_world(std::uint64_t seed, const WorldGenParams& p) {
  if (p.size <= 0.0 || p.cell_size <= 0.0 || p.building_count < 0 || p.target_count < 0 ||
      p.categories.empty())
    throw std::invalid_argument("generate_world: invalid params");
  Rng rng(seed);
  WorldModel w;
  const int gw = std::max(1, static_cast<int>(std::lround(p.size / p.cell_size)));
  w.terrain.heights = Grid2D<double>(gw, gw, 0.0);
  w.terrain.frame = {0.0, 0.0, p.cell_size};
  w.bounds = {0.0, p.size, 0.0, p.size, p.z_max};

  const double margin = 5.0;
  for (int b = 0; b < p.building_count; ++b) {
    bool placed = false;
    for (int attempt = 0; attempt < 200 && !placed; ++attempt) {
      const double sx = rng.uniform(p.building_side_min, p.building_side_max);
      const double sy = rng.uniform(p.building_side_min, p.building_side_max);
      const double x = rng.uniform(margin, p.size - margin - sx);
      const double y = rng.uniform(margin, p.size - margin - sy);
      Box cand{x, y, x + sx, y + sy, rng.uniform(p.building_height_min, p.building_height_max)};
      bool overlap = false;
      for (const auto& o : w.obstacles)
        if (cand.overlaps_footprint(o)) { overlap = true; break; }
      if (!overlap) {
        w.obstacles.push_back(cand);
        placed = true;
      }
    }
    if (!placed)
      throw std::runtime_error("generate_world: could not place buildings without overlap");
  }

  auto clear_of_obstacles = [&](double x, double y, double pad) {
    for (const auto& box : w.obstacles) {
      Box inflated{box.x1 - pad, box.y1 - pad, box.x2 + pad, box.y2 + pad, box.height};
      if (inflated.footprint_contains(x, y)) return false;
    }
    return true;
  };

  // Distinct categories while the pool lasts, so instructions ground uniquely.
  std::vector<std::string> category_order = p.categories;
  rng.shuffle(category_order);
  for (int tgt = 0; tgt < p.target_count; ++tgt) {
    Target t;
    t.id = tgt;
    t.category = category_order[tgt % category_order.size()];
    t.tags.push_back(p.attributes[static_cast<std::size_t>(
        rng.uniform_int(0, static_cast<std::int64_t>(p.attributes.size()) - 1))]);
    bool placed = false;
    for (int attempt = 0; attempt < 400 && !placed; ++attempt) {
      double x, y;
      bool near_building = !w.obstacles.empty() && rng.uniform() < 0.7;
      if (near_building) {
        const auto& box = w.obstacles[static_cast<std::size_t>(
            rng.uniform_int(0, static_cast<std::int64_t>(w.obstacles.size()) - 1))];
        const double off = rng.uniform(4.0, 12.0);
        switch (rng.uniform_int(0, 3)) {
          case 0: x = box.x1 - off; y = rng.uniform(box.y1, box.y2); break;
          case 1: x = box.x2 + off; y = rng.uniform(box.y1, box.y2); break;
          case 2: x = rng.uniform(box.x1, box.x2); y = box.y1 - off; break;
          default: x = rng.uniform(box.x1, box.x2); y = box.y2 + off; break;
        }
      } else {
        x = rng.uniform(margin, p.size - margin);
        y = rng.uniform(margin, p.size - margin);
      }
      if (!w.bounds.contains_xy(x, y) || !clear_of_obstacles(x, y, t.radius + 1.0)) continue;
      t.position = {x, y, 0.0};
      t.tags.push_back(near_building ? "near building" : "open plaza");
      placed = true;
    }
    if (!placed) throw std::runtime_error("generate_world: could not place target in free space");
    w.targets.push_back(t);
  }
  return w;
}

// --- WORLD v1 text serialization -------------------------------------------

inline void save_world(std::ostream& os, const WorldModel& w) {
  const auto& hg = w.terrain.heights;
  os << "WORLD v1 " << hg.height() << ' ' << hg.width() << ' '
     << format_double(w.terrain.frame.cell) << ' ' << format_double(w.terrain.frame.x0) << ' '
     << format_double(w.terrain.frame.y0) << '\n';
  for (int iy = 0; iy < hg.height(); ++iy) {
    for (int ix = 0; ix < hg.width(); ++ix) {
      if (ix) os << ' ';
      os << format_double(hg.at(ix, iy));
    }
    os << '\n';
  }
  os << "OBSTACLES " << w.obstacles.size() << '\n';
  for (const auto& b : w.obstacles)
    os << format_double(b.x1) << ' ' << format_double(b.y1) << ' ' << format_double(b.x2) << ' '
       << format_double(b.y2) << ' ' << format_double(b.height) << '\n';
  os << "TARGETS " << w.targets.size() << '\n';
  for (const auto& t : w.targets) {
    std::string cat = t.category;
    std::replace(cat.begin(), cat.end(), ' ', '_');
    os << t.id << ' ' << cat << ' ' << format_double(t.position.x) << ' '
       << format_double(t.position.y) << ' ' << format_double(t.position.z) << ' ';
    for (std::size_t i = 0; i < t.tags.size(); ++i) {
      if (i) os << ',';
      std::string tag = t.tags[i];
      std::replace(tag.begin(), tag.end(), ' ', '_');
      os << tag;
    }
    if (t.tags.empty()) os << '-';
    os << '\n';
  }
}

inline WorldModel load_world(std::istream& is) {
  std::string magic, ver;
  int h = 0, gw = 0;
  WorldModel w;
  is >> magic >> ver >> h >> gw >> w.terrain.frame.cell >> w.terrain.frame.x0 >>
      w.terrain.frame.y0;
  if (magic != "WORLD" || ver != "v1" || h <= 0 || gw <= 0)
    throw std::runtime_error("bad WORLD header");
  w.terrain.heights = Grid2D<double>(gw, h);
  for (int iy = 0; iy < h; ++iy)
    for (int ix = 0; ix < gw; ++ix) is >> w.terrain.heights.at(ix, iy);
  std::string section;
  std::size_t n = 0;
  is >> section >> n;
  if (section != "OBSTACLES") throw std::runtime_error("expected OBSTACLES");
  for (std::size_t i = 0; i < n; ++i) {
    Box b;
    is >> b.x1 >> b.y1 >> b.x2 >> b.y2 >> b.height;
    w.obstacles.push_back(b);
  }
  is >> section >> n;
  if (section != "TARGETS") throw std::runtime_error("expected TARGETS");
  for (std::size_t i = 0; i < n; ++i) {
    Target t;
    std::string cat, tags;
    is >> t.id >> cat >> t.position.x >> t.position.y >> t.position.z >> tags;
    std::replace(cat.begin(), cat.end(), '_', ' ');
    t.category = cat;
    if (tags != "-") {
      std::stringstream ss(tags);
      std::string tag;
      while (std::getline(ss, tag, ',')) {
        std::replace(tag.begin(), tag.end(), '_', ' ');
        t.tags.push_back(tag);
      }
    }
    w.targets.push_back(t);
  }
  if (!is) throw std::runtime_error("truncated WORLD document");
  w.bounds = {w.terrain.frame.x0, w.terrain.frame.x0 + gw * w.terrain.frame.cell,
              w.terrain.frame.y0, w.terrain.frame.y0 + h * w.terrain.frame.cell, 500.0};
  return w;
}

}  // namespace aeroduo
