#pragma once

#include <aeroduo/world.hpp>

namespace aeroduo::testutil {

// Flat world: terrain height h everywhere over [0, size]^2.
inline WorldModel flat_world(double size = 200.0, double cell = 2.0, double h = 0.0) {
  WorldModel world;
  const int n = static_cast<int>(size / cell);
  world.terrain.frame = {0.0, 0.0, cell};
  world.terrain.heights = Grid2D<double>(n, n, h);
  world.bounds = {0.0, size, 0.0, size, 500.0};
  return world;
}

inline Target make_target(int id, std::string category, Vec3 pos,
                          std::vector<std::string> tags = {}) {
  Target t;
  t.id = id;
  t.category = std::move(category);
  t.position = pos;
  t.tags = std::move(tags);
  return t;
}

}  // namespace aeroduo::testutil
