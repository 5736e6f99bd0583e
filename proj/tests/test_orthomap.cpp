#include <catch2/catch_amalgamated.hpp>

#include <aeroduo/orthomap.hpp>

#include "test_util.hpp"

using namespace aeroduo;
using testutil::flat_world;

namespace {

OrthoTile uniform_tile(double x0, double y0, int w, int h, int sem, double elev) {
  OrthoTile t;
  t.region = {{x0, y0, 1.0}, w, h};
  t.semantic = Grid2D<int>(w, h, sem);
  t.elevation = Grid2D<double>(w, h, elev);
  t.valid = Grid2D<unsigned char>(w, h, 1);
  return t;
}

UAVState pose_at(double x, double y, double z) {
  UAVState s;
  s.position = {x, y, z};
  return s;
}

}  // namespace

TEST_CASE("reconstruct_elevation: max-z binning, empty cells invalid") {
  MapRegion region{{0.0, 0.0, 1.0}, 4, 4};
  std::vector<PointCloud> clouds = {
      {{0.5, 0.5, 2.0}, {3.2, 1.8, -1.0}},
      {{0.5, 0.5, 7.0}, {9.0, 9.0, 50.0}},  // second point falls outside the region
  };
  ReconElevation rec = reconstruct_elevation(clouds, region);
  CHECK(rec.valid.at(0, 0) == 1);
  CHECK(rec.grid.heights.at(0, 0) == 7.0);
  CHECK(rec.valid.at(3, 1) == 1);
  CHECK(rec.grid.heights.at(3, 1) == -1.0);
  int valid_count = 0;
  for (auto v : rec.valid.raw()) valid_count += v;
  CHECK(valid_count == 2);
}

TEST_CASE("reproject: nadir identity on flat ground") {
  WorldModel world = flat_world(400.0);
  UAVState pose = pose_at(200.0, 200.0, 100.0);
  SensorConfig cfg;
  BEVObservation obs = capture_bev(world, pose, cfg);

  MapRegion clip{{obs.x1, obs.y1, 2.0}, 100, 100};
  OrthoTile tile = reproject(obs, ReconElevation{}, clip);
  for (int iy = 0; iy < 100; iy += 9)
    for (int ix = 0; ix < 100; ix += 9) {
      REQUIRE(tile.valid.at(ix, iy) == 1);
      CHECK(tile.semantic.at(ix, iy) == kLabelTerrain);
      CHECK(tile.elevation.at(ix, iy) == Catch::Approx(0.0).margin(1e-9));
    }
}

TEST_CASE("reproject: reconstruction preferred over camera depth") {
  WorldModel world = flat_world(400.0);
  UAVState pose = pose_at(200.0, 200.0, 100.0);
  BEVObservation obs = capture_bev(world, pose, SensorConfig{});

  MapRegion clip{{obs.x1, obs.y1, 2.0}, 100, 100};
  ReconElevation rec;
  rec.grid.frame = clip.frame;
  rec.grid.heights = Grid2D<double>(100, 100, 0.0);
  rec.valid = Grid2D<unsigned char>(100, 100, 0);
  rec.grid.heights.at(10, 10) = 4.5;
  rec.valid.at(10, 10) = 1;

  OrthoTile tile = reproject(obs, rec, clip);
  CHECK(tile.elevation.at(10, 10) == 4.5);
  CHECK(tile.elevation.at(11, 10) == Catch::Approx(0.0).margin(1e-9));
}

TEST_CASE("reproject: cells outside the footprint stay invalid") {
  WorldModel world = flat_world(400.0);
  UAVState pose = pose_at(200.0, 200.0, 100.0);
  BEVObservation obs = capture_bev(world, pose, SensorConfig{});

  MapRegion clip{{obs.x1 - 50.0, obs.y1 - 50.0, 2.0}, 150, 150};
  OrthoTile tile = reproject(obs, ReconElevation{}, clip);
  CHECK(tile.valid.at(0, 0) == 0);
  CHECK(tile.valid.at(75, 75) == 1);
}

TEST_CASE("stitch: idempotent on a repeated tile") {
  OrthoMap base(32, 1.0);
  OrthoTile t = uniform_tile(0.0, 0.0, 16, 16, 3, 5.0);
  OrthoMap once = stitch(base, t, pose_at(8.0, 8.0, 100.0));
  OrthoMap twice = stitch(once, t, pose_at(8.0, 8.0, 100.0));
  CHECK(once.canvas_semantic() == twice.canvas_semantic());
  CHECK(once.canvas_elevation() == twice.canvas_elevation());
  CHECK(once.canvas_valid() == twice.canvas_valid());
  CHECK(once.semantic() == twice.semantic());
  CHECK(twice.history().size() == 2);
}

TEST_CASE("stitch: disjoint tiles commute") {
  OrthoMap base(64, 1.0);
  OrthoTile a = uniform_tile(0.0, 0.0, 16, 16, 2, 1.0);
  OrthoTile b = uniform_tile(16.0, 0.0, 16, 16, 4, 9.0);
  OrthoMap ab = stitch(stitch(base, a, pose_at(8, 8, 100)), b, pose_at(24, 8, 100));
  OrthoMap ba = stitch(stitch(base, b, pose_at(24, 8, 100)), a, pose_at(8, 8, 100));
  CHECK(ab.canvas_semantic() == ba.canvas_semantic());
  CHECK(ab.canvas_elevation() == ba.canvas_elevation());
  CHECK(ab.canvas_valid() == ba.canvas_valid());
  CHECK(ab.semantic() == ba.semantic());
  CHECK(ab.elevation() == ba.elevation());
  CHECK(ab.valid() == ba.valid());
  CHECK(ab.max_valid_elevation() == 9.0);
}

TEST_CASE("stitch: newest observation wins on overlap") {
  OrthoMap base(32, 1.0);
  OrthoTile old_tile = uniform_tile(0.0, 0.0, 16, 16, 2, 1.0);
  OrthoTile new_tile = uniform_tile(8.0, 8.0, 16, 16, 7, 3.0);
  OrthoMap m = stitch(stitch(base, old_tile, pose_at(8, 8, 100)), new_tile, pose_at(16, 16, 100));
  const MapRegion reg = m.canvas_region();
  const int ox = -static_cast<int>(reg.frame.x0);  // canvas offset of world cell (0,0)
  const int oy = -static_cast<int>(reg.frame.y0);
  CHECK(m.canvas_semantic().at(ox + 4, oy + 4) == 2);    // old-only area
  CHECK(m.canvas_semantic().at(ox + 12, oy + 12) == 7);  // overlap: newest wins
  CHECK(m.canvas_elevation().at(ox + 12, oy + 12) == 3.0);
  CHECK(m.canvas_semantic().at(ox + 20, oy + 20) == 7);  // new-only area
}

TEST_CASE("stitch: history capped at five, evicted cells persist") {
  OrthoMap m(64, 1.0);
  for (int k = 0; k < 7; ++k) {
    OrthoTile t = uniform_tile(8.0 * k, 0.0, 8, 8, k + 1, static_cast<double>(k));
    m = stitch(m, t, pose_at(8.0 * k + 4.0, 4.0, 100.0));
  }
  REQUIRE(m.history().size() == 5);
  CHECK(m.history().front().x1 == 16.0);  // records 0 and 1 evicted
  CHECK(m.history().back().x1 == 48.0);

  const MapRegion reg = m.canvas_region();
  CHECK(reg.frame.x0 == 0.0);
  const int oy = -static_cast<int>(reg.frame.y0);
  // Cells written by the evicted first observation are still on the canvas.
  CHECK(m.canvas_valid().at(2, oy + 2) == 1);
  CHECK(m.canvas_semantic().at(2, oy + 2) == 1);
}

TEST_CASE("global_depth: subtraction, inversion, and altitude guard") {
  OrthoMap base(16, 1.0);
  OrthoTile t = uniform_tile(0.0, 0.0, 16, 16, 2, 0.0);
  t.elevation.at(3, 3) = 25.0;
  t.elevation.at(10, 7) = -2.0;
  OrthoMap m = stitch(base, t, pose_at(8, 8, 100));
  REQUIRE(m.frame().cell == 1.0);  // square 16 m canvas over 16 px: 1:1 view

  GlobalDepthMap d = global_depth(m, 80.0);
  CHECK(d.reference_altitude == 80.0);
  CHECK(d.depth.at(0, 0) == 80.0);
  CHECK(d.depth.at(3, 3) == 55.0);
  CHECK(d.depth.at(10, 7) == 82.0);

  // Inversion: z_h - depth recovers the stitched elevation at every valid cell.
  for (int iy = 0; iy < 16; ++iy)
    for (int ix = 0; ix < 16; ++ix) {
      REQUIRE(d.valid.at(ix, iy) == 1);
      CHECK(d.reference_altitude - d.depth.at(ix, iy) == m.elevation().at(ix, iy));
    }

  CHECK_THROWS_AS(global_depth(m, 25.0), std::domain_error);
  CHECK_THROWS_AS(global_depth(m, 10.0), std::domain_error);
  CHECK_NOTHROW(global_depth(m, 25.0 + 1e-9));
}
