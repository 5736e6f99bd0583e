// aeroduo: world/dataset generation, episode batches, evaluation, plots.

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <set>
#include <sstream>

#include "aeroduo/dataset.hpp"
#include "aeroduo/metrics.hpp"
#include "aeroduo/plot.hpp"
#include "aeroduo/runner.hpp"

namespace fs = std::filesystem;
using namespace aeroduo;

namespace {

std::ofstream open_out(const fs::path& p) {
  if (p.has_parent_path()) fs::create_directories(p.parent_path());
  std::ofstream os(p);
  if (!os) throw std::runtime_error("cannot open for writing: " + p.string());
  return os;
}

std::ifstream open_in(const fs::path& p) {
  std::ifstream is(p);
  if (!is) throw std::runtime_error("missing file: " + p.string());
  return is;
}

std::vector<std::string> split_csv(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    std::replace(item.begin(), item.end(), '_', ' ');
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

int cmd_gen_world(std::uint64_t seed, const WorldGenParams& params, const std::string& out) {
  WorldModel world = generate_world(seed, params);
  auto os = open_out(out);
  save_world(os, world);
  std::cout << "wrote " << out << " (" << world.obstacles.size() << " obstacles, "
            << world.targets.size() << " targets)\n";
  return 0;
}

int cmd_gen_dataset(std::uint64_t seed, int scenes, int pairs, const WorldGenParams& wp,
                    const DatasetParams& dp_in, const std::string& out_dir) {
  DatasetParams dp = dp_in;
  dp.pairs_per_scene = pairs;
  std::vector<WorldModel> worlds;
  std::vector<Scene> scene_refs;
  worlds.reserve(static_cast<std::size_t>(scenes));
  for (int i = 0; i < scenes; ++i) worlds.push_back(generate_world(seed + 1000 + i, wp));
  for (int i = 0; i < scenes; ++i)
    scene_refs.push_back({"scene" + std::to_string(i), &worlds[static_cast<std::size_t>(i)]});

  DatasetManifest manifest = build_dataset(scene_refs, dp, seed);
  const fs::path dir(out_dir);
  fs::create_directories(dir);
  for (const auto& sc : scene_refs) {
    auto os = open_out(dir / (sc.scene_id + ".world"));
    save_world(os, *sc.world);
  }
  for (const auto& p : manifest.pairs) {
    std::vector<TimedPoint> low, high;
    for (std::size_t i = 0; i < p.low_path.size(); ++i)
      low.push_back({static_cast<double>(i), p.low_path[i]});
    for (std::size_t i = 0; i < p.high_path.size(); ++i)
      high.push_back({static_cast<double>(i), p.high_path[i]});
    auto ol = open_out(dir / ("pair_" + std::to_string(p.pair_id) + "_low.traj"));
    dump_traj(ol, low);
    auto oh = open_out(dir / ("pair_" + std::to_string(p.pair_id) + "_high.traj"));
    dump_traj(oh, high);
  }
  auto os = open_out(dir / "manifest.txt");
  save_manifest(os, manifest, "");
  std::cout << "wrote " << (dir / "manifest.txt").string() << " (" << manifest.pairs.size()
            << " pairs)\n";
  return 0;
}

int cmd_run(std::uint64_t seed, int scenes, int episodes, const std::string& world_file,
            const WorldGenParams& wp, BatchConfig& cfg, const std::string& out_dir,
            bool dump_grids) {
  std::vector<WorldModel> worlds;
  if (!world_file.empty()) {
    auto is = open_in(world_file);
    worlds.push_back(load_world(is));
  } else {
    for (int i = 0; i < scenes; ++i) worlds.push_back(generate_world(seed + 1000 + i, wp));
  }
  std::vector<const WorldModel*> refs;
  for (const auto& w : worlds) refs.push_back(&w);

  auto recs = run_batch(refs, episodes, seed, cfg);
  const fs::path dir(out_dir);
  fs::create_directories(dir);
  for (const auto& r : recs) {
    if (!r.valid) continue;
    auto ol = open_out(dir / ("ep_" + std::to_string(r.id) + "_low.traj"));
    dump_traj(ol, r.result.low_traj);
    auto oh = open_out(dir / ("ep_" + std::to_string(r.id) + "_high.traj"));
    dump_traj(oh, r.result.high_traj);
    if (dump_grids && r.result.last_prob_map.prob.width()) {
      auto og = open_out(dir / ("ep_" + std::to_string(r.id) + "_prob.grid"));
      const auto& pm = r.result.last_prob_map;
      Grid2D<unsigned char> all_valid(pm.prob.width(), pm.prob.height(), 1);
      dump_grid(og, "prob", pm.prob, all_valid, pm.frame);
    }
  }
  auto os = open_out(dir / "records.txt");
  write_records(os, recs, "");
  int ok = 0;
  for (const auto& r : recs) ok += r.valid && r.outcome == Outcome::Success;
  std::cout << "wrote " << (dir / "records.txt").string() << " (" << recs.size() << " episodes, "
            << ok << " successes)\n";
  return 0;
}

int cmd_eval(const std::string& records_file, const std::string& manifest_file,
             bool check_splits, const std::string& out) {
  auto is = open_in(records_file);
  auto recs = read_records(is);
  if (recs.empty()) throw std::runtime_error("no episode records in " + records_file);

  if (check_splits) {
    auto ms = open_in(manifest_file);
    std::string magic, ver;
    std::uint64_t seed = 0, hash = 0;
    std::size_t n = 0;
    ms >> magic >> ver >> seed >> hash >> n;
    if (magic != "MANIFEST") throw std::runtime_error("bad manifest header");
    std::set<std::string> train_scenes, um_scenes, train_cats, uo_cats;
    for (std::size_t i = 0; i < n; ++i) {
      std::string id, scene, cat, split, rest;
      double ts, ls;
      ms >> id >> scene >> cat >> split >> ts >> ls;
      std::getline(ms, rest);
      if (split == "train") { train_scenes.insert(scene); train_cats.insert(cat); }
      if (split == "unseen_map") um_scenes.insert(scene);
      if (split == "unseen_object") uo_cats.insert(cat);
    }
    for (const auto& s : um_scenes)
      if (train_scenes.count(s)) throw std::runtime_error("split leak: scene " + s);
    for (const auto& c : uo_cats)
      if (train_cats.count(c)) throw std::runtime_error("split leak: category " + c);
    std::cout << "splits disjoint: " << um_scenes.size() << " unseen-map scenes, "
              << uo_cats.size() << " unseen-object categories\n";
  }

  std::map<std::string, std::vector<EpisodeStats>> by_split;
  std::vector<EpisodeStats> all;
  for (const auto& r : recs) {
    by_split[r.split].push_back(r.stats);
    all.push_back(r.stats);
  }
  std::vector<std::pair<std::string, MetricReport>> rows;
  for (const auto& [name, stats] : by_split) rows.emplace_back(name, compute_report(stats));
  if (by_split.size() > 1) rows.emplace_back("all", compute_report(all));
  print_report_table(std::cout, rows);
  if (!out.empty()) {
    auto os = open_out(out);
    print_report_records(os, rows);
  }
  return 0;
}

int cmd_plot(const std::string& grid_file, const std::vector<std::string>& traj_files,
             const std::string& out) {
  auto gs = open_in(grid_file);
  LoadedGrid grid = load_grid(gs);
  auto os = open_out(out);
  if (traj_files.empty()) {
    plot_grid(os, grid);
  } else {
    std::vector<std::vector<TimedPoint>> trajs;
    for (const auto& f : traj_files) {
      auto ts = open_in(f);
      trajs.push_back(load_traj(ts));
    }
    plot_trajectories(os, grid, trajs, {"#d62728", "#1f77b4", "#2ca02c"});
  }
  std::cout << "wrote " << out << '\n';
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"aeroduo: dual-altitude UAV navigation simulator"};
  app.require_subcommand(1);
  app.set_config("--config");

  std::uint64_t seed = 1;
  app.add_option("--seed", seed, "global seed")->envname("AERODUO_SEED");

  WorldGenParams wp;
  auto add_world_opts = [&wp](CLI::App* c) {
    c->add_option("--size", wp.size, "world side, meters");
    c->add_option("--buildings", wp.building_count, "building count")
        ->check(CLI::NonNegativeNumber);
    c->add_option("--targets", wp.target_count, "target count")->check(CLI::NonNegativeNumber);
    c->add_option("--cell", wp.cell_size, "terrain cell size, meters");
  };

  auto* gw = app.add_subcommand("gen-world", "generate a procedural world document");
  std::string gw_out = "world.txt";
  add_world_opts(gw);
  gw->add_option("--out", gw_out, "output file");

  auto* gd = app.add_subcommand("gen-dataset", "generate trajectory pairs + manifest");
  int gd_scenes = 5, gd_pairs = 20;
  std::string gd_out = "dataset";
  std::string gd_holdout_scenes, gd_holdout_cats;
  add_world_opts(gd);
  gd->add_option("--scenes", gd_scenes, "scene count")->check(CLI::PositiveNumber);
  gd->add_option("--pairs", gd_pairs, "pairs per scene")->check(CLI::PositiveNumber);
  gd->add_option("--holdout-scenes", gd_holdout_scenes, "comma list, e.g. scene0,scene1");
  gd->add_option("--holdout-categories", gd_holdout_cats, "comma list, e.g. fountain");
  gd->add_option("--out-dir", gd_out, "output directory");

  auto* rn = app.add_subcommand("run", "run an episode batch");
  int rn_scenes = 3, rn_episodes = 10, rn_parallel = 1;
  std::string rn_world, rn_out = "runs", rn_pilot = "oracle", rn_detector = "oracle";
  bool rn_single_frame = false, rn_dump_grids = false;
  double rn_tmax = 300.0;
  add_world_opts(rn);
  rn->add_option("--world", rn_world, "world file (otherwise scenes are generated)");
  rn->add_option("--scenes", rn_scenes, "generated scene count")->check(CLI::PositiveNumber);
  rn->add_option("--episodes", rn_episodes, "episode count")->check(CLI::NonNegativeNumber);
  rn->add_option("--pilot", rn_pilot, "oracle|heuristic")
      ->check(CLI::IsMember({"oracle", "heuristic"}));
  rn->add_option("--detector", rn_detector, "oracle")->check(CLI::IsMember({"oracle"}));
  rn->add_option("--time-limit", rn_tmax, "episode time limit, seconds");
  rn->add_option("--parallel", rn_parallel, "worker threads")->check(CLI::PositiveNumber);
  rn->add_flag("--single-frame", rn_single_frame, "restrict pilot to the latest BEV frame");
  rn->add_flag("--dump-grids", rn_dump_grids, "dump final probability maps");
  rn->add_option("--out-dir", rn_out, "output directory");

  auto* ev = app.add_subcommand("eval", "compute metrics from episode records");
  std::string ev_records = "runs/records.txt", ev_manifest, ev_out;
  bool ev_check = false;
  ev->add_option("--records", ev_records, "records file");
  ev->add_option("--manifest", ev_manifest, "dataset manifest (for --check-splits)");
  ev->add_flag("--check-splits", ev_check, "verify split disjointness");
  ev->add_option("--out", ev_out, "machine-readable report file");

  auto* pl = app.add_subcommand("plot", "render grids and trajectory overlays to SVG");
  std::string pl_grid, pl_out = "plot.svg";
  std::vector<std::string> pl_trajs;
  pl->add_option("--grid", pl_grid, "GRID v1 file")->required();
  pl->add_option("--traj", pl_trajs, "TRAJ v1 files to overlay");
  pl->add_option("--out", pl_out, "output SVG");

  for (auto* sub : app.get_subcommands({})) sub->fallthrough();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);
    app.exit(e);
    return 2;
  }

  try {
    if (gw->parsed()) return cmd_gen_world(seed, wp, gw_out);
    if (gd->parsed()) {
      DatasetParams dp;
      for (const auto& s : split_csv(gd_holdout_scenes)) {
        std::string v = s;
        std::replace(v.begin(), v.end(), ' ', '_');
        dp.unseen_map_scenes.insert(v);
      }
      for (const auto& c : split_csv(gd_holdout_cats)) dp.unseen_object_categories.insert(c);
      return cmd_gen_dataset(seed, gd_scenes, gd_pairs, wp, dp, gd_out);
    }
    if (rn->parsed()) {
      BatchConfig cfg;
      cfg.pilot = rn_pilot == "oracle" ? PilotKind::Oracle : PilotKind::Heuristic;
      cfg.episode.use_global_map = !rn_single_frame;
      cfg.parallel = rn_parallel;
      cfg.time_limit = rn_tmax;
      return cmd_run(seed, rn_scenes, rn_episodes, rn_world, wp, cfg, rn_out, rn_dump_grids);
    }
    if (ev->parsed()) return cmd_eval(ev_records, ev_manifest, ev_check, ev_out);
    if (pl->parsed()) return cmd_plot(pl_grid, pl_trajs, pl_out);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
