#pragma once

#include <algorithm>
#include <atomic>
#include <istream>
#include <map>
#include <memory>
#include <ostream>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "aeroduo/dataset.hpp"
#include "aeroduo/episode.hpp"
#include "aeroduo/metrics.hpp"

namespace aeroduo {

enum class PilotKind { Oracle, Heuristic };

struct BatchConfig {
  PilotKind pilot = PilotKind::Oracle;
  EpisodeConfig episode;
  ExpertConfig expert;
  double min_start_dist = 60.0;
  double max_start_dist = 250.0;
  double z_high = 100.0;
  double time_limit = 300.0;
  int parallel = 1;
  HeuristicPilotConfig heuristic;
};

struct EpisodeRecord {
  std::size_t id = 0;
  std::uint64_t seed = 0;
  std::uint64_t spec_hash = 0;
  std::string split = "all";
  Outcome outcome = Outcome::Timeout;
  EpisodeStats stats;
  int decisions = 0;
  EpisodeResult result;  // full result, for dumps
  bool valid = false;    // false when no feasible spec could be sampled
};

inline std::map<int, std::string> target_label_legend(const WorldModel& world) {
  std::map<int, std::string> legend;
  for (const auto& t : world.targets) legend[kLabelTargetBase + t.id] = t.category;
  return legend;
}

// Samples a feasible episode spec on the world: free start cell at a sane
// distance from a random target, expert stats attached. Returns false when the
// world admits none within the retry budget.
inline bool sample_episode(const WorldModel& world, Rng& rng, const BatchConfig& cfg,
                           EpisodeSpec& spec, double& t_star, double& l_star) {
  if (world.targets.empty()) return false;
  OccupancyGrid occ = ground_truth_occupancy(world, cfg.expert.z_low, cfg.expert.clearance,
                                             cfg.expert.cell_size);
  OccupancyGrid eroded =
      erode(occ, static_cast<int>(std::ceil(cfg.expert.collision_radius /
                                            cfg.expert.cell_size)) +
                     cfg.expert.erosion_extra);
  for (int attempt = 0; attempt < 60; ++attempt) {
    const auto& target = world.targets[static_cast<std::size_t>(
        rng.uniform_int(0, static_cast<std::int64_t>(world.targets.size()) - 1))];
    const int ix = static_cast<int>(rng.uniform_int(0, eroded.cells.width() - 1));
    const int iy = static_cast<int>(rng.uniform_int(0, eroded.cells.height() - 1));
    if (!eroded.cells.at(ix, iy)) continue;
    const Vec3 start{eroded.frame.center_x(ix), eroded.frame.center_y(iy), cfg.expert.z_low};
    const double dist = distance_xy(start, target.position);
    if (dist < cfg.min_start_dist || dist > cfg.max_start_dist) continue;
    auto low = gen_low_traj(world, start, target.position, cfg.expert);
    if (!low) continue;
    spec.world = &world;
    spec.instruction = make_instruction(world, target, start);
    spec.start_low = {start, {}, 0.0, cfg.expert.collision_radius};
    spec.start_high = {{start.x, start.y, cfg.z_high}, {}, 0.0, cfg.expert.collision_radius};
    spec.target = target.position;
    spec.time_limit = cfg.time_limit;
    l_star = polyline_length(*low);
    t_star = l_star / cfg.expert.cruise_speed;
    return true;
  }
  return false;
}

inline std::uint64_t hash_spec(const EpisodeSpec& spec) {
  std::ostringstream os;
  os << spec.start_low.position.x << ',' << spec.start_low.position.y << ','
     << spec.start_high.position.z << ',' << spec.target.x << ',' << spec.target.y << ','
     << spec.instruction.text << ',' << spec.success_radius << ',' << spec.time_limit;
  return fnv1a(os.str());
}

inline EpisodeRecord run_one(const WorldModel& world, std::size_t id, std::uint64_t episode_seed,
                             const BatchConfig& cfg) {
  EpisodeRecord rec;
  rec.id = id;
  rec.seed = episode_seed;
  Rng rng(episode_seed);
  EpisodeSpec spec;
  double t_star = 0.0, l_star = 0.0;
  if (!sample_episode(world, rng, cfg, spec, t_star, l_star)) return rec;
  rec.valid = true;
  rec.spec_hash = hash_spec(spec);

  std::unique_ptr<PilotPolicy> pilot;
  PilotConfig pc;
  pc.z_low = cfg.expert.z_low;
  if (cfg.pilot == PilotKind::Oracle) {
    pilot = std::make_unique<OraclePilot>(spec.target, pc);
  } else {
    HeuristicPilotConfig hc = cfg.heuristic;
    hc.base = pc;
    pilot = std::make_unique<HeuristicPilot>(target_label_legend(world),
                                             spec.start_low.position, hc);
  }
  rec.result = run_episode(spec, *pilot, cfg.episode);
  rec.outcome = rec.result.outcome;
  rec.decisions = rec.result.decision_count;
  rec.stats = {rec.outcome == Outcome::Success,
               rec.result.search_time,
               t_star,
               rec.result.path_length,
               l_star,
               rec.result.nav_error,
               rec.result.oracle_hit};
  return rec;
}

// Runs episodes (optionally in parallel); output order is canonical by id.
inline std::vector<EpisodeRecord> run_batch(const std::vector<const WorldModel*>& worlds,
                                            int episodes, std::uint64_t seed,
                                            const BatchConfig& cfg) {
  std::vector<EpisodeRecord> out(static_cast<std::size_t>(std::max(episodes, 0)));
  Rng root(seed);
  std::vector<std::uint64_t> episode_seeds(out.size());
  for (auto& s : episode_seeds) s = root.next_u64();
  const int workers = std::max(1, cfg.parallel);
  std::vector<std::thread> pool;
  std::atomic<std::size_t> next{0};
  auto work = [&] {
    for (std::size_t i = next.fetch_add(1); i < out.size(); i = next.fetch_add(1))
      out[i] = run_one(*worlds[i % worlds.size()], i, episode_seeds[i], cfg);
  };
  if (workers == 1) {
    work();
  } else {
    for (int wkr = 0; wkr < workers; ++wkr) pool.emplace_back(work);
    for (auto& th : pool) th.join();
  }
  return out;
}

inline void write_records(std::ostream& os, const std::vector<EpisodeRecord>& recs,
                          const std::string& dump_prefix) {
  for (const auto& r : recs) {
    if (!r.valid) {
      os << "EPISODE " << r.id << ' ' << r.seed << " 0 all Infeasible 0 0 0 0 0 0 0 - -\n";
      continue;
    }
    os << "EPISODE " << r.id << ' ' << r.seed << ' ' << r.spec_hash << ' ' << r.split << ' '
       << outcome_name(r.outcome) << ' ' << format_double(r.stats.search_time) << ' '
       << format_double(r.stats.t_star) << ' ' << format_double(r.stats.path_length) << ' '
       << format_double(r.stats.l_star) << ' ' << format_double(r.stats.nav_error) << ' '
       << (r.stats.oracle_hit ? 1 : 0) << ' ' << r.decisions << ' ' << dump_prefix << "ep_"
       << r.id << "_low.traj " << dump_prefix << "ep_" << r.id << "_high.traj\n";
  }
}

struct ParsedRecord {
  std::size_t id = 0;
  std::string split;
  std::string outcome;
  EpisodeStats stats;
};

inline std::vector<ParsedRecord> read_records(std::istream& is) {
  std::vector<ParsedRecord> out;
  std::string line;
  while (std::getline(is, line)) {
    if (line.rfind("EPISODE ", 0) != 0) continue;
    std::istringstream ss(line);
    std::string tag, dump_low, dump_high;
    std::uint64_t seed = 0, hash = 0;
    int oracle = 0, decisions = 0;
    ParsedRecord r;
    ss >> tag >> r.id >> seed >> hash >> r.split >> r.outcome >> r.stats.search_time >>
        r.stats.t_star >> r.stats.path_length >> r.stats.l_star >> r.stats.nav_error >> oracle >>
        decisions >> dump_low >> dump_high;
    if (r.outcome == "Infeasible") continue;
    r.stats.success = r.outcome == "Success";
    r.stats.oracle_hit = oracle != 0;
    out.push_back(std::move(r));
  }
  return out;
}

}  // namespace aeroduo
