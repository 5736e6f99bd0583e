#pragma once

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <ostream>
#include <stdexcept>
#include <string>
#include <vector>

namespace aeroduo {

// Per-episode inputs to the metric suite.
struct EpisodeStats {
  bool success = false;
  double search_time = 0.0;   // T, seconds
  double t_star = 0.0;        // T*, expert time
  double path_length = 0.0;   // L, meters
  double l_star = 0.0;        // L*, expert length
  double nav_error = 0.0;     // NE, meters
  bool oracle_hit = false;
};

inline void require_nonempty(const std::vector<EpisodeStats>& r, const char* op) {
  if (r.empty()) throw std::invalid_argument(std::string(op) + ": empty episode set");
}

inline double sr(const std::vector<EpisodeStats>& r) {
  require_nonempty(r, "sr");
  double s = 0.0;
  for (const auto& e : r) s += e.success ? 1.0 : 0.0;
  return s / r.size();
}

// Mean of S * L* / max(L, L*).
inline double spl(const std::vector<EpisodeStats>& r) {
  require_nonempty(r, "spl");
  double s = 0.0;
  for (const auto& e : r) {
    if (e.l_star <= 0.0) throw std::invalid_argument("spl: nonpositive L*");
    if (e.success) s += e.l_star / std::max(e.path_length, e.l_star);
  }
  return s / r.size();
}

// Mean of S * T* / max(T, T*).
inline double sst(const std::vector<EpisodeStats>& r) {
  require_nonempty(r, "sst");
  double s = 0.0;
  for (const auto& e : r) {
    if (e.t_star <= 0.0) throw std::invalid_argument("sst: nonpositive T*");
    if (e.success) s += e.t_star / std::max(e.search_time, e.t_star);
  }
  return s / r.size();
}

inline double osr(const std::vector<EpisodeStats>& r) {
  require_nonempty(r, "osr");
  double s = 0.0;
  for (const auto& e : r) s += e.oracle_hit ? 1.0 : 0.0;
  return s / r.size();
}

// Mean stop-to-target distance, meters.
inline double ne(const std::vector<EpisodeStats>& r) {
  require_nonempty(r, "ne");
  double s = 0.0;
  for (const auto& e : r) s += e.nav_error;
  return s / r.size();
}

struct MetricReport {
  double sr_ = 0.0, spl_ = 0.0, sst_ = 0.0, osr_ = 0.0, ne_ = 0.0;
  std::size_t n_episodes = 0;
};

inline MetricReport compute_report(const std::vector<EpisodeStats>& r) {
  MetricReport rep{sr(r), spl(r), sst(r), osr(r), ne(r), r.size()};
  if (rep.spl_ > rep.sr_ + 1e-12 || rep.sst_ > rep.sr_ + 1e-12 || rep.osr_ < rep.sr_ - 1e-12)
    throw std::logic_error("metric report violates SPL <= SR <= OSR / SST <= SR");
  return rep;
}

// Aligned text table, SST SR SPL OSR NE column order, one row per split.
inline void print_report_table(std::ostream& os,
                               const std::vector<std::pair<std::string, MetricReport>>& rows) {
  os << std::left << std::setw(16) << "Split" << std::right << std::setw(8) << "SST"
     << std::setw(8) << "SR" << std::setw(8) << "SPL" << std::setw(8) << "OSR" << std::setw(10)
     << "NE[m]" << std::setw(6) << "N" << '\n';
  os << std::fixed << std::setprecision(3);
  for (const auto& [name, rep] : rows)
    os << std::left << std::setw(16) << name << std::right << std::setw(8) << rep.sst_
       << std::setw(8) << rep.sr_ << std::setw(8) << rep.spl_ << std::setw(8) << rep.osr_
       << std::setw(10) << rep.ne_ << std::setw(6) << rep.n_episodes << '\n';
  os.unsetf(std::ios::fixed);
  os << std::setprecision(6);
}

// Machine-readable line-delimited form.
inline void print_report_records(std::ostream& os,
                                 const std::vector<std::pair<std::string, MetricReport>>& rows) {
  for (const auto& [name, rep] : rows)
    os << "METRICS " << name << " sst=" << rep.sst_ << " sr=" << rep.sr_ << " spl=" << rep.spl_
       << " osr=" << rep.osr_ << " ne=" << rep.ne_ << " n=" << rep.n_episodes << '\n';
}

}  // namespace aeroduo
