#pragma once

#include <algorithm>
#include <atomic>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include <json.hpp>

#include "hamcycle/algorithm.hpp"
#include "hamcycle/graph.hpp"
#include "hamcycle/metrics.hpp"
#include "hamcycle/random.hpp"

namespace hamcycle {

enum class OutputFormat { csv, json };

struct ExperimentConfig {
  std::vector<std::size_t> n_list;
  std::optional<double> p;  // empty = p_formula(n)
  std::uint64_t trials = 1;
  std::uint64_t master_seed = 0;
  std::string output_path;
  OutputFormat format = OutputFormat::csv;
  AlgorithmConfig algorithm;
  unsigned threads = 1;

  void validate() const {
    if (n_list.empty()) throw std::invalid_argument("experiment: n_list is empty");
    if (trials < 1) throw std::invalid_argument("experiment: trials must be at least 1");
    for (auto n : n_list)
      if (n < 8) throw std::invalid_argument("experiment: every n must be at least 8");
    if (p && !(*p >= 0.0 && *p <= 1.0)) throw std::invalid_argument("experiment: p must lie in [0,1]");
  }

  double p_for(std::size_t n) const { return p ? *p : p_formula(n); }
};

/// Seed of trial i; depends only on the master seed and i.
inline std::uint64_t trial_seed(std::uint64_t master_seed, std::uint64_t trial) {
  return RandomSource(master_seed).derive("trial", trial);
}

/// Samples G(n,p) and runs the algorithm, both from one seed. Deterministic.
inline RunMetrics run_single(std::size_t n, double p, std::uint64_t seed, const AlgorithmConfig& config = {},
                             std::vector<TranscriptRecord>* transcript = nullptr) {
  const RandomSource src(seed);
  const Graph g = gen_gnp(n, p, src);
  HamCycleRun run(g, src, config);
  RunMetrics m = run.run();
  m.p = p;
  m.seed = seed;
  if (transcript) *transcript = run.engine().transcript();
  return m;
}

struct SummaryRow {
  std::uint64_t n = 0;
  double p = 0.0;
  std::uint64_t trials = 0;
  std::uint64_t successes = 0;
  double success_rate = 0.0;
  // Median of |C|_after / |C|_before over middle phases with 3L < |C|_before < n/7.
  std::optional<double> median_growth_small_regime;
  std::vector<double> median_growth_by_phase;
  std::uint64_t max_message_bits = 0;
  std::uint64_t max_node_memory_bits = 0;
  double message_bits_ratio = 0.0;  // per ceil(log2 n)
  double memory_bits_ratio = 0.0;
};

inline double median(std::vector<double> v) {
  if (v.empty()) throw std::invalid_argument("median of an empty sample");
  std::sort(v.begin(), v.end());
  const std::size_t h = v.size() / 2;
  return v.size() % 2 ? v[h] : 0.5 * (v[h - 1] + v[h]);
}

/// Growth factors of one run's middle phases, by phase index.
inline std::vector<double> middle_growth(const RunMetrics& m) {
  std::vector<double> g;
  const std::size_t k = std::min(m.middle_phases.size(), m.cycle_size_after_each_middle_phase.size());
  for (std::size_t i = 0; i < k; ++i) {
    const auto before = m.middle_phases[i].cycle_before;
    g.push_back(before ? static_cast<double>(m.cycle_size_after_each_middle_phase[i]) / before : 0.0);
  }
  return g;
}

inline SummaryRow summarize(std::span<const RunMetrics> runs) {
  if (runs.empty()) throw std::invalid_argument("summarize: no runs");
  SummaryRow row;
  row.n = runs.front().n;
  row.p = runs.front().p;
  row.trials = runs.size();
  const unsigned L = log_budget(row.n);
  std::vector<double> small;
  std::vector<std::vector<double>> by_phase;
  for (const auto& m : runs) {
    row.successes += m.success;
    row.max_message_bits = std::max(row.max_message_bits, m.max_message_bits);
    row.max_node_memory_bits = std::max(row.max_node_memory_bits, m.max_node_memory_bits);
    const auto growth = middle_growth(m);
    if (by_phase.size() < growth.size()) by_phase.resize(growth.size());
    for (std::size_t i = 0; i < growth.size(); ++i) {
      by_phase[i].push_back(growth[i]);
      const auto c = m.middle_phases[i].cycle_before;
      if (c > 3ull * L && 7 * c < m.n) small.push_back(growth[i]);
    }
  }
  row.success_rate = static_cast<double>(row.successes) / row.trials;
  if (!small.empty()) row.median_growth_small_regime = median(small);
  for (auto& v : by_phase) row.median_growth_by_phase.push_back(median(v));
  row.message_bits_ratio = static_cast<double>(row.max_message_bits) / L;
  row.memory_bits_ratio = static_cast<double>(row.max_node_memory_bits) / L;
  return row;
}

struct BatchResult {
  std::vector<RunMetrics> runs;  // n-major, then trial order
  std::vector<SummaryRow> summary;
};

/// All trials for every n. Workers may finish in any order; results are
/// stored by trial index so the output does not depend on scheduling.
inline BatchResult run_batch(const ExperimentConfig& config) {
  config.validate();
  BatchResult out;
  for (std::size_t n : config.n_list) {
    const double p = config.p_for(n);
    std::vector<RunMetrics> runs(config.trials);
    std::atomic<std::uint64_t> next{0};
    auto work = [&] {
      for (std::uint64_t i; (i = next.fetch_add(1)) < config.trials;)
        runs[i] = run_single(n, p, trial_seed(config.master_seed, i), config.algorithm);
    };
    const unsigned threads = std::max(1u, std::min<unsigned>(config.threads, config.trials));
    if (threads == 1) {
      work();
    } else {
      std::vector<std::jthread> pool;
      for (unsigned t = 0; t < threads; ++t) pool.emplace_back(work);
    }
    out.summary.push_back(summarize(runs));
    out.runs.insert(out.runs.end(), runs.begin(), runs.end());
  }
  return out;
}

inline constexpr const char* kCsvHeader =
    "n,p,seed,success,failure_cause,rounds_total,max_message_bits,max_node_memory_bits,min_label_gap_final,"
    "final_phase_insertions";

inline std::string format_double(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

inline std::string to_csv(std::span<const RunMetrics> runs) {
  std::ostringstream out;
  out << kCsvHeader << '\n';
  for (const auto& m : runs) {
    out << m.n << ',' << format_double(m.p) << ',' << m.seed << ',' << (m.success ? "true" : "false") << ','
        << (m.failure_cause ? to_string(*m.failure_cause) : "") << ',' << m.rounds_total << ','
        << m.max_message_bits << ',' << m.max_node_memory_bits << ','
        << (m.min_label_gap_final ? m.min_label_gap_final->to_string() : "") << ',' << m.final_phase_insertions
        << '\n';
  }
  return out.str();
}

inline void to_json(nlohmann::json& j, const MiddlePhaseRecord& r) {
  j = {{"cycle_before", r.cycle_before}, {"invitations", r.invitations}, {"insertions", r.insertions}};
}

inline void from_json(const nlohmann::json& j, MiddlePhaseRecord& r) {
  j.at("cycle_before").get_to(r.cycle_before);
  j.at("invitations").get_to(r.invitations);
  j.at("insertions").get_to(r.insertions);
}

inline void to_json(nlohmann::json& j, const RunMetrics& m) {
  nlohmann::json phases = nlohmann::json::array();
  for (const auto& [name, rounds] : m.rounds_per_phase) phases.push_back({{"phase", name}, {"rounds", rounds}});
  j = {{"n", m.n},
       {"p", m.p},
       {"seed", m.seed},
       {"success", m.success},
       {"failure_cause", m.failure_cause ? nlohmann::json(std::string(to_string(*m.failure_cause))) : nlohmann::json(nullptr)},
       {"rounds_total", m.rounds_total},
       {"rounds_per_phase", phases},
       {"cycle_size_after_each_middle_phase", m.cycle_size_after_each_middle_phase},
       {"final_phase_insertions", m.final_phase_insertions},
       {"max_message_bits", m.max_message_bits},
       {"max_node_memory_bits", m.max_node_memory_bits},
       {"min_label_gap_final", m.min_label_gap_final ? nlohmann::json(m.min_label_gap_final->to_string()) : nlohmann::json(nullptr)},
       {"cycle_size_after_phase1", m.cycle_size_after_phase1},
       {"middle_phases", m.middle_phases},
       {"outside_at_final_start", m.outside_at_final_start},
       {"max_selects_per_final_phase", m.max_selects_per_final_phase},
       {"invariant_violations", m.invariant_violations},
       {"messages_total", m.messages_total}};
}

inline void from_json(const nlohmann::json& j, RunMetrics& m) {
  j.at("n").get_to(m.n);
  j.at("p").get_to(m.p);
  j.at("seed").get_to(m.seed);
  j.at("success").get_to(m.success);
  m.failure_cause.reset();
  if (const auto& c = j.at("failure_cause"); !c.is_null()) {
    m.failure_cause = parse_failure_cause(c.get<std::string>());
    if (!m.failure_cause) throw std::runtime_error("unknown failure cause " + c.get<std::string>());
  }
  j.at("rounds_total").get_to(m.rounds_total);
  m.rounds_per_phase.clear();
  for (const auto& e : j.at("rounds_per_phase"))
    m.rounds_per_phase.emplace_back(e.at("phase").get<std::string>(), e.at("rounds").get<std::uint64_t>());
  j.at("cycle_size_after_each_middle_phase").get_to(m.cycle_size_after_each_middle_phase);
  j.at("final_phase_insertions").get_to(m.final_phase_insertions);
  j.at("max_message_bits").get_to(m.max_message_bits);
  j.at("max_node_memory_bits").get_to(m.max_node_memory_bits);
  m.min_label_gap_final.reset();
  if (const auto& g = j.at("min_label_gap_final"); !g.is_null()) m.min_label_gap_final = Label::parse(g.get<std::string>());
  j.at("cycle_size_after_phase1").get_to(m.cycle_size_after_phase1);
  j.at("middle_phases").get_to(m.middle_phases);
  j.at("outside_at_final_start").get_to(m.outside_at_final_start);
  j.at("max_selects_per_final_phase").get_to(m.max_selects_per_final_phase);
  j.at("invariant_violations").get_to(m.invariant_violations);
  j.at("messages_total").get_to(m.messages_total);
}

inline std::string to_json_text(std::span<const RunMetrics> runs) {
  nlohmann::json j = nlohmann::json::array();
  for (const auto& m : runs) j.push_back(m);
  return j.dump(2) + "\n";
}

inline std::vector<RunMetrics> parse_json_text(const std::string& text) {
  return nlohmann::json::parse(text).get<std::vector<RunMetrics>>();
}

/// Writes the runs; refuses an empty result set without touching the path.
inline void emit(std::span<const RunMetrics> runs, OutputFormat format, const std::filesystem::path& path) {
  if (runs.empty()) throw std::invalid_argument("emit: no results to write to " + path.string());
  const std::string body = format == OutputFormat::csv ? to_csv(runs) : to_json_text(runs);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("emit: cannot open " + path.string() + " for writing");
  out << body;
  out.flush();
  if (!out) throw std::runtime_error("emit: write failed for " + path.string());
}

}  // namespace hamcycle
