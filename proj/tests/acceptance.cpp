// Acceptance suite: one PASS/FAIL line per criterion, exit status 1 if any fails.
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "hamcycle/harness.hpp"
#include "hamcycle/verify.hpp"

namespace {

using namespace hamcycle;

constexpr std::uint64_t kMasterSeed = 20240611;
constexpr std::uint64_t kTrials = 100;
const std::vector<std::size_t> kSizes{512, 1024, 2048};

int failures = 0;

void report(int id, bool pass, const std::string& what, const std::string& detail) {
  std::printf("%s criterion %d: %s; %s\n", pass ? "PASS" : "FAIL", id, what.c_str(), detail.c_str());
  std::fflush(stdout);
  failures += !pass;
}

std::string fmt(double x, int digits = 3) {
  std::ostringstream s;
  s.precision(digits);
  s << std::fixed << x;
  return s.str();
}

struct SizeRuns {
  std::size_t n;
  std::vector<RunMetrics> natural;   // plain schedule
  std::vector<RunMetrics> held;      // middle phases stop at 3L outside
  SummaryRow summary;
};

std::vector<SizeRuns> collect() {
  std::vector<SizeRuns> out;
  for (std::size_t n : kSizes) {
    ExperimentConfig cfg;
    cfg.n_list = {n};
    cfg.trials = kTrials;
    cfg.master_seed = kMasterSeed;
    BatchResult natural = run_batch(cfg);
    cfg.algorithm.middle_stop_outside = 3ull * log_budget(n);
    cfg.master_seed = kMasterSeed + 1;
    BatchResult held = run_batch(cfg);
    out.push_back({n, std::move(natural.runs), std::move(held.runs), natural.summary.front()});
  }
  return out;
}

void success_rate(const std::vector<SizeRuns>& all) {
  bool pass = true;
  std::string detail;
  for (const auto& s : all) {
    std::uint64_t ok = 0;
    std::map<std::string, int> causes;
    for (const auto& m : s.natural) {
      ok += m.success;
      if (m.failure_cause) ++causes[std::string(to_string(*m.failure_cause))];
    }
    pass = pass && ok >= 95;
    detail += "n=" + std::to_string(s.n) + " " + std::to_string(ok) + "/100";
    for (const auto& [c, k] : causes) detail += " " + c + "x" + std::to_string(k);
    detail += "  ";
  }
  report(1, pass, "Hamiltonian cycle certified in at least 95/100 runs at each n", detail);
}

void round_schedule(const std::vector<SizeRuns>& all) {
  bool pass = true;
  std::uint64_t runs = 0, halted = 0;
  for (const auto& s : all) {
    const std::uint64_t L = log_budget(s.n);
    const std::uint64_t want = 9 + 3 * (3 * L - 1) + 3 * L + 48 * L + 33 * L;
    for (const auto* set : {&s.natural, &s.held})
      for (const auto& m : *set) {
        ++runs;
        if (m.failure_cause) {
          ++halted;
          pass = pass && m.rounds_total <= want;
        } else {
          pass = pass && m.rounds_total == want;
        }
        std::uint64_t sum = 0;
        for (const auto& [name, r] : m.rounds_per_phase) sum += r;
        pass = pass && sum == m.rounds_total;
      }
  }
  report(2, pass, "every run uses exactly the scheduled rounds unless it halted with a cause",
         std::to_string(runs) + " runs, " + std::to_string(halted) + " halted early");
}

void bit_budget(const std::vector<SizeRuns>& all, int id, const char* what, std::uint64_t factor,
                std::uint64_t RunMetrics::*field) {
  bool pass = true;
  std::string detail;
  std::vector<double> ratios;
  for (const auto& s : all) {
    const std::uint64_t L = log_budget(s.n);
    std::uint64_t worst = 0;
    for (const auto* set : {&s.natural, &s.held})
      for (const auto& m : *set) {
        worst = std::max(worst, m.*field);
        pass = pass && m.*field <= factor * L;
      }
    ratios.push_back(static_cast<double>(worst) / L);
    detail += "n=" + std::to_string(s.n) + " max=" + std::to_string(worst) + " cap=" + std::to_string(factor * L) +
              " ratio=" + fmt(ratios.back(), 2) + "  ";
  }
  for (std::size_t i = 1; i < ratios.size(); ++i) pass = pass && ratios[i] <= ratios[i - 1] + 2.0;
  report(id, pass, what, detail);
}

void numbering(const std::vector<SizeRuns>& all) {
  bool pass = true;
  std::uint64_t runs = 0, violations = 0;
  for (const auto& s : all)
    for (const auto* set : {&s.natural, &s.held})
      for (const auto& m : *set) {
        ++runs;
        violations += m.invariant_violations;
      }
  pass = violations == 0;
  // Independent re-check of the final numbering on a fresh sample.
  std::uint64_t rechecked = 0;
  for (std::uint64_t i = 0; i < 20; ++i) {
    const std::uint64_t seed = trial_seed(kMasterSeed, i);
    const RandomSource src(seed);
    const Graph g = gen_gnp(1024, p_formula(1024), src);
    HamCycleRun run(g, src);
    if (!run.run().success) continue;
    const auto r = verify_numbering(run.states(), 0);
    pass = pass && r.ascending && r.distinct;
    ++rechecked;
  }
  report(5, pass, "numbers ascend from 0 at v0 and are distinct after every phase",
         std::to_string(runs) + " runs checked after every phase, " + std::to_string(violations) +
             " violations; " + std::to_string(rechecked) + " final cycles re-verified at n=1024");
}

const SizeRuns& largest(const std::vector<SizeRuns>& all) { return all.back(); }

void growth(const std::vector<SizeRuns>& all) {
  const auto& s = largest(all);
  const auto med = s.summary.median_growth_small_regime;
  // Observed invitations X and insertions Y against E[X] = (n-c)(1-(1-p^2)^(c/2))
  // and E[Y | X=x] = c(1-(1-1/c)^x), summed over the same phases.
  const std::uint64_t L = log_budget(s.n);
  const double p = p_formula(s.n);
  double x = 0, ex = 0, y = 0, ey = 0;
  for (const auto& m : s.natural)
    for (const auto& r : m.middle_phases) {
      const double c = static_cast<double>(r.cycle_before);
      if (r.cycle_before <= 3 * L || 7 * r.cycle_before >= s.n) continue;
      x += r.invitations;
      ex += (s.n - c) * (1 - std::pow(1 - p * p, c / 2));
      y += r.insertions;
      ey += c * (1 - std::pow(1 - 1 / c, static_cast<double>(r.invitations)));
    }
  report(6, med && *med >= 1.25, "median middle-phase growth at n=2048 with 3L < |C| < n/7 is at least 1.25",
         (med ? "median=" + fmt(*med) : std::string("no qualifying phases")) + "; X/E[X]=" + fmt(x / ex) +
             " Y/E[Y|X]=" + fmt(y / ey));
}

void milestones(const std::vector<SizeRuns>& all) {
  const auto& s = largest(all);
  const std::uint64_t L = log_budget(s.n);
  std::uint64_t early = 0, late = 0, both = 0;
  for (const auto& m : s.natural) {
    const auto& c = m.cycle_size_after_each_middle_phase;
    bool a = false;
    for (std::size_t i = 0; i < c.size() && i < 3 * L; ++i) a = a || 7 * c[i] >= s.n;
    const bool b = c.size() == 16 * L && c.back() + 3 * L >= s.n;
    early += a;
    late += b;
    both += a && b;
  }
  report(7, both >= 90, "at n=2048, |C| >= n/7 within 3L middle phases and |C| >= n-3L after them in 90/100 runs",
         "n/7 reached early in " + std::to_string(early) + ", n-3L reached in " + std::to_string(late) +
             ", both in " + std::to_string(both));
}

// Counts SELECT broadcasts by v0 per final phase straight from full transcripts.
std::uint64_t max_selects_from_transcript(std::size_t n, std::uint64_t seed, std::uint64_t stop_outside,
                                          std::uint64_t& outside) {
  AlgorithmConfig cfg;
  cfg.retention = Retention::full;
  cfg.middle_stop_outside = stop_outside;
  const RandomSource src(seed);
  const Graph g = gen_gnp(n, p_formula(n), src);
  HamCycleRun run(g, src, cfg);
  outside = run.run().outside_at_final_start;
  std::uint64_t worst = 0;
  for (const auto& span : run.engine().phases()) {
    if (span.name != "final") continue;
    std::set<std::uint64_t> rounds;
    for (const auto& r : run.engine().transcript())
      if (r.round >= span.first_round && r.round < span.first_round + span.rounds && r.sender == 0 &&
          r.kind == static_cast<std::uint8_t>(Kind::SelectBroadcast))
        rounds.insert(r.round);
    worst = std::max<std::uint64_t>(worst, rounds.size());
  }
  return worst;
}

void final_phases(const std::vector<SizeRuns>& all) {
  std::uint64_t eligible = 0, complete = 0, worst_select = 0, nodes = 0;
  for (const auto& s : all) {
    const std::uint64_t L = log_budget(s.n);
    for (const auto* set : {&s.natural, &s.held})
      for (const auto& m : *set) {
        worst_select = std::max(worst_select, m.max_selects_per_final_phase);
        const std::uint64_t k = m.outside_at_final_start;
        if (k == 0 || k > 3 * L || m.cycle_size_after_each_middle_phase.size() != 16 * L) continue;
        ++eligible;
        nodes += k;
        complete += m.success && m.final_phase_insertions == k;
      }
  }
  std::uint64_t transcript_worst = 0, transcript_runs = 0;
  for (std::uint64_t i = 0; i < 5; ++i) {
    std::uint64_t outside = 0;
    transcript_worst = std::max(transcript_worst,
                                max_selects_from_transcript(512, trial_seed(kMasterSeed + 1, i), 27, outside));
    transcript_runs += outside > 0;
  }
  const bool pass = eligible > 0 && complete * 100 >= 95 * eligible && worst_select <= 1 && transcript_worst <= 1 &&
                    transcript_runs > 0;
  report(8, pass, "final phases integrate all k <= 3L remaining nodes in 95% of runs, one node per phase",
         std::to_string(complete) + "/" + std::to_string(eligible) + " runs completed (" + std::to_string(nodes) +
             " nodes); max SELECT per phase " + std::to_string(worst_select) + " from send events, " +
             std::to_string(transcript_worst) + " from " + std::to_string(transcript_runs) + " full transcripts");
}

void oracle() {
  std::uint64_t successes = 0, violations = 0;
  const double ps[] = {0.4, 0.6, 0.8};
  for (std::uint64_t i = 0; i < 200; ++i) {
    const std::size_t n = 8 + i % 7;
    const double p = ps[(i / 7) % 3];
    const RandomSource src(RandomSource(kMasterSeed).derive("oracle", i));
    const Graph g = gen_gnp(n, p, src);
    const RunMetrics m = run_algorithm(g, src);
    if (!m.success) continue;
    ++successes;
    violations += !exact_hamiltonian(g);
  }
  std::uint64_t mutations = 0, caught = 0;
  for (std::uint64_t i = 0; mutations < 100 && i < 1000; ++i) {
    const RandomSource src(RandomSource(kMasterSeed).derive("mutation", i));
    const Graph g = gen_gnp(14, 0.8, src);
    HamCycleRun run(g, src);
    if (!run.run().success) continue;
    Rng rng = src.stream("mutate");
    std::vector<NodeState> st(run.states().begin(), run.states().end());
    const auto u = static_cast<NodeId>(uniform_index(rng, st.size()));
    NodeId target = static_cast<NodeId>(uniform_index(rng, st.size() - 1));
    if (target >= *st[u].next) ++target;
    st[u].next = target;
    ++mutations;
    caught += !verify_cycle(g, st, 0).is_hamiltonian(g.size());
  }
  report(9, violations == 0 && mutations == 100 && caught == 100,
         "algorithm successes are Hamiltonian per the exact oracle; pointer mutations are all flagged",
         std::to_string(successes) + "/200 successes, " + std::to_string(violations) + " oracle violations; " +
             std::to_string(caught) + "/" + std::to_string(mutations) + " mutations flagged");
}

void diameter() {
  const std::size_t n = 2048;
  const double p = 1.0 / std::sqrt(static_cast<double>(n));
  std::uint64_t within = 0;
  std::map<std::string, int> hist;
  for (std::uint64_t i = 0; i < 100; ++i) {
    const auto d = empirical_diameter(gen_gnp(n, p, RandomSource(RandomSource(kMasterSeed).derive("diameter", i))));
    within += d && *d <= 3;
    ++hist[d ? std::to_string(*d) : "disconnected"];
  }
  std::string detail = std::to_string(within) + "/100 with diameter <= 3;";
  for (const auto& [d, k] : hist) detail += " " + d + ":" + std::to_string(k);
  report(10, within >= 99, "G(2048, 1/sqrt(n)) has diameter at most 3 in 99/100 graphs", detail);
}

void determinism() {
  namespace fs = std::filesystem;
  ExperimentConfig cfg;
  cfg.n_list = {512, 1024};
  cfg.trials = 10;
  cfg.master_seed = kMasterSeed;
  const fs::path a = fs::temp_directory_path() / "hamcycle_acceptance_a.csv";
  const fs::path b = fs::temp_directory_path() / "hamcycle_acceptance_b.csv";
  emit(run_batch(cfg).runs, OutputFormat::csv, a);
  emit(run_batch(cfg).runs, OutputFormat::csv, b);
  auto slurp = [](const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
  };
  const std::string x = slurp(a), y = slurp(b);
  report(11, !x.empty() && x == y, "identical configuration gives byte-identical CSV",
         std::to_string(x.size()) + " bytes compared");
  fs::remove(a);
  fs::remove(b);
}

}  // namespace

int main() {
  const auto all = collect();
  success_rate(all);
  round_schedule(all);
  bit_budget(all, 3, "message bits within 32L in every run, ratio non-increasing within 2", 32,
             &RunMetrics::max_message_bits);
  bit_budget(all, 4, "node memory within 40L in every run, ratio non-increasing within 2", 40,
             &RunMetrics::max_node_memory_bits);
  numbering(all);
  growth(all);
  milestones(all);
  final_phases(all);
  oracle();
  diameter();
  determinism();
  std::printf("%s: %d criteria failed\n", failures ? "FAIL" : "PASS", failures);
  return failures ? 1 : 0;
}
