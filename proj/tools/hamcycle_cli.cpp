#include <cstdlib>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "hamcycle/harness.hpp"
#include "hamcycle/verify.hpp"

namespace {

using namespace hamcycle;

std::optional<double> parse_p(const std::string& text) {
  if (text == "formula") return std::nullopt;
  std::size_t used = 0;
  const double p = std::stod(text, &used);
  if (used != text.size()) throw CLI::ValidationError("--p", "expected 'formula' or a number in [0,1]");
  return p;
}

std::string transcript_path(const std::string& out, std::size_t n, std::uint64_t trial) {
  return out + ".n" + std::to_string(n) + ".t" + std::to_string(trial) + ".transcript";
}

int cmd_run(const ExperimentConfig& base, const std::string& p_text, bool full, std::ostream& log) {
  ExperimentConfig cfg = base;
  cfg.p = parse_p(p_text);
  cfg.algorithm.retention = full ? Retention::full : Retention::audit;
  cfg.validate();

  std::vector<RunMetrics> runs;
  if (full) {
    for (std::size_t n : cfg.n_list) {
      for (std::uint64_t i = 0; i < cfg.trials; ++i) {
        std::vector<TranscriptRecord> t;
        runs.push_back(run_single(n, cfg.p_for(n), trial_seed(cfg.master_seed, i), cfg.algorithm, &t));
        const std::string path = transcript_path(cfg.output_path, n, i);
        std::ofstream out(path);
        if (!out) throw std::runtime_error("cannot open " + path + " for writing");
        write_transcript(out, t);
      }
    }
    for (std::size_t k = 0; k < cfg.n_list.size(); ++k)
      log << "n=" << cfg.n_list[k] << " success_rate="
          << summarize(std::span(runs).subspan(k * cfg.trials, cfg.trials)).success_rate << '\n';
  } else {
    BatchResult batch = run_batch(cfg);
    for (const auto& row : batch.summary) {
      log << "n=" << row.n << " p=" << row.p << " success_rate=" << row.success_rate
          << " max_message_bits=" << row.max_message_bits << " (" << row.message_bits_ratio << "/log)"
          << " max_node_memory_bits=" << row.max_node_memory_bits << " (" << row.memory_bits_ratio << "/log)";
      if (row.median_growth_small_regime) log << " median_growth=" << *row.median_growth_small_regime;
      log << '\n';
    }
    runs = std::move(batch.runs);
  }
  emit(runs, cfg.format, cfg.output_path);
  return 0;
}

int cmd_verify(const std::string& path, std::size_t n) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  const auto log = read_transcript(in);
  if (n == 0)
    for (const auto& r : log) n = std::max<std::size_t>(n, std::max(r.sender, r.receiver) + 1);
  const auto audit = audit_message_bits(log, n);
  const std::uint64_t cap = 32ull * log_budget(n);
  std::cout << "records=" << log.size() << " n=" << n << " max_message_bits=" << audit.max_bits
            << " ratio=" << audit.ratio << " cap=" << cap << (audit.max_bits <= cap ? " OK" : " EXCEEDED") << '\n';
  return audit.max_bits <= cap ? 0 : 1;
}

int cmd_oracle(std::size_t n, const std::string& p_text, std::uint64_t seed) {
  const auto p = parse_p(p_text);
  const double prob = p ? *p : p_formula(n);
  const RandomSource src(seed);
  const Graph g = gen_gnp(n, prob, src);
  const bool exact = exact_hamiltonian(g);
  const RunMetrics m = run_algorithm(g, src);
  std::cout << "n=" << n << " p=" << prob << " edges=" << g.edge_count() << " exact_hamiltonian=" << exact
            << " algorithm=" << (m.success ? "success" : std::string(to_string(*m.failure_cause))) << '\n';
  return m.success && !exact ? 1 : 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Distributed Hamiltonian cycle simulator on G(n,p)"};
  app.require_subcommand(1);

  ExperimentConfig cfg;
  std::string p_run = "formula", format = "csv", retention = "audit";
  auto* run = app.add_subcommand("run", "Run seeded trials and write per-run metrics");
  run->add_option("--n", cfg.n_list, "Node counts")->required()->expected(1, -1);
  run->add_option("--p", p_run, "'formula' or an explicit edge probability");
  run->add_option("--trials", cfg.trials, "Trials per n")->check(CLI::PositiveNumber);
  run->add_option("--seed", cfg.master_seed, "Master seed");
  run->add_option("--out", cfg.output_path, "Output file")->required();
  run->add_option("--format", format, "csv or json")->check(CLI::IsMember({"csv", "json"}));
  run->add_option("--retention", retention, "audit or full (full also writes transcripts)")
      ->check(CLI::IsMember({"audit", "full"}));
  run->add_option("--threads", cfg.threads, "Worker threads")->check(CLI::PositiveNumber);
  run->add_option("--middle-stop-outside", cfg.algorithm.middle_stop_outside,
                  "Stop middle-phase insertions once this few nodes are outside the cycle");

  std::string transcript;
  std::size_t verify_n = 0;
  auto* verify = app.add_subcommand("verify", "Audit message sizes in a transcript file");
  verify->add_option("--transcript", transcript, "Transcript file")->required();
  verify->add_option("--n", verify_n, "Network size (default: inferred from node ids)");

  std::size_t oracle_n = 0;
  std::string p_oracle = "0.5";
  std::uint64_t oracle_seed = 0;
  auto* oracle = app.add_subcommand("oracle", "Compare the algorithm with the exact checker on one graph");
  oracle->add_option("--n", oracle_n, "Node count (at most 20)")->required()->check(CLI::Range(1, 20));
  oracle->add_option("--p", p_oracle, "'formula' or an explicit edge probability");
  oracle->add_option("--seed", oracle_seed, "Seed");

  CLI11_PARSE(app, argc, argv);
  try {
    if (*run) {
      cfg.format = format == "json" ? OutputFormat::json : OutputFormat::csv;
      return cmd_run(cfg, p_run, retention == "full", std::cerr);
    }
    if (*verify) return cmd_verify(transcript, verify_n);
    if (*oracle) return cmd_oracle(oracle_n, p_oracle, oracle_seed);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return 0;
}
