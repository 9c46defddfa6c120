#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "hamcycle/label.hpp"

namespace hamcycle {

enum class FailureCause { NoResponder, CycleNotClosed, DiameterExceeded, GapExhausted, Incomplete };

inline constexpr std::array<std::string_view, 5> kFailureCauseNames = {
    "NoResponder", "CycleNotClosed", "DiameterExceeded", "GapExhausted", "Incomplete"};

constexpr std::string_view to_string(FailureCause c) noexcept {
  return kFailureCauseNames[static_cast<std::size_t>(c)];
}

inline std::optional<FailureCause> parse_failure_cause(std::string_view s) {
  for (std::size_t i = 0; i < kFailureCauseNames.size(); ++i)
    if (kFailureCauseNames[i] == s) return static_cast<FailureCause>(i);
  return std::nullopt;
}

/// One middle phase: cycle size before, nodes that found a slot, nodes inserted.
struct MiddlePhaseRecord {
  std::uint64_t cycle_before = 0;
  std::uint64_t invitations = 0;
  std::uint64_t insertions = 0;

  friend bool operator==(const MiddlePhaseRecord&, const MiddlePhaseRecord&) = default;
};

struct RunMetrics {
  std::uint64_t n = 0;
  double p = 0.0;
  std::uint64_t seed = 0;
  bool success = false;
  std::optional<FailureCause> failure_cause;
  std::uint64_t rounds_total = 0;
  std::vector<std::pair<std::string, std::uint64_t>> rounds_per_phase;
  std::vector<std::uint64_t> cycle_size_after_each_middle_phase;
  std::uint64_t final_phase_insertions = 0;
  std::uint64_t max_message_bits = 0;
  std::uint64_t max_node_memory_bits = 0;
  std::optional<Label> min_label_gap_final;

  std::uint64_t cycle_size_after_phase1 = 0;
  std::vector<MiddlePhaseRecord> middle_phases;
  std::uint64_t outside_at_final_start = 0;
  std::uint64_t max_selects_per_final_phase = 0;
  std::uint64_t invariant_violations = 0;
  std::uint64_t messages_total = 0;

  friend bool operator==(const RunMetrics&, const RunMetrics&) = default;
};

}  // namespace hamcycle
