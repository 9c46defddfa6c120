#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <utility>

#include "hamcycle/graph.hpp"
#include "hamcycle/label.hpp"
#include "hamcycle/message.hpp"

namespace hamcycle {

/// Phase-local working memory. Empty at every phase boundary.
struct Scratch {
  std::optional<std::uint64_t> subtree;                // convergecast partial count
  std::optional<NodeId> chosen;                        // inviter / pick / accepted node / I1 id
  std::optional<std::uint64_t> nonce;                  // phase-1 closing draw
  bool close = false;                                  // phase-1 tail closes this iteration
  std::optional<std::pair<NodeId, NodeId>> slot;       // middle: (w, predecessor of w)
  bool announce = false;                               // middle: successor announces its number
  std::optional<std::pair<NodeId, Label>> heard;       // final: I2 (id, number) from predecessor
  std::optional<Integration> offer;                    // final: offer to forward
  std::optional<Integration> select;                   // final: selection to forward
  std::optional<Label> f;                              // final: v waits for w1's number
  bool notify = false;                                 // final: w1 owes v its number
  std::uint64_t offers_seen = 0;                       // v0's reservoir counter

  bool empty() const noexcept {
    return !subtree && !chosen && !nonce && !close && !slot && !announce && !heard && !offer &&
           !select && !f && !notify && offers_seen == 0;
  }
};

/// Per-node algorithm state. next/prev form the doubly linked cycle
/// (next empty = not on the cycle, except the tail of the path during
/// phases 0 and 1); a node is on P or C exactly when it holds a number.
struct NodeState {
  NodeId id = 0;
  bool is_v0 = false;
  std::optional<NodeId> next;
  std::optional<NodeId> prev;
  std::optional<Label> label;
  std::optional<NodeId> bfs_parent;
  std::optional<std::uint8_t> depth;
  std::optional<std::uint64_t> known_n;
  std::optional<NodeId> v0;
  Scratch scratch;

  bool on_cycle() const noexcept { return label.has_value(); }
};

/// Sum of the declared widths of every field the node currently holds,
/// plus its round counter. Absent optionals cost nothing.
inline std::uint64_t memory_bits(const NodeState& s, const FieldWidths& w, unsigned counter_bits) {
  std::uint64_t bits = w.id + 1 + counter_bits;  // id, is_v0, round counter
  auto id = [&](const auto& o) { return o ? w.id : 0u; };
  auto lab = [&](const auto& o) { return o ? w.label : 0u; };
  bits += id(s.next) + id(s.prev) + id(s.bfs_parent) + id(s.v0) + lab(s.label);
  bits += s.depth ? 2 : 0;
  bits += s.known_n ? w.count : 0;

  const Scratch& x = s.scratch;
  constexpr std::uint64_t kIntegrationIds = 5;
  auto integration = [&](const auto& o) -> std::uint64_t {
    return o ? kIntegrationIds * w.id + 2ull * w.label + 1 : 0;
  };
  bits += x.subtree ? w.count : 0;
  bits += id(x.chosen);
  bits += x.nonce ? w.nonce : 0;
  bits += x.close + x.announce + x.notify;
  bits += x.slot ? 2ull * w.id : 0;
  bits += x.heard ? w.id + w.label : 0;
  bits += integration(x.offer) + integration(x.select);
  bits += lab(x.f);
  bits += x.offers_seen ? w.count : 0;
  return bits;
}

inline std::uint64_t audit_node_memory(std::span<const NodeState> states, const FieldWidths& w,
                                       unsigned counter_bits) {
  std::uint64_t best = 0;
  for (const auto& s : states) best = std::max(best, memory_bits(s, w, counter_bits));
  return best;
}

}  // namespace hamcycle
