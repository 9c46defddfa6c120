#pragma once

#include <array>
#include <cstdint>
#include <string_view>
#include <variant>

#include "hamcycle/graph.hpp"
#include "hamcycle/label.hpp"

namespace hamcycle {

// Decimal codes in transcripts are the enumerator values.
enum class Kind : std::uint8_t {
  Phase0Invite,
  Phase0Response,
  Phase0Appoint,
  Phase1Invite,
  Phase1Response,
  Phase1Appoint,
  Phase1Close,
  MidI1,
  MidI2,
  MidI3,
  FinI1,
  FinI2,
  FinI3,
  FinNotify,
  Offer,
  SelectBroadcast,
  BfsFlood,
  CountUp,
  CountDown,
  Phase1Candidate,
};

inline constexpr std::size_t kKindCount = 20;

constexpr std::string_view kind_name(Kind k) noexcept {
  constexpr std::array<std::string_view, kKindCount> names = {
      "PHASE0_INVITE", "PHASE0_RESPONSE", "PHASE0_APPOINT", "PHASE1_INVITE",
      "PHASE1_RESPONSE", "PHASE1_APPOINT", "PHASE1_CLOSE", "MID_I1",
      "MID_I2", "MID_I3", "FIN_I1", "FIN_I2",
      "FIN_I3", "FIN_NOTIFY", "OFFER", "SELECT_BROADCAST",
      "BFS_FLOOD", "COUNT_UP", "COUNT_DOWN", "PHASE1_CANDIDATE"};
  return names[static_cast<std::size_t>(k)];
}

/// Wire widths of the field types for one network size.
struct FieldWidths {
  unsigned id = 1;     // ceil(log2 n)
  unsigned label = 1;  // bitlen(U)
  unsigned count = 1;  // bitlen(n)
  unsigned nonce = 2;  // 2 * id

  static FieldWidths for_network(std::size_t n, const LabelScheme& scheme) {
    FieldWidths w;
    w.id = log_budget(n);
    w.label = scheme.field_bits();
    w.count = static_cast<unsigned>(std::bit_width(static_cast<std::uint64_t>(n)));
    w.nonce = 2 * w.id;
    return w;
  }
};

/// Declared field counts of a message kind.
struct FieldLayout {
  unsigned ids = 0;
  unsigned labels = 0;
  unsigned flags = 0;
  unsigned counts = 0;
  unsigned nonces = 0;

  constexpr std::uint64_t bits(const FieldWidths& w) const noexcept {
    return std::uint64_t{ids} * w.id + std::uint64_t{labels} * w.label + flags +
           std::uint64_t{counts} * w.count + std::uint64_t{nonces} * w.nonce;
  }
};

/// A final-phase integration possibility for off-cycle node v. The cycle
/// edges (w1,w2) and (w4,w3) are replaced by (w1,v), (v,w4), (w2,w3) and the
/// segment w2..w4, numbered f..l, is reversed. For a triangle w4 = w1,
/// w3 = w2 and f = l = number of w2; v simply goes between w1 and w2.
struct Integration {
  NodeId v = 0, w1 = 0, w2 = 0, w4 = 0, w3 = 0;
  Label f, l;
  bool triangle = false;

  friend bool operator==(const Integration&, const Integration&) = default;
};

namespace msg {

struct BfsFlood {
  static constexpr Kind kind = Kind::BfsFlood;
  static constexpr FieldLayout layout{.ids = 1};
  NodeId root;
};
struct CountUp {
  static constexpr Kind kind = Kind::CountUp;
  static constexpr FieldLayout layout{.counts = 1};
  std::uint64_t subtree;
};
struct CountDown {
  static constexpr Kind kind = Kind::CountDown;
  static constexpr FieldLayout layout{.counts = 1};
  std::uint64_t n;
};
struct Phase0Invite {
  static constexpr Kind kind = Kind::Phase0Invite;
  static constexpr FieldLayout layout{.ids = 1};
  NodeId v0;
};
struct Phase0Response {
  static constexpr Kind kind = Kind::Phase0Response;
  static constexpr FieldLayout layout{.flags = 1};
};
struct Phase0Appoint {
  static constexpr Kind kind = Kind::Phase0Appoint;
  static constexpr FieldLayout layout{.ids = 1, .labels = 1};
  NodeId v0;
  Label label;
};
struct Phase1Invite {
  static constexpr Kind kind = Kind::Phase1Invite;
  static constexpr FieldLayout layout{.ids = 1, .nonces = 1};
  NodeId v0;
  std::uint64_t nonce;
};
struct Phase1Response {
  static constexpr Kind kind = Kind::Phase1Response;
  static constexpr FieldLayout layout{.flags = 1};
  bool adjacent_to_v0;
};
/// Responder adjacent to v0 tells v0 it may close the cycle.
struct Phase1Candidate {
  static constexpr Kind kind = Kind::Phase1Candidate;
  static constexpr FieldLayout layout{.ids = 1, .nonces = 1};
  NodeId tail;
  std::uint64_t nonce;
};
struct Phase1Appoint {
  static constexpr Kind kind = Kind::Phase1Appoint;
  static constexpr FieldLayout layout{.ids = 1, .labels = 1};
  NodeId v0;
  Label label;
};
struct Phase1Close {
  static constexpr Kind kind = Kind::Phase1Close;
  static constexpr FieldLayout layout{.ids = 1, .labels = 1};
  NodeId v0;
  Label label;
};
struct MidI1 {
  static constexpr Kind kind = Kind::MidI1;
  static constexpr FieldLayout layout{.ids = 2};
  NodeId self;
  NodeId pred;
};
/// Sent to the predecessor (the node that will splice) and, flagged, to
/// the successor (which must announce its number in round 3).
struct MidI2 {
  static constexpr Kind kind = Kind::MidI2;
  static constexpr FieldLayout layout{.flags = 1};
  bool to_successor;
};
/// Round-3 broadcast of every cycle node that received a MID_I2: its own
/// number and, if it splices, the accepted node.
struct MidI3 {
  static constexpr Kind kind = Kind::MidI3;
  static constexpr FieldLayout layout{.ids = 1, .labels = 1, .flags = 1};
  Label label;
  bool accepted;
  NodeId accepted_node;
};
struct FinI1 {
  static constexpr Kind kind = Kind::FinI1;
  static constexpr FieldLayout layout{.ids = 1};
  NodeId candidate;
};
struct FinI2 {
  static constexpr Kind kind = Kind::FinI2;
  static constexpr FieldLayout layout{.ids = 1, .labels = 1};
  NodeId candidate;
  Label label;  // number of the sender (w1)
};
struct FinI3 {
  static constexpr Kind kind = Kind::FinI3;
  static constexpr FieldLayout layout{.ids = 2, .labels = 1};
  NodeId candidate;
  NodeId w1;
  Label f;  // number of the sender (w2)
};
struct FinNotify {
  static constexpr Kind kind = Kind::FinNotify;
  static constexpr FieldLayout layout{.labels = 1};
  Label label;  // number of w1
};
struct Offer {
  static constexpr Kind kind = Kind::Offer;
  static constexpr FieldLayout layout{.ids = 5, .labels = 2, .flags = 1};
  Integration offer;
};
struct SelectBroadcast {
  static constexpr Kind kind = Kind::SelectBroadcast;
  static constexpr FieldLayout layout{.ids = 5, .labels = 2, .flags = 1};
  Integration choice;
};

}  // namespace msg

using Message = std::variant<msg::BfsFlood, msg::CountUp, msg::CountDown, msg::Phase0Invite,
                             msg::Phase0Response, msg::Phase0Appoint, msg::Phase1Invite,
                             msg::Phase1Response, msg::Phase1Candidate, msg::Phase1Appoint,
                             msg::Phase1Close, msg::MidI1, msg::MidI2, msg::MidI3, msg::FinI1,
                             msg::FinI2, msg::FinI3, msg::FinNotify, msg::Offer,
                             msg::SelectBroadcast>;

inline Kind kind_of(const Message& m) noexcept {
  return std::visit([](const auto& p) { return std::decay_t<decltype(p)>::kind; }, m);
}

inline std::uint64_t bit_size(const Message& m, const FieldWidths& w) noexcept {
  return std::visit([&](const auto& p) { return std::decay_t<decltype(p)>::layout.bits(w); }, m);
}

namespace detail {
inline bool label_fits(const Label& l, const FieldWidths& w) { return l.bit_length() <= w.label; }
}  // namespace detail

/// True if every label carried fits the declared label width.
inline bool fits_widths(const Message& m, const FieldWidths& w) {
  using detail::label_fits;
  return std::visit(
      [&](const auto& p) -> bool {
        using T = std::decay_t<decltype(p)>;
        if constexpr (requires { p.label; }) return label_fits(p.label, w);
        else if constexpr (requires { p.f; }) return label_fits(p.f, w);
        else if constexpr (requires { p.offer; }) return label_fits(p.offer.f, w) && label_fits(p.offer.l, w);
        else if constexpr (requires { p.choice; }) return label_fits(p.choice.f, w) && label_fits(p.choice.l, w);
        else {
          static_assert(T::layout.labels == 0);
          return true;
        }
      },
      m);
}

}  // namespace hamcycle
