#pragma once

#include <bit>
#include <cstdint>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "hamcycle/engine.hpp"
#include "hamcycle/graph.hpp"
#include "hamcycle/label.hpp"
#include "hamcycle/message.hpp"
#include "hamcycle/metrics.hpp"
#include "hamcycle/node_state.hpp"
#include "hamcycle/random.hpp"
#include "hamcycle/verify.hpp"

namespace hamcycle {

/// Fixed round budget per phase for a network of n nodes (L = ceil(log2 n)).
struct Schedule {
  unsigned L = 1;

  static Schedule for_network(std::size_t n) { return Schedule{log_budget(n)}; }

  static constexpr std::uint64_t preprocessing_rounds = 9;
  static constexpr std::uint64_t middle_rounds = 3;
  static constexpr std::uint64_t final_rounds = 11;

  std::uint64_t phase0_iterations() const noexcept { return 3ull * L - 1; }
  std::uint64_t phase0_rounds() const noexcept { return 3 * phase0_iterations(); }
  std::uint64_t phase1_iterations() const noexcept { return L; }
  std::uint64_t phase1_rounds() const noexcept { return 3ull * L; }
  std::uint64_t middle_phases() const noexcept { return 16ull * L; }
  std::uint64_t final_phases() const noexcept { return 3ull * L; }

  std::uint64_t total() const noexcept {
    return preprocessing_rounds + phase0_rounds() + phase1_rounds() + middle_rounds * middle_phases() +
           final_rounds * final_phases();
  }
};

struct AlgorithmConfig {
  unsigned spacing_factor = LabelScheme::kDefaultSpacingFactor;
  Retention retention = Retention::audit;
  std::optional<std::uint64_t> message_bit_cap;  // defaults to 32 * L
  bool check_invariants = true;
  // Experiment hook: middle phases stop inserting once at most this many
  // nodes are off the cycle (0 = never), leaving the rest to final phases.
  std::uint64_t middle_stop_outside = 0;
};

/// One execution of the distributed Hamiltonian-cycle algorithm on a
/// fixed graph. Node 0 is v0. Phases can be driven one at a time; each
/// returns false once the run has halted with a cause.
class HamCycleRun {
 public:
  using Engine = SyncEngine<Message>;
  using SendCtx = Engine::SendContext;
  using RecvCtx = Engine::ReceiveContext;

  HamCycleRun(const Graph& g, const RandomSource& src, AlgorithmConfig config = {})
      : graph_(&g),
        config_(config),
        schedule_(Schedule::for_network(g.size())),
        scheme_(LabelScheme::for_network(g.size(), config.spacing_factor)),
        widths_(FieldWidths::for_network(g.size(), scheme_)),
        spacing_(scheme_.spacing()),
        upper_(scheme_.upper_bound()),
        counter_bits_(static_cast<unsigned>(std::bit_width(schedule_.total()))),
        engine_(g, widths_, {config.message_bit_cap.value_or(32ull * schedule_.L), config.retention}, src),
        states_(g.size()) {
    for (NodeId v = 0; v < g.size(); ++v) states_[v].id = v;
    engine_.set_observer([this](const SendEvent& e) {
      if (e.sender == kV0 && e.kind == static_cast<std::uint8_t>(Kind::SelectBroadcast)) ++selects_in_phase_;
    });
  }

  static constexpr NodeId kV0 = 0;

  const Graph& graph() const noexcept { return *graph_; }
  const Schedule& schedule() const noexcept { return schedule_; }
  const LabelScheme& scheme() const noexcept { return scheme_; }
  const FieldWidths& widths() const noexcept { return widths_; }
  const Engine& engine() const noexcept { return engine_; }
  std::span<const NodeState> states() const noexcept { return states_; }
  /// Direct state access for tests that stage a phase by hand.
  std::vector<NodeState>& mutable_states() noexcept { return states_; }
  std::optional<FailureCause> failure() const noexcept { return failure_; }
  const RunMetrics& metrics() const noexcept { return metrics_; }

  std::uint64_t cycle_size() const noexcept {
    std::uint64_t c = 0;
    for (const auto& s : states_) c += s.on_cycle();
    return c;
  }

  /// BFS tree of depth <= 3 rooted at v0, then n counted up and flooded down.
  bool preprocessing() {
    engine_.begin_phase("preprocessing");
    NodeState& root = states_[kV0];
    root.is_v0 = true;
    root.v0 = kV0;
    root.depth = 0;
    for (unsigned r = 1; r <= 3; ++r) {
      round(
          [&](const SendCtx& c) {
            auto& s = st(c);
            if (s.depth && *s.depth == r - 1) c.broadcast(msg::BfsFlood{*s.v0});
          },
          [&](const RecvCtx& c) {
            auto& s = st(c);
            if (s.depth) return;
            c.inbox().template for_each_of<msg::BfsFlood>([&](NodeId from, const msg::BfsFlood& m) {
              if (s.bfs_parent) return;
              s.bfs_parent = from;
              s.depth = static_cast<std::uint8_t>(r);
              s.v0 = m.root;
            });
          });
    }
    // An isolated v0 floods nobody; phase 0 then reports the missing responder.
    if (graph_->degree(kV0) > 0)
      for (const auto& s : states_)
        if (!s.depth) return halt(FailureCause::DiameterExceeded);

    for (unsigned k = 0; k < 3; ++k) {
      const unsigned sender_depth = 3 - k;
      round(
          [&](const SendCtx& c) {
            auto& s = st(c);
            if (!s.depth) return;
            if (k == 0) s.scratch.subtree = 1;
            if (*s.depth != sender_depth) return;
            c.send(*s.bfs_parent, msg::CountUp{*s.scratch.subtree});
            s.scratch.subtree.reset();
          },
          [&](const RecvCtx& c) {
            auto& s = st(c);
            c.inbox().template for_each_of<msg::CountUp>(
                [&](NodeId, const msg::CountUp& m) { *s.scratch.subtree += m.subtree; });
          });
    }
    for (unsigned k = 0; k < 3; ++k) {
      round(
          [&](const SendCtx& c) {
            auto& s = st(c);
            if (s.depth != k) return;
            if (s.is_v0) {
              s.known_n = *s.scratch.subtree;
              s.scratch.subtree.reset();
            }
            c.broadcast(msg::CountDown{*s.known_n});
          },
          [&](const RecvCtx& c) {
            auto& s = st(c);
            if (s.depth != k + 1) return;
            if (const auto* m = c.inbox().template broadcast_from_as<msg::CountDown>(*s.bfs_parent))
              s.known_n = m->n;
          });
    }
    return after_phase(Shape::none);
  }

  /// Grows the path P from v0 one appointed node per iteration up to
  /// min(3L, n-2) nodes; node k gets number k*S.
  bool phase0() {
    engine_.begin_phase("phase0");
    states_[kV0].label = Label(0);
    const std::uint64_t n = graph_->size();
    const std::uint64_t target = std::max<std::uint64_t>(1, std::min<std::uint64_t>(3ull * schedule_.L, n >= 2 ? n - 2 : 1));
    for (std::uint64_t it = 0; it < schedule_.phase0_iterations(); ++it) {
      if (it + 1 >= target) {
        engine_.idle_rounds(3);
        continue;
      }
      round(
          [&](const SendCtx& c) {
            auto& s = st(c);
            if (is_tail(s)) c.broadcast(msg::Phase0Invite{*s.v0});
          },
          [&](const RecvCtx& c) {
            auto& s = st(c);
            if (s.label) return;
            c.inbox().template for_each_of<msg::Phase0Invite>(
                [&](NodeId from, const msg::Phase0Invite&) { s.scratch.chosen = from; });
          });
      round(
          [&](const SendCtx& c) {
            auto& s = st(c);
            if (s.label || !s.scratch.chosen) return;
            c.send(*s.scratch.chosen, msg::Phase0Response{});
            s.scratch.chosen.reset();
          },
          [&](const RecvCtx& c) {
            auto& s = st(c);
            if (!is_tail(s)) return;
            Reservoir<NodeId> pick;
            c.inbox().template for_each_of<msg::Phase0Response>(
                [&](NodeId from, const msg::Phase0Response&) { pick.offer(from, c.rng()); });
            if (pick.empty()) return fail(FailureCause::NoResponder);
            s.scratch.chosen = pick.take();
          });
      if (halted()) return false;
      round(
          [&](const SendCtx& c) {
            auto& s = st(c);
            if (!is_tail(s) || !s.scratch.chosen) return;
            c.send(*s.scratch.chosen, msg::Phase0Appoint{*s.v0, *s.label + spacing_});
            s.next = std::exchange(s.scratch.chosen, std::nullopt);
          },
          [&](const RecvCtx& c) {
            auto& s = st(c);
            c.inbox().template for_each_of<msg::Phase0Appoint>([&](NodeId from, const msg::Phase0Appoint& m) {
              s.prev = from;
              s.label = m.label;
              s.v0 = m.v0;
            });
          });
    }
    return after_phase(Shape::path);
  }

  /// Extends P until its tail can close the cycle through a neighbor of v0.
  /// The tail's nonce lets v0 pick the same closing node independently.
  bool phase1() {
    engine_.begin_phase("phase1");
    bool closed = false;
    for (std::uint64_t it = 0; it < schedule_.phase1_iterations(); ++it) {
      if (closed) {
        engine_.idle_rounds(3);
        continue;
      }
      round(
          [&](const SendCtx& c) {
            auto& s = st(c);
            if (!is_tail(s)) return;
            std::uniform_int_distribution<std::uint64_t> draw(0, (std::uint64_t{1} << widths_.nonce) - 1);
            s.scratch.nonce = draw(c.rng());
            c.broadcast(msg::Phase1Invite{*s.v0, *s.scratch.nonce});
          },
          [&](const RecvCtx& c) {
            auto& s = st(c);
            if (s.label) return;
            c.inbox().template for_each_of<msg::Phase1Invite>([&](NodeId from, const msg::Phase1Invite& m) {
              s.scratch.chosen = from;
              s.scratch.nonce = m.nonce;
            });
          });
      round(
          [&](const SendCtx& c) {
            auto& s = st(c);
            if (s.label || !s.scratch.chosen) return;
            const NodeId tail = *s.scratch.chosen;
            const bool adjacent = c.is_neighbor(*s.v0);
            c.send(tail, msg::Phase1Response{adjacent});
            if (adjacent && tail != *s.v0) c.send(*s.v0, msg::Phase1Candidate{tail, *s.scratch.nonce});
            s.scratch.chosen.reset();
            s.scratch.nonce.reset();
          },
          [&](const RecvCtx& c) {
            auto& s = st(c);
            const auto& in = c.inbox();
            if (is_tail(s)) {
              Reservoir<NodeId> any;
              std::uint64_t flagged = 0;
              in.template for_each_of<msg::Phase1Response>([&](NodeId from, const msg::Phase1Response& m) {
                any.offer(from, c.rng());
                flagged += m.adjacent_to_v0;
              });
              if (any.empty()) return fail(FailureCause::NoResponder);
              if (!s.is_v0 && flagged > 0) {
                s.scratch.chosen = nth_sender<msg::Phase1Response>(
                    in, *s.scratch.nonce % flagged, [](const msg::Phase1Response& m) { return m.adjacent_to_v0; });
                s.scratch.close = true;
              } else {
                s.scratch.chosen = any.take();
              }
              s.scratch.nonce.reset();
            } else if (s.is_v0) {
              std::uint64_t count = 0, nonce = 0;
              in.template for_each_of<msg::Phase1Candidate>([&](NodeId, const msg::Phase1Candidate& m) {
                ++count;
                nonce = m.nonce;
              });
              if (count > 0)
                s.prev = nth_sender<msg::Phase1Candidate>(in, nonce % count,
                                                          [](const msg::Phase1Candidate&) { return true; });
            }
          });
      if (halted()) return false;
      round(
          [&](const SendCtx& c) {
            auto& s = st(c);
            if (!is_tail(s) || !s.scratch.chosen) return;
            const Label next_label = *s.label + spacing_;
            if (s.scratch.close)
              c.send(*s.scratch.chosen, msg::Phase1Close{*s.v0, next_label});
            else
              c.send(*s.scratch.chosen, msg::Phase1Appoint{*s.v0, next_label});
            s.next = std::exchange(s.scratch.chosen, std::nullopt);
            s.scratch.close = false;
          },
          [&](const RecvCtx& c) {
            auto& s = st(c);
            c.inbox().for_each([&](NodeId from, const Message& m) {
              if (const auto* a = std::get_if<msg::Phase1Appoint>(&m)) {
                s.prev = from;
                s.label = a->label;
                s.v0 = a->v0;
              } else if (const auto* z = std::get_if<msg::Phase1Close>(&m)) {
                s.prev = from;
                s.label = z->label;
                s.v0 = z->v0;
                s.next = z->v0;
              }
            });
          });
      closed = states_[kV0].prev.has_value();
    }
    metrics_.cycle_size_after_phase1 = cycle_size();
    if (!closed) {
      after_phase(Shape::path);
      return halt(FailureCause::CycleNotClosed);
    }
    return after_phase(Shape::cycle);
  }

  /// Concurrent single-edge insertions: an off-cycle node adjacent to both
  /// ends of a cycle edge (pw, w) asks pw to splice it in; each pw accepts
  /// at most one.
  bool middle_phase() {
    engine_.begin_phase("middle");
    MiddlePhaseRecord rec;
    rec.cycle_before = cycle_size();
    const std::uint64_t outside = graph_->size() - rec.cycle_before;
    if (config_.middle_stop_outside != 0 && outside <= config_.middle_stop_outside) {
      engine_.idle_rounds(Schedule::middle_rounds);
    } else {
      middle_rounds(rec);
    }
    metrics_.middle_phases.push_back(rec);
    if (halted()) return false;
    metrics_.cycle_size_after_each_middle_phase.push_back(cycle_size());
    return after_phase(Shape::cycle);
  }

  /// Inserts at most one off-cycle node by replacing cycle edges (w1,w2)
  /// and (w4,w3) with (w1,v), (v,w4), (w2,w3) and reversing w2..w4, or by
  /// a plain triangle insertion. v0 picks one offer and floods it.
  bool final_phase() {
    engine_.begin_phase("final");
    selects_in_phase_ = 0;
    const std::uint64_t before = cycle_size();
    final_rounds();
    if (halted()) return false;
    metrics_.max_selects_per_final_phase = std::max(metrics_.max_selects_per_final_phase, selects_in_phase_);
    if (cycle_size() > before) metrics_.final_phase_insertions += cycle_size() - before;
    return after_phase(Shape::cycle);
  }

  /// The full schedule; fills and returns the metrics.
  const RunMetrics& run() {
    bool ok = preprocessing() && phase0() && phase1();
    for (std::uint64_t i = 0; ok && i < schedule_.middle_phases(); ++i) ok = middle_phase();
    if (ok) metrics_.outside_at_final_start = graph_->size() - cycle_size();
    for (std::uint64_t i = 0; ok && i < schedule_.final_phases(); ++i) ok = final_phase();
    finish();
    return metrics_;
  }

  /// Certifies the outcome and copies the engine's audit into the metrics.
  void finish() {
    const auto report = verify_cycle(*graph_, states_, kV0);
    if (!failure_ && !report.is_hamiltonian(graph_->size())) failure_ = FailureCause::Incomplete;
    metrics_.n = graph_->size();
    metrics_.success = !failure_;
    metrics_.failure_cause = failure_;
    if (report.is_closed) metrics_.min_label_gap_final = verify_numbering(states_, kV0).min_gap;
    const AuditReport a = engine_.audit();
    metrics_.rounds_total = a.rounds_total;
    metrics_.rounds_per_phase = a.rounds_per_phase;
    metrics_.max_message_bits = a.max_message_bits;
    metrics_.max_node_memory_bits = a.max_node_memory_bits;
    metrics_.messages_total = a.messages_total;
  }

 private:
  enum class Shape { none, path, cycle };

  NodeState& st(const SendCtx& c) { return states_[c.id()]; }
  NodeState& st(const RecvCtx& c) { return states_[c.id()]; }

  static bool is_tail(const NodeState& s) noexcept { return s.label && !s.next; }

  template <class S, class R>
  void round(S&& send, R&& recv) {
    engine_.step_round(send, recv);
    engine_.record_node_memory(audit_node_memory(states_, widths_, counter_bits_));
  }

  void fail(FailureCause c) {
    if (!pending_failure_) pending_failure_ = c;
  }

  bool halted() {
    if (pending_failure_ && !failure_) failure_ = pending_failure_;
    return failure_.has_value();
  }

  bool halt(FailureCause c) {
    if (!failure_) failure_ = c;
    return false;
  }

  /// Sender of the idx-th unicast of type T (ascending sender) satisfying pred.
  template <class T, class Pred>
  static NodeId nth_sender(const Engine::Inbox& in, std::uint64_t idx, Pred pred) {
    std::optional<NodeId> found;
    std::uint64_t i = 0;
    in.template for_each_of<T>([&](NodeId from, const T& m) {
      if (!found && pred(m) && i++ == idx) found = from;
    });
    return *found;
  }

  void middle_rounds(MiddlePhaseRecord& rec) {
    round(
        [&](const SendCtx& c) {
          auto& s = st(c);
          if (s.label) c.broadcast(msg::MidI1{s.id, *s.prev});
        },
        [&](const RecvCtx& c) {
          auto& s = st(c);
          if (s.label) return;
          Reservoir<std::pair<NodeId, NodeId>> pick;
          c.inbox().template for_each_of<msg::MidI1>([&](NodeId, const msg::MidI1& m) {
            if (c.is_neighbor(m.pred)) pick.offer({m.self, m.pred}, c.rng());
          });
          s.scratch.slot = pick.take();
        });
    for (const auto& s : states_) rec.invitations += s.scratch.slot.has_value();

    round(
        [&](const SendCtx& c) {
          auto& s = st(c);
          if (!s.scratch.slot) return;
          c.send(s.scratch.slot->second, msg::MidI2{false});
          c.send(s.scratch.slot->first, msg::MidI2{true});
        },
        [&](const RecvCtx& c) {
          auto& s = st(c);
          if (!s.label) return;
          Reservoir<NodeId> pick;
          c.inbox().template for_each_of<msg::MidI2>([&](NodeId from, const msg::MidI2& m) {
            if (m.to_successor)
              s.scratch.announce = true;
            else
              pick.offer(from, c.rng());
          });
          s.scratch.chosen = pick.take();
        });

    const std::uint64_t before = cycle_size();
    round(
        [&](const SendCtx& c) {
          auto& s = st(c);
          if (!s.label || (!s.scratch.chosen && !s.scratch.announce)) return;
          c.broadcast(msg::MidI3{*s.label, s.scratch.chosen.has_value(), s.scratch.chosen.value_or(0)});
          if (s.scratch.chosen) s.next = std::exchange(s.scratch.chosen, std::nullopt);
          s.scratch.announce = false;
        },
        [&](const RecvCtx& c) {
          auto& s = st(c);
          const auto& in = c.inbox();
          if (!s.label) {
            if (!s.scratch.slot) return;
            const auto [w, pw] = *std::exchange(s.scratch.slot, std::nullopt);
            const auto* m = in.template broadcast_from_as<msg::MidI3>(pw);
            if (!m || !m->accepted || m->accepted_node != s.id) return;
            try {
              if (w == *s.v0) {
                s.label = wrap_label(m->label, upper_);
              } else {
                const auto* succ = in.template broadcast_from_as<msg::MidI3>(w);
                if (!succ) throw ModelViolation("successor did not announce its number");
                s.label = midpoint_label(m->label, succ->label);
              }
            } catch (const GapExhausted&) {
              return fail(FailureCause::GapExhausted);
            }
            s.prev = pw;
            s.next = w;
            return;
          }
          if (const auto* mp = in.template broadcast_from_as<msg::MidI3>(*s.prev); mp && mp->accepted)
            s.prev = mp->accepted_node;
        });
    rec.insertions = cycle_size() - before;
  }

  void offer_to_root(NodeState& s, const Integration& o, Rng& rng) {
    ++s.scratch.offers_seen;
    if (s.scratch.offers_seen == 1 || uniform_index(rng, s.scratch.offers_seen) == 0) s.scratch.offer = o;
  }

  /// Keeps the offer with the smallest candidate id; v0 samples all offers.
  void collect_offer(NodeState& s, const Integration& o, Rng& rng) {
    if (s.is_v0)
      offer_to_root(s, o, rng);
    else if (!s.scratch.offer || o.v < s.scratch.offer->v)
      s.scratch.offer = o;
  }

  static bool gap_at_least_two(const Label& low, const Label& high) {
    return low < high && Label(2) <= high - low;
  }

  void apply_selection(NodeState& s, const Integration& sel) {
    if (s.id == sel.v) {
      s.prev = sel.w1;
      s.next = sel.triangle ? sel.w2 : sel.w4;
      s.scratch.f = sel.f;
      return;
    }
    if (!s.label) return;
    if (!sel.triangle && sel.f <= *s.label && *s.label <= sel.l) {
      s.label = reflect_label(*s.label, sel.f, sel.l);
      std::swap(s.next, s.prev);
      if (s.id == sel.w2) s.next = sel.w3;
      if (s.id == sel.w4) s.prev = sel.v;
    }
    if (s.id == sel.w1) {
      s.next = sel.v;
      s.scratch.notify = true;
      s.scratch.chosen = sel.v;
    }
    if (s.id == sel.w3) s.prev = sel.triangle ? sel.v : sel.w2;
  }

  void final_rounds() {
    // R1: off-cycle nodes announce themselves; each cycle node keeps one id.
    round(
        [&](const SendCtx& c) {
          if (!st(c).label) c.broadcast(msg::FinI1{c.id()});
        },
        [&](const RecvCtx& c) {
          auto& s = st(c);
          if (!s.label) return;
          Reservoir<NodeId> pick;
          c.inbox().template for_each_of<msg::FinI1>(
              [&](NodeId, const msg::FinI1& m) { pick.offer(m.candidate, c.rng()); });
          s.scratch.chosen = pick.take();
        });

    // R2: w1 passes its id to its successor, which detects triangles.
    round(
        [&](const SendCtx& c) {
          auto& s = st(c);
          if (!s.label || !s.scratch.chosen) return;
          c.send(*s.next, msg::FinI2{*s.scratch.chosen, *s.label});
          s.scratch.chosen.reset();
        },
        [&](const RecvCtx& c) {
          auto& s = st(c);
          if (!s.label) return;
          c.inbox().template for_each_of<msg::FinI2>([&](NodeId from, const msg::FinI2& m) {
            if (!c.is_neighbor(m.candidate)) {
              s.scratch.heard = std::pair{m.candidate, m.label};
              return;
            }
            Integration o{m.candidate, from, s.id, from, s.id, *s.label, *s.label, true};
            if (s.is_v0) {
              if (gap_at_least_two(m.label, upper_)) offer_to_root(s, o, c.rng());
            } else if (gap_at_least_two(m.label, *s.label)) {
              s.scratch.offer = o;
            }
          });
        });

    // R3: triangle offers go up the tree; w2 candidates publish themselves;
    // w3 candidates match them against the id heard from their predecessor.
    round(
        [&](const SendCtx& c) {
          auto& s = st(c);
          if (!s.label || s.is_v0) return;
          if (s.scratch.offer) {
            c.send(*s.bfs_parent, msg::Offer{*std::exchange(s.scratch.offer, std::nullopt)});
          } else if (s.scratch.heard && gap_at_least_two(s.scratch.heard->second, *s.label)) {
            c.broadcast(msg::FinI3{s.scratch.heard->first, *s.prev, *s.label});
          }
        },
        [&](const RecvCtx& c) {
          auto& s = st(c);
          if (!s.label) return;
          const auto& in = c.inbox();
          if (s.scratch.heard) {
            const auto [x, l] = *std::exchange(s.scratch.heard, std::nullopt);
            Reservoir<Integration> pick;
            in.template for_each_of<msg::FinI3>([&](NodeId from, const msg::FinI3& m) {
              if (m.candidate == x && m.f < l) pick.offer({x, m.w1, from, *s.prev, s.id, m.f, l, false}, c.rng());
            });
            if (auto own = pick.take()) collect_offer(s, *own, c.rng());
          }
          in.template for_each_of<msg::Offer>([&](NodeId, const msg::Offer& m) { collect_offer(s, m.offer, c.rng()); });
        });

    // R4-R6: forward pending offers to the root.
    for (int r = 0; r < 3; ++r) {
      round(
          [&](const SendCtx& c) {
            auto& s = st(c);
            if (s.is_v0 || !s.scratch.offer) return;
            c.send(*s.bfs_parent, msg::Offer{*std::exchange(s.scratch.offer, std::nullopt)});
          },
          [&](const RecvCtx& c) {
            auto& s = st(c);
            c.inbox().template for_each_of<msg::Offer>(
                [&](NodeId, const msg::Offer& m) { collect_offer(s, m.offer, c.rng()); });
          });
    }

    // R7-R9: the root's choice floods down the tree and is applied on arrival.
    for (unsigned depth = 1; depth <= 3; ++depth) {
      round(
          [&](const SendCtx& c) {
            auto& s = st(c);
            if (depth == 1 && s.is_v0) {
              s.scratch.offers_seen = 0;
              if (auto choice = std::exchange(s.scratch.offer, std::nullopt)) {
                c.broadcast(msg::SelectBroadcast{*choice});
                apply_selection(s, *choice);
              }
            } else if (s.scratch.select) {
              c.broadcast(msg::SelectBroadcast{*std::exchange(s.scratch.select, std::nullopt)});
            }
          },
          [&](const RecvCtx& c) {
            auto& s = st(c);
            if (!s.depth || *s.depth != depth) return;
            const auto* m = c.inbox().template broadcast_from_as<msg::SelectBroadcast>(*s.bfs_parent);
            if (!m) return;
            apply_selection(s, m->choice);
            if (depth < 3) s.scratch.select = m->choice;
          });
    }

    // R10: w1 tells v its number; v takes the midpoint towards w4 (or wraps).
    round(
        [&](const SendCtx& c) {
          auto& s = st(c);
          if (!s.scratch.notify) return;
          c.send(*std::exchange(s.scratch.chosen, std::nullopt), msg::FinNotify{*s.label});
          s.scratch.notify = false;
        },
        [&](const RecvCtx& c) {
          auto& s = st(c);
          if (!s.scratch.f) return;
          c.inbox().template for_each_of<msg::FinNotify>([&](NodeId, const msg::FinNotify& m) {
            try {
              s.label = *s.scratch.f == Label(0) ? wrap_label(m.label, upper_) : midpoint_label(m.label, *s.scratch.f);
            } catch (const GapExhausted&) {
              fail(FailureCause::GapExhausted);
            }
          });
          s.scratch.f.reset();
        });
    engine_.idle_rounds(1);
  }

  /// Structural checks after a phase; violations are counted, not thrown.
  bool after_phase(Shape shape) {
    if (!config_.check_invariants) return !halted();
    std::uint64_t bad = 0;
    for (const auto& s : states_) bad += !s.scratch.empty();
    if (shape == Shape::path) bad += !path_ok();
    if (shape == Shape::cycle) bad += !cycle_ok();
    metrics_.invariant_violations += bad;
    return !halted();
  }

  /// P is v0 -> ... -> tail along graph edges numbered 0, S, 2S, ...
  bool path_ok() const {
    std::uint64_t on = 0;
    for (const auto& s : states_) on += s.on_cycle();
    NodeId u = kV0;
    Label expect(0);
    for (std::uint64_t k = 0; k < on; ++k) {
      const auto& s = states_[u];
      if (s.label != expect) return false;
      expect = expect + spacing_;
      if (k + 1 == on) return !s.next;
      if (!s.next || !graph_->has_edge(u, *s.next) || states_[*s.next].prev != u) return false;
      u = *s.next;
    }
    return false;
  }

  /// C is a closed doubly linked cycle through exactly the numbered nodes,
  /// along graph edges, numbered strictly ascending from 0 at v0.
  bool cycle_ok() const {
    std::uint64_t on = 0;
    for (const auto& s : states_) {
      on += s.on_cycle();
      if (!s.on_cycle() && (s.next || s.prev)) return false;
    }
    NodeId u = kV0;
    std::optional<Label> last;
    for (std::uint64_t k = 0; k < on; ++k) {
      const auto& s = states_[u];
      if (!s.label || !s.next || (last && !(*last < *s.label))) return false;
      if (k == 0 && *s.label != Label(0)) return false;
      if (!graph_->has_edge(u, *s.next) || states_[*s.next].prev != u) return false;
      last = s.label;
      u = *s.next;
      if ((u == kV0) != (k + 1 == on)) return false;
    }
    return true;
  }

  const Graph* graph_;
  AlgorithmConfig config_;
  Schedule schedule_;
  LabelScheme scheme_;
  FieldWidths widths_;
  Label spacing_;
  Label upper_;
  unsigned counter_bits_;
  Engine engine_;
  std::vector<NodeState> states_;
  std::optional<FailureCause> failure_;
  std::optional<FailureCause> pending_failure_;
  std::uint64_t selects_in_phase_ = 0;
  RunMetrics metrics_;
};

/// Runs the full schedule on g with node streams drawn from src.
inline RunMetrics run_algorithm(const Graph& g, const RandomSource& src, AlgorithmConfig config = {}) {
  HamCycleRun run(g, src, config);
  return run.run();
}

}  // namespace hamcycle
