#pragma once

#include <algorithm>
#include <cstdint>
#include <cstdio>
#include <istream>
#include <functional>
#include <optional>
#include <ostream>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "hamcycle/graph.hpp"
#include "hamcycle/message.hpp"
#include "hamcycle/random.hpp"

namespace hamcycle {

enum class Retention { audit, full };

/// One delivered message. A local broadcast yields one record per neighbor.
struct TranscriptRecord {
  std::uint64_t round;
  NodeId sender;
  NodeId receiver;
  std::uint8_t kind;
  std::uint32_t bits;

  friend bool operator==(const TranscriptRecord&, const TranscriptRecord&) = default;
};

/// One send operation as seen by an observer; receiver is empty for a local broadcast.
struct SendEvent {
  std::uint64_t round;
  NodeId sender;
  std::optional<NodeId> receiver;
  std::uint8_t kind;
  std::uint64_t bits;
  std::size_t fanout;
};

struct PhaseSpan {
  std::string name;
  std::uint64_t first_round;
  std::uint64_t rounds;
};

struct AuditReport {
  std::uint64_t max_message_bits = 0;
  std::uint64_t max_node_memory_bits = 0;
  std::uint64_t rounds_total = 0;
  std::vector<std::pair<std::string, std::uint64_t>> rounds_per_phase;
  std::uint64_t messages_total = 0;
};

/// Raised when a handler breaks the model: a message to a non-neighbor, two
/// messages on one edge in a round, or a message over the bit cap. These are
/// algorithm bugs, not input errors.
class ModelViolation : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

/// Synchronous CONGEST executor. Each round every node runs its send
/// handler (ascending id) without seeing anything sent this round; then
/// messages are delivered and every node runs its receive handler
/// (ascending id). Handlers may only touch the calling node's state, inbox
/// and random stream.
template <class Message>
class SyncEngine {
 public:
  struct Config {
    std::uint64_t message_bit_cap = 0;  // 0 = unchecked
    Retention retention = Retention::audit;
  };

  class Inbox {
   public:
    /// Calls f(sender, message): unicasts first, then broadcasts, each in ascending sender order.
    template <class F>
    void for_each(F&& f) const {
      for (const auto& d : unicasts()) f(d.from, eng_->messages_[d.index]);
      const auto& bc = eng_->broadcasters_;
      if (bc.empty()) return;
      if (bc.size() <= eng_->graph_->degree(self_)) {
        for (NodeId b : bc)
          if (eng_->graph_->has_edge(b, self_)) f(b, eng_->messages_[eng_->bcast_index_[b]]);
      } else {
        for (NodeId u : eng_->graph_->neighbors(self_))
          if (eng_->bcast_index_[u] != kNone) f(u, eng_->messages_[eng_->bcast_index_[u]]);
      }
    }

    /// Visits only messages holding payload type T: f(sender, const T&).
    template <class T, class F>
    void for_each_of(F&& f) const {
      for_each([&](NodeId from, const Message& m) {
        if (const T* p = std::get_if<T>(&m)) f(from, *p);
      });
    }

    /// The broadcast neighbor u made this round, if any.
    const Message* broadcast_from(NodeId u) const {
      if (u >= eng_->bcast_index_.size() || eng_->bcast_index_[u] == kNone) return nullptr;
      if (!eng_->graph_->has_edge(u, self_)) return nullptr;
      return &eng_->messages_[eng_->bcast_index_[u]];
    }

    template <class T>
    const T* broadcast_from_as(NodeId u) const {
      const Message* m = broadcast_from(u);
      return m ? std::get_if<T>(m) : nullptr;
    }

   private:
    friend class SyncEngine;
    struct Delivery {
      NodeId from;
      std::uint32_t index;
    };
    Inbox(const SyncEngine* eng, NodeId self) : eng_(eng), self_(self) {}
    std::span<const Delivery> unicasts() const {
      const auto& off = eng_->inbox_offsets_;
      return {eng_->inbox_.data() + off[self_], off[self_ + 1] - off[self_]};
    }
    const SyncEngine* eng_;
    NodeId self_;
  };

  class SendContext {
   public:
    NodeId id() const noexcept { return self_; }
    Rng& rng() const noexcept { return eng_->rngs_[self_]; }
    std::span<const NodeId> neighbors() const noexcept { return eng_->graph_->neighbors(self_); }
    bool is_neighbor(NodeId u) const noexcept { return eng_->graph_->has_edge(self_, u); }
    void send(NodeId to, Message m) const { eng_->push_unicast(self_, to, std::move(m)); }
    void broadcast(Message m) const { eng_->push_broadcast(self_, std::move(m)); }

   private:
    friend class SyncEngine;
    SendContext(SyncEngine* eng, NodeId self) : eng_(eng), self_(self) {}
    SyncEngine* eng_;
    NodeId self_;
  };

  class ReceiveContext {
   public:
    NodeId id() const noexcept { return self_; }
    Rng& rng() const noexcept { return eng_->rngs_[self_]; }
    std::span<const NodeId> neighbors() const noexcept { return eng_->graph_->neighbors(self_); }
    bool is_neighbor(NodeId u) const noexcept { return eng_->graph_->has_edge(self_, u); }
    const Inbox& inbox() const noexcept { return inbox_; }

   private:
    friend class SyncEngine;
    ReceiveContext(SyncEngine* eng, NodeId self) : eng_(eng), self_(self), inbox_(eng, self) {}
    SyncEngine* eng_;
    NodeId self_;
    Inbox inbox_;
  };

  SyncEngine(const Graph& graph, FieldWidths widths, Config config, const RandomSource& streams)
      : graph_(&graph), widths_(widths), config_(config) {
    const std::size_t n = graph.size();
    rngs_.reserve(n);
    for (NodeId v = 0; v < n; ++v) rngs_.push_back(streams.stream("node", v));
    bcast_index_.assign(n, kNone);
    sent_token_.assign(n, 0);
    inbox_offsets_.assign(n + 1, 0);
  }

  const Graph& graph() const noexcept { return *graph_; }
  const FieldWidths& widths() const noexcept { return widths_; }
  const Config& config() const noexcept { return config_; }
  std::uint64_t round() const noexcept { return round_; }

  /// Starts a named phase; later rounds count toward it.
  void begin_phase(std::string_view name) { phases_.push_back({std::string(name), round_ + 1, 0}); }

  const std::vector<PhaseSpan>& phases() const noexcept { return phases_; }

  void set_observer(std::function<void(const SendEvent&)> observer) { observer_ = std::move(observer); }

  /// send(const SendContext&) then recv(const ReceiveContext&) for every node.
  template <class SendFn, class RecvFn>
  void step_round(SendFn&& send, RecvFn&& recv) {
    start_round();
    const auto n = static_cast<NodeId>(graph_->size());
    for (NodeId v = 0; v < n; ++v) {
      current_sender_ = v;
      send(SendContext(this, v));
    }
    deliver();
    for (NodeId v = 0; v < n; ++v) recv(ReceiveContext(this, v));
  }

  /// Rounds in which nothing is sent (a phase finished early).
  void idle_rounds(std::uint64_t k) {
    for (std::uint64_t i = 0; i < k; ++i) {
      start_round();
      deliver();
    }
  }

  void record_node_memory(std::uint64_t bits) noexcept {
    max_memory_bits_ = std::max(max_memory_bits_, bits);
  }

  AuditReport audit() const {
    AuditReport r;
    r.max_message_bits = max_message_bits_;
    r.max_node_memory_bits = max_memory_bits_;
    r.rounds_total = round_;
    r.messages_total = messages_total_;
    for (const auto& span : phases_) {
      auto it = std::find_if(r.rounds_per_phase.begin(), r.rounds_per_phase.end(),
                             [&](const auto& e) { return e.first == span.name; });
      if (it == r.rounds_per_phase.end())
        r.rounds_per_phase.emplace_back(span.name, span.rounds);
      else
        it->second += span.rounds;
    }
    return r;
  }

  const std::vector<TranscriptRecord>& transcript() const noexcept { return transcript_; }

 private:
  static constexpr std::uint32_t kNone = 0xffffffffu;

  void start_round() {
    ++round_;
    if (!phases_.empty()) ++phases_.back().rounds;
    for (NodeId b : broadcasters_) bcast_index_[b] = kNone;
    broadcasters_.clear();
    messages_.clear();
    pending_.clear();
  }

  std::uint64_t token(NodeId sender) const noexcept {
    return round_ * (graph_->size() + 1) + sender + 1;
  }

  std::uint64_t checked_bits(NodeId from, const Message& m) const {
    const std::uint64_t bits = bit_size(m, widths_);
    if (config_.message_bit_cap != 0 && bits > config_.message_bit_cap)
      throw ModelViolation("message of " + std::to_string(bits) + " bits from node " +
                           std::to_string(from) + " exceeds cap " +
                           std::to_string(config_.message_bit_cap));
    if (!fits_widths(m, widths_))
      throw ModelViolation("label wider than the declared label field from node " + std::to_string(from));
    return bits;
  }

  void push_unicast(NodeId from, NodeId to, Message m) {
    if (from != current_sender_) throw ModelViolation("send outside own handler");
    if (!graph_->has_edge(from, to))
      throw ModelViolation("node " + std::to_string(from) + " sent to non-neighbor " + std::to_string(to));
    if (bcast_index_[from] != kNone || sent_token_[to] == token(from))
      throw ModelViolation("two messages on edge {" + std::to_string(from) + "," + std::to_string(to) +
                           "} in round " + std::to_string(round_));
    sent_token_[to] = token(from);
    const std::uint64_t bits = checked_bits(from, m);
    account(from, to, kind_of(m), bits, 1);
    pending_.push_back({from, to, static_cast<std::uint32_t>(messages_.size())});
    messages_.push_back(std::move(m));
  }

  void push_broadcast(NodeId from, Message m) {
    if (from != current_sender_) throw ModelViolation("send outside own handler");
    if (bcast_index_[from] != kNone || (!pending_.empty() && pending_.back().from == from))
      throw ModelViolation("node " + std::to_string(from) + " broadcast on top of other sends in round " +
                           std::to_string(round_));
    const std::uint64_t bits = checked_bits(from, m);
    account(from, std::nullopt, kind_of(m), bits, graph_->degree(from));
    bcast_index_[from] = static_cast<std::uint32_t>(messages_.size());
    broadcasters_.push_back(from);
    messages_.push_back(std::move(m));
  }

  void account(NodeId from, std::optional<NodeId> to, Kind kind, std::uint64_t bits, std::size_t fanout) {
    if (fanout == 0) return;
    max_message_bits_ = std::max(max_message_bits_, bits);
    messages_total_ += fanout;
    const auto k = static_cast<std::uint8_t>(kind);
    if (observer_) observer_(SendEvent{round_, from, to, k, bits, fanout});
    if (config_.retention != Retention::full) return;
    const auto b = static_cast<std::uint32_t>(bits);
    if (to) {
      transcript_.push_back({round_, from, *to, k, b});
    } else {
      for (NodeId u : graph_->neighbors(from)) transcript_.push_back({round_, from, u, k, b});
    }
  }

  void deliver() {
    const std::size_t n = graph_->size();
    std::fill(inbox_offsets_.begin(), inbox_offsets_.end(), 0);
    for (const auto& p : pending_) ++inbox_offsets_[p.to + 1];
    for (std::size_t i = 0; i < n; ++i) inbox_offsets_[i + 1] += inbox_offsets_[i];
    inbox_.resize(pending_.size());
    fill_.assign(inbox_offsets_.begin(), inbox_offsets_.end() - 1);
    // Stable in send order, and senders run in ascending order.
    for (const auto& p : pending_) inbox_[fill_[p.to]++] = {p.from, p.index};
  }

  struct Pending {
    NodeId from;
    NodeId to;
    std::uint32_t index;
  };

  const Graph* graph_;
  FieldWidths widths_;
  Config config_;
  std::vector<Rng> rngs_;

  std::uint64_t round_ = 0;
  NodeId current_sender_ = 0;
  std::vector<Message> messages_;
  std::vector<Pending> pending_;
  std::vector<std::uint32_t> bcast_index_;
  std::vector<NodeId> broadcasters_;
  std::vector<std::uint64_t> sent_token_;
  std::vector<std::size_t> inbox_offsets_;
  std::vector<std::size_t> fill_;
  std::vector<typename Inbox::Delivery> inbox_;

  std::vector<PhaseSpan> phases_;
  std::vector<TranscriptRecord> transcript_;
  std::function<void(const SendEvent&)> observer_;
  std::uint64_t max_message_bits_ = 0;
  std::uint64_t max_memory_bits_ = 0;
  std::uint64_t messages_total_ = 0;
};

/// Transcript export: one `round,sender,receiver,kind,bits` line per record.
inline void write_transcript(std::ostream& out, std::span<const TranscriptRecord> records) {
  for (const auto& r : records)
    out << r.round << ',' << r.sender << ',' << r.receiver << ',' << unsigned{r.kind} << ',' << r.bits
        << '\n';
}

/// Parses the export format; throws std::runtime_error with the line number on malformed input.
inline std::vector<TranscriptRecord> read_transcript(std::istream& in) {
  std::vector<TranscriptRecord> out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    unsigned long long f[5];
    int consumed = 0;
    if (std::sscanf(line.c_str(), "%llu,%llu,%llu,%llu,%llu%n", &f[0], &f[1], &f[2], &f[3], &f[4],
                    &consumed) != 5 ||
        static_cast<std::size_t>(consumed) != line.size() || f[3] >= kKindCount)
      throw std::runtime_error("transcript line " + std::to_string(lineno) + ": malformed record");
    out.push_back({f[0], static_cast<NodeId>(f[1]), static_cast<NodeId>(f[2]),
                   static_cast<std::uint8_t>(f[3]), static_cast<std::uint32_t>(f[4])});
  }
  return out;
}

struct MessageBitsAudit {
  std::uint64_t max_bits = 0;
  double ratio = 0.0;  // max_bits / ceil(log2 n)
};

inline MessageBitsAudit audit_message_bits(std::span<const TranscriptRecord> log, std::size_t n) {
  MessageBitsAudit a;
  for (const auto& r : log) a.max_bits = std::max<std::uint64_t>(a.max_bits, r.bits);
  a.ratio = static_cast<double>(a.max_bits) / log_budget(n);
  return a;
}

}  // namespace hamcycle
