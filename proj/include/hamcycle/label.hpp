#pragma once

#include <compare>
#include <cstdint>
#include <stdexcept>
#include <string>

#include <boost/multiprecision/cpp_int.hpp>

#include "hamcycle/graph.hpp"

namespace hamcycle {

/// Non-negative arbitrary-precision node number. Numbers ascend strictly
/// along the cycle starting with 0 at v0.
class Label {
 public:
  using Int = boost::multiprecision::cpp_int;

  Label() = default;
  explicit Label(std::uint64_t v) : v_(v) {}
  explicit Label(Int v) : v_(std::move(v)) {
    if (v_ < 0) throw std::invalid_argument("Label: negative value");
  }

  static Label pow2(unsigned exponent) {
    Int v = 1;
    v <<= exponent;
    return Label(std::move(v));
  }

  static Label parse(const std::string& decimal) { return Label(Int(decimal)); }

  const Int& value() const noexcept { return v_; }

  /// Number of significant bits; 0 for the label 0.
  unsigned bit_length() const {
    return v_ == 0 ? 0u : static_cast<unsigned>(boost::multiprecision::msb(v_)) + 1;
  }

  std::string to_string() const { return v_.str(); }

  friend bool operator==(const Label& a, const Label& b) { return a.v_ == b.v_; }
  friend std::strong_ordering operator<=>(const Label& a, const Label& b) {
    int c = a.v_.compare(b.v_);
    return c < 0 ? std::strong_ordering::less
                 : (c > 0 ? std::strong_ordering::greater : std::strong_ordering::equal);
  }

  friend Label operator+(const Label& a, const Label& b) { return Label(Int(a.v_ + b.v_)); }
  friend Label operator-(const Label& a, const Label& b) {
    if (a.v_ < b.v_) throw std::domain_error("Label: subtraction below zero");
    return Label(Int(a.v_ - b.v_));
  }
  friend Label operator*(std::uint64_t k, const Label& a) { return Label(Int(a.v_ * k)); }

 private:
  Int v_ = 0;
};

/// Raised when two consecutive numbers are too close to fit a new one between them.
class GapExhausted : public std::runtime_error {
 public:
  GapExhausted(const Label& f, const Label& l)
      : std::runtime_error("label gap exhausted between " + f.to_string() + " and " + l.to_string()),
        low(f),
        high(l) {}
  Label low, high;
};

/// ceil((f+l)/2); requires l - f >= 2 so the result is strictly inside (f, l).
inline Label midpoint_label(const Label& f, const Label& l) {
  if (l < f || (l - f) < Label(2)) throw GapExhausted(f, l);
  Label::Int sum = f.value() + l.value();
  return Label(Label::Int((sum + 1) >> 1));
}

/// Number for a node inserted between the highest-numbered node (number y)
/// and v0: the midpoint against the fixed virtual bound past the top.
inline Label wrap_label(const Label& y, const Label& upper_bound) {
  return midpoint_label(y, upper_bound);
}

/// f + l - x for f <= x <= l. Reverses the order of every number in [f, l].
inline Label reflect_label(const Label& x, const Label& f, const Label& l) {
  if (x < f || l < x) throw std::out_of_range("reflect_label: x outside [f, l]");
  return Label(Label::Int(f.value() + l.value() - x.value()));
}

/// Initial spacing and top bound for one network size. Phases 0 and 1
/// number the k-th cycle node k*S; U = (beta_max + 1) * S bounds every
/// number ever handed out.
struct LabelScheme {
  unsigned spacing_log2 = 0;
  std::uint64_t beta_max = 0;

  static constexpr unsigned kDefaultSpacingFactor = 8;

  static LabelScheme for_network(std::size_t n, unsigned spacing_factor = kDefaultSpacingFactor) {
    const unsigned lg = log_budget(n);
    return LabelScheme{spacing_factor * lg, 4ull * lg};
  }

  Label spacing() const { return Label::pow2(spacing_log2); }
  Label initial(std::uint64_t k) const { return k * spacing(); }
  Label upper_bound() const { return (beta_max + 1) * spacing(); }

  /// Fixed width of a label field on the wire and in node memory.
  unsigned field_bits() const { return upper_bound().bit_length(); }
};

}  // namespace hamcycle
