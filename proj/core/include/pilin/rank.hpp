#pragma once

// Ranks: the least solution over the naturals extended with infinity of the
// equation system induced by a program.

#include <compare>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "pilin/process.hpp"

namespace pilin {

class RankValue {
 public:
  constexpr RankValue() = default;
  static constexpr RankValue finite(std::uint64_t n) { return RankValue(n); }
  static constexpr RankValue infinity() { return RankValue(kInf); }

  constexpr bool is_infinite() const { return v_ == kInf; }
  constexpr bool is_finite() const { return v_ != kInf; }
  /// Meaningless for infinity.
  constexpr std::uint64_t value() const { return v_; }

  friend constexpr auto operator<=>(RankValue, RankValue) = default;
  friend constexpr RankValue operator+(RankValue a, RankValue b) {
    if (a.is_infinite() || b.is_infinite() || a.v_ > kInf - 1 - b.v_) return infinity();
    return RankValue(a.v_ + b.v_);
  }

 private:
  static constexpr std::uint64_t kInf = ~std::uint64_t{0};
  constexpr explicit RankValue(std::uint64_t v) : v_(v) {}
  std::uint64_t v_ = 0;
};

/// "inf" or the decimal value.
std::string to_string(RankValue r);

enum class RankOp : std::uint8_t {
  Zero,        // link, fail, close
  Copy,        // prefixes; calls resolve to the callee body
  Max,         // case
  Sum,         // cut, send
  OnePlusMin,  // choice
};

struct RankEquation {
  RankOp op = RankOp::Zero;
  std::vector<std::size_t> args;
  Process representative;  // first subterm mapped to this variable
};

/// One variable per structurally distinct subterm with channel names erased.
/// Variables are numbered in pre-order from the definitions, in program order.
struct RankSystem {
  std::vector<RankEquation> equations;
  std::map<std::string, std::size_t> definition_vars;  // definition -> body variable

  std::size_t size() const { return equations.size(); }
  /// One application of the equations to `values`.
  std::vector<RankValue> apply(const std::vector<RankValue>& values) const;
};

std::string to_string(const RankSystem& system);

/// Throws UnknownDefinition for calls to missing definitions.
RankSystem rank_equations(const Program& prog);

struct RankTable {
  RankSystem system;
  std::vector<RankValue> values;

  /// Rank of a call to the definition. Throws UnknownDefinition.
  RankValue of_definition(const std::string& name) const;
};

/// Exact least solution.
RankTable solve_rank(RankSystem system);

RankTable compute_ranks(const Program& prog);

/// Composes the rank of `p` from the table. Throws UnknownSubterm when `p`
/// calls a definition the table does not know.
RankValue rank_of(const RankTable& table, const Process& p);

}  // namespace pilin
