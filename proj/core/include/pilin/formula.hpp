#pragma once

// Formulas of linear logic with least and greatest fixed points, addresses,
// types (formula + address) and the closure/priority machinery used by the
// validity checker.
//
// Formulas are immutable and locally nameless: variables bound by mu/nu are
// de Bruijn indices, free variables keep their names. Equality is therefore
// alpha-equivalence. Binder names are kept only as printing hints.

#include <cstddef>
#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "pilin/error.hpp"

namespace pilin {

enum class FormulaKind : std::uint8_t {
  Zero,
  Top,
  One,
  Bot,
  Plus,
  With,
  Tensor,
  Par,
  Mu,
  Nu,
  BoundVar,
  FreeVar,
};

class Formula {
 public:
  Formula() = default;

  static Formula zero();
  static Formula top();
  static Formula one();
  static Formula bot();
  static Formula binary(FormulaKind kind, const Formula& left, const Formula& right);
  static Formula plus(const Formula& l, const Formula& r) { return binary(FormulaKind::Plus, l, r); }
  static Formula with(const Formula& l, const Formula& r) { return binary(FormulaKind::With, l, r); }
  static Formula tensor(const Formula& l, const Formula& r) { return binary(FormulaKind::Tensor, l, r); }
  static Formula par(const Formula& l, const Formula& r) { return binary(FormulaKind::Par, l, r); }
  /// Binds every free occurrence of `var` in `body`.
  static Formula mu(std::string_view var, const Formula& body);
  static Formula nu(std::string_view var, const Formula& body);
  static Formula fixpoint(FormulaKind kind, std::string_view var, const Formula& body);
  /// Fixed point whose body already refers to its binder as bound index 0.
  static Formula binder(FormulaKind kind, std::string_view hint, const Formula& body);
  static Formula var(std::string_view name);
  static Formula bound(std::uint32_t index);

  explicit operator bool() const { return node_ != nullptr; }

  FormulaKind kind() const;
  const Formula& left() const;
  const Formula& right() const;
  /// Body of a fixed point, with the binder as bound index 0.
  const Formula& body() const;
  /// Binder hint for mu/nu, name for free variables.
  const std::string& name() const;
  std::uint32_t index() const;

  std::size_t hash() const;
  std::size_t size() const;

  bool is_binary() const;
  bool is_fixpoint() const;
  bool is_constant() const;
  /// Positive formulas describe outputs: 0, 1, plus, tensor, mu.
  bool is_positive() const;
  /// No free variables and no dangling bound indices.
  bool is_closed() const;

  friend bool operator==(const Formula& x, const Formula& y);
  friend bool operator!=(const Formula& x, const Formula& y) { return !(x == y); }

 private:
  struct Node;

  static Node node_of(FormulaKind kind);
  static Formula make(Node node);

  std::shared_ptr<const Node> node_;
};

struct Formula::Node {
  FormulaKind kind{};
  std::string name;
  std::uint32_t index = 0;
  Formula a;
  Formula b;
  std::size_t hash = 0;
  std::size_t size = 1;
  std::uint32_t loose = 0;  // one past the largest dangling bound index
  bool has_free = false;
};

inline FormulaKind Formula::kind() const { return node_->kind; }
inline const Formula& Formula::left() const { return node_->a; }
inline const Formula& Formula::right() const { return node_->b; }
inline const Formula& Formula::body() const { return node_->a; }
inline const std::string& Formula::name() const { return node_->name; }
inline std::uint32_t Formula::index() const { return node_->index; }
inline std::size_t Formula::hash() const { return node_->hash; }
inline std::size_t Formula::size() const { return node_->size; }
inline bool Formula::is_closed() const { return !node_->has_free && node_->loose == 0; }

struct FormulaHash {
  std::size_t operator()(const Formula& f) const { return f.hash(); }
};

/// Structural dual; variables are self-dual.
Formula dual(const Formula& f);

/// Capture-avoiding substitution of `replacement` for the free variable `var`.
Formula subst_formula(const Formula& body, std::string_view var, const Formula& replacement);

/// sigma X. B  ->  B[sigma X. B / X]. Requires a fixed point.
Formula unfold(const Formula& fixpoint);

/// Immediate formula steps: binary -> both children, fixed point -> unfolding.
std::vector<Formula> formula_steps(const Formula& f);

/// f is a subterm of g, up to alpha-equivalence.
bool subformula_leq(const Formula& f, const Formula& g);

/// The unique subformula-least element of the set, if it exists.
std::optional<Formula> min_formula(std::span<const Formula> formulas);

/// Textual form in the concrete formula grammar (ASCII).
std::string to_string(const Formula& f);

// ---------------------------------------------------------------------------
// Addresses and types

struct Address {
  std::uint32_t base = 0;
  bool dualized = false;
  std::string word;  // over {i, l, r}

  Address dual() const { return Address{base, !dualized, word}; }
  Address extended(char step) const { return Address{base, dualized, word + step}; }
  /// Prefix order on addresses sharing the same atomic base.
  bool prefix_of(const Address& other) const;
  bool disjoint(const Address& other) const { return !prefix_of(other) && !other.prefix_of(*this); }

  friend bool operator==(const Address&, const Address&) = default;
};

std::string to_string(const Address& a);

struct Type {
  Formula formula;
  Address address;

  friend bool operator==(const Type&, const Type&) = default;
};

Type dual(const Type& t);
std::string to_string(const Type& t);

/// Non-reflexive successors of t under the type step relation. Left/right
/// children append l/r to the address, unfolding appends i.
std::vector<Type> type_steps(const Type& t);

/// (l op r)_a from l_{al} and r_{ar}; nullopt when the addresses do not fit.
std::optional<Type> compose_types(FormulaKind op, const Type& l, const Type& r);

/// (sigma X. B)_a from its unfolding at address ai; nullopt if it does not fit.
std::optional<Type> fold_type(const Formula& fixpoint, const Type& unfolded);

// ---------------------------------------------------------------------------
// Closure and parity priorities

class Closure {
 public:
  Closure() = default;

  std::span<const Formula> formulas() const { return formulas_; }
  std::size_t size() const { return formulas_.size(); }
  bool contains(const Formula& f) const { return index_.contains(f); }
  std::optional<std::size_t> index_of(const Formula& f) const;

  /// Fixed points get 2*rank + (0 for nu, 1 for mu) where rank orders the
  /// fixed points by size then printed form; everything else gets the
  /// neutral odd priority 2*size()+1. Throws FormulaNotInClosure.
  unsigned priority(const Formula& f) const;
  unsigned neutral_priority() const { return static_cast<unsigned>(2 * formulas_.size() + 1); }

 private:
  friend Closure closure_of(std::span<const Formula> seed);

  std::vector<Formula> formulas_;
  std::unordered_map<Formula, std::size_t, FormulaHash> index_;
  std::vector<unsigned> priorities_;
};

/// Least step-closed superset of the seed.
Closure closure_of(std::span<const Formula> seed);

}  // namespace pilin
