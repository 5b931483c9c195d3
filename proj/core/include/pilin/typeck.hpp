#pragma once

// Circular quasi-typing derivations.
//
// Each definition body is checked once, from an entry node whose context
// gives every parameter its declared formula at a fresh atomic address. A
// call does not get a node of its own: the premise edge that reaches it
// points straight at the callee's entry node and records how the callee's
// parameter slots map onto the caller's context.

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "pilin/formula.hpp"
#include "pilin/process.hpp"

namespace pilin {

enum class Rule : std::uint8_t { Ax, Cut, Top, Bot, One, Par, Tensor, With, Plus, Nu, Mu, Choice };

std::string_view to_string(Rule rule);

struct Slot {
  Name name;
  Type type;
};

/// Sorted by name.
using Context = std::vector<Slot>;

std::string to_string(const Context& ctx);

struct Ancestor {
  static constexpr int kNone = -1;
  int slot = kNone;         // conclusion slot, or kNone for a fresh channel
  bool progressed = false;  // the type took a step across the rule
};

struct ProofEdge {
  std::size_t id = 0;
  std::size_t from = 0;
  std::size_t to = 0;
  std::size_t premise = 0;           // position among the premises of `from`
  std::vector<Ancestor> ancestry;    // indexed by the slots of `to`
  bool call = false;
  std::string callee;                // for call edges
  Context call_context;              // context at the call site
  Process call_term;                 // the call as written at the call site
};

struct ProofNode {
  std::size_t id = 0;
  Process process;
  Context context;
  Rule rule = Rule::Ax;
  std::vector<std::size_t> premises;  // edge ids
  std::string definition;             // definition whose body contains the node
  bool entry = false;
};

struct ProofGraph {
  std::vector<ProofNode> nodes;
  std::vector<ProofEdge> edges;
  std::size_t root = 0;
  std::map<std::string, std::size_t> entries;  // definition -> entry node
  Closure closure;

  /// Nodes reachable from the root, in ascending id order.
  std::vector<std::size_t> reachable() const;
};

class IllTyped : public Error {
 public:
  IllTyped(std::string definition, SourceLoc loc, std::string rule, const std::string& message)
      : Error(message), definition_(std::move(definition)), loc_(loc), rule_(std::move(rule)) {}
  const std::string& definition() const { return definition_; }
  SourceLoc loc() const { return loc_; }
  const std::string& rule() const { return rule_; }

 private:
  std::string definition_;
  SourceLoc loc_;
  std::string rule_;
};

class UnproductiveCycle : public Error {
 public:
  using Error::Error;
};

class AddressClash : public Error {
 public:
  using Error::Error;
};

/// Quasi-typing derivation rooted at main with main's declared parameters.
/// Every definition is checked. Throws IllTyped, UnproductiveCycle,
/// AddressClash, UnknownDefinition, ArityMismatch.
ProofGraph check_program(const Program& prog);

/// Derivation for an arbitrary term whose free names are typed by `outer`.
ProofGraph check_term(const Program& prog, const Process& term, const std::vector<Parameter>& outer);

/// Empty when main exists and takes exactly one parameter of type 1.
std::optional<std::string> check_main_signature(const Program& prog);

/// Rule tree of the root, then one section per definition. Call edges are
/// shown as back-edges and not expanded.
std::string derivation_report(const ProofGraph& g);

}  // namespace pilin
