#pragma once

// Validity of quasi-typing derivations: every fair infinite branch must carry
// a non-stationary nu-thread.
//
// Three automata read infinite branches as words over premise-edge ids:
//   M  accepts every infinite branch of the graph,
//   U  accepts the unfair ones (finitely-ranked choices visited infinitely often),
//   N  (min-parity) accepts the branches that carry a valid thread.
// check_validity decides L(M) \ L(U) within L(N) by a Ramsey-style closure of
// path summaries and returns a lasso when the inclusion fails.

#include <cstdint>
#include <string>
#include <vector>

#include "pilin/rank.hpp"
#include "pilin/typeck.hpp"

namespace pilin {

struct Transition {
  std::size_t from = 0;
  std::size_t to = 0;
  std::size_t letter = 0;  // proof edge id
  unsigned priority = 0;   // parity automata only
};

struct BuchiAutomaton {
  std::vector<std::string> labels;  // one per state
  std::vector<std::size_t> node;    // proof node of each state
  std::vector<Transition> transitions;
  std::vector<std::size_t> initial;
  std::vector<bool> accepting;

  std::size_t size() const { return labels.size(); }
};

/// States are Wait(node), before a thread is picked, and Track(node, slot).
struct ParityAutomaton {
  struct State {
    std::size_t node = 0;
    int slot = -1;  // -1 for Wait
  };
  std::vector<State> states;
  std::vector<std::string> labels;
  std::vector<Transition> transitions;
  std::vector<std::size_t> initial;
  unsigned max_priority = 0;

  std::size_t size() const { return states.size(); }
};

BuchiAutomaton build_M(const ProofGraph& g);
BuchiAutomaton build_U(const ProofGraph& g, const RankTable& ranks);
ParityAutomaton build_N(const ProofGraph& g);

/// Denotes prefix . cycle^omega, both as edge ids.
struct Lasso {
  std::vector<std::size_t> prefix;
  std::vector<std::size_t> cycle;
};

struct Verdict {
  bool well_typed = true;
  bool bounded = false;  // oracle verdicts
  std::size_t bound = 0;
  Lasso lasso;           // set when !well_typed
  std::string explanation;
};

struct ValidityOptions {
  std::size_t max_summaries = 2'000'000;
};

/// Throws ResourceLimit when the summary budget is exceeded.
Verdict check_validity(const ProofGraph& g, const RankTable& ranks, const ValidityOptions& options = {});

/// Enumerates cycles of length at most `bound` from nodes reachable within
/// `bound` steps and checks their threads directly.
Verdict oracle_check(const ProofGraph& g, const RankTable& ranks, std::size_t bound);

/// The lasso is a path from the root whose cycle returns to its start.
bool lasso_replays(const ProofGraph& g, const Lasso& lasso);

/// No choice node of finite rank on the cycle.
bool cycle_is_fair(const ProofGraph& g, const RankTable& ranks, const std::vector<std::size_t>& cycle);

/// Some thread over the repeated cycle is a non-stationary nu-thread. Copies
/// of the cycle are unrolled up to the number of slots at its start node.
bool cycle_has_valid_thread(const ProofGraph& g, const std::vector<std::size_t>& cycle);

std::string to_string(const Lasso& lasso, const ProofGraph& g);

/// HOA v1 renderings. Letters are binary-encoded over atomic propositions.
std::string to_hoa(const BuchiAutomaton& a, const std::string& name, std::size_t letters);
std::string to_hoa(const ParityAutomaton& a, const std::string& name, std::size_t letters);

}  // namespace pilin
