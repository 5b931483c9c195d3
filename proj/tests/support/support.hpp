#pragma once

// Independent oracles and random generators shared by the unit tests, the
// acceptance suite and nothing else.

#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "pilin/formula.hpp"
#include "pilin/process.hpp"
#include "pilin/rank.hpp"
#include "pilin/runtime.hpp"

namespace pilin::testing {

using Rng = std::mt19937_64;

std::string corpus_path(const std::string& stem);
Program load_corpus(const std::string& stem);

/// Well-typed corpus programs, by file stem.
const std::vector<std::string>& well_typed_corpus();
const std::vector<std::string>& all_corpus();

// ---------------------------------------------------------------------------
// Rank oracle

/// Plain Kleene iteration from zero for `rounds` rounds. A variable still
/// growing in the second half of the rounds is reported infinite.
std::vector<RankValue> kleene_ranks(const RankSystem& system, std::size_t rounds = 4000);

/// Random equation system with `vars` variables.
RankSystem random_rank_system(Rng& rng, std::size_t vars);

// ---------------------------------------------------------------------------
// Formulas

/// Closed formula of depth at most `depth`.
Formula random_formula(Rng& rng, int depth);

/// Every formula reachable by steps from f, f included.
std::vector<Formula> formula_closure_brute(const Formula& f);

// ---------------------------------------------------------------------------
// Programs

struct GeneratedProgram {
  Program program;
  std::string text;
};

/// Type-directed random program: up to `max_defs` definitions whose bodies
/// follow the declared parameter formulas, main being the first one. The
/// result is quasi-typed by construction when generation succeeds.
std::optional<GeneratedProgram> random_program(Rng& rng, std::size_t max_defs = 3, int formula_depth = 4);

// ---------------------------------------------------------------------------
// Cut trees

struct CutTree {
  std::vector<Process> leaves;                     // one per member
  std::vector<std::pair<std::size_t, std::size_t>> edges;  // leaves joined by channel i
  std::vector<Name> channels;
  std::vector<Formula> annotations;                // type of channel i at edges[i].first
  Parameter external;
};

CutTree random_cut_tree(Rng& rng, std::size_t leaves);

/// Every arrangement of the tree's cuts, up to `limit` of them.
std::vector<Process> arrangements(const CutTree& tree, std::size_t limit);

}  // namespace pilin::testing
