#include <doctest.h>

#include "pilin/parser.hpp"
#include "pilin/rank.hpp"
#include "support.hpp"

using namespace pilin;

namespace {

const RankValue kInf = RankValue::infinity();
RankValue fin(std::uint64_t n) { return RankValue::finite(n); }

RankValue def_rank(const std::string& stem, const std::string& def) {
  return compute_ranks(testing::load_corpus(stem)).of_definition(def);
}

RankEquation eq(RankOp op, std::vector<std::size_t> args = {}) {
  RankEquation e;
  e.op = op;
  e.args = std::move(args);
  return e;
}

}  // namespace

TEST_SUITE("rank") {
  TEST_CASE("saturating arithmetic") {
    CHECK(fin(2) + fin(3) == fin(5));
    CHECK(fin(2) + kInf == kInf);
    CHECK(kInf + fin(0) == kInf);
    CHECK(fin(1'000'000) < kInf);
    CHECK(to_string(kInf) == "inf");
    CHECK(to_string(fin(4)) == "4");
  }

  TEST_CASE("the five-equation buyer system") {
    RankSystem sys;
    sys.equations = {eq(RankOp::Copy, {1}), eq(RankOp::OnePlusMin, {2, 3}), eq(RankOp::Copy, {0}),
                     eq(RankOp::Copy, {4}), eq(RankOp::Zero)};
    RankTable t = solve_rank(sys);
    CHECK(t.values == std::vector<RankValue>{fin(1), fin(1), fin(1), fin(0), fin(0)});
  }

  TEST_CASE("definition ranks") {
    CHECK(def_rank("buyer_seller", "Buyer") == fin(1));
    CHECK(def_rank("buyer_seller", "Seller") == fin(0));
    CHECK(def_rank("omega", "Omega") == kInf);
    CHECK(def_rank("work_gather", "Work") == fin(1));
    CHECK(def_rank("slot_machine", "Machine") == kInf);
    CHECK(def_rank("player_machine", "Player") == fin(1));
    CHECK(def_rank("forwarder", "Fwd") == fin(0));
    CHECK(def_rank("compulsive_buyer", "CBuyer") == fin(0));
    CHECK(def_rank("context_free_tree", "Sender") == fin(1));
  }

  TEST_CASE("subterm ranks follow the equation shapes") {
    Program prog = testing::load_corpus("buyer_seller");
    RankTable t = compute_ranks(prog);
    Process choice = parse_process("x.in1. Buyer(x) (+) x.in2. close x");
    CHECK(rank_of(t, choice) == fin(1));
    CHECK(rank_of(t, choice.left()) == fin(1));
    CHECK(rank_of(t, choice.right()) == fin(0));
    Process cut = parse_process("new (x: mu X. X + 1) (Buyer(x) | Buyer(x))");
    CHECK(rank_of(t, cut) == fin(2));
    Process branch = parse_process("case x { a: Buyer(x); b: close x }");
    CHECK(rank_of(t, branch) == fin(1));
    CHECK(rank_of(t, parse_process("Seller(q, r)")) == fin(0));
  }

  TEST_CASE("structurally equal subterms share a variable") {
    Program a = parse_program("def main(y: 1) = wait q. close y (+) wait r. close y").program;
    RankSystem sys = rank_equations(a);
    Program b = parse_program("def main(y: 1) = wait q. close y (+) wait q. close y").program;
    CHECK(rank_equations(b).size() == sys.size());
  }

  TEST_CASE("the solution is a fixed point and agrees with Kleene iteration") {
    for (const std::string& stem : testing::all_corpus()) {
      CAPTURE(stem);
      RankTable t = compute_ranks(testing::load_corpus(stem));
      CHECK(t.system.apply(t.values) == t.values);
      CHECK(testing::kleene_ranks(t.system) == t.values);
    }
    testing::Rng rng(99);
    for (int i = 0; i < 2000; ++i) {
      RankSystem sys = testing::random_rank_system(rng, 1 + i % 12);
      RankTable t = solve_rank(sys);
      CHECK(t.system.apply(t.values) == t.values);
      CHECK(testing::kleene_ranks(sys) == t.values);
    }
  }
}
