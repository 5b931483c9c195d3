// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any failure.

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <functional>
#include <optional>
#include <iostream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "pilin/parser.hpp"
#include "pilin/rank.hpp"
#include "pilin/runtime.hpp"
#include "pilin/typeck.hpp"
#include "pilin/validity.hpp"
#include "support.hpp"

using namespace pilin;
namespace pt = pilin::testing;

namespace {

using Clock = std::chrono::steady_clock;

struct Result {
  bool ok = true;
  std::string detail;
};

// Collects the first few failure messages of a criterion.
class Failures {
 public:
  void add(const std::string& msg) {
    ++count_;
    if (first_.size() < 3) first_.push_back(msg);
  }
  bool empty() const { return count_ == 0; }
  std::string summary() const {
    std::string out = std::to_string(count_) + " failure(s)";
    for (const std::string& m : first_) out += "; " + m;
    return out;
  }

 private:
  std::size_t count_ = 0;
  std::vector<std::string> first_;
};

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

Result finish(const Failures& f, const std::string& ok_detail) {
  if (!f.empty()) return {false, f.summary()};
  return {true, ok_detail};
}

std::string fmt_seconds(double s) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2fs", s);
  return buf;
}

// ---------------------------------------------------------------------------

Result ranks_criterion() {
  const auto start = Clock::now();
  Failures f;
  struct Expect {
    const char* stem;
    const char* def;
    RankValue value;
  };
  const RankValue inf = RankValue::infinity();
  const Expect expected[] = {
      {"buyer_seller", "Buyer", RankValue::finite(1)},  {"buyer_seller", "Seller", RankValue::finite(0)},
      {"omega", "Omega", inf},                          {"work_gather", "Work", RankValue::finite(1)},
      {"slot_machine", "Machine", inf},                 {"player_machine", "Player", RankValue::finite(1)},
      {"forwarder", "Fwd", RankValue::finite(0)},
  };
  for (const Expect& e : expected) {
    RankValue got = compute_ranks(pt::load_corpus(e.stem)).of_definition(e.def);
    if (got != e.value) {
      f.add(std::string(e.def) + " has rank " + to_string(got) + ", expected " + to_string(e.value));
    }
  }

  // Buyer alone: five equations shaped (x2, 1 + min(x3, x4), x1, x5, 0).
  Program buyer;
  buyer.add(*pt::load_corpus("buyer_seller").find("Buyer"));
  RankTable t = compute_ranks(buyer);
  const std::string shape = "r1 = r2\nr2 = 1 + min(r3, r4)\nr3 = r1\nr4 = r5\nr5 = 0\n";
  if (to_string(t.system) != shape) f.add("Buyer system is\n" + to_string(t.system));
  const std::vector<RankValue> least{RankValue::finite(1), RankValue::finite(1), RankValue::finite(1),
                                     RankValue::finite(0), RankValue::finite(0)};
  if (t.values != least) f.add("Buyer system does not solve to (1,1,1,0,0)");

  const double s = seconds_since(start);
  if (s >= 1.0) f.add("took " + fmt_seconds(s));
  return finish(f, "reference ranks and Buyer least solution (1,1,1,0,0) in " + fmt_seconds(s));
}

Result verdicts_criterion() {
  const auto start = Clock::now();
  Failures f;
  for (const std::string& stem : pt::all_corpus()) {
    Program prog = pt::load_corpus(stem);
    ProofGraph g = check_program(prog);
    RankTable r = compute_ranks(prog);
    Verdict v = check_validity(g, r);
    const bool expect = stem != "omega" && stem != "compulsive_buyer";
    if (v.well_typed != expect) {
      f.add(stem + (expect ? " rejected" : " accepted"));
      continue;
    }
    if (v.well_typed) continue;
    if (!lasso_replays(g, v.lasso)) f.add(stem + ": lasso does not replay");
    if (!cycle_is_fair(g, r, v.lasso.cycle)) f.add(stem + ": lasso cycle is unfair");
    if (cycle_has_valid_thread(g, v.lasso.cycle)) f.add(stem + ": lasso cycle has a valid thread");
    if (stem == "compulsive_buyer") {
      const Formula least = parse_formula("mu X. X + 1");
      bool found = false;
      for (std::size_t e : v.lasso.cycle) {
        const ProofNode& n = g.nodes[g.edges[e].from];
        if (n.rule != Rule::Mu) continue;
        for (const Slot& slot : n.context) found = found || slot.type.formula == least;
      }
      if (!found) f.add("compulsive buyer lasso avoids the least fixed point unfolding");
    }
  }
  const double s = seconds_since(start);
  if (s >= 10.0) f.add("took " + fmt_seconds(s));
  return finish(f, "corpus verdicts and lassos as expected in " + fmt_seconds(s));
}

Result oracle_criterion() {
  Failures f;
  auto compare = [&](const Program& prog, const std::string& label) {
    ProofGraph g = check_program(prog);
    RankTable r = compute_ranks(prog);
    Verdict v = check_validity(g, r);
    std::size_t bound = 10;
    if (!v.well_typed) bound = std::max({bound, v.lasso.prefix.size(), v.lasso.cycle.size()});
    Verdict o = oracle_check(g, r, bound);
    if (o.well_typed != v.well_typed) {
      f.add(label + ": checker says " + (v.well_typed ? "valid" : "invalid") + ", oracle disagrees");
    }
  };
  for (const std::string& stem : pt::all_corpus()) compare(pt::load_corpus(stem), stem);
  pt::Rng rng(7);
  std::size_t programs = 0;
  for (int attempt = 0; attempt < 5000 && programs < 300; ++attempt) {
    auto gp = pt::random_program(rng);
    if (!gp) continue;
    ++programs;
    compare(gp->program, gp->text);
  }
  if (programs < 200) f.add("only " + std::to_string(programs) + " random programs generated");
  return finish(f, "oracle agrees on " + std::to_string(pt::all_corpus().size()) + " corpus and " +
                       std::to_string(programs) + " random programs");
}

bool ends_with_close(const Soup& s) {
  return s.members.size() == 1 && s.channels.empty() && s.members[0].process.kind() == ProcessKind::Close &&
         s.members[0].process.x() == s.external;
}

Result termination_criterion() {
  const auto start = Clock::now();
  Failures f;
  std::size_t runs = 0;
  for (const std::string& stem : pt::well_typed_corpus()) {
    Program prog = pt::load_corpus(stem);
    RankTable r = compute_ranks(prog);
    std::vector<std::pair<std::string, Policy>> policies{{"minrank", Policy::min_rank()}};
    for (std::uint64_t seed = 0; seed < 100; ++seed) {
      policies.emplace_back("seed " + std::to_string(seed), Policy::random(seed, 16));
    }
    for (const auto& [label, policy] : policies) {
      Trace t = run(prog, r, policy, 10'000);
      ++runs;
      if (t.outcome != Outcome::Terminated || !ends_with_close(t.final)) {
        f.add(stem + " " + label + ": " + std::string(to_string(t.outcome)));
      }
    }
  }
  const double s = seconds_since(start);
  if (s >= 30.0) f.add("took " + fmt_seconds(s));
  return finish(f, std::to_string(runs) + " runs terminated with close on the external channel in " +
                       fmt_seconds(s));
}

Result reduction_criterion() {
  Failures f;
  std::size_t checks = 0;
  for (const std::string& stem : pt::well_typed_corpus()) {
    Program prog = pt::load_corpus(stem);
    RankTable r = compute_ranks(prog);
    auto recheck = [&](const Soup& s, const std::string& where) {
      ++checks;
      try {
        check_term(prog, refold(s), {Parameter{s.external, s.external_type, {}}});
      } catch (const Error& e) {
        f.add(stem + " " + where + ": " + e.what());
      }
    };
    recheck(initial_soup(prog), "initial");
    std::size_t step = 0;
    run(prog, r, Policy::min_rank(), 10'000,
        [&](const Soup& s, const TraceEntry&) { recheck(s, "minrank step " + std::to_string(++step)); });
    for (std::uint64_t seed = 0; seed < 100; ++seed) {
      step = 0;
      run(prog, r, Policy::random(seed, 16), 10'000, [&](const Soup& s, const TraceEntry&) {
        if (++step % 5 == 0) recheck(s, "seed " + std::to_string(seed) + " step " + std::to_string(step));
      });
    }
  }
  return finish(f, std::to_string(checks) + " reducts re-checked");
}

// Every schedule of redexes and choice sides up to `depth`, each finished by MinRank.
class ScheduleExplorer {
 public:
  ScheduleExplorer(const Program& prog, const RankTable& ranks, Failures& f, std::string label)
      : prog_(prog), ranks_(ranks), f_(f), label_(std::move(label)) {}

  std::size_t explore(const Soup& start, std::size_t depth) {
    visit(start, depth, "");
    return schedules_;
  }

  // Whether some schedule was cut off by the depth limit.
  bool truncated() const { return truncated_; }

 private:
  void visit(const Soup& soup, std::size_t depth, const std::string& path) {
    const std::vector<Redex> redexes = enumerate_redexes(soup);
    if (depth == 0 || redexes.empty()) {
      ++schedules_;
      truncated_ = truncated_ || !redexes.empty();
      Trace t = run_soup(prog_, soup, ranks_, Policy::min_rank(), 10'000);
      if (t.outcome != Outcome::Terminated || !ends_with_close(t.final)) {
        f_.add(label_ + " schedule [" + path + "]: " + std::string(to_string(t.outcome)));
      }
      return;
    }
    for (std::size_t i = 0; i < redexes.size(); ++i) {
      const Redex& r = redexes[i];
      std::vector<std::optional<Side>> sides{std::nullopt};
      if (r.kind == RedexKind::Choice) sides = {Side::Left, Side::Right};
      for (const auto& side : sides) {
        Soup next = soup;
        Chooser chooser(side ? Policy::scripted({*side}) : Policy::min_rank(), ranks_);
        TraceEntry e = step_at(prog_, next, r, chooser);
        std::string tag = path + (path.empty() ? "" : " ") + e.rule + ":" + e.subject;
        if (side) tag += *side == Side::Left ? "/L" : "/R";
        visit(next, depth - 1, tag);
      }
    }
  }

  const Program& prog_;
  const RankTable& ranks_;
  Failures& f_;
  std::string label_;
  std::size_t schedules_ = 0;
  bool truncated_ = false;
};

Program buyer_forwarder_seller() {
  Program bs = pt::load_corpus("buyer_seller");
  Program fw = pt::load_corpus("forwarder");
  Program prog;
  prog.add(*bs.find("Buyer"));
  prog.add(*fw.find("Fwd"));
  prog.add(*fw.find("Seller"));
  const Formula item = parse_formula("mu X. X + 1");
  Process inner = Process::cut("y", item, Process::call("Fwd", {"x", "y"}), Process::call("Seller", {"y", "z"}));
  Process body = Process::cut("x", item, Process::call("Buyer", {"x"}), inner);
  prog.add(Definition{"main", {Parameter{"z", Formula::one(), {}}}, body, {}});
  prog.set_main("main");
  return prog;
}

Result adversarial_criterion() {
  Failures f;
  std::vector<std::pair<std::string, Program>> programs{
      {"forwarder", pt::load_corpus("forwarder")},
      {"buyer|fwd|seller", buyer_forwarder_seller()},
      {"context_free_tree", pt::load_corpus("context_free_tree")},
  };
  std::string detail;
  for (auto& [label, prog] : programs) {
    if (!check_validity(check_program(prog), compute_ranks(prog)).well_typed) {
      f.add(label + " is not well typed");
      continue;
    }
    RankTable r = compute_ranks(prog);
    // Every order to depth 6 at least, then deeper until 50 schedules or the
    // exploration covers whole runs.
    std::size_t n = 0;
    std::size_t depth = 6;
    bool complete = false;
    for (;; depth += 2) {
      ScheduleExplorer ex(prog, r, f, label);
      n = ex.explore(initial_soup(prog), depth);
      complete = !ex.truncated();
      if (n >= 50 || complete || depth >= 20) break;
    }
    if (n < 50 && !complete) f.add(label + ": only " + std::to_string(n) + " schedules");
    detail += (detail.empty() ? "" : ", ") + label + " " + std::to_string(n) + " to depth " +
              std::to_string(depth) + (complete ? " (all runs)" : "");
  }
  return finish(f, "all schedules terminate (" + detail + ")");
}

Result canonicity_criterion() {
  Failures f;
  pt::Rng rng(31);
  Program prog = parse_program("def main(out: 1) = close out").program;
  std::size_t arrangements = 0;
  for (int i = 0; i < 1000; ++i) {
    const std::size_t leaves = 2 + static_cast<std::size_t>(i % 6);
    pt::CutTree tree = pt::random_cut_tree(rng, leaves);
    std::vector<Process> forms = pt::arrangements(tree, 16);
    if (forms.empty()) {
      f.add("tree " + std::to_string(i) + " has no arrangement");
      continue;
    }
    const Soup first = to_soup(prog, forms[0], tree.external);
    for (const Process& p : forms) {
      ++arrangements;
      if (!(to_soup(prog, p, tree.external) == first)) {
        f.add("tree " + std::to_string(i) + ": " + print_process(p) + " differs from " + print_process(forms[0]));
      }
    }
  }
  return finish(f, "1000 cut trees, " + std::to_string(arrangements) + " arrangements, identical soups");
}

Result formula_criterion() {
  Failures f;
  pt::Rng rng(8);
  for (int i = 0; i < 10'000; ++i) {
    const Formula phi = pt::random_formula(rng, 6);
    if (dual(dual(phi)) != phi) f.add("dual is not an involution on " + to_string(phi));

    std::vector<Type> frontier{Type{phi, Address{0, false, ""}}, Type{dual(phi), Address{0, true, ""}}};
    for (int hop = 0; hop < 4 && !frontier.empty(); ++hop) {
      std::vector<Type> next;
      for (const Type& t : frontier) {
        for (const Type& s : type_steps(t)) {
          if (!t.address.prefix_of(s.address) || s.address.word.size() != t.address.word.size() + 1) {
            f.add("step of " + to_string(t) + " to " + to_string(s) + " does not extend the address");
          }
          if (next.size() < 16) next.push_back(s);
        }
      }
      frontier = std::move(next);
    }

    std::vector<Formula> seed{phi};
    const Closure c = closure_of(seed);
    for (const Formula& g : c.formulas()) {
      if (!g.is_fixpoint()) continue;
      for (const Formula& h : c.formulas()) {
        if (h.is_fixpoint() && g != h && subformula_leq(g, h) && !(c.priority(g) < c.priority(h))) {
          f.add("priority of " + to_string(g) + " not below " + to_string(h));
        }
      }
      if (c.priority(g) % 2 != (g.kind() == FormulaKind::Nu ? 0U : 1U)) {
        f.add("priority parity of " + to_string(g));
      }
    }
  }
  return finish(f, "10000 formulas: involution, address growth, monotone priorities");
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Result()>>> criteria{
      {"ranks", ranks_criterion},
      {"verdicts", verdicts_criterion},
      {"oracle agreement", oracle_criterion},
      {"fair termination", termination_criterion},
      {"subject reduction", reduction_criterion},
      {"adversarial schedules", adversarial_criterion},
      {"soup canonicity", canonicity_criterion},
      {"formula laws", formula_criterion},
  };
  bool all = true;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Result r;
    try {
      r = criteria[i].second();
    } catch (const std::exception& e) {
      r = {false, std::string("exception: ") + e.what()};
    }
    all = all && r.ok;
    std::cout << (r.ok ? "PASS " : "FAIL ") << i + 1 << " " << criteria[i].first << ": " << r.detail << std::endl;
  }
  return all ? 0 : 1;
}
