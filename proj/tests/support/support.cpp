#include "support.hpp"

#include <algorithm>
#include <deque>
#include <functional>
#include <set>
#include <unordered_set>

#include "pilin/parser.hpp"

namespace pilin::testing {

std::string corpus_path(const std::string& stem) { return std::string(PILIN_CORPUS_DIR) + "/" + stem + ".pilin"; }

Program load_corpus(const std::string& stem) { return parse_file(corpus_path(stem)).program; }

const std::vector<std::string>& well_typed_corpus() {
  static const std::vector<std::string> names = {"buyer_seller", "work_gather",       "forwarder",
                                                 "slot_machine", "context_free_tree", "player_machine"};
  return names;
}

const std::vector<std::string>& all_corpus() {
  static const std::vector<std::string> names = {"buyer_seller", "compulsive_buyer",  "omega",
                                                 "work_gather",  "forwarder",         "slot_machine",
                                                 "context_free_tree", "player_machine"};
  return names;
}

// ---------------------------------------------------------------------------

std::vector<RankValue> kleene_ranks(const RankSystem& system, std::size_t rounds) {
  std::vector<RankValue> x(system.size(), RankValue::finite(0));
  std::vector<RankValue> half;
  for (std::size_t k = 0; k < rounds; ++k) {
    if (k == rounds / 2) half = x;
    std::vector<RankValue> next = system.apply(x);
    if (next == x && k < rounds / 2) return x;
    x = std::move(next);
  }
  for (std::size_t v = 0; v < x.size(); ++v) {
    if (x[v] != half[v]) x[v] = RankValue::infinity();
  }
  return x;
}

RankSystem random_rank_system(Rng& rng, std::size_t vars) {
  RankSystem sys;
  std::uniform_int_distribution<int> op(0, 4);
  std::uniform_int_distribution<std::size_t> arg(0, vars - 1);
  for (std::size_t v = 0; v < vars; ++v) {
    RankEquation eq;
    eq.op = static_cast<RankOp>(op(rng));
    const std::size_t arity = eq.op == RankOp::Zero ? 0 : eq.op == RankOp::Copy ? 1 : 2;
    for (std::size_t i = 0; i < arity; ++i) eq.args.push_back(arg(rng));
    sys.equations.push_back(std::move(eq));
  }
  return sys;
}

// ---------------------------------------------------------------------------

namespace {

Formula random_formula_in(Rng& rng, int depth, std::vector<std::string>& scope) {
  std::uniform_int_distribution<int> pick(0, 99);
  const int r = depth <= 0 ? pick(rng) % 30 : pick(rng);
  if (r < 15 || (r < 30 && scope.empty())) {
    switch (pick(rng) % 4) {
      case 0: return Formula::zero();
      case 1: return Formula::top();
      case 2: return Formula::one();
      default: return Formula::bot();
    }
  }
  if (r < 30) return Formula::var(scope[static_cast<std::size_t>(pick(rng)) % scope.size()]);
  if (r < 75) {
    static const FormulaKind ops[] = {FormulaKind::Plus, FormulaKind::With, FormulaKind::Tensor, FormulaKind::Par};
    const FormulaKind k = ops[pick(rng) % 4];
    Formula l = random_formula_in(rng, depth - 1, scope);
    Formula rr = random_formula_in(rng, depth - 1, scope);
    return Formula::binary(k, l, rr);
  }
  const std::string name = "X" + std::to_string(scope.size());
  scope.push_back(name);
  Formula body = random_formula_in(rng, depth - 1, scope);
  scope.pop_back();
  return Formula::fixpoint(pick(rng) % 2 ? FormulaKind::Mu : FormulaKind::Nu, name, body);
}

}  // namespace

Formula random_formula(Rng& rng, int depth) {
  std::vector<std::string> scope;
  return random_formula_in(rng, depth, scope);
}

std::vector<Formula> formula_closure_brute(const Formula& f) {
  std::vector<Formula> out{f};
  std::unordered_set<Formula, FormulaHash> seen{f};
  for (std::size_t i = 0; i < out.size(); ++i) {
    for (const Formula& g : formula_steps(out[i])) {
      if (seen.insert(g).second) out.push_back(g);
    }
  }
  return out;
}

// ---------------------------------------------------------------------------

namespace {

using Ctx = std::vector<std::pair<Name, Formula>>;

struct Signature {
  std::string name;
  std::vector<Formula> params;
};

class ProgramGen {
 public:
  ProgramGen(Rng& rng, std::vector<Signature> sigs) : rng_(rng), sigs_(std::move(sigs)) {}

  std::optional<Process> body(const Ctx& ctx, int depth) {
    budget_ = 4000;
    return gen(ctx, depth, true);
  }

 private:
  Name fresh() { return "c" + std::to_string(next_++); }

  bool coin(int percent) { return std::uniform_int_distribution<int>(0, 99)(rng_) < percent; }

  std::optional<Process> call(const Ctx& ctx) {
    std::vector<std::size_t> order(sigs_.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::shuffle(order.begin(), order.end(), rng_);
    for (std::size_t i : order) {
      const Signature& s = sigs_[i];
      if (s.params.size() != ctx.size()) continue;
      std::vector<Name> args;
      std::vector<bool> used(ctx.size(), false);
      for (const Formula& p : s.params) {
        for (std::size_t j = 0; j < ctx.size(); ++j) {
          if (!used[j] && ctx[j].second == p) {
            used[j] = true;
            args.push_back(ctx[j].first);
            break;
          }
        }
      }
      if (args.size() == s.params.size()) return Process::call(s.name, args);
    }
    return std::nullopt;
  }

  std::pair<Ctx, Ctx> split_rest(const Ctx& ctx, std::size_t skip) {
    Ctx a, b;
    for (std::size_t i = 0; i < ctx.size(); ++i) {
      if (i == skip) continue;
      (coin(50) ? a : b).push_back(ctx[i]);
    }
    return {a, b};
  }

  static Ctx without(const Ctx& ctx, std::size_t i) {
    Ctx out = ctx;
    out.erase(out.begin() + static_cast<std::ptrdiff_t>(i));
    return out;
  }

  std::optional<Process> act(const Ctx& ctx, std::size_t i, int depth) {
    const Name& x = ctx[i].first;
    const Formula& f = ctx[i].second;
    switch (f.kind()) {
      case FormulaKind::One:
        if (ctx.size() == 1) return Process::close(x);
        return std::nullopt;
      case FormulaKind::Top:
        return Process::fail(x);
      case FormulaKind::Bot: {
        if (depth <= 0) return std::nullopt;
        auto p = gen(without(ctx, i), depth - 1, false);
        if (!p) return std::nullopt;
        return Process::wait(x, *p);
      }
      case FormulaKind::Par: {
        if (depth <= 0) return std::nullopt;
        Name y = fresh(), z = fresh();
        Ctx next = without(ctx, i);
        next.emplace_back(y, f.left());
        next.emplace_back(z, f.right());
        auto p = gen(next, depth - 1, false);
        if (!p) return std::nullopt;
        return Process::join(x, y, z, *p);
      }
      case FormulaKind::Tensor: {
        if (depth <= 0) return std::nullopt;
        Name y = fresh(), z = fresh();
        auto [l, r] = split_rest(ctx, i);
        l.emplace_back(y, f.left());
        r.emplace_back(z, f.right());
        auto p = gen(l, depth - 1, false);
        if (!p) return std::nullopt;
        auto q = gen(r, depth - 1, false);
        if (!q) return std::nullopt;
        return Process::fork(x, y, z, *p, *q);
      }
      case FormulaKind::Plus: {
        if (depth <= 0) return std::nullopt;
        const bool first = coin(50);
        for (bool side : {first, !first}) {
          Name y = fresh();
          Ctx next = without(ctx, i);
          next.emplace_back(y, side ? f.left() : f.right());
          if (auto p = gen(next, depth - 1, false)) return Process::select(x, side ? Tag::In1 : Tag::In2, y, *p);
        }
        return std::nullopt;
      }
      case FormulaKind::With: {
        if (depth <= 0) return std::nullopt;
        Name y = fresh();
        Ctx l = without(ctx, i), r = l;
        l.emplace_back(y, f.left());
        r.emplace_back(y, f.right());
        auto p = gen(l, depth - 1, false);
        if (!p) return std::nullopt;
        auto q = gen(r, depth - 1, false);
        if (!q) return std::nullopt;
        return Process::case_of(x, y, *p, *q);
      }
      case FormulaKind::Mu:
      case FormulaKind::Nu: {
        if (depth <= 0) return std::nullopt;
        Name y = fresh();
        Ctx next = without(ctx, i);
        next.emplace_back(y, unfold(f));
        auto p = gen(next, depth - 1, false);
        if (!p) return std::nullopt;
        return f.kind() == FormulaKind::Mu ? Process::rec(x, y, *p) : Process::corec(x, y, *p);
      }
      default:
        return std::nullopt;
    }
  }

  std::optional<Process> gen(const Ctx& ctx, int depth, bool top) {
    if (--budget_ < 0) return std::nullopt;
    // A body that is only a call would be an alias; keep the first step real.
    if (!top && coin(depth <= 1 ? 90 : 45)) {
      if (auto c = call(ctx)) return c;
    }
    if (ctx.size() == 2 && ctx[0].second == dual(ctx[1].second) && coin(30)) {
      return Process::link(ctx[0].first, ctx[1].first);
    }
    if (depth > 1 && coin(8)) {
      auto p = gen(ctx, depth - 1, false);
      auto q = p ? gen(ctx, depth - 1, false) : std::nullopt;
      if (p && q) return Process::choice(*p, *q);
    }
    if (depth > 1 && coin(8)) {
      std::vector<std::string> scope;
      Formula f = random_formula(rng_, 2);
      Name w = fresh();
      Ctx l, r;
      for (const auto& slot : ctx) (coin(50) ? l : r).push_back(slot);
      l.emplace_back(w, f);
      r.emplace_back(w, dual(f));
      auto p = gen(l, depth - 1, false);
      auto q = p ? gen(r, depth - 1, false) : std::nullopt;
      if (p && q) return Process::cut(w, f, *p, *q);
    }
    std::vector<std::size_t> order(ctx.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::shuffle(order.begin(), order.end(), rng_);
    for (std::size_t i : order) {
      if (auto p = act(ctx, i, depth)) return p;
    }
    if (!top) return call(ctx);
    return std::nullopt;
  }

  Rng& rng_;
  std::vector<Signature> sigs_;
  int next_ = 0;
  int budget_ = 0;
};

}  // namespace

std::optional<GeneratedProgram> random_program(Rng& rng, std::size_t max_defs, int formula_depth) {
  const std::size_t defs = std::uniform_int_distribution<std::size_t>(1, max_defs)(rng);
  std::vector<Signature> sigs;
  for (std::size_t d = 0; d < defs; ++d) {
    Signature s{"D" + std::to_string(d), {}};
    const std::size_t arity = std::uniform_int_distribution<std::size_t>(1, 2)(rng);
    for (std::size_t i = 0; i < arity; ++i) {
      // Share formulas between definitions so that calls line up.
      if (!sigs.empty() && std::uniform_int_distribution<int>(0, 2)(rng) == 0) {
        const Signature& other = sigs[std::uniform_int_distribution<std::size_t>(0, sigs.size() - 1)(rng)];
        s.params.push_back(other.params[0]);
      } else {
        s.params.push_back(random_formula(rng, formula_depth));
      }
    }
    sigs.push_back(std::move(s));
  }
  ProgramGen gen(rng, sigs);
  GeneratedProgram out;
  for (const Signature& s : sigs) {
    Ctx ctx;
    std::vector<Parameter> params;
    for (std::size_t i = 0; i < s.params.size(); ++i) {
      Name n = std::string(1, static_cast<char>('a' + i));
      ctx.emplace_back(n, s.params[i]);
      params.push_back(Parameter{n, s.params[i], {}});
    }
    auto body = gen.body(ctx, 7);
    if (!body) return std::nullopt;
    out.program.add(Definition{s.name, params, *body, {}});
  }
  out.program.set_main(sigs.front().name);
  out.text = print_program(out.program);
  return out;
}

// ---------------------------------------------------------------------------

CutTree random_cut_tree(Rng& rng, std::size_t leaves) {
  CutTree t;
  std::vector<std::vector<Name>> owned(leaves);
  for (std::size_t i = 1; i < leaves; ++i) {
    const std::size_t parent = std::uniform_int_distribution<std::size_t>(0, i - 1)(rng);
    const Name c = "k" + std::to_string(i);
    t.edges.emplace_back(parent, i);
    t.channels.push_back(c);
    t.annotations.push_back(random_formula(rng, 3));
    owned[parent].push_back(c);
    owned[i].push_back(c);
  }
  t.external = Parameter{"out", Formula::one(), {}};
  owned[std::uniform_int_distribution<std::size_t>(0, leaves - 1)(rng)].push_back("out");
  for (auto& names : owned) {
    std::shuffle(names.begin(), names.end(), rng);
    Process p = Process::close(names.back());
    for (std::size_t k = names.size() - 1; k-- > 0;) p = Process::wait(names[k], p);
    t.leaves.push_back(p);
  }
  return t;
}

std::vector<Process> arrangements(const CutTree& tree, std::size_t limit) {
  std::function<std::vector<Process>(const std::vector<std::size_t>&)> arrange =
      [&](const std::vector<std::size_t>& part) -> std::vector<Process> {
    if (part.size() == 1) return {tree.leaves[part[0]]};
    std::set<std::size_t> in(part.begin(), part.end());
    std::vector<Process> out;
    for (std::size_t e = 0; e < tree.edges.size() && out.size() < limit; ++e) {
      auto [a, b] = tree.edges[e];
      if (!in.contains(a) || !in.contains(b)) continue;
      // Component of `a` once edge e is removed.
      std::set<std::size_t> side{a};
      std::deque<std::size_t> queue{a};
      while (!queue.empty()) {
        std::size_t n = queue.front();
        queue.pop_front();
        for (std::size_t f = 0; f < tree.edges.size(); ++f) {
          if (f == e) continue;
          auto [u, v] = tree.edges[f];
          if (!in.contains(u) || !in.contains(v)) continue;
          std::size_t m = u == n ? v : v == n ? u : SIZE_MAX;
          if (m != SIZE_MAX && side.insert(m).second) queue.push_back(m);
        }
      }
      std::vector<std::size_t> left(side.begin(), side.end()), right;
      for (std::size_t n : part) {
        if (!side.contains(n)) right.push_back(n);
      }
      const std::vector<Process> ls = arrange(left);
      const std::vector<Process> rs = arrange(right);
      for (const Process& l : ls) {
        for (const Process& r : rs) {
          if (out.size() >= limit) break;
          out.push_back(Process::cut(tree.channels[e], tree.annotations[e], l, r));
          out.push_back(Process::cut(tree.channels[e], dual(tree.annotations[e]), r, l));
        }
      }
    }
    return out;
  };
  std::vector<std::size_t> all(tree.leaves.size());
  for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
  return arrange(all);
}

}  // namespace pilin::testing
