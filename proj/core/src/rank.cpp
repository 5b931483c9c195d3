#include "pilin/rank.hpp"

#include <algorithm>
#include <deque>
#include <unordered_map>

namespace pilin {

std::string to_string(RankValue r) { return r.is_infinite() ? "inf" : std::to_string(r.value()); }

namespace {

RankOp op_of(ProcessKind kind) {
  switch (kind) {
    case ProcessKind::Link:
    case ProcessKind::Fail:
    case ProcessKind::Close:
      return RankOp::Zero;
    case ProcessKind::Case:
      return RankOp::Max;
    case ProcessKind::Cut:
    case ProcessKind::Fork:
      return RankOp::Sum;
    case ProcessKind::Choice:
      return RankOp::OnePlusMin;
    default:
      return RankOp::Copy;
  }
}

RankValue eval(const RankEquation& eq, const std::vector<RankValue>& v) {
  switch (eq.op) {
    case RankOp::Zero:
      return RankValue::finite(0);
    case RankOp::Copy:
      return v[eq.args[0]];
    case RankOp::Max:
      return std::max(v[eq.args[0]], v[eq.args[1]]);
    case RankOp::Sum:
      return v[eq.args[0]] + v[eq.args[1]];
    case RankOp::OnePlusMin:
      return RankValue::finite(1) + std::min(v[eq.args[0]], v[eq.args[1]]);
  }
  return RankValue::finite(0);
}

class SystemBuilder {
 public:
  explicit SystemBuilder(const Program& prog) : prog_(prog) {}

  RankSystem build() {
    for (const Definition& d : prog_.definitions()) {
      def_var_[d.name] = eqs_.size();
      eqs_.emplace_back();
    }
    for (const Definition& d : prog_.definitions()) {
      const std::size_t v = def_var_[d.name];
      fill(v, d.body);
      key_to_var_.emplace(key_of(eqs_[v], d.body), v);
    }
    return renumber();
  }

 private:
  static std::string key_of(const RankEquation& eq, const Process& p) {
    std::string key(to_string(p.kind()));
    if (p.kind() == ProcessKind::Select) key += to_string(p.tag());
    for (std::size_t a : eq.args) key += "/" + std::to_string(a);
    return key;
  }

  void fill(std::size_t v, const Process& p) {
    RankEquation eq;
    eq.op = op_of(p.kind());
    eq.representative = p;
    if (p.kind() == ProcessKind::Call) {
      eq.args.push_back(callee_var(p));
    } else {
      if (p.left()) eq.args.push_back(var_of(p.left()));
      if (p.right()) eq.args.push_back(var_of(p.right()));
    }
    eqs_[v] = std::move(eq);
  }

  std::size_t callee_var(const Process& p) {
    auto it = def_var_.find(p.callee());
    if (it == def_var_.end()) throw UnknownDefinition("unknown definition '" + p.callee() + "'");
    return it->second;
  }

  std::size_t var_of(const Process& p) {
    if (p.kind() == ProcessKind::Call) return callee_var(p);
    RankEquation eq;
    eq.op = op_of(p.kind());
    eq.representative = p;
    if (p.left()) eq.args.push_back(var_of(p.left()));
    if (p.right()) eq.args.push_back(var_of(p.right()));
    std::string key = key_of(eq, p);
    auto it = key_to_var_.find(key);
    if (it != key_to_var_.end()) return it->second;
    const std::size_t v = eqs_.size();
    eqs_.push_back(std::move(eq));
    key_to_var_.emplace(std::move(key), v);
    return v;
  }

  RankSystem renumber() {
    std::vector<std::size_t> order;
    std::vector<std::size_t> new_id(eqs_.size(), SIZE_MAX);
    for (const Definition& d : prog_.definitions()) {
      std::vector<std::size_t> stack{def_var_[d.name]};
      while (!stack.empty()) {
        std::size_t v = stack.back();
        stack.pop_back();
        if (new_id[v] != SIZE_MAX) continue;
        new_id[v] = order.size();
        order.push_back(v);
        const auto& args = eqs_[v].args;
        for (auto it = args.rbegin(); it != args.rend(); ++it) {
          if (new_id[*it] == SIZE_MAX) stack.push_back(*it);
        }
      }
    }
    RankSystem sys;
    sys.equations.reserve(order.size());
    for (std::size_t v : order) {
      RankEquation eq = eqs_[v];
      for (std::size_t& a : eq.args) a = new_id[a];
      sys.equations.push_back(std::move(eq));
    }
    for (const auto& [name, v] : def_var_) sys.definition_vars.emplace(name, new_id[v]);
    return sys;
  }

  const Program& prog_;
  std::vector<RankEquation> eqs_;
  std::unordered_map<std::string, std::size_t> key_to_var_;
  std::map<std::string, std::size_t> def_var_;
};

// Variables whose least value is at least one.
std::vector<bool> positive_vars(const RankSystem& sys) {
  const std::size_t n = sys.size();
  std::vector<bool> pos(n, false);
  for (bool changed = true; changed;) {
    changed = false;
    for (std::size_t v = 0; v < n; ++v) {
      if (pos[v]) continue;
      const RankEquation& eq = sys.equations[v];
      bool now = eq.op == RankOp::OnePlusMin;
      if (eq.op != RankOp::Zero && eq.op != RankOp::OnePlusMin) {
        now = std::any_of(eq.args.begin(), eq.args.end(), [&](std::size_t a) { return pos[a]; });
      }
      if (now) {
        pos[v] = true;
        changed = true;
      }
    }
  }
  return pos;
}

// Variables with infinite least value. Two-player game on the equations: the
// prover picks the successor at copy, max and sum, the opponent at 1+min.
// An edge is strict when taking it certifies one more unit: every edge of a
// 1+min, and a sum edge whose sibling is positive. A variable is infinite
// iff the prover can force infinitely many strict edges.
std::vector<bool> infinite_vars(const RankSystem& sys) {
  const std::size_t n = sys.size();
  const std::vector<bool> pos = positive_vars(sys);

  // Game vertices: one per variable plus one per strict edge.
  struct Vertex {
    bool opponent = false;
    bool accepting = false;
    std::vector<std::size_t> succ;
  };
  std::vector<Vertex> g(n);
  for (std::size_t v = 0; v < n; ++v) {
    const RankEquation& eq = sys.equations[v];
    g[v].opponent = eq.op == RankOp::OnePlusMin;
    for (std::size_t i = 0; i < eq.args.size(); ++i) {
      bool strict = eq.op == RankOp::OnePlusMin ||
                    (eq.op == RankOp::Sum && pos[eq.args[1 - i]]);
      if (!strict) {
        g[v].succ.push_back(eq.args[i]);
        continue;
      }
      Vertex mid;
      mid.accepting = true;
      mid.succ.push_back(eq.args[i]);
      g[v].succ.push_back(g.size());
      g.push_back(std::move(mid));
    }
  }

  const std::size_t m = g.size();
  std::vector<std::vector<std::size_t>> pred(m);
  for (std::size_t v = 0; v < m; ++v) {
    for (std::size_t w : g[v].succ) pred[w].push_back(v);
  }

  std::vector<bool> alive(m, true);
  // Attractor within the alive subgame for `prover` (true) or the opponent.
  auto attractor = [&](std::vector<bool> target, bool prover) {
    std::vector<std::size_t> count(m, 0);
    std::deque<std::size_t> queue;
    for (std::size_t v = 0; v < m; ++v) {
      if (!alive[v]) continue;
      for (std::size_t w : g[v].succ) count[v] += alive[w] ? 1 : 0;
      if (target[v]) queue.push_back(v);
    }
    // Dead ends are lost by whoever owns them.
    for (std::size_t v = 0; v < m; ++v) {
      if (alive[v] && !target[v] && count[v] == 0 && g[v].opponent == prover) {
        target[v] = true;
        queue.push_back(v);
      }
    }
    while (!queue.empty()) {
      std::size_t w = queue.front();
      queue.pop_front();
      for (std::size_t v : pred[w]) {
        if (!alive[v] || target[v]) continue;
        const bool mine = g[v].opponent != prover;
        if (mine || --count[v] == 0) {
          target[v] = true;
          queue.push_back(v);
        }
      }
    }
    return target;
  };

  for (;;) {
    std::vector<bool> accepting(m, false);
    for (std::size_t v = 0; v < m; ++v) accepting[v] = alive[v] && g[v].accepting;
    std::vector<bool> reach = attractor(accepting, true);
    std::vector<bool> trap(m, false);
    bool any = false;
    for (std::size_t v = 0; v < m; ++v) {
      if (alive[v] && !reach[v]) {
        trap[v] = true;
        any = true;
      }
    }
    if (!any) break;
    std::vector<bool> lost = attractor(trap, false);
    for (std::size_t v = 0; v < m; ++v) {
      if (lost[v]) alive[v] = false;
    }
  }
  return std::vector<bool>(alive.begin(), alive.begin() + static_cast<std::ptrdiff_t>(n));
}

}  // namespace

std::vector<RankValue> RankSystem::apply(const std::vector<RankValue>& values) const {
  std::vector<RankValue> out(values.size());
  for (std::size_t v = 0; v < equations.size(); ++v) out[v] = eval(equations[v], values);
  return out;
}

std::string to_string(const RankSystem& system) {
  std::string out;
  auto var = [](std::size_t v) { return "r" + std::to_string(v + 1); };
  for (std::size_t v = 0; v < system.size(); ++v) {
    const RankEquation& eq = system.equations[v];
    out += var(v) + " = ";
    switch (eq.op) {
      case RankOp::Zero: out += "0"; break;
      case RankOp::Copy: out += var(eq.args[0]); break;
      case RankOp::Max: out += "max(" + var(eq.args[0]) + ", " + var(eq.args[1]) + ")"; break;
      case RankOp::Sum: out += var(eq.args[0]) + " + " + var(eq.args[1]); break;
      case RankOp::OnePlusMin:
        out += "1 + min(" + var(eq.args[0]) + ", " + var(eq.args[1]) + ")";
        break;
    }
    out += "\n";
  }
  return out;
}

RankSystem rank_equations(const Program& prog) { return SystemBuilder(prog).build(); }

RankTable solve_rank(RankSystem system) {
  const std::size_t n = system.size();
  const std::vector<bool> inf = infinite_vars(system);

  std::vector<RankValue> values(n, RankValue::finite(0));
  std::vector<std::vector<std::size_t>> dependents(n);
  for (std::size_t v = 0; v < n; ++v) {
    if (inf[v]) values[v] = RankValue::infinity();
    for (std::size_t a : system.equations[v].args) dependents[a].push_back(v);
  }

  // Chaotic iteration on the finite part; it only climbs towards the least
  // solution, whose finite entries bound it.
  std::deque<std::size_t> work;
  std::vector<bool> queued(n, false);
  for (std::size_t v = 0; v < n; ++v) {
    if (!inf[v]) {
      work.push_back(v);
      queued[v] = true;
    }
  }
  std::uint64_t budget = 50'000'000;
  while (!work.empty()) {
    if (budget-- == 0) throw ResourceLimit("rank iteration budget exhausted");
    std::size_t v = work.front();
    work.pop_front();
    queued[v] = false;
    RankValue now = eval(system.equations[v], values);
    if (now == values[v]) continue;
    values[v] = now;
    for (std::size_t d : dependents[v]) {
      if (!inf[d] && !queued[d]) {
        work.push_back(d);
        queued[d] = true;
      }
    }
  }
  return RankTable{std::move(system), std::move(values)};
}

RankTable compute_ranks(const Program& prog) { return solve_rank(rank_equations(prog)); }

RankValue RankTable::of_definition(const std::string& name) const {
  auto it = system.definition_vars.find(name);
  if (it == system.definition_vars.end()) throw UnknownDefinition("unknown definition '" + name + "'");
  return values[it->second];
}

RankValue rank_of(const RankTable& table, const Process& p) {
  switch (p.kind()) {
    case ProcessKind::Link:
    case ProcessKind::Fail:
    case ProcessKind::Close:
      return RankValue::finite(0);
    case ProcessKind::Case:
      return std::max(rank_of(table, p.left()), rank_of(table, p.right()));
    case ProcessKind::Cut:
    case ProcessKind::Fork:
      return rank_of(table, p.left()) + rank_of(table, p.right());
    case ProcessKind::Choice:
      return RankValue::finite(1) + std::min(rank_of(table, p.left()), rank_of(table, p.right()));
    case ProcessKind::Call: {
      auto it = table.system.definition_vars.find(p.callee());
      if (it == table.system.definition_vars.end()) {
        throw UnknownSubterm("no rank for calls to '" + p.callee() + "'");
      }
      return table.values[it->second];
    }
    default:
      return rank_of(table, p.body());
  }
}

}  // namespace pilin
