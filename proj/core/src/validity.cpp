#include "pilin/validity.hpp"

#include <algorithm>
#include <bit>
#include <deque>
#include <functional>
#include <map>
#include <optional>
#include <unordered_map>
#include <unordered_set>

#include "pilin/parser.hpp"

namespace pilin {

namespace {

std::string node_label(const ProofGraph& g, std::size_t n) {
  const ProofNode& node = g.nodes[n];
  std::string label = "n" + std::to_string(n) + " " + std::string(to_string(node.rule));
  if (node.entry) label += " " + node.definition;
  return label;
}

bool finite_choice(const ProofGraph& g, const RankTable& ranks, std::size_t n) {
  const ProofNode& node = g.nodes[n];
  return node.process.kind() == ProcessKind::Choice && rank_of(ranks, node.process).is_finite();
}

// Shortest path of edge ids from the root to every reachable node, ties
// broken by edge id.
std::vector<std::vector<std::size_t>> shortest_paths(const ProofGraph& g) {
  std::vector<std::vector<std::size_t>> path(g.nodes.size());
  std::vector<bool> seen(g.nodes.size(), false);
  std::deque<std::size_t> queue{g.root};
  seen[g.root] = true;
  while (!queue.empty()) {
    std::size_t n = queue.front();
    queue.pop_front();
    for (std::size_t e : g.nodes[n].premises) {
      std::size_t m = g.edges[e].to;
      if (seen[m]) continue;
      seen[m] = true;
      path[m] = path[n];
      path[m].push_back(e);
      queue.push_back(m);
    }
  }
  return path;
}

}  // namespace

BuchiAutomaton build_M(const ProofGraph& g) {
  BuchiAutomaton a;
  std::vector<std::size_t> state_of(g.nodes.size(), SIZE_MAX);
  for (std::size_t n : g.reachable()) {
    state_of[n] = a.size();
    a.labels.push_back(node_label(g, n));
    a.node.push_back(n);
    a.accepting.push_back(true);
  }
  for (std::size_t s = 0; s < a.size(); ++s) {
    for (std::size_t e : g.nodes[a.node[s]].premises) {
      a.transitions.push_back(Transition{s, state_of[g.edges[e].to], e, 0});
    }
  }
  a.initial.push_back(state_of[g.root]);
  return a;
}

BuchiAutomaton build_U(const ProofGraph& g, const RankTable& ranks) {
  BuchiAutomaton a = build_M(g);
  for (std::size_t s = 0; s < a.size(); ++s) a.accepting[s] = finite_choice(g, ranks, a.node[s]);
  return a;
}

ParityAutomaton build_N(const ProofGraph& g) {
  ParityAutomaton a;
  const unsigned neutral = g.closure.neutral_priority();
  a.max_priority = neutral;
  std::vector<std::size_t> wait_of(g.nodes.size(), SIZE_MAX);
  std::vector<std::size_t> track_base(g.nodes.size(), SIZE_MAX);
  for (std::size_t n : g.reachable()) {
    wait_of[n] = a.size();
    a.states.push_back({n, -1});
    a.labels.push_back("wait " + node_label(g, n));
    track_base[n] = a.size();
    const Context& ctx = g.nodes[n].context;
    for (std::size_t s = 0; s < ctx.size(); ++s) {
      a.states.push_back({n, static_cast<int>(s)});
      a.labels.push_back("track " + node_label(g, n) + " " + ctx[s].name + ": " + to_string(ctx[s].type));
    }
  }
  a.initial.push_back(wait_of[g.root]);
  for (std::size_t s = 0; s < g.nodes[g.root].context.size(); ++s) a.initial.push_back(track_base[g.root] + s);

  for (std::size_t n : g.reachable()) {
    for (std::size_t e : g.nodes[n].premises) {
      const ProofEdge& edge = g.edges[e];
      const Context& to_ctx = g.nodes[edge.to].context;
      a.transitions.push_back(Transition{wait_of[n], wait_of[edge.to], e, neutral});
      for (std::size_t s = 0; s < to_ctx.size(); ++s) {
        a.transitions.push_back(Transition{wait_of[n], track_base[edge.to] + s, e, neutral});
        const Ancestor& anc = edge.ancestry[s];
        if (anc.slot == Ancestor::kNone) continue;
        const unsigned p = anc.progressed ? g.closure.priority(to_ctx[s].type.formula) : neutral;
        a.transitions.push_back(Transition{track_base[n] + static_cast<std::size_t>(anc.slot),
                                           track_base[edge.to] + s, e, p});
      }
    }
  }
  return a;
}

// ---------------------------------------------------------------------------
// Inclusion by path summaries

namespace {

// Priority sets are bitmasks over the distinct priorities of N, in order.
using PrioritySet = std::uint64_t;

PrioritySet at_most(PrioritySet s) {
  if (s == 0) return 0;
  const int top = 63 - std::countl_zero(s);
  return top == 63 ? ~PrioritySet{0} : ((PrioritySet{1} << (top + 1)) - 1);
}

// Minima of all pairs drawn from a and b.
PrioritySet meet(PrioritySet a, PrioritySet b) { return (a & at_most(b)) | (b & at_most(a)); }

struct Summary {
  std::size_t from = 0;
  std::size_t to = 0;
  bool unfair = false;              // visits a finitely-ranked choice
  std::vector<PrioritySet> matrix;  // slots(from) x slots(to)
  std::vector<std::size_t> path;    // one witness

  bool same(const Summary& o) const {
    return from == o.from && to == o.to && unfair == o.unfair && matrix == o.matrix;
  }
};

struct SummaryHash {
  std::size_t operator()(const Summary& s) const {
    std::size_t h = std::hash<std::size_t>{}(s.from) * 31 + s.to;
    h = h * 2 + (s.unfair ? 1 : 0);
    for (PrioritySet p : s.matrix) h = h * 1000003 ^ std::hash<PrioritySet>{}(p);
    return h;
  }
};

struct SummaryEq {
  bool operator()(const Summary& a, const Summary& b) const { return a.same(b); }
};

class SummaryClosure {
 public:
  SummaryClosure(const ProofGraph& g, const RankTable& ranks) : g_(g) {
    const ParityAutomaton n = build_N(g);
    std::vector<unsigned> distinct;
    for (const Transition& t : n.transitions) distinct.push_back(t.priority);
    std::sort(distinct.begin(), distinct.end());
    distinct.erase(std::unique(distinct.begin(), distinct.end()), distinct.end());
    if (distinct.size() > 64) throw ResourceLimit("more than 64 distinct priorities");
    for (std::size_t i = 0; i < distinct.size(); ++i) {
      if (distinct[i] % 2 == 0) even_ |= PrioritySet{1} << i;
    }

    const BuchiAutomaton u = build_U(g, ranks);
    unfair_node_.assign(g.nodes.size(), false);
    for (std::size_t s = 0; s < u.size(); ++s) unfair_node_[u.node[s]] = u.accepting[s];

    // One summary per edge, from the Track-to-Track transitions of N.
    edge_summary_.resize(g.edges.size());
    for (const Transition& t : n.transitions) {
      const auto& from = n.states[t.from];
      const auto& to = n.states[t.to];
      if (from.slot < 0 || to.slot < 0) continue;
      Summary& s = edge_summary_[t.letter];
      if (s.matrix.empty()) init_edge(s, t.letter);
      const auto bit = static_cast<std::size_t>(
          std::lower_bound(distinct.begin(), distinct.end(), t.priority) - distinct.begin());
      s.matrix[index(s, from.slot, to.slot)] |= PrioritySet{1} << bit;
    }
    for (std::size_t e = 0; e < g.edges.size(); ++e) {
      if (edge_summary_[e].path.empty()) init_edge(edge_summary_[e], e);
    }
  }

  std::optional<Summary> find_counterexample(std::size_t budget) {
    std::deque<std::size_t> queue;
    for (std::size_t n : g_.reachable()) {
      for (std::size_t e : g_.nodes[n].premises) {
        if (insert(edge_summary_[e])) queue.push_back(all_.size() - 1);
      }
    }
    while (!queue.empty()) {
      const std::size_t i = queue.front();
      queue.pop_front();
      if (is_counterexample(all_[i])) return all_[i];
      const std::size_t end = all_[i].to;
      for (std::size_t e : g_.nodes[end].premises) {
        Summary next = compose(all_[i], edge_summary_[e]);
        if (insert(std::move(next))) {
          if (all_.size() > budget) {
            throw ResourceLimit("validity check exceeded " + std::to_string(budget) + " path summaries");
          }
          queue.push_back(all_.size() - 1);
        }
      }
    }
    return std::nullopt;
  }

 private:
  std::size_t width(std::size_t node) const { return g_.nodes[node].context.size(); }

  std::size_t index(const Summary& s, int a, int b) const {
    return static_cast<std::size_t>(a) * width(s.to) + static_cast<std::size_t>(b);
  }

  void init_edge(Summary& s, std::size_t e) {
    const ProofEdge& edge = g_.edges[e];
    s.from = edge.from;
    s.to = edge.to;
    s.unfair = unfair_node_[edge.from];
    s.matrix.assign(width(edge.from) * width(edge.to), 0);
    s.path = {e};
  }

  Summary compose(const Summary& x, const Summary& y) const {
    Summary out;
    out.from = x.from;
    out.to = y.to;
    out.unfair = x.unfair || y.unfair;
    const std::size_t wa = width(x.from), wb = width(x.to), wc = width(y.to);
    out.matrix.assign(wa * wc, 0);
    for (std::size_t a = 0; a < wa; ++a) {
      for (std::size_t b = 0; b < wb; ++b) {
        const PrioritySet ab = x.matrix[a * wb + b];
        if (!ab) continue;
        for (std::size_t c = 0; c < wc; ++c) {
          const PrioritySet bc = y.matrix[b * wc + c];
          if (bc) out.matrix[a * wc + c] |= meet(ab, bc);
        }
      }
    }
    out.path = x.path;
    out.path.insert(out.path.end(), y.path.begin(), y.path.end());
    return out;
  }

  bool is_counterexample(const Summary& s) const {
    if (s.from != s.to || s.unfair) return false;
    if (!compose(s, s).same(s)) return false;
    const std::size_t w = width(s.from);
    for (std::size_t q = 0; q < w; ++q) {
      if (s.matrix[q * w + q] & even_) return false;
    }
    return true;
  }

  bool insert(Summary s) {
    if (seen_.contains(s)) return false;
    seen_.insert(s);
    all_.push_back(std::move(s));
    return true;
  }

  const ProofGraph& g_;
  PrioritySet even_ = 0;
  std::vector<bool> unfair_node_;
  std::vector<Summary> edge_summary_;
  std::vector<Summary> all_;
  std::unordered_set<Summary, SummaryHash, SummaryEq> seen_;
};

std::string describe_cycle(const ProofGraph& g, const std::vector<std::size_t>& cycle) {
  std::string out;
  for (std::size_t e : cycle) {
    if (!out.empty()) out += " -> ";
    out += "n" + std::to_string(g.edges[e].from);
  }
  return out + " -> n" + std::to_string(g.edges[cycle.front()].from);
}

}  // namespace

Verdict check_validity(const ProofGraph& g, const RankTable& ranks, const ValidityOptions& options) {
  SummaryClosure closure(g, ranks);
  std::optional<Summary> bad = closure.find_counterexample(options.max_summaries);
  Verdict v;
  if (!bad) return v;
  v.well_typed = false;
  v.lasso.prefix = shortest_paths(g)[bad->from];
  v.lasso.cycle = bad->path;
  v.explanation = "fair infinite branch without a valid nu-thread, cycling through " +
                  describe_cycle(g, v.lasso.cycle);
  return v;
}

// ---------------------------------------------------------------------------
// Direct checks on lassos

bool lasso_replays(const ProofGraph& g, const Lasso& lasso) {
  if (lasso.cycle.empty()) return false;
  std::size_t at = g.root;
  for (const auto* part : {&lasso.prefix, &lasso.cycle}) {
    for (std::size_t e : *part) {
      if (e >= g.edges.size() || g.edges[e].from != at) return false;
      at = g.edges[e].to;
    }
  }
  return at == g.edges[lasso.cycle.front()].from;
}

bool cycle_is_fair(const ProofGraph& g, const RankTable& ranks, const std::vector<std::size_t>& cycle) {
  return std::none_of(cycle.begin(), cycle.end(),
                      [&](std::size_t e) { return finite_choice(g, ranks, g.edges[e].from); });
}

bool cycle_has_valid_thread(const ProofGraph& g, const std::vector<std::size_t>& cycle) {
  const std::size_t start = g.edges[cycle.front()].from;
  const std::size_t slots = g.nodes[start].context.size();
  const std::size_t max_copies = std::max<std::size_t>(slots, 1);

  // Depth-first over (step, slot), collecting the formulas after each step.
  std::vector<Formula> formulas;
  bool found = false;
  std::function<void(std::size_t, std::size_t, int, int, bool)> walk =
      [&](std::size_t step, std::size_t copies, int slot, int origin, bool progressed) {
        if (found) return;
        if (step == cycle.size()) {
          if (slot == origin && progressed) {
            std::optional<Formula> least = min_formula(formulas);
            if (!least) throw Error("thread cycle has no least formula");
            if (least->kind() == FormulaKind::Nu) found = true;
          }
          if (copies < max_copies) walk(0, copies + 1, slot, origin, progressed);
          return;
        }
        const ProofEdge& edge = g.edges[cycle[step]];
        const Context& ctx = g.nodes[edge.to].context;
        for (std::size_t s = 0; s < ctx.size(); ++s) {
          if (edge.ancestry[s].slot != slot) continue;
          formulas.push_back(ctx[s].type.formula);
          walk(step + 1, copies, static_cast<int>(s), origin, progressed || edge.ancestry[s].progressed);
          formulas.pop_back();
        }
      };
  for (std::size_t q = 0; q < slots && !found; ++q) {
    formulas.clear();
    walk(0, 1, static_cast<int>(q), static_cast<int>(q), false);
  }
  return found;
}

Verdict oracle_check(const ProofGraph& g, const RankTable& ranks, std::size_t bound) {
  Verdict v;
  v.bounded = true;
  v.bound = bound;
  const auto prefixes = shortest_paths(g);
  std::vector<std::size_t> nodes = g.reachable();
  std::sort(nodes.begin(), nodes.end(), [&](std::size_t a, std::size_t b) {
    return prefixes[a].size() != prefixes[b].size() ? prefixes[a].size() < prefixes[b].size() : a < b;
  });
  std::vector<std::size_t> path;
  std::function<bool(std::size_t, std::size_t)> cycles = [&](std::size_t start, std::size_t at) {
    for (std::size_t e : g.nodes[at].premises) {
      path.push_back(e);
      const std::size_t next = g.edges[e].to;
      if (next == start && cycle_is_fair(g, ranks, path) && !cycle_has_valid_thread(g, path)) return true;
      if (path.size() < bound && cycles(start, next)) return true;
      path.pop_back();
    }
    return false;
  };
  for (std::size_t n : nodes) {
    if (prefixes[n].size() > bound) break;
    path.clear();
    if (cycles(n, n)) {
      v.well_typed = false;
      v.lasso = Lasso{prefixes[n], path};
      v.explanation = "fair cycle without a valid nu-thread: " + describe_cycle(g, path);
      return v;
    }
  }
  return v;
}

std::string to_string(const Lasso& lasso, const ProofGraph& g) {
  auto part = [&](const std::vector<std::size_t>& edges) {
    std::string out;
    for (std::size_t e : edges) {
      if (!out.empty()) out += " ";
      out += "e" + std::to_string(e) + "(n" + std::to_string(g.edges[e].from) + "->n" +
             std::to_string(g.edges[e].to) + ")";
    }
    return out;
  };
  return "prefix [" + part(lasso.prefix) + "] cycle [" + part(lasso.cycle) + "]";
}

// ---------------------------------------------------------------------------
// HOA output

namespace {

std::size_t ap_count(std::size_t letters) {
  std::size_t k = 1;
  while ((std::size_t{1} << k) < letters) ++k;
  return k;
}

std::string hoa_header(const std::string& name, std::size_t states, const std::vector<std::size_t>& initial,
                       std::size_t letters) {
  std::string out = "HOA: v1\nname: \"" + name + "\"\nStates: " + std::to_string(states) + "\n";
  for (std::size_t s : initial) out += "Start: " + std::to_string(s) + "\n";
  const std::size_t k = ap_count(letters);
  out += "AP: " + std::to_string(k);
  for (std::size_t i = 0; i < k; ++i) out += " \"b" + std::to_string(i) + "\"";
  out += "\n";
  for (std::size_t l = 0; l < letters; ++l) {
    out += "Alias: @e" + std::to_string(l) + " ";
    for (std::size_t i = 0; i < k; ++i) {
      if (i) out += "&";
      out += ((l >> i) & 1U) ? std::to_string(i) : "!" + std::to_string(i);
    }
    out += "\n";
  }
  return out;
}

std::string quote(const std::string& s) {
  std::string out = "\"";
  for (char c : s) {
    if (c == '"' || c == '\\') out += '\\';
    out += c;
  }
  return out + "\"";
}

}  // namespace

std::string to_hoa(const BuchiAutomaton& a, const std::string& name, std::size_t letters) {
  std::string out = hoa_header(name, a.size(), a.initial, letters);
  out += "acc-name: Buchi\nAcceptance: 1 Inf(0)\nproperties: state-acc deterministic\n--BODY--\n";
  for (std::size_t s = 0; s < a.size(); ++s) {
    out += "State: " + std::to_string(s) + " " + quote(a.labels[s]);
    if (a.accepting[s]) out += " {0}";
    out += "\n";
    for (const Transition& t : a.transitions) {
      if (t.from == s) out += "[@e" + std::to_string(t.letter) + "] " + std::to_string(t.to) + "\n";
    }
  }
  return out + "--END--\n";
}

std::string to_hoa(const ParityAutomaton& a, const std::string& name, std::size_t letters) {
  std::string out = hoa_header(name, a.size(), a.initial, letters);
  const unsigned sets = a.max_priority + 1;
  // min even: Inf(0) | (Fin(1) & (Inf(2) | (Fin(3) & ...)))
  std::string cond;
  for (unsigned p = sets; p-- > 0;) {
    std::string atom = (p % 2 == 0 ? "Inf(" : "Fin(") + std::to_string(p) + ")";
    if (cond.empty()) {
      cond = atom;
    } else {
      cond = atom + (p % 2 == 0 ? " | (" : " & (") + cond + ")";
    }
  }
  out += "acc-name: parity min even " + std::to_string(sets) + "\nAcceptance: " + std::to_string(sets) +
         " " + cond + "\nproperties: trans-acc\n--BODY--\n";
  for (std::size_t s = 0; s < a.size(); ++s) {
    out += "State: " + std::to_string(s) + " " + quote(a.labels[s]) + "\n";
    for (const Transition& t : a.transitions) {
      if (t.from == s) {
        out += "[@e" + std::to_string(t.letter) + "] " + std::to_string(t.to) + " {" +
               std::to_string(t.priority) + "}\n";
      }
    }
  }
  return out + "--END--\n";
}

}  // namespace pilin
