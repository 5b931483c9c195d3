#include "pilin/typeck.hpp"

#include <algorithm>
#include <deque>
#include <set>

#include "pilin/parser.hpp"

namespace pilin {

std::string_view to_string(Rule rule) {
  switch (rule) {
    case Rule::Ax: return "ax";
    case Rule::Cut: return "cut";
    case Rule::Top: return "top";
    case Rule::Bot: return "bot";
    case Rule::One: return "one";
    case Rule::Par: return "par";
    case Rule::Tensor: return "tensor";
    case Rule::With: return "with";
    case Rule::Plus: return "plus";
    case Rule::Nu: return "nu";
    case Rule::Mu: return "mu";
    case Rule::Choice: return "choice";
  }
  return "?";
}

std::string to_string(const Context& ctx) {
  std::string out;
  for (std::size_t i = 0; i < ctx.size(); ++i) {
    if (i) out += ", ";
    out += ctx[i].name + ": " + to_string(ctx[i].type.formula);
    if (!ctx[i].type.formula.is_constant()) out += " @ " + to_string(ctx[i].type.address);
  }
  return out;
}

std::vector<std::size_t> ProofGraph::reachable() const {
  std::vector<bool> seen(nodes.size(), false);
  std::deque<std::size_t> queue{root};
  seen[root] = true;
  while (!queue.empty()) {
    std::size_t n = queue.front();
    queue.pop_front();
    for (std::size_t e : nodes[n].premises) {
      std::size_t m = edges[e].to;
      if (!seen[m]) {
        seen[m] = true;
        queue.push_back(m);
      }
    }
  }
  std::vector<std::size_t> out;
  for (std::size_t n = 0; n < nodes.size(); ++n) {
    if (seen[n]) out.push_back(n);
  }
  return out;
}

namespace {

std::string formula_kind_name(FormulaKind k) {
  switch (k) {
    case FormulaKind::Top: return "top";
    case FormulaKind::One: return "1";
    case FormulaKind::Bot: return "bot";
    case FormulaKind::Plus: return "a + formula";
    case FormulaKind::With: return "a & formula";
    case FormulaKind::Tensor: return "a * formula";
    case FormulaKind::Par: return "a par formula";
    case FormulaKind::Mu: return "a mu formula";
    case FormulaKind::Nu: return "a nu formula";
    default: return "?";
  }
}

class Checker {
 public:
  explicit Checker(const Program& prog) : prog_(prog) {}

  ProofGraph finish(std::size_t root) {
    g_.root = root;
    std::vector<Formula> seed;
    for (const ProofNode& n : g_.nodes) {
      for (const Slot& s : n.context) seed.push_back(s.type.formula);
    }
    g_.closure = closure_of(seed);
    return std::move(g_);
  }

  // Root for the whole program: main first so its channels get base 0.
  std::size_t program_root() {
    if (!prog_.has_main()) throw UnknownDefinition("program has no main definition");
    Target t = entry(prog_.main_name());
    for (const Definition& d : prog_.definitions()) entry(d.name);
    return t.node;
  }

  std::size_t term_root(const Process& term, const std::vector<Parameter>& outer) {
    Context ctx;
    for (const Parameter& p : outer) ctx.push_back(Slot{p.name, Type{p.type, fresh_address()}});
    sort_context(ctx);
    return check(term, ctx, "").node;
  }

 private:
  struct Target {
    std::size_t node = 0;
    std::vector<int> map;  // slot of `node` -> slot of the context it was reached from
    bool call = false;
    std::string callee;
    Process call_term;
    Context call_context;
  };

  enum class EntryState { InProgressAlias, Done };

  struct Entry {
    EntryState state = EntryState::Done;
    Target target;  // map relative to the parameter context of the definition
    Context params;
  };

  static void sort_context(Context& ctx) {
    std::sort(ctx.begin(), ctx.end(), [](const Slot& a, const Slot& b) { return a.name < b.name; });
  }

  static int find(const Context& ctx, const Name& name) {
    for (std::size_t i = 0; i < ctx.size(); ++i) {
      if (ctx[i].name == name) return static_cast<int>(i);
    }
    return -1;
  }

  Address fresh_address() { return Address{next_base_++, false, ""}; }

  [[noreturn]] void fail(const std::string& def, const Process& p, Rule rule, const std::string& msg) const {
    throw IllTyped(def, p.loc(), std::string(to_string(rule)), msg);
  }
  [[noreturn]] void fail(const std::string& def, const Process& p, const std::string& rule,
                         const std::string& msg) const {
    throw IllTyped(def, p.loc(), rule, msg);
  }

  Context params_context(const Definition& d) {
    Context ctx;
    for (const Parameter& p : d.params) ctx.push_back(Slot{p.name, Type{p.type, fresh_address()}});
    sort_context(ctx);
    return ctx;
  }

  Target entry(const std::string& name) {
    auto it = entries_.find(name);
    if (it != entries_.end()) {
      if (it->second.state == EntryState::InProgressAlias) {
        throw UnproductiveCycle("definition '" + name +
                                "' reaches itself through calls alone, without any action");
      }
      return it->second.target;
    }
    const Definition& d = prog_.at(name);
    Context ctx = params_context(d);
    if (d.body.kind() == ProcessKind::Call) {
      entries_[name] = Entry{EntryState::InProgressAlias, {}, ctx};
      Target t = check_call(d.body, ctx, name);
      entries_[name] = Entry{EntryState::Done, t, ctx};
      return t;
    }
    const std::size_t id = new_node(d.body, ctx, name, true);
    Target t;
    t.node = id;
    for (std::size_t i = 0; i < ctx.size(); ++i) t.map.push_back(static_cast<int>(i));
    entries_[name] = Entry{EntryState::Done, t, ctx};
    g_.entries[name] = id;
    fill(id);
    return t;
  }

  Target check_call(const Process& p, const Context& ctx, const std::string& def) {
    const Definition* d = prog_.find(p.callee());
    if (!d) throw UnknownDefinition("unknown definition '" + p.callee() + "'");
    if (d->arity() != p.args().size()) {
      throw ArityMismatch("'" + p.callee() + "' expects " + std::to_string(d->arity()) +
                          " argument(s), got " + std::to_string(p.args().size()));
    }
    std::set<Name> args(p.args().begin(), p.args().end());
    std::set<Name> names;
    for (const Slot& s : ctx) names.insert(s.name);
    if (args.size() != p.args().size() || args != names) {
      fail(def, p, "call",
           "call " + print_process(p) + " does not use exactly the channels in context {" +
               to_string(ctx) + "}");
    }
    for (std::size_t i = 0; i < p.args().size(); ++i) {
      const Formula& actual = ctx[static_cast<std::size_t>(find(ctx, p.args()[i]))].type.formula;
      if (actual != d->params[i].type) {
        fail(def, p, "call",
             "argument '" + p.args()[i] + "' of " + p.callee() + " has type " + to_string(actual) +
                 " but parameter '" + d->params[i].name + "' expects " +
                 to_string(d->params[i].type));
      }
    }
    Target callee_entry = entry(p.callee());
    const Context& params = entries_[p.callee()].params;
    Target t;
    t.node = callee_entry.node;
    t.call = true;
    t.callee = p.callee();
    t.call_term = p;
    t.call_context = ctx;
    for (int param_slot : callee_entry.map) {
      const Name& param = params[static_cast<std::size_t>(param_slot)].name;
      std::size_t j = 0;
      while (d->params[j].name != param) ++j;
      t.map.push_back(find(ctx, p.args()[j]));
    }
    return t;
  }

  Target check(const Process& p, const Context& ctx, const std::string& def) {
    if (p.kind() == ProcessKind::Call) return check_call(p, ctx, def);
    Target t;
    t.node = new_node(p, ctx, def, false);
    for (std::size_t i = 0; i < ctx.size(); ++i) t.map.push_back(static_cast<int>(i));
    fill(t.node);
    return t;
  }

  std::size_t new_node(const Process& p, const Context& ctx, const std::string& def, bool is_entry) {
    for (std::size_t i = 0; i < ctx.size(); ++i) {
      for (std::size_t j = i + 1; j < ctx.size(); ++j) {
        if (!ctx[i].type.address.disjoint(ctx[j].type.address)) {
          throw AddressClash("addresses of '" + ctx[i].name + "' and '" + ctx[j].name +
                             "' overlap in context {" + to_string(ctx) + "}");
        }
      }
    }
    ProofNode n;
    n.id = g_.nodes.size();
    n.process = p;
    n.context = ctx;
    n.definition = def;
    n.entry = is_entry;
    g_.nodes.push_back(std::move(n));
    return g_.nodes.size() - 1;
  }

  // A premise under construction: slots paired with their ancestors.
  struct Premise {
    Process process;
    std::vector<std::pair<Slot, Ancestor>> slots;

    void add(Slot s, Ancestor a) { slots.emplace_back(std::move(s), a); }
  };

  void add_premise(std::size_t from, Premise premise, const std::string& def) {
    std::sort(premise.slots.begin(), premise.slots.end(),
              [](const auto& a, const auto& b) { return a.first.name < b.first.name; });
    Context ctx;
    std::vector<Ancestor> anc;
    for (auto& [slot, a] : premise.slots) {
      ctx.push_back(slot);
      anc.push_back(a);
    }
    Target t = check(premise.process, ctx, def);
    ProofEdge e;
    e.id = g_.edges.size();
    e.from = from;
    e.to = t.node;
    e.premise = g_.nodes[from].premises.size();
    for (int s : t.map) e.ancestry.push_back(anc[static_cast<std::size_t>(s)]);
    e.call = t.call;
    e.callee = t.callee;
    e.call_term = t.call_term;
    e.call_context = t.call_context;
    g_.nodes[from].premises.push_back(e.id);
    g_.edges.push_back(std::move(e));
  }

  // Context without slot `skip`, with stationary ancestry.
  static Premise rest(const Context& ctx, int skip) {
    Premise p;
    for (std::size_t i = 0; i < ctx.size(); ++i) {
      if (static_cast<int>(i) != skip) p.add(ctx[i], Ancestor{static_cast<int>(i), false});
    }
    return p;
  }

  // Renames `binder` inside `scope` when it clashes with a name of `ctx`.
  static Name unclash(const Name& binder, Process& scope, const Context& ctx, int skip,
                      const std::vector<Name>& also_avoid = {}) {
    bool clash = false;
    for (std::size_t i = 0; i < ctx.size(); ++i) {
      if (static_cast<int>(i) != skip && ctx[i].name == binder) clash = true;
    }
    if (!clash) return binder;
    std::vector<Name> avoid = scope.free_names();
    for (const Slot& s : ctx) avoid.push_back(s.name);
    avoid.insert(avoid.end(), also_avoid.begin(), also_avoid.end());
    Name fresh = fresh_name(binder, avoid);
    scope = substitute(scope, fresh, binder);
    return fresh;
  }

  int principal(std::size_t id, FormulaKind want, Rule rule) {
    const ProofNode& n = g_.nodes[id];
    const std::string& x = n.process.x();
    int s = find(n.context, x);
    if (s < 0) fail(n.definition, n.process, rule, "'" + x + "' is not in context {" + to_string(n.context) + "}");
    const Formula& f = n.context[static_cast<std::size_t>(s)].type.formula;
    if (f.kind() != want) {
      fail(n.definition, n.process, rule,
           "'" + x + "' should have " + formula_kind_name(want) + " type but has " + to_string(f));
    }
    return s;
  }

  // Splits the context minus `skip` between two processes by free names.
  std::pair<Premise, Premise> split(std::size_t id, int skip, const Process& left,
                                    const Process& right, Rule rule) {
    const ProofNode& n = g_.nodes[id];
    Premise l, r;
    l.process = left;
    r.process = right;
    const bool left_absorbs = absorbs_unused(left) || !absorbs_unused(right);
    for (std::size_t i = 0; i < n.context.size(); ++i) {
      if (static_cast<int>(i) == skip) continue;
      const Slot& s = n.context[i];
      const bool in_l = left.has_free(s.name);
      const bool in_r = right.has_free(s.name);
      if (in_l && in_r) {
        fail(n.definition, n.process, rule, "'" + s.name + "' is used by both parallel processes");
      }
      Ancestor a{static_cast<int>(i), false};
      if (in_l || (!in_r && left_absorbs)) {
        l.add(s, a);
      } else {
        r.add(s, a);
      }
    }
    return {std::move(l), std::move(r)};
  }

  void fill(std::size_t id) {
    const Process p = g_.nodes[id].process;
    const Context ctx = g_.nodes[id].context;
    const std::string def = g_.nodes[id].definition;
    auto set_rule = [&](Rule r) { g_.nodes[id].rule = r; };

    switch (p.kind()) {
      case ProcessKind::Link: {
        set_rule(Rule::Ax);
        int sx = find(ctx, p.x());
        int sy = find(ctx, p.y());
        if (p.x() == p.y() || ctx.size() != 2 || sx < 0 || sy < 0) {
          fail(def, p, Rule::Ax, "link needs exactly its two channels in context, found {" + to_string(ctx) + "}");
        }
        const Formula& fx = ctx[static_cast<std::size_t>(sx)].type.formula;
        const Formula& fy = ctx[static_cast<std::size_t>(sy)].type.formula;
        if (fx != dual(fy)) {
          fail(def, p, Rule::Ax, "linked channels have non-dual types " + to_string(fx) + " and " + to_string(fy));
        }
        return;
      }
      case ProcessKind::Fail:
        set_rule(Rule::Top);
        principal(id, FormulaKind::Top, Rule::Top);
        return;
      case ProcessKind::Close: {
        set_rule(Rule::One);
        principal(id, FormulaKind::One, Rule::One);
        if (ctx.size() != 1) {
          fail(def, p, Rule::One, "close leaves channels unused in context {" + to_string(ctx) + "}");
        }
        return;
      }
      case ProcessKind::Wait: {
        set_rule(Rule::Bot);
        int sx = principal(id, FormulaKind::Bot, Rule::Bot);
        Premise pr = rest(ctx, sx);
        pr.process = p.body();
        add_premise(id, std::move(pr), def);
        return;
      }
      case ProcessKind::Join: {
        set_rule(Rule::Par);
        int sx = principal(id, FormulaKind::Par, Rule::Par);
        Process body = p.body();
        Name y = unclash(p.y(), body, ctx, sx, {p.z()});
        Name z = unclash(p.z(), body, ctx, sx, {y});
        auto steps = type_steps(ctx[static_cast<std::size_t>(sx)].type);
        Premise pr = rest(ctx, sx);
        pr.process = body;
        pr.add(Slot{y, steps[0]}, Ancestor{sx, true});
        pr.add(Slot{z, steps[1]}, Ancestor{sx, true});
        add_premise(id, std::move(pr), def);
        return;
      }
      case ProcessKind::Fork: {
        set_rule(Rule::Tensor);
        int sx = principal(id, FormulaKind::Tensor, Rule::Tensor);
        Process left = p.left();
        Process right = p.right();
        Name y = unclash(p.y(), left, ctx, sx);
        Name z = unclash(p.z(), right, ctx, sx);
        auto steps = type_steps(ctx[static_cast<std::size_t>(sx)].type);
        auto [l, r] = split(id, sx, left, right, Rule::Tensor);
        l.add(Slot{y, steps[0]}, Ancestor{sx, true});
        r.add(Slot{z, steps[1]}, Ancestor{sx, true});
        add_premise(id, std::move(l), def);
        add_premise(id, std::move(r), def);
        return;
      }
      case ProcessKind::Select: {
        set_rule(Rule::Plus);
        int sx = principal(id, FormulaKind::Plus, Rule::Plus);
        Process body = p.body();
        Name y = unclash(p.y(), body, ctx, sx);
        auto steps = type_steps(ctx[static_cast<std::size_t>(sx)].type);
        Premise pr = rest(ctx, sx);
        pr.process = body;
        pr.add(Slot{y, steps[p.tag() == Tag::In1 ? 0 : 1]}, Ancestor{sx, true});
        add_premise(id, std::move(pr), def);
        return;
      }
      case ProcessKind::Case: {
        set_rule(Rule::With);
        int sx = principal(id, FormulaKind::With, Rule::With);
        Process left = p.left();
        Process right = p.right();
        Name y = unclash(p.y(), left, ctx, sx);
        if (y != p.y()) right = substitute(right, y, p.y());
        auto steps = type_steps(ctx[static_cast<std::size_t>(sx)].type);
        for (int branch = 0; branch < 2; ++branch) {
          Premise pr = rest(ctx, sx);
          pr.process = branch == 0 ? left : right;
          pr.add(Slot{y, steps[static_cast<std::size_t>(branch)]}, Ancestor{sx, true});
          add_premise(id, std::move(pr), def);
        }
        return;
      }
      case ProcessKind::Rec:
      case ProcessKind::Corec: {
        const bool least = p.kind() == ProcessKind::Rec;
        const Rule rule = least ? Rule::Mu : Rule::Nu;
        set_rule(rule);
        int sx = principal(id, least ? FormulaKind::Mu : FormulaKind::Nu, rule);
        Process body = p.body();
        Name y = unclash(p.y(), body, ctx, sx);
        auto steps = type_steps(ctx[static_cast<std::size_t>(sx)].type);
        Premise pr = rest(ctx, sx);
        pr.process = body;
        pr.add(Slot{y, steps[0]}, Ancestor{sx, true});
        add_premise(id, std::move(pr), def);
        return;
      }
      case ProcessKind::Cut: {
        set_rule(Rule::Cut);
        Process left = p.left();
        Process right = p.right();
        Name x = unclash(p.x(), left, ctx, -1);
        if (x != p.x()) right = substitute(right, x, p.x());
        auto [l, r] = split(id, -1, left, right, Rule::Cut);
        const Address a = fresh_address();
        l.add(Slot{x, Type{p.annotation(), a}}, Ancestor{});
        r.add(Slot{x, Type{dual(p.annotation()), a.dual()}}, Ancestor{});
        add_premise(id, std::move(l), def);
        add_premise(id, std::move(r), def);
        return;
      }
      case ProcessKind::Choice: {
        set_rule(Rule::Choice);
        for (const Process* branch : {&p.left(), &p.right()}) {
          Premise pr = rest(ctx, -1);
          pr.process = *branch;
          add_premise(id, std::move(pr), def);
        }
        return;
      }
      case ProcessKind::Call:
        break;
    }
    throw Error("internal: call reached node construction");
  }

  const Program& prog_;
  ProofGraph g_;
  std::uint32_t next_base_ = 0;
  std::map<std::string, Entry> entries_;
};

std::string clip(std::string s, std::size_t width) {
  if (s.size() <= width) return s;
  s.resize(width - 3);
  return s + "...";
}

void report_tree(const ProofGraph& g, std::size_t node, int depth, std::string& out) {
  const ProofNode& n = g.nodes[node];
  const std::string indent(static_cast<std::size_t>(depth) * 2, ' ');
  out += indent + "[" + std::string(to_string(n.rule)) + "] " + to_string(n.context) + " |- " +
         clip(print_process(n.process), 72) + "\n";
  for (std::size_t e : n.premises) {
    const ProofEdge& edge = g.edges[e];
    if (edge.call) {
      out += indent + "  " + to_string(edge.call_context) + " |- " + print_process(edge.call_term) +
             "  \xE2\x86\xA9 " + edge.callee + "\n";
    } else {
      report_tree(g, edge.to, depth + 1, out);
    }
  }
}

}  // namespace

ProofGraph check_program(const Program& prog) {
  Checker c(prog);
  std::size_t root = c.program_root();
  return c.finish(root);
}

ProofGraph check_term(const Program& prog, const Process& term, const std::vector<Parameter>& outer) {
  Checker c(prog);
  std::size_t root = c.term_root(term, outer);
  return c.finish(root);
}

std::optional<std::string> check_main_signature(const Program& prog) {
  if (!prog.has_main()) return "program has no main definition";
  const Definition& m = prog.main();
  if (m.params.size() != 1 || m.params[0].type != Formula::one()) {
    return "main must take exactly one parameter of type 1";
  }
  return std::nullopt;
}

std::string derivation_report(const ProofGraph& g) {
  std::string out;
  std::string root_def = g.nodes[g.root].definition;
  out += "root" + (root_def.empty() ? std::string() : " (" + root_def + ")") + ":\n";
  report_tree(g, g.root, 1, out);
  for (const auto& [name, node] : g.entries) {
    if (node == g.root) continue;
    out += "\n" + name + ":\n";
    report_tree(g, node, 1, out);
  }
  return out;
}

}  // namespace pilin
