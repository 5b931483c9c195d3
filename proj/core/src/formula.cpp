#include "pilin/formula.hpp"

#include <algorithm>
#include <deque>
#include <functional>
#include <unordered_set>

namespace pilin {

std::string to_string(const SourceLoc& loc) {
  return std::to_string(loc.line) + ":" + std::to_string(loc.column);
}

namespace {

std::size_t mix(std::size_t seed, std::size_t value) {
  return seed ^ (value + 0x9e3779b97f4a7c15ULL + (seed << 6) + (seed >> 2));
}

}  // namespace

Formula::Node Formula::node_of(FormulaKind kind) {
  Node n;
  n.kind = kind;
  return n;
}

Formula Formula::make(Node node) {
  std::size_t h = static_cast<std::size_t>(node.kind) * 1315423911u;
  switch (node.kind) {
    case FormulaKind::BoundVar:
      h = mix(h, node.index);
      node.loose = node.index + 1;
      break;
    case FormulaKind::FreeVar:
      h = mix(h, std::hash<std::string>{}(node.name));
      node.has_free = true;
      break;
    case FormulaKind::Mu:
    case FormulaKind::Nu:
      h = mix(h, node.a.hash());
      node.size = 1 + node.a.size();
      node.loose = node.a.node_->loose > 0 ? node.a.node_->loose - 1 : 0;
      node.has_free = node.a.node_->has_free;
      break;
    case FormulaKind::Plus:
    case FormulaKind::With:
    case FormulaKind::Tensor:
    case FormulaKind::Par:
      h = mix(mix(h, node.a.hash()), node.b.hash());
      node.size = 1 + node.a.size() + node.b.size();
      node.loose = std::max(node.a.node_->loose, node.b.node_->loose);
      node.has_free = node.a.node_->has_free || node.b.node_->has_free;
      break;
    default:
      break;
  }
  node.hash = h;
  Formula f;
  f.node_ = std::make_shared<const Node>(std::move(node));
  return f;
}

Formula Formula::zero() { return make(node_of(FormulaKind::Zero)); }
Formula Formula::top() { return make(node_of(FormulaKind::Top)); }
Formula Formula::one() { return make(node_of(FormulaKind::One)); }
Formula Formula::bot() { return make(node_of(FormulaKind::Bot)); }

Formula Formula::binary(FormulaKind kind, const Formula& left, const Formula& right) {
  Node n = node_of(kind);
  n.a = left;
  n.b = right;
  return make(std::move(n));
}

Formula Formula::var(std::string_view name) {
  Node n = node_of(FormulaKind::FreeVar);
  n.name = std::string(name);
  return make(std::move(n));
}

Formula Formula::bound(std::uint32_t index) {
  Node n = node_of(FormulaKind::BoundVar);
  n.index = index;
  return make(std::move(n));
}

Formula Formula::binder(FormulaKind kind, std::string_view hint, const Formula& body) {
  Node n = node_of(kind);
  n.name = std::string(hint);
  n.a = body;
  return make(std::move(n));
}

namespace {

// Replace the free variable `var` by bound index `depth`.
Formula abstract(const Formula& f, std::string_view var, std::uint32_t depth) {
  switch (f.kind()) {
    case FormulaKind::FreeVar:
      return f.name() == var ? Formula::bound(depth) : f;
    case FormulaKind::Mu:
    case FormulaKind::Nu:
      return Formula::binder(f.kind(), f.name(), abstract(f.body(), var, depth + 1));
    case FormulaKind::Plus:
    case FormulaKind::With:
    case FormulaKind::Tensor:
    case FormulaKind::Par:
      return Formula::binary(f.kind(), abstract(f.left(), var, depth),
                             abstract(f.right(), var, depth));
    default:
      return f;
  }
}

// Replace bound index `depth` by the locally closed `replacement`, dropping
// one binder level.
Formula open(const Formula& f, const Formula& replacement, std::uint32_t depth) {
  switch (f.kind()) {
    case FormulaKind::BoundVar:
      if (f.index() == depth) return replacement;
      return f.index() > depth ? Formula::bound(f.index() - 1) : f;
    case FormulaKind::Mu:
    case FormulaKind::Nu:
      return Formula::binder(f.kind(), f.name(), open(f.body(), replacement, depth + 1));
    case FormulaKind::Plus:
    case FormulaKind::With:
    case FormulaKind::Tensor:
    case FormulaKind::Par:
      return Formula::binary(f.kind(), open(f.left(), replacement, depth),
                             open(f.right(), replacement, depth));
    default:
      return f;
  }
}

}  // namespace

Formula Formula::fixpoint(FormulaKind kind, std::string_view var, const Formula& body) {
  return binder(kind, var, abstract(body, var, 0));
}

Formula Formula::mu(std::string_view var, const Formula& body) {
  return fixpoint(FormulaKind::Mu, var, body);
}

Formula Formula::nu(std::string_view var, const Formula& body) {
  return fixpoint(FormulaKind::Nu, var, body);
}

bool Formula::is_binary() const {
  switch (kind()) {
    case FormulaKind::Plus:
    case FormulaKind::With:
    case FormulaKind::Tensor:
    case FormulaKind::Par:
      return true;
    default:
      return false;
  }
}

bool Formula::is_fixpoint() const { return kind() == FormulaKind::Mu || kind() == FormulaKind::Nu; }

bool Formula::is_constant() const {
  switch (kind()) {
    case FormulaKind::Zero:
    case FormulaKind::Top:
    case FormulaKind::One:
    case FormulaKind::Bot:
      return true;
    default:
      return false;
  }
}

bool Formula::is_positive() const {
  switch (kind()) {
    case FormulaKind::Zero:
    case FormulaKind::One:
    case FormulaKind::Plus:
    case FormulaKind::Tensor:
    case FormulaKind::Mu:
      return true;
    default:
      return false;
  }
}

bool operator==(const Formula& x, const Formula& y) {
  if (x.node_ == y.node_) return true;
  if (!x.node_ || !y.node_) return false;
  if (x.hash() != y.hash() || x.size() != y.size() || x.kind() != y.kind()) return false;
  switch (x.kind()) {
    case FormulaKind::BoundVar:
      return x.index() == y.index();
    case FormulaKind::FreeVar:
      return x.name() == y.name();
    case FormulaKind::Mu:
    case FormulaKind::Nu:
      return x.body() == y.body();
    case FormulaKind::Plus:
    case FormulaKind::With:
    case FormulaKind::Tensor:
    case FormulaKind::Par:
      return x.left() == y.left() && x.right() == y.right();
    default:
      return true;
  }
}

Formula dual(const Formula& f) {
  switch (f.kind()) {
    case FormulaKind::Zero: return Formula::top();
    case FormulaKind::Top: return Formula::zero();
    case FormulaKind::One: return Formula::bot();
    case FormulaKind::Bot: return Formula::one();
    case FormulaKind::Plus: return Formula::with(dual(f.left()), dual(f.right()));
    case FormulaKind::With: return Formula::plus(dual(f.left()), dual(f.right()));
    case FormulaKind::Tensor: return Formula::par(dual(f.left()), dual(f.right()));
    case FormulaKind::Par: return Formula::tensor(dual(f.left()), dual(f.right()));
    case FormulaKind::Mu: return Formula::binder(FormulaKind::Nu, f.name(), dual(f.body()));
    case FormulaKind::Nu: return Formula::binder(FormulaKind::Mu, f.name(), dual(f.body()));
    default: return f;
  }
}

Formula subst_formula(const Formula& body, std::string_view var, const Formula& replacement) {
  switch (body.kind()) {
    case FormulaKind::FreeVar:
      return body.name() == var ? replacement : body;
    case FormulaKind::Mu:
    case FormulaKind::Nu:
      return Formula::binder(body.kind(), body.name(), subst_formula(body.body(), var, replacement));
    case FormulaKind::Plus:
    case FormulaKind::With:
    case FormulaKind::Tensor:
    case FormulaKind::Par:
      return Formula::binary(body.kind(), subst_formula(body.left(), var, replacement),
                             subst_formula(body.right(), var, replacement));
    default:
      return body;
  }
}

Formula unfold(const Formula& fixpoint) {
  if (!fixpoint.is_fixpoint()) throw Error("unfold: not a fixed point: " + to_string(fixpoint));
  return open(fixpoint.body(), fixpoint, 0);
}

std::vector<Formula> formula_steps(const Formula& f) {
  if (f.is_binary()) return {f.left(), f.right()};
  if (f.is_fixpoint()) return {unfold(f)};
  return {};
}

bool subformula_leq(const Formula& f, const Formula& g) {
  if (f.size() > g.size()) return false;
  if (f == g) return true;
  if (g.is_binary()) return subformula_leq(f, g.left()) || subformula_leq(f, g.right());
  if (g.is_fixpoint()) return subformula_leq(f, g.body());
  return false;
}

std::optional<Formula> min_formula(std::span<const Formula> formulas) {
  for (const Formula& f : formulas) {
    bool least = std::all_of(formulas.begin(), formulas.end(),
                             [&](const Formula& g) { return subformula_leq(f, g); });
    if (least) return f;
  }
  return std::nullopt;
}

namespace {

int level(const Formula& f) {
  switch (f.kind()) {
    case FormulaKind::Mu:
    case FormulaKind::Nu: return 0;
    case FormulaKind::Plus:
    case FormulaKind::With: return 1;
    case FormulaKind::Tensor:
    case FormulaKind::Par: return 2;
    default: return 3;
  }
}

void collect_free(const Formula& f, std::unordered_set<std::string>& out) {
  if (f.kind() == FormulaKind::FreeVar) out.insert(f.name());
  if (f.is_binary()) {
    collect_free(f.left(), out);
    collect_free(f.right(), out);
  } else if (f.is_fixpoint()) {
    collect_free(f.body(), out);
  }
}

class Printer {
 public:
  explicit Printer(const Formula& root) { collect_free(root, free_); }

  void print(const Formula& f, std::string& out) {
    switch (f.kind()) {
      case FormulaKind::Zero: out += "0"; return;
      case FormulaKind::Top: out += "top"; return;
      case FormulaKind::One: out += "1"; return;
      case FormulaKind::Bot: out += "bot"; return;
      case FormulaKind::FreeVar: out += f.name(); return;
      case FormulaKind::BoundVar:
        if (f.index() < env_.size()) {
          out += env_[env_.size() - 1 - f.index()];
        } else {
          out += "?" + std::to_string(f.index());
        }
        return;
      case FormulaKind::Mu:
      case FormulaKind::Nu: {
        std::string name = f.name().empty() ? "X" : f.name();
        while (free_.contains(name) ||
               std::find(env_.begin(), env_.end(), name) != env_.end()) {
          name += "'";
        }
        out += f.kind() == FormulaKind::Mu ? "mu " : "nu ";
        out += name;
        out += ". ";
        env_.push_back(name);
        print(f.body(), out);
        env_.pop_back();
        return;
      }
      default:
        break;
    }
    const int lv = level(f);
    const char* op = f.kind() == FormulaKind::Plus     ? " + "
                     : f.kind() == FormulaKind::With   ? " & "
                     : f.kind() == FormulaKind::Tensor ? " * "
                                                       : " par ";
    child(f.left(), level(f.left()) < lv || f.left().is_fixpoint(), out);
    out += op;
    child(f.right(), level(f.right()) <= lv || f.right().is_fixpoint(), out);
  }

 private:
  void child(const Formula& f, bool parens, std::string& out) {
    if (parens) out += "(";
    print(f, out);
    if (parens) out += ")";
  }

  std::unordered_set<std::string> free_;
  std::vector<std::string> env_;
};

}  // namespace

std::string to_string(const Formula& f) {
  if (!f) return "<null>";
  std::string out;
  Printer(f).print(f, out);
  return out;
}

// ---------------------------------------------------------------------------

bool Address::prefix_of(const Address& other) const {
  return base == other.base && dualized == other.dualized &&
         other.word.size() >= word.size() && other.word.compare(0, word.size(), word) == 0;
}

std::string to_string(const Address& a) {
  return (a.dualized ? "~a" : "a") + std::to_string(a.base) + a.word;
}

Type dual(const Type& t) { return Type{dual(t.formula), t.address.dual()}; }

std::string to_string(const Type& t) { return to_string(t.formula) + " @ " + to_string(t.address); }

std::vector<Type> type_steps(const Type& t) {
  if (t.formula.is_binary()) {
    return {Type{t.formula.left(), t.address.extended('l')},
            Type{t.formula.right(), t.address.extended('r')}};
  }
  if (t.formula.is_fixpoint()) return {Type{unfold(t.formula), t.address.extended('i')}};
  return {};
}

std::optional<Type> compose_types(FormulaKind op, const Type& l, const Type& r) {
  const auto& lw = l.address.word;
  const auto& rw = r.address.word;
  if (lw.empty() || rw.empty() || lw.back() != 'l' || rw.back() != 'r') return std::nullopt;
  Address parent{l.address.base, l.address.dualized, lw.substr(0, lw.size() - 1)};
  if (parent != Address{r.address.base, r.address.dualized, rw.substr(0, rw.size() - 1)}) {
    return std::nullopt;
  }
  return Type{Formula::binary(op, l.formula, r.formula), parent};
}

std::optional<Type> fold_type(const Formula& fixpoint, const Type& unfolded) {
  const auto& w = unfolded.address.word;
  if (!fixpoint.is_fixpoint() || w.empty() || w.back() != 'i') return std::nullopt;
  if (unfold(fixpoint) != unfolded.formula) return std::nullopt;
  return Type{fixpoint, Address{unfolded.address.base, unfolded.address.dualized,
                                w.substr(0, w.size() - 1)}};
}

// ---------------------------------------------------------------------------

std::optional<std::size_t> Closure::index_of(const Formula& f) const {
  auto it = index_.find(f);
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

unsigned Closure::priority(const Formula& f) const {
  auto idx = index_of(f);
  if (!idx) throw FormulaNotInClosure("formula not in closure: " + to_string(f));
  return priorities_[*idx];
}

Closure closure_of(std::span<const Formula> seed) {
  Closure c;
  std::deque<Formula> work(seed.begin(), seed.end());
  while (!work.empty()) {
    Formula f = work.front();
    work.pop_front();
    if (c.index_.contains(f)) continue;
    c.index_.emplace(f, c.formulas_.size());
    c.formulas_.push_back(f);
    for (Formula& g : formula_steps(f)) work.push_back(std::move(g));
  }

  std::vector<std::pair<std::size_t, std::string>> keyed;
  std::vector<std::size_t> fixpoints;
  for (std::size_t i = 0; i < c.formulas_.size(); ++i) {
    if (c.formulas_[i].is_fixpoint()) fixpoints.push_back(i);
  }
  std::vector<std::string> printed(c.formulas_.size());
  for (std::size_t i : fixpoints) printed[i] = to_string(c.formulas_[i]);
  // Proper subformulas are strictly smaller, so sorting by size extends the
  // subformula order.
  std::sort(fixpoints.begin(), fixpoints.end(), [&](std::size_t a, std::size_t b) {
    const auto sa = c.formulas_[a].size();
    const auto sb = c.formulas_[b].size();
    if (sa != sb) return sa < sb;
    return printed[a] < printed[b];
  });
  c.priorities_.assign(c.formulas_.size(), c.neutral_priority());
  for (std::size_t rank = 0; rank < fixpoints.size(); ++rank) {
    const std::size_t i = fixpoints[rank];
    c.priorities_[i] =
        static_cast<unsigned>(2 * rank + (c.formulas_[i].kind() == FormulaKind::Nu ? 0 : 1));
  }
  return c;
}

}  // namespace pilin
