#include "pilin/process.hpp"

#include <algorithm>
#include <set>

namespace pilin {

std::string_view to_string(ProcessKind kind) {
  switch (kind) {
    case ProcessKind::Link: return "link";
    case ProcessKind::Fail: return "fail";
    case ProcessKind::Close: return "close";
    case ProcessKind::Wait: return "wait";
    case ProcessKind::Join: return "join";
    case ProcessKind::Fork: return "fork";
    case ProcessKind::Select: return "select";
    case ProcessKind::Case: return "case";
    case ProcessKind::Rec: return "rec";
    case ProcessKind::Corec: return "corec";
    case ProcessKind::Cut: return "cut";
    case ProcessKind::Choice: return "choice";
    case ProcessKind::Call: return "call";
  }
  return "?";
}

std::string_view to_string(Tag tag) { return tag == Tag::In1 ? "in1" : "in2"; }

namespace {

using NameSet = std::vector<Name>;

void insert_sorted(NameSet& set, const Name& n) {
  auto it = std::lower_bound(set.begin(), set.end(), n);
  if (it == set.end() || *it != n) set.insert(it, n);
}

NameSet without(const NameSet& set, const Name& a, const Name& b = {}) {
  NameSet out;
  out.reserve(set.size());
  for (const Name& n : set) {
    if (n != a && (b.empty() || n != b)) out.push_back(n);
  }
  return out;
}

NameSet unite(const NameSet& a, const NameSet& b) {
  NameSet out;
  out.reserve(a.size() + b.size());
  std::set_union(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
  return out;
}

}  // namespace

Process Process::make(Node n) {
  NameSet fv;
  switch (n.kind) {
    case ProcessKind::Link:
      insert_sorted(fv, n.x);
      insert_sorted(fv, n.y);
      break;
    case ProcessKind::Fail:
    case ProcessKind::Close:
      fv.push_back(n.x);
      break;
    case ProcessKind::Wait:
      fv = n.left.free_names();
      insert_sorted(fv, n.x);
      break;
    case ProcessKind::Join:
      fv = without(n.left.free_names(), n.y, n.z);
      insert_sorted(fv, n.x);
      break;
    case ProcessKind::Fork:
      fv = unite(without(n.left.free_names(), n.y), without(n.right.free_names(), n.z));
      insert_sorted(fv, n.x);
      break;
    case ProcessKind::Select:
    case ProcessKind::Rec:
    case ProcessKind::Corec:
      fv = without(n.left.free_names(), n.y);
      insert_sorted(fv, n.x);
      break;
    case ProcessKind::Case:
      fv = unite(without(n.left.free_names(), n.y), without(n.right.free_names(), n.y));
      insert_sorted(fv, n.x);
      break;
    case ProcessKind::Cut:
      fv = without(unite(n.left.free_names(), n.right.free_names()), n.x);
      break;
    case ProcessKind::Choice:
      fv = unite(n.left.free_names(), n.right.free_names());
      break;
    case ProcessKind::Call:
      for (const Name& a : n.args) insert_sorted(fv, a);
      break;
  }
  n.free = std::move(fv);
  Process p;
  p.node_ = std::make_shared<const Node>(std::move(n));
  return p;
}

#define PILIN_NODE(k)  \
  Node n;              \
  n.kind = ProcessKind::k; \
  n.loc = loc

Process Process::link(Name x, Name y, SourceLoc loc) {
  PILIN_NODE(Link);
  n.x = std::move(x);
  n.y = std::move(y);
  return make(std::move(n));
}

Process Process::fail(Name x, SourceLoc loc) {
  PILIN_NODE(Fail);
  n.x = std::move(x);
  return make(std::move(n));
}

Process Process::close(Name x, SourceLoc loc) {
  PILIN_NODE(Close);
  n.x = std::move(x);
  return make(std::move(n));
}

Process Process::wait(Name x, Process body, SourceLoc loc) {
  PILIN_NODE(Wait);
  n.x = std::move(x);
  n.left = std::move(body);
  return make(std::move(n));
}

Process Process::join(Name x, Name y, Name z, Process body, SourceLoc loc) {
  PILIN_NODE(Join);
  n.x = std::move(x);
  n.y = std::move(y);
  n.z = std::move(z);
  n.left = std::move(body);
  return make(std::move(n));
}

Process Process::fork(Name x, Name y, Name z, Process left, Process right, SourceLoc loc) {
  PILIN_NODE(Fork);
  n.x = std::move(x);
  n.y = std::move(y);
  n.z = std::move(z);
  n.left = std::move(left);
  n.right = std::move(right);
  return make(std::move(n));
}

Process Process::select(Name x, Tag tag, Name y, Process body, SourceLoc loc) {
  PILIN_NODE(Select);
  n.x = std::move(x);
  n.tag = tag;
  n.y = std::move(y);
  n.left = std::move(body);
  return make(std::move(n));
}

Process Process::case_of(Name x, Name y, Process left, Process right, SourceLoc loc) {
  PILIN_NODE(Case);
  n.x = std::move(x);
  n.y = std::move(y);
  n.left = std::move(left);
  n.right = std::move(right);
  return make(std::move(n));
}

Process Process::rec(Name x, Name y, Process body, SourceLoc loc) {
  PILIN_NODE(Rec);
  n.x = std::move(x);
  n.y = std::move(y);
  n.left = std::move(body);
  return make(std::move(n));
}

Process Process::corec(Name x, Name y, Process body, SourceLoc loc) {
  PILIN_NODE(Corec);
  n.x = std::move(x);
  n.y = std::move(y);
  n.left = std::move(body);
  return make(std::move(n));
}

Process Process::cut(Name x, Formula annotation, Process left, Process right, SourceLoc loc) {
  PILIN_NODE(Cut);
  n.x = std::move(x);
  n.annotation = std::move(annotation);
  n.left = std::move(left);
  n.right = std::move(right);
  return make(std::move(n));
}

Process Process::choice(Process left, Process right, SourceLoc loc) {
  PILIN_NODE(Choice);
  n.left = std::move(left);
  n.right = std::move(right);
  return make(std::move(n));
}

Process Process::call(std::string callee, std::vector<Name> args, SourceLoc loc) {
  PILIN_NODE(Call);
  n.callee = std::move(callee);
  n.args = std::move(args);
  return make(std::move(n));
}

#undef PILIN_NODE

bool Process::has_free(std::string_view name) const {
  const auto& fv = node_->free;
  auto it = std::lower_bound(fv.begin(), fv.end(), name,
                             [](const Name& a, std::string_view b) { return a < b; });
  return it != fv.end() && *it == name;
}

bool Process::is_prefix() const {
  switch (kind()) {
    case ProcessKind::Wait:
    case ProcessKind::Join:
    case ProcessKind::Select:
    case ProcessKind::Rec:
    case ProcessKind::Corec:
      return true;
    default:
      return false;
  }
}

std::vector<Name> free_names(const Process& p) { return p.free_names(); }

Name fresh_name(const Name& hint, const std::vector<Name>& avoid) {
  Name base = hint;
  while (!base.empty() && std::isdigit(static_cast<unsigned char>(base.back()))) base.pop_back();
  if (base.empty()) base = "c";
  for (std::size_t i = 1;; ++i) {
    Name candidate = base + std::to_string(i);
    if (std::find(avoid.begin(), avoid.end(), candidate) == avoid.end()) return candidate;
  }
}

// ---------------------------------------------------------------------------
// Renaming

namespace {

using Renaming = std::map<Name, Name>;

Name renamed(const Renaming& r, const Name& n) {
  auto it = r.find(n);
  return it == r.end() ? n : it->second;
}

// Drops entries that cannot matter inside `scopes`.
Renaming restrict_to(const Renaming& r, std::initializer_list<const Process*> scopes) {
  Renaming out;
  for (const auto& [from, to] : r) {
    for (const Process* s : scopes) {
      if (s->has_free(from)) {
        out.emplace(from, to);
        break;
      }
    }
  }
  return out;
}

// Enters the scope of `binder`. Returns the binder's new name and updates
// `r` so that it is correct under the binder.
Name enter(const Name& binder, Renaming& r, std::initializer_list<const Process*> scopes,
           const std::vector<Name>& also_avoid) {
  r.erase(binder);
  r = restrict_to(r, scopes);
  bool captured = false;
  for (const auto& [from, to] : r) {
    if (to == binder) captured = true;
  }
  if (!captured) return binder;
  std::vector<Name> avoid = also_avoid;
  for (const Process* s : scopes) {
    avoid.insert(avoid.end(), s->free_names().begin(), s->free_names().end());
  }
  for (const auto& [from, to] : r) {
    avoid.push_back(from);
    avoid.push_back(to);
  }
  Name fresh = fresh_name(binder, avoid);
  r[binder] = fresh;
  return fresh;
}

Process rename_impl(const Process& p, const Renaming& outer) {
  Renaming r;
  for (const auto& [from, to] : outer) {
    if (from != to && p.has_free(from)) r.emplace(from, to);
  }
  if (r.empty()) return p;
  const SourceLoc loc = p.loc();
  switch (p.kind()) {
    case ProcessKind::Link:
      return Process::link(renamed(r, p.x()), renamed(r, p.y()), loc);
    case ProcessKind::Fail:
      return Process::fail(renamed(r, p.x()), loc);
    case ProcessKind::Close:
      return Process::close(renamed(r, p.x()), loc);
    case ProcessKind::Wait:
      return Process::wait(renamed(r, p.x()), rename_impl(p.body(), r), loc);
    case ProcessKind::Join: {
      Renaming inner = r;
      Name y = enter(p.y(), inner, {&p.body()}, {p.y(), p.z()});
      Name z = enter(p.z(), inner, {&p.body()}, {p.y(), p.z(), y});
      if (y == z) throw Error("internal: join binders collided during renaming");
      return Process::join(renamed(r, p.x()), y, z, rename_impl(p.body(), inner), loc);
    }
    case ProcessKind::Fork: {
      Renaming left = r;
      Renaming right = r;
      Name y = enter(p.y(), left, {&p.left()}, {});
      Name z = enter(p.z(), right, {&p.right()}, {});
      return Process::fork(renamed(r, p.x()), y, z, rename_impl(p.left(), left),
                           rename_impl(p.right(), right), loc);
    }
    case ProcessKind::Select: {
      Renaming inner = r;
      Name y = enter(p.y(), inner, {&p.body()}, {});
      return Process::select(renamed(r, p.x()), p.tag(), y, rename_impl(p.body(), inner), loc);
    }
    case ProcessKind::Rec:
    case ProcessKind::Corec: {
      Renaming inner = r;
      Name y = enter(p.y(), inner, {&p.body()}, {});
      Process body = rename_impl(p.body(), inner);
      return p.kind() == ProcessKind::Rec ? Process::rec(renamed(r, p.x()), y, body, loc)
                                          : Process::corec(renamed(r, p.x()), y, body, loc);
    }
    case ProcessKind::Case: {
      Renaming inner = r;
      Name y = enter(p.y(), inner, {&p.left(), &p.right()}, {});
      return Process::case_of(renamed(r, p.x()), y, rename_impl(p.left(), inner),
                              rename_impl(p.right(), inner), loc);
    }
    case ProcessKind::Cut: {
      Renaming inner = r;
      Name x = enter(p.x(), inner, {&p.left(), &p.right()}, {});
      return Process::cut(x, p.annotation(), rename_impl(p.left(), inner),
                          rename_impl(p.right(), inner), loc);
    }
    case ProcessKind::Choice:
      return Process::choice(rename_impl(p.left(), r), rename_impl(p.right(), r), loc);
    case ProcessKind::Call: {
      std::vector<Name> args;
      args.reserve(p.args().size());
      for (const Name& a : p.args()) args.push_back(renamed(r, a));
      return Process::call(p.callee(), std::move(args), loc);
    }
  }
  return p;
}

}  // namespace

Process rename(const Process& p, const std::map<Name, Name>& renaming) {
  return rename_impl(p, renaming);
}

Process substitute(const Process& p, const Name& new_name, const Name& old_name) {
  return rename_impl(p, Renaming{{old_name, new_name}});
}

// ---------------------------------------------------------------------------
// Alpha equivalence

namespace {

struct AlphaEnv {
  std::vector<std::pair<Name, Name>> bound;

  static int lookup(const std::vector<std::pair<Name, Name>>& env, const Name& n, bool left) {
    for (int i = static_cast<int>(env.size()) - 1; i >= 0; --i) {
      const auto& e = env[static_cast<std::size_t>(i)];
      if ((left ? e.first : e.second) == n) return i;
    }
    return -1;
  }

  bool same(const Name& a, const Name& b) const {
    int ia = lookup(bound, a, true);
    int ib = lookup(bound, b, false);
    if (ia != ib) return false;
    return ia >= 0 || a == b;
  }
};

bool alpha(const Process& p, const Process& q, AlphaEnv& env);

bool alpha_under(const Process& p, const Process& q, AlphaEnv& env,
                 std::initializer_list<std::pair<Name, Name>> binders) {
  for (const auto& b : binders) env.bound.push_back(b);
  bool ok = alpha(p, q, env);
  env.bound.resize(env.bound.size() - binders.size());
  return ok;
}

bool alpha(const Process& p, const Process& q, AlphaEnv& env) {
  if (p.kind() != q.kind()) return false;
  switch (p.kind()) {
    case ProcessKind::Link:
      return env.same(p.x(), q.x()) && env.same(p.y(), q.y());
    case ProcessKind::Fail:
    case ProcessKind::Close:
      return env.same(p.x(), q.x());
    case ProcessKind::Wait:
      return env.same(p.x(), q.x()) && alpha(p.body(), q.body(), env);
    case ProcessKind::Join:
      return env.same(p.x(), q.x()) &&
             alpha_under(p.body(), q.body(), env, {{p.y(), q.y()}, {p.z(), q.z()}});
    case ProcessKind::Fork:
      return env.same(p.x(), q.x()) && alpha_under(p.left(), q.left(), env, {{p.y(), q.y()}}) &&
             alpha_under(p.right(), q.right(), env, {{p.z(), q.z()}});
    case ProcessKind::Select:
      return p.tag() == q.tag() && env.same(p.x(), q.x()) &&
             alpha_under(p.body(), q.body(), env, {{p.y(), q.y()}});
    case ProcessKind::Rec:
    case ProcessKind::Corec:
      return env.same(p.x(), q.x()) && alpha_under(p.body(), q.body(), env, {{p.y(), q.y()}});
    case ProcessKind::Case:
      return env.same(p.x(), q.x()) && alpha_under(p.left(), q.left(), env, {{p.y(), q.y()}}) &&
             alpha_under(p.right(), q.right(), env, {{p.y(), q.y()}});
    case ProcessKind::Cut:
      return p.annotation() == q.annotation() &&
             alpha_under(p.left(), q.left(), env, {{p.x(), q.x()}}) &&
             alpha_under(p.right(), q.right(), env, {{p.x(), q.x()}});
    case ProcessKind::Choice:
      return alpha(p.left(), q.left(), env) && alpha(p.right(), q.right(), env);
    case ProcessKind::Call:
      if (p.callee() != q.callee() || p.args().size() != q.args().size()) return false;
      for (std::size_t i = 0; i < p.args().size(); ++i) {
        if (!env.same(p.args()[i], q.args()[i])) return false;
      }
      return true;
  }
  return false;
}

}  // namespace

bool alpha_equal(const Process& p, const Process& q) {
  AlphaEnv env;
  return alpha(p, q, env);
}

// ---------------------------------------------------------------------------
// Programs

void Program::add(Definition def) {
  if (index_.contains(def.name)) {
    throw Error(to_string(def.loc) + ": duplicate definition '" + def.name + "'");
  }
  index_.emplace(def.name, defs_.size());
  defs_.push_back(std::move(def));
}

const Definition* Program::find(std::string_view name) const {
  auto it = index_.find(std::string(name));
  return it == index_.end() ? nullptr : &defs_[it->second];
}

const Definition& Program::at(std::string_view name) const {
  const Definition* d = find(name);
  if (!d) throw UnknownDefinition("unknown definition '" + std::string(name) + "'");
  return *d;
}

Process unfold_call(const Program& prog, std::string_view name, const std::vector<Name>& args) {
  const Definition& def = prog.at(name);
  if (def.arity() != args.size()) {
    throw ArityMismatch("'" + def.name + "' expects " + std::to_string(def.arity()) +
                        " argument(s), got " + std::to_string(args.size()));
  }
  Renaming r;
  for (std::size_t i = 0; i < args.size(); ++i) r.emplace(def.params[i].name, args[i]);
  return rename_impl(def.body, r);
}

bool absorbs_unused(const Process& p) {
  switch (p.kind()) {
    case ProcessKind::Fail: return true;
    case ProcessKind::Link:
    case ProcessKind::Close:
    case ProcessKind::Call: return false;
    case ProcessKind::Case:
    case ProcessKind::Choice: return absorbs_unused(p.left()) && absorbs_unused(p.right());
    case ProcessKind::Fork:
    case ProcessKind::Cut: return absorbs_unused(p.left()) || absorbs_unused(p.right());
    default: return absorbs_unused(p.body());
  }
}

std::string_view to_string(DiagnosticKind kind) {
  switch (kind) {
    case DiagnosticKind::ForkLeftUsesRight: return "fork-left-uses-right";
    case DiagnosticKind::ForkRightUsesLeft: return "fork-right-uses-left";
    case DiagnosticKind::DuplicateBinder: return "duplicate-binder";
    case DiagnosticKind::UnknownDefinition: return "unknown-definition";
    case DiagnosticKind::ArityMismatch: return "arity-mismatch";
    case DiagnosticKind::UnboundName: return "unbound-name";
    case DiagnosticKind::OpenFormula: return "open-formula";
    case DiagnosticKind::MissingMain: return "missing-main";
  }
  return "?";
}

std::string to_string(const Diagnostic& d) {
  std::string out = to_string(d.loc) + ": " + std::string(to_string(d.kind));
  if (!d.definition.empty()) out += " in " + d.definition;
  return out + ": " + d.message;
}

namespace {

class WellFormed {
 public:
  WellFormed(const Program& prog, std::vector<Diagnostic>& out) : prog_(prog), out_(out) {}

  void definition(const Definition& def) {
    def_ = def.name;
    std::set<Name> params;
    for (const Parameter& p : def.params) {
      if (!params.insert(p.name).second) {
        report(DiagnosticKind::DuplicateBinder, p.loc, "parameter '" + p.name + "' repeated");
      }
      if (!p.type || !p.type.is_closed()) {
        report(DiagnosticKind::OpenFormula, p.loc, "type of '" + p.name + "' is not closed");
      }
    }
    for (const Name& n : def.body.free_names()) {
      if (!params.contains(n)) {
        report(DiagnosticKind::UnboundName, def.body.loc(),
               "'" + n + "' is free in the body but is not a parameter");
      }
    }
    visit(def.body);
  }

 private:
  void report(DiagnosticKind kind, SourceLoc loc, std::string message) {
    out_.push_back(Diagnostic{kind, loc, def_, std::move(message)});
  }

  void visit(const Process& p) {
    switch (p.kind()) {
      case ProcessKind::Fork:
        if (p.left().has_free(p.z())) {
          report(DiagnosticKind::ForkLeftUsesRight, p.loc(),
                 "'" + p.z() + "' is free in the left process of a send on '" + p.x() + "'");
        }
        if (p.right().has_free(p.y())) {
          report(DiagnosticKind::ForkRightUsesLeft, p.loc(),
                 "'" + p.y() + "' is free in the right process of a send on '" + p.x() + "'");
        }
        break;
      case ProcessKind::Join:
        if (p.y() == p.z()) {
          report(DiagnosticKind::DuplicateBinder, p.loc(),
                 "receive on '" + p.x() + "' binds '" + p.y() + "' twice");
        }
        break;
      case ProcessKind::Cut:
        if (!p.annotation() || !p.annotation().is_closed()) {
          report(DiagnosticKind::OpenFormula, p.loc(),
                 "annotation of '" + p.x() + "' is not closed");
        }
        break;
      case ProcessKind::Call: {
        const Definition* d = prog_.find(p.callee());
        if (!d) {
          report(DiagnosticKind::UnknownDefinition, p.loc(), "unknown definition '" + p.callee() + "'");
        } else if (d->arity() != p.args().size()) {
          report(DiagnosticKind::ArityMismatch, p.loc(),
                 "'" + p.callee() + "' expects " + std::to_string(d->arity()) + " argument(s), got " +
                     std::to_string(p.args().size()));
        }
        break;
      }
      default:
        break;
    }
    if (p.kind() == ProcessKind::Call) return;
    if (p.left()) visit(p.left());
    if (p.right()) visit(p.right());
  }

  const Program& prog_;
  std::vector<Diagnostic>& out_;
  std::string def_;
};

}  // namespace

std::vector<Diagnostic> check_well_formed(const Program& prog) {
  std::vector<Diagnostic> out;
  WellFormed wf(prog, out);
  for (const Definition& d : prog.definitions()) wf.definition(d);
  if (!prog.has_main()) out.push_back({DiagnosticKind::MissingMain, {1, 1}, "", "no definition named main"});
  return out;
}

}  // namespace pilin
