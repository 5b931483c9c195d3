#pragma once

// Process terms, definitions and programs.
//
// Processes are immutable trees with shared children. Every node caches its
// sorted free-name set, so free-name queries during type checking are cheap.

#include <map>
#include <memory>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "pilin/error.hpp"
#include "pilin/formula.hpp"

namespace pilin {

using Name = std::string;

enum class ProcessKind : std::uint8_t {
  Link,    // link x y
  Fail,    // fail x
  Close,   // close x
  Wait,    // wait x. P
  Join,    // recv x (y, z). P        y: left component, z: right component
  Fork,    // send x (y, z) (P | Q)   y used by P, z used by Q
  Select,  // x.inI(y). P
  Case,    // case x (y) { in1: P; in2: Q }
  Rec,     // unfold x (y). P         least fixed point side
  Corec,   // rec x (y). P            greatest fixed point side
  Cut,     // new (x : F) (P | Q)
  Choice,  // P (+) Q
  Call,    // A(x1, ..., xn)
};

enum class Tag : std::uint8_t { In1, In2 };

std::string_view to_string(ProcessKind kind);
std::string_view to_string(Tag tag);

class Process {
 public:
  Process() = default;

  static Process link(Name x, Name y, SourceLoc loc = {});
  static Process fail(Name x, SourceLoc loc = {});
  static Process close(Name x, SourceLoc loc = {});
  static Process wait(Name x, Process body, SourceLoc loc = {});
  static Process join(Name x, Name y, Name z, Process body, SourceLoc loc = {});
  static Process fork(Name x, Name y, Name z, Process left, Process right, SourceLoc loc = {});
  static Process select(Name x, Tag tag, Name y, Process body, SourceLoc loc = {});
  static Process case_of(Name x, Name y, Process left, Process right, SourceLoc loc = {});
  static Process rec(Name x, Name y, Process body, SourceLoc loc = {});
  static Process corec(Name x, Name y, Process body, SourceLoc loc = {});
  static Process cut(Name x, Formula annotation, Process left, Process right, SourceLoc loc = {});
  static Process choice(Process left, Process right, SourceLoc loc = {});
  static Process call(std::string callee, std::vector<Name> args, SourceLoc loc = {});

  explicit operator bool() const { return node_ != nullptr; }
  const void* id() const { return node_.get(); }

  ProcessKind kind() const;
  /// Subject channel; the bound channel for Cut.
  const Name& x() const;
  const Name& y() const;
  const Name& z() const;
  Tag tag() const;
  const Formula& annotation() const;
  /// Continuation of prefixes, left branch of binary forms.
  const Process& left() const;
  const Process& right() const;
  const Process& body() const;
  const std::string& callee() const;
  const std::vector<Name>& args() const;
  SourceLoc loc() const;

  /// Sorted, duplicate free.
  const std::vector<Name>& free_names() const;
  bool has_free(std::string_view name) const;

  bool is_prefix() const;

 private:
  struct Node;

  static Process make(Node node);

  std::shared_ptr<const Node> node_;
};

struct Process::Node {
  ProcessKind kind{};
  Name x, y, z;
  Tag tag = Tag::In1;
  Formula annotation;
  Process left, right;
  std::string callee;
  std::vector<Name> args;
  SourceLoc loc;
  std::vector<Name> free;
};

inline ProcessKind Process::kind() const { return node_->kind; }
inline const Name& Process::x() const { return node_->x; }
inline const Name& Process::y() const { return node_->y; }
inline const Name& Process::z() const { return node_->z; }
inline Tag Process::tag() const { return node_->tag; }
inline const Formula& Process::annotation() const { return node_->annotation; }
inline const Process& Process::left() const { return node_->left; }
inline const Process& Process::right() const { return node_->right; }
inline const Process& Process::body() const { return node_->left; }
inline const std::string& Process::callee() const { return node_->callee; }
inline const std::vector<Name>& Process::args() const { return node_->args; }
inline SourceLoc Process::loc() const { return node_->loc; }
inline const std::vector<Name>& Process::free_names() const { return node_->free; }

std::vector<Name> free_names(const Process& p);

/// Capture-avoiding replacement of free `old_name` by `new_name`.
Process substitute(const Process& p, const Name& new_name, const Name& old_name);

/// Simultaneous capture-avoiding renaming of free names.
Process rename(const Process& p, const std::map<Name, Name>& renaming);

/// Equality up to renaming of bound names.
bool alpha_equal(const Process& p, const Process& q);

/// Whether p stays typable given extra unused channels: every branch must end
/// in a `fail` that absorbs them.
bool absorbs_unused(const Process& p);

/// A name based on `hint` that is not in `avoid`.
Name fresh_name(const Name& hint, const std::vector<Name>& avoid);

struct Parameter {
  Name name;
  Formula type;
  SourceLoc loc;
};

struct Definition {
  std::string name;
  std::vector<Parameter> params;
  Process body;
  SourceLoc loc;

  std::size_t arity() const { return params.size(); }
};

class Program {
 public:
  /// Throws Error on a duplicate name.
  void add(Definition def);
  const Definition* find(std::string_view name) const;
  const Definition& at(std::string_view name) const;  // throws UnknownDefinition
  const std::vector<Definition>& definitions() const { return defs_; }

  bool has_main() const { return !main_.empty(); }
  const std::string& main_name() const { return main_; }
  const Definition& main() const { return at(main_); }
  void set_main(std::string name) { main_ = std::move(name); }

 private:
  std::vector<Definition> defs_;
  std::unordered_map<std::string, std::size_t> index_;
  std::string main_;
};

/// Body of `name` with its parameters replaced by `args`.
Process unfold_call(const Program& prog, std::string_view name, const std::vector<Name>& args);

enum class DiagnosticKind : std::uint8_t {
  ForkLeftUsesRight,   // z free in the left process
  ForkRightUsesLeft,   // y free in the right process
  DuplicateBinder,
  UnknownDefinition,
  ArityMismatch,
  UnboundName,         // free in a body but not a parameter
  OpenFormula,
  MissingMain,
};

std::string_view to_string(DiagnosticKind kind);

struct Diagnostic {
  DiagnosticKind kind;
  SourceLoc loc;
  std::string definition;
  std::string message;
};

std::string to_string(const Diagnostic& d);

/// One diagnostic per violation, in definition order. A missing main is not
/// reported here.
std::vector<Diagnostic> check_well_formed(const Program& prog);

}  // namespace pilin
