#include "pilin/parser.hpp"

#include <cctype>
#include <fstream>
#include <set>
#include <sstream>
#include <unordered_set>

namespace pilin {

namespace {

enum class Tok : std::uint8_t { Ident, Number, Punct, ChoiceOp, End };

struct Token {
  Tok kind = Tok::End;
  std::string text;
  SourceLoc loc;
};

class Lexer {
 public:
  explicit Lexer(std::string_view text) : text_(text) {}

  std::vector<Token> run() {
    std::vector<Token> out;
    for (;;) {
      skip_space();
      Token t;
      t.loc = {line_, col_};
      if (pos_ >= text_.size()) {
        out.push_back(t);
        return out;
      }
      char c = text_[pos_];
      if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
        std::size_t start = pos_;
        while (pos_ < text_.size() && is_ident_char(text_[pos_])) advance();
        t.kind = Tok::Ident;
        t.text = std::string(text_.substr(start, pos_ - start));
      } else if (std::isdigit(static_cast<unsigned char>(c))) {
        std::size_t start = pos_;
        while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) advance();
        t.kind = Tok::Number;
        t.text = std::string(text_.substr(start, pos_ - start));
      } else if (text_.substr(pos_, 3) == "(+)") {
        advance();
        advance();
        advance();
        t.kind = Tok::ChoiceOp;
        t.text = "(+)";
      } else if (std::string_view("(){},:;.=|+&*").find(c) != std::string_view::npos) {
        advance();
        t.kind = Tok::Punct;
        t.text = std::string(1, c);
      } else {
        throw ParseError(t.loc, std::string("unexpected character '") + c + "'");
      }
      out.push_back(std::move(t));
    }
  }

 private:
  static bool is_ident_char(char c) {
    return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '\'';
  }

  void advance() {
    if (text_[pos_] == '\n') {
      ++line_;
      col_ = 1;
    } else {
      ++col_;
    }
    ++pos_;
  }

  void skip_space() {
    while (pos_ < text_.size()) {
      char c = text_[pos_];
      if (std::isspace(static_cast<unsigned char>(c))) {
        advance();
      } else if (text_.substr(pos_, 2) == "--") {
        while (pos_ < text_.size() && text_[pos_] != '\n') advance();
      } else {
        break;
      }
    }
  }

  std::string_view text_;
  std::size_t pos_ = 0;
  int line_ = 1;
  int col_ = 1;
};

const std::unordered_set<std::string>& keywords() {
  static const std::unordered_set<std::string> k = {
      "link", "fail", "close", "wait", "send", "recv", "case", "unfold", "rec",
      "new",  "def",  "mu",    "nu",   "top",  "bot",  "par"};
  return k;
}

class Parser {
 public:
  explicit Parser(std::string_view text) : toks_(Lexer(text).run()) {}

  Program program() {
    Program prog;
    std::string marked_main;
    SourceLoc marked_loc;
    while (!at_end()) {
      bool is_main = false;
      SourceLoc main_loc = peek().loc;
      if (peek_ident("main") && peek(1).kind == Tok::Ident && peek(1).text == "def") {
        next();
        is_main = true;
      }
      Definition def = definition();
      if (prog.find(def.name)) throw ParseError(def.loc, "duplicate definition '" + def.name + "'");
      if (is_main) {
        if (!marked_main.empty()) {
          throw ParseError(main_loc, "more than one definition is marked main (first at " +
                                         to_string(marked_loc) + ")");
        }
        marked_main = def.name;
        marked_loc = main_loc;
      }
      prog.add(std::move(def));
    }
    if (!marked_main.empty()) {
      prog.set_main(marked_main);
    } else if (prog.find("main")) {
      prog.set_main("main");
    }
    return prog;
  }

  Formula closed_formula() {
    SourceLoc loc = peek().loc;
    Formula f = formula();
    require_closed(f, loc);
    return f;
  }

  Process process_only() { return process(); }

  void expect_end() {
    if (!at_end()) fail_here("unexpected '" + peek().text + "'");
  }

 private:
  // -- token helpers -------------------------------------------------------

  const Token& peek(std::size_t ahead = 0) const {
    std::size_t i = std::min(pos_ + ahead, toks_.size() - 1);
    return toks_[i];
  }
  bool at_end() const { return peek().kind == Tok::End; }
  Token next() {
    Token t = peek();
    if (pos_ < toks_.size() - 1) ++pos_;
    return t;
  }
  bool peek_punct(char c, std::size_t ahead = 0) const {
    const Token& t = peek(ahead);
    return t.kind == Tok::Punct && t.text[0] == c;
  }
  bool peek_ident(std::string_view word) const {
    return peek().kind == Tok::Ident && peek().text == word;
  }
  [[noreturn]] void fail_here(const std::string& msg) const { throw ParseError(peek().loc, msg); }

  void expect_punct(char c) {
    if (!peek_punct(c)) {
      fail_here(std::string("expected '") + c + "' but found " + describe(peek()));
    }
    next();
  }
  void expect_keyword(std::string_view word) {
    if (!peek_ident(word)) fail_here("expected '" + std::string(word) + "' but found " + describe(peek()));
    next();
  }
  static std::string describe(const Token& t) {
    return t.kind == Tok::End ? std::string("end of input") : "'" + t.text + "'";
  }

  Name name(std::string_view what) {
    if (peek().kind != Tok::Ident) fail_here("expected " + std::string(what) + " but found " + describe(peek()));
    if (keywords().contains(peek().text)) {
      fail_here("keyword '" + peek().text + "' cannot be used as " + std::string(what));
    }
    return next().text;
  }

  // Optional "(y)" continuation; defaults to the subject.
  Name continuation(const Name& subject) {
    if (!peek_punct('(')) return subject;
    next();
    Name y = name("a channel name");
    expect_punct(')');
    return y;
  }

  // -- definitions ---------------------------------------------------------

  Definition definition() {
    Definition def;
    def.loc = peek().loc;
    expect_keyword("def");
    def.name = name("a definition name");
    expect_punct('(');
    std::set<Name> seen;
    if (!peek_punct(')')) {
      for (;;) {
        Parameter p;
        p.loc = peek().loc;
        p.name = name("a parameter name");
        if (!seen.insert(p.name).second) throw ParseError(p.loc, "duplicate parameter '" + p.name + "'");
        expect_punct(':');
        p.type = closed_formula();
        def.params.push_back(std::move(p));
        if (peek_punct(',')) {
          next();
          continue;
        }
        break;
      }
    }
    expect_punct(')');
    expect_punct('=');
    def.body = process();
    return def;
  }

  // -- processes -----------------------------------------------------------

  Process process() {
    Process lhs = prefix();
    while (peek().kind == Tok::ChoiceOp) {
      SourceLoc loc = next().loc;
      Process rhs = prefix();
      lhs = Process::choice(lhs, rhs, loc);
    }
    return lhs;
  }

  std::pair<Process, Process> parallel() {
    expect_punct('(');
    Process p = process();
    expect_punct('|');
    Process q = process();
    expect_punct(')');
    return {p, q};
  }

  Process prefix() {
    const Token& t = peek();
    SourceLoc loc = t.loc;
    if (peek_punct('(')) {
      next();
      Process p = process();
      expect_punct(')');
      return p;
    }
    if (t.kind != Tok::Ident) fail_here("expected a process but found " + describe(t));
    const std::string word = t.text;
    if (word == "link") {
      next();
      Name x = name("a channel name");
      Name y = name("a channel name");
      return Process::link(x, y, loc);
    }
    if (word == "fail" || word == "close") {
      next();
      Name x = name("a channel name");
      return word == "fail" ? Process::fail(x, loc) : Process::close(x, loc);
    }
    if (word == "wait") {
      next();
      Name x = name("a channel name");
      expect_punct('.');
      return Process::wait(x, prefix(), loc);
    }
    if (word == "send" || word == "recv") {
      next();
      Name x = name("a channel name");
      expect_punct('(');
      Name y = name("a channel name");
      Name z = x;
      if (peek_punct(',')) {
        next();
        z = name("a channel name");
      }
      expect_punct(')');
      if (word == "recv") {
        if (y == z) throw ParseError(loc, "receive binds '" + y + "' twice");
        expect_punct('.');
        return Process::join(x, y, z, prefix(), loc);
      }
      auto [p, q] = parallel();
      if (y == z) {
        // Separate scopes; give the right one its own name.
        Name fresh = fresh_name(z, q.free_names());
        q = substitute(q, fresh, z);
        z = fresh;
      }
      return Process::fork(x, y, z, p, q, loc);
    }
    if (word == "case") {
      next();
      Name x = name("a channel name");
      Name y = continuation(x);
      expect_punct('{');
      auto [l1, p1] = branch();
      expect_punct(';');
      auto [l2, p2] = branch();
      if (peek_punct(';')) next();
      expect_punct('}');
      if (l1 == l2) throw ParseError(loc, "case lists label '" + l1 + "' twice");
      bool swapped = (l1 == "in2" && l2 == "in1") || (l1 == "inr" && l2 == "inl");
      return swapped ? Process::case_of(x, y, p2, p1, loc) : Process::case_of(x, y, p1, p2, loc);
    }
    if (word == "unfold" || word == "rec") {
      next();
      Name x = name("a channel name");
      Name y = continuation(x);
      expect_punct('.');
      Process body = prefix();
      return word == "unfold" ? Process::rec(x, y, body, loc) : Process::corec(x, y, body, loc);
    }
    if (word == "new") {
      next();
      expect_punct('(');
      Name x = name("a channel name");
      expect_punct(':');
      Formula f = closed_formula();
      expect_punct(')');
      auto [p, q] = parallel();
      return Process::cut(x, f, p, q, loc);
    }
    if (peek_punct('(', 1)) {
      std::string callee = name("a definition name");
      next();
      std::vector<Name> args;
      if (!peek_punct(')')) {
        for (;;) {
          args.push_back(name("a channel name"));
          if (!peek_punct(',')) break;
          next();
        }
      }
      expect_punct(')');
      return Process::call(callee, std::move(args), loc);
    }
    if (peek_punct('.', 1)) {
      Name x = name("a channel name");
      next();
      if (peek().kind != Tok::Ident) fail_here("expected a tag but found " + describe(peek()));
      const Token label = next();
      Tag tag;
      if (label.text == "in1" || label.text == "inl") {
        tag = Tag::In1;
      } else if (label.text == "in2" || label.text == "inr") {
        tag = Tag::In2;
      } else {
        throw ParseError(label.loc, "unknown tag '" + label.text + "' (expected in1 or in2)");
      }
      Name y = continuation(x);
      expect_punct('.');
      return Process::select(x, tag, y, prefix(), loc);
    }
    fail_here("expected a process but found " + describe(t));
  }

  std::pair<std::string, Process> branch() {
    if (peek().kind != Tok::Ident) fail_here("expected a case label but found " + describe(peek()));
    std::string label = next().text;
    expect_punct(':');
    return {label, process()};
  }

  // -- formulas ------------------------------------------------------------

  Formula formula() {
    if (peek_ident("mu") || peek_ident("nu")) {
      const bool least = peek().text == "mu";
      next();
      Name var = name("a formula variable");
      expect_punct('.');
      Formula body = formula();
      return least ? Formula::mu(var, body) : Formula::nu(var, body);
    }
    return sum();
  }

  bool at_binder() const { return peek_ident("mu") || peek_ident("nu"); }

  Formula sum() {
    Formula lhs = product();
    for (;;) {
      FormulaKind op;
      if (peek_punct('+')) {
        op = FormulaKind::Plus;
      } else if (peek_punct('&')) {
        op = FormulaKind::With;
      } else {
        return lhs;
      }
      next();
      lhs = Formula::binary(op, lhs, at_binder() ? formula() : product());
    }
  }

  Formula product() {
    Formula lhs = atom();
    for (;;) {
      FormulaKind op;
      if (peek_punct('*')) {
        op = FormulaKind::Tensor;
      } else if (peek_ident("par")) {
        op = FormulaKind::Par;
      } else {
        return lhs;
      }
      next();
      lhs = Formula::binary(op, lhs, at_binder() ? formula() : atom());
    }
  }

  Formula atom() {
    const Token& t = peek();
    if (t.kind == Tok::Number) {
      if (t.text == "0") {
        next();
        return Formula::zero();
      }
      if (t.text == "1") {
        next();
        return Formula::one();
      }
      fail_here("unexpected number '" + t.text + "' in formula");
    }
    if (peek_punct('(')) {
      next();
      Formula f = formula();
      expect_punct(')');
      return f;
    }
    if (peek_ident("top")) {
      next();
      return Formula::top();
    }
    if (peek_ident("bot")) {
      next();
      return Formula::bot();
    }
    if (t.kind == Tok::Ident && !keywords().contains(t.text)) return Formula::var(next().text);
    fail_here("expected a formula but found " + describe(t));
  }

  static void require_closed(const Formula& f, SourceLoc loc) {
    if (f.is_closed()) return;
    std::string free;
    std::vector<Formula> work{f};
    while (!work.empty() && free.empty()) {
      Formula g = work.back();
      work.pop_back();
      if (g.kind() == FormulaKind::FreeVar) free = g.name();
      if (g.is_binary()) {
        work.push_back(g.left());
        work.push_back(g.right());
      } else if (g.is_fixpoint()) {
        work.push_back(g.body());
      }
    }
    throw ParseError(loc, "formula has unbound variable '" + free + "'");
  }

  std::vector<Token> toks_;
  std::size_t pos_ = 0;
};

// ---------------------------------------------------------------------------
// Printing

enum class Level { Choice, Prefix };

void print(const Process& p, Level level, std::string& out);

void print_continuation(const Process& p, std::string& out) {
  if (p.y() != p.x()) out += " (" + p.y() + ")";
}

void print(const Process& p, Level level, std::string& out) {
  switch (p.kind()) {
    case ProcessKind::Link:
      out += "link " + p.x() + " " + p.y();
      return;
    case ProcessKind::Fail:
      out += "fail " + p.x();
      return;
    case ProcessKind::Close:
      out += "close " + p.x();
      return;
    case ProcessKind::Wait:
      out += "wait " + p.x() + ". ";
      print(p.body(), Level::Prefix, out);
      return;
    case ProcessKind::Join:
      out += "recv " + p.x() + " (" + p.y();
      if (p.z() != p.x()) out += ", " + p.z();
      out += "). ";
      print(p.body(), Level::Prefix, out);
      return;
    case ProcessKind::Fork:
      out += "send " + p.x() + " (" + p.y();
      if (p.z() != p.x()) out += ", " + p.z();
      out += ") (";
      print(p.left(), Level::Choice, out);
      out += " | ";
      print(p.right(), Level::Choice, out);
      out += ")";
      return;
    case ProcessKind::Select:
      out += p.x() + "." + std::string(to_string(p.tag()));
      if (p.y() != p.x()) out += "(" + p.y() + ")";
      out += ". ";
      print(p.body(), Level::Prefix, out);
      return;
    case ProcessKind::Case:
      out += "case " + p.x();
      print_continuation(p, out);
      out += " { in1: ";
      print(p.left(), Level::Choice, out);
      out += "; in2: ";
      print(p.right(), Level::Choice, out);
      out += " }";
      return;
    case ProcessKind::Rec:
    case ProcessKind::Corec:
      out += (p.kind() == ProcessKind::Rec ? "unfold " : "rec ") + p.x();
      print_continuation(p, out);
      out += ". ";
      print(p.body(), Level::Prefix, out);
      return;
    case ProcessKind::Cut:
      out += "new (" + p.x() + ": " + to_string(p.annotation()) + ") (";
      print(p.left(), Level::Choice, out);
      out += " | ";
      print(p.right(), Level::Choice, out);
      out += ")";
      return;
    case ProcessKind::Choice: {
      const bool parens = level == Level::Prefix;
      if (parens) out += "(";
      print(p.left(), p.left().kind() == ProcessKind::Choice ? Level::Choice : Level::Prefix, out);
      out += " (+) ";
      print(p.right(), Level::Prefix, out);
      if (parens) out += ")";
      return;
    }
    case ProcessKind::Call: {
      out += p.callee() + "(";
      for (std::size_t i = 0; i < p.args().size(); ++i) {
        if (i) out += ", ";
        out += p.args()[i];
      }
      out += ")";
      return;
    }
  }
}

}  // namespace

SourceProgram parse_program(std::string_view text, std::string path) {
  Parser parser(text);
  SourceProgram sp;
  sp.program = parser.program();
  sp.path = std::move(path);
  sp.text = std::string(text);
  return sp;
}

SourceProgram parse_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_program(buf.str(), path);
}

Formula parse_formula(std::string_view text) {
  Parser parser(text);
  Formula f = parser.closed_formula();
  parser.expect_end();
  return f;
}

Process parse_process(std::string_view text) {
  Parser parser(text);
  Process p = parser.process_only();
  parser.expect_end();
  return p;
}

std::string print_process(const Process& p) {
  std::string out;
  print(p, Level::Choice, out);
  return out;
}

std::string print_program(const Program& prog) {
  std::string out;
  for (const Definition& d : prog.definitions()) {
    if (prog.has_main() && prog.main_name() == d.name && d.name != "main") out += "main ";
    out += "def " + d.name + "(";
    for (std::size_t i = 0; i < d.params.size(); ++i) {
      if (i) out += ", ";
      out += d.params[i].name + ": " + to_string(d.params[i].type);
    }
    out += ") =\n  " + print_process(d.body) + "\n\n";
  }
  if (!out.empty()) out.pop_back();
  return out;
}

}  // namespace pilin
