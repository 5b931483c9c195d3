#pragma once

// Concrete syntax.
//
//   program  ::= { ["main"] "def" Name "(" [param {"," param}] ")" "=" proc }
//   param    ::= x ":" formula
//   proc     ::= prefix { "(+)" prefix }
//   prefix   ::= "link" x y | "fail" x | "close" x | "wait" x "." prefix
//              | "send" x "(" y ["," z] ")" "(" proc "|" proc ")"
//              | "recv" x "(" y ["," z] ")" "." prefix
//              | x "." ("in1" | "in2") ["(" y ")"] "." prefix
//              | "case" x ["(" y ")"] "{" label ":" proc ";" label ":" proc [";"] "}"
//              | "unfold" x ["(" y ")"] "." prefix       (least fixed point)
//              | "rec" x ["(" y ")"] "." prefix          (greatest fixed point)
//              | "new" "(" x ":" formula ")" "(" proc "|" proc ")"
//              | Name "(" [x {"," x}] ")" | "(" proc ")"
//   formula  ::= "mu" X "." formula | "nu" X "." formula | sum
//   sum      ::= prod { ("+" | "&") (prod | "mu"... | "nu"...) }
//   prod     ::= atom { ("*" | "par") (atom | "mu"... | "nu"...) }
//   atom     ::= "0" | "1" | "top" | "bot" | X | "(" formula ")"
//
// An omitted continuation name defaults to the subject channel. `--` starts
// a line comment. A definition named `main` is the entry point unless another
// one is marked with the `main` keyword.

#include <string>
#include <string_view>

#include "pilin/formula.hpp"
#include "pilin/process.hpp"

namespace pilin {

struct SourceProgram {
  std::string path;
  std::string text;
  Program program;
};

/// Throws ParseError.
SourceProgram parse_program(std::string_view text, std::string path = {});
SourceProgram parse_file(const std::string& path);

/// A closed formula. Throws ParseError.
Formula parse_formula(std::string_view text);

/// A single process term. Throws ParseError.
Process parse_process(std::string_view text);

std::string print_process(const Process& p);
std::string print_program(const Program& prog);

}  // namespace pilin
