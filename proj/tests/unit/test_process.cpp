#include <doctest.h>

#include <algorithm>

#include "pilin/parser.hpp"
#include "support.hpp"

using namespace pilin;

namespace {

Process P(const char* text) { return parse_process(text); }

bool has_kind(const std::vector<Diagnostic>& ds, DiagnosticKind kind) {
  return std::any_of(ds.begin(), ds.end(), [&](const Diagnostic& d) { return d.kind == kind; });
}

Program program_of(const char* text) { return parse_program(text).program; }

}  // namespace

TEST_SUITE("process") {
  TEST_CASE("free names respect binders") {
    CHECK(free_names(P("close x")) == std::vector<Name>{"x"});
    CHECK(free_names(P("link x y")) == std::vector<Name>{"x", "y"});
    CHECK(free_names(P("recv x (y, z). link y z")) == std::vector<Name>{"x"});
    CHECK(free_names(P("recv x (y, z). link y w")) == std::vector<Name>{"w", "x"});
    CHECK(free_names(P("new (k: 1) (close k | wait k. close y)")) == std::vector<Name>{"y"});
    CHECK(free_names(P("unfold x (y). close y")) == std::vector<Name>{"x"});
    CHECK(free_names(P("A(b, a)")) == std::vector<Name>{"a", "b"});
  }

  TEST_CASE("substitution renames free occurrences only") {
    CHECK(alpha_equal(substitute(P("wait x. close y"), "z", "y"), P("wait x. close z")));
    CHECK(alpha_equal(substitute(P("recv x (y, x). close y"), "w", "x"),
                      P("recv w (y, x). close y")));
    Process renamed = substitute(P("recv x (y, z). link y w"), "y", "w");
    CHECK(free_names(renamed) == std::vector<Name>{"x", "y"});
    CHECK(alpha_equal(renamed, P("recv x (a, z). link a y")));
  }

  TEST_CASE("alpha equivalence") {
    CHECK(alpha_equal(P("recv x (y, z). link y z"), P("recv x (a, b). link a b")));
    CHECK_FALSE(alpha_equal(P("recv x (y, z). link y z"), P("recv x (a, b). link b a")));
    CHECK(alpha_equal(P("new (k: 1) (close k | wait k. close y)"),
                      P("new (j: 1) (close j | wait j. close y)")));
    CHECK_FALSE(alpha_equal(P("close x"), P("close y")));
    CHECK_FALSE(alpha_equal(P("new (k: 1) (close k | wait k. close y)"),
                            P("new (k: bot) (close k | wait k. close y)")));
  }

  TEST_CASE("rename applies a simultaneous map") {
    Process swapped = rename(P("link x y"), {{"x", "y"}, {"y", "x"}});
    CHECK(alpha_equal(swapped, P("link y x")));
  }

  TEST_CASE("fresh names avoid the given set") {
    const Name n = fresh_name("x", {"x", "x1", "x2"});
    CHECK(n != "x");
    CHECK(n != "x1");
    CHECK(n != "x2");
    CHECK(n.rfind("x", 0) == 0);
  }

  TEST_CASE("call unfolding instantiates parameters") {
    Program prog = program_of("def A(a: 1, b: bot) = wait b. close a\ndef main(y: 1) = close y");
    CHECK(alpha_equal(unfold_call(prog, "A", {"p", "q"}), P("wait q. close p")));
    CHECK_THROWS_AS(unfold_call(prog, "A", {"p"}), ArityMismatch);
    CHECK_THROWS_AS(unfold_call(prog, "B", {}), UnknownDefinition);
  }

  TEST_CASE("well-formedness diagnostics") {
    CHECK(check_well_formed(testing::load_corpus("buyer_seller")).empty());

    auto ds = check_well_formed(program_of("def main(y: 1) = send y (a, b) (close b | close a)"));
    CHECK(has_kind(ds, DiagnosticKind::ForkLeftUsesRight));
    CHECK(has_kind(ds, DiagnosticKind::ForkRightUsesLeft));

    ds = check_well_formed(program_of("def main(y: 1) = B(y)"));
    CHECK(has_kind(ds, DiagnosticKind::UnknownDefinition));

    ds = check_well_formed(program_of("def A(a: 1) = close a\ndef main(y: 1) = A(y, y)"));
    CHECK(has_kind(ds, DiagnosticKind::ArityMismatch));

    ds = check_well_formed(program_of("def main(y: 1) = close z"));
    CHECK(has_kind(ds, DiagnosticKind::UnboundName));
    REQUIRE_FALSE(ds.empty());
    CHECK(ds.front().definition == "main");
    CHECK(ds.front().loc.line == 1);

    ds = check_well_formed(program_of("def A(y: 1) = close y"));
    CHECK(has_kind(ds, DiagnosticKind::MissingMain));
  }
}
