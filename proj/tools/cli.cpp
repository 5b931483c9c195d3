#include "cli.hpp"

#include <CLI11.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <ostream>

#include "pilin/parser.hpp"
#include "pilin/typeck.hpp"

namespace pilin::cli {

namespace {

using nlohmann::json;

void fail_with(Report& r, int code, std::string kind, std::string message) {
  r.exit_code = code;
  r.error_kind = std::move(kind);
  r.error = std::move(message);
}

json rank_json(RankValue v) {
  if (v.is_infinite()) return "inf";
  return v.value();
}

json automaton_json(const BuchiAutomaton& a, const std::string& name, std::size_t letters) {
  json states = json::array();
  for (std::size_t s = 0; s < a.size(); ++s) {
    states.push_back({{"id", s}, {"label", a.labels[s]}, {"node", a.node[s]}, {"accepting", bool(a.accepting[s])}});
  }
  json transitions = json::array();
  for (const Transition& t : a.transitions) {
    transitions.push_back({{"from", t.from}, {"to", t.to}, {"letter", t.letter}});
  }
  return {{"name", name}, {"kind", "buchi"}, {"letters", letters}, {"states", states},
          {"initial", a.initial}, {"transitions", transitions}};
}

json automaton_json(const ParityAutomaton& a, const std::string& name, std::size_t letters) {
  json states = json::array();
  for (std::size_t s = 0; s < a.size(); ++s) {
    json st = {{"id", s}, {"label", a.labels[s]}, {"node", a.states[s].node}};
    st["slot"] = a.states[s].slot < 0 ? json(nullptr) : json(a.states[s].slot);
    states.push_back(std::move(st));
  }
  json transitions = json::array();
  for (const Transition& t : a.transitions) {
    transitions.push_back({{"from", t.from}, {"to", t.to}, {"letter", t.letter}, {"priority", t.priority}});
  }
  return {{"name", name}, {"kind", "parity"}, {"acceptance", "min-even"}, {"letters", letters},
          {"states", states}, {"initial", a.initial}, {"transitions", transitions}};
}

json graph_json(const ProofGraph& g) {
  auto context_json = [](const Context& ctx) {
    json out = json::array();
    for (const Slot& s : ctx) {
      out.push_back({{"name", s.name}, {"formula", to_string(s.type.formula)}, {"address", to_string(s.type.address)}});
    }
    return out;
  };
  json nodes = json::array();
  for (const ProofNode& n : g.nodes) {
    nodes.push_back({{"id", n.id},
                     {"rule", std::string(to_string(n.rule))},
                     {"definition", n.definition},
                     {"entry", n.entry},
                     {"context", context_json(n.context)},
                     {"process", print_process(n.process)},
                     {"premises", n.premises}});
  }
  json edges = json::array();
  for (const ProofEdge& e : g.edges) {
    json ancestry = json::array();
    for (const Ancestor& a : e.ancestry) {
      ancestry.push_back({{"slot", a.slot == Ancestor::kNone ? json(nullptr) : json(a.slot)},
                          {"progressed", a.progressed}});
    }
    json edge = {{"id", e.id}, {"from", e.from}, {"to", e.to}, {"ancestry", ancestry}, {"call", e.call}};
    if (e.call) edge["callee"] = e.callee;
    edges.push_back(std::move(edge));
  }
  json entries = json::object();
  for (const auto& [name, node] : g.entries) entries[name] = node;
  return {{"root", g.root}, {"entries", entries}, {"nodes", nodes}, {"edges", edges}};
}

void write_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write '" + path.string() + "'");
  out << text;
}

void emit_automata(const ProofGraph& g, const RankTable& ranks, const std::string& dir) {
  std::filesystem::create_directories(dir);
  const std::size_t letters = g.edges.size();
  const BuchiAutomaton m = build_M(g);
  const BuchiAutomaton u = build_U(g, ranks);
  const ParityAutomaton n = build_N(g);
  const std::filesystem::path base(dir);
  write_file(base / "M.json", automaton_json(m, "M", letters).dump(2) + "\n");
  write_file(base / "U.json", automaton_json(u, "U", letters).dump(2) + "\n");
  write_file(base / "N.json", automaton_json(n, "N", letters).dump(2) + "\n");
  write_file(base / "M.hoa", to_hoa(m, "M", letters));
  write_file(base / "U.hoa", to_hoa(u, "U", letters));
  write_file(base / "N.hoa", to_hoa(n, "N", letters));
}

// Parses, checks well-formedness and computes ranks. Returns the program when
// every step succeeded.
std::optional<SourceProgram> front_end(Report& r, bool need_main) {
  SourceProgram src;
  try {
    src = parse_file(r.path);
  } catch (const ParseError& e) {
    fail_with(r, kIllFormed, "parse", e.what());
    return std::nullopt;
  } catch (const Error& e) {
    fail_with(r, kIllFormed, "io", e.what());
    return std::nullopt;
  }
  for (const Definition& d : src.program.definitions()) r.definitions.push_back(d.name);
  r.diagnostics = check_well_formed(src.program);
  if (!need_main) {
    std::erase_if(r.diagnostics, [](const Diagnostic& d) { return d.kind == DiagnosticKind::MissingMain; });
  }
  if (!r.diagnostics.empty()) {
    fail_with(r, kIllFormed, "ill-formed", to_string(r.diagnostics.front()));
    return std::nullopt;
  }
  try {
    r.ranks = compute_ranks(src.program);
  } catch (const ResourceLimit& e) {
    fail_with(r, kResourceLimit, "resource", e.what());
    return std::nullopt;
  }
  if (need_main) {
    if (auto problem = check_main_signature(src.program)) {
      fail_with(r, kIllFormed, "ill-formed", *problem);
      return std::nullopt;
    }
  }
  return src;
}

void check_pipeline(Report& r, const SourceProgram& src, const CheckOptions& options) {
  ProofGraph g;
  try {
    g = check_program(src.program);
  } catch (const IllTyped& e) {
    r.quasi_typed = false;
    std::string where = e.definition().empty() ? std::string() : " in " + e.definition();
    fail_with(r, kIllTyped, "ill-typed",
              to_string(e.loc()) + where + " [" + e.rule() + "]: " + e.what());
    return;
  } catch (const UnproductiveCycle& e) {
    r.quasi_typed = false;
    fail_with(r, kIllTyped, "ill-typed", e.what());
    return;
  } catch (const AddressClash& e) {
    r.quasi_typed = false;
    fail_with(r, kIllTyped, "ill-typed", e.what());
    return;
  }
  r.quasi_typed = true;
  if (options.derivation) {
    r.derivation = derivation_report(g);
    r.graph = graph_json(g);
  }
  try {
    if (options.emit_automata) emit_automata(g, *r.ranks, *options.emit_automata);
    r.verdict = options.oracle_bound ? oracle_check(g, *r.ranks, *options.oracle_bound)
                                     : check_validity(g, *r.ranks);
  } catch (const ResourceLimit& e) {
    fail_with(r, kResourceLimit, "resource", e.what());
    return;
  }
  if (!r.verdict->well_typed) {
    r.exit_code = kInvalid;
    r.error_kind = "invalid";
    r.error = r.verdict->explanation + "; lasso " + to_string(r.verdict->lasso, g);
  }
}

std::string policy_name(const Policy& p) {
  switch (p.kind) {
    case Policy::Kind::MinRank: return "minrank";
    case Policy::Kind::Random: return "random";
    case Policy::Kind::Script: return "script";
  }
  return "?";
}

}  // namespace

std::uint64_t default_fuel() {
  if (const char* env = std::getenv("PILIN_FUEL")) {
    try {
      return std::stoull(env);
    } catch (const std::exception&) {
    }
  }
  return 10'000;
}

Report cmd_check(const std::string& path, const CheckOptions& options) {
  Report r;
  r.command = "check";
  r.path = path;
  if (auto src = front_end(r, true)) check_pipeline(r, *src, options);
  return r;
}

Report cmd_rank(const std::string& path) {
  Report r;
  r.command = "rank";
  r.path = path;
  front_end(r, false);
  return r;
}

Report cmd_run(const std::string& path, const RunOptions& options) {
  Report r;
  r.command = "run";
  r.path = path;
  r.include_trace = options.trace;
  r.policy = policy_name(options.policy);
  auto src = front_end(r, true);
  if (!src) return r;
  if (!options.unchecked) {
    check_pipeline(r, *src, CheckOptions{});
    if (r.exit_code != kOk) return r;
  }
  try {
    r.trace = run(src->program, *r.ranks, options.policy, options.fuel);
  } catch (const Error& e) {
    fail_with(r, kIllTyped, "runtime", e.what());
    return r;
  }
  switch (r.trace->outcome) {
    case Outcome::Terminated:
      break;
    case Outcome::FuelExhausted:
      fail_with(r, kResourceLimit, "resource", "fuel exhausted after " + std::to_string(options.fuel) + " steps");
      break;
    case Outcome::StuckUnexpected:
      fail_with(r, kInvalid, "stuck", "run got stuck at " + to_string(r.trace->final));
      break;
    case Outcome::Failed:
      fail_with(r, kInvalid, "failed", "fail reached a redex at " + to_string(r.trace->final));
      break;
  }
  return r;
}

nlohmann::json to_json(const Report& r) {
  json j;
  j["schema_version"] = kSchemaVersion;
  j["command"] = r.command;
  j["program"] = r.path;
  json diags = json::array();
  for (const Diagnostic& d : r.diagnostics) {
    diags.push_back({{"kind", std::string(to_string(d.kind))},
                     {"line", d.loc.line},
                     {"column", d.loc.column},
                     {"definition", d.definition},
                     {"message", d.message}});
  }
  j["diagnostics"] = diags;
  if (r.ranks) {
    json ranks = json::object();
    for (const std::string& name : r.definitions) ranks[name] = rank_json(r.ranks->of_definition(name));
    j["ranks"] = ranks;
  }
  if (r.quasi_typed) j["quasi_typed"] = *r.quasi_typed;
  if (r.verdict) {
    json v = {{"verdict", r.verdict->well_typed ? "well-typed" : "invalid"}, {"bounded", r.verdict->bounded}};
    if (r.verdict->bounded) v["bound"] = r.verdict->bound;
    if (!r.verdict->well_typed) {
      v["lasso"] = {{"prefix", r.verdict->lasso.prefix}, {"cycle", r.verdict->lasso.cycle}};
      v["explanation"] = r.verdict->explanation;
    }
    j["validity"] = v;
  }
  if (r.derivation) j["derivation"] = *r.derivation;
  if (r.graph) j["graph"] = *r.graph;
  if (r.trace) {
    json run = {{"policy", r.policy},
                {"outcome", std::string(to_string(r.trace->outcome))},
                {"steps", r.trace->entries.size()},
                {"final", to_string(r.trace->final)}};
    if (r.include_trace) {
      json steps = json::array();
      for (const TraceEntry& e : r.trace->entries) {
        steps.push_back({{"rule", e.rule}, {"subject", e.subject}, {"members", e.members}, {"channels", e.channels}});
      }
      run["trace"] = steps;
    }
    j["run"] = run;
  }
  if (!r.error.empty()) j["error"] = {{"kind", r.error_kind}, {"message", r.error}};
  j["exit_code"] = r.exit_code;
  return j;
}

void print_text(const Report& r, std::ostream& out) {
  if (r.command == "rank" && r.ranks) {
    for (const std::string& name : r.definitions) {
      out << name << ": " << to_string(r.ranks->of_definition(name)) << "\n";
    }
  }
  if (r.derivation) out << *r.derivation;
  if (r.trace && r.include_trace) {
    for (const TraceEntry& e : r.trace->entries) {
      out << e.rule << " " << e.subject << " (" << e.members << " members, " << e.channels << " channels)\n";
    }
  }
  out << r.path << ": ";
  if (r.exit_code == kOk) {
    if (r.command == "rank") {
      out << "ranks computed\n";
    } else if (r.command == "run") {
      out << "terminated after " << r.trace->entries.size() << " steps\n";
    } else {
      out << "well-typed";
      if (r.verdict && r.verdict->bounded) out << " (bounded B=" << r.verdict->bound << ")";
      out << "\n";
    }
    return;
  }
  out << r.error_kind << ": " << r.error;
  if (r.verdict && r.verdict->bounded) out << " (bounded B=" << r.verdict->bound << ")";
  out << "\n";
}

int main(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Type checker, validity decider and interpreter for linear pi-calculus programs", "pilin"};
  app.require_subcommand(1);
  bool as_json = false;
  app.add_flag("--json", as_json, "Machine-readable report on standard output");

  std::string path;
  CheckOptions check_opts;
  std::size_t oracle = 0;
  std::string emit_dir;
  auto* check = app.add_subcommand("check", "Check that a program is well-typed");
  check->add_option("file", path, "Program file")->required();
  check->add_option("--oracle", oracle, "Use the bounded lasso oracle with bound B")->check(CLI::PositiveNumber);
  check->add_flag("--derivation", check_opts.derivation, "Print the circular derivation");
  check->add_option("--emit-automata", emit_dir, "Write M, U and N as JSON and HOA into a directory");
  check->add_flag("--json", as_json, "Machine-readable report on standard output");

  RunOptions run_opts;
  run_opts.fuel = default_fuel();
  std::string policy = "minrank";
  std::uint64_t seed = 0;
  std::size_t patience = 16;
  auto* runc = app.add_subcommand("run", "Execute main under a scheduling policy");
  runc->add_option("file", path, "Program file")->required();
  runc->add_option("--policy", policy, "minrank or random")->check(CLI::IsMember({"minrank", "random"}));
  runc->add_option("--seed", seed, "Seed for the random policy");
  runc->add_option("--patience", patience, "Random choices before falling back to minrank");
  runc->add_option("--fuel", run_opts.fuel, "Maximum number of reductions (default PILIN_FUEL or 10000)");
  runc->add_flag("--trace", run_opts.trace, "Print every reduction");
  runc->add_flag("--unchecked", run_opts.unchecked, "Skip the well-typedness check");
  runc->add_flag("--json", as_json, "Machine-readable report on standard output");

  auto* rank = app.add_subcommand("rank", "Print the rank of every definition");
  rank->add_option("file", path, "Program file")->required();
  rank->add_flag("--json", as_json, "Machine-readable report on standard output");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? 0 : kIllFormed;
  }

  Report report;
  if (check->parsed()) {
    if (oracle > 0) check_opts.oracle_bound = oracle;
    if (!emit_dir.empty()) check_opts.emit_automata = emit_dir;
    report = cmd_check(path, check_opts);
  } else if (runc->parsed()) {
    run_opts.policy = policy == "random" ? Policy::random(seed, patience) : Policy::min_rank();
    report = cmd_run(path, run_opts);
  } else {
    report = cmd_rank(path);
  }

  if (as_json) {
    out << to_json(report).dump(2) << "\n";
    if (!report.error.empty()) err << report.path << ": " << report.error_kind << ": " << report.error << "\n";
  } else {
    print_text(report, out);
  }
  return report.exit_code;
}

}  // namespace pilin::cli
