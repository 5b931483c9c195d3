#pragma once

// Execution on a flat configuration: a soup of sequential members connected
// by live cut channels. Nested cuts are collapsed when a member is inserted,
// which absorbs commutativity and associativity of parallel composition.

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "pilin/process.hpp"
#include "pilin/rank.hpp"

namespace pilin {

using Typing = std::map<Name, Formula>;

struct Member {
  Process process;
  Typing typing;  // channels the member owns, with their types on its side

  friend bool operator==(const Member& a, const Member& b) {
    return a.typing == b.typing && alpha_equal(a.process, b.process);
  }
};

struct Channel {
  Name name;
  Formula annotation;  // the positive one of the two endpoint types
  std::uint64_t created = 0;

  friend bool operator==(const Channel&, const Channel&) = default;
};

struct Soup {
  std::vector<Member> members;
  std::vector<Channel> channels;  // ascending creation index
  Name external;
  Formula external_type;
  std::uint64_t next_index = 0;
  std::uint64_t next_fresh = 0;

  std::size_t size() const { return members.size(); }
  bool terminated() const;

  /// Same members in the same order and the same channels.
  friend bool operator==(const Soup& a, const Soup& b) {
    return a.external == b.external && a.members == b.members && a.channels == b.channels;
  }
};

std::string to_string(const Soup& soup);

/// Flattens unguarded cuts and unfolds unguarded calls once. `outer` types
/// the free names; exactly one of them is the external channel. Members are
/// sorted canonically and channels indexed in name order.
Soup to_soup(const Program& prog, const Process& p, const Parameter& external);

/// Soup of main's body against its single parameter.
Soup initial_soup(const Program& prog);

/// Folds the soup back into one process with nested cuts.
Process refold(const Soup& soup);

enum class Side : std::uint8_t { Left, Right };

std::string_view to_string(Side side);

/// Left iff rank(left) <= rank(right).
Side fair_choice(const Process& left, const Process& right, const RankTable& ranks);

struct Policy {
  enum class Kind : std::uint8_t { MinRank, Random, Script };
  Kind kind = Kind::MinRank;
  std::uint64_t seed = 0;
  std::size_t patience = 0;  // Random: choices resolved at random before falling back
  std::vector<Side> script;  // Script: decisions in order, then MinRank

  static Policy min_rank() { return {}; }
  static Policy random(std::uint64_t seed, std::size_t patience) { return {Kind::Random, seed, patience, {}}; }
  static Policy scripted(std::vector<Side> decisions) { return {Kind::Script, 0, 0, std::move(decisions)}; }
};

/// Resolves choices for one run.
class Chooser {
 public:
  Chooser(Policy policy, const RankTable& ranks);
  Side choose(const Process& left, const Process& right);

 private:
  Policy policy_;
  const RankTable& ranks_;
  std::mt19937_64 rng_;
  std::size_t resolved_ = 0;
};

enum class RedexKind : std::uint8_t { Link, Unit, Pair, Sum, Rec, Fail, Choice, Call };

std::string_view to_string(RedexKind kind);

struct Redex {
  RedexKind kind = RedexKind::Unit;
  std::size_t channel = 0;  // index into channels, for channel redexes
  std::size_t member = 0;   // index into members, for choices and calls
};

/// Channel redexes by creation index, then choices and calls by member index.
std::vector<Redex> enumerate_redexes(const Soup& soup);

struct TraceEntry {
  std::string rule;     // r-link, r-unit, r-pair, r-sum, r-rec, r-choice, r-call, fail
  std::string subject;  // channel name, or callee / chosen side
  std::size_t members = 0;
  std::size_t channels = 0;
  std::optional<Side> decision;
};

enum class Outcome : std::uint8_t { Terminated, StuckUnexpected, FuelExhausted, Failed };

std::string_view to_string(Outcome outcome);

struct Trace {
  std::vector<TraceEntry> entries;
  Outcome outcome = Outcome::StuckUnexpected;
  Soup final;

  /// Choice decisions in order, for Script replay.
  std::vector<Side> decisions() const;
};

/// Applies one redex in place.
TraceEntry step_at(const Program& prog, Soup& soup, const Redex& redex, Chooser& chooser);

/// Applies the first redex, or nullopt when the soup is stuck.
std::optional<TraceEntry> step(const Program& prog, Soup& soup, Chooser& chooser);

using StepObserver = std::function<void(const Soup&, const TraceEntry&)>;

/// Runs from `soup` until stuck or out of fuel.
Trace run_soup(const Program& prog, Soup soup, const RankTable& ranks, const Policy& policy,
               std::uint64_t fuel, const StepObserver& observe = {});

Trace run(const Program& prog, const RankTable& ranks, const Policy& policy, std::uint64_t fuel,
          const StepObserver& observe = {});

/// A MinRank run from `soup` terminates within `fuel` steps.
bool probe_termination(const Program& prog, const Soup& soup, const RankTable& ranks, std::uint64_t fuel);

}  // namespace pilin
