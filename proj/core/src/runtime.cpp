#include "pilin/runtime.hpp"

#include <algorithm>

#include "pilin/parser.hpp"

namespace pilin {

namespace {

// Splits a typing between two parallel processes. Names neither uses go to
// the side that can absorb them with `fail`.
std::pair<Typing, Typing> split(const Typing& t, const Process& left, const Process& right) {
  Typing l, r;
  const bool left_absorbs = absorbs_unused(left) || !absorbs_unused(right);
  for (const auto& [name, type] : t) {
    const bool in_l = left.has_free(name);
    const bool in_r = right.has_free(name);
    if (in_l && in_r) throw Error("channel '" + name + "' is shared by two parallel processes");
    if (in_l || (!in_r && left_absorbs)) {
      l.emplace(name, type);
    } else {
      r.emplace(name, type);
    }
  }
  return {std::move(l), std::move(r)};
}

Formula positive_side(const Formula& f) { return f.is_positive() ? f : dual(f); }

std::string member_key(const Member& m) {
  std::string key = print_process(m.process) + " |";
  for (const auto& [name, type] : m.typing) key += " " + name + ":" + to_string(type);
  return key;
}

Name base_of(const Name& n) {
  auto hash = n.find('#');
  return hash == Name::npos ? n : n.substr(0, hash);
}

class Builder {
 public:
  // Initial mode keeps source names unless they clash and unfolds calls once.
  Builder(const Program& prog, Soup& soup, bool initial)
      : prog_(prog), soup_(soup), initial_(initial), unfold_(initial) {}

  void insert(Process p, Typing t) {
    switch (p.kind()) {
      case ProcessKind::Cut: {
        Process left = p.left();
        Process right = p.right();
        Name x = p.x();
        if (!initial_ || in_use(x)) {
          Name fresh = fresh_channel(x);
          left = substitute(left, fresh, x);
          right = substitute(right, fresh, x);
          x = fresh;
        }
        auto [tl, tr] = split(t, left, right);
        tl.emplace(x, p.annotation());
        tr.emplace(x, dual(p.annotation()));
        soup_.channels.push_back(Channel{x, positive_side(p.annotation()), soup_.next_index++});
        insert(left, std::move(tl));
        insert(right, std::move(tr));
        return;
      }
      case ProcessKind::Call:
        if (unfold_) {
          unfold_ = false;
          insert(unfold_call(prog_, p.callee(), p.args()), std::move(t));
          unfold_ = true;
          return;
        }
        break;
      default:
        break;
    }
    soup_.members.push_back(Member{std::move(p), std::move(t)});
  }

  Name fresh_channel(const Name& hint) { return base_of(hint) + "#" + std::to_string(soup_.next_fresh++); }

 private:
  bool in_use(const Name& x) const {
    if (x == soup_.external) return true;
    return std::any_of(soup_.channels.begin(), soup_.channels.end(), [&](const Channel& c) { return c.name == x; });
  }

  const Program& prog_;
  Soup& soup_;
  bool initial_;
  bool unfold_;
};

std::pair<std::size_t, std::size_t> endpoints(const Soup& soup, const Name& c) {
  std::vector<std::size_t> found;
  for (std::size_t i = 0; i < soup.members.size(); ++i) {
    if (soup.members[i].typing.contains(c)) found.push_back(i);
  }
  if (found.size() != 2) {
    throw Error("channel '" + c + "' has " + std::to_string(found.size()) + " endpoint(s) in the soup");
  }
  return {found[0], found[1]};
}

bool is_link_on(const Process& p, const Name& c) {
  return p.kind() == ProcessKind::Link && (p.x() == c || p.y() == c);
}

bool acts_on(const Process& p, const Name& c) {
  switch (p.kind()) {
    case ProcessKind::Link:
      return is_link_on(p, c);
    case ProcessKind::Close:
    case ProcessKind::Wait:
    case ProcessKind::Join:
    case ProcessKind::Fork:
    case ProcessKind::Select:
    case ProcessKind::Case:
    case ProcessKind::Rec:
    case ProcessKind::Corec:
    case ProcessKind::Fail:
      return p.x() == c;
    default:
      return false;
  }
}

std::optional<RedexKind> channel_redex(const Soup& soup, const Channel& ch) {
  auto [i, j] = endpoints(soup, ch.name);
  const Process& a = soup.members[i].process;
  const Process& b = soup.members[j].process;
  if (is_link_on(a, ch.name) || is_link_on(b, ch.name)) return RedexKind::Link;
  if (!acts_on(a, ch.name) || !acts_on(b, ch.name)) return std::nullopt;
  if (a.kind() == ProcessKind::Fail || b.kind() == ProcessKind::Fail) return RedexKind::Fail;
  auto pair_is = [&](ProcessKind p, ProcessKind q) {
    return (a.kind() == p && b.kind() == q) || (a.kind() == q && b.kind() == p);
  };
  if (pair_is(ProcessKind::Close, ProcessKind::Wait)) return RedexKind::Unit;
  if (pair_is(ProcessKind::Fork, ProcessKind::Join)) return RedexKind::Pair;
  if (pair_is(ProcessKind::Select, ProcessKind::Case)) return RedexKind::Sum;
  if (pair_is(ProcessKind::Rec, ProcessKind::Corec)) return RedexKind::Rec;
  return std::nullopt;
}

void remove_members(Soup& soup, std::vector<std::size_t> idx) {
  std::sort(idx.rbegin(), idx.rend());
  for (std::size_t i : idx) soup.members.erase(soup.members.begin() + static_cast<std::ptrdiff_t>(i));
}

void remove_channel(Soup& soup, std::size_t index) {
  soup.channels.erase(soup.channels.begin() + static_cast<std::ptrdiff_t>(index));
}

Typing without(Typing t, const Name& n) {
  t.erase(n);
  return t;
}

}  // namespace

bool Soup::terminated() const {
  return channels.empty() && members.size() == 1 && members[0].process.kind() == ProcessKind::Close &&
         members[0].process.x() == external;
}

std::string to_string(const Soup& soup) {
  std::string out = "{";
  for (std::size_t i = 0; i < soup.members.size(); ++i) {
    out += i ? " || " : " ";
    out += print_process(soup.members[i].process);
  }
  out += " }";
  if (!soup.channels.empty()) {
    out += " over";
    for (const Channel& c : soup.channels) out += " " + c.name + ": " + to_string(c.annotation);
  }
  return out;
}

Soup to_soup(const Program& prog, const Process& p, const Parameter& external) {
  Soup soup;
  soup.external = external.name;
  soup.external_type = external.type;
  Builder builder(prog, soup, true);
  builder.insert(p, Typing{{external.name, external.type}});
  std::stable_sort(soup.members.begin(), soup.members.end(),
                   [](const Member& a, const Member& b) { return member_key(a) < member_key(b); });
  std::sort(soup.channels.begin(), soup.channels.end(),
            [](const Channel& a, const Channel& b) { return a.name < b.name; });
  for (std::size_t i = 0; i < soup.channels.size(); ++i) soup.channels[i].created = i;
  soup.next_index = soup.channels.size();
  return soup;
}

Soup initial_soup(const Program& prog) {
  const Definition& m = prog.main();
  if (m.params.size() != 1) throw Error("main must take exactly one parameter");
  return to_soup(prog, m.body, m.params[0]);
}

Process refold(const Soup& soup) {
  struct Group {
    Process process;
    Typing typing;
  };
  std::vector<Group> groups;
  for (const Member& m : soup.members) groups.push_back(Group{m.process, m.typing});
  for (const Channel& c : soup.channels) {
    std::vector<std::size_t> owners;
    for (std::size_t i = 0; i < groups.size(); ++i) {
      if (groups[i].typing.contains(c.name)) owners.push_back(i);
    }
    if (owners.size() != 2) throw Error("channel '" + c.name + "' does not join two parts of the soup");
    Group& a = groups[owners[0]];
    Group& b = groups[owners[1]];
    Typing merged = without(a.typing, c.name);
    for (const auto& [name, type] : b.typing) {
      if (name != c.name && !merged.emplace(name, type).second) {
        throw Error("channel '" + name + "' closes a cycle in the soup");
      }
    }
    a.process = Process::cut(c.name, a.typing.at(c.name), a.process, b.process);
    a.typing = std::move(merged);
    groups.erase(groups.begin() + static_cast<std::ptrdiff_t>(owners[1]));
  }
  if (groups.size() != 1) throw Error("soup is not connected");
  return groups[0].process;
}

std::string_view to_string(Side side) { return side == Side::Left ? "left" : "right"; }

Side fair_choice(const Process& left, const Process& right, const RankTable& ranks) {
  return rank_of(ranks, left) <= rank_of(ranks, right) ? Side::Left : Side::Right;
}

Chooser::Chooser(Policy policy, const RankTable& ranks)
    : policy_(std::move(policy)), ranks_(ranks), rng_(policy_.seed) {}

Side Chooser::choose(const Process& left, const Process& right) {
  const std::size_t n = resolved_++;
  switch (policy_.kind) {
    case Policy::Kind::Random:
      if (n < policy_.patience) return std::bernoulli_distribution(0.5)(rng_) ? Side::Left : Side::Right;
      break;
    case Policy::Kind::Script:
      if (n < policy_.script.size()) return policy_.script[n];
      break;
    case Policy::Kind::MinRank:
      break;
  }
  return fair_choice(left, right, ranks_);
}

std::string_view to_string(RedexKind kind) {
  switch (kind) {
    case RedexKind::Link: return "r-link";
    case RedexKind::Unit: return "r-unit";
    case RedexKind::Pair: return "r-pair";
    case RedexKind::Sum: return "r-sum";
    case RedexKind::Rec: return "r-rec";
    case RedexKind::Fail: return "fail";
    case RedexKind::Choice: return "r-choice";
    case RedexKind::Call: return "r-call";
  }
  return "?";
}

std::string_view to_string(Outcome outcome) {
  switch (outcome) {
    case Outcome::Terminated: return "terminated";
    case Outcome::StuckUnexpected: return "stuck";
    case Outcome::FuelExhausted: return "fuel-exhausted";
    case Outcome::Failed: return "failed";
  }
  return "?";
}

std::vector<Side> Trace::decisions() const {
  std::vector<Side> out;
  for (const TraceEntry& e : entries) {
    if (e.decision) out.push_back(*e.decision);
  }
  return out;
}

std::vector<Redex> enumerate_redexes(const Soup& soup) {
  std::vector<Redex> out;
  for (std::size_t c = 0; c < soup.channels.size(); ++c) {
    if (auto kind = channel_redex(soup, soup.channels[c])) out.push_back(Redex{*kind, c, 0});
  }
  for (std::size_t m = 0; m < soup.members.size(); ++m) {
    const ProcessKind k = soup.members[m].process.kind();
    if (k == ProcessKind::Choice) out.push_back(Redex{RedexKind::Choice, 0, m});
    if (k == ProcessKind::Call) out.push_back(Redex{RedexKind::Call, 0, m});
  }
  return out;
}

TraceEntry step_at(const Program& prog, Soup& soup, const Redex& redex, Chooser& chooser) {
  TraceEntry entry;
  entry.rule = std::string(to_string(redex.kind));
  Builder builder(prog, soup, false);

  if (redex.kind == RedexKind::Choice || redex.kind == RedexKind::Call) {
    Member m = soup.members[redex.member];
    remove_members(soup, {redex.member});
    if (redex.kind == RedexKind::Choice) {
      const Side side = chooser.choose(m.process.left(), m.process.right());
      entry.subject = std::string(to_string(side));
      entry.decision = side;
      builder.insert(side == Side::Left ? m.process.left() : m.process.right(), std::move(m.typing));
    } else {
      entry.subject = m.process.callee();
      builder.insert(unfold_call(prog, m.process.callee(), m.process.args()), std::move(m.typing));
    }
    entry.members = soup.members.size();
    entry.channels = soup.channels.size();
    return entry;
  }

  const Channel ch = soup.channels[redex.channel];
  const Name& c = ch.name;
  entry.subject = c;
  auto [i, j] = endpoints(soup, c);
  Member a = soup.members[i];
  Member b = soup.members[j];

  switch (redex.kind) {
    case RedexKind::Link: {
      if (!is_link_on(a.process, c)) std::swap(a, b);
      const Name d = a.process.x() == c ? a.process.y() : a.process.x();
      remove_members(soup, {i, j});
      remove_channel(soup, redex.channel);
      Typing t = without(b.typing, c);
      t.emplace(d, a.typing.at(d));
      builder.insert(substitute(b.process, d, c), std::move(t));
      break;
    }
    case RedexKind::Unit: {
      if (a.process.kind() != ProcessKind::Close) std::swap(a, b);
      remove_members(soup, {i, j});
      remove_channel(soup, redex.channel);
      builder.insert(b.process.body(), without(b.typing, c));
      break;
    }
    case RedexKind::Pair: {
      if (a.process.kind() != ProcessKind::Fork) std::swap(a, b);
      const Process& f = a.process;
      const Process& jn = b.process;
      const Formula& tensor = a.typing.at(c);
      const Name u = builder.fresh_channel(f.y());
      const Name v = builder.fresh_channel(f.z());
      Process p = substitute(f.left(), u, f.y());
      Process q = substitute(f.right(), v, f.z());
      Process r = rename(jn.body(), {{jn.y(), u}, {jn.z(), v}});
      auto [tp, tq] = split(without(a.typing, c), p, q);
      tp.emplace(u, tensor.left());
      tq.emplace(v, tensor.right());
      Typing tr = without(b.typing, c);
      tr.emplace(u, dual(tensor.left()));
      tr.emplace(v, dual(tensor.right()));
      remove_members(soup, {i, j});
      remove_channel(soup, redex.channel);
      soup.channels.push_back(Channel{u, positive_side(tensor.left()), soup.next_index++});
      soup.channels.push_back(Channel{v, positive_side(tensor.right()), soup.next_index++});
      builder.insert(std::move(p), std::move(tp));
      builder.insert(std::move(q), std::move(tq));
      builder.insert(std::move(r), std::move(tr));
      break;
    }
    case RedexKind::Sum: {
      if (a.process.kind() != ProcessKind::Select) std::swap(a, b);
      const Process& sel = a.process;
      const Process& cs = b.process;
      const bool first = sel.tag() == Tag::In1;
      const Formula& sum = a.typing.at(c);
      const Formula picked = first ? sum.left() : sum.right();
      const Name u = builder.fresh_channel(sel.y());
      Typing ts = without(a.typing, c);
      ts.emplace(u, picked);
      Typing tc = without(b.typing, c);
      tc.emplace(u, dual(picked));
      Process p = substitute(sel.body(), u, sel.y());
      Process q = substitute(first ? cs.left() : cs.right(), u, cs.y());
      remove_members(soup, {i, j});
      remove_channel(soup, redex.channel);
      soup.channels.push_back(Channel{u, positive_side(picked), soup.next_index++});
      builder.insert(std::move(p), std::move(ts));
      builder.insert(std::move(q), std::move(tc));
      break;
    }
    case RedexKind::Rec: {
      if (a.process.kind() != ProcessKind::Rec) std::swap(a, b);
      const Formula unfolded = unfold(a.typing.at(c));
      const Name u = builder.fresh_channel(a.process.y());
      Typing ta = without(a.typing, c);
      ta.emplace(u, unfolded);
      Typing tb = without(b.typing, c);
      tb.emplace(u, dual(unfolded));
      Process p = substitute(a.process.body(), u, a.process.y());
      Process q = substitute(b.process.body(), u, b.process.y());
      remove_members(soup, {i, j});
      remove_channel(soup, redex.channel);
      soup.channels.push_back(Channel{u, positive_side(unfolded), soup.next_index++});
      builder.insert(std::move(p), std::move(ta));
      builder.insert(std::move(q), std::move(tb));
      break;
    }
    case RedexKind::Fail:
      break;
    case RedexKind::Choice:
    case RedexKind::Call:
      break;
  }
  entry.members = soup.members.size();
  entry.channels = soup.channels.size();
  return entry;
}

std::optional<TraceEntry> step(const Program& prog, Soup& soup, Chooser& chooser) {
  std::vector<Redex> redexes = enumerate_redexes(soup);
  if (redexes.empty()) return std::nullopt;
  return step_at(prog, soup, redexes.front(), chooser);
}

Trace run_soup(const Program& prog, Soup soup, const RankTable& ranks, const Policy& policy, std::uint64_t fuel,
               const StepObserver& observe) {
  Trace trace;
  Chooser chooser(policy, ranks);
  for (;;) {
    std::vector<Redex> redexes = enumerate_redexes(soup);
    if (redexes.empty()) {
      trace.outcome = soup.terminated() ? Outcome::Terminated : Outcome::StuckUnexpected;
      break;
    }
    if (redexes.front().kind == RedexKind::Fail) {
      TraceEntry e{"fail", soup.channels[redexes.front().channel].name, soup.size(), soup.channels.size(), {}};
      trace.entries.push_back(e);
      trace.outcome = Outcome::Failed;
      break;
    }
    if (fuel == 0) {
      trace.outcome = Outcome::FuelExhausted;
      break;
    }
    --fuel;
    TraceEntry e = step_at(prog, soup, redexes.front(), chooser);
    if (observe) observe(soup, e);
    trace.entries.push_back(std::move(e));
  }
  trace.final = std::move(soup);
  return trace;
}

Trace run(const Program& prog, const RankTable& ranks, const Policy& policy, std::uint64_t fuel,
          const StepObserver& observe) {
  return run_soup(prog, initial_soup(prog), ranks, policy, fuel, observe);
}

bool probe_termination(const Program& prog, const Soup& soup, const RankTable& ranks, std::uint64_t fuel) {
  return run_soup(prog, soup, ranks, Policy::min_rank(), fuel).outcome == Outcome::Terminated;
}

}  // namespace pilin
