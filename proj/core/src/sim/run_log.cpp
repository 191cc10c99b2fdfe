#include "mas/sim/run_log.hpp"

#include <fmt/format.h>

#include <array>

#include "mas/error.hpp"
#include "mas/text.hpp"

namespace mas::sim {

namespace {

constexpr std::string_view kHeader = "# mas run log";

constexpr std::array<std::string_view, 7> kTags{"DIGEST", "TRIP", "INSTR", "GROUP", "SUMMARY", "DISPATCH", "SHED"};

SimTime parse_time(std::string_view v, std::size_t line) {
  const double s = text::parse_double(v, line, "time");
  if (s < 0.0) throw ParseError(line, "negative time");
  return SimTime::from_seconds(s);
}

// Splits "k1=v1 k2=v2 ..." up to `count` fields; the last one keeps the rest.
std::vector<std::pair<std::string, std::string>> fields(std::string_view line, std::size_t count, std::size_t number) {
  std::vector<std::pair<std::string, std::string>> out;
  std::size_t pos = 0;
  for (std::size_t i = 0; i < count; ++i) {
    const auto eq = line.find('=', pos);
    if (eq == std::string_view::npos) throw ParseError(number, "malformed record");
    std::size_t end = i + 1 == count ? line.size() : line.find(' ', eq);
    if (end == std::string_view::npos) throw ParseError(number, "malformed record");
    out.emplace_back(std::string(line.substr(pos, eq - pos)), std::string(line.substr(eq + 1, end - eq - 1)));
    pos = end + 1;
  }
  return out;
}

void expect_key(const std::pair<std::string, std::string>& f, std::string_view key, std::size_t number) {
  if (f.first != key) throw ParseError(number, fmt::format("expected '{}=', got '{}='", key, f.first));
}

comms::AgentKind parse_kind(std::string_view s, std::size_t number) {
  for (auto k : {comms::AgentKind::TerminalBranch, comms::AgentKind::TerminalDg, comms::AgentKind::Regional,
                 comms::AgentKind::Central})
    if (comms::to_string(k) == s) return k;
  throw ParseError(number, fmt::format("unknown agent kind '{}'", s));
}

}  // namespace

std::string write_log(const RunLog& log) {
  std::string out(kHeader);
  out += '\n';
  out += fmt::format("# network {}\n", log.network_hash);
  for (const auto& [id, kind] : log.agents) out += fmt::format("# agent {} {}\n", id, comms::to_string(kind));
  out += "# events\n";
  for (const auto& r : log.events) out += agents::format_event(r) + '\n';
  out += "# messages\n";
  for (const auto& r : log.messages) out += comms::format_record(r) + '\n';
  out += fmt::format("# end events={} messages={}\n", log.events.size(), log.messages.size());
  return out;
}

agents::EventRecord parse_event(std::string_view line, std::size_t number) {
  const auto f = fields(line, 4, number);
  expect_key(f[0], "t", number);
  expect_key(f[1], "agent", number);
  expect_key(f[2], "event", number);
  expect_key(f[3], "detail", number);
  agents::EventRecord r;
  r.t = parse_time(f[0].second, number);
  r.agent = f[1].second;
  if (!agents::parse_event_kind(f[2].second, r.kind)) {
    throw ParseError(number, fmt::format("unknown event '{}'", f[2].second));
  }
  if (!f[3].second.empty()) {
    for (const auto& kv : text::split(f[3].second, ' ')) {
      const auto eq = kv.find('=');
      if (eq == std::string::npos) throw ParseError(number, fmt::format("bad detail '{}'", kv));
      r.detail.emplace_back(kv.substr(0, eq), kv.substr(eq + 1));
    }
  }
  if (agents::format_event(r) != line) throw ParseError(number, "record is not in canonical form");
  return r;
}

comms::MessageRecord parse_message(std::string_view line, std::size_t number) {
  const auto f = fields(line, 7, number);
  static constexpr std::array<std::string_view, 7> keys{"t", "seq", "mode", "from", "to", "type", "bytes"};
  for (std::size_t i = 0; i < keys.size(); ++i) expect_key(f[i], keys[i], number);
  comms::MessageRecord r;
  r.t = parse_time(f[0].second, number);
  const auto seq = text::parse_int(f[1].second, number, "seq");
  if (seq < 0) throw ParseError(number, "negative seq");
  r.seq = static_cast<std::uint64_t>(seq);
  bool mode_ok = false;
  for (auto m : {comms::Mode::Direct, comms::Mode::Radio, comms::Mode::Blackboard}) {
    if (comms::to_string(m) == f[2].second) {
      r.mode = m;
      mode_ok = true;
    }
  }
  if (!mode_ok) throw ParseError(number, fmt::format("unknown mode '{}'", f[2].second));
  r.from = f[3].second;
  r.to = f[4].second;
  for (auto tag : kTags)
    if (tag == f[5].second) r.type = tag;
  if (r.type.empty()) throw ParseError(number, fmt::format("unknown message type '{}'", f[5].second));
  const auto bytes = text::parse_int(f[6].second, number, "bytes");
  if (bytes < 0) throw ParseError(number, "negative size");
  r.bytes = static_cast<std::size_t>(bytes);
  if (comms::format_record(r) != line) throw ParseError(number, "record is not in canonical form");
  return r;
}

RunLog read_log(std::string_view input) {
  RunLog log;
  enum class Section { Header, Events, Messages, Done } section = Section::Header;
  std::size_t number = 0;
  std::size_t pos = 0;
  bool saw_header = false;
  bool saw_network = false;
  while (pos < input.size()) {
    const auto end = input.find('\n', pos);
    if (end == std::string_view::npos) throw ParseError(number + 1, "log ends mid-line");
    const std::string_view line = input.substr(pos, end - pos);
    pos = end + 1;
    ++number;
    if (section == Section::Done) throw ParseError(number, "content after end marker");
    if (number == 1) {
      if (line != kHeader) throw ParseError(number, "not a run log");
      saw_header = true;
      continue;
    }
    if (line.rfind("# ", 0) == 0) {
      const auto tk = text::split(line.substr(2), ' ');
      if (tk[0] == "network" && tk.size() == 2 && section == Section::Header) {
        log.network_hash = tk[1];
        saw_network = true;
      } else if (tk[0] == "agent" && tk.size() == 3 && section == Section::Header) {
        log.agents[tk[1]] = parse_kind(tk[2], number);
      } else if (tk[0] == "events" && tk.size() == 1 && section == Section::Header) {
        section = Section::Events;
      } else if (tk[0] == "messages" && tk.size() == 1 && section == Section::Events) {
        section = Section::Messages;
      } else if (tk[0] == "end" && tk.size() == 3 && section == Section::Messages) {
        const auto want = fmt::format("events={} messages={}", log.events.size(), log.messages.size());
        if (fmt::format("{} {}", tk[1], tk[2]) != want) throw ParseError(number, "record counts do not match");
        section = Section::Done;
      } else {
        throw ParseError(number, fmt::format("unexpected marker '{}'", line));
      }
      continue;
    }
    if (section == Section::Events) {
      auto r = parse_event(line, number);
      if (!log.events.empty() && r.t < log.events.back().t) throw ParseError(number, "events out of order");
      log.events.push_back(std::move(r));
    } else if (section == Section::Messages) {
      auto r = parse_message(line, number);
      if (!log.messages.empty() && r.seq <= log.messages.back().seq) throw ParseError(number, "messages out of order");
      log.messages.push_back(std::move(r));
    } else {
      throw ParseError(number, "record outside a section");
    }
  }
  if (!saw_header || !saw_network) throw ParseError(number, "missing log header");
  if (section != Section::Done) throw ParseError(number, "log is truncated");
  return log;
}

}  // namespace mas::sim
