#include "mas/sim/scenario.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <charconv>

#include "mas/error.hpp"
#include "mas/text.hpp"

namespace mas::sim {

namespace {

SimTime ms_value(const std::string& v, std::size_t line, std::string_view key) {
  const double ms = text::parse_double(v, line, key);
  if (ms < 0.0) throw ParseError(line, fmt::format("{} must not be negative", key));
  return SimTime::from_seconds(ms / 1000.0);
}

// "0.0", "0.01+j0.02", "0-j0.5"
grid::Complex parse_impedance(const std::string& s, std::size_t line) {
  const auto j = s.find('j');
  if (j == std::string::npos) return {text::parse_double(s, line, "fault resistance"), 0.0};
  if (j < 2 || (s[j - 1] != '+' && s[j - 1] != '-')) throw ParseError(line, fmt::format("bad impedance '{}'", s));
  const double r = text::parse_double(s.substr(0, j - 1), line, "fault resistance");
  double x = text::parse_double(s.substr(j + 1), line, "fault reactance");
  if (s[j - 1] == '-') x = -x;
  return {r, x};
}

std::string value_of(const std::string& token, std::string_view key, std::size_t line) {
  const std::string prefix = std::string(key) + "=";
  if (token.rfind(prefix, 0) != 0) throw ParseError(line, fmt::format("expected {}<value>, got '{}'", prefix, token));
  return token.substr(prefix.size());
}

void need(const text::Line& l, std::size_t lo, std::size_t hi, std::string_view usage) {
  if (l.tokens.size() < lo || l.tokens.size() > hi) throw ParseError(l.number, fmt::format("usage: {}", usage));
}

}  // namespace

SimConfig parse_config(std::string_view input) {
  SimConfig cfg;
  std::size_t number = 0;
  std::size_t pos = 0;
  while (pos <= input.size()) {
    const auto end = input.find('\n', pos);
    std::string line(input.substr(pos, end == std::string_view::npos ? std::string_view::npos : end - pos));
    pos = end == std::string_view::npos ? input.size() + 1 : end + 1;
    ++number;
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line.erase(0, line.find_first_not_of(" \t\r"));
    line.erase(line.find_last_not_of(" \t\r") + 1);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ConfigError(fmt::format("line {}: expected key=value", number));
    std::string key = line.substr(0, eq);
    std::string value = line.substr(eq + 1);
    key.erase(key.find_last_not_of(" \t") + 1);
    value.erase(0, value.find_first_not_of(" \t"));
    try {
      if (key == "cycle_ms") {
        cfg.cycle = ms_value(value, number, key);
        if (cfg.cycle.us() <= 0) throw ParseError(number, "cycle_ms must be positive");
      } else if (key == "breaker_ms") {
        cfg.breaker_time = ms_value(value, number, key);
      } else if (key == "horizon_s") {
        const double s = text::parse_double(value, number, key);
        if (s < 0.0) throw ParseError(number, "horizon_s must not be negative");
        cfg.horizon = SimTime::from_seconds(s);
      } else if (key == "latency_tt_ms") {
        cfg.fabric.latency_tt = ms_value(value, number, key);
      } else if (key == "latency_tr_ms") {
        cfg.fabric.latency_tr = ms_value(value, number, key);
      } else if (key == "latency_rr_ms") {
        cfg.fabric.latency_rr = ms_value(value, number, key);
      } else if (key == "latency_rc_ms") {
        cfg.fabric.latency_rc = ms_value(value, number, key);
      } else if (key == "jitter") {
        cfg.fabric.jitter = text::parse_flag(value, number, key);
      } else if (key == "jitter_seed") {
        const auto seed = text::parse_int(value, number, key);
        if (seed < 0) throw ParseError(number, "jitter_seed must not be negative");
        cfg.fabric.jitter_seed = static_cast<std::uint64_t>(seed);
      } else if (key == "f0") {
        cfg.central.f0 = text::parse_double(value, number, key);
      } else if (key == "k_f") {
        cfg.central.k_f = text::parse_double(value, number, key);
        if (cfg.central.k_f <= 0.0) throw ParseError(number, "k_f must be positive");
      } else if (key == "f_min") {
        cfg.central.f_min = text::parse_double(value, number, key);
      } else if (key == "v_min") {
        cfg.central.v_min = text::parse_double(value, number, key);
      } else {
        throw ConfigError(fmt::format("line {}: unknown key '{}'", number, key));
      }
    } catch (const ParseError& e) {
      throw ConfigError(e.what());
    }
  }
  return cfg;
}

std::vector<SimEvent> parse_scenario(std::string_view input, const grid::Network& net) {
  std::vector<SimEvent> out;
  for (const auto& l : text::tokenize_lines(input)) {
    const auto& tk = l.tokens;
    if (tk[0] != "at") throw ParseError(l.number, fmt::format("expected 'at', got '{}'", tk[0]));
    if (tk.size() < 3) throw ParseError(l.number, "usage: at <sec> <action> ...");
    const double sec = text::parse_double(tk[1], l.number, "time");
    if (sec < 0.0) throw ParseError(l.number, "time must not be negative");
    SimEvent ev;
    ev.t = SimTime::from_seconds(sec);
    const std::string& verb = tk[2];

    auto branch = [&](const std::string& id) {
      if (!net.find_branch(id)) throw UnknownElement(l.number, id);
      return id;
    };

    if (verb == "fault") {
      need(l, 4, 7, "at <sec> fault <branch> pos=<l> zf=<r>+j<x> [permanent]");
      grid::FaultSpec f;
      f.branch_id = branch(tk[3]);
      f.permanent = false;
      bool have_pos = false;
      for (std::size_t i = 4; i < tk.size(); ++i) {
        if (tk[i] == "permanent") {
          f.permanent = true;
        } else if (tk[i].rfind("pos=", 0) == 0) {
          f.position = text::parse_double(value_of(tk[i], "pos", l.number), l.number, "position");
          if (f.position < 0.0 || f.position > 1.0) throw ParseError(l.number, "position must lie in [0, 1]");
          have_pos = true;
        } else if (tk[i].rfind("zf=", 0) == 0) {
          f.z_fault = parse_impedance(value_of(tk[i], "zf", l.number), l.number);
          if (f.z_fault.real() < 0.0) throw ParseError(l.number, "fault resistance must not be negative");
        } else {
          throw ParseError(l.number, fmt::format("unexpected '{}'", tk[i]));
        }
      }
      if (!have_pos) throw ParseError(l.number, "fault needs pos=<l>");
      ev.body = FaultApply{f};
    } else if (verb == "clear") {
      need(l, 4, 4, "at <sec> clear <branch>");
      ev.body = FaultClear{branch(tk[3])};
    } else if (verb == "dg") {
      need(l, 5, 5, "at <sec> dg <id> <on|off|p=<pu>|q=<pu>>");
      const auto* src = net.find_source(tk[3]);
      if (!src || !src->is_dg()) throw UnknownElement(l.number, tk[3]);
      DgSet d{tk[3], {}, {}, {}};
      if (tk[4] == "on" || tk[4] == "off") {
        d.online = tk[4] == "on";
      } else if (tk[4].rfind("p=", 0) == 0) {
        d.p = text::parse_double(tk[4].substr(2), l.number, "p");
      } else if (tk[4].rfind("q=", 0) == 0) {
        d.q = text::parse_double(tk[4].substr(2), l.number, "q");
      } else {
        throw ParseError(l.number, fmt::format("unexpected '{}'", tk[4]));
      }
      ev.body = d;
    } else if (verb == "load") {
      need(l, 5, 5, "at <sec> load <id> <on|off>");
      if (!net.find_load(tk[3])) throw UnknownElement(l.number, tk[3]);
      if (tk[4] != "on" && tk[4] != "off") throw ParseError(l.number, "load state must be on or off");
      ev.body = LoadSet{tk[3], tk[4] == "on"};
    } else if (verb == "breaker") {
      need(l, 5, 5, "at <sec> breaker <branch> <open|close>");
      if (tk[4] != "open" && tk[4] != "close") throw ParseError(l.number, "breaker action must be open or close");
      ev.body = ManualBreaker{branch(tk[3]), tk[4] == "open"};
    } else {
      throw ParseError(l.number, fmt::format("unknown action '{}'", verb));
    }
    out.push_back(std::move(ev));
  }
  std::stable_sort(out.begin(), out.end(), [](const SimEvent& a, const SimEvent& b) { return a.t < b.t; });
  for (std::size_t i = 0; i < out.size(); ++i) out[i].seq = i;
  return out;
}

std::vector<SimEvent> load_scenario(std::string_view text, const grid::Network& net, const SimConfig& cfg) {
  auto out = parse_scenario(text, net);
  std::uint64_t seq = out.size();
  for (SimTime t{}; t < cfg.horizon; t += cfg.cycle) out.push_back({t, seq++, MeasureCycle{}});
  std::sort(out.begin(), out.end(), [](const SimEvent& a, const SimEvent& b) {
    return a.t != b.t ? a.t < b.t : a.seq < b.seq;
  });
  return out;
}

}  // namespace mas::sim
