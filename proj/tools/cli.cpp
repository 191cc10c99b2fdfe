#include "cli.hpp"

#include <fmt/format.h>

#include <CLI11.hpp>
#include <fstream>
#include <optional>

#include "mas/adaptive/knowledge.hpp"
#include "mas/error.hpp"
#include "mas/grid/network.hpp"
#include "mas/sim/engine.hpp"
#include "mas/text.hpp"

namespace mas::cli {

namespace {

// Input that cannot be read is invalid input; output that cannot be
// written is a runtime failure.
class InputError : public Error {
 public:
  using Error::Error;
};

class OutputError : public Error {
 public:
  using Error::Error;
};

std::string read_input(const std::string& path) {
  try {
    return text::read_file(path);
  } catch (const Error& e) {
    throw InputError(e.what());
  }
}

void write_output(const std::string& path, const std::string& content) {
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw OutputError(fmt::format("cannot write '{}'", path));
  f << content;
  f.flush();
  if (!f) throw OutputError(fmt::format("cannot write '{}'", path));
}

grid::Network load_network(const std::string& path) { return grid::build_network(read_input(path)); }

std::string join(const std::vector<std::string>& v) {
  std::string s;
  for (const auto& x : v) s += (s.empty() ? "" : ",") + x;
  return s.empty() ? "-" : s;
}

std::string render_report(const sim::RunLog& log, const sim::Metrics& m) {
  std::string o;
  o += fmt::format("network {}  events {}  messages {}\n", log.network_hash, log.events.size(), log.messages.size());

  o += "\ntrips\n";
  int total = 0;
  for (const auto& [b, n] : m.trips) {
    o += fmt::format("  {:<10} {:>6}\n", b, n);
    total += n;
  }
  o += fmt::format("  {:<10} {:>6}\n", "total", total);

  o += "\nfaults\n";
  o += fmt::format("  {:>3}  {:<8} {:>10} {:>11}  {:<9} {}\n", "#", "branch", "t", "clearing_s", "selective",
                   "wrong_trips");
  for (std::size_t i = 0; i < m.faults.size(); ++i) {
    const auto& f = m.faults[i];
    o += fmt::format("  {:>3}  {:<8} {:>10} {:>11}  {:<9} {}\n", i + 1, f.branch, format_seconds(f.applied),
                     f.clearing_s ? fmt::format("{:.6f}", *f.clearing_s) : "-", f.selective ? "pass" : "fail",
                     join(f.wrong_trips));
  }

  o += "\nmessages per mode\n";
  o += fmt::format("  {:<8} {:>9} {:>10}\n", "mode", "messages", "bytes");
  for (const auto& [mode, t] : m.per_mode) o += fmt::format("  {:<8} {:>9} {:>10}\n", mode, t.messages, t.bytes);

  o += "\nmessages per link class\n";
  o += fmt::format("  {:<8} {:>9} {:>10}\n", "link", "messages", "bytes");
  for (const auto& [link, t] : m.per_link) o += fmt::format("  {:<8} {:>9} {:>10}\n", link, t.messages, t.bytes);

  o += "\n";
  o += fmt::format("loads shed      {}\n", join(m.loads_shed));
  o += fmt::format("dg disconnects  {}\n", m.dg_disconnects);
  o += fmt::format("group changes   {}\n", m.group_changes);
  o += fmt::format("selectivity     {}\n", m.faults.empty() ? "none" : m.all_selective() ? "pass" : "fail");
  return o;
}

// key<TAB>value lines with strictly increasing keys.
void check_metrics_file(const std::string& text) {
  std::string prev;
  std::size_t number = 0;
  std::size_t pos = 0;
  while (pos < text.size()) {
    const auto end = text.find('\n', pos);
    if (end == std::string::npos) throw ParseError(number + 1, "metrics file ends mid-line");
    const std::string line = text.substr(pos, end - pos);
    pos = end + 1;
    ++number;
    const auto tab = line.find('\t');
    if (tab == std::string::npos || tab == 0 || line.find('\t', tab + 1) != std::string::npos)
      throw ParseError(number, "expected key<TAB>value");
    const std::string key = line.substr(0, tab);
    if (!prev.empty() && key <= prev) throw ParseError(number, "keys are not sorted");
    prev = key;
  }
}

template <typename F>
int guarded(std::ostream& err, F&& body) {
  try {
    return body();
  } catch (const OutputError& e) {
    err << "error: " << e.what() << '\n';
    return kRuntimeFailure;
  } catch (const InputError& e) {
    err << "error: " << e.what() << '\n';
    return kInvalidInput;
  } catch (const ParseError& e) {
    err << "error: " << e.what() << '\n';
    return kInvalidInput;
  } catch (const ValidationError& e) {
    err << "error: " << e.what() << '\n';
    return kInvalidInput;
  } catch (const UnknownElement& e) {
    err << "error: " << e.what() << '\n';
    return kInvalidInput;
  } catch (const ConfigError& e) {
    err << "error: " << e.what() << '\n';
    return kInvalidInput;
  } catch (const HashMismatch& e) {
    err << "error: " << e.what() << '\n';
    return kInvalidInput;
  } catch (const TooManyDgs& e) {
    err << "error: " << e.what() << '\n';
    return kInvalidInput;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kRuntimeFailure;
  }
}

}  // namespace

int cmd_validate(const std::string& net_path, std::ostream& out) {
  const auto net = load_network(net_path);
  out << fmt::format("{}: {} buses, {} branches, {} sources, {} loads (network {})\n", net_path, net.buses().size(),
                     net.branches().size(), net.sources().size(), net.loads().size(), net.fingerprint());
  return kOk;
}

int cmd_study(const std::string& net_path, const std::string& out_path, bool strict, std::ostream& out) {
  const auto net = load_network(net_path);
  const auto kb = adaptive::build_knowledge(net);
  write_output(out_path, adaptive::write_knowledge(kb));
  out << fmt::format("entries {} infeasible {}\n", kb.entries.size(), kb.infeasible.size());
  for (const auto& [bits, reason] : kb.infeasible)
    out << fmt::format("infeasible {} {}\n", bits.empty() ? "-" : bits, reason);
  return strict && !kb.infeasible.empty() ? kSelectivityViolation : kOk;
}

int cmd_run(const RunOptions& opt, std::ostream& out) {
  const auto net = load_network(opt.net_path);
  const auto cfg = opt.config_path.empty() ? sim::SimConfig{} : sim::parse_config(read_input(opt.config_path));
  auto events = sim::load_scenario(read_input(opt.scenario_path), net, cfg);

  std::optional<adaptive::KnowledgeBase> kb;
  if (!opt.kb_path.empty()) kb = adaptive::read_knowledge(read_input(opt.kb_path));
  sim::SettingsSource src;
  if (kb) src.kb = &*kb;
  if (opt.has_static_group) src.static_bits = opt.static_group == "-" ? std::string() : opt.static_group;

  const auto r = sim::run(net, src, std::move(events), cfg);
  if (!opt.log_path.empty()) write_output(opt.log_path, sim::write_log(r.log));
  const auto table = r.metrics.to_table();
  if (!opt.metrics_path.empty()) write_output(opt.metrics_path, table);

  int trips = 0;
  for (const auto& [b, n] : r.metrics.trips) trips += n;
  std::size_t failed = 0;
  for (const auto& f : r.metrics.faults) failed += f.selective ? 0 : 1;
  out << fmt::format("events {} messages {} trips {} faults {} non-selective {} loads_shed {}\n", r.log.events.size(),
                     r.log.messages.size(), trips, r.metrics.faults.size(), failed, r.metrics.loads_shed.size());
  out << fmt::format("selectivity {}\n",
                     r.metrics.faults.empty() ? "none" : r.metrics.all_selective() ? "pass" : "fail");
  return opt.strict && failed > 0 ? kSelectivityViolation : kOk;
}

int cmd_report(const std::string& log_path, const std::string& metrics_path, std::ostream& out) {
  const auto log = sim::read_log(read_input(log_path));
  std::string expected;
  if (!metrics_path.empty()) {
    expected = read_input(metrics_path);
    check_metrics_file(expected);
  }
  const auto m = sim::compute_metrics(log.events, log.messages, log.agents);
  out << render_report(log, m);
  if (metrics_path.empty()) return kOk;

  const auto table = m.to_table();
  if (table == expected) {
    out << "CONSISTENT\n";
    return kOk;
  }
  // first differing line, for the diagnostic
  const auto got = text::split(table, '\n');
  const auto want = text::split(expected, '\n');
  std::size_t i = 0;
  while (i < got.size() && i < want.size() && got[i] == want[i]) ++i;
  out << fmt::format("INCONSISTENT recomputed '{}' vs file '{}'\n", i < got.size() ? got[i] : "<end>",
                     i < want.size() ? want[i] : "<end>");
  return kRuntimeFailure;
}

int main(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Multi-agent protection simulator for distribution networks with DGs", "mas"};
  app.require_subcommand(1);

  std::string net_path;
  auto* validate = app.add_subcommand("validate", "Parse and validate a network file");
  validate->add_option("network", net_path, "Network file")->required();

  std::string kb_out;
  bool strict = false;
  auto* study = app.add_subcommand("study", "Build the offline knowledge base");
  study->add_option("network", net_path, "Network file")->required();
  study->add_option("--out", kb_out, "Knowledge base output file")->required();
  study->add_flag("--strict", strict, "Exit 3 when any status vector is infeasible");

  RunOptions ro;
  auto* run = app.add_subcommand("run", "Run a scenario");
  run->add_option("network", ro.net_path, "Network file")->required();
  run->add_option("scenario", ro.scenario_path, "Scenario file")->required();
  run->add_option("--kb", ro.kb_path, "Knowledge base file");
  run->add_option("--config", ro.config_path, "Simulation config file");
  run->add_option("--log", ro.log_path, "Event and message log output");
  run->add_option("--metrics", ro.metrics_path, "Metrics table output");
  auto* frozen = run->add_option("--static-group", ro.static_group, "Freeze settings to one DG status vector");
  run->add_flag("--strict", ro.strict, "Exit 3 when any fault is not cleared selectively");

  std::string log_path;
  std::string metrics_path;
  auto* report = app.add_subcommand("report", "Recompute metrics from a run log");
  report->add_option("log", log_path, "Run log")->required();
  report->add_option("--metrics", metrics_path, "Metrics table to check against");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << '\n' << "run 'mas --help' for usage\n";
    return kInvalidInput;
  }

  return guarded(err, [&] {
    if (*validate) return cmd_validate(net_path, out);
    if (*study) return cmd_study(net_path, kb_out, strict, out);
    if (*run) {
      ro.has_static_group = frozen->count() > 0;
      return cmd_run(ro, out);
    }
    return cmd_report(log_path, metrics_path, out);
  });
}

}  // namespace mas::cli
