#include <fmt/format.h>

#include <set>
#include <string>

#include "mas/error.hpp"
#include "mas/grid/network.hpp"
#include "mas/text.hpp"

namespace mas::grid {

namespace {

void expect_fields(const text::Line& line, std::size_t n, const char* keyword, const char* layout) {
  if (line.tokens.size() != n) {
    throw ParseError(line.number, fmt::format("{} expects {} fields: {}", keyword, n - 1, layout));
  }
}

}  // namespace

Network build_network(std::string_view input) {
  const auto lines = text::tokenize_lines(input);

  std::vector<Bus> buses;
  std::vector<Branch> branches;
  std::vector<Source> sources;
  std::vector<Load> loads;
  // (line, owner, bus) references, resolved once every BUS line is known.
  std::vector<std::tuple<std::size_t, std::string, std::string>> refs;

  for (const auto& line : lines) {
    const auto& t = line.tokens;
    const std::string& kw = t[0];
    const std::size_t n = line.number;
    if (kw == "BUS") {
      expect_fields(line, 3, "BUS", "<id> <kv>");
      buses.push_back(Bus{t[1], text::parse_double(t[2], n, "nominal voltage")});
    } else if (kw == "BRANCH") {
      expect_fields(line, 6, "BRANCH", "<id> <from> <to> <r_pu> <x_pu>");
      Branch br;
      br.id = t[1];
      br.from_bus = t[2];
      br.to_bus = t[3];
      br.z = Complex(text::parse_double(t[4], n, "resistance"), text::parse_double(t[5], n, "reactance"));
      refs.emplace_back(n, br.id, br.from_bus);
      refs.emplace_back(n, br.id, br.to_bus);
      if (std::abs(br.z) == 0.0) throw ValidationError(fmt::format("line {}: branch '{}' has zero impedance", n, br.id));
      branches.push_back(std::move(br));
    } else if (kw == "SOURCE") {
      expect_fields(line, 13, "SOURCE",
                    "<id> <bus> <kind> <emf_pu> <r_pu> <x_pu> <i_limit_pu> <online> <p> <q> <p_max> <q_max>");
      Source s;
      s.id = t[1];
      s.bus = t[2];
      auto kind = parse_source_kind(t[3]);
      if (!kind) throw ParseError(n, fmt::format("unknown source kind '{}'", t[3]));
      s.kind = *kind;
      s.emf = Complex(text::parse_double(t[4], n, "emf"), 0.0);
      s.z_int = Complex(text::parse_double(t[5], n, "resistance"), text::parse_double(t[6], n, "reactance"));
      s.i_limit = text::parse_double(t[7], n, "current limit");
      s.online = text::parse_flag(t[8], n, "online flag");
      s.p_out = text::parse_double(t[9], n, "p");
      s.q_out = text::parse_double(t[10], n, "q");
      s.p_max = text::parse_double(t[11], n, "p_max");
      s.q_max = text::parse_double(t[12], n, "q_max");
      refs.emplace_back(n, s.id, s.bus);
      sources.push_back(std::move(s));
    } else if (kw == "LOAD") {
      expect_fields(line, 6, "LOAD", "<id> <bus> <p_pu> <q_pu> <shed_priority>");
      Load l;
      l.id = t[1];
      l.bus = t[2];
      l.p = text::parse_double(t[3], n, "p");
      l.q = text::parse_double(t[4], n, "q");
      l.shed_priority = static_cast<int>(text::parse_int(t[5], n, "shed priority"));
      refs.emplace_back(n, l.id, l.bus);
      loads.push_back(std::move(l));
    } else {
      throw ParseError(n, fmt::format("unknown keyword '{}'", kw));
    }
  }

  std::set<std::string, std::less<>> declared;
  for (const auto& b : buses) declared.insert(b.id);
  for (const auto& [line, owner, bus] : refs) {
    if (!declared.contains(bus)) {
      throw ValidationError(fmt::format("line {}: '{}' references undeclared bus '{}'", line, owner, bus));
    }
  }

  return Network(std::move(buses), std::move(branches), std::move(sources), std::move(loads));
}

std::string write_network(const Network& net) {
  using text::format_number;
  std::string out;
  for (const auto& b : net.buses()) out += fmt::format("BUS {} {}\n", b.id, format_number(b.v_nominal_kv));
  for (const auto& br : net.branches()) {
    out += fmt::format("BRANCH {} {} {} {} {}\n", br.id, br.from_bus, br.to_bus, format_number(br.z.real()),
                       format_number(br.z.imag()));
  }
  for (const auto& s : net.sources()) {
    out += fmt::format("SOURCE {} {} {} {} {} {} {} {} {} {} {} {}\n", s.id, s.bus, to_string(s.kind),
                       format_number(std::abs(s.emf)), format_number(s.z_int.real()), format_number(s.z_int.imag()),
                       format_number(s.i_limit), s.online ? 1 : 0, format_number(s.p_out), format_number(s.q_out),
                       format_number(s.p_max), format_number(s.q_max));
  }
  for (const auto& l : net.loads()) {
    out += fmt::format("LOAD {} {} {} {} {}\n", l.id, l.bus, format_number(l.p), format_number(l.q), l.shed_priority);
  }
  return out;
}

}  // namespace mas::grid
