#include "fixtures.hpp"

#include <fmt/format.h>

#include "mas/text.hpp"

#ifndef MAS_DATA_DIR
#error "MAS_DATA_DIR must point at the repository data directory"
#endif

namespace mas::testing {

std::string data_path(const std::string& relative) { return std::string(MAS_DATA_DIR) + "/" + relative; }

grid::Network fig1_network() { return grid::build_network(text::read_file(data_path("networks/fig1.net"))); }

std::string single_branch_text() {
  return "BUS S0 10\n"
         "BUS S1 10\n"
         "BRANCH L1 S0 S1 0 0.40\n"
         "SOURCE G S0 GridSupply 1.0 0 0.10 0 1 0 0 10 10\n";
}

std::string n3_text(double dg_i_limit, bool dg_online) {
  return fmt::format(
      "BUS S0 10\n"
      "BUS J1 10\n"
      "BUS J2 10\n"
      "BRANCH L1 S0 J1 0 0.40\n"
      "BRANCH L2 J1 J2 0 0.40\n"
      "SOURCE G S0 GridSupply 1.0 0 0.10 0 1 0.3 0 10 10\n"
      "SOURCE PV1 J2 PV 1.0 0 0.10 {} {} 0.2 0 0.3 0.1\n"
      "LOAD LD1 J1 0.25 0.05 1\n"
      "LOAD LD2 J2 0.25 0.05 2\n",
      dg_i_limit, dg_online ? 1 : 0);
}

grid::Network random_radial_network(std::mt19937_64& rng, int max_buses, int max_dgs) {
  using grid::Complex;
  auto uni = [&](double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng); };
  auto pick = [&](int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng); };

  const int n = pick(2, max_buses);
  std::vector<grid::Bus> buses;
  for (int i = 0; i < n; ++i) buses.push_back({fmt::format("N{}", i), 10.0});

  std::vector<grid::Branch> branches;
  for (int i = 1; i < n; ++i) {
    const int parent = pick(0, i - 1);
    grid::Branch br;
    br.id = fmt::format("L{}", i);
    br.from_bus = buses[static_cast<std::size_t>(parent)].id;
    br.to_bus = buses[static_cast<std::size_t>(i)].id;
    if (uni(0, 1) < 0.2) std::swap(br.from_bus, br.to_bus);
    br.z = Complex(uni(0.01, 0.3), uni(0.05, 0.6));
    branches.push_back(br);
  }

  std::vector<grid::Source> sources;
  grid::Source g;
  g.id = "G";
  g.bus = "N0";
  g.kind = grid::SourceKind::GridSupply;
  g.emf = Complex(uni(0.95, 1.05), 0.0);
  g.z_int = Complex(uni(0.0, 0.05), uni(0.05, 0.2));
  g.p_max = g.q_max = 10.0;
  sources.push_back(g);

  const grid::SourceKind kinds[] = {grid::SourceKind::PV, grid::SourceKind::CCHP, grid::SourceKind::CESS,
                                    grid::SourceKind::FuelCell};
  const int n_dgs = pick(0, max_dgs);
  for (int d = 0; d < n_dgs; ++d) {
    grid::Source s;
    s.id = fmt::format("DG{}", d);
    s.bus = buses[static_cast<std::size_t>(pick(0, n - 1))].id;
    s.kind = kinds[pick(0, 3)];
    s.emf = std::polar(uni(0.95, 1.05), uni(-0.1, 0.1));
    if (grid::is_inverter(s.kind)) {
      s.z_int = Complex(uni(0.0, 0.02), uni(0.1, 0.3));
      s.i_limit = uni(0.1, 1.5);
    } else {
      s.z_int = Complex(uni(0.0, 0.02), uni(0.2, 0.5));
    }
    s.online = uni(0, 1) < 0.8;
    s.p_out = 0.1;
    s.p_max = 0.5;
    s.q_max = 0.2;
    sources.push_back(s);
  }
  return grid::Network(std::move(buses), std::move(branches), std::move(sources), {});
}

}  // namespace mas::testing
