#pragma once

#include <cstdint>
#include <random>
#include <string>

#include "mas/grid/network.hpp"

namespace mas::testing {

/// Path to a file under the repository's data/ directory.
std::string data_path(const std::string& relative);

grid::Network fig1_network();

/// Grid E=1.0 behind j0.10 feeding one branch L1 of j0.40.
std::string single_branch_text();

/// Grid j0.10 -- L1 j0.40 -- L2 j0.40 -- inverter PV (i_limit) at the far bus.
std::string n3_text(double dg_i_limit = 0.3, bool dg_online = true);

/// Random connected radial network with at most `max_buses` buses and
/// `max_dgs` DGs of mixed machine and inverter kinds.
grid::Network random_radial_network(std::mt19937_64& rng, int max_buses = 10, int max_dgs = 3);

}  // namespace mas::testing
