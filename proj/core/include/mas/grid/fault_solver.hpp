#pragma once

#include <map>
#include <string>
#include <utility>

#include "mas/grid/network.hpp"

namespace mas::grid {

enum class End { From, To };

/// Balanced shunt fault on a branch, `position` measured from the from-end.
struct FaultSpec {
  std::string branch_id;
  double position = 0.5;
  Complex z_fault{0.0, 0.0};
  bool permanent = true;
};

/// Quasi-steady-state solution for one network condition. Branch currents
/// are positive in the from-bus -> to-bus direction at both ends.
struct FaultSolution {
  std::map<std::string, Complex, std::less<>> bus_v;
  std::map<std::pair<std::string, End>, Complex, std::less<>> branch_i;
  /// Current injected by each online source into its bus.
  std::map<std::string, Complex, std::less<>> source_i;
  Complex fault_v{0.0, 0.0};
  Complex fault_i{0.0, 0.0};
  bool has_fault = false;
  /// False when the fault point has no path to any online source.
  bool fault_energized = false;
  bool converged = true;
  int iterations = 0;

  Complex current(const std::string& branch_id, End end) const;
};

struct SolverOptions {
  int max_iterations = 20;
  double tolerance = 1e-9;
  /// When set, a fault with no path to a source yields a dead solution
  /// (fault_energized = false) instead of throwing SingularNetwork.
  bool allow_dead_fault = false;
};

/// Flat 1.0 pu profile with zero branch currents.
FaultSolution solve_prefault(const Network& net);

/// Nodal fault solution. Machine sources enter as EMF behind internal
/// impedance; inverter sources follow the same model until their current
/// reaches i_limit, after which they become magnitude-clamped current
/// sources resolved by fixed-point iteration.
FaultSolution solve_fault(const Network& net, const FaultSpec& fault, const SolverOptions& opts = {});

/// Healthy-network solution with the same source models (no fault applied).
FaultSolution solve_network(const Network& net, const SolverOptions& opts = {});

}  // namespace mas::grid
