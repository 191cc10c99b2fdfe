#include "mas/grid/measurement.hpp"

#include <cmath>

#include "mas/error.hpp"

namespace mas::grid {

std::string_view to_string(Direction d) {
  switch (d) {
    case Direction::Forward: return "Forward";
    case Direction::Reverse: return "Reverse";
    case Direction::Undetermined: return "Undetermined";
  }
  return "?";
}

Measurement branch_measurement(const Network& net, const FaultSolution& sol, std::string_view branch_id, End end,
                               SimTime t) {
  const Branch* br = net.find_branch(branch_id);
  if (!br) throw UnknownBranch(std::string(branch_id));

  const Complex i_ft = sol.current(br->id, end);
  const std::string& bus = end == End::From ? br->from_bus : br->to_bus;
  auto vit = sol.bus_v.find(bus);
  const Complex v = vit == sol.bus_v.end() ? Complex{} : vit->second;
  // Current flowing from the bus into the line at this end.
  const Complex i_in = end == End::From ? i_ft : -i_ft;

  Measurement m;
  m.branch_id = br->id;
  m.end = end;
  m.t = t;
  m.i_mag.fill(std::abs(i_ft));
  m.v_mag.fill(std::abs(v));

  if (std::abs(i_in) < kNoiseFloor) {
    m.direction = Direction::Undetermined;
    return m;
  }
  const Complex v_pol = std::abs(v) < kMemoryPolarizeBelow ? Complex(1.0, 0.0) : v;
  const Complex torque = v_pol * std::conj(i_in) * std::polar(1.0, -std::arg(br->z));
  m.direction = torque.real() >= 0.0 ? Direction::Forward : Direction::Reverse;
  return m;
}

}  // namespace mas::grid
