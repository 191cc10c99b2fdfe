#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <string_view>

#include "mas/grid/fault_solver.hpp"
#include "mas/sim_time.hpp"

namespace mas::grid {

enum class Direction : std::uint8_t { Undetermined = 0x00, Forward = 0x01, Reverse = 0x02 };

std::string_view to_string(Direction d);

/// Currents below this magnitude carry no direction.
inline constexpr double kNoiseFloor = 1e-6;
/// Below this voltage magnitude the relay polarizes from pre-fault memory.
inline constexpr double kMemoryPolarizeBelow = 0.05;

/// Per-phase sensor readings at one branch end.
struct Measurement {
  std::string branch_id;
  End end = End::From;
  std::array<double, 3> i_mag{};
  std::array<double, 3> v_mag{};
  Direction direction = Direction::Undetermined;
  SimTime t;
};

/// Reads the solved current and voltage at one end of a branch. Direction
/// is Forward when power flows from the bus into the line, judged against
/// the line's impedance angle; near-zero voltages use the 1.0 pu pre-fault
/// memory as polarizing quantity.
Measurement branch_measurement(const Network& net, const FaultSolution& sol, std::string_view branch_id, End end,
                               SimTime t = {});

}  // namespace mas::grid
