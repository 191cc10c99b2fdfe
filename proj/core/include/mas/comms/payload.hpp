#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

#include "mas/grid/measurement.hpp"

namespace mas::comms {

/// Breaker or DG state as carried in a digest's 1-byte status field.
enum class BreakerCode : std::uint8_t { Open = 0x00, Closed = 0x01 };

/// Branch or DG state snapshot. Voltage and switch count travel only on
/// terminal -> regional links.
struct StatusDigest {
  std::string source_id;
  BreakerCode breaker_status = BreakerCode::Closed;
  grid::Direction direction = grid::Direction::Undetermined;
  double i_mag_a = 0.0;
  std::optional<double> v_mag;
  std::optional<std::uint8_t> switch_count;
};

struct TripNotice {
  std::string branch_id;
  std::uint8_t stage = 0;
};

enum class Action : std::uint8_t { Open, Close, DgDisconnect, DgConnect };
std::string_view to_string(Action a);

/// Addressed command; every radio receiver sees it, only `target` executes.
struct Instruction {
  std::string target;
  Action action = Action::Open;
};

struct SettingGroupUpdate {
  std::string target;
  std::uint16_t group_id = 0;
  /// Bit pattern of the DG status vector the group was computed for.
  std::uint16_t vector_code = 0;
};

struct AreaSummary {
  std::string area_id;
  /// (DG id, online) for every DG in the area.
  std::vector<std::pair<std::string, bool>> dg_status;
  double p_gen = 0.0;
  double p_load = 0.0;
  double v_min = 1.0;
  std::string v_min_bus;
};

struct DgDispatch {
  std::string dg_id;
  double p = 0.0;
  double q = 0.0;
};

struct LoadShedOrder {
  std::string load_id;
  /// Branch agent that opens the load's feeder switch.
  std::string executor_id;
};

using Payload =
    std::variant<StatusDigest, TripNotice, Instruction, SettingGroupUpdate, AreaSummary, DgDispatch, LoadShedOrder>;

/// Short tag used in logs ("DIGEST", "TRIP", ...).
std::string_view payload_tag(const Payload& p);

/// Codec field sizes.
inline constexpr std::size_t kTagBytes = 1;
inline constexpr std::size_t kIdBytes = 2;
inline constexpr std::size_t kStatusBytes = 1;
inline constexpr std::size_t kAnalogBytes = 8;

/// Deterministic encoded size: 1-byte tag, 2 bytes per id, 1 byte per
/// status/flag, 8 bytes per analog.
std::size_t encode_payload(const Payload& p);

}  // namespace mas::comms
