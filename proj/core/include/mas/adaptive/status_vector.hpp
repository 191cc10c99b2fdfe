#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "mas/grid/network.hpp"

namespace mas::adaptive {

inline constexpr std::size_t kMaxDgs = 16;

/// On/off state of every DG, in lexicographic id order.
struct DgStatusVector {
  std::vector<std::pair<std::string, bool>> entries;

  /// "101": one character per DG, first DG first.
  std::string bits() const;
  std::uint16_t code() const;
  bool operator==(const DgStatusVector&) const = default;
};

/// All 2^n combinations, counting in binary with the first DG as the most
/// significant bit. Throws TooManyDgs above kMaxDgs.
std::vector<DgStatusVector> enumerate_vectors(const grid::Network& net);

/// The vector the network file describes.
DgStatusVector current_vector(const grid::Network& net);

/// Parses a bitstring against the network's DG list. Throws ConfigError.
DgStatusVector vector_from_bits(const grid::Network& net, const std::string& bits);

/// Copy of `net` with each DG's online flag taken from `v`. Throws
/// ConfigError when `v` does not list exactly the network's DGs.
grid::Network apply_vector(const grid::Network& net, const DgStatusVector& v);

}  // namespace mas::adaptive
