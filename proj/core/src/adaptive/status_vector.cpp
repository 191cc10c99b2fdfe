#include "mas/adaptive/status_vector.hpp"

#include <fmt/format.h>

#include "mas/error.hpp"

namespace mas::adaptive {

std::string DgStatusVector::bits() const {
  std::string out;
  out.reserve(entries.size());
  for (const auto& [id, on] : entries) out += on ? '1' : '0';
  return out;
}

std::uint16_t DgStatusVector::code() const {
  std::uint16_t c = 0;
  for (const auto& [id, on] : entries) c = static_cast<std::uint16_t>((c << 1) | (on ? 1 : 0));
  return c;
}

std::vector<DgStatusVector> enumerate_vectors(const grid::Network& net) {
  const auto ids = net.dg_ids();
  if (ids.size() > kMaxDgs) {
    throw TooManyDgs(fmt::format("{} DGs exceed the limit of {}", ids.size(), kMaxDgs));
  }
  const std::size_t n = ids.size();
  const std::uint32_t count = 1u << n;
  std::vector<DgStatusVector> out;
  out.reserve(count);
  for (std::uint32_t k = 0; k < count; ++k) {
    DgStatusVector v;
    for (std::size_t i = 0; i < n; ++i) v.entries.emplace_back(ids[i], ((k >> (n - 1 - i)) & 1u) != 0);
    out.push_back(std::move(v));
  }
  return out;
}

DgStatusVector current_vector(const grid::Network& net) {
  DgStatusVector v;
  for (const auto& id : net.dg_ids()) v.entries.emplace_back(id, net.find_source(id)->online);
  return v;
}

DgStatusVector vector_from_bits(const grid::Network& net, const std::string& bits) {
  const auto ids = net.dg_ids();
  const std::string b = bits == "-" ? std::string{} : bits;
  if (b.size() != ids.size()) {
    throw ConfigError(fmt::format("status vector '{}' needs {} bits", bits, ids.size()));
  }
  DgStatusVector v;
  for (std::size_t i = 0; i < ids.size(); ++i) {
    if (b[i] != '0' && b[i] != '1') throw ConfigError(fmt::format("status vector '{}' is not binary", bits));
    v.entries.emplace_back(ids[i], b[i] == '1');
  }
  return v;
}

grid::Network apply_vector(const grid::Network& net, const DgStatusVector& v) {
  const auto ids = net.dg_ids();
  if (ids.size() != v.entries.size()) {
    throw ConfigError(fmt::format("status vector lists {} DGs, network has {}", v.entries.size(), ids.size()));
  }
  grid::Network out = net;
  for (std::size_t i = 0; i < ids.size(); ++i) {
    if (v.entries[i].first != ids[i]) throw ConfigError("status vector does not match the network's DGs");
    out.source(ids[i]).online = v.entries[i].second;
  }
  return out;
}

}  // namespace mas::adaptive
