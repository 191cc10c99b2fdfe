#include "mas/grid/network.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cstdint>
#include <deque>
#include <set>

#include "mas/error.hpp"
#include "mas/text.hpp"

namespace mas::grid {

namespace {

constexpr std::uint64_t kFnvOffset = 0xcbf29ce484222325ULL;
constexpr std::uint64_t kFnvPrime = 0x100000001b3ULL;

std::string fnv1a_hex(std::string_view data) {
  std::uint64_t h = kFnvOffset;
  for (unsigned char c : data) {
    h ^= c;
    h *= kFnvPrime;
  }
  return fmt::format("{:016x}", h);
}

std::size_t index_of(const std::map<std::string, std::size_t, std::less<>>& ix, std::string_view id,
                     const char* what) {
  auto it = ix.find(id);
  if (it == ix.end()) throw Error(fmt::format("unknown {} '{}'", what, id));
  return it->second;
}

}  // namespace

std::string_view to_string(SourceKind k) {
  switch (k) {
    case SourceKind::GridSupply: return "GridSupply";
    case SourceKind::PV: return "PV";
    case SourceKind::CCHP: return "CCHP";
    case SourceKind::CESS: return "CESS";
    case SourceKind::FuelCell: return "FuelCell";
  }
  return "?";
}

std::optional<SourceKind> parse_source_kind(std::string_view s) {
  const std::string l = text::to_lower(s);
  if (l == "gridsupply" || l == "grid") return SourceKind::GridSupply;
  if (l == "pv") return SourceKind::PV;
  if (l == "cchp") return SourceKind::CCHP;
  if (l == "cess") return SourceKind::CESS;
  if (l == "fuelcell") return SourceKind::FuelCell;
  return std::nullopt;
}

Network::Network(std::vector<Bus> buses, std::vector<Branch> branches, std::vector<Source> sources,
                 std::vector<Load> loads)
    : buses_(std::move(buses)),
      branches_(std::move(branches)),
      sources_(std::move(sources)),
      loads_(std::move(loads)) {
  if (buses_.empty()) throw ValidationError("no buses");
  if (branches_.empty()) throw ValidationError("no branches");

  for (std::size_t i = 0; i < buses_.size(); ++i) {
    const Bus& b = buses_[i];
    if (!(b.v_nominal_kv > 0.0)) throw ValidationError(fmt::format("bus '{}': nominal voltage must be > 0", b.id));
    if (!bus_ix_.emplace(b.id, i).second) throw ValidationError(fmt::format("duplicate bus id '{}'", b.id));
  }

  std::set<std::string, std::less<>> element_ids;
  auto claim = [&](const std::string& id) {
    if (!element_ids.insert(id).second) throw ValidationError(fmt::format("duplicate element id '{}'", id));
  };
  auto require_bus = [&](const std::string& owner, const std::string& bus) {
    if (!bus_ix_.contains(bus)) throw ValidationError(fmt::format("'{}' references undeclared bus '{}'", owner, bus));
  };

  for (std::size_t i = 0; i < branches_.size(); ++i) {
    const Branch& br = branches_[i];
    claim(br.id);
    require_bus(br.id, br.from_bus);
    require_bus(br.id, br.to_bus);
    if (br.from_bus == br.to_bus) throw ValidationError(fmt::format("branch '{}' connects bus '{}' to itself", br.id, br.from_bus));
    if (!(std::abs(br.z) > 0.0)) throw ValidationError(fmt::format("branch '{}' has zero impedance", br.id));
    branch_ix_.emplace(br.id, i);
  }

  std::size_t grid_count = 0;
  for (std::size_t i = 0; i < sources_.size(); ++i) {
    const Source& s = sources_[i];
    claim(s.id);
    require_bus(s.id, s.bus);
    if (s.kind == SourceKind::GridSupply) ++grid_count;
    const double emf = std::abs(s.emf);
    if (emf < 0.9 || emf > 1.1) throw ValidationError(fmt::format("source '{}': |emf| {} outside [0.9, 1.1]", s.id, emf));
    if (!(std::abs(s.z_int) > 0.0)) throw ValidationError(fmt::format("source '{}' has zero internal impedance", s.id));
    if (is_inverter(s.kind) && !(s.i_limit > 0.0)) throw ValidationError(fmt::format("inverter source '{}' needs i_limit > 0", s.id));
    if (s.p_max < 0.0 || s.q_max < 0.0) throw ValidationError(fmt::format("source '{}': negative capability", s.id));
    source_ix_.emplace(s.id, i);
  }
  if (grid_count == 0) throw ValidationError("no GridSupply source");
  if (grid_count > 1) throw ValidationError("more than one GridSupply source");

  std::set<int> priorities;
  for (std::size_t i = 0; i < loads_.size(); ++i) {
    const Load& l = loads_[i];
    claim(l.id);
    require_bus(l.id, l.bus);
    if (l.p < 0.0) throw ValidationError(fmt::format("load '{}' has negative p", l.id));
    if (!priorities.insert(l.shed_priority).second) {
      throw ValidationError(fmt::format("load '{}': shed priority {} already used", l.id, l.shed_priority));
    }
    load_ix_.emplace(l.id, i);
  }

  fingerprint_ = fnv1a_hex(write_network(*this));
}

const Bus* Network::find_bus(std::string_view id) const {
  auto it = bus_ix_.find(id);
  return it == bus_ix_.end() ? nullptr : &buses_[it->second];
}
const Branch* Network::find_branch(std::string_view id) const {
  auto it = branch_ix_.find(id);
  return it == branch_ix_.end() ? nullptr : &branches_[it->second];
}
const Source* Network::find_source(std::string_view id) const {
  auto it = source_ix_.find(id);
  return it == source_ix_.end() ? nullptr : &sources_[it->second];
}
const Load* Network::find_load(std::string_view id) const {
  auto it = load_ix_.find(id);
  return it == load_ix_.end() ? nullptr : &loads_[it->second];
}

Branch& Network::branch(std::string_view id) {
  auto it = branch_ix_.find(id);
  if (it == branch_ix_.end()) throw UnknownBranch(std::string(id));
  return branches_[it->second];
}
Source& Network::source(std::string_view id) { return sources_[index_of(source_ix_, id, "source")]; }
Load& Network::load(std::string_view id) { return loads_[index_of(load_ix_, id, "load")]; }

std::size_t Network::bus_index(std::string_view id) const { return index_of(bus_ix_, id, "bus"); }
std::size_t Network::branch_index(std::string_view id) const {
  auto it = branch_ix_.find(id);
  if (it == branch_ix_.end()) throw UnknownBranch(std::string(id));
  return it->second;
}

const Source& Network::grid_supply() const {
  for (const auto& s : sources_)
    if (s.kind == SourceKind::GridSupply) return s;
  throw ValidationError("no GridSupply source");
}

std::vector<std::string> Network::dg_ids() const {
  std::vector<std::string> ids;
  for (const auto& s : sources_)
    if (s.is_dg()) ids.push_back(s.id);
  std::sort(ids.begin(), ids.end());
  return ids;
}

// ---------------------------------------------------------------------------

Topology::Topology(const Network& net) : net_(&net) {
  for (const auto& b : net.buses()) incident_[b.id];
  const auto& branches = net.branches();
  std::size_t closed = 0;
  for (std::size_t i = 0; i < branches.size(); ++i) {
    if (!branches[i].breaker_closed) continue;
    ++closed;
    incident_[branches[i].from_bus].push_back(i);
    incident_[branches[i].to_bus].push_back(i);
  }
  // A forest has exactly (nodes - components) edges.
  std::set<std::string> seen;
  std::size_t components = 0;
  for (const auto& b : net.buses()) {
    if (seen.contains(b.id)) continue;
    ++components;
    std::deque<std::string> q{b.id};
    seen.insert(b.id);
    while (!q.empty()) {
      const std::string u = q.front();
      q.pop_front();
      for (std::size_t bi : incident_[u]) {
        const auto& br = branches[bi];
        const std::string& v = br.from_bus == u ? br.to_bus : br.from_bus;
        if (seen.insert(v).second) q.push_back(v);
      }
    }
  }
  radial_ = closed == net.buses().size() - components;
}

std::vector<std::string> Topology::adjacent_branches(std::string_view branch_id) const {
  const Branch* self = net_->find_branch(branch_id);
  if (!self) throw UnknownBranch(std::string(branch_id));
  std::set<std::string> out;
  for (const auto& br : net_->branches()) {
    if (br.id == self->id) continue;
    if (br.from_bus == self->from_bus || br.from_bus == self->to_bus || br.to_bus == self->from_bus ||
        br.to_bus == self->to_bus) {
      out.insert(br.id);
    }
  }
  return {out.begin(), out.end()};
}

std::vector<std::string> Topology::downstream_branches(std::string_view branch_id) const {
  const Branch* self = net_->find_branch(branch_id);
  if (!self) throw UnknownBranch(std::string(branch_id));
  std::vector<std::string> out;
  for (const auto& br : net_->branches()) {
    if (br.id != self->id && br.breaker_closed && br.from_bus == self->to_bus) out.push_back(br.id);
  }
  std::sort(out.begin(), out.end());
  return out;
}

std::vector<std::string> Topology::to_side_buses(std::string_view branch_id) const {
  const Branch* self = net_->find_branch(branch_id);
  if (!self) throw UnknownBranch(std::string(branch_id));
  const auto& branches = net_->branches();
  std::set<std::string> seen{self->to_bus};
  std::deque<std::string> q{self->to_bus};
  while (!q.empty()) {
    const std::string u = q.front();
    q.pop_front();
    for (std::size_t bi : incident_.at(u)) {
      const auto& br = branches[bi];
      if (br.id == self->id) continue;
      const std::string& v = br.from_bus == u ? br.to_bus : br.from_bus;
      if (seen.insert(v).second) q.push_back(v);
    }
  }
  return {seen.begin(), seen.end()};
}

std::optional<std::size_t> Topology::hop_distance(std::string_view a, std::string_view b) const {
  const auto& branches = net_->branches();
  std::map<std::string, std::size_t, std::less<>> dist{{std::string(a), 0}};
  std::deque<std::string> q{std::string(a)};
  while (!q.empty()) {
    const std::string u = q.front();
    q.pop_front();
    if (u == b) return dist[u];
    for (std::size_t bi : incident_.at(u)) {
      const auto& br = branches[bi];
      const std::string& v = br.from_bus == u ? br.to_bus : br.from_bus;
      if (!dist.contains(v)) {
        dist[v] = dist[u] + 1;
        q.push_back(v);
      }
    }
  }
  return std::nullopt;
}

}  // namespace mas::grid
