#pragma once

#include <complex>
#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace mas::grid {

using Complex = std::complex<double>;

enum class SourceKind { GridSupply, PV, CCHP, CESS, FuelCell };

/// Inverter-interfaced sources are current limited during faults.
constexpr bool is_inverter(SourceKind k) {
  return k == SourceKind::PV || k == SourceKind::CESS || k == SourceKind::FuelCell;
}
/// CESS and fuel cells can be re-dispatched by the central agent.
constexpr bool is_dispatchable(SourceKind k) { return k == SourceKind::CESS || k == SourceKind::FuelCell; }

std::string_view to_string(SourceKind k);
std::optional<SourceKind> parse_source_kind(std::string_view s);

struct Bus {
  std::string id;
  double v_nominal_kv = 0.0;
};

/// Series branch. The breaker and relay sit at the from-end.
struct Branch {
  std::string id;
  std::string from_bus;
  std::string to_bus;
  Complex z;
  bool breaker_closed = true;
};

struct Source {
  std::string id;
  std::string bus;
  SourceKind kind = SourceKind::GridSupply;
  Complex emf{1.0, 0.0};
  Complex z_int;
  double i_limit = 0.0;
  bool online = true;
  double p_out = 0.0;
  double q_out = 0.0;
  double p_max = 0.0;
  double q_max = 0.0;

  bool is_dg() const { return kind != SourceKind::GridSupply; }
};

struct Load {
  std::string id;
  std::string bus;
  double p = 0.0;
  double q = 0.0;
  int shed_priority = 0;
  bool connected = true;
};

/// Validated distribution network. Element order follows the input file;
/// lookups by id are O(log n).
class Network {
 public:
  Network() = default;
  Network(std::vector<Bus> buses, std::vector<Branch> branches, std::vector<Source> sources,
          std::vector<Load> loads);

  const std::vector<Bus>& buses() const { return buses_; }
  const std::vector<Branch>& branches() const { return branches_; }
  const std::vector<Source>& sources() const { return sources_; }
  const std::vector<Load>& loads() const { return loads_; }

  const Bus* find_bus(std::string_view id) const;
  const Branch* find_branch(std::string_view id) const;
  const Source* find_source(std::string_view id) const;
  const Load* find_load(std::string_view id) const;

  Branch& branch(std::string_view id);
  Source& source(std::string_view id);
  Load& load(std::string_view id);

  std::size_t bus_index(std::string_view id) const;
  std::size_t branch_index(std::string_view id) const;

  const Source& grid_supply() const;
  /// DG ids in lexicographic order.
  std::vector<std::string> dg_ids() const;

  /// Stable fingerprint of the electrical model as loaded (16 hex digits).
  const std::string& fingerprint() const { return fingerprint_; }

 private:
  std::vector<Bus> buses_;
  std::vector<Branch> branches_;
  std::vector<Source> sources_;
  std::vector<Load> loads_;
  std::map<std::string, std::size_t, std::less<>> bus_ix_;
  std::map<std::string, std::size_t, std::less<>> branch_ix_;
  std::map<std::string, std::size_t, std::less<>> source_ix_;
  std::map<std::string, std::size_t, std::less<>> load_ix_;
  std::string fingerprint_;
};

/// Parses the line-oriented network format and validates the result.
/// Throws ParseError or ValidationError.
Network build_network(std::string_view text);

/// Canonical text form; build_network(write_network(n)) reproduces n.
std::string write_network(const Network& net);

/// Tree queries over the closed-breaker topology. A relay at a branch's
/// from-end looks toward the to-side.
class Topology {
 public:
  explicit Topology(const Network& net);

  /// Branches sharing at least one bus with `branch_id`.
  std::vector<std::string> adjacent_branches(std::string_view branch_id) const;
  /// Closed branches whose from-bus is this branch's to-bus.
  std::vector<std::string> downstream_branches(std::string_view branch_id) const;
  /// Buses reachable from the to-bus without crossing the branch itself.
  std::vector<std::string> to_side_buses(std::string_view branch_id) const;
  /// True when the closed-branch graph has no cycles.
  bool is_radial() const { return radial_; }
  /// Hop count between two buses over closed branches; nullopt if disconnected.
  std::optional<std::size_t> hop_distance(std::string_view a, std::string_view b) const;

 private:
  const Network* net_;
  std::map<std::string, std::vector<std::size_t>, std::less<>> incident_;  // bus -> closed branch indices
  bool radial_ = true;
};

}  // namespace mas::grid
