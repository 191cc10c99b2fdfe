#pragma once

#include <map>
#include <set>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "mas/comms/mode_rules.hpp"
#include "mas/grid/network.hpp"

namespace mas::comms {

inline constexpr std::string_view kCentralId = "CENTRAL";
/// Radio group joining the central agent and every regional agent.
inline constexpr std::string_view kCoreGroup = "CORE";

/// Direct links (unordered pairs) and radio groups.
struct LinkTable {
  std::set<std::pair<std::string, std::string>> direct;
  std::map<std::string, std::vector<std::string>, std::less<>> groups;

  void link(const std::string& a, const std::string& b);
  bool linked(std::string_view a, std::string_view b) const;
};

/// One regional agent's area. Adjacent areas overlap: an area also holds
/// the branches of neighbouring areas that share a bus with its own.
struct Area {
  std::string id;
  std::string regional_id;
  std::vector<std::string> home_branches;
  std::vector<std::string> overlap_branches;
  std::vector<std::string> dgs;

  std::vector<std::string> terminals() const;
};

struct Layout {
  std::vector<AgentRef> agents;
  std::vector<Area> areas;
  LinkTable links;
  /// Terminal id -> nearest regional agent.
  std::map<std::string, std::string, std::less<>> home_regional;

  const AgentRef* find(std::string_view id) const;
  const Area* area(std::string_view id) const;
  const Area* area_of_regional(std::string_view regional_id) const;
};

/// One area per feeder leaving the grid-supply bus (A1, A2, ... in branch
/// order, served by R1, R2, ...), plus one per section not fed from there.
/// Branch agents link directly to branches sharing a bus and to their home
/// regional; DG agents link to their home regional; regionals link to the
/// central agent. Throws ConfigError when agent ids collide.
Layout derive_layout(const grid::Network& net);

}  // namespace mas::comms
