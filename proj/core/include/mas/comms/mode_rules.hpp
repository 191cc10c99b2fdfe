#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace mas::comms {

enum class AgentKind { TerminalBranch, TerminalDg, Regional, Central };
std::string_view to_string(AgentKind k);

constexpr bool is_terminal(AgentKind k) { return k == AgentKind::TerminalBranch || k == AgentKind::TerminalDg; }

enum class Mode { Direct, Radio, Blackboard, Forbidden };
std::string_view to_string(Mode m);

/// Legal transmission mode for a sender/receiver pair. DG agents are
/// terminals. Regional agents exchange information only through the
/// blackboard; the central agent never talks to terminals.
Mode mode_allowed(AgentKind sender, AgentKind receiver);

/// Link classes used for latency and byte accounting.
enum class LinkClass { TerminalTerminal, TerminalRegional, RegionalTerminal, RegionalRegional, RegionalCentral, CentralRegional };
std::string_view to_string(LinkClass c);
LinkClass link_class(AgentKind sender, AgentKind receiver);

struct AgentRef {
  std::string id;
  AgentKind kind = AgentKind::TerminalBranch;
  std::vector<std::string> area_ids;
};

}  // namespace mas::comms
