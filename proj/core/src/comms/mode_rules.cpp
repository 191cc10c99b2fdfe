#include "mas/comms/mode_rules.hpp"

#include "mas/error.hpp"

namespace mas::comms {

std::string_view to_string(AgentKind k) {
  switch (k) {
    case AgentKind::TerminalBranch: return "branch";
    case AgentKind::TerminalDg: return "dg";
    case AgentKind::Regional: return "regional";
    case AgentKind::Central: return "central";
  }
  return "?";
}

std::string_view to_string(Mode m) {
  switch (m) {
    case Mode::Direct: return "DIRECT";
    case Mode::Radio: return "RADIO";
    case Mode::Blackboard: return "BB";
    case Mode::Forbidden: return "FORBIDDEN";
  }
  return "?";
}

Mode mode_allowed(AgentKind sender, AgentKind receiver) {
  enum Layer { T, R, C };
  auto layer = [](AgentKind k) {
    if (is_terminal(k)) return T;
    return k == AgentKind::Regional ? R : C;
  };
  // rows: sender, columns: receiver
  static constexpr Mode table[3][3] = {
      /* T */ {Mode::Direct, Mode::Direct, Mode::Forbidden},
      /* R */ {Mode::Radio, Mode::Blackboard, Mode::Direct},
      /* C */ {Mode::Forbidden, Mode::Radio, Mode::Forbidden},
  };
  return table[layer(sender)][layer(receiver)];
}

std::string_view to_string(LinkClass c) {
  switch (c) {
    case LinkClass::TerminalTerminal: return "T-T";
    case LinkClass::TerminalRegional: return "T-R";
    case LinkClass::RegionalTerminal: return "R-T";
    case LinkClass::RegionalRegional: return "R-R";
    case LinkClass::RegionalCentral: return "R-C";
    case LinkClass::CentralRegional: return "C-R";
  }
  return "?";
}

LinkClass link_class(AgentKind sender, AgentKind receiver) {
  const bool st = is_terminal(sender);
  const bool rt = is_terminal(receiver);
  if (st && rt) return LinkClass::TerminalTerminal;
  if (st && receiver == AgentKind::Regional) return LinkClass::TerminalRegional;
  if (sender == AgentKind::Regional && rt) return LinkClass::RegionalTerminal;
  if (sender == AgentKind::Regional && receiver == AgentKind::Regional) return LinkClass::RegionalRegional;
  if (sender == AgentKind::Regional && receiver == AgentKind::Central) return LinkClass::RegionalCentral;
  if (sender == AgentKind::Central && receiver == AgentKind::Regional) return LinkClass::CentralRegional;
  throw ModeViolation("no link class between " + std::string(to_string(sender)) + " and " +
                      std::string(to_string(receiver)));
}

}  // namespace mas::comms
