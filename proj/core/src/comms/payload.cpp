#include "mas/comms/payload.hpp"

namespace mas::comms {

std::string_view to_string(Action a) {
  switch (a) {
    case Action::Open: return "open";
    case Action::Close: return "close";
    case Action::DgDisconnect: return "dg_off";
    case Action::DgConnect: return "dg_on";
  }
  return "?";
}

namespace {

template <class... Fs>
struct Overload : Fs... {
  using Fs::operator()...;
};
template <class... Fs>
Overload(Fs...) -> Overload<Fs...>;

}  // namespace

std::string_view payload_tag(const Payload& p) {
  return std::visit(Overload{
                        [](const StatusDigest&) { return std::string_view("DIGEST"); },
                        [](const TripNotice&) { return std::string_view("TRIP"); },
                        [](const Instruction&) { return std::string_view("INSTR"); },
                        [](const SettingGroupUpdate&) { return std::string_view("GROUP"); },
                        [](const AreaSummary&) { return std::string_view("SUMMARY"); },
                        [](const DgDispatch&) { return std::string_view("DISPATCH"); },
                        [](const LoadShedOrder&) { return std::string_view("SHED"); },
                    },
                    p);
}

std::size_t encode_payload(const Payload& p) {
  const std::size_t body = std::visit(
      Overload{
          [](const StatusDigest& d) {
            std::size_t n = kIdBytes + kStatusBytes + kStatusBytes + kAnalogBytes;
            if (d.v_mag) n += kAnalogBytes;
            if (d.switch_count) n += kStatusBytes;
            return n;
          },
          [](const TripNotice&) { return kIdBytes + kStatusBytes; },
          [](const Instruction&) { return kIdBytes + kStatusBytes; },
          // group id and vector code are both 2-byte identifiers
          [](const SettingGroupUpdate&) { return kIdBytes + kIdBytes + kIdBytes; },
          [](const AreaSummary& s) {
            return kIdBytes + s.dg_status.size() * (kIdBytes + kStatusBytes) + 3 * kAnalogBytes + kIdBytes;
          },
          [](const DgDispatch&) { return kIdBytes + 2 * kAnalogBytes; },
          [](const LoadShedOrder&) { return kIdBytes + kIdBytes; },
      },
      p);
  return kTagBytes + body;
}

}  // namespace mas::comms
