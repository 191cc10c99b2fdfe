#include <gtest/gtest.h>

#include <algorithm>
#include <random>
#include <tuple>

#include "fixtures.hpp"
#include "mas/comms/blackboard.hpp"
#include "mas/comms/fabric.hpp"
#include "mas/comms/layout.hpp"
#include "mas/comms/mode_rules.hpp"
#include "mas/comms/payload.hpp"
#include "mas/error.hpp"

using namespace mas;
using namespace mas::comms;

namespace {

Fabric fig1_fabric(FabricConfig cfg = {}) {
  const auto layout = derive_layout(mas::testing::fig1_network());
  return Fabric(layout.agents, layout.links, cfg);
}

StatusDigest digest(const std::string& id, double i = 0.5) {
  StatusDigest d;
  d.source_id = id;
  d.direction = grid::Direction::Forward;
  d.i_mag_a = i;
  return d;
}

const SimTime t0 = SimTime::from_ms(100);

}  // namespace

// ---- mode rules ----

TEST(ModeRules, AllSixteenPairs) {
  using K = AgentKind;
  const K kinds[] = {K::TerminalBranch, K::TerminalDg, K::Regional, K::Central};
  // Expected legal mode per (sender, receiver) written out pair by pair.
  const std::map<std::pair<K, K>, Mode> expected = {
      {{K::TerminalBranch, K::TerminalBranch}, Mode::Direct},   {{K::TerminalBranch, K::TerminalDg}, Mode::Direct},
      {{K::TerminalBranch, K::Regional}, Mode::Direct},         {{K::TerminalBranch, K::Central}, Mode::Forbidden},
      {{K::TerminalDg, K::TerminalBranch}, Mode::Direct},       {{K::TerminalDg, K::TerminalDg}, Mode::Direct},
      {{K::TerminalDg, K::Regional}, Mode::Direct},             {{K::TerminalDg, K::Central}, Mode::Forbidden},
      {{K::Regional, K::TerminalBranch}, Mode::Radio},          {{K::Regional, K::TerminalDg}, Mode::Radio},
      {{K::Regional, K::Regional}, Mode::Blackboard},           {{K::Regional, K::Central}, Mode::Direct},
      {{K::Central, K::TerminalBranch}, Mode::Forbidden},       {{K::Central, K::TerminalDg}, Mode::Forbidden},
      {{K::Central, K::Regional}, Mode::Radio},                 {{K::Central, K::Central}, Mode::Forbidden},
  };
  int checked = 0;
  for (K s : kinds) {
    for (K r : kinds) {
      EXPECT_EQ(mode_allowed(s, r), expected.at({s, r})) << to_string(s) << "->" << to_string(r);
      ++checked;
    }
  }
  EXPECT_EQ(checked, 16);
}

// ---- codec ----

// Independent field walk: list each payload's fields by kind and add up.
namespace {
enum class F { Id, Status, Analog };
std::size_t walk(const std::vector<F>& fields) {
  std::size_t n = 1;  // tag
  for (F f : fields) n += f == F::Id ? 2 : f == F::Status ? 1 : 8;
  return n;
}
}  // namespace

TEST(Codec, FieldWalk) {
  EXPECT_EQ(encode_payload(digest("B1")), walk({F::Id, F::Status, F::Status, F::Analog}));
  EXPECT_EQ(encode_payload(digest("B1")), 13u);
  StatusDigest full = digest("B1");
  full.v_mag = 0.98;
  full.switch_count = 3;
  EXPECT_EQ(encode_payload(full), walk({F::Id, F::Status, F::Status, F::Analog, F::Analog, F::Status}));
  EXPECT_EQ(encode_payload(TripNotice{"B1", 1}), walk({F::Id, F::Status}));
  EXPECT_EQ(encode_payload(Instruction{"B1", Action::Open}), walk({F::Id, F::Status}));
  EXPECT_EQ(encode_payload(SettingGroupUpdate{"B1", 2, 5}), walk({F::Id, F::Id, F::Id}));
  AreaSummary s;
  s.area_id = "A1";
  s.dg_status = {{"PV", true}, {"CCHP", false}};
  EXPECT_EQ(encode_payload(s),
            walk({F::Id, F::Id, F::Status, F::Id, F::Status, F::Analog, F::Analog, F::Analog, F::Id}));
  EXPECT_EQ(encode_payload(DgDispatch{"CESS", 0.5, 0.1}), walk({F::Id, F::Analog, F::Analog}));
  EXPECT_EQ(encode_payload(LoadShedOrder{"LD7", "B7"}), walk({F::Id, F::Id}));
}

TEST(Codec, DirectionIsOneByteAndAnalogsAddEight) {
  // A digest differs from a trip notice (id + 1 status) by exactly one
  // status byte (direction) and one analog.
  EXPECT_EQ(encode_payload(digest("B1")) - encode_payload(TripNotice{"B1", 1}), kStatusBytes + kAnalogBytes);
  EXPECT_EQ(kStatusBytes, 1u);
  StatusDigest with_v = digest("B1");
  with_v.v_mag = 1.0;
  EXPECT_EQ(encode_payload(with_v) - encode_payload(digest("B1")), 8u);
}

// ---- layout ----

TEST(Layout, Fig1Areas) {
  const auto layout = derive_layout(mas::testing::fig1_network());
  ASSERT_EQ(layout.areas.size(), 2u);
  const Area& a1 = layout.areas[0];
  const Area& a2 = layout.areas[1];
  EXPECT_EQ(a1.home_branches, (std::vector<std::string>{"B1", "B2", "B3", "B4"}));
  EXPECT_EQ(a1.overlap_branches, std::vector<std::string>{"B5"});
  EXPECT_EQ(a1.dgs, (std::vector<std::string>{"CCHP", "PV"}));
  EXPECT_EQ(a2.home_branches, (std::vector<std::string>{"B5", "B6", "B7"}));
  EXPECT_EQ(a2.overlap_branches, std::vector<std::string>{"B1"});
  EXPECT_EQ(a2.dgs, std::vector<std::string>{"CESS"});
  EXPECT_EQ(layout.home_regional.at("B5"), "R2");
  EXPECT_EQ(layout.home_regional.at("PV"), "R1");
  EXPECT_TRUE(layout.links.linked("B1", "B2"));
  EXPECT_TRUE(layout.links.linked("B1", "B5"));
  EXPECT_FALSE(layout.links.linked("B7", "B4"));
  EXPECT_FALSE(layout.links.linked("B1", "R2"));
  EXPECT_TRUE(layout.links.linked("R1", "CENTRAL"));
  EXPECT_EQ(layout.find("B1")->area_ids, (std::vector<std::string>{"A1", "A2"}));
  EXPECT_EQ(layout.links.groups.at("CORE"), (std::vector<std::string>{"CENTRAL", "R1", "R2"}));
}

TEST(Layout, IdCollisionIsConfigError) {
  const std::string text =
      "BUS S0 10\nBUS S1 10\nBRANCH R1 S0 S1 0 0.4\nSOURCE G S0 GridSupply 1.0 0 0.1 0 1 0 0 10 10\n";
  EXPECT_THROW(derive_layout(grid::build_network(text)), ConfigError);
}

// ---- send rules ----

TEST(Fabric, SelectiveLinks) {
  Fabric f = fig1_fabric();
  EXPECT_THROW(f.send(t0, "B7", Mode::Direct, "B4", digest("B7")), NoLink);
  EXPECT_NO_THROW(f.send(t0, "B1", Mode::Direct, "B2", digest("B1")));
  EXPECT_THROW(f.send(t0, "R1", Mode::Direct, "B1", Instruction{"B1", Action::Open}), ModeViolation);
}

TEST(Fabric, ForbiddenPairs) {
  Fabric f = fig1_fabric();
  EXPECT_THROW(f.send(t0, "B1", Mode::Direct, "CENTRAL", digest("B1")), ModeViolation);
  EXPECT_THROW(f.send(t0, "CENTRAL", Mode::Direct, "B1", Instruction{"B1", Action::Open}), ModeViolation);
  EXPECT_THROW(f.send(t0, "CENTRAL", Mode::Radio, "A1", Instruction{"B1", Action::Open}), ModeViolation);
  EXPECT_THROW(f.send(t0, "R1", Mode::Radio, "CORE", digest("B1")), ModeViolation);
  EXPECT_THROW(f.send(t0, "R1", Mode::Direct, "R2", digest("B1")), ModeViolation);
  EXPECT_THROW(f.send(t0, "B1", Mode::Blackboard, "k", digest("B1")), NotRegional);
  EXPECT_THROW(f.send(t0, "R1", Mode::Radio, "A9", digest("B1")), UnknownArea);
  EXPECT_THROW(f.send(t0, "X1", Mode::Direct, "B1", digest("B1")), UnknownAgent);
  EXPECT_TRUE(f.records().empty());
}

TEST(Fabric, TerminalDigestsCarryNoVoltage) {
  Fabric f = fig1_fabric();
  StatusDigest d = digest("B1");
  d.v_mag = 0.97;
  EXPECT_THROW(f.send(t0, "B1", Mode::Direct, "B2", d), SelectivityViolation);
  d.v_mag.reset();
  d.switch_count = 2;
  EXPECT_THROW(f.send(t0, "B1", Mode::Direct, "B2", d), SelectivityViolation);
  d.v_mag = 0.97;
  EXPECT_NO_THROW(f.send(t0, "B1", Mode::Direct, "R1", d));
}

// ---- delivery ----

TEST(Fabric, EmptyQueueDeliversNothing) {
  Fabric f = fig1_fabric();
  EXPECT_TRUE(f.deliver(SimTime::from_seconds(10)).empty());
  EXPECT_FALSE(f.next_arrival().has_value());
}

TEST(Fabric, SameArrivalInSeqOrder) {
  Fabric f = fig1_fabric();
  const auto s1 = f.send(t0, "B3", Mode::Direct, "B2", digest("B3"));
  const auto s2 = f.send(t0, "B1", Mode::Direct, "B2", digest("B1"));
  EXPECT_EQ(f.deliver(t0).size(), 0u);
  const auto d = f.deliver(t0 + SimTime::from_ms(1));
  ASSERT_EQ(d.size(), 2u);
  EXPECT_EQ(d[0].msg.seq, s1);
  EXPECT_EQ(d[1].msg.seq, s2);
  EXPECT_LT(s1, s2);
}

TEST(Fabric, RadioSkipsSender) {
  std::vector<AgentRef> agents = {{"T1", AgentKind::TerminalBranch, {"G"}},
                                  {"T2", AgentKind::TerminalBranch, {"G"}},
                                  {"T3", AgentKind::TerminalDg, {"G"}},
                                  {"R", AgentKind::Regional, {"G"}},
                                  {"C", AgentKind::Central, {}}};
  LinkTable links;
  links.groups["G"] = {"R", "T1", "T2", "T3"};
  Fabric f(agents, links);
  f.send(t0, "R", Mode::Radio, "G", Instruction{"T2", Action::Open});
  const auto d = f.deliver(t0 + SimTime::from_ms(2));
  ASSERT_EQ(d.size(), 3u);
  EXPECT_EQ(d[0].receiver, "T1");
  EXPECT_EQ(d[1].receiver, "T2");
  EXPECT_EQ(d[2].receiver, "T3");
  ASSERT_EQ(f.records().size(), 1u);
  EXPECT_EQ(format_record(f.records()[0]), "t=0.100000 seq=1 mode=RADIO from=R to=G type=INSTR bytes=4");
}

TEST(Fabric, ConstructionChecks) {
  EXPECT_THROW(Fabric({{"T1", AgentKind::TerminalBranch, {"G"}}}, {}), ConfigError);
  EXPECT_THROW(Fabric({{"T1", AgentKind::TerminalBranch, {}}, {"C", AgentKind::Central, {}}}, {}), ConfigError);
}

TEST(Fabric, BlackboardPostLandsOnArrival) {
  Fabric f = fig1_fabric();
  f.send(t0, "R1", Mode::Blackboard, "dg:PV", digest("PV"), 200);
  EXPECT_EQ(f.blackboard().read("dg:PV"), nullptr);
  EXPECT_TRUE(f.deliver(t0 + SimTime::from_ms(2)).empty());
  ASSERT_NE(f.blackboard().read("dg:PV"), nullptr);
  EXPECT_EQ(f.blackboard().read("dg:PV")->writer, "R1");
}

// ---- properties ----

TEST(FabricProperty, AcceptedSendsObeyRules) {
  const auto layout = derive_layout(mas::testing::fig1_network());
  Fabric f(layout.agents, layout.links);
  std::mt19937_64 rng(4242);
  std::vector<std::string> ids;
  for (const auto& a : layout.agents) ids.push_back(a.id);
  std::vector<std::string> groups = {"A1", "A2", "CORE", "A7"};
  const Mode modes[] = {Mode::Direct, Mode::Radio, Mode::Blackboard, Mode::Forbidden};
  auto pick = [&](std::size_t n) { return std::uniform_int_distribution<std::size_t>(0, n - 1)(rng); };

  int accepted = 0;
  for (int i = 0; i < 10000; ++i) {
    const std::string& from = ids[pick(ids.size())];
    const Mode mode = modes[pick(4)];
    std::string to = mode == Mode::Radio ? groups[pick(groups.size())] : ids[pick(ids.size())];
    StatusDigest d = digest(from);
    if (pick(3) == 0) d.v_mag = 1.0;
    const std::size_t before = f.records().size();
    try {
      f.send(SimTime::from_us(i), from, mode, to, d);
    } catch (const mas::Error&) {
      EXPECT_EQ(f.records().size(), before);
      continue;
    }
    ++accepted;
    const AgentKind sk = layout.find(from)->kind;
    switch (mode) {
      case Mode::Direct: {
        const AgentKind rk = layout.find(to)->kind;
        EXPECT_EQ(mode_allowed(sk, rk), Mode::Direct);
        EXPECT_TRUE(layout.links.linked(from, to));
        if (is_terminal(sk) && is_terminal(rk)) {
          EXPECT_FALSE(d.v_mag.has_value());
        }
        break;
      }
      case Mode::Radio:
        for (const auto& m : layout.links.groups.at(to)) {
          if (m != from) {
            EXPECT_EQ(mode_allowed(sk, layout.find(m)->kind), Mode::Radio);
          }
        }
        break;
      case Mode::Blackboard:
        EXPECT_EQ(sk, AgentKind::Regional);
        break;
      case Mode::Forbidden:
        ADD_FAILURE() << "Forbidden mode accepted";
    }
  }
  EXPECT_GT(accepted, 100);
  EXPECT_EQ(f.records().size(), static_cast<std::size_t>(accepted));
}

TEST(BlackboardProperty, MatchesBruteForceFold) {
  std::mt19937_64 rng(99);
  const std::vector<std::string> writers = {"R1", "R2", "R3", "R10"};
  const std::vector<std::string> keys = {"a", "b", "c"};
  for (int seq = 0; seq < 1000; ++seq) {
    Blackboard bb;
    struct Post {
      std::string key;
      int priority;
      std::int64_t t;
      std::string writer;
      double value;
    };
    std::vector<Post> posts;
    const int n = std::uniform_int_distribution<int>(1, 30)(rng);
    std::int64_t t = 0;
    for (int i = 0; i < n; ++i) {
      t += std::uniform_int_distribution<int>(0, 2)(rng);  // repeated times exercise the tie rules
      Post p{keys[std::uniform_int_distribution<std::size_t>(0, 2)(rng)],
             std::uniform_int_distribution<int>(0, 3)(rng), t,
             writers[std::uniform_int_distribution<std::size_t>(0, 3)(rng)], static_cast<double>(i)};
      posts.push_back(p);
      bb.post(p.key, digest(p.writer, p.value), static_cast<std::uint8_t>(p.priority), p.writer,
              AgentKind::Regional, SimTime::from_us(p.t));
    }
    for (const auto& key : keys) {
      // Fold: keep the maximum of (priority, t, reversed writer order); the
      // later of two equal posts wins.
      const Post* best = nullptr;
      for (const auto& p : posts) {
        if (p.key != key) continue;
        if (!best || std::make_tuple(p.priority, p.t, std::string(best->writer)) >=
                         std::make_tuple(best->priority, best->t, std::string(p.writer))) {
          best = &p;
        }
      }
      const auto* e = bb.read(key);
      if (!best) {
        EXPECT_EQ(e, nullptr);
        continue;
      }
      ASSERT_NE(e, nullptr);
      EXPECT_EQ(e->priority, best->priority);
      EXPECT_EQ(e->t_post.us(), best->t);
      EXPECT_EQ(e->writer, best->writer);
      EXPECT_EQ(std::get<StatusDigest>(e->value).i_mag_a, best->value);
    }
  }
}

TEST(BlackboardRules, PriorityDecides) {
  Blackboard bb;
  bb.post("k", digest("R1", 1.0), 5, "R1", AgentKind::Regional, t0);
  bb.post("k", digest("R1", 2.0), 7, "R1", AgentKind::Regional, t0);
  EXPECT_EQ(std::get<StatusDigest>(bb.read("k")->value).i_mag_a, 2.0);
  Blackboard bb2;
  bb2.post("k", digest("R1", 1.0), 7, "R1", AgentKind::Regional, t0);
  bb2.post("k", digest("R1", 2.0), 5, "R1", AgentKind::Regional, t0);
  EXPECT_EQ(std::get<StatusDigest>(bb2.read("k")->value).i_mag_a, 1.0);
  EXPECT_THROW(bb.post("k", digest("B1"), 9, "B1", AgentKind::TerminalBranch, t0), NotRegional);
}

TEST(FabricProperty, DeliveryIsDeterministic) {
  auto run = [](bool jitter) {
    FabricConfig cfg;
    cfg.jitter = jitter;
    cfg.jitter_seed = 7;
    Fabric f = fig1_fabric(cfg);
    std::vector<std::string> trace;
    for (int i = 0; i < 50; ++i) {
      const SimTime t = SimTime::from_us(i * 300);
      f.send(t, "B1", Mode::Direct, "B2", digest("B1", i));
      f.send(t, "R1", Mode::Radio, "A1", SettingGroupUpdate{"B3", 1, 3});
      f.send(t, "R2", Mode::Direct, "CENTRAL", digest("B5"));
      for (const auto& d : f.deliver(t)) trace.push_back(format_seconds(d.arrival) + d.receiver +
                                                         std::to_string(d.msg.seq));
    }
    for (const auto& d : f.deliver(SimTime::from_seconds(1))) trace.push_back(d.receiver + std::to_string(d.msg.seq));
    return trace;
  };
  EXPECT_EQ(run(false), run(false));
  EXPECT_EQ(run(true), run(true));
  EXPECT_NE(run(true), run(false));
}
