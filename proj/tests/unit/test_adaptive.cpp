#include <gtest/gtest.h>

#include <fmt/format.h>

#include <cmath>
#include <random>

#include "fixtures.hpp"
#include "mas/adaptive/knowledge.hpp"
#include "mas/adaptive/selectivity.hpp"
#include "mas/adaptive/settings.hpp"
#include "mas/adaptive/status_vector.hpp"
#include "mas/error.hpp"
#include "nodal_oracle.hpp"

using namespace mas;
using namespace mas::adaptive;

namespace {

grid::Network parse(const std::string& text) { return grid::build_network(text); }

std::string many_dg_text(int n) {
  std::string s = "BUS S0 10\nBUS S1 10\nBRANCH L1 S0 S1 0 0.40\nSOURCE G S0 GridSupply 1.0 0 0.10 0 1 0 0 10 10\n";
  for (int i = 0; i < n; ++i) s += fmt::format("SOURCE PV{:02} S1 PV 1.0 0 0.10 0.1 1 0.01 0 0.02 0.01\n", i);
  return s;
}

// Weak grid behind a large impedance with a PV unit at the supply bus, so
// the tail fault current through L1 depends on the PV current limit.
std::string weak_feeder_text(double pv_i_limit) {
  return fmt::format(
      "BUS S0 10\nBUS S1 10\n"
      "BRANCH L1 S0 S1 0 0.40\n"
      "SOURCE G S0 GridSupply 1.0 0 10.0 0 1 0 0 10 10\n"
      "SOURCE PV S0 PV 1.0 0 0.10 {} 1 0.02 0 0.05 0.02\n"
      "LOAD LD1 S1 0.02 0 1\n",
      pv_i_limit);
}

const KnowledgeBase& fig1_kb() {
  static const KnowledgeBase kb = build_knowledge(mas::testing::fig1_network());
  return kb;
}

}  // namespace

TEST(Enumerate, NoDgsGivesOneEmptyVector) {
  const auto vs = enumerate_vectors(parse(mas::testing::single_branch_text()));
  ASSERT_EQ(vs.size(), 1u);
  EXPECT_TRUE(vs[0].entries.empty());
  EXPECT_EQ(vs[0].bits(), "");
}

TEST(Enumerate, Fig1CountsInBinary) {
  const auto vs = enumerate_vectors(mas::testing::fig1_network());
  ASSERT_EQ(vs.size(), 8u);
  for (std::size_t k = 0; k < vs.size(); ++k) {
    EXPECT_EQ(vs[k].code(), k);
    ASSERT_EQ(vs[k].entries.size(), 3u);
    EXPECT_EQ(vs[k].entries[0].first, "CCHP");
    EXPECT_EQ(vs[k].entries[1].first, "CESS");
    EXPECT_EQ(vs[k].entries[2].first, "PV");
  }
  EXPECT_EQ(vs.front().bits(), "000");
  EXPECT_EQ(vs.back().bits(), "111");
}

TEST(Enumerate, SeventeenDgsRefused) {
  EXPECT_NO_THROW(enumerate_vectors(parse(many_dg_text(16))));
  EXPECT_THROW(enumerate_vectors(parse(many_dg_text(17))), TooManyDgs);
}

TEST(StatusVector, BitsRoundTripAndMismatch) {
  const auto net = mas::testing::fig1_network();
  EXPECT_EQ(vector_from_bits(net, "101").bits(), "101");
  EXPECT_EQ(current_vector(net).bits(), "111");
  EXPECT_THROW(vector_from_bits(net, "10"), ConfigError);
  EXPECT_THROW(vector_from_bits(net, "1x1"), ConfigError);
  const auto other = parse(mas::testing::n3_text());
  EXPECT_THROW(apply_vector(net, current_vector(other)), ConfigError);
  const auto off = apply_vector(net, vector_from_bits(net, "010"));
  EXPECT_FALSE(off.find_source("CCHP")->online);
  EXPECT_TRUE(off.find_source("CESS")->online);
  EXPECT_FALSE(off.find_source("PV")->online);
}

TEST(Settings, SingleBranchStageOne) {
  const auto net = parse(mas::testing::single_branch_text());
  const auto r = compute_settings(net, current_vector(net));
  ASSERT_TRUE(r.feasible()) << r.reason;
  const auto& g = r.groups.at("L1");
  EXPECT_NEAR(g.stage1_pickup, 2.6, 1e-12);
  EXPECT_NEAR(g.stage2_pickup, 2.2, 1e-12);
  EXPECT_DOUBLE_EQ(g.stage2_delay, 0.3);
  EXPECT_DOUBLE_EQ(g.stage3_pickup, 0.1);
  EXPECT_FALSE(g.directional);
  EXPECT_TRUE(g.reclose_enabled);
  EXPECT_DOUBLE_EQ(g.dead_time, 0.5);
}

TEST(Settings, Fig1StageOneMatchesOracle) {
  const auto net = mas::testing::fig1_network();
  for (const auto& v : enumerate_vectors(net)) {
    const auto r = compute_settings(net, v);
    ASSERT_TRUE(r.feasible()) << v.bits() << ": " << r.detail;
    const auto study = apply_vector(net, v);
    for (const auto& [id, g] : r.groups) {
      const auto ref = mas::testing::oracle_solve(study, grid::FaultSpec{id, 1.0, {}, true});
      const double i = std::abs(ref.branch_i.at({id, grid::End::From}));
      EXPECT_NEAR(g.stage1_pickup, 1.3 * i, 1e-9 * i) << v.bits() << " " << id;
      EXPECT_TRUE(g.check().empty()) << g.check();
    }
  }
}

TEST(Settings, Fig1GradingChain) {
  const auto net = mas::testing::fig1_network();
  const grid::Topology topo(net);
  for (const auto& v : enumerate_vectors(net)) {
    const auto r = compute_settings(net, v);
    ASSERT_TRUE(r.feasible());
    for (const auto& [id, g] : r.groups) {
      const auto down = topo.downstream_branches(id);
      if (down.empty()) {
        EXPECT_DOUBLE_EQ(g.stage2_delay, 0.3) << id;
        continue;
      }
      for (const auto& d : down) {
        const auto& gd = r.groups.at(d);
        EXPECT_NEAR(g.stage2_delay, gd.stage2_delay + 0.3, 1e-9);
        EXPECT_NEAR(g.stage2_pickup, 1.1 * gd.stage1_pickup, 1e-12);
        // Where the downstream relay operates, this one waits at least one grading step longer.
        for (int k = 1; k <= 100; ++k) {
          const double i = g.stage3_pickup + (g.stage2_pickup - g.stage3_pickup) * k / 100.0;
          const double td = operating_time(gd, i);
          if (std::isfinite(td)) {
            EXPECT_GE(operating_time(g, i) + 1e-9, td + 0.3) << v.bits() << " " << id << " " << i;
          }
        }
      }
    }
  }
}

TEST(Settings, DirectionalFlagFollowsDownstreamDgs) {
  const auto net = mas::testing::fig1_network();
  const auto r = compute_settings(net, vector_from_bits(net, "100"));
  ASSERT_TRUE(r.feasible());
  for (const char* b : {"B1", "B2", "B3", "B4"}) EXPECT_TRUE(r.groups.at(b).directional) << b;
  for (const char* b : {"B5", "B6", "B7"}) EXPECT_FALSE(r.groups.at(b).directional) << b;
}

TEST(Settings, N3DgChangesSettings) {
  const auto net = parse(mas::testing::n3_text());
  const auto on = compute_settings(net, vector_from_bits(net, "1"));
  const auto off = compute_settings(net, vector_from_bits(net, "0"));
  ASSERT_TRUE(on.feasible()) << on.detail;
  ASSERT_TRUE(off.feasible()) << off.detail;
  EXPECT_TRUE(on.groups.at("L2").directional);
  EXPECT_FALSE(off.groups.at("L2").directional);
  EXPECT_NE(on.groups.at("L1"), off.groups.at("L1"));
  // The PV offsets L1's downstream load, so its stage-3 pickup must move.
  EXPECT_NE(on.groups.at("L1").stage3_pickup, off.groups.at("L1").stage3_pickup);
}

TEST(Settings, SensitivityInfeasible) {
  const auto weak = parse(weak_feeder_text(0.02));
  const auto r = compute_settings(weak, vector_from_bits(weak, "1"));
  EXPECT_EQ(r.reason, "sensitivity");
  EXPECT_TRUE(r.groups.empty());

  const auto strong = parse(weak_feeder_text(0.5));
  EXPECT_TRUE(compute_settings(strong, vector_from_bits(strong, "1")).feasible());

  const auto kb = build_knowledge(weak);
  ASSERT_TRUE(kb.infeasible.count("1"));
  EXPECT_EQ(kb.infeasible.at("1"), "sensitivity");
}

TEST(Settings, NeverThrowsOnMismatchedVector) {
  const auto net = mas::testing::fig1_network();
  const auto r = compute_settings(net, current_vector(parse(mas::testing::n3_text())));
  EXPECT_FALSE(r.feasible());
}

TEST(Selectivity, GradedSingleSourcePasses) {
  const auto net = parse(mas::testing::single_branch_text());
  const auto v = current_vector(net);
  const auto r = compute_settings(net, v);
  EXPECT_TRUE(verify_selectivity(net, v, r.groups).empty());

  const auto n3 = parse(mas::testing::n3_text(0.3, false));
  const auto v3 = current_vector(n3);
  EXPECT_TRUE(verify_selectivity(n3, v3, compute_settings(n3, v3).groups).empty());
}

TEST(Selectivity, OfflineSettingsFailWithStrongDg) {
  const auto net = parse(mas::testing::n3_text(2.0, true));
  const auto online = vector_from_bits(net, "1");
  const auto own = compute_settings(net, online);
  const auto offline = compute_settings(net, vector_from_bits(net, "0"));
  ASSERT_TRUE(own.feasible());
  ASSERT_TRUE(offline.feasible());
  EXPECT_TRUE(verify_selectivity(net, online, own.groups).empty());
  const auto bad = verify_selectivity(net, online, offline.groups);
  ASSERT_FALSE(bad.empty());
  EXPECT_TRUE(std::any_of(bad.begin(), bad.end(), [](const Violation& x) { return x.branch == "L1" && x.tripped == "L2"; }));
}

TEST(Selectivity, MissingBranchIsUncovered) {
  const auto net = parse(mas::testing::n3_text());
  const auto v = current_vector(net);
  auto groups = compute_settings(net, v).groups;
  groups.erase("L2");
  const auto bad = verify_selectivity(net, v, groups);
  ASSERT_EQ(bad.size(), 1u);
  EXPECT_EQ(bad[0], (Violation{"L2", 0.0, "uncovered"}));
}

TEST(Knowledge, Fig1AllVectorsFeasible) {
  const auto& kb = fig1_kb();
  EXPECT_EQ(kb.entries.size(), 8u);
  EXPECT_TRUE(kb.infeasible.empty());
  EXPECT_EQ(kb.n_dgs, 3u);
  EXPECT_EQ(kb.network_hash, mas::testing::fig1_network().fingerprint());
  for (const auto& [bits, groups] : kb.entries) EXPECT_EQ(groups.size(), 7u) << bits;
}

TEST(Knowledge, StoredEntriesReverify) {
  const auto net = mas::testing::fig1_network();
  for (const auto& [bits, groups] : fig1_kb().entries) {
    EXPECT_TRUE(verify_selectivity(net, vector_from_bits(net, bits), groups).empty()) << bits;
  }
}

TEST(Knowledge, CompletenessOverRandomNetworks) {
  std::mt19937_64 rng(7);
  int checked = 0;
  for (int trial = 0; trial < 40 && checked < 15; ++trial) {
    const auto net = mas::testing::random_radial_network(rng, 6, 2);
    const auto kb = build_knowledge(net);
    EXPECT_EQ(kb.entries.size() + kb.infeasible.size(), std::size_t{1} << net.dg_ids().size());
    for (const auto& [bits, groups] : kb.entries)
      for (const auto& [id, g] : groups) EXPECT_TRUE(g.check().empty());
    ++checked;
  }
}

TEST(Knowledge, GroupIdsNumberDistinctSettings) {
  std::map<std::string, std::map<std::uint16_t, agents::SettingGroup>> by_id;
  for (const auto& [bits, groups] : fig1_kb().entries) {
    for (const auto& [branch, g] : groups) {
      auto [it, fresh] = by_id[branch].emplace(g.group_id, g);
      if (!fresh) {
        EXPECT_EQ(it->second, g) << branch << " group " << g.group_id;
      }
    }
  }
  for (const auto& [branch, ids] : by_id) {
    // Dense numbering from 1, and distinct ids hold distinct settings.
    EXPECT_EQ(ids.begin()->first, 1);
    EXPECT_EQ(ids.rbegin()->first, ids.size());
    for (auto a = ids.begin(); a != ids.end(); ++a)
      for (auto b = std::next(a); b != ids.end(); ++b) {
        auto x = a->second, y = b->second;
        x.group_id = y.group_id = 0;
        EXPECT_NE(x, y);
      }
  }
}

TEST(Knowledge, SerializationIsByteStable) {
  const auto net = mas::testing::fig1_network();
  const std::string a = write_knowledge(build_knowledge(net));
  const std::string b = write_knowledge(build_knowledge(net));
  EXPECT_EQ(a, b);
  EXPECT_EQ(write_knowledge(read_knowledge(a)), a);
  EXPECT_EQ(a.rfind(fmt::format("KB\t{}\t3\n", net.fingerprint()), 0), 0u);
  EXPECT_EQ(std::count(a.begin(), a.end(), '\n'), 1 + 8 * 7);
}

TEST(Knowledge, NoDgNetworkHasOneClassicEntry) {
  const auto net = parse(mas::testing::single_branch_text());
  const auto kb = build_knowledge(net);
  ASSERT_EQ(kb.entries.size(), 1u);
  EXPECT_EQ(kb.entries.begin()->first, "");
  auto classic = compute_settings(net, {}).groups;
  classic.at("L1").group_id = 1;
  EXPECT_EQ(kb.entries.begin()->second, classic);
  const std::string text = write_knowledge(kb);
  EXPECT_NE(text.find("SET\t-\tL1\t1\t"), std::string::npos);
  EXPECT_EQ(read_knowledge(text).entries.size(), 1u);
  EXPECT_EQ(lookup(kb, net, "-").size(), 1u);
}

TEST(Knowledge, ReadRejectsMalformed) {
  EXPECT_THROW(read_knowledge(""), ParseError);
  EXPECT_THROW(read_knowledge("SET\t1\tL1\n"), ParseError);
  EXPECT_THROW(read_knowledge("KB\tabc\t1\nSET\t1\tL1\t1\t2\n"), ParseError);
  EXPECT_THROW(read_knowledge("KB\tabc\t1\nINFEASIBLE\t11\tgrading\n"), ParseError);
  EXPECT_THROW(read_knowledge("KB\tabc\t1\nBOGUS\t1\n"), ParseError);
  EXPECT_THROW(read_knowledge("KB\tabc\t1\nSET\t1\tL1\t1\t1\t2\t0.3\t0.5\t0.1\t0\t1\t0.5\n"), ParseError);
  try {
    read_knowledge("KB\tabc\t1\nINFEASIBLE\t1\tgrading\nFOO\n");
    FAIL();
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), 3u);
  }

  const std::string head = "KB\tabc\t1\n";
  const std::string l1 = "SET\t0\tL1\t1\t2\t1.5\t0.3\t0.5\t0.1\t0\t1\t0.5\n";
  const std::string l2 = "SET\t0\tL2\t1\t2\t1.5\t0.3\t0.5\t0.1\t0\t1\t0.5\n";
  EXPECT_NO_THROW(read_knowledge(head + l1 + l2 + "SET\t1\tL1\t1\t2\t1.5\t0.3\t0.5\t0.1\t0\t1\t0.5\n" +
                                 "SET\t1\tL2\t2\t3\t1.5\t0.3\t0.5\t0.1\t0\t1\t0.5\n"));
  // vector 1 lost its L2 line
  EXPECT_THROW(read_knowledge(head + l1 + l2 + "SET\t1\tL1\t1\t2\t1.5\t0.3\t0.5\t0.1\t0\t1\t0.5\n"), ParseError);
  // same group id, different settings
  EXPECT_THROW(read_knowledge(head + l1 + l2 + "SET\t1\tL1\t1\t2.5\t1.5\t0.3\t0.5\t0.1\t0\t1\t0.5\n" +
                              "SET\t1\tL2\t1\t2\t1.5\t0.3\t0.5\t0.1\t0\t1\t0.5\n"),
               ParseError);
}

TEST(Knowledge, LookupErrors) {
  const auto net = mas::testing::fig1_network();
  const auto& kb = fig1_kb();
  EXPECT_EQ(&lookup(kb, net, "101"), &kb.entries.at("101"));

  KnowledgeBase partial = kb;
  partial.entries.erase("011");
  partial.infeasible["011"] = "grading";
  partial.entries.erase("110");
  try {
    lookup(partial, net, "011");
    FAIL();
  } catch (const InfeasibleVector& e) {
    EXPECT_EQ(e.reason(), "grading");
  }
  try {
    lookup(partial, net, "110");
    FAIL();
  } catch (const InfeasibleVector& e) {
    EXPECT_EQ(e.reason(), "missing");
  }

  std::string edited = grid::write_network(net);
  const auto at = edited.find("BRANCH B7 M2 M3 0.08 0.16");
  ASSERT_NE(at, std::string::npos);
  edited.replace(at, 25, "BRANCH B7 M2 M3 0.08 0.17");
  EXPECT_THROW(lookup(kb, grid::build_network(edited), "101"), HashMismatch);
}

TEST(Knowledge, AdaptationIsNecessary) {
  const auto net = mas::testing::fig1_network();
  const auto& frozen = fig1_kb().entries.at("000");
  int witnessed = 0;
  for (const auto& [bits, own] : fig1_kb().entries) {
    const auto v = vector_from_bits(net, bits);
    const auto with_frozen = verify_selectivity(net, v, frozen);
    EXPECT_TRUE(verify_selectivity(net, v, own).empty());
    witnessed += static_cast<int>(with_frozen.size());
  }
  EXPECT_GT(witnessed, 0);
}
