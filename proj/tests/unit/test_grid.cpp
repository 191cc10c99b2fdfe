#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "fixtures.hpp"
#include "mas/error.hpp"
#include "mas/grid/fault_solver.hpp"
#include "mas/grid/measurement.hpp"
#include "mas/grid/network.hpp"
#include "nodal_oracle.hpp"

using namespace mas;
using namespace mas::grid;
using mas::testing::n3_text;
using mas::testing::single_branch_text;

namespace {

FaultSpec bolted(const std::string& branch, double pos) {
  FaultSpec f;
  f.branch_id = branch;
  f.position = pos;
  return f;
}

}  // namespace

// ---- parsing and validation ----

TEST(NetworkParse, Fig1Shape) {
  const Network net = mas::testing::fig1_network();
  ASSERT_EQ(net.branches().size(), 7u);
  for (int i = 1; i <= 7; ++i) EXPECT_NE(net.find_branch("B" + std::to_string(i)), nullptr);
  EXPECT_EQ(net.grid_supply().id, "GRID");
  EXPECT_EQ(net.dg_ids(), (std::vector<std::string>{"CCHP", "CESS", "PV"}));
  int feeders = 0;
  for (const auto& br : net.branches())
    if (br.from_bus == net.grid_supply().bus) ++feeders;
  EXPECT_EQ(feeders, 2);
}

TEST(NetworkParse, NoBranches) {
  try {
    build_network("BUS A 10\nSOURCE G A GridSupply 1 0 0.1 0 1 0 0 1 1\n");
    FAIL();
  } catch (const ValidationError& e) {
    EXPECT_NE(std::string(e.what()).find("no branches"), std::string::npos);
  }
}

TEST(NetworkParse, DanglingBusNamed) {
  try {
    build_network("BUS A 10\nBUS B 10\nBRANCH L1 A X9 0 0.1\nSOURCE G A GridSupply 1 0 0.1 0 1 0 0 1 1\n");
    FAIL();
  } catch (const ValidationError& e) {
    const std::string what = e.what();
    EXPECT_NE(what.find("X9"), std::string::npos);
    EXPECT_NE(what.find("line 3"), std::string::npos);
  }
}

TEST(NetworkParse, ParseErrorsCarryLine) {
  try {
    build_network("BUS A 10\n\n# comment\nBRANCH L1 A B 0 zero\n");
    FAIL();
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), 4u);
  }
  EXPECT_THROW(build_network("WIRE A B\n"), ParseError);
  EXPECT_THROW(build_network("BUS A\n"), ParseError);
}

TEST(NetworkParse, ValidationRules) {
  const std::string base = "BUS A 10\nBUS B 10\n";
  const std::string grid = "SOURCE G A GridSupply 1 0 0.1 0 1 0 0 1 1\n";
  EXPECT_THROW(build_network(base + "BRANCH L1 A B 0 0\n" + grid), ValidationError);
  EXPECT_THROW(build_network(base + "BRANCH L1 A B 0 0.1\n"), ValidationError);
  EXPECT_THROW(build_network(base + "BRANCH L1 A A 0 0.1\n" + grid), ValidationError);
  EXPECT_THROW(build_network(base + "BUS A 10\nBRANCH L1 A B 0 0.1\n" + grid), ValidationError);
  EXPECT_THROW(build_network(base + "BRANCH G A B 0 0.1\n" + grid), ValidationError);
  EXPECT_THROW(build_network(base + "BRANCH L1 A B 0 0.1\n" + grid + "SOURCE P B PV 1 0 0.1 0 1 0 0 1 1\n"),
               ValidationError);
  EXPECT_THROW(build_network(base + "BRANCH L1 A B 0 0.1\n" + grid + "SOURCE P B PV 1.2 0 0.1 1 1 0 0 1 1\n"),
               ValidationError);
  EXPECT_THROW(
      build_network(base + "BRANCH L1 A B 0 0.1\n" + grid + "LOAD X A 0.1 0 1\nLOAD Y B 0.1 0 1\n"),
      ValidationError);
  EXPECT_THROW(build_network(base + "BRANCH L1 A B 0 0.1\n" + grid + "LOAD X A -0.1 0 1\n"), ValidationError);
}

TEST(NetworkParse, RoundTripIsCanonical) {
  const Network net = mas::testing::fig1_network();
  const std::string once = write_network(net);
  const Network again = build_network(once);
  EXPECT_EQ(write_network(again), once);
  EXPECT_EQ(again.fingerprint(), net.fingerprint());
}

TEST(NetworkParse, FingerprintTracksEdits) {
  const Network a = build_network(n3_text(0.3));
  const Network b = build_network(n3_text(0.31));
  EXPECT_NE(a.fingerprint(), b.fingerprint());
  EXPECT_EQ(a.fingerprint().size(), 16u);
}

TEST(Topology, AdjacencyAndDownstream) {
  const Network net = mas::testing::fig1_network();
  const Topology topo(net);
  const auto adj7 = topo.adjacent_branches("B7");
  EXPECT_EQ(std::count(adj7.begin(), adj7.end(), "B4"), 0);
  EXPECT_EQ(std::count(adj7.begin(), adj7.end(), "B6"), 1);
  const auto adj1 = topo.adjacent_branches("B1");
  EXPECT_EQ(std::count(adj1.begin(), adj1.end(), "B5"), 1);
  EXPECT_EQ(topo.downstream_branches("B2"), std::vector<std::string>{"B3"});
  EXPECT_TRUE(topo.downstream_branches("B4").empty());
  EXPECT_TRUE(topo.is_radial());
  EXPECT_EQ(topo.hop_distance("N4", "M3"), 7u);
}

// ---- prefault ----

TEST(Prefault, FlatProfile) {
  Network net = mas::testing::fig1_network();
  const auto sol = solve_prefault(net);
  for (const auto& [id, v] : sol.bus_v) EXPECT_EQ(v, Complex(1.0, 0.0)) << id;
  for (const auto& [key, i] : sol.branch_i) EXPECT_EQ(i, Complex(0.0, 0.0));
  EXPECT_TRUE(sol.converged);

  net.branch("B3").breaker_closed = false;
  const auto open = solve_prefault(net);
  EXPECT_EQ(open.bus_v, sol.bus_v);
  EXPECT_EQ(open.branch_i, sol.branch_i);
}

// ---- analytic spot checks ----

TEST(FaultSolver, SeriesCircuitRemoteEnd) {
  const Network net = build_network(single_branch_text());
  const auto sol = solve_fault(net, bolted("L1", 1.0));
  EXPECT_NEAR(std::abs(sol.current("L1", End::From)), 2.0, 1e-12);
  EXPECT_NEAR(std::abs(sol.fault_i), 2.0, 1e-12);
  EXPECT_NEAR(std::abs(sol.current("L1", End::To)), 0.0, 1e-12);
}

TEST(FaultSolver, SeriesCircuitMidLine) {
  const Network net = build_network(single_branch_text());
  const auto sol = solve_fault(net, bolted("L1", 0.5));
  EXPECT_NEAR(std::abs(sol.current("L1", End::From)), 1.0 / 0.3, 1e-12);
}

TEST(FaultSolver, N3JunctionSplit) {
  const Network net = build_network(n3_text(0.3));
  // The junction fault sits at L1's remote terminal.
  const auto sol = solve_fault(net, bolted("L1", 1.0));
  ASSERT_TRUE(sol.converged);
  const auto l1 = branch_measurement(net, sol, "L1", End::From);
  const auto l2 = branch_measurement(net, sol, "L2", End::From);
  EXPECT_NEAR(l1.i_mag[0], 2.0, 1e-12);
  EXPECT_NEAR(l2.i_mag[0], 0.3, 1e-12);
  EXPECT_EQ(l1.direction, Direction::Forward);
  EXPECT_EQ(l2.direction, Direction::Reverse);
}

TEST(FaultSolver, TerminalFaultCurrentsIncludeFault) {
  const Network net = build_network(n3_text(0.3));
  const auto a = solve_fault(net, bolted("L2", 0.0));
  EXPECT_NEAR(std::abs(a.current("L2", End::From) - a.current("L2", End::To) - a.fault_i), 0.0, 1e-12);
  const auto b = solve_fault(net, bolted("L1", 1.0));
  EXPECT_NEAR(std::abs(b.current("L1", End::From) - b.current("L1", End::To) - b.fault_i), 0.0, 1e-12);
}

TEST(FaultSolver, FaultImpedanceReducesCurrent) {
  const Network net = build_network(single_branch_text());
  FaultSpec f = bolted("L1", 1.0);
  f.z_fault = Complex(0.5, 0.0);
  const auto sol = solve_fault(net, f);
  EXPECT_NEAR(std::abs(sol.fault_i), 1.0 / std::abs(Complex(0.5, 0.5)), 1e-12);
}

TEST(FaultSolver, Errors) {
  Network net = mas::testing::fig1_network();
  EXPECT_THROW(solve_fault(net, bolted("B9", 0.5)), UnknownBranch);
  EXPECT_THROW(solve_fault(net, bolted("B2", 1.5)), InvalidFault);
  FaultSpec neg = bolted("B2", 0.5);
  neg.z_fault = Complex(-0.1, 0.0);
  EXPECT_THROW(solve_fault(net, neg), InvalidFault);
  net.branch("B2").breaker_closed = false;
  EXPECT_THROW(solve_fault(net, bolted("B2", 0.5)), InvalidFault);
}

TEST(FaultSolver, IsolatedFault) {
  Network net = mas::testing::fig1_network();
  net.branch("B5").breaker_closed = false;
  net.source("CESS").online = false;
  EXPECT_THROW(solve_fault(net, bolted("B6", 0.5)), SingularNetwork);
  SolverOptions opts;
  opts.allow_dead_fault = true;
  const auto sol = solve_fault(net, bolted("B6", 0.5), opts);
  EXPECT_FALSE(sol.fault_energized);
  EXPECT_EQ(sol.current("B6", End::From), Complex(0.0, 0.0));
  EXPECT_GT(std::abs(sol.current("B2", End::From)), 0.0 - 1e-15);
}

TEST(FaultSolver, FloatingInverterIsland) {
  Network net = mas::testing::fig1_network();
  net.branch("B5").breaker_closed = false;
  const auto sol = solve_fault(net, bolted("B2", 0.5));
  EXPECT_EQ(sol.bus_v.at("M2"), net.find_source("CESS")->emf);
  EXPECT_EQ(sol.current("B6", End::From), Complex(0.0, 0.0));
  EXPECT_EQ(sol.source_i.at("CESS"), Complex(0.0, 0.0));
}

// ---- properties ----

TEST(FaultSolverProperty, MatchesDenseOracle) {
  std::mt19937_64 rng(20240611);
  for (int trial = 0; trial < 300; ++trial) {
    const Network net = mas::testing::random_radial_network(rng);
    const auto& br = net.branches()[std::uniform_int_distribution<std::size_t>(0, net.branches().size() - 1)(rng)];
    FaultSpec f;
    f.branch_id = br.id;
    const int pos_kind = std::uniform_int_distribution<int>(0, 5)(rng);
    f.position = pos_kind == 0 ? 0.0 : pos_kind == 1 ? 1.0 : std::uniform_real_distribution<double>(0, 1)(rng);
    if (std::uniform_int_distribution<int>(0, 2)(rng) > 0) {
      f.z_fault = Complex(std::uniform_real_distribution<double>(0, 0.2)(rng),
                          std::uniform_real_distribution<double>(0.001, 0.2)(rng));
    }
    const auto got = solve_fault(net, f);
    const auto ref = mas::testing::oracle_solve(net, f);
    ASSERT_TRUE(got.converged) << "trial " << trial;
    ASSERT_TRUE(ref.converged) << "trial " << trial;
    EXPECT_LE(mas::testing::normwise_relative_error(got, ref), 1e-9) << "trial " << trial;
  }
}

TEST(FaultSolverProperty, KirchhoffAndClamp) {
  std::mt19937_64 rng(77);
  for (int trial = 0; trial < 200; ++trial) {
    const Network net = mas::testing::random_radial_network(rng);
    const auto& br = net.branches().back();
    const auto sol = solve_fault(net, bolted(br.id, 0.3));
    std::map<std::string, Complex> net_in;
    for (const auto& b : net.branches()) {
      net_in[b.from_bus] -= sol.current(b.id, End::From);
      net_in[b.to_bus] += sol.current(b.id, End::To);
    }
    for (const auto& s : net.sources()) net_in[s.bus] += sol.source_i.at(s.id);
    for (const auto& [bus, sum] : net_in) EXPECT_LT(std::abs(sum), 1e-9) << "trial " << trial << " bus " << bus;
    if (sol.converged) {
      for (const auto& s : net.sources()) {
        if (s.online && is_inverter(s.kind)) {
          EXPECT_LE(std::abs(sol.source_i.at(s.id)), s.i_limit + 1e-9);
        }
      }
    }
  }
}

TEST(FaultSolverProperty, MonotoneClamp) {
  for (double pos : {0.0, 0.5, 1.0}) {
    double prev = 0.0;
    for (double lim : {0.1, 0.3, 1.0}) {
      const Network net = build_network(n3_text(lim));
      const double mag = std::abs(solve_fault(net, bolted("L2", pos)).fault_i);
      EXPECT_GE(mag, prev - 1e-12) << "i_limit " << lim << " pos " << pos;
      prev = mag;
    }
  }
}

TEST(FaultSolverProperty, SuperpositionWithoutDgs) {
  Network net = mas::testing::fig1_network();
  for (const auto& id : net.dg_ids()) net.source(id).online = false;
  const Complex z_path = net.grid_supply().z_int + net.find_branch("B1")->z + net.find_branch("B2")->z;
  for (double lam : {0.1, 0.5, 0.9}) {
    const auto sol = solve_fault(net, bolted("B3", lam));
    const Complex expect = net.grid_supply().emf / (z_path + lam * net.find_branch("B3")->z);
    EXPECT_LT(std::abs(sol.current("B1", End::From) - expect), 1e-12 * std::abs(expect));
    EXPECT_LT(std::abs(sol.current("B3", End::From) - expect), 1e-12 * std::abs(expect));
  }
}

TEST(Measurement, PhaseSymmetryAndNoise) {
  const Network net = mas::testing::fig1_network();
  const auto pre = solve_prefault(net);
  const auto m0 = branch_measurement(net, pre, "B1", End::From);
  EXPECT_EQ(m0.i_mag, (std::array<double, 3>{0, 0, 0}));
  EXPECT_EQ(m0.direction, Direction::Undetermined);

  for (const auto& br : net.branches()) {
    const auto sol = solve_fault(net, bolted(br.id, 0.5));
    for (const auto& other : net.branches()) {
      for (End e : {End::From, End::To}) {
        const auto m = branch_measurement(net, sol, other.id, e);
        EXPECT_EQ(m.i_mag[0], m.i_mag[1]);
        EXPECT_EQ(m.i_mag[1], m.i_mag[2]);
        EXPECT_EQ(m.v_mag[0], m.v_mag[2]);
        EXPECT_EQ(m.direction == Direction::Undetermined, m.i_mag[0] < kNoiseFloor);
      }
    }
  }
  EXPECT_THROW(branch_measurement(net, pre, "B8", End::From), UnknownBranch);
}

TEST(Measurement, UpstreamRelaysSeeForwardFaults) {
  const Network net = mas::testing::fig1_network();
  const auto sol = solve_fault(net, bolted("B3", 0.5));
  EXPECT_EQ(branch_measurement(net, sol, "B1", End::From).direction, Direction::Forward);
  EXPECT_EQ(branch_measurement(net, sol, "B2", End::From).direction, Direction::Forward);
  EXPECT_EQ(branch_measurement(net, sol, "B3", End::From).direction, Direction::Forward);
  // CCHP backfeeds through B4 toward the fault.
  EXPECT_EQ(branch_measurement(net, sol, "B4", End::From).direction, Direction::Reverse);
  // The healthy feeder's head sees the CESS contribution flowing back to S0.
  EXPECT_EQ(branch_measurement(net, sol, "B5", End::From).direction, Direction::Reverse);
}
