#include "mas/grid/fault_solver.hpp"

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <fmt/format.h>

#include <algorithm>
#include <memory>
#include <numeric>
#include <optional>
#include <vector>

#include "mas/error.hpp"

namespace mas::grid {

Complex FaultSolution::current(const std::string& branch_id, End end) const {
  auto it = branch_i.find(std::make_pair(branch_id, end));
  if (it == branch_i.end()) throw UnknownBranch(branch_id);
  return it->second;
}

namespace {

constexpr std::size_t kNone = static_cast<std::size_t>(-1);

struct Edge {
  std::size_t a;
  std::size_t b;
  Complex y;
};

struct DisjointSets {
  std::vector<std::size_t> parent;
  explicit DisjointSets(std::size_t n) : parent(n) { std::iota(parent.begin(), parent.end(), 0); }
  std::size_t find(std::size_t x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  }
  void unite(std::size_t a, std::size_t b) { parent[find(a)] = find(b); }
};

enum class IslandState { Solved, Floating, Dead };

// A current-limited inverter is the EMF behind k * z_int with real k >= 1;
// k > 1 means the source is clamped at i_limit with the angle of the
// unclamped current (E - V) / z_int.
class NodalModel {
 public:
  NodalModel(const Network& net, const FaultSpec* fault, const SolverOptions& opts) : net_(net), opts_(opts) {
    const auto& buses = net.buses();
    n_nodes_ = buses.size();
    if (fault) place_fault(*fault);
    build_edges();
    classify_islands();
  }

  FaultSolution solve() {
    FaultSolution sol;
    sol.has_fault = fault_node_ != kNone;

    std::vector<std::size_t> inverters;
    for (std::size_t s = 0; s < net_.sources().size(); ++s) {
      const Source& src = net_.sources()[s];
      if (src.online && is_inverter(src.kind) && island_of_source(s) == IslandState::Solved) inverters.push_back(s);
    }
    std::vector<double> scale(net_.sources().size(), 1.0);
    if (inverters.empty()) {
      sol.converged = true;
      sol.iterations = 1;
    } else {
      const ClampResult clamp = resolve_clamps(inverters);
      for (std::size_t n = 0; n < inverters.size(); ++n) scale[inverters[n]] = clamp.k[n];
      sol.converged = clamp.converged;
      sol.iterations = clamp.iterations;
    }
    fill_solution(sol, factorize(scale).voltages, scale);
    return sol;
  }

 private:
  struct ClampResult {
    std::vector<double> k;
    bool converged = false;
    int iterations = 0;
  };

  // Reduces the network to the inverter ports (open-circuit voltages and the
  // multi-port impedance matrix with inverters removed) and solves the clamp
  // conditions |I_s| = i_limit for the saturated set by Newton's method.
  ClampResult resolve_clamps(const std::vector<std::size_t>& inverters) const {
    const auto n = static_cast<Eigen::Index>(inverters.size());
    std::vector<double> removed(net_.sources().size(), 1.0);
    for (std::size_t s : inverters) removed[s] = 0.0;
    const Factorization base = factorize(removed);

    Eigen::VectorXcd w(n), z(n);
    Eigen::VectorXd limit(n);
    Eigen::MatrixXcd zm = Eigen::MatrixXcd::Zero(n, n);
    for (Eigen::Index a = 0; a < n; ++a) {
      const Source& src = net_.sources()[inverters[static_cast<std::size_t>(a)]];
      const std::size_t node = net_.bus_index(src.bus);
      w[a] = src.emf - base.voltages[node];
      z[a] = src.z_int;
      limit[a] = src.i_limit;
      if (unknown_[node] == kNone) continue;
      const Eigen::VectorXcd col = base.column(unknown_[node]);
      for (Eigen::Index b = 0; b < n; ++b) {
        const std::size_t other = net_.bus_index(net_.sources()[inverters[static_cast<std::size_t>(b)]].bus);
        if (unknown_[other] != kNone) zm(b, a) = col[static_cast<Eigen::Index>(unknown_[other])];
      }
    }

    ClampResult out;
    Eigen::VectorXd k = Eigen::VectorXd::Ones(n);
    std::vector<bool> active(static_cast<std::size_t>(n), false);
    bool polished = false;
    while (out.iterations < opts_.max_iterations) {
      ++out.iterations;
      Eigen::MatrixXcd m = zm;
      for (Eigen::Index a = 0; a < n; ++a) m(a, a) += k[a] * z[a];
      const Eigen::PartialPivLU<Eigen::MatrixXcd> lu(m);
      const Eigen::VectorXcd current = lu.solve(w);

      bool mode_change = false;
      double worst = 0.0;
      for (Eigen::Index a = 0; a < n; ++a) {
        auto on = active[static_cast<std::size_t>(a)];
        if (!on && std::abs(current[a]) > limit[a]) {
          on = true;
          mode_change = true;
        }
        if (on) worst = std::max(worst, std::abs(std::abs(current[a]) - limit[a]));
      }
      if (!mode_change && worst < opts_.tolerance) {
        // One extra Newton step is nearly free and lands on the limit to
        // rounding precision.
        if (polished || worst == 0.0 || out.iterations >= opts_.max_iterations) {
          out.converged = true;
          break;
        }
        polished = true;
      }

      std::vector<Eigen::Index> idx;
      for (Eigen::Index a = 0; a < n; ++a)
        if (active[static_cast<std::size_t>(a)]) idx.push_back(a);
      const auto na = static_cast<Eigen::Index>(idx.size());
      const Eigen::MatrixXcd m_inv = lu.inverse();
      Eigen::MatrixXd jac(na, na);
      Eigen::VectorXd residual(na);
      for (Eigen::Index r = 0; r < na; ++r) {
        const Eigen::Index s = idx[static_cast<std::size_t>(r)];
        residual[r] = std::norm(current[s]) - limit[s] * limit[s];
        for (Eigen::Index c = 0; c < na; ++c) {
          const Eigen::Index t = idx[static_cast<std::size_t>(c)];
          const Complex d_current = -m_inv(s, t) * z[t] * current[t];
          jac(r, c) = 2.0 * (std::conj(current[s]) * d_current).real();
        }
      }
      const Eigen::VectorXd step = jac.fullPivLu().solve(-residual);
      for (Eigen::Index r = 0; r < na; ++r) {
        const Eigen::Index s = idx[static_cast<std::size_t>(r)];
        k[s] += step[r];
        if (!(k[s] > 1.0)) {
          k[s] = 1.0;
          active[static_cast<std::size_t>(s)] = false;
        }
      }
    }
    out.k.assign(k.data(), k.data() + n);
    return out;
  }

  struct Factorization {
    std::vector<Complex> voltages;
    std::shared_ptr<Eigen::SparseLU<Eigen::SparseMatrix<Complex>, Eigen::COLAMDOrdering<int>>> lu;
    Eigen::Index size = 0;

    // Node voltages (unknown ordering) for a unit injection at `unknown`.
    Eigen::VectorXcd column(std::size_t unknown) const {
      Eigen::VectorXcd e = Eigen::VectorXcd::Zero(size);
      e[static_cast<Eigen::Index>(unknown)] = 1.0;
      return lu->solve(e);
    }
  };

  void place_fault(const FaultSpec& f) {
    const Branch* br = net_.find_branch(f.branch_id);
    if (!br) throw UnknownBranch(f.branch_id);
    if (!br->breaker_closed) throw InvalidFault(fmt::format("branch '{}' is open", f.branch_id));
    if (!(f.position >= 0.0 && f.position <= 1.0)) {
      throw InvalidFault(fmt::format("fault position {} outside [0, 1]", f.position));
    }
    if (f.z_fault.real() < 0.0) throw InvalidFault("fault resistance must be >= 0");
    fault_ = f;
    faulted_branch_ = net_.branch_index(f.branch_id);
    bolted_ = std::abs(f.z_fault) == 0.0;
    if (f.position <= 0.0) {
      fault_node_ = net_.bus_index(br->from_bus);
    } else if (f.position >= 1.0) {
      fault_node_ = net_.bus_index(br->to_bus);
    } else {
      fault_node_ = n_nodes_++;
      split_ = true;
    }
  }

  void build_edges() {
    const auto& branches = net_.branches();
    for (std::size_t i = 0; i < branches.size(); ++i) {
      const Branch& br = branches[i];
      if (!br.breaker_closed) continue;
      const std::size_t a = net_.bus_index(br.from_bus);
      const std::size_t b = net_.bus_index(br.to_bus);
      if (i == faulted_branch_ && split_) {
        edges_.push_back({a, fault_node_, 1.0 / (fault_.position * br.z)});
        edges_.push_back({fault_node_, b, 1.0 / ((1.0 - fault_.position) * br.z)});
      } else {
        edges_.push_back({a, b, 1.0 / br.z});
      }
    }
  }

  void classify_islands() {
    DisjointSets ds(n_nodes_);
    for (const auto& e : edges_) ds.unite(e.a, e.b);
    root_.resize(n_nodes_);
    for (std::size_t i = 0; i < n_nodes_; ++i) root_[i] = ds.find(i);

    std::vector<bool> machine(n_nodes_, false), any_source(n_nodes_, false), has_fault(n_nodes_, false);
    for (const auto& s : net_.sources()) {
      if (!s.online) continue;
      const std::size_t r = root_[net_.bus_index(s.bus)];
      any_source[r] = true;
      if (!is_inverter(s.kind)) machine[r] = true;
    }
    if (fault_node_ != kNone) has_fault[root_[fault_node_]] = true;

    island_.assign(n_nodes_, IslandState::Dead);
    for (std::size_t r = 0; r < n_nodes_; ++r) {
      if (root_[r] != r) continue;
      if (has_fault[r]) {
        if (!any_source[r]) {
          if (!opts_.allow_dead_fault) {
            throw SingularNetwork(fmt::format("fault on '{}' is isolated from every source", fault_.branch_id));
          }
          island_[r] = IslandState::Dead;
        } else {
          island_[r] = IslandState::Solved;
        }
      } else if (machine[r]) {
        island_[r] = IslandState::Solved;
      } else if (any_source[r]) {
        island_[r] = IslandState::Floating;
      }
    }

    unknown_.assign(n_nodes_, kNone);
    for (std::size_t i = 0; i < n_nodes_; ++i) {
      if (island_[root_[i]] != IslandState::Solved) continue;
      if (i == fault_node_ && bolted_) continue;
      unknown_[i] = n_unknowns_++;
    }
  }

  IslandState island_of_source(std::size_t s) const {
    return island_[root_[net_.bus_index(net_.sources()[s].bus)]];
  }

  // `scale` multiplies each source's internal impedance; 0 leaves it out.
  Factorization factorize(const std::vector<double>& scale) const {
    std::vector<Eigen::Triplet<Complex>> trips;
    Eigen::VectorXcd rhs = Eigen::VectorXcd::Zero(static_cast<Eigen::Index>(n_unknowns_));
    auto stamp = [&](std::size_t r, std::size_t c, Complex y) {
      trips.emplace_back(static_cast<int>(unknown_[r]), static_cast<int>(unknown_[c]), y);
    };

    for (const auto& e : edges_) {
      const bool ua = unknown_[e.a] != kNone;
      const bool ub = unknown_[e.b] != kNone;
      if (ua) stamp(e.a, e.a, e.y);
      if (ub) stamp(e.b, e.b, e.y);
      if (ua && ub) {
        stamp(e.a, e.b, -e.y);
        stamp(e.b, e.a, -e.y);
      }
    }
    for (std::size_t s = 0; s < net_.sources().size(); ++s) {
      const Source& src = net_.sources()[s];
      if (!src.online || scale[s] == 0.0) continue;
      const std::size_t node = net_.bus_index(src.bus);
      if (unknown_[node] == kNone) continue;
      const Complex y = 1.0 / (scale[s] * src.z_int);
      stamp(node, node, y);
      rhs[static_cast<Eigen::Index>(unknown_[node])] += src.emf * y;
    }
    if (fault_node_ != kNone && !bolted_ && unknown_[fault_node_] != kNone) {
      stamp(fault_node_, fault_node_, 1.0 / fault_.z_fault);
    }

    Factorization out;
    out.voltages.assign(n_nodes_, Complex{});
    out.size = static_cast<Eigen::Index>(n_unknowns_);
    if (n_unknowns_ > 0) {
      Eigen::SparseMatrix<Complex> y(out.size, out.size);
      y.setFromTriplets(trips.begin(), trips.end());
      y.makeCompressed();
      out.lu = std::make_shared<Eigen::SparseLU<Eigen::SparseMatrix<Complex>, Eigen::COLAMDOrdering<int>>>();
      out.lu->compute(y);
      if (out.lu->info() != Eigen::Success) throw SingularNetwork("nodal admittance matrix is singular");
      const Eigen::VectorXcd x = out.lu->solve(rhs);
      for (std::size_t i = 0; i < n_nodes_; ++i) {
        if (unknown_[i] != kNone) out.voltages[i] = x[static_cast<Eigen::Index>(unknown_[i])];
      }
    }
    // Unloaded inverter-only islands float at the EMF of their first source.
    for (std::size_t i = 0; i < n_nodes_; ++i) {
      if (island_[root_[i]] != IslandState::Floating) continue;
      for (const auto& s : net_.sources()) {
        if (s.online && root_[net_.bus_index(s.bus)] == root_[i]) {
          out.voltages[i] = s.emf;
          break;
        }
      }
    }
    return out;
  }

  void fill_solution(FaultSolution& sol, const std::vector<Complex>& v, const std::vector<double>& scale) const {
    const auto& buses = net_.buses();
    for (std::size_t i = 0; i < buses.size(); ++i) sol.bus_v[buses[i].id] = v[i];

    std::vector<Complex> src_i(net_.sources().size(), Complex{});
    for (std::size_t s = 0; s < net_.sources().size(); ++s) {
      const Source& src = net_.sources()[s];
      if (!src.online) continue;
      const std::size_t node = net_.bus_index(src.bus);
      if (island_[root_[node]] != IslandState::Solved) continue;
      src_i[s] = (src.emf - v[node]) / (scale[s] * src.z_int);
    }
    for (std::size_t s = 0; s < net_.sources().size(); ++s) sol.source_i[net_.sources()[s].id] = src_i[s];

    const auto& branches = net_.branches();
    for (std::size_t i = 0; i < branches.size(); ++i) {
      const Branch& br = branches[i];
      if (!br.breaker_closed) {
        sol.branch_i[{br.id, End::From}] = {};
        sol.branch_i[{br.id, End::To}] = {};
        continue;
      }
      const Complex va = v[net_.bus_index(br.from_bus)];
      const Complex vb = v[net_.bus_index(br.to_bus)];
      if (i == faulted_branch_ && split_) {
        const Complex vf = v[fault_node_];
        sol.branch_i[{br.id, End::From}] = (va - vf) / (fault_.position * br.z);
        sol.branch_i[{br.id, End::To}] = (vf - vb) / ((1.0 - fault_.position) * br.z);
      } else {
        const Complex i_ab = (va - vb) / br.z;
        sol.branch_i[{br.id, End::From}] = i_ab;
        sol.branch_i[{br.id, End::To}] = i_ab;
      }
    }

    if (fault_node_ == kNone) return;
    const bool dead = island_[root_[fault_node_]] != IslandState::Solved;
    sol.fault_energized = !dead;
    sol.fault_v = v[fault_node_];
    if (dead) {
      sol.fault_i = {};
    } else if (!bolted_) {
      sol.fault_i = v[fault_node_] / fault_.z_fault;
    } else {
      Complex total{};
      for (const auto& e : edges_) {
        if (e.a == fault_node_) total += e.y * (v[e.b] - v[e.a]);
        if (e.b == fault_node_) total += e.y * (v[e.a] - v[e.b]);
      }
      for (std::size_t s = 0; s < net_.sources().size(); ++s) {
        if (net_.bus_index(net_.sources()[s].bus) == fault_node_) total += src_i[s];
      }
      sol.fault_i = total;
    }

    // A fault sitting exactly on a terminal is inside the line, so the
    // terminal current includes the fault current.
    if (!split_) {
      const Branch& br = branches[faulted_branch_];
      auto& from = sol.branch_i[{br.id, End::From}];
      auto& to = sol.branch_i[{br.id, End::To}];
      if (fault_.position <= 0.0) {
        from = to + sol.fault_i;
      } else {
        to = from - sol.fault_i;
      }
    }
  }

  const Network& net_;
  SolverOptions opts_;
  std::size_t n_nodes_ = 0;
  FaultSpec fault_;
  std::size_t faulted_branch_ = kNone;
  std::size_t fault_node_ = kNone;
  bool split_ = false;
  bool bolted_ = false;
  std::vector<Edge> edges_;
  std::vector<std::size_t> root_;
  std::vector<IslandState> island_;
  std::vector<std::size_t> unknown_;
  std::size_t n_unknowns_ = 0;
};

}  // namespace

FaultSolution solve_prefault(const Network& net) {
  FaultSolution sol;
  for (const auto& b : net.buses()) sol.bus_v[b.id] = Complex(1.0, 0.0);
  for (const auto& br : net.branches()) {
    sol.branch_i[{br.id, End::From}] = {};
    sol.branch_i[{br.id, End::To}] = {};
  }
  for (const auto& s : net.sources()) sol.source_i[s.id] = {};
  sol.converged = true;
  return sol;
}

FaultSolution solve_fault(const Network& net, const FaultSpec& fault, const SolverOptions& opts) {
  NodalModel model(net, &fault, opts);
  return model.solve();
}

FaultSolution solve_network(const Network& net, const SolverOptions& opts) {
  NodalModel model(net, nullptr, opts);
  return model.solve();
}

}  // namespace mas::grid
