#pragma once

#include <map>
#include <string>
#include <utility>
#include <vector>

#include "mas/agents/actions.hpp"
#include "mas/agents/event_log.hpp"
#include "mas/comms/payload.hpp"
#include "mas/grid/network.hpp"
#include "mas/sim_time.hpp"

namespace mas::agents {

struct CentralConfig {
  double f0 = 50.0;
  /// pu of power imbalance per Hz.
  double k_f = 10.0;
  double f_min = 49.5;
  double v_min = 0.9;
  double q_step = 0.1;
};

struct CentralDb {
  double frequency = 50.0;
  std::map<std::string, double> bus_v_estimates;
  std::map<std::string, std::pair<double, double>> dispatch;
  std::vector<std::string> shed_log;
};

/// Quasi-static frequency model f = f0 - (P_load - P_gen) / k_f.
double modeled_frequency(double p_load, double p_gen, const CentralConfig& cfg);

/// System supervisor. Keeps its own plant model (ratings from the network
/// file, DG states from area summaries, its own orders) and restores
/// frequency and voltage by dispatch, then load shedding.
class CentralAgent {
 public:
  CentralAgent(const grid::Network& net, CentralConfig cfg = {}, EventLog* log = nullptr);

  const CentralDb& db() const { return db_; }
  double p_gen() const;
  double p_load() const;
  double frequency() const { return modeled_frequency(p_load(), p_gen(), cfg_); }
  /// Branch agent that switches a load: the branch feeding its bus.
  const std::string& executor(const std::string& load_id) const;

  Actions on_summary(const comms::AreaSummary& s, SimTime now);
  Actions central_supervise(SimTime now);

 private:
  struct Dg {
    std::string id;
    std::string bus;
    grid::SourceKind kind;
    bool online;
    double p;
    double q;
    double p_max;
    double q_max;
  };
  struct LoadEntry {
    std::string id;
    std::string bus;
    double p;
    int priority;
    bool connected;
    std::string executor;
  };

  void log(SimTime t, EventKind kind, Detail detail);
  Outgoing dispatch(Dg& dg, double p, double q);

  CentralConfig cfg_;
  EventLog* log_;
  CentralDb db_;
  double grid_p_;
  std::vector<Dg> dgs_;
  std::vector<LoadEntry> loads_;
  std::map<std::string, std::map<std::string, std::size_t>> hops_;  // bus -> bus -> hops
  std::string low_v_bus_;
  double low_v_ = 1.0;
};

}  // namespace mas::agents
