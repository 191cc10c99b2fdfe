#include "mas/agents/branch_agent.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>

#include "mas/error.hpp"

namespace mas::agents {

std::string_view to_string(Position p) { return p == Position::Open ? "Open" : "Closed"; }

std::string_view to_string(SubState s) {
  switch (s) {
    case SubState::Normal: return "Normal";
    case SubState::Reclosing: return "Reclosing";
    case SubState::ManualOperation: return "ManualOperation";
    case SubState::LockedOut: return "LockedOut";
  }
  return "?";
}

BranchAgent::BranchAgent(std::string branch_id, std::map<std::uint16_t, SettingGroup> groups,
                         std::uint16_t active_group, BranchAgentConfig cfg, EventLog* log)
    : cfg_(cfg), log_(log) {
  db_.branch_id = std::move(branch_id);
  db_.groups = std::move(groups);
  db_.active_group = active_group;
  if (!db_.groups.count(active_group)) {
    throw NoActiveGroup(fmt::format("branch {}: group {} is not stored", db_.branch_id, active_group));
  }
  last_tr_ = snapshot();
  last_tr_.v_mag = 1.0;
  last_tr_.switch_count = 0;
}

void BranchAgent::set_peers(std::vector<std::string> terminals, std::string regional) {
  terminal_peers_ = std::move(terminals);
  regional_ = std::move(regional);
}

void BranchAgent::log(SimTime t, EventKind kind, Detail detail) {
  EventRecord r{t, db_.branch_id, kind, std::move(detail)};
  if (log_) log_->append(r);
  db_.events.push_back(std::move(r));
}

const SettingGroup& BranchAgent::active() const {
  auto it = db_.groups.find(db_.active_group);
  if (it == db_.groups.end()) {
    throw NoActiveGroup(fmt::format("branch {}: group {} is not stored", db_.branch_id, db_.active_group));
  }
  return it->second;
}

double BranchAgent::current() const { return *std::max_element(db_.i_mag.begin(), db_.i_mag.end()); }

void BranchAgent::collect(const grid::Measurement& m) {
  if (m.branch_id != db_.branch_id) {
    throw WrongBranch(fmt::format("measurement for {} offered to agent {}", m.branch_id, db_.branch_id));
  }
  staged_ = m;
}

void BranchAgent::preprocess() {
  if (!staged_) return;
  for (std::size_t p = 0; p < 3; ++p) {
    const double raw = std::max(0.0, staged_->i_mag[p]);
    db_.i_mag[p] = cfg_.alpha * raw + (1.0 - cfg_.alpha) * db_.i_mag[p];
    db_.v_mag[p] = std::max(0.0, staged_->v_mag[p]);
  }
  db_.direction = staged_->direction;
  staged_.reset();
}

RelayDecision BranchAgent::analyze() const { return decide(active(), current(), db_.direction); }

Actions BranchAgent::protection_step(SimTime now) {
  Actions out;
  if (db_.breaker.position == Position::Open || trip_latched_) {
    stage_start_ = {};
    return out;
  }
  const SettingGroup& g = active();
  const double i = current();
  const bool blocked = g.directional && db_.direction == grid::Direction::Reverse;
  const double pickup[3] = {g.stage1_pickup, g.stage2_pickup, g.stage3_pickup};

  int operate = 0;
  bool any = false;
  for (int k = 0; k < 3; ++k) {
    auto& start = stage_start_[static_cast<std::size_t>(k)];
    if (blocked || i < pickup[k]) {
      start.reset();
      continue;
    }
    any = true;
    if (!start) start = now;
    const double delay =
        k == 0 ? g.stage1_delay : k == 1 ? g.stage2_delay : inverse_time(g.stage3_tms, i / g.stage3_pickup);
    if (!std::isfinite(delay)) continue;
    if (operate == 0 && now - *start >= SimTime::from_seconds(delay)) operate = k + 1;
  }

  if (window_end_ && any) pickup_in_window_ = true;
  if (!any && !window_end_ &&
      (db_.breaker.sub_state == SubState::Reclosing || db_.breaker.sub_state == SubState::ManualOperation)) {
    db_.breaker.sub_state = SubState::Normal;
  }
  if (operate == 0) return out;

  trip_latched_ = true;
  stage_start_ = {};
  log(now, EventKind::Trip,
      {{"stage", std::to_string(operate)}, {"i", analog(i)}, {"group", std::to_string(db_.active_group)}});
  if (last_group_change_ && now - *last_group_change_ < cfg_.cycle) {
    log(now, EventKind::Alarm, {{"reason", "race"}, {"group", std::to_string(db_.active_group)}});
  }
  open_due_ = now + cfg_.breaker_time;
  out.timers.push_back({*open_due_, kBreakerOpen});
  for (const auto& peer : terminal_peers_) {
    out.messages.push_back(
        {comms::Mode::Direct, peer, comms::TripNotice{db_.branch_id, static_cast<std::uint8_t>(operate)}});
  }
  return out;
}

Actions BranchAgent::open_breaker() {
  Actions out;
  db_.breaker.position = Position::Open;
  ++db_.switch_count;
  out.plant.push_back({PlantAction::Kind::BreakerOpen, db_.branch_id});
  return out;
}

Actions BranchAgent::on_timer(int timer, SimTime now) {
  Actions out;
  switch (timer) {
    case kBreakerOpen: {
      if (!open_due_ || *open_due_ != now) return out;
      open_due_.reset();
      trip_latched_ = false;
      if (db_.breaker.position == Position::Open) return out;
      const SubState prior = db_.breaker.sub_state;
      out = open_breaker();
      log(now, EventKind::Open, {{"cause", "trip"}});
      window_end_.reset();
      if (prior == SubState::Reclosing || prior == SubState::ManualOperation) {
        db_.breaker.sub_state = SubState::LockedOut;
        log(now, EventKind::Lockout, {});
      } else if (active().reclose_enabled) {
        db_.breaker.sub_state = SubState::Reclosing;
        reclose_due_ = now + SimTime::from_seconds(active().dead_time);
        out.timers.push_back({*reclose_due_, kReclose});
      } else {
        db_.breaker.sub_state = SubState::Normal;
      }
      return out;
    }
    case kReclose: {
      if (!reclose_due_ || *reclose_due_ != now) return out;
      reclose_due_.reset();
      if (db_.breaker.position != Position::Open || db_.breaker.sub_state != SubState::Reclosing) return out;
      db_.breaker.position = Position::Closed;
      ++db_.switch_count;
      out.plant.push_back({PlantAction::Kind::BreakerClose, db_.branch_id});
      log(now, EventKind::Reclose, {});
      window_end_ = now + cfg_.reclose_window;
      pickup_in_window_ = false;
      out.timers.push_back({*window_end_, kWindowEnd});
      return out;
    }
    case kWindowEnd: {
      if (!window_end_ || *window_end_ != now) return out;
      window_end_.reset();
      if (db_.breaker.position == Position::Closed && !pickup_in_window_ &&
          (db_.breaker.sub_state == SubState::Reclosing || db_.breaker.sub_state == SubState::ManualOperation)) {
        db_.breaker.sub_state = SubState::Normal;
      }
      return out;
    }
    default:
      return out;
  }
}

Actions BranchAgent::execute_instruction(const comms::Instruction& instr, SimTime issued, SimTime now) {
  Actions out;
  if (instr.target != db_.branch_id) return out;
  if (now - issued >= cfg_.instruction_max_age) {
    throw StaleInstruction(fmt::format("{}: instruction issued at {} is stale at {}", db_.branch_id,
                                       format_seconds(issued), format_seconds(now)));
  }
  switch (instr.action) {
    case comms::Action::Open:
      if (db_.breaker.position == Position::Open) {
        throw AlreadyInState(fmt::format("{}: breaker already open", db_.branch_id));
      }
      out = open_breaker();
      db_.breaker.sub_state = SubState::ManualOperation;
      trip_latched_ = false;
      open_due_.reset();
      reclose_due_.reset();
      window_end_.reset();
      log(now, EventKind::Open, {{"cause", "manual"}});
      return out;
    case comms::Action::Close:
      if (db_.breaker.position == Position::Closed) {
        throw AlreadyInState(fmt::format("{}: breaker already closed", db_.branch_id));
      }
      db_.breaker.position = Position::Closed;
      db_.breaker.sub_state = SubState::ManualOperation;
      ++db_.switch_count;
      reclose_due_.reset();
      out.plant.push_back({PlantAction::Kind::BreakerClose, db_.branch_id});
      log(now, EventKind::Close, {{"cause", "manual"}});
      window_end_ = now + cfg_.reclose_window;
      pickup_in_window_ = false;
      out.timers.push_back({*window_end_, kWindowEnd});
      return out;
    default:
      return out;
  }
}

Actions BranchAgent::on_shed(const comms::LoadShedOrder& order, SimTime) {
  Actions out;
  if (order.executor_id != db_.branch_id) return out;
  out.plant.push_back({PlantAction::Kind::LoadDisconnect, order.load_id});
  return out;
}

bool BranchAgent::apply_group(std::uint16_t group_id, std::uint16_t vector_code, SimTime now) {
  const auto key = std::make_pair(group_id, vector_code);
  if (last_update_ == key) return false;
  last_update_ = key;
  if (!db_.groups.count(group_id)) {
    log(now, EventKind::Alarm, {{"reason", "unknown_group"}, {"group", std::to_string(group_id)}});
    return false;
  }
  if (group_id == db_.active_group) return false;
  log(now, EventKind::GroupChange,
      {{"from", std::to_string(db_.active_group)}, {"to", std::to_string(group_id)},
       {"vector", std::to_string(vector_code)}});
  db_.active_group = group_id;
  last_group_change_ = now;
  return true;
}

void BranchAgent::receive_digest(const comms::StatusDigest& d) { db_.neighbor_digests[d.source_id] = d; }

comms::StatusDigest BranchAgent::snapshot() const {
  comms::StatusDigest d;
  d.source_id = db_.branch_id;
  d.breaker_status = db_.breaker.position == Position::Closed ? comms::BreakerCode::Closed : comms::BreakerCode::Open;
  d.direction = db_.direction;
  d.i_mag_a = db_.i_mag[0];
  return d;
}

namespace {
bool differs(const comms::StatusDigest& a, const comms::StatusDigest& b, double delta) {
  if (a.breaker_status != b.breaker_status || a.direction != b.direction) return true;
  if (std::abs(a.i_mag_a - b.i_mag_a) > delta) return true;
  if (a.v_mag && b.v_mag && std::abs(*a.v_mag - *b.v_mag) > delta) return true;
  return a.switch_count != b.switch_count;
}
}  // namespace

Actions BranchAgent::digests(SimTime now) {
  Actions out;
  const comms::StatusDigest tt = snapshot();
  if (!terminal_peers_.empty()) {
    const bool due = !last_tt_time_ || now - *last_tt_time_ >= cfg_.digest_period;
    if (due || !last_tt_ || differs(tt, *last_tt_, cfg_.digest_delta)) {
      for (const auto& peer : terminal_peers_) out.messages.push_back({comms::Mode::Direct, peer, tt});
      last_tt_ = tt;
      last_tt_time_ = now;
    }
  }
  if (!regional_.empty()) {
    comms::StatusDigest tr = tt;
    tr.v_mag = *std::min_element(db_.v_mag.begin(), db_.v_mag.end());
    tr.switch_count = static_cast<std::uint8_t>(std::min(db_.switch_count, 255));
    if (differs(tr, last_tr_, cfg_.digest_delta)) {
      out.messages.push_back({comms::Mode::Direct, regional_, tr});
      last_tr_ = tr;
    }
  }
  return out;
}

}  // namespace mas::agents
