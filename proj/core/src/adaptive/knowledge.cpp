#include "mas/adaptive/knowledge.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <atomic>
#include <exception>
#include <map>
#include <thread>
#include <vector>

#include "mas/adaptive/selectivity.hpp"
#include "mas/error.hpp"
#include "mas/text.hpp"

namespace mas::adaptive {

namespace {

std::string field_bits(const std::string& bits) { return bits.empty() ? "-" : bits; }

struct VectorOutcome {
  std::string bits;
  SettingsResult result;
};

VectorOutcome study_vector(const grid::Network& net, const DgStatusVector& v, const StudyConfig& cfg) {
  VectorOutcome o{v.bits(), compute_settings(net, v, cfg)};
  if (!o.result.feasible()) return o;
  const auto violations = verify_selectivity(net, v, o.result.groups, cfg);
  if (!violations.empty()) {
    const auto& first = violations.front();
    o.result.reason = "selectivity";
    o.result.detail = fmt::format("fault on {} at {} tripped {}", first.branch, first.position, first.tripped);
    o.result.groups.clear();
  }
  return o;
}

}  // namespace

KnowledgeBase build_knowledge(const grid::Network& net, const StudyConfig& cfg) {
  const auto vectors = enumerate_vectors(net);

  std::vector<VectorOutcome> outcomes(vectors.size());
  std::atomic<std::size_t> next{0};
  std::vector<std::exception_ptr> errors(vectors.size());
  auto worker = [&] {
    for (std::size_t k = next++; k < vectors.size(); k = next++) {
      try {
        outcomes[k] = study_vector(net, vectors[k], cfg);
      } catch (...) {
        errors[k] = std::current_exception();
      }
    }
  };
  const std::size_t n_threads =
      std::min<std::size_t>(vectors.size(), std::max(1u, std::thread::hardware_concurrency()));
  {
    std::vector<std::jthread> pool;
    for (std::size_t t = 1; t < n_threads; ++t) pool.emplace_back(worker);
    worker();
  }
  for (const auto& e : errors)
    if (e) std::rethrow_exception(e);

  KnowledgeBase kb;
  kb.network_hash = net.fingerprint();
  kb.n_dgs = net.dg_ids().size();

  // Number the distinct settings of each branch in enumeration order.
  std::map<std::string, std::vector<agents::SettingGroup>> distinct;
  for (auto& o : outcomes) {
    if (!o.result.feasible()) {
      kb.infeasible.emplace(o.bits, o.result.reason);
      continue;
    }
    for (auto& [branch, g] : o.result.groups) {
      auto& seen = distinct[branch];
      g.group_id = 0;
      auto it = std::find(seen.begin(), seen.end(), g);
      if (it == seen.end()) {
        seen.push_back(g);
        it = seen.end() - 1;
      }
      g.group_id = static_cast<std::uint16_t>(it - seen.begin() + 1);
    }
    kb.entries.emplace(o.bits, std::move(o.result.groups));
  }
  return kb;
}

std::string write_knowledge(const KnowledgeBase& kb) {
  using text::format_number;
  std::string out = fmt::format("KB\t{}\t{}\n", kb.network_hash, kb.n_dgs);
  for (const auto& [bits, groups] : kb.entries) {
    for (const auto& [branch, g] : groups) {
      out += fmt::format("SET\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\n", field_bits(bits), branch, g.group_id,
                         format_number(g.stage1_pickup), format_number(g.stage2_pickup),
                         format_number(g.stage2_delay), format_number(g.stage3_pickup), format_number(g.stage3_tms),
                         g.directional ? 1 : 0, g.reclose_enabled ? 1 : 0, format_number(g.dead_time));
    }
  }
  for (const auto& [bits, reason] : kb.infeasible) out += fmt::format("INFEASIBLE\t{}\t{}\n", field_bits(bits), reason);
  return out;
}

KnowledgeBase read_knowledge(std::string_view input) {
  KnowledgeBase kb;
  bool header = false;
  std::size_t number = 0;
  std::size_t pos = 0;
  while (pos < input.size()) {
    const auto end = input.find('\n', pos);
    std::string_view line = input.substr(pos, end == std::string_view::npos ? std::string_view::npos : end - pos);
    pos = end == std::string_view::npos ? input.size() : end + 1;
    ++number;
    if (line.empty()) continue;
    const auto f = text::split(line, '\t');

    auto bits_of = [&](const std::string& s) {
      const std::string b = s == "-" ? std::string{} : s;
      if (b.size() != kb.n_dgs || b.find_first_not_of("01") != std::string::npos) {
        throw ParseError(number, fmt::format("bad status vector '{}'", s));
      }
      return b;
    };

    if (f[0] == "KB") {
      if (header) throw ParseError(number, "duplicate KB header");
      if (f.size() != 3) throw ParseError(number, "KB header needs hash and DG count");
      kb.network_hash = f[1];
      const auto n = text::parse_int(f[2], number, "DG count");
      if (n < 0 || static_cast<std::size_t>(n) > kMaxDgs) throw ParseError(number, "DG count out of range");
      kb.n_dgs = static_cast<std::size_t>(n);
      header = true;
      continue;
    }
    if (!header) throw ParseError(number, "missing KB header");
    if (f[0] == "SET") {
      if (f.size() != 12) throw ParseError(number, "SET needs 11 fields");
      agents::SettingGroup g;
      const auto gid = text::parse_int(f[3], number, "group id");
      if (gid < 1 || gid > 0xFFFF) throw ParseError(number, "group id out of range");
      g.group_id = static_cast<std::uint16_t>(gid);
      g.stage1_pickup = text::parse_double(f[4], number, "stage-1 pickup");
      g.stage2_pickup = text::parse_double(f[5], number, "stage-2 pickup");
      g.stage2_delay = text::parse_double(f[6], number, "stage-2 delay");
      g.stage3_pickup = text::parse_double(f[7], number, "stage-3 pickup");
      g.stage3_tms = text::parse_double(f[8], number, "time multiplier");
      g.directional = text::parse_flag(f[9], number, "directional");
      g.reclose_enabled = text::parse_flag(f[10], number, "reclose");
      g.dead_time = text::parse_double(f[11], number, "dead time");
      if (auto why = g.check(); !why.empty()) throw ParseError(number, why);
      auto& groups = kb.entries[bits_of(f[1])];
      if (!groups.emplace(f[2], g).second) throw ParseError(number, fmt::format("duplicate entry for {}", f[2]));
    } else if (f[0] == "INFEASIBLE") {
      if (f.size() != 3) throw ParseError(number, "INFEASIBLE needs vector and reason");
      kb.infeasible[bits_of(f[1])] = f[2];
    } else {
      throw ParseError(number, fmt::format("unknown record '{}'", f[0]));
    }
  }
  if (!header) throw ParseError(number, "missing KB header");
  for (const auto& [bits, reason] : kb.infeasible) {
    if (kb.entries.count(bits)) throw ParseError(number, fmt::format("vector {} is both stored and infeasible", bits));
  }
  // Every stored vector covers the same branches, and a (branch, group id)
  // pair names one setting group throughout.
  std::map<std::pair<std::string, std::uint16_t>, agents::SettingGroup> seen;
  const Settings* first = nullptr;
  for (const auto& [bits, groups] : kb.entries) {
    if (first && (groups.size() != first->size() ||
                  !std::equal(groups.begin(), groups.end(), first->begin(),
                              [](const auto& a, const auto& b) { return a.first == b.first; }))) {
      throw ParseError(number, fmt::format("vector {} does not cover the same branches", field_bits(bits)));
    }
    first = &groups;
    for (const auto& [branch, g] : groups) {
      auto [it, fresh] = seen.emplace(std::make_pair(branch, g.group_id), g);
      if (!fresh && !(it->second == g)) {
        throw ParseError(number, fmt::format("group {} of {} differs between vectors", g.group_id, branch));
      }
    }
  }
  return kb;
}

const Settings& lookup(const KnowledgeBase& kb, const grid::Network& net, const std::string& bits) {
  if (kb.network_hash != net.fingerprint()) {
    throw HashMismatch(fmt::format("knowledge base built for network {}, running {}", kb.network_hash,
                                   net.fingerprint()));
  }
  const std::string key = bits == "-" ? std::string{} : bits;
  if (auto it = kb.entries.find(key); it != kb.entries.end()) return it->second;
  if (auto it = kb.infeasible.find(key); it != kb.infeasible.end()) throw InfeasibleVector(field_bits(key), it->second);
  throw InfeasibleVector(field_bits(key), "missing");
}

}  // namespace mas::adaptive
