#pragma once

#include <cstddef>
#include <map>
#include <string>
#include <string_view>

#include "mas/adaptive/settings.hpp"
#include "mas/grid/network.hpp"

namespace mas::adaptive {

/// Offline expert-system table: status vector bits -> branch -> group.
/// Group ids number the distinct settings of one branch across vectors,
/// from 1 in enumeration order.
struct KnowledgeBase {
  std::string network_hash;
  std::size_t n_dgs = 0;
  std::map<std::string, Settings> entries;
  std::map<std::string, std::string> infeasible;
};

/// Computes and verifies every vector. Throws TooManyDgs.
KnowledgeBase build_knowledge(const grid::Network& net, const StudyConfig& cfg = {});

/// Tab-separated KB/SET/INFEASIBLE lines, sorted. The empty vector of a
/// network without DGs is written as "-".
std::string write_knowledge(const KnowledgeBase& kb);
/// Throws ParseError.
KnowledgeBase read_knowledge(std::string_view text);

/// Throws HashMismatch when `kb` was built for another network and
/// InfeasibleVector when `bits` has no stored entry.
const Settings& lookup(const KnowledgeBase& kb, const grid::Network& net, const std::string& bits);

}  // namespace mas::adaptive
