#include "rex/pooling.hpp"

#include <stdexcept>

namespace rex {

std::string to_string(PoolingStrategy s) {
  switch (s) {
    case PoolingStrategy::EntOnly: return "ENT-ONLY";
    case PoolingStrategy::EntSent: return "ENT-SENT";
    case PoolingStrategy::EntDym: return "ENT-DYM";
    case PoolingStrategy::EntDep0: return "ENT-DEP0";
    case PoolingStrategy::EntDep1: return "ENT-DEP1";
  }
  throw std::logic_error("unreachable");
}

PoolingStrategy pooling_from_string(const std::string& s) {
  for (PoolingStrategy p : all_pooling_strategies())
    if (to_string(p) == s) return p;
  throw std::invalid_argument("unknown pooling strategy '" + s +
                              "' (expected ENT-ONLY, ENT-SENT, ENT-DYM, "
                              "ENT-DEP0 or ENT-DEP1)");
}

const std::vector<PoolingStrategy>& all_pooling_strategies() {
  static const std::vector<PoolingStrategy> all{
      PoolingStrategy::EntOnly, PoolingStrategy::EntSent,
      PoolingStrategy::EntDym, PoolingStrategy::EntDep0,
      PoolingStrategy::EntDep1};
  return all;
}

namespace {

IndexSet range_set(std::string name, std::size_t lo, std::size_t hi) {
  IndexSet s{std::move(name), {}};
  for (std::size_t i = lo; i <= hi && hi >= 1; ++i) s.indices.push_back(i);
  return s;
}

IndexSet from_set(std::string name, const std::set<std::size_t>& src) {
  IndexSet s{std::move(name), {src.begin(), src.end()}};
  return s;
}

}  // namespace

std::size_t plan_set_count(PoolingStrategy strategy) {
  switch (strategy) {
    case PoolingStrategy::EntOnly: return 2;
    case PoolingStrategy::EntSent: return 3;
    case PoolingStrategy::EntDym: return 5;
    case PoolingStrategy::EntDep0: return 3;
    case PoolingStrategy::EntDep1: return 3;
  }
  throw std::logic_error("unreachable");
}

PoolingPlan make_plan(PoolingStrategy strategy, std::size_t n,
                      const EntityMention& m1, const EntityMention& m2,
                      const PathSets* path_sets) {
  if (m1.start < 1 || m1.end > n || m2.start < 1 || m2.end > n ||
      m1.start > m1.end || m2.start > m2.end)
    throw std::invalid_argument("make_plan: mention spans out of range for "
                                "n=" + std::to_string(n));
  if ((strategy == PoolingStrategy::EntDep0 ||
       strategy == PoolingStrategy::EntDep1) &&
      path_sets == nullptr)
    throw std::invalid_argument("make_plan: " + to_string(strategy) +
                                " requires dependency path sets");
  IndexSet ent1 = range_set("M1", m1.start, m1.end);
  IndexSet ent2 = range_set("M2", m2.start, m2.end);
  PoolingPlan plan{strategy, {}};
  switch (strategy) {
    case PoolingStrategy::EntOnly:
      plan.sets = {ent1, ent2};
      break;
    case PoolingStrategy::EntSent:
      plan.sets = {ent1, ent2, range_set("SENT", 1, n)};
      break;
    case PoolingStrategy::EntDym:
      plan.sets = {m1.start > 1 ? range_set("LEFT", 1, m1.start - 1)
                                : IndexSet{"LEFT", {}},
                   range_set("MIDDLE", m1.start, m2.end),
                   m2.end < n ? range_set("RIGHT", m2.end + 1, n)
                              : IndexSet{"RIGHT", {}},
                   ent1, ent2};
      break;
    case PoolingStrategy::EntDep0:
      plan.sets = {from_set("DEP0", path_sets->sdp0), ent1, ent2};
      break;
    case PoolingStrategy::EntDep1:
      plan.sets = {from_set("DEP1", path_sets->sdp1), ent1, ent2};
      break;
  }
  for (const auto& s : plan.sets)
    for (std::size_t i : s.indices)
      if (i < 1 || i > n)
        throw std::invalid_argument("make_plan: index " + std::to_string(i) +
                                    " in set '" + s.name +
                                    "' out of range for n=" +
                                    std::to_string(n));
  return plan;
}

Tensor pool(const Tensor& A, const PoolingPlan& plan) {
  const std::size_t d = A.cols();
  Tensor out(1, plan.sets.size() * d, 0.0);
  for (std::size_t s = 0; s < plan.sets.size(); ++s) {
    const auto& idx = plan.sets[s].indices;
    for (std::size_t c = 0; c < d; ++c) {
      double v = 0.0;
      bool first = true;
      for (std::size_t i : idx) {
        double x = A.at(i - 1, c);
        if (first || x > v) v = x;
        first = false;
      }
      out.at(0, s * d + c) = v;
    }
  }
  return out;
}

Var pool(Tape& tape, Var A, const PoolingPlan& plan) {
  std::vector<Var> parts;
  parts.reserve(plan.sets.size());
  for (const auto& s : plan.sets) {
    std::vector<std::size_t> rows;
    rows.reserve(s.indices.size());
    for (std::size_t i : s.indices) rows.push_back(i - 1);
    parts.push_back(tape.masked_max(A, std::move(rows)));
  }
  return tape.concat_cols(parts);
}

}  // namespace rex
