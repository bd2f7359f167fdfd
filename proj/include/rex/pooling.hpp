#pragma once

#include <optional>
#include <string>
#include <vector>

#include "rex/syntax.hpp"
#include "rex/tape.hpp"
#include "rex/tensor.hpp"

namespace rex {

enum class PoolingStrategy { EntOnly, EntSent, EntDym, EntDep0, EntDep1 };

std::string to_string(PoolingStrategy s);
PoolingStrategy pooling_from_string(const std::string& s);
const std::vector<PoolingStrategy>& all_pooling_strategies();

// One max-pool operand: a named set of 1-based token indices. May be empty
// (boundary segments of the dynamic split), in which case the pooled slot is
// a zero vector.
struct IndexSet {
  std::string name;
  std::vector<std::size_t> indices;  // sorted ascending, 1-based
};

// The ordered index sets one strategy pools over for one example. Output
// dimension is sets.size() * d_A.
struct PoolingPlan {
  PoolingStrategy strategy;
  std::vector<IndexSet> sets;
};

// Builds the plan. path_sets is required for the DEP strategies and ignored
// otherwise. Set order follows the concatenation order of the pooled
// formulas: context sets first for DYM/DEP, entity sets first for SENT.
PoolingPlan make_plan(PoolingStrategy strategy, std::size_t n,
                      const EntityMention& m1, const EntityMention& m2,
                      const PathSets* path_sets);

// Number of pooled sets (output dim = set_count * d_A).
std::size_t plan_set_count(PoolingStrategy strategy);

// Elementwise max over each set's rows of A, concatenated in plan order.
// Plain (non-tape) path for tests and audits.
Tensor pool(const Tensor& A, const PoolingPlan& plan);

// Tape path used by the model: same semantics, gradient routes to the
// lowest-index maximizer per coordinate.
Var pool(Tape& tape, Var A, const PoolingPlan& plan);

}  // namespace rex
