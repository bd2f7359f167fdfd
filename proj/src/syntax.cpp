#include "rex/syntax.hpp"

#include <algorithm>
#include <stdexcept>

namespace rex {

void validate_tree(const DependencyTree& tree) {
  const std::size_t n = tree.size();
  if (n == 0) throw std::invalid_argument("dependency tree: empty");
  if (!tree.label.empty() && tree.label.size() != n)
    throw std::invalid_argument("dependency tree: label array length " +
                                std::to_string(tree.label.size()) +
                                " != token count " + std::to_string(n));
  std::size_t roots = 0;
  for (std::size_t i = 0; i < n; ++i) {
    if (tree.head[i] > n)
      throw std::invalid_argument("dependency tree: head of token " +
                                  std::to_string(i + 1) + " is " +
                                  std::to_string(tree.head[i]) +
                                  ", out of range");
    if (tree.head[i] == i + 1)
      throw std::invalid_argument("dependency tree: token " +
                                  std::to_string(i + 1) + " is its own head");
    if (tree.head[i] == 0) ++roots;
  }
  if (roots == 0)
    throw std::invalid_argument(
        "dependency tree: no root; the head links form a cycle");
  if (roots != 1)
    throw std::invalid_argument("dependency tree: expected exactly one root, "
                                "found " + std::to_string(roots));
  // Each node must reach the root; a walk longer than n means a cycle.
  for (std::size_t i = 0; i < n; ++i) {
    std::size_t cur = i + 1, steps = 0;
    while (tree.head[cur - 1] != 0) {
      cur = tree.head[cur - 1];
      if (++steps > n)
        throw std::invalid_argument("dependency tree: cycle reachable from "
                                    "token " + std::to_string(i + 1));
    }
  }
}

std::size_t anchor_token(const DependencyTree& tree, const EntityMention& m) {
  std::size_t anchor = 0;
  for (std::size_t i = m.start; i <= m.end; ++i) {
    std::size_t h = tree.head[i - 1];
    bool outside = h == 0 || h < m.start || h > m.end;
    if (outside) anchor = i;  // keep the last qualifying token
  }
  return anchor;
}

namespace {

std::vector<std::size_t> path_to_root(const DependencyTree& tree,
                                      std::size_t node) {
  std::vector<std::size_t> path{node};
  while (tree.head[node - 1] != 0) {
    node = tree.head[node - 1];
    path.push_back(node);
  }
  return path;
}

}  // namespace

std::set<std::size_t> sdp0(const DependencyTree& tree, const EntityMention& m1,
                           const EntityMention& m2) {
  std::size_t a = anchor_token(tree, m1);
  std::size_t b = anchor_token(tree, m2);
  auto pa = path_to_root(tree, a);
  auto pb = path_to_root(tree, b);
  // Trim the common suffix down to the lowest common ancestor.
  std::size_t ia = pa.size(), ib = pb.size();
  while (ia > 1 && ib > 1 && pa[ia - 2] == pb[ib - 2]) {
    --ia;
    --ib;
  }
  std::set<std::size_t> out;
  for (std::size_t i = 0; i < ia; ++i) out.insert(pa[i]);
  for (std::size_t i = 0; i < ib; ++i) out.insert(pb[i]);
  return out;
}

std::set<std::size_t> sdp1(const DependencyTree& tree,
                           const std::set<std::size_t>& sdp0_set) {
  std::set<std::size_t> out = sdp0_set;
  for (std::size_t i = 1; i <= tree.size(); ++i) {
    std::size_t h = tree.head[i - 1];
    if (h == 0) continue;
    if (sdp0_set.count(i)) out.insert(h);
    if (sdp0_set.count(h)) out.insert(i);
  }
  return out;
}

PathSets path_sets(const DependencyTree& tree, const EntityMention& m1,
                   const EntityMention& m2) {
  PathSets ps;
  ps.sdp0 = sdp0(tree, m1, m2);
  ps.sdp1 = sdp1(tree, ps.sdp0);
  return ps;
}

Adjacency gcn_adjacency(const DependencyTree& tree) {
  const std::size_t n = tree.size();
  Adjacency adj{Tensor(n, n, 0.0), std::vector<double>(n, 0.0)};
  for (std::size_t i = 0; i < n; ++i) adj.matrix.at(i, i) = 1.0;
  for (std::size_t i = 0; i < n; ++i) {
    std::size_t h = tree.head[i];
    if (h == 0) continue;
    adj.matrix.at(i, h - 1) = 1.0;
    adj.matrix.at(h - 1, i) = 1.0;
  }
  for (std::size_t i = 0; i < n; ++i) {
    double d = 0.0;
    for (std::size_t j = 0; j < n; ++j) d += adj.matrix.at(i, j);
    adj.degree[i] = d;
  }
  return adj;
}

}  // namespace rex
