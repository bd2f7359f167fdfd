#pragma once

#include <cstddef>
#include <set>
#include <string>
#include <vector>

#include "rex/tensor.hpp"

namespace rex {

struct EntityMention {
  std::size_t start = 0;  // 1-based, inclusive
  std::size_t end = 0;    // 1-based, inclusive
  std::string type;
};

// Rooted dependency tree over sentence tokens. head[i] is the 1-based parent
// of token i+1; 0 marks the unique root.
struct DependencyTree {
  std::vector<std::size_t> head;
  std::vector<std::string> label;

  std::size_t size() const { return head.size(); }
};

struct PathSets {
  std::set<std::size_t> sdp0;  // 1-based token indices on the shortest path
  std::set<std::size_t> sdp1;  // sdp0 plus everything one tree edge away
};

// Throws with the specific violation (out-of-range head, multi-root/no-root,
// cycle) if the head array is not a single rooted tree.
void validate_tree(const DependencyTree& tree);

// Syntactic head of the mention span: the token in [start,end] whose head
// lies outside the span (root counts as outside). Several such tokens ->
// the last one.
std::size_t anchor_token(const DependencyTree& tree, const EntityMention& m);

// Token set of the unique undirected tree path between the two mentions'
// anchors, endpoints included. Computed by climbing to the root from both
// anchors and splicing at the lowest common ancestor.
std::set<std::size_t> sdp0(const DependencyTree& tree, const EntityMention& m1,
                           const EntityMention& m2);

// sdp0 plus every token sharing a tree edge (either direction) with it.
std::set<std::size_t> sdp1(const DependencyTree& tree,
                           const std::set<std::size_t>& sdp0_set);

PathSets path_sets(const DependencyTree& tree, const EntityMention& m1,
                   const EntityMention& m2);

// Symmetric 0/1 adjacency with self-loops; degrees[i] = 1 + tree-degree(i).
struct Adjacency {
  Tensor matrix;               // n x n
  std::vector<double> degree;  // row sums
};

Adjacency gcn_adjacency(const DependencyTree& tree);

}  // namespace rex
