// Copyright 2026 The smoothfix Authors.
// SPDX-License-Identifier: Apache-2.0

// Weighted branching process: trees of branch weights L(v) = Π T along the
// root-to-v path, positions S(v) = -log L(v), and the node weights C(v).
#pragma once

#include <cmath>
#include <cstdint>
#include <iosfwd>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "smoothfix/error.hpp"
#include "smoothfix/models.hpp"
#include "smoothfix/rng.hpp"

namespace smoothfix {

inline constexpr std::size_t kDefaultNodeBudget = 10'000'000;

struct GrowthOptions {
  std::size_t node_budget = kDefaultNodeBudget;
  /// Nodes with L(v) below this floor are kept but not expanded. Zero keeps
  /// every node (exact trees).
  double weight_floor = 0.0;
  /// Draw (C, T) at frontier nodes so C(v) is known there. Samplers that only
  /// need L at the frontier switch this off.
  bool frontier_draws = true;
};

struct TreeNode {
  std::int64_t parent = -1;
  /// Original 1-based index j of the weight T_j(parent) leading here.
  std::uint32_t child_index = 0;
  std::uint32_t depth = 0;
  /// T_j(parent); 1 at the root.
  double edge_weight = 1.0;
  double L = 1.0;
  double S = 0.0;
  double C = 0.0;
  std::uint64_t seed = 0;
  std::int64_t first_child = -1;
  std::uint32_t child_count = 0;
  bool expanded = false;
};

class WeightedTree {
 public:
  WeightedTree() = default;

  std::span<const TreeNode> nodes() const noexcept { return nodes_; }
  const TreeNode& node(std::size_t i) const { return nodes_.at(i); }
  std::size_t size() const noexcept { return nodes_.size(); }
  /// Deepest materialized generation.
  std::uint32_t max_depth() const noexcept { return max_depth_; }
  /// Depth the tree was grown to; generations up to it are complete (or
  /// extinct) unless a weight floor pruned them.
  std::uint32_t depth() const noexcept { return depth_; }
  std::span<const TreeNode> children(std::size_t i) const;
  /// Child indices from the root, each the original 1-based weight index.
  std::vector<std::uint32_t> path(std::size_t i) const;

  /// The subtree rooted at node i with weights re-based to L = 1 at the new
  /// root, i.e. [L(w)]_v = L(vw)/L(v) recomputed from the stored edges.
  WeightedTree shifted(std::size_t i) const;

  /// One JSON object per line: {"path":[...],"depth":n,"L":..,"S":..,"C":..}.
  void write_jsonl(std::ostream& out) const;

 private:
  friend class TreeBuilder;
  std::vector<TreeNode> nodes_;
  std::uint32_t max_depth_ = 0;
  std::uint32_t depth_ = 0;
};

enum class LineKind { generation, first_exit, record };

struct LineSet {
  std::vector<std::size_t> nodes;
  LineKind kind = LineKind::generation;
  double level = 0.0;
};

/// A line together with the lazily grown tree its node indices refer to.
struct TreeLine {
  LineSet line;
  WeightedTree tree;
};

/// Complete tree to `depth` (subject to the weight floor).
WeightedTree grow_tree(const BasicSequenceModel& model, std::uint32_t depth, std::uint64_t seed,
                       const GrowthOptions& options = {});

/// All materialized nodes of generation n. Throws InvalidArgument when n
/// exceeds the tree's depth.
LineSet generation(const WeightedTree& tree, std::uint32_t n);

/// First-exit line of (-inf, u]: nodes with S(v) > u whose strict ancestors
/// all have S <= u. Grows only the ancestors with S <= u.
TreeLine first_exit_line(const BasicSequenceModel& model, double u, std::uint64_t seed,
                         const GrowthOptions& options = {});

/// First strict ladder records of the root, G^>_1.
TreeLine embedded_records(const BasicSequenceModel& model, std::uint64_t seed,
                          const GrowthOptions& options = {});

/// What a streaming traversal reports for each materialized node.
struct NodeVisit {
  std::uint32_t depth;
  double L;
  double C;
  /// Depth is below the target but L fell under the weight floor.
  bool pruned;
};

/// Depth-first traversal of the same tree grow_tree builds, without storing
/// it. Frontier nodes report C = NaN when frontier draws are off. Returns the
/// number of visited nodes.
template <class Visitor>
std::size_t visit_tree(const BasicSequenceModel& model, std::uint32_t depth, std::uint64_t seed,
                       const GrowthOptions& options, Visitor&& visit) {
  struct Pending {
    std::uint64_t seed;
    double L;
    std::uint32_t depth;
  };
  std::vector<Pending> stack;
  stack.push_back({seed, 1.0, 0});
  Realization draw;
  std::size_t visited = 0;
  while (!stack.empty()) {
    const Pending node = stack.back();
    stack.pop_back();
    if (++visited > options.node_budget)
      throw ResourceError("node budget of " + std::to_string(options.node_budget) + " exceeded");
    const bool frontier = node.depth >= depth;
    const bool pruned = !frontier && node.L < options.weight_floor;
    if (frontier && !options.frontier_draws) {
      visit(NodeVisit{node.depth, node.L, std::numeric_limits<double>::quiet_NaN(), false});
      continue;
    }
    CounterRng rng(node.seed);
    model.draw_into(rng, draw);
    visit(NodeVisit{node.depth, node.L, draw.c, pruned});
    if (frontier || pruned) continue;
    SeedSplitter split(node.seed);
    for (std::size_t k = draw.t.size(); k-- > 0;) {
      const double child_l = node.L * draw.t[k];
      if (child_l > 0.0) stack.push_back({split(draw.index[k] - 1), child_l, node.depth + 1});
    }
  }
  return visited;
}

}  // namespace smoothfix
