// Copyright 2026 The smoothfix Authors.
// SPDX-License-Identifier: Apache-2.0

#include "smoothfix/wbp.hpp"

#include <algorithm>
#include <deque>
#include <json.hpp>
#include <ostream>

namespace smoothfix {

class TreeBuilder {
 public:
  TreeBuilder(const BasicSequenceModel& model, const GrowthOptions& options)
      : model_(model), options_(options) {}

  std::size_t add_root(std::uint64_t seed) {
    TreeNode root;
    root.seed = seed;
    return push(root);
  }

  /// Draw (C, T) for node i; C is stored, T is returned for expansion.
  const Realization& draw(std::size_t i) {
    CounterRng rng(tree_.nodes_[i].seed);
    model_.draw_into(rng, scratch_);
    tree_.nodes_[i].C = scratch_.c;
    return scratch_;
  }

  /// Materialize the children of node i from its realization.
  void expand(std::size_t i, const Realization& r) {
    SeedSplitter split(tree_.nodes_[i].seed);
    const double parent_l = tree_.nodes_[i].L;
    const auto depth = tree_.nodes_[i].depth + 1;
    const auto first = static_cast<std::int64_t>(tree_.nodes_.size());
    std::uint32_t count = 0;
    for (std::size_t k = 0; k < r.t.size(); ++k) {
      const double l = parent_l * r.t[k];
      if (!(l > 0.0)) continue;
      TreeNode child;
      child.parent = static_cast<std::int64_t>(i);
      child.child_index = r.index[k];
      child.depth = depth;
      child.edge_weight = r.t[k];
      child.L = l;
      child.S = -std::log(l);
      child.seed = split(r.index[k] - 1);
      push(child);
      ++count;
    }
    auto& node = tree_.nodes_[i];
    node.expanded = true;
    node.child_count = count;
    node.first_child = count > 0 ? first : -1;
  }

  TreeNode& at(std::size_t i) { return tree_.nodes_[i]; }
  std::size_t size() const { return tree_.nodes_.size(); }
  std::uint32_t max_depth() const { return tree_.max_depth_; }
  WeightedTree finish(std::uint32_t depth) {
    tree_.depth_ = depth;
    return std::move(tree_);
  }

 private:
  std::size_t push(const TreeNode& node) {
    if (tree_.nodes_.size() >= options_.node_budget)
      throw ResourceError("node budget of " + std::to_string(options_.node_budget) + " exceeded");
    tree_.nodes_.push_back(node);
    tree_.max_depth_ = std::max(tree_.max_depth_, node.depth);
    return tree_.nodes_.size() - 1;
  }

  const BasicSequenceModel& model_;
  const GrowthOptions& options_;
  WeightedTree tree_;
  Realization scratch_;
};

std::span<const TreeNode> WeightedTree::children(std::size_t i) const {
  const auto& n = nodes_.at(i);
  if (n.child_count == 0) return {};
  return std::span<const TreeNode>(nodes_).subspan(static_cast<std::size_t>(n.first_child), n.child_count);
}

std::vector<std::uint32_t> WeightedTree::path(std::size_t i) const {
  std::vector<std::uint32_t> out;
  for (auto cur = static_cast<std::int64_t>(i); nodes_.at(static_cast<std::size_t>(cur)).parent >= 0;
       cur = nodes_[static_cast<std::size_t>(cur)].parent)
    out.push_back(nodes_[static_cast<std::size_t>(cur)].child_index);
  std::reverse(out.begin(), out.end());
  return out;
}

WeightedTree WeightedTree::shifted(std::size_t i) const {
  WeightedTree out;
  const auto& top = nodes_.at(i);
  // Breadth-first copy keeps children contiguous in the new node array.
  std::deque<std::pair<std::size_t, std::int64_t>> queue{{i, -1}};
  while (!queue.empty()) {
    const auto [src, new_parent] = queue.front();
    queue.pop_front();
    TreeNode copy = nodes_[src];
    copy.parent = new_parent;
    copy.depth -= top.depth;
    if (new_parent < 0) {
      copy.child_index = 0;
      copy.edge_weight = 1.0;
      copy.L = 1.0;
    } else {
      copy.L = out.nodes_[static_cast<std::size_t>(new_parent)].L * copy.edge_weight;
    }
    copy.S = -std::log(copy.L);
    const auto self = static_cast<std::int64_t>(out.nodes_.size());
    copy.first_child = -1;
    if (new_parent >= 0) {
      auto& parent = out.nodes_[static_cast<std::size_t>(new_parent)];
      if (parent.first_child < 0) parent.first_child = self;
    }
    out.max_depth_ = std::max(out.max_depth_, copy.depth);
    out.nodes_.push_back(copy);
    for (const auto& child : children(src))
      queue.emplace_back(static_cast<std::size_t>(&child - nodes_.data()), self);
  }
  out.depth_ = top.depth <= depth_ ? depth_ - top.depth : 0;
  return out;
}

void WeightedTree::write_jsonl(std::ostream& out) const {
  for (std::size_t i = 0; i < nodes_.size(); ++i) {
    const auto& n = nodes_[i];
    nlohmann::ordered_json line;
    line["path"] = path(i);
    line["depth"] = n.depth;
    line["L"] = n.L;
    line["S"] = n.S;
    line["C"] = n.C;
    out << line.dump() << '\n';
  }
}

WeightedTree grow_tree(const BasicSequenceModel& model, std::uint32_t depth, std::uint64_t seed,
                       const GrowthOptions& options) {
  TreeBuilder builder(model, options);
  builder.add_root(seed);
  // Nodes are appended in breadth-first order, so a single sweep suffices.
  for (std::size_t i = 0; i < builder.size(); ++i) {
    const bool frontier = builder.at(i).depth >= depth;
    if (frontier && !options.frontier_draws) {
      builder.at(i).C = std::numeric_limits<double>::quiet_NaN();
      continue;
    }
    const Realization& r = builder.draw(i);
    if (frontier || builder.at(i).L < options.weight_floor) continue;
    builder.expand(i, r);
  }
  return builder.finish(depth);
}

LineSet generation(const WeightedTree& tree, std::uint32_t n) {
  if (n > tree.depth())
    throw InvalidArgument("generation " + std::to_string(n) + " lies beyond the grown depth " +
                          std::to_string(tree.depth()));
  LineSet line;
  line.kind = LineKind::generation;
  line.level = n;
  const auto nodes = tree.nodes();
  for (std::size_t i = 0; i < nodes.size(); ++i)
    if (nodes[i].depth == n) line.nodes.push_back(i);
  return line;
}

namespace {

TreeLine grow_exit_line(const BasicSequenceModel& model, double u, std::uint64_t seed,
                        const GrowthOptions& options, LineKind kind) {
  if (!(u >= 0.0) || !std::isfinite(u)) throw InvalidArgument("exit level u must be finite and >= 0");
  TreeBuilder builder(model, options);
  builder.add_root(seed);
  std::vector<std::size_t> crossing;
  for (std::size_t i = 0; i < builder.size(); ++i) {
    const Realization& r = builder.draw(i);
    if (builder.at(i).S > u) {
      crossing.push_back(i);
      continue;
    }
    builder.expand(i, r);
  }
  TreeLine out;
  out.line.nodes = std::move(crossing);
  out.line.kind = kind;
  out.line.level = u;
  out.tree = builder.finish(builder.max_depth());
  return out;
}

}  // namespace

TreeLine first_exit_line(const BasicSequenceModel& model, double u, std::uint64_t seed,
                         const GrowthOptions& options) {
  return grow_exit_line(model, u, seed, options, LineKind::first_exit);
}

TreeLine embedded_records(const BasicSequenceModel& model, std::uint64_t seed, const GrowthOptions& options) {
  // The root sits at S = 0, so its first strict records are exactly the
  // first exits from (-inf, 0].
  return grow_exit_line(model, 0.0, seed, options, LineKind::record);
}

}  // namespace smoothfix
