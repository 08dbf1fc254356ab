// Copyright 2026 The smoothfix Authors.
// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include <cmath>
#include <json.hpp>
#include <numbers>
#include <set>
#include <sstream>

#include "smoothfix/error.hpp"
#include "smoothfix/models.hpp"
#include "smoothfix/stats.hpp"
#include "smoothfix/wbp.hpp"

using namespace smoothfix;

namespace {

double line_sum(const TreeLine& line, double alpha = 1.0) {
  long double s = 0.0L;
  for (auto i : line.line.nodes) s += std::pow(line.tree.node(i).L, alpha);
  return static_cast<double>(s);
}

}  // namespace

TEST_CASE("depth 0 is a single root") {
  const auto tree = grow_tree(builtin_model("quicksort"), 0, 1);
  REQUIRE(tree.size() == 1);
  CHECK(tree.node(0).L == 1.0);
  CHECK(tree.node(0).S == 0.0);
  CHECK(generation(tree, 0).nodes.size() == 1);
  CHECK_THROWS_AS(generation(tree, 1), InvalidArgument);
}

TEST_CASE("quicksort generations conserve weight") {
  const auto model = builtin_model("quicksort");
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const auto tree = grow_tree(model, 12, seed);
    for (std::uint32_t n = 0; n <= 12; ++n) {
      long double s = 0.0L;
      for (auto i : generation(tree, n).nodes) s += tree.node(i).L;
      REQUIRE(std::abs(static_cast<double>(s) - 1.0) <= 1e-9);
    }
  }
  CHECK(generation(grow_tree(model, 3, 5), 3).nodes.size() == 8);
}

TEST_CASE("edges, positions and paths are consistent") {
  const auto model = builtin_model("gaussian-steps-pair", {{"m0", 0.5}});
  const auto tree = grow_tree(model, 9, 77);
  for (std::size_t i = 0; i < tree.size(); ++i) {
    const auto& n = tree.node(i);
    CHECK(n.L > 0.0);
    CHECK(std::abs(n.S + std::log(n.L)) <= 1e-12 * std::max(1.0, std::abs(n.S)));
    // Recompute L from the stored realization of every ancestor.
    double l = 1.0;
    std::size_t cur = 0;
    for (auto j : tree.path(i)) {
      const auto r = model.draw(tree.node(cur).seed);
      std::size_t k = 0;
      while (r.index[k] != j) ++k;
      l *= r.t[k];
      bool found = false;
      for (const auto& c : tree.children(cur)) {
        if (c.child_index == j) {
          cur = static_cast<std::size_t>(&c - tree.nodes().data());
          found = true;
          break;
        }
      }
      REQUIRE(found);
    }
    CHECK(cur == i);
    CHECK(std::abs(l - n.L) <= 1e-12 * n.L);
    if (n.parent >= 0) CHECK(n.L == tree.node(static_cast<std::size_t>(n.parent)).L * n.edge_weight);
  }
}

TEST_CASE("trees are bit-identical per seed and subtrees depend only on their path") {
  const auto model = builtin_model("iid-uniform-pair");
  const auto a = grow_tree(model, 8, 9), b = grow_tree(model, 8, 9);
  REQUIRE(a.size() == b.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK(a.node(i).L == b.node(i).L);
    CHECK(a.node(i).C == b.node(i).C);
  }
  // The first child's subtree equals a fresh tree grown from its seed.
  const auto child = static_cast<std::size_t>(a.node(0).first_child);
  const auto sub = a.shifted(child);
  const auto fresh = grow_tree(model, 7, a.node(child).seed);
  REQUIRE(sub.size() == fresh.size());
  for (std::size_t i = 0; i < sub.size(); ++i) CHECK(sub.node(i).L == doctest::Approx(fresh.node(i).L).epsilon(1e-13));
}

TEST_CASE("node budget raises a resource error") {
  GrowthOptions opts;
  opts.node_budget = 100;
  CHECK_THROWS_AS(grow_tree(builtin_model("quicksort"), 10, 1, opts), ResourceError);
  CHECK_THROWS_AS(first_exit_line(builtin_model("quicksort"), 8.0, 1, opts), ResourceError);
}

TEST_CASE("extinction can empty a generation") {
  const auto model = builtin_model("iid-uniform-pair", {{"extinction", 0.9}});
  bool saw_empty = false;
  for (std::uint64_t s = 0; s < 50 && !saw_empty; ++s) saw_empty = generation(grow_tree(model, 3, s), 3).nodes.empty();
  CHECK(saw_empty);
}

TEST_CASE("first-exit lines") {
  const auto quick = builtin_model("quicksort");
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const auto zero = first_exit_line(quick, 0.0, seed);
    REQUIRE(zero.line.nodes.size() == 2);
    for (auto i : zero.line.nodes) CHECK(zero.tree.node(i).depth == 1);
    for (double u : {0.5, 1.0, 3.0, 6.0}) {
      const auto line = first_exit_line(quick, u, seed);
      CHECK(std::abs(line_sum(line) - 1.0) <= 1e-9);
      for (auto i : line.line.nodes) {
        const auto& n = line.tree.node(i);
        CHECK(n.S > u);
        for (auto p = n.parent; p >= 0; p = line.tree.node(static_cast<std::size_t>(p)).parent)
          CHECK(line.tree.node(static_cast<std::size_t>(p)).S <= u);
      }
    }
  }
  CHECK_THROWS_AS(first_exit_line(quick, -1.0, 1), InvalidArgument);
}

TEST_CASE("exit lines are nested: each node of T_u2 has exactly one ancestor in T_u1") {
  const auto model = builtin_model("iid-uniform-pair");
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const auto outer = first_exit_line(model, 2.5, seed);
    const auto inner = first_exit_line(model, 1.0, seed);
    // Identify nodes across the two lazily grown trees by their paths.
    std::set<std::vector<std::uint32_t>> inner_paths;
    for (auto i : inner.line.nodes) inner_paths.insert(inner.tree.path(i));
    for (auto i : outer.line.nodes) {
      const auto path = outer.tree.path(i);
      int hits = 0;
      for (std::size_t k = 0; k <= path.size(); ++k)
        hits += inner_paths.count(std::vector<std::uint32_t>(path.begin(), path.begin() + static_cast<long>(k)));
      CHECK(hits == 1);
    }
  }
}

TEST_CASE("optional stopping on an exit line: iid-uniform-pair, u = 2") {
  const auto model = builtin_model("iid-uniform-pair");
  MeanAccumulator acc;
  for (std::uint64_t s = 0; s < 10000; ++s) acc.add(line_sum(first_exit_line(model, 2.0, s)));
  CHECK(std::abs(acc.mean() - 1.0) <= 4 * acc.se());
}

TEST_CASE("embedded records") {
  const auto quick = builtin_model("quicksort");
  const auto rec = embedded_records(quick, 3);
  CHECK(rec.line.kind == LineKind::record);
  REQUIRE(rec.line.nodes.size() == 2);
  for (auto i : rec.line.nodes) CHECK(rec.tree.node(i).depth == 1);

  const auto gauss = builtin_model("gaussian-steps-pair", {{"m0", 1.5}});
  for (std::uint64_t s = 0; s < 200; ++s) {
    const auto r = embedded_records(gauss, s);
    for (auto i : r.line.nodes) CHECK(r.tree.node(i).S > 0.0);
  }

  const auto dead = builtin_model("iid-uniform-pair", {{"extinction", 0.999}});
  bool saw_empty = false;
  for (std::uint64_t s = 0; s < 20 && !saw_empty; ++s) saw_empty = embedded_records(dead, s).line.nodes.empty();
  CHECK(saw_empty);
}

TEST_CASE("streaming traversal visits the same tree") {
  const auto model = builtin_model("quicksort");
  const auto tree = grow_tree(model, 7, 42);
  std::multiset<double> stored, streamed;
  for (const auto& n : tree.nodes()) stored.insert(n.L * 1000 + n.C);
  const auto visited = visit_tree(model, 7, 42, GrowthOptions{}, [&](const NodeVisit& v) { streamed.insert(v.L * 1000 + v.C); });
  CHECK(visited == tree.size());
  CHECK(stored == streamed);
}

TEST_CASE("weight floor prunes expansion but keeps the node") {
  GrowthOptions opts;
  opts.weight_floor = 0.05;
  const auto tree = grow_tree(builtin_model("quicksort"), 30, 8, opts);
  for (const auto& n : tree.nodes()) {
    if (n.L < 0.05) CHECK_FALSE(n.expanded);
    if (n.parent >= 0) CHECK(tree.node(static_cast<std::size_t>(n.parent)).L >= 0.05);
  }
}

TEST_CASE("jsonl dump has one parsable object per node") {
  const auto tree = grow_tree(builtin_model("quicksort"), 3, 1);
  std::ostringstream out;
  tree.write_jsonl(out);
  std::istringstream in(out.str());
  std::string line;
  std::size_t count = 0;
  while (std::getline(in, line)) {
    const auto j = nlohmann::json::parse(line);
    CHECK(j.contains("path"));
    CHECK(j.contains("depth"));
    CHECK(j.contains("L"));
    CHECK(j.contains("S"));
    CHECK(j.contains("C"));
    ++count;
  }
  CHECK(count == tree.size());
}
