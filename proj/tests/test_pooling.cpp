#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>

#include "rex/pooling.hpp"
#include "support/oracles.hpp"

using namespace rex;
using rex::testsupport::naive_pool;
using rex::testsupport::random_tree;

namespace {

EntityMention span(std::size_t s, std::size_t e) { return {s, e, "t"}; }

std::vector<std::size_t> indices_of(const PoolingPlan& plan,
                                    const std::string& name) {
  for (const auto& s : plan.sets)
    if (s.name == name) return s.indices;
  FAIL("no set named " << name);
  return {};
}

}  // namespace

TEST_CASE("ENT-DYM segments with a boundary mention") {
  auto plan = make_plan(PoolingStrategy::EntDym, 5, span(1, 1), span(4, 4),
                        nullptr);
  REQUIRE(plan.sets.size() == 5);
  CHECK(plan.sets[0].name == "LEFT");
  CHECK(plan.sets[0].indices.empty());
  CHECK(indices_of(plan, "MIDDLE") == std::vector<std::size_t>{1, 2, 3, 4});
  CHECK(indices_of(plan, "RIGHT") == std::vector<std::size_t>{5});
  CHECK(indices_of(plan, "M1") == std::vector<std::size_t>{1});
  CHECK(indices_of(plan, "M2") == std::vector<std::size_t>{4});
}

TEST_CASE("ENT-SENT always carries the whole sentence as its last set") {
  auto plan = make_plan(PoolingStrategy::EntSent, 7, span(2, 3), span(5, 5),
                        nullptr);
  REQUIRE(plan.sets.size() == 3);
  CHECK(plan.sets.back().indices ==
        std::vector<std::size_t>{1, 2, 3, 4, 5, 6, 7});
}

TEST_CASE("ENT-DEP1 plan from the worked tree") {
  PathSets ps;
  ps.sdp0 = {1, 3, 4, 5};
  ps.sdp1 = {1, 2, 3, 4, 5};
  auto plan =
      make_plan(PoolingStrategy::EntDep1, 5, span(1, 1), span(4, 4), &ps);
  REQUIRE(plan.sets.size() == 3);
  CHECK(plan.sets[0].indices == std::vector<std::size_t>{1, 2, 3, 4, 5});
  CHECK(plan.sets[1].indices == std::vector<std::size_t>{1});
  CHECK(plan.sets[2].indices == std::vector<std::size_t>{4});
}

TEST_CASE("DEP strategies require path sets") {
  CHECK_THROWS_AS(
      make_plan(PoolingStrategy::EntDep0, 5, span(1, 1), span(4, 4), nullptr),
      std::invalid_argument);
}

TEST_CASE("singleton pool is the identity row") {
  Tensor A(3, 2, {1, 2, 3, 4, 5, 6});
  PoolingPlan plan{PoolingStrategy::EntOnly, {{"S", {2}}}};
  Tensor F = pool(A, plan);
  CHECK(F.data() == std::vector<double>{3, 4});
}

TEST_CASE("elementwise max by hand") {
  Tensor A(3, 2, {1, 5, 0, 0, 2, 0});
  PoolingPlan plan{PoolingStrategy::EntOnly, {{"S", {1, 3}}}};
  CHECK(pool(A, plan).data() == std::vector<double>{2, 5});
}

TEST_CASE("ENT-ONLY output is the two span maxima concatenated") {
  Rng rng(12);
  Tensor A(6, 3, 0.0);
  for (std::size_t i = 0; i < A.numel(); ++i) A[i] = rng.uniform(-2, 2);
  auto plan = make_plan(PoolingStrategy::EntOnly, 6, span(2, 3), span(5, 6),
                        nullptr);
  Tensor F = pool(A, plan);
  REQUIRE(F.cols() == 6);
  for (std::size_t c = 0; c < 3; ++c) {
    CHECK(F.at(0, c) == std::max(A.at(1, c), A.at(2, c)));
    CHECK(F.at(0, 3 + c) == std::max(A.at(4, c), A.at(5, c)));
  }
}

TEST_CASE("permutation invariance within a set") {
  Rng rng(9);
  Tensor A(5, 4, 0.0);
  for (std::size_t i = 0; i < A.numel(); ++i) A[i] = rng.uniform(-1, 1);
  PoolingPlan p1{PoolingStrategy::EntOnly, {{"S", {1, 3, 5}}}};
  PoolingPlan p2{PoolingStrategy::EntOnly, {{"S", {5, 1, 3}}}};
  CHECK(pool(A, p1).data() == pool(A, p2).data());
}

TEST_CASE("adding an index never decreases any coordinate") {
  Rng rng(14);
  for (int trial = 0; trial < 50; ++trial) {
    Tensor A(6, 3, 0.0);
    for (std::size_t i = 0; i < A.numel(); ++i) A[i] = rng.uniform(-1, 1);
    PoolingPlan small{PoolingStrategy::EntOnly, {{"S", {2, 4}}}};
    PoolingPlan big{PoolingStrategy::EntOnly, {{"S", {2, 4, 6}}}};
    Tensor fs = pool(A, small), fb = pool(A, big);
    for (std::size_t c = 0; c < 3; ++c) CHECK(fb.at(0, c) >= fs.at(0, c));
  }
}

TEST_CASE("all five strategies match the naive double-loop oracle") {
  Rng rng(2024);
  for (int trial = 0; trial < 500; ++trial) {
    std::size_t n = 3 + rng.index(8);  // up to 10
    std::size_t d = 1 + rng.index(4);
    Tensor A(n, d, 0.0);
    for (std::size_t i = 0; i < A.numel(); ++i) A[i] = rng.uniform(-3, 3);
    // random valid spans: s1<=e1<s2<=e2<=n
    std::size_t s1 = 1 + rng.index(n - 1);
    std::size_t e1 = s1 + rng.index(n - s1);  // < n allowed check below
    if (e1 >= n) e1 = n - 1;
    std::size_t s2 = e1 + 1 + rng.index(n - e1);
    std::size_t e2 = s2 + rng.index(n - s2 + 1);
    DependencyTree tree = random_tree(n, rng);
    PathSets ps = path_sets(tree, span(s1, e1), span(s2, e2));

    for (PoolingStrategy strategy : all_pooling_strategies()) {
      auto plan = make_plan(strategy, n, span(s1, e1), span(s2, e2), &ps);
      std::vector<std::vector<std::size_t>> sets;
      for (const auto& s : plan.sets) sets.push_back(s.indices);
      CHECK(pool(A, plan).data() == naive_pool(A, sets));
      CHECK(plan.sets.size() == plan_set_count(strategy));
    }

    // containment chain on the pooled context sets
    auto pool_set = [&](const std::set<std::size_t>& s) {
      PoolingPlan p{PoolingStrategy::EntOnly,
                    {{"S", {s.begin(), s.end()}}}};
      return pool(A, p);
    };
    std::set<std::size_t> sent;
    for (std::size_t i = 1; i <= n; ++i) sent.insert(i);
    Tensor f0 = pool_set(ps.sdp0), f1 = pool_set(ps.sdp1),
           fs = pool_set(sent);
    for (std::size_t c = 0; c < d; ++c) {
      CHECK(f0.at(0, c) <= f1.at(0, c));
      CHECK(f1.at(0, c) <= fs.at(0, c));
    }
  }
}

TEST_CASE("tape pooling agrees with the plain path and routes gradients") {
  Rng rng(31);
  Tensor A(4, 2, 0.0);
  for (std::size_t i = 0; i < A.numel(); ++i) A[i] = rng.uniform(-1, 1);
  auto plan =
      make_plan(PoolingStrategy::EntDym, 4, span(1, 1), span(3, 3), nullptr);
  Tape t;
  Var a = t.input(A);
  Var f = pool(t, a, plan);
  CHECK(t.value(f).data() == pool(A, plan).data());
  Tensor ones(t.value(f).cols(), 1, 1.0);
  t.backward(t.matmul(f, t.constant(ones)));
  // every gradient entry is a count of sets where that cell is the argmax
  double total = 0.0;
  for (double g : t.grad(a).data()) total += g;
  // empty LEFT set contributes nothing; 4 non-empty sets x 2 columns
  CHECK(total == 8.0);
}
