#include <doctest.h>

#include <algorithm>
#include <limits>

#include "mimosd/errors.hpp"
#include "mimosd/kbest.hpp"
#include "mimosd/search.hpp"
#include "support.hpp"

using namespace mimosd;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

std::uint64_t closed_form_visited(int m, std::uint64_t omega, std::uint64_t k) {
  std::uint64_t v = 1, width = 1;
  for (int l = 1; l <= m - 1; ++l) {
    width = std::min(width * omega, k + 1);  // saturates once above k
    v += std::min(width, k);
  }
  return v;
}

// Greedy antenna-by-antenna decisions, which is what K = 1 must reproduce.
SymbolVector successive_cancellation(const PreprocessedProblem& p) {
  const int m = p.n_tx;
  SymbolVector s(static_cast<std::size_t>(m));
  for (int a = m - 1; a >= 0; --a) {
    cd target = p.y_bar(a);
    for (int i = a + 1; i < m; ++i) target -= p.R(a, i) * p.constellation.points[s[i]];
    double best = kInf;
    for (std::size_t w = 0; w < p.omega(); ++w) {
      const double d = std::norm(target - p.R(a, a) * p.constellation.points[w]);
      if (d < best) {
        best = d;
        s[static_cast<std::size_t>(a)] = static_cast<Symbol>(w);
      }
    }
  }
  return s;
}

}  // namespace

TEST_CASE("k-best work follows the closed form regardless of the instance") {
  struct Case {
    int m;
    Modulation mod;
    int k;
  };
  for (const Case c : {Case{4, Modulation::QPSK, 3}, Case{6, Modulation::BPSK, 5},
                       Case{5, Modulation::QAM16, 10}, Case{3, Modulation::QAM64, 100}}) {
    const auto omega = make_constellation(c.mod).size();
    const auto visited = closed_form_visited(c.m, omega, static_cast<std::uint64_t>(c.k));
    for (int seed = 0; seed < 5; ++seed) {
      const auto p = test_support::problem(c.m, c.mod, 4.0 * seed, 60 + seed);
      const auto rep = kbest_decode(p, c.k);
      CHECK(rep.visited_nodes == visited);
      CHECK(rep.pd_calcs == omega * visited);
      CHECK(rep.visited_nodes <= 1 + static_cast<std::uint64_t>(c.m - 1) * c.k);
      CHECK(!rep.erased());
      CHECK(rep.nodes.balanced());
    }
  }
}

TEST_CASE("k-best ignores the radius") {
  const auto inst = test_support::instance(4, 4, Modulation::QPSK, 0.0, 8);
  const auto a = kbest_decode(preprocess(inst, RadiusPolicy::explicit_sq(1e-6)), 4);
  const auto b = kbest_decode(preprocess(inst, RadiusPolicy::infinite()), 4);
  CHECK(a.decoded == b.decoded);
  CHECK(!a.erased());
}

TEST_CASE("k-best with one survivor is successive cancellation") {
  for (int seed = 0; seed < 30; ++seed) {
    const auto p = test_support::problem(6, Modulation::QAM16, 2.0 * (seed % 10), 120 + seed);
    CHECK(kbest_decode(p, 1).decoded == successive_cancellation(p));
  }
}

TEST_CASE("k-best keeping every node is exhaustive") {
  for (int seed = 0; seed < 10; ++seed) {
    const auto p = test_support::problem(3, Modulation::QAM16, 5.0, 140 + seed);
    const auto ml = ml_bruteforce(p);
    const auto kb = kbest_decode(p, 256);
    CHECK(kb.dist == doctest::Approx(ml.dist).epsilon(1e-12));
  }
}

TEST_CASE("k-best on the two-antenna tree") {
  const auto p = test_support::tiny_problem(kInf);
  const auto one = kbest_decode(p, 1);
  CHECK(one.decoded == SymbolVector{1, 1});
  CHECK(one.dist == 2.3125);
  CHECK(one.visited_nodes == 2);
  CHECK(one.nodes.cut == 1);
}

TEST_CASE("hybrid with unbounded survivors is maximum likelihood") {
  for (int seed = 0; seed < 10; ++seed) {
    const auto p = test_support::problem(4, Modulation::QPSK, 3.0 * seed, 160 + seed);
    const auto ml = ml_bruteforce(p);
    for (int workers : {1, 4}) {
      const auto rep = sd_kbest_decode(p, KbestConfig{256, 0.05, workers});
      CHECK(rep.dist == doctest::Approx(ml.dist).epsilon(1e-12));
      CHECK(rep.nodes.balanced());
      CHECK(rep.per_thread.size() == static_cast<std::size_t>(workers) + 1);
    }
  }
}

TEST_CASE("hybrid never reports a leaf outside the initial sphere") {
  for (int seed = 0; seed < 20; ++seed) {
    const auto p = test_support::problem(8, Modulation::QAM16, 12.0, 180 + seed,
                                         RadiusPolicy::formula());
    const auto rep = sd_kbest_decode(p, KbestConfig{2, 0.05, 3});
    if (!rep.erased()) {
      CHECK(rep.dist < p.radius_sq);
      CHECK(p.metric(rep.decoded) == doctest::Approx(rep.dist).epsilon(1e-12));
    }
    CHECK(rep.nodes.balanced());
  }
  CHECK(sd_kbest_decode(test_support::tiny_problem(1.0), KbestConfig{2, 0.0, 2}).erased());
}

TEST_CASE("hybrid closeness margin keeps at most K near-ties") {
  // eps = 0 keeps exactly K; an unbounded margin keeps K more, never further
  for (int seed = 0; seed < 10; ++seed) {
    const auto p = test_support::problem(6, Modulation::QPSK, 6.0, 7 + seed);
    const auto tight = sd_kbest_decode(p, KbestConfig{1, 0.0, 1});
    const auto loose = sd_kbest_decode(p, KbestConfig{1, 1e9, 1});
    const auto doubled = sd_kbest_decode(p, KbestConfig{2, 0.0, 1});
    CHECK(loose.pd_calcs >= tight.pd_calcs);
    CHECK(loose.dist == doubled.dist);
    CHECK(loose.visited_nodes == doubled.visited_nodes);
    CHECK(loose.pd_calcs == doubled.pd_calcs);
  }
}

TEST_CASE("k-best configuration errors") {
  const auto p = test_support::tiny_problem(kInf);
  CHECK_THROWS_AS(kbest_decode(p, 0), ConfigError);
  CHECK_THROWS_AS(sd_kbest_decode(p, KbestConfig{0, 0.05, 1}), ConfigError);
  CHECK_THROWS_AS(sd_kbest_decode(p, KbestConfig{1, 0.05, 0}), ConfigError);
  CHECK_THROWS_AS(sd_kbest_decode(p, KbestConfig{1, -0.1, 1}), ConfigError);
}
