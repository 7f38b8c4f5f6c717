#include <doctest.h>

#include <cmath>
#include <limits>

#include "mimosd/errors.hpp"
#include "mimosd/oracle.hpp"
#include "mimosd/search.hpp"
#include "support.hpp"

using namespace mimosd;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Node with the given suffix, its cache filled straight from the definition.
SearchNode direct_node(const PreprocessedProblem& p, const SymbolVector& suffix) {
  const int m = p.n_tx;
  const int level = static_cast<int>(suffix.size());
  SearchNode n;
  n.suffix = suffix;
  n.pd = scratch_pd(suffix, p.R, p.y_bar, p.constellation);
  n.partial.assign(static_cast<std::size_t>(m - level), cd{});
  for (int row = 0; row < m - level; ++row)
    for (int k = 0; k < level; ++k)
      n.partial[row] += p.R(row, m - 1 - k) * p.constellation.points[suffix[k]];
  return n;
}

SymbolVector random_suffix(Rng& rng, int len, std::size_t omega) {
  std::uniform_int_distribution<int> pick(0, static_cast<int>(omega) - 1);
  SymbolVector s(static_cast<std::size_t>(len));
  for (auto& x : s) x = static_cast<Symbol>(pick(rng));
  return s;
}

}  // namespace

TEST_CASE("scratch partial distances of the two-antenna tree") {
  const auto p = test_support::tiny_problem(kInf);
  CHECK(scratch_pd(SymbolVector{}, p.R, p.y_bar, p.constellation) == 0.0);
  CHECK(scratch_pd(SymbolVector{0}, p.R, p.y_bar, p.constellation) == 3.0625);
  CHECK(scratch_pd(SymbolVector{1}, p.R, p.y_bar, p.constellation) == 0.0625);
  CHECK(scratch_pd(SymbolVector{1, 0}, p.R, p.y_bar, p.constellation) == 6.3125);
  CHECK(scratch_pd(SymbolVector{1, 1}, p.R, p.y_bar, p.constellation) == 2.3125);
  CHECK(scratch_pd(SymbolVector{0, 0}, p.R, p.y_bar, p.constellation) == 23.3125);
  CHECK(scratch_pd(SymbolVector{0, 1}, p.R, p.y_bar, p.constellation) == 3.3125);
  CHECK_THROWS_AS(scratch_pd(SymbolVector{0, 0, 0}, p.R, p.y_bar, p.constellation), ShapeError);
}

TEST_CASE("a full-depth scratch distance is the triangular metric") {
  const auto p = test_support::problem(5, Modulation::QAM16, 8.0, 31);
  Rng rng(2);
  for (int t = 0; t < 20; ++t) {
    const SymbolVector suffix = random_suffix(rng, 5, 16);
    SymbolVector s(5);
    for (int k = 0; k < 5; ++k) s[4 - k] = suffix[k];
    CHECK(scratch_pd(suffix, p.R, p.y_bar, p.constellation) ==
          doctest::Approx(p.metric(s)).epsilon(1e-12));
  }
}

TEST_CASE("incremental evaluation matches the scratch distance at every depth") {
  const auto p = test_support::problem(8, Modulation::QAM16, 10.0, 12);
  Rng rng(3);
  for (int level = 0; level < 8; ++level) {
    for (int jp = 1; jp <= std::min(3, 8 - level); ++jp) {
      const SymbolVector suffix = random_suffix(rng, level, 16);
      const SymbolVector ext = random_suffix(rng, jp, 16);
      const SearchNode parent = direct_node(p, suffix);
      const Increment inc = evaluate_incremental(parent, ext, p);
      SymbolVector full = suffix;
      full.insert(full.end(), ext.begin(), ext.end());
      const SearchNode expect = direct_node(p, full);
      CHECK(inc.pd == doctest::Approx(expect.pd).epsilon(1e-12));
      REQUIRE(inc.partial.size() == expect.partial.size());
      for (std::size_t r = 0; r < inc.partial.size(); ++r)
        CHECK(std::abs(inc.partial[r] - expect.partial[r]) < 1e-12);
    }
  }
}

TEST_CASE("incremental evaluation rejects bad extensions") {
  const auto p = test_support::problem(3, Modulation::QPSK, 10.0, 1);
  const SearchNode root = root_node(p);
  CHECK_THROWS_AS(evaluate_incremental(root, SymbolVector{}, p), ShapeError);
  CHECK_THROWS_AS(evaluate_incremental(root, SymbolVector{0, 0, 0, 0}, p), ShapeError);
  SearchNode broken = root;
  broken.partial.pop_back();
  CHECK_THROWS_AS(evaluate_incremental(broken, SymbolVector{0}, p), ShapeError);
}

TEST_CASE("branch yields every child in lexicographic order") {
  const auto p = test_support::problem(5, Modulation::QPSK, 6.0, 44);
  const SearchNode parent = direct_node(p, SymbolVector{2, 1});
  const auto kids = branch(parent, p, 2);
  REQUIRE(kids.size() == 16);
  for (std::size_t t = 0; t < kids.size(); ++t) {
    const SymbolVector want{2, 1, static_cast<Symbol>(t / 4), static_cast<Symbol>(t % 4)};
    CHECK(kids[t].suffix == want);
    const SearchNode expect = direct_node(p, want);
    CHECK(kids[t].pd == doctest::Approx(expect.pd).epsilon(1e-12));
    CHECK(kids[t].pd >= parent.pd);
  }
  // the group shrinks to the remaining depth near the leaves
  const auto tail = branch(direct_node(p, SymbolVector{0, 0, 0, 3}), p, 3);
  CHECK(tail.size() == 4);
  CHECK(tail[3].level() == 5);
  CHECK_THROWS_AS(branch(parent, p, 0), ConfigError);
}

TEST_CASE("work pools follow their removal discipline") {
  auto mk = [](double pd, Symbol tag) {
    SearchNode n;
    n.pd = pd;
    n.suffix = {tag};
    n.partial = {cd{}};
    return n;
  };
  const std::vector<SearchNode> batch{mk(3, 0), mk(1, 1), mk(2, 2), mk(1, 3)};
  WorkPool bfs(Strategy::BFS, 2), dfs(Strategy::DFS, 2), best(Strategy::BestFS, 2);
  bfs.insert_batch(batch);
  dfs.insert_batch(batch);
  best.insert_batch(batch);
  std::vector<int> got_bfs, got_dfs, got_best;
  while (!bfs.empty()) got_bfs.push_back(bfs.take().suffix[0]);
  while (!dfs.empty()) got_dfs.push_back(dfs.take().suffix[0]);
  while (!best.empty()) got_best.push_back(best.take().suffix[0]);
  CHECK(got_bfs == std::vector<int>{0, 1, 2, 3});
  CHECK(got_dfs == std::vector<int>{3, 2, 1, 0});
  CHECK(got_best == std::vector<int>{1, 3, 2, 0});
}

TEST_CASE("strategy names") {
  for (auto s : {Strategy::BFS, Strategy::DFS, Strategy::BestFS}) CHECK(parse_strategy(to_string(s)) == s);
  CHECK_THROWS_AS(parse_strategy("astar"), ConfigError);
}

TEST_CASE("hand-traced searches of the two-antenna tree") {
  const auto p = test_support::tiny_problem(kInf);

  const auto best = sd_decode(p, Strategy::BestFS);
  CHECK(best.decoded == SymbolVector{1, 1});
  CHECK(best.dist == 2.3125);
  CHECK(best.visited_nodes == 2);
  CHECK(best.pd_calcs == 4);
  CHECK(best.nodes.pruned == 1);
  CHECK(best.nodes.leaves == 2);
  CHECK(best.final_radius_sq == 2.3125);

  const auto dfs = sd_decode(p, Strategy::DFS);
  CHECK(dfs.decoded == SymbolVector{1, 1});
  CHECK(dfs.visited_nodes == 2);

  // FIFO opens the worse level-1 node first and finds two leaves under it
  const auto bfs = sd_decode(p, Strategy::BFS);
  CHECK(bfs.decoded == SymbolVector{1, 1});
  CHECK(bfs.visited_nodes == 3);
  CHECK(bfs.pd_calcs == 6);
  CHECK(bfs.nodes.leaves == 3);
  CHECK(bfs.nodes.pruned == 1);

  const auto grouped = sd_decode(p, Strategy::BestFS, 2);
  CHECK(grouped.decoded == SymbolVector{1, 1});
  CHECK(grouped.visited_nodes == 1);
  CHECK(grouped.pd_calcs == 4);
}

TEST_CASE("an empty sphere is an erasure") {
  const auto p = test_support::tiny_problem(1.0);
  for (auto s : {Strategy::BFS, Strategy::DFS, Strategy::BestFS}) {
    const auto rep = sd_decode(p, s);
    CHECK(rep.erased());
    CHECK(rep.dist == kInf);
    CHECK(rep.final_radius_sq == 1.0);
    CHECK(rep.nodes.balanced());
  }
}

TEST_CASE("the sphere decoder agrees with exhaustive search") {
  for (auto mod : {Modulation::BPSK, Modulation::QPSK, Modulation::QAM16}) {
    for (int seed = 0; seed < 12; ++seed) {
      const int m = 2 + seed % 3;
      const double snr = 3.0 * (seed % 5);
      const auto inst = test_support::instance(m, m, mod, snr, 500 + seed);
      const auto inf = preprocess(inst, RadiusPolicy::infinite());
      const auto formula = preprocess(inst, RadiusPolicy::formula());
      const auto ml = ml_bruteforce(inf);
      for (auto s : {Strategy::BFS, Strategy::DFS, Strategy::BestFS}) {
        for (int j = 1; j <= 3; ++j) {
          const auto rep = sd_decode(inf, s, j);
          CHECK(rep.dist == doctest::Approx(ml.dist).epsilon(1e-12));
          CHECK(rep.nodes.balanced());
          const auto bounded = sd_decode(formula, s, j);
          if (ml.dist < formula.radius_sq)
            CHECK(bounded.dist == doctest::Approx(ml.dist).epsilon(1e-12));
          else
            CHECK(bounded.erased());
        }
      }
    }
  }
}

TEST_CASE("best-first never visits more nodes than the other disciplines on average") {
  double v[3] = {0, 0, 0};
  for (int seed = 0; seed < 30; ++seed) {
    const auto p = test_support::problem(6, Modulation::BPSK, 4.0, 900 + seed,
                                         RadiusPolicy::formula());
    v[0] += static_cast<double>(sd_decode(p, Strategy::BFS).visited_nodes);
    v[1] += static_cast<double>(sd_decode(p, Strategy::DFS).visited_nodes);
    v[2] += static_cast<double>(sd_decode(p, Strategy::BestFS).visited_nodes);
  }
  CHECK(v[2] <= v[1]);
  CHECK(v[1] <= v[0]);
}

TEST_CASE("exhaustive search counts, ties and cap") {
  const auto p = test_support::tiny_problem(kInf);
  const auto ml = ml_bruteforce(p);
  CHECK(ml.decoded == SymbolVector{1, 1});
  CHECK(ml.dist == 2.3125);
  CHECK(ml.visited_nodes == 3);
  CHECK(ml.pd_calcs == 6);

  // all four vectors tie; the first in tree order wins
  const auto c = make_constellation(Modulation::BPSK);
  const auto flat =
      make_problem(Eigen::MatrixXcd::Identity(2, 2), Eigen::VectorXcd::Zero(2), c, kInf);
  CHECK(ml_bruteforce(flat).decoded == SymbolVector{0, 0});

  const auto big = test_support::problem(7, Modulation::QAM16, 10.0, 1);
  CHECK_THROWS_AS(ml_bruteforce(big), CapExceededError);
  CHECK_NOTHROW(ml_bruteforce(test_support::problem(3, Modulation::QAM16, 10.0, 1), 4096));
  CHECK_THROWS_AS(ml_bruteforce(test_support::problem(3, Modulation::QAM16, 10.0, 1), 4095),
                  CapExceededError);
}

TEST_CASE("invalid group sizes") {
  const auto p = test_support::tiny_problem(kInf);
  CHECK_THROWS_AS(sd_decode(p, Strategy::BestFS, 0), ConfigError);
}
