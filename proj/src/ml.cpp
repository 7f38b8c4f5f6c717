// Exhaustive maximum-likelihood detection. Deliberately shares no code with the
// tree-search kernel so that it can serve as the optimality oracle.

#include <chrono>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "mimosd/errors.hpp"
#include "mimosd/search.hpp"

namespace mimosd {

namespace {

class Enumerator {
 public:
  explicit Enumerator(const PreprocessedProblem& p)
      : m_(p.n_tx), omega_(static_cast<int>(p.omega())), p_(p) {
    // diag_pts_[a * omega + w] = R(a, a) * point_w
    diag_pts_.resize(static_cast<std::size_t>(m_) * omega_);
    for (int a = 0; a < m_; ++a)
      for (int w = 0; w < omega_; ++w)
        diag_pts_[static_cast<std::size_t>(a) * omega_ + w] = p.R(a, a) * p.constellation.points[w];
    // split copy of antenna 0 for the innermost loop
    last_re_.resize(static_cast<std::size_t>(omega_));
    last_im_.resize(static_cast<std::size_t>(omega_));
    dist_.resize(static_cast<std::size_t>(omega_));
    for (int w = 0; w < omega_; ++w) {
      last_re_[static_cast<std::size_t>(w)] = diag_pts_[static_cast<std::size_t>(w)].real();
      last_im_[static_cast<std::size_t>(w)] = diag_pts_[static_cast<std::size_t>(w)].imag();
    }
    // one partial-sum row set per depth
    sums_.assign(static_cast<std::size_t>(m_ + 1), std::vector<cd>(static_cast<std::size_t>(m_)));
    path_.assign(static_cast<std::size_t>(m_), 0);
  }

  void run() { descend(m_ - 1, 0.0, sums_[static_cast<std::size_t>(m_)]); }

  double best() const { return best_; }
  const SymbolVector& best_vector() const { return best_s_; }
  std::uint64_t inner_nodes() const { return inner_; }
  std::uint64_t evaluations() const { return evals_; }

 private:
  // Fixes antenna `a` given the accumulated row sums of antennas above it.
  void descend(int a, double pd, const std::vector<cd>& sums) {
    ++inner_;
    evals_ += static_cast<std::uint64_t>(omega_);
    const cd target = p_.y_bar(a) - sums[static_cast<std::size_t>(a)];
    const cd* dp = &diag_pts_[static_cast<std::size_t>(a) * omega_];
    if (a == 0) {
      const double tr = target.real(), ti = target.imag();
      double* d = dist_.data();
      double low = std::numeric_limits<double>::infinity();
      for (int w = 0; w < omega_; ++w) {
        const double er = tr - last_re_[static_cast<std::size_t>(w)];
        const double ei = ti - last_im_[static_cast<std::size_t>(w)];
        d[w] = er * er + ei * ei;
        low = d[w] < low ? d[w] : low;
      }
      if (pd + low < best_) {
        int arg = 0;
        while (d[arg] != low) ++arg;
        best_ = pd + low;
        path_[0] = static_cast<Symbol>(arg);
        best_s_ = path_;
      }
      return;
    }
    std::vector<cd>& next = sums_[static_cast<std::size_t>(a)];
    for (int w = 0; w < omega_; ++w) {
      const cd s = p_.constellation.points[w];
      path_[static_cast<std::size_t>(a)] = static_cast<Symbol>(w);
      for (int row = 0; row < a; ++row)
        next[static_cast<std::size_t>(row)] = sums[static_cast<std::size_t>(row)] + p_.R(row, a) * s;
      descend(a - 1, pd + std::norm(target - dp[w]), next);
    }
  }

  int m_;
  int omega_;
  const PreprocessedProblem& p_;
  std::vector<cd> diag_pts_;
  std::vector<double> last_re_;
  std::vector<double> last_im_;
  std::vector<double> dist_;
  std::vector<std::vector<cd>> sums_;
  SymbolVector path_;
  SymbolVector best_s_;
  double best_ = std::numeric_limits<double>::infinity();
  std::uint64_t inner_ = 0;
  std::uint64_t evals_ = 0;
};

}  // namespace

DetectionReport ml_bruteforce(const PreprocessedProblem& problem, std::uint64_t cap) {
  const auto t0 = std::chrono::steady_clock::now();
  const double space = std::pow(static_cast<double>(problem.omega()), problem.n_tx);
  if (space > static_cast<double>(cap)) {
    throw CapExceededError("ml_bruteforce: " + std::to_string(problem.omega()) + "^" +
                           std::to_string(problem.n_tx) + " candidates exceed the cap of " +
                           std::to_string(cap));
  }
  Enumerator e(problem);
  e.run();

  DetectionReport rep;
  rep.decoded = e.best_vector();
  rep.dist = e.best();
  rep.visited_nodes = e.inner_nodes();
  rep.pd_calcs = e.evaluations();
  rep.final_radius_sq = e.best();
  rep.elapsed_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return rep;
}

}  // namespace mimosd
