#include "mimosd/linear.hpp"

#include <chrono>
#include <cmath>

#include "mimosd/errors.hpp"
#include "mimosd/linalg.hpp"

namespace mimosd {

std::string_view to_string(LinearKind kind) {
  switch (kind) {
    case LinearKind::MRC: return "mrc";
    case LinearKind::ZF: return "zf";
    case LinearKind::MMSE: return "mmse";
  }
  return "?";
}

namespace {

// Solves min ||b - A x|| with A tall and full column rank through its QR factors.
Eigen::VectorXcd solve_least_squares(const Eigen::MatrixXcd& A, const Eigen::VectorXcd& b) {
  const QrFactors f = qr_decompose(A);
  const auto m = A.cols();
  const Eigen::VectorXcd rhs = (f.Q.adjoint() * b).head(m);
  return f.R.topRows(m).triangularView<Eigen::Upper>().solve(rhs);
}

}  // namespace

Eigen::VectorXcd linear_estimate(const MimoInstance& instance, LinearKind kind) {
  const Eigen::MatrixXcd& H = instance.H;
  switch (kind) {
    case LinearKind::MRC: {
      Eigen::VectorXcd x = H.adjoint() * instance.y;
      const Eigen::VectorXd gain = H.colwise().squaredNorm().transpose();
      for (Eigen::Index i = 0; i < x.size(); ++i) x(i) /= gain(i);
      return x;
    }
    case LinearKind::ZF:
      return solve_least_squares(H, instance.y);
    case LinearKind::MMSE: {
      const double sigma2 = NoiseModel::from_snr_db(instance.snr_db).variance;
      if (sigma2 == 0.0) return solve_least_squares(H, instance.y);
      const auto n = H.rows();
      const auto m = H.cols();
      Eigen::MatrixXcd A(n + m, m);
      A.topRows(n) = H;
      A.bottomRows(m) = Eigen::MatrixXcd::Identity(m, m) * std::sqrt(sigma2);
      Eigen::VectorXcd b = Eigen::VectorXcd::Zero(n + m);
      b.head(n) = instance.y;
      return solve_least_squares(A, b);
    }
  }
  throw ConfigError("unknown linear decoder");
}

SymbolVector quantize(const Eigen::VectorXcd& x, const Constellation& constellation) {
  SymbolVector s(static_cast<std::size_t>(x.size()));
  for (Eigen::Index i = 0; i < x.size(); ++i) s[static_cast<std::size_t>(i)] = constellation.nearest(x(i));
  return s;
}

DetectionReport linear_decode(const MimoInstance& instance, LinearKind kind) {
  const auto t0 = std::chrono::steady_clock::now();
  DetectionReport rep;
  rep.decoded = quantize(linear_estimate(instance, kind), instance.constellation);
  Eigen::VectorXcd s(instance.n_tx);
  for (int i = 0; i < instance.n_tx; ++i) s(i) = instance.constellation.points[rep.decoded[i]];
  rep.dist = (instance.y - instance.H * s).squaredNorm();
  rep.elapsed_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return rep;
}

}  // namespace mimosd
