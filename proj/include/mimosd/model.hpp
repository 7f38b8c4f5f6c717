#pragma once

#include <complex>
#include <cstdint>
#include <random>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

namespace mimosd {

using cd = std::complex<double>;

// Index into a constellation's point list. Alphabets never exceed 64 points.
using Symbol = std::uint8_t;
using SymbolVector = std::vector<Symbol>;

enum class Modulation { BPSK, QPSK, QAM16, QAM64 };

std::string_view to_string(Modulation kind);
// Accepts bpsk | qpsk | qam16 | qam64 (case-insensitive); throws ConfigError.
Modulation parse_modulation(std::string_view text);

/// Unit-mean-energy alphabet with Gray bit labels.
///
/// Point order is the branching order of the search tree: BPSK is {-1, +1};
/// square QAM points are indexed `i_re * side + i_im` with both PAM indices
/// ascending in amplitude.
struct Constellation {
  Modulation kind = Modulation::BPSK;
  std::vector<cd> points;
  std::vector<std::uint32_t> labels;
  int bits_per_symbol = 1;

  std::size_t size() const { return points.size(); }

  // Nearest point in Euclidean distance; ties go to the lower index.
  Symbol nearest(cd x) const;

  int bit_errors(Symbol a, Symbol b) const;
};

Constellation make_constellation(Modulation kind);

// Complex per-entry noise variance sigma^2 = 10^(-snr_db/10) for unit-energy
// symbols. snr_db = +inf yields a noise-free model.
struct NoiseModel {
  double variance = 1.0;

  static NoiseModel from_snr_db(double snr_db);
};

/// One detection problem y = H s + n.
struct MimoInstance {
  int n_tx = 0;
  int n_rx = 0;
  Eigen::MatrixXcd H;
  SymbolVector s_true;
  Eigen::VectorXcd y;
  double snr_db = 0.0;
  Constellation constellation;

  Eigen::VectorXcd transmitted() const;
};

using Rng = std::mt19937_64;

// Child seed for (base, a, b); stable across platforms and thread schedules.
std::uint64_t derive_seed(std::uint64_t base, std::uint64_t a, std::uint64_t b = 0);

// Draws H ~ CN(0,1) i.i.d. (row-major N x M order), then s uniform over the
// alphabet, then n ~ CN(0, sigma^2). Throws DimensionError when M > N or M < 1.
MimoInstance generate_instance(int n_tx, int n_rx, const Constellation& constellation,
                               double snr_db, Rng& rng);

// Builds an instance from explicit parts; y = H s + noise.
MimoInstance make_instance(const Eigen::MatrixXcd& H, const SymbolVector& s_true,
                           const Eigen::VectorXcd& noise, const Constellation& constellation,
                           double snr_db);

// r^2 = N * M * 10^(-snr_db/10).
double initial_radius_sq(int n_tx, int n_rx, double snr_db);

// One CN(0, variance) draw: real and imaginary parts each N(0, variance/2).
cd complex_gaussian(Rng& rng, double variance);

}  // namespace mimosd
