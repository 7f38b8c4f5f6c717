#include "mimosd/model.hpp"

#include <algorithm>
#include <bit>
#include <cctype>
#include <cmath>
#include <limits>
#include <string>

#include "mimosd/errors.hpp"

namespace mimosd {

namespace {

std::uint32_t gray(std::uint32_t i) { return i ^ (i >> 1); }

// Square QAM (QPSK is side 2) from two Gray-coded PAM axes.
Constellation square_qam(Modulation kind, int side) {
  Constellation c;
  c.kind = kind;
  const int half_bits = std::countr_zero(static_cast<unsigned>(side));
  c.bits_per_symbol = 2 * half_bits;
  const double energy = 2.0 * (side * side - 1) / 3.0;
  const double scale = 1.0 / std::sqrt(energy);
  for (int i_re = 0; i_re < side; ++i_re) {
    for (int i_im = 0; i_im < side; ++i_im) {
      const double re = 2.0 * i_re - (side - 1);
      const double im = 2.0 * i_im - (side - 1);
      c.points.emplace_back(re * scale, im * scale);
      c.labels.push_back((gray(i_re) << half_bits) | gray(i_im));
    }
  }
  return c;
}

}  // namespace

std::string_view to_string(Modulation kind) {
  switch (kind) {
    case Modulation::BPSK: return "bpsk";
    case Modulation::QPSK: return "qpsk";
    case Modulation::QAM16: return "qam16";
    case Modulation::QAM64: return "qam64";
  }
  return "?";
}

Modulation parse_modulation(std::string_view text) {
  std::string lower(text);
  std::transform(lower.begin(), lower.end(), lower.begin(),
                 [](unsigned char ch) { return static_cast<char>(std::tolower(ch)); });
  if (lower == "bpsk") return Modulation::BPSK;
  if (lower == "qpsk") return Modulation::QPSK;
  if (lower == "qam16" || lower == "16qam") return Modulation::QAM16;
  if (lower == "qam64" || lower == "64qam") return Modulation::QAM64;
  throw ConfigError("unknown modulation '" + std::string(text) + "'");
}

Constellation make_constellation(Modulation kind) {
  switch (kind) {
    case Modulation::BPSK: {
      Constellation c;
      c.kind = kind;
      c.points = {cd(-1.0, 0.0), cd(1.0, 0.0)};
      c.labels = {0u, 1u};
      c.bits_per_symbol = 1;
      return c;
    }
    case Modulation::QPSK: return square_qam(kind, 2);
    case Modulation::QAM16: return square_qam(kind, 4);
    case Modulation::QAM64: return square_qam(kind, 8);
  }
  throw ConfigError("unsupported modulation");
}

Symbol Constellation::nearest(cd x) const {
  Symbol best = 0;
  double best_d = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < points.size(); ++i) {
    const double d = std::norm(x - points[i]);
    if (d < best_d) {
      best_d = d;
      best = static_cast<Symbol>(i);
    }
  }
  return best;
}

int Constellation::bit_errors(Symbol a, Symbol b) const {
  return std::popcount(labels[a] ^ labels[b]);
}

NoiseModel NoiseModel::from_snr_db(double snr_db) {
  if (std::isinf(snr_db) && snr_db > 0) return NoiseModel{0.0};
  return NoiseModel{std::pow(10.0, -snr_db / 10.0)};
}

Eigen::VectorXcd MimoInstance::transmitted() const {
  Eigen::VectorXcd s(n_tx);
  for (int i = 0; i < n_tx; ++i) s(i) = constellation.points[s_true[i]];
  return s;
}

std::uint64_t derive_seed(std::uint64_t base, std::uint64_t a, std::uint64_t b) {
  // splitmix64 finalizer applied to a chained combination
  auto mix = [](std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  };
  return mix(mix(mix(base) ^ a) ^ (b * 0xd6e8feb86659fd93ULL));
}

cd complex_gaussian(Rng& rng, double variance) {
  std::normal_distribution<double> unit(0.0, 1.0);
  const double sd = std::sqrt(variance / 2.0);
  const double re = unit(rng);
  const double im = unit(rng);
  return {re * sd, im * sd};
}

MimoInstance make_instance(const Eigen::MatrixXcd& H, const SymbolVector& s_true,
                           const Eigen::VectorXcd& noise, const Constellation& constellation,
                           double snr_db) {
  const auto n_rx = static_cast<int>(H.rows());
  const auto n_tx = static_cast<int>(H.cols());
  if (n_tx < 1 || n_tx > n_rx) {
    throw DimensionError("need 1 <= M <= N, got M=" + std::to_string(n_tx) +
                         " N=" + std::to_string(n_rx));
  }
  if (static_cast<int>(s_true.size()) != n_tx || noise.size() != n_rx) {
    throw DimensionError("symbol or noise vector does not match H");
  }
  MimoInstance inst;
  inst.n_tx = n_tx;
  inst.n_rx = n_rx;
  inst.H = H;
  inst.s_true = s_true;
  inst.snr_db = snr_db;
  inst.constellation = constellation;
  inst.y = H * inst.transmitted() + noise;
  return inst;
}

MimoInstance generate_instance(int n_tx, int n_rx, const Constellation& constellation,
                               double snr_db, Rng& rng) {
  if (n_tx < 1 || n_tx > n_rx) {
    throw DimensionError("need 1 <= M <= N, got M=" + std::to_string(n_tx) +
                         " N=" + std::to_string(n_rx));
  }
  Eigen::MatrixXcd H(n_rx, n_tx);
  for (int r = 0; r < n_rx; ++r)
    for (int c = 0; c < n_tx; ++c) H(r, c) = complex_gaussian(rng, 1.0);

  std::uniform_int_distribution<int> pick(0, static_cast<int>(constellation.size()) - 1);
  SymbolVector s(n_tx);
  for (auto& sym : s) sym = static_cast<Symbol>(pick(rng));

  const double variance = NoiseModel::from_snr_db(snr_db).variance;
  Eigen::VectorXcd noise = Eigen::VectorXcd::Zero(n_rx);
  if (variance > 0.0)
    for (int r = 0; r < n_rx; ++r) noise(r) = complex_gaussian(rng, variance);

  return make_instance(H, s, noise, constellation, snr_db);
}

double initial_radius_sq(int n_tx, int n_rx, double snr_db) {
  return static_cast<double>(n_rx) * n_tx * std::pow(10.0, -snr_db / 10.0);
}

}  // namespace mimosd
