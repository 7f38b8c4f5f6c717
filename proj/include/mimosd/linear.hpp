#pragma once

#include <string_view>

#include <Eigen/Dense>

#include "mimosd/model.hpp"
#include "mimosd/report.hpp"

namespace mimosd {

enum class LinearKind { MRC, ZF, MMSE };

std::string_view to_string(LinearKind kind);

// Unquantized estimate x = H_inv y.
//   MRC:  per-stream matched filter h_i^H y / ||h_i||^2
//   ZF:   least squares via the QR factors of H (throws RankDeficientError)
//   MMSE: least squares on [H; sigma I] x = [y; 0] with sigma^2 = 10^(-snr/10)
Eigen::VectorXcd linear_estimate(const MimoInstance& instance, LinearKind kind);

// Quantizes linear_estimate per antenna. Counters stay zero.
DetectionReport linear_decode(const MimoInstance& instance, LinearKind kind);

SymbolVector quantize(const Eigen::VectorXcd& x, const Constellation& constellation);

}  // namespace mimosd
