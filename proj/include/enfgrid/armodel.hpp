#pragma once

#include <complex>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "enfgrid/signal_io.hpp"

namespace enfgrid {

struct ArFit {
    std::vector<double> coefficients;  // a_1..a_N for x(n) = sum a_k x(n-k) + e(n)
    double residual_variance = 0.0;
    bool clamped = false;  // a reflection coefficient hit the stability clamp
};

struct PoleSet {
    std::vector<std::complex<double>> poles;
    std::string grid_label;
    std::size_t segment_index = 0;
    bool degenerate = false;  // all-zero fit, no usable poles
};

/// Biased autocorrelation r(j) = (1/n) * sum x(t) x(t-j), j = 0..max_lag.
std::vector<double> autocorrelation(std::span<const double> segment,
                                    std::size_t max_lag);

/// Levinson-Durbin recursion on the Toeplitz Yule-Walker system.
ArFit levinson_durbin(std::span<const double> r, std::size_t order);

/// Roots of z^N - a1 z^{N-1} - ... - aN via companion-matrix eigenvalues;
/// each root checked against the polynomial to 1e-6.
PoleSet poles_from_ar(const ArFit& fit);

struct PoleBlockParams {
    double block_seconds = 10.0;
    std::size_t order_power = 8;
    std::size_t order_audio = 12;
    double silence_threshold = 1e-12;  // r(0) below this skips the block
};

/// Per 10 s non-overlapping block: mean removal, autocorrelation, AR fit,
/// pole extraction. Silent blocks are skipped.
std::vector<PoleSet> grid_pole_database(const Recording& rec, DataType data_type,
                                        const std::string& grid_label,
                                        const PoleBlockParams& params = {});

}  // namespace enfgrid
