#pragma once

#include <cstddef>
#include <vector>

#include "enfgrid/signal_io.hpp"
#include "enfgrid/spectral.hpp"

namespace enfgrid {

struct EnfSignal {
    std::vector<double> values_hz;
    double hop_seconds = 2.0;
    int nominal_hz = 0;
    DataType source_type = DataType::unknown;
};

struct EnfParams {
    double audio_frame_seconds = 5.0;
    double audio_overlap_seconds = 3.0;
    double power_frame_seconds = 2.0;
    std::vector<double> bandwidths_hz = {1.0, 3.0, 8.0};  // fB candidates
    int harmonic_count = 6;                               // L
    double power_band_lo_hz = 46.0;
    double power_band_hi_hz = 64.0;
    std::size_t nfft_pad_factor = 8;  // n_fft = next pow2 >= factor * frame_len
    int hampel_window = 11;
    double hampel_n_sigmas = 3.0;
    int smooth_window = 5;
};

/// Per-harmonic SNR-derived combining weights: signal = max bin power in band,
/// noise = median bin power; normalized to sum 1.
std::vector<double> snr_weights(const std::vector<std::vector<double>>& band_powers);

/// Sliding median/MAD outlier replacement; length preserving.
std::vector<double> hampel_filter(const std::vector<double>& x, int window,
                                  double n_sigmas);

/// Centered moving average with symmetric window shrinking at the edges.
std::vector<double> smooth(const std::vector<double>& x, int window);

/// Harmonic spectrum-combining extractor (5 s frames, 3 s overlap), with
/// per-bandwidth candidates and least-total-variation selection, then
/// Hampel filtering and smoothing.
EnfSignal extract_enf_audio(const Recording& rec, int nominal_hz,
                            const EnfParams& params = {});

/// Index of the bandwidth candidate picked by the least-variation rule
/// (diagnostic, recomputed by extract_enf_audio internally).
struct AudioEnfDebug {
    std::vector<std::vector<double>> candidates;  // one series per fB
    std::vector<double> total_variation;
    std::size_t chosen = 0;
};
AudioEnfDebug extract_enf_audio_candidates(const Recording& rec, int nominal_hz,
                                           const EnfParams& params = {});

/// Direct quadratic-interpolation extractor on 2 s non-overlapping frames,
/// peak searched in [46, 64] Hz.
EnfSignal extract_enf_power(const Recording& rec, int nominal_hz,
                            const EnfParams& params = {});

}  // namespace enfgrid
