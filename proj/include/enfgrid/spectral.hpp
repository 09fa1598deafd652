#pragma once

#include <complex>
#include <cstddef>
#include <span>
#include <vector>

namespace enfgrid {

enum class Window { rectangular, hann };

/// One-sided magnitude spectrum of a single frame.
struct Spectrum {
    std::vector<double> magnitudes;  // floor(n_fft/2)+1 bins
    double bin_hz = 0.0;             // Fs / n_fft
    std::size_t n_fft = 0;
    Window window = Window::rectangular;

    double freq_of_bin(std::size_t k) const { return static_cast<double>(k) * bin_hz; }
    std::size_t size() const { return magnitudes.size(); }
};

/// Half-open-ended inclusive bin range [lo_bin, hi_bin] mapped from [lo_hz, hi_hz].
struct BandSlice {
    double lo_hz = 0.0;
    double hi_hz = 0.0;
    std::size_t lo_bin = 0;
    std::size_t hi_bin = 0;  // inclusive
};

/// In-place radix-2 complex FFT; size must be a power of two.
void fft_inplace(std::vector<std::complex<double>>& x, bool inverse = false);

std::size_t next_pow2(std::size_t n);

/// Windowed, zero-padded one-sided magnitude spectrum. n_fft must be a power
/// of two and at least the frame length.
Spectrum magnitude_spectrum(std::span<const double> frame, double sample_rate_hz,
                            std::size_t n_fft, Window window);

/// Natural log of (magnitude^2 + 1e-12).
double log_power(double magnitude);

/// Map a frequency interval onto bins of spec; throws if empty.
BandSlice band(const Spectrum& spec, double lo_hz, double hi_hz);

struct PeakOffset {
    double p = 0.0;          // in [-0.5, 0.5] for a strict local max
    bool degenerate = false; // flat triple, p forced to 0
};

/// Parabolic vertex offset from three values around a discrete peak.
PeakOffset quadratic_peak(double alpha, double beta, double gamma);

struct InterpolatedPeak {
    double freq_hz = 0.0;
    double peak_log_power = 0.0;
    bool at_band_edge = false;
    bool degenerate = false;
};

/// Discrete argmax of log power in band, refined by quadratic interpolation.
/// Edge peaks are clamped (p = 0) and flagged.
InterpolatedPeak interpolated_peak_hz(const Spectrum& spec, const BandSlice& band);

}  // namespace enfgrid
