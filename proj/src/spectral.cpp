#include "enfgrid/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "enfgrid/errors.hpp"

namespace enfgrid {

void fft_inplace(std::vector<std::complex<double>>& x, bool inverse) {
    const std::size_t n = x.size();
    if (n == 0 || (n & (n - 1)) != 0)
        throw Error(errc::InvalidArgument, "FFT size must be a power of two");

    // bit reversal
    for (std::size_t i = 1, j = 0; i < n; ++i) {
        std::size_t bit = n >> 1;
        for (; j & bit; bit >>= 1) j ^= bit;
        j ^= bit;
        if (i < j) std::swap(x[i], x[j]);
    }

    for (std::size_t len = 2; len <= n; len <<= 1) {
        const double ang = 2.0 * std::numbers::pi / static_cast<double>(len) *
                           (inverse ? 1.0 : -1.0);
        const std::complex<double> wlen(std::cos(ang), std::sin(ang));
        for (std::size_t i = 0; i < n; i += len) {
            std::complex<double> w(1.0, 0.0);
            for (std::size_t k = 0; k < len / 2; ++k) {
                std::complex<double> u = x[i + k];
                std::complex<double> v = x[i + k + len / 2] * w;
                x[i + k] = u + v;
                x[i + k + len / 2] = u - v;
                w *= wlen;
            }
        }
    }
    if (inverse)
        for (auto& v : x) v /= static_cast<double>(n);
}

std::size_t next_pow2(std::size_t n) {
    std::size_t p = 1;
    while (p < n) p <<= 1;
    return p;
}

Spectrum magnitude_spectrum(std::span<const double> frame, double sample_rate_hz,
                            std::size_t n_fft, Window window) {
    if (n_fft < frame.size())
        throw Error(errc::InvalidArgument, "n_fft smaller than frame length");

    std::vector<std::complex<double>> buf(n_fft, {0.0, 0.0});
    const std::size_t m = frame.size();
    if (window == Window::hann && m > 1) {
        for (std::size_t i = 0; i < m; ++i) {
            double w = 0.5 - 0.5 * std::cos(2.0 * std::numbers::pi *
                                            static_cast<double>(i) /
                                            static_cast<double>(m - 1));
            buf[i] = frame[i] * w;
        }
    } else {
        for (std::size_t i = 0; i < m; ++i) buf[i] = frame[i];
    }
    fft_inplace(buf);

    Spectrum spec;
    spec.n_fft = n_fft;
    spec.bin_hz = sample_rate_hz / static_cast<double>(n_fft);
    spec.window = window;
    spec.magnitudes.resize(n_fft / 2 + 1);
    for (std::size_t k = 0; k < spec.magnitudes.size(); ++k)
        spec.magnitudes[k] = std::abs(buf[k]);
    return spec;
}

double log_power(double magnitude) {
    return std::log(magnitude * magnitude + 1e-12);
}

BandSlice band(const Spectrum& spec, double lo_hz, double hi_hz) {
    if (!(lo_hz < hi_hz))
        throw Error(errc::InvalidArgument, "band requires lo_hz < hi_hz");
    BandSlice b;
    b.lo_hz = lo_hz;
    b.hi_hz = hi_hz;
    b.lo_bin = static_cast<std::size_t>(std::ceil(lo_hz / spec.bin_hz));
    double hi = std::floor(hi_hz / spec.bin_hz);
    if (hi < 0 || b.lo_bin >= spec.size() || hi < static_cast<double>(b.lo_bin))
        throw Error(errc::EmptyOrFlatBand, "band maps to no bins");
    b.hi_bin = std::min(static_cast<std::size_t>(hi), spec.size() - 1);
    return b;
}

PeakOffset quadratic_peak(double alpha, double beta, double gamma) {
    const double denom = alpha - 2.0 * beta + gamma;
    if (denom == 0.0) return {0.0, true};
    double p = (alpha - gamma) / (2.0 * denom);
    return {p, false};
}

InterpolatedPeak interpolated_peak_hz(const Spectrum& spec, const BandSlice& b) {
    if (b.lo_bin > b.hi_bin || b.hi_bin >= spec.size())
        throw Error(errc::EmptyOrFlatBand, "empty band");

    std::size_t k = b.lo_bin;
    for (std::size_t i = b.lo_bin; i <= b.hi_bin; ++i)
        if (spec.magnitudes[i] > spec.magnitudes[k]) k = i;

    const double peak_mag = spec.magnitudes[k];
    bool flat = true;
    for (std::size_t i = b.lo_bin; i <= b.hi_bin && flat; ++i)
        if (spec.magnitudes[i] != peak_mag) flat = false;
    if (flat)
        throw Error(errc::EmptyOrFlatBand, "band has no distinct peak");

    InterpolatedPeak out;
    out.peak_log_power = log_power(peak_mag);
    // Parabola neighbors come from the full spectrum: a peak at a band
    // boundary can still be refined with the out-of-band bins next to it.
    // Only a peak at the very ends of the spectrum is clamped.
    out.at_band_edge = (k == b.lo_bin || k == b.hi_bin);
    if (k == 0 || k + 1 >= spec.size()) {
        out.freq_hz = spec.freq_of_bin(k);
        return out;
    }
    const double a = log_power(spec.magnitudes[k - 1]);
    const double bb = log_power(spec.magnitudes[k]);
    const double g = log_power(spec.magnitudes[k + 1]);
    PeakOffset po = quadratic_peak(a, bb, g);
    out.degenerate = po.degenerate;
    // A boundary peak may not be the discrete argmax of the full spectrum;
    // keep the vertex within one bin of it so the estimate stays in-band-ish.
    double p = std::clamp(po.p, -1.0, 1.0);
    out.freq_hz = (static_cast<double>(k) + p) * spec.bin_hz;
    return out;
}

}  // namespace enfgrid
