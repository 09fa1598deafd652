#include "enfgrid/enf.hpp"

#include <algorithm>
#include <cmath>

#include "enfgrid/errors.hpp"

namespace enfgrid {

namespace {

double median_of(std::vector<double> v) {
    if (v.empty()) return 0.0;
    const std::size_t mid = v.size() / 2;
    std::nth_element(v.begin(), v.begin() + mid, v.end());
    double hi = v[mid];
    if (v.size() % 2 == 1) return hi;
    std::nth_element(v.begin(), v.begin() + mid - 1, v.begin() + mid);
    return 0.5 * (v[mid - 1] + hi);
}

double total_variation(const std::vector<double>& x) {
    double tv = 0.0;
    for (std::size_t i = 1; i < x.size(); ++i) tv += std::abs(x[i] - x[i - 1]);
    return tv;
}

}  // namespace

std::vector<double> snr_weights(const std::vector<std::vector<double>>& band_powers) {
    if (band_powers.empty())
        throw Error(errc::InvalidArgument, "no harmonic bands");

    std::vector<double> w(band_powers.size(), 0.0);
    double sum = 0.0;
    for (std::size_t k = 0; k < band_powers.size(); ++k) {
        const auto& band = band_powers[k];
        if (band.empty()) continue;
        double sig = *std::max_element(band.begin(), band.end());
        double noise = median_of(band);
        double snr = sig / std::max(noise, 1e-300);
        w[k] = snr;
        sum += snr;
    }
    if (sum <= 0.0)
        throw Error(errc::EmptyOrFlatBand, "all harmonic bands are zero");
    for (auto& v : w) v /= sum;
    return w;
}

std::vector<double> hampel_filter(const std::vector<double>& x, int window,
                                  double n_sigmas) {
    if (window < 3 || window % 2 == 0)
        throw Error(errc::InvalidArgument, "hampel window must be odd and >= 3");
    const int n = static_cast<int>(x.size());
    const int half = window / 2;
    std::vector<double> out(x);
    std::vector<double> buf, dev;
    for (int i = 0; i < n; ++i) {
        int lo = std::max(0, i - half);
        int hi = std::min(n - 1, i + half);
        buf.assign(x.begin() + lo, x.begin() + hi + 1);
        double med = median_of(buf);
        dev.resize(buf.size());
        for (std::size_t j = 0; j < buf.size(); ++j) dev[j] = std::abs(buf[j] - med);
        double sigma = std::max(1.4826 * median_of(dev), 1e-9);
        if (std::abs(x[i] - med) > n_sigmas * sigma) out[i] = med;
    }
    return out;
}

std::vector<double> smooth(const std::vector<double>& x, int window) {
    if (window < 1 || window % 2 == 0)
        throw Error(errc::InvalidArgument, "smoothing window must be odd");
    const int n = static_cast<int>(x.size());
    const int half = window / 2;
    std::vector<double> out(x.size());
    for (int i = 0; i < n; ++i) {
        int k = std::min({half, i, n - 1 - i});  // symmetric shrink at edges
        double acc = 0.0;
        for (int j = i - k; j <= i + k; ++j) acc += x[j];
        out[i] = acc / static_cast<double>(2 * k + 1);
    }
    return out;
}

namespace {

struct FramePower {
    std::vector<double> power;  // one-sided |X|^2
    double bin_hz = 0.0;
};

FramePower frame_power(std::span<const double> frame, double rate,
                       std::size_t pad_factor, Window window) {
    std::size_t n_fft = next_pow2(pad_factor * frame.size());
    Spectrum spec = magnitude_spectrum(frame, rate, n_fft, window);
    FramePower fp;
    fp.bin_hz = spec.bin_hz;
    fp.power.resize(spec.size());
    for (std::size_t k = 0; k < spec.size(); ++k)
        fp.power[k] = spec.magnitudes[k] * spec.magnitudes[k];
    return fp;
}

/// Combined-spectrum candidate for one frame and one bandwidth.
double combined_candidate(const FramePower& fp, double rate, double f0, double fb,
                          int harmonics) {
    const double nyquist = rate / 2.0;
    const double bin = fp.bin_hz;

    std::vector<std::vector<double>> band_powers;
    std::vector<int> used_k;
    for (int k = 1; k <= harmonics; ++k) {
        double lo = k * (f0 - fb), hi = k * (f0 + fb);
        if (hi > nyquist) break;
        auto lo_bin = static_cast<std::size_t>(std::ceil(lo / bin));
        auto hi_bin = static_cast<std::size_t>(std::floor(hi / bin));
        hi_bin = std::min(hi_bin, fp.power.size() - 1);
        if (lo_bin > hi_bin) continue;
        band_powers.emplace_back(fp.power.begin() + lo_bin,
                                 fp.power.begin() + hi_bin + 1);
        used_k.push_back(k);
    }
    std::vector<double> w = snr_weights(band_powers);

    // Base grid at native bin spacing over [f0-fb, f0+fb]; harmonic k sampled
    // at the bin nearest k*f.
    auto base_lo = static_cast<std::size_t>(std::ceil((f0 - fb) / bin));
    auto base_hi = static_cast<std::size_t>(std::floor((f0 + fb) / bin));
    base_hi = std::min(base_hi, fp.power.size() - 1);
    if (base_lo >= base_hi)
        throw Error(errc::EmptyOrFlatBand, "base band maps to no bins");

    std::vector<double> combined(base_hi - base_lo + 1, 0.0);
    for (std::size_t j = 0; j < combined.size(); ++j) {
        double f = static_cast<double>(base_lo + j) * bin;
        for (std::size_t bi = 0; bi < used_k.size(); ++bi) {
            auto idx = static_cast<std::size_t>(std::llround(used_k[bi] * f / bin));
            if (idx < fp.power.size()) combined[j] += w[bi] * fp.power[idx];
        }
    }

    std::size_t jmax = 0;
    for (std::size_t j = 1; j < combined.size(); ++j)
        if (combined[j] > combined[jmax]) jmax = j;
    if (combined[jmax] <= 0.0)
        throw Error(errc::EmptyOrFlatBand, "combined spectrum is zero");

    double p = 0.0;
    if (jmax > 0 && jmax + 1 < combined.size()) {
        auto lp = [](double v) { return std::log(v + 1e-12); };
        p = quadratic_peak(lp(combined[jmax - 1]), lp(combined[jmax]),
                           lp(combined[jmax + 1]))
                .p;
        p = std::clamp(p, -0.5, 0.5);
    }
    return (static_cast<double>(base_lo + jmax) + p) * bin;
}

}  // namespace

AudioEnfDebug extract_enf_audio_candidates(const Recording& rec, int nominal_hz,
                                           const EnfParams& params) {
    const double f0 = static_cast<double>(nominal_hz);
    auto frame_list = frames(rec, params.audio_frame_seconds,
                             params.audio_overlap_seconds);

    AudioEnfDebug dbg;
    dbg.candidates.assign(params.bandwidths_hz.size(), {});
    for (const Frame& fr : frame_list) {
        std::span<const double> frame(rec.samples.data() + fr.start, fr.length);
        FramePower fp = frame_power(frame, rec.sample_rate_hz,
                                    params.nfft_pad_factor, Window::hann);
        for (std::size_t b = 0; b < params.bandwidths_hz.size(); ++b)
            dbg.candidates[b].push_back(
                combined_candidate(fp, rec.sample_rate_hz, f0,
                                   params.bandwidths_hz[b],
                                   params.harmonic_count));
    }

    dbg.total_variation.resize(dbg.candidates.size());
    for (std::size_t b = 0; b < dbg.candidates.size(); ++b)
        dbg.total_variation[b] = total_variation(dbg.candidates[b]);
    dbg.chosen = static_cast<std::size_t>(
        std::min_element(dbg.total_variation.begin(), dbg.total_variation.end()) -
        dbg.total_variation.begin());
    return dbg;
}

EnfSignal extract_enf_audio(const Recording& rec, int nominal_hz,
                            const EnfParams& params) {
    AudioEnfDebug dbg = extract_enf_audio_candidates(rec, nominal_hz, params);

    EnfSignal enf;
    enf.values_hz = hampel_filter(dbg.candidates[dbg.chosen], params.hampel_window,
                                  params.hampel_n_sigmas);
    enf.values_hz = smooth(enf.values_hz, params.smooth_window);
    enf.hop_seconds = params.audio_frame_seconds - params.audio_overlap_seconds;
    enf.nominal_hz = nominal_hz;
    enf.source_type = DataType::audio;
    return enf;
}

EnfSignal extract_enf_power(const Recording& rec, int nominal_hz,
                            const EnfParams& params) {
    auto frame_list = frames(rec, params.power_frame_seconds, 0.0);

    EnfSignal enf;
    enf.hop_seconds = params.power_frame_seconds;
    enf.nominal_hz = nominal_hz;
    enf.source_type = DataType::power;
    enf.values_hz.reserve(frame_list.size());

    for (const Frame& fr : frame_list) {
        std::span<const double> frame(rec.samples.data() + fr.start, fr.length);
        std::size_t n_fft = next_pow2(params.nfft_pad_factor * frame.size());
        Spectrum spec = magnitude_spectrum(frame, rec.sample_rate_hz, n_fft,
                                           Window::rectangular);
        BandSlice b = band(spec, params.power_band_lo_hz, params.power_band_hi_hz);
        enf.values_hz.push_back(interpolated_peak_hz(spec, b).freq_hz);
    }
    return enf;
}

}  // namespace enfgrid
