#include "enfgrid/pretyping.hpp"

#include <algorithm>
#include <cmath>

#include "enfgrid/errors.hpp"

namespace enfgrid {

namespace {
constexpr double kCenters[] = {50.0, 60.0, 100.0, 120.0};
}

SpectrumSplit split_spectrum(const Spectrum& spec, const TypingParams& params) {
    const double max_hz = spec.freq_of_bin(spec.size() - 1);
    if (max_hz < params.upper_limit_hz)
        throw Error(errc::InsufficientBandwidth,
                    "spectrum reaches only " + std::to_string(max_hz) + " Hz");

    SpectrumSplit split;
    split.limit_bin = static_cast<std::size_t>(
        std::floor(params.upper_limit_hz / spec.bin_hz));
    split.limit_bin = std::min(split.limit_bin, spec.size() - 1);
    split.in_sn.assign(split.limit_bin + 1, false);

    for (double c : kCenters) {
        BandSlice b = band(spec, c - params.sn_half_width_hz,
                           c + params.sn_half_width_hz);
        split.sn.push_back(b);
        for (std::size_t k = b.lo_bin; k <= b.hi_bin && k <= split.limit_bin; ++k)
            split.in_sn[k] = true;
    }
    return split;
}

int nominal_from_distances(double d50, double d60) {
    return d50 <= d60 ? 50 : 60;  // ties go to 50
}

DataType type_from_ratio(double ratio_pr_pn, double threshold) {
    return ratio_pr_pn > threshold ? DataType::audio : DataType::power;
}

NominalDetection detect_nominal(const Spectrum& spec, const TypingParams& params) {
    SpectrumSplit split = split_spectrum(spec, params);

    double best_mag = -1.0;
    std::size_t best_bin = 0;
    for (std::size_t k = 0; k <= split.limit_bin; ++k) {
        if (!split.in_sn[k]) continue;
        if (spec.magnitudes[k] > best_mag) {
            best_mag = spec.magnitudes[k];
            best_bin = k;
        }
    }

    NominalDetection out;
    out.fp_hz = spec.freq_of_bin(best_bin);
    out.d50 = std::min(std::abs(out.fp_hz - 50.0), std::abs(out.fp_hz - 100.0));
    out.d60 = std::min(std::abs(out.fp_hz - 60.0), std::abs(out.fp_hz - 120.0));
    out.nominal_hz = nominal_from_distances(out.d50, out.d60);
    return out;
}

TypeDetection detect_data_type(const Spectrum& spec, const TypingParams& params) {
    SpectrumSplit split = split_spectrum(spec, params);

    double pn = 0.0, pr = 0.0;
    for (std::size_t k = 0; k <= split.limit_bin; ++k) {
        if (split.in_sn[k])
            pn += spec.magnitudes[k];
        else
            pr += spec.magnitudes[k];
    }
    if (pn <= 0.0)
        throw Error(errc::NoNominalEnergy, "no energy in nominal bands");

    TypeDetection out;
    out.ratio_pr_pn = pr / pn;
    out.data_type = type_from_ratio(out.ratio_pr_pn, params.ratio_threshold);
    return out;
}

Spectrum typing_spectrum(const Recording& rec, const TypingParams& params) {
    std::size_t n_fft = std::min(next_pow2(rec.samples.size()), params.max_n_fft);
    std::span<const double> frame(rec.samples.data(),
                                  std::min(rec.samples.size(), n_fft));
    return magnitude_spectrum(frame, rec.sample_rate_hz, n_fft, Window::rectangular);
}

TypingResult type_recording(const Recording& rec, const TypingParams& params) {
    Spectrum spec = typing_spectrum(rec, params);
    NominalDetection nom = detect_nominal(spec, params);
    TypeDetection typ = detect_data_type(spec, params);

    TypingResult out;
    out.nominal_hz = nom.nominal_hz;
    out.d50 = nom.d50;
    out.d60 = nom.d60;
    out.fp_hz = nom.fp_hz;
    out.ratio_pr_pn = typ.ratio_pr_pn;
    out.data_type = typ.data_type;
    if (rec.declared_type != DataType::unknown &&
        rec.declared_type != typ.data_type) {
        out.data_type = rec.declared_type;
        out.declared_override = true;
    } else if (rec.declared_type != DataType::unknown) {
        out.data_type = rec.declared_type;
    }
    return out;
}

}  // namespace enfgrid
