#pragma once

#include <vector>

#include "enfgrid/signal_io.hpp"
#include "enfgrid/spectral.hpp"

namespace enfgrid {

struct TypingResult {
    int nominal_hz = 0;           // 50 or 60
    DataType data_type = DataType::unknown;
    double d50 = 0.0;
    double d60 = 0.0;
    double ratio_pr_pn = 0.0;
    double fp_hz = 0.0;
    bool declared_override = false;  // declared_type won over detection
};

struct TypingParams {
    double sn_half_width_hz = 1.5;
    double ratio_threshold = 3.0;     // T
    double upper_limit_hz = 125.0;
    std::size_t max_n_fft = std::size_t{1} << 22;
};

struct SpectrumSplit {
    std::vector<BandSlice> sn;      // narrow bands around 50/60/100/120 Hz
    std::vector<bool> in_sn;        // per bin up to 125 Hz
    std::size_t limit_bin = 0;      // last bin <= 125 Hz (inclusive)
};

/// Partition bins up to 125 Hz into nominal bands Sn and remainder Sr.
SpectrumSplit split_spectrum(const Spectrum& spec, const TypingParams& params = {});

/// Decision rules, exposed separately so they can be driven with raw values.
int nominal_from_distances(double d50, double d60);
DataType type_from_ratio(double ratio_pr_pn, double threshold = 3.0);

struct NominalDetection {
    int nominal_hz = 0;
    double d50 = 0.0, d60 = 0.0, fp_hz = 0.0;
};

NominalDetection detect_nominal(const Spectrum& spec, const TypingParams& params = {});

struct TypeDetection {
    DataType data_type = DataType::unknown;
    double ratio_pr_pn = 0.0;
};

TypeDetection detect_data_type(const Spectrum& spec, const TypingParams& params = {});

/// Whole-recording spectrum (single FT, n_fft = next pow2 >= length, capped).
Spectrum typing_spectrum(const Recording& rec, const TypingParams& params = {});

/// Full typing pass; a declared type on the recording overrides detection.
TypingResult type_recording(const Recording& rec, const TypingParams& params = {});

}  // namespace enfgrid
