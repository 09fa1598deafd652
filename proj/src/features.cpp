#include "enfgrid/features.hpp"

#include <algorithm>
#include <cmath>

#include "enfgrid/armodel.hpp"
#include "enfgrid/errors.hpp"

namespace enfgrid {

const char* to_string(DataKind k) {
    switch (k) {
        case DataKind::p50: return "50power";
        case DataKind::p60: return "60power";
        case DataKind::a50: return "50audio";
        default: return "60audio";
    }
}

DataKind data_kind_from_string(const std::string& s) {
    if (s == "50power") return DataKind::p50;
    if (s == "60power") return DataKind::p60;
    if (s == "50audio") return DataKind::a50;
    if (s == "60audio") return DataKind::a60;
    throw Error(errc::InvalidArgument, "unknown data kind '" + s + "'");
}

DataKind data_kind_of(int nominal_hz, DataType type) {
    if (nominal_hz != 50 && nominal_hz != 60)
        throw Error(errc::InvalidArgument, "nominal must be 50 or 60");
    if (type == DataType::power) return nominal_hz == 50 ? DataKind::p50 : DataKind::p60;
    if (type == DataType::audio) return nominal_hz == 50 ? DataKind::a50 : DataKind::a60;
    throw Error(errc::InvalidArgument, "data type must be resolved before kind lookup");
}

int nominal_of(DataKind k) {
    return (k == DataKind::p50 || k == DataKind::a50) ? 50 : 60;
}

DataType type_of(DataKind k) {
    return (k == DataKind::p50 || k == DataKind::p60) ? DataType::power
                                                      : DataType::audio;
}

const FeatureMask& table_mask(DataKind kind) {
    static const FeatureMask p60{DataKind::p60,
                                 {1, 38, 5, 3, 13, 4, 20, 26, 22, 34, 30, 6, 37, 27,
                                  19, 31, 36, 32, 33, 18, 14}};
    static const FeatureMask p50{DataKind::p50,
                                 {6, 3, 1, 2, 5, 26, 13, 33, 18, 4, 12, 11, 38, 24,
                                  31, 32, 23, 34, 22, 36, 21, 30, 25, 28, 20, 29}};
    static const FeatureMask a60{DataKind::a60, {3, 1, 4, 25, 12, 33, 30, 28, 37, 21}};
    static const FeatureMask a50{DataKind::a50,
                                 {2, 1, 3, 26, 37, 4, 6, 11, 22, 13, 28, 29, 5, 35,
                                  10, 31}};
    switch (kind) {
        case DataKind::p60: return p60;
        case DataKind::p50: return p50;
        case DataKind::a60: return a60;
        default: return a50;
    }
}

FeatureMask identity_mask(DataKind kind) {
    FeatureMask m{kind, {}};
    for (int i = 1; i <= static_cast<int>(kFeatureCount); ++i) m.indices.push_back(i);
    return m;
}

std::vector<std::vector<double>> segment_enf(const EnfSignal& enf) {
    if (enf.values_hz.size() < kSegmentLength)
        throw Error(errc::TooShort,
                    "ENF has " + std::to_string(enf.values_hz.size()) +
                        " samples; need at least 32");
    std::vector<std::vector<double>> out;
    const std::size_t count = enf.values_hz.size() / kSegmentLength;
    for (std::size_t s = 0; s < count; ++s)
        out.emplace_back(enf.values_hz.begin() + static_cast<std::ptrdiff_t>(s * kSegmentLength),
                         enf.values_hz.begin() + static_cast<std::ptrdiff_t>((s + 1) * kSegmentLength));
    return out;
}

std::array<double, kSegmentLength> haar_dwt32(const std::array<double, kSegmentLength>& x) {
    constexpr double inv_sqrt2 = 0.70710678118654752440;
    std::array<double, kSegmentLength> approx = x;
    std::array<double, kSegmentLength> out{};
    std::size_t len = kSegmentLength;
    std::size_t write_end = kSegmentLength;  // details fill from the back
    for (int level = 0; level < 5; ++level) {
        std::size_t half = len / 2;
        std::array<double, kSegmentLength> next{};
        for (std::size_t i = 0; i < half; ++i) {
            next[i] = (approx[2 * i] + approx[2 * i + 1]) * inv_sqrt2;
            out[write_end - half + i] = (approx[2 * i] - approx[2 * i + 1]) * inv_sqrt2;
        }
        write_end -= half;
        approx = next;
        len = half;
    }
    out[0] = approx[0];  // A5
    return out;
}

std::array<double, kSegmentLength> haar_idwt32(const std::array<double, kSegmentLength>& c) {
    constexpr double inv_sqrt2 = 0.70710678118654752440;
    std::array<double, kSegmentLength> approx{};
    approx[0] = c[0];
    std::size_t len = 1;
    std::size_t read_start = 1;
    for (int level = 0; level < 5; ++level) {
        std::array<double, kSegmentLength> next{};
        for (std::size_t i = 0; i < len; ++i) {
            double a = approx[i];
            double d = c[read_start + i];
            next[2 * i] = (a + d) * inv_sqrt2;
            next[2 * i + 1] = (a - d) * inv_sqrt2;
        }
        read_start += len;
        len *= 2;
        approx = next;
    }
    return approx;
}

FeatureVector extract_features(const std::vector<double>& segment,
                               std::size_t segment_index) {
    if (segment.size() != kSegmentLength)
        throw Error(errc::DimensionMismatch, "segment must have exactly 32 samples");
    for (double v : segment)
        if (!std::isfinite(v)) throw Error(errc::NonFiniteSamples, "segment");

    FeatureVector fv;
    fv.segment_index = segment_index;

    double mean = 0.0;
    for (double v : segment) mean += v;
    mean /= static_cast<double>(kSegmentLength);

    double var = 0.0;
    for (double v : segment) var += (v - mean) * (v - mean);
    var /= static_cast<double>(kSegmentLength - 1);

    std::vector<double> diffs(kSegmentLength - 1);
    for (std::size_t i = 1; i < kSegmentLength; ++i)
        diffs[i - 1] = std::abs(segment[i] - segment[i - 1]);
    std::partial_sort(diffs.begin(), diffs.begin() + 3, diffs.end(),
                      std::greater<>());
    double top3 = (diffs[0] + diffs[1] + diffs[2]) / 3.0;

    std::vector<double> centered(segment);
    for (double& v : centered) v -= mean;
    std::vector<double> r = autocorrelation(centered, 2);
    double a1 = 0.0, a2 = 0.0;
    if (r[0] > 0.0) {
        ArFit fit = levinson_durbin(r, 2);
        a1 = fit.coefficients[0];
        a2 = fit.coefficients[1];
    }

    std::array<double, kSegmentLength> seg{};
    std::copy(segment.begin(), segment.end(), seg.begin());
    std::array<double, kSegmentLength> dwt = haar_dwt32(seg);

    auto [mn, mx] = std::minmax_element(segment.begin(), segment.end());

    fv.values[0] = var;
    fv.values[1] = mean;
    fv.values[2] = top3;
    fv.values[3] = a1;
    fv.values[4] = a2;
    for (std::size_t i = 0; i < kSegmentLength; ++i) fv.values[5 + i] = dwt[i];
    fv.values[37] = *mx - *mn;
    return fv;
}

std::vector<double> apply_mask(const FeatureVector& fv, const FeatureMask& mask) {
    std::vector<double> out;
    out.reserve(mask.indices.size());
    for (int idx : mask.indices) {
        if (idx < 1 || idx > static_cast<int>(kFeatureCount))
            throw Error(errc::InvalidArgument, "mask index out of range");
        out.push_back(fv.values[static_cast<std::size_t>(idx - 1)]);
    }
    return out;
}

}  // namespace enfgrid
