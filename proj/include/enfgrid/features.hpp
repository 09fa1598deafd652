#pragma once

#include <array>
#include <cstddef>
#include <string>
#include <vector>

#include "enfgrid/enf.hpp"

namespace enfgrid {

inline constexpr std::size_t kSegmentLength = 32;
inline constexpr std::size_t kFeatureCount = 38;

struct FeatureVector {
    std::array<double, kFeatureCount> values{};  // index 0 == feature 1
    std::size_t segment_index = 0;
};

enum class DataKind { p50, p60, a50, a60 };

const char* to_string(DataKind k);
DataKind data_kind_from_string(const std::string& s);
DataKind data_kind_of(int nominal_hz, DataType type);
int nominal_of(DataKind k);
DataType type_of(DataKind k);

struct FeatureMask {
    DataKind data_kind;
    std::vector<int> indices;  // 1-based, significance order preserved
};

/// Published per-kind selection masks; significance-ordered.
const FeatureMask& table_mask(DataKind kind);
FeatureMask identity_mask(DataKind kind);

/// Non-overlapping 32-sample segments; remainder discarded.
std::vector<std::vector<double>> segment_enf(const EnfSignal& enf);

/// Orthonormal Haar DWT, 5 levels over 32 samples; layout [A5, D5, D4, D3, D2, D1].
std::array<double, kSegmentLength> haar_dwt32(const std::array<double, kSegmentLength>& x);
std::array<double, kSegmentLength> haar_idwt32(const std::array<double, kSegmentLength>& c);

/// 38-feature descriptor: variance, mean, mean of 3 largest |diff|, AR(2)
/// coefficients of the mean-removed segment, 32 Haar coefficients, range.
FeatureVector extract_features(const std::vector<double>& segment,
                               std::size_t segment_index = 0);

std::vector<double> apply_mask(const FeatureVector& fv, const FeatureMask& mask);

}  // namespace enfgrid
