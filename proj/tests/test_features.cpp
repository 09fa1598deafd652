#include <array>
#include <cmath>
#include <numeric>

#include "doctest.h"
#include "enfgrid/errors.hpp"
#include "enfgrid/features.hpp"
#include "oracles.hpp"

using namespace enfgrid;

namespace {

EnfSignal make_enf(std::size_t n, double value = 50.0) {
    EnfSignal enf;
    enf.values_hz.assign(n, value);
    enf.nominal_hz = 50;
    return enf;
}

// Independent 2x2 Yule-Walker solve on the biased autocorrelation of the
// mean-removed segment.
std::pair<double, double> yw2_oracle(const std::vector<double>& seg) {
    double mean = std::accumulate(seg.begin(), seg.end(), 0.0) /
                  static_cast<double>(seg.size());
    std::vector<double> x(seg.size());
    for (std::size_t i = 0; i < seg.size(); ++i) x[i] = seg[i] - mean;
    auto r = [&](std::size_t j) {
        double acc = 0.0;
        for (std::size_t t = j; t < x.size(); ++t) acc += x[t] * x[t - j];
        return acc / static_cast<double>(x.size());
    };
    double r0 = r(0), r1 = r(1), r2 = r(2);
    double det = r0 * r0 - r1 * r1;
    return {(r1 * r0 - r1 * r2) / det, (r0 * r2 - r1 * r1) / det};
}

}  // namespace

TEST_SUITE("features") {

TEST_CASE("segment_enf: published 300 -> 9, exact division, too short") {
    CHECK(segment_enf(make_enf(300)).size() == 9);
    CHECK(segment_enf(make_enf(64)).size() == 2);
    CHECK_THROWS_WITH_AS(segment_enf(make_enf(31)), doctest::Contains(errc::TooShort),
                         Error);
}

TEST_CASE("constant segment features") {
    const double c = 50.125;
    std::vector<double> seg(32, c);
    FeatureVector fv = extract_features(seg);
    CHECK(fv.values[0] == 0.0);                                  // variance
    CHECK(fv.values[1] == doctest::Approx(c));                   // mean
    CHECK(fv.values[2] == 0.0);                                  // top-3 |diff|
    CHECK(fv.values[37] == 0.0);                                 // range
    CHECK(fv.values[5] == doctest::Approx(c * std::sqrt(32.0))); // A5
    for (std::size_t i = 6; i < 37; ++i) CHECK(std::abs(fv.values[i]) < 1e-12);
}

TEST_CASE("alternating 0/1 segment: fluctuation and range") {
    std::vector<double> seg(32);
    for (std::size_t i = 0; i < 32; ++i) seg[i] = static_cast<double>(i % 2);
    FeatureVector fv = extract_features(seg);
    CHECK(fv.values[2] == doctest::Approx(1.0));   // all |diffs| are 1
    CHECK(fv.values[37] == doctest::Approx(1.0));  // range
    // Unbiased variance of 16 zeros and 16 ones: 0.25 * 32/31.
    CHECK(fv.values[0] == doctest::Approx(0.25 * 32.0 / 31.0));
}

TEST_CASE("AR(2) features match an independent Yule-Walker solve") {
    oracles::Rng rng(401);
    for (int trial = 0; trial < 20; ++trial) {
        std::vector<double> seg(32);
        seg[0] = rng.normal();
        seg[1] = rng.normal();
        for (std::size_t i = 2; i < 32; ++i)
            seg[i] = 1.2 * seg[i - 1] - 0.5 * seg[i - 2] + 0.3 * rng.normal();
        FeatureVector fv = extract_features(seg);
        auto [a1, a2] = yw2_oracle(seg);
        CHECK(fv.values[3] == doctest::Approx(a1).epsilon(1e-9));
        CHECK(fv.values[4] == doctest::Approx(a2).epsilon(1e-9));
    }
}

TEST_CASE("Haar DWT: orthonormal energy preservation and exact inversion") {
    oracles::Rng rng(402);
    for (int trial = 0; trial < 1000; ++trial) {
        std::array<double, 32> x{};
        double energy = 0.0;
        for (auto& v : x) {
            v = rng.normal();
            energy += v * v;
        }
        auto c = haar_dwt32(x);
        double cenergy = 0.0;
        for (double v : c) cenergy += v * v;
        CHECK(std::abs(cenergy - energy) <= 1e-9 * energy);
        auto back = haar_idwt32(c);
        for (std::size_t i = 0; i < 32; ++i)
            CHECK(std::abs(back[i] - x[i]) <= 1e-9 * std::max(1.0, std::abs(x[i])));
    }
}

TEST_CASE("Haar layout: [A5, D5, D4, D3, D2, D1] coarse-first") {
    // A constant signal has all energy in A5 (index 0).
    std::array<double, 32> flat{};
    flat.fill(2.0);
    auto c = haar_dwt32(flat);
    CHECK(c[0] == doctest::Approx(2.0 * std::sqrt(32.0)));
    for (std::size_t i = 1; i < 32; ++i) CHECK(std::abs(c[i]) < 1e-12);

    // The fastest alternation +1/-1 lives entirely in D1 (last 16 slots).
    std::array<double, 32> alt{};
    for (std::size_t i = 0; i < 32; ++i) alt[i] = (i % 2 == 0) ? 1.0 : -1.0;
    auto ca = haar_dwt32(alt);
    for (std::size_t i = 0; i < 16; ++i) CHECK(std::abs(ca[i]) < 1e-12);
    for (std::size_t i = 16; i < 32; ++i) CHECK(std::abs(std::abs(ca[i]) - std::sqrt(2.0)) < 1e-12);
}

TEST_CASE("translation covariance: +c changes only mean and A5") {
    oracles::Rng rng(403);
    std::vector<double> seg(32);
    for (auto& v : seg) v = rng.normal();
    std::vector<double> shifted(seg);
    const double c = 3.25;
    for (auto& v : shifted) v += c;
    FeatureVector a = extract_features(seg);
    FeatureVector b = extract_features(shifted);
    CHECK(b.values[1] == doctest::Approx(a.values[1] + c).epsilon(1e-12));
    CHECK(b.values[5] == doctest::Approx(a.values[5] + c * std::sqrt(32.0)).epsilon(1e-12));
    for (std::size_t i = 0; i < 38; ++i) {
        if (i == 1 || i == 5) continue;
        CHECK(b.values[i] == doctest::Approx(a.values[i]).epsilon(1e-9));
    }
}

TEST_CASE("published masks: dimensions and significance order") {
    CHECK(table_mask(DataKind::a60).indices ==
          std::vector<int>{3, 1, 4, 25, 12, 33, 30, 28, 37, 21});
    CHECK(table_mask(DataKind::p60).indices.size() == 21);
    CHECK(table_mask(DataKind::p50).indices.size() == 26);
    CHECK(table_mask(DataKind::a50).indices.size() == 16);
    for (DataKind k : {DataKind::p50, DataKind::p60, DataKind::a50, DataKind::a60}) {
        const auto& m = table_mask(k);
        std::vector<int> sorted(m.indices);
        std::sort(sorted.begin(), sorted.end());
        CHECK(std::adjacent_find(sorted.begin(), sorted.end()) == sorted.end());
        CHECK(sorted.front() >= 1);
        CHECK(sorted.back() <= 38);
    }
}

TEST_CASE("apply_mask: identity and kind masks") {
    oracles::Rng rng(404);
    std::vector<double> seg(32);
    for (auto& v : seg) v = 50.0 + 0.01 * rng.normal();
    FeatureVector fv = extract_features(seg);

    auto full = apply_mask(fv, identity_mask(DataKind::p50));
    REQUIRE(full.size() == 38);
    for (std::size_t i = 0; i < 38; ++i) CHECK(full[i] == fv.values[i]);

    auto a60 = apply_mask(fv, table_mask(DataKind::a60));
    REQUIRE(a60.size() == 10);
    CHECK(a60[0] == fv.values[2]);  // feature 3 first (most significant)
    CHECK(a60[1] == fv.values[0]);  // then feature 1
}

TEST_CASE("extract_features is bit-for-bit deterministic") {
    oracles::Rng rng(405);
    std::vector<double> seg(32);
    for (auto& v : seg) v = rng.normal();
    FeatureVector a = extract_features(seg);
    FeatureVector b = extract_features(seg);
    for (std::size_t i = 0; i < 38; ++i) CHECK(a.values[i] == b.values[i]);
}

}  // TEST_SUITE
