#include <cmath>
#include <complex>

#include "doctest.h"
#include "enfgrid/armodel.hpp"
#include "enfgrid/errors.hpp"
#include "oracles.hpp"

using namespace enfgrid;

namespace {

std::vector<double> simulate_ar(const std::vector<double>& a, std::size_t n,
                                std::uint64_t seed, std::size_t burn_in = 2000) {
    oracles::Rng rng(seed);
    std::vector<double> x(n + burn_in, 0.0);
    for (std::size_t t = a.size(); t < x.size(); ++t) {
        double v = rng.normal();
        for (std::size_t k = 0; k < a.size(); ++k) v += a[k] * x[t - 1 - k];
        x[t] = v;
    }
    return std::vector<double>(x.begin() + static_cast<long>(burn_in), x.end());
}

// Random positive-definite autocorrelation sequence: the autocorrelation of a
// random finite signal is PSD by construction.
std::vector<double> random_psd_autocorr(oracles::Rng& rng, std::size_t max_lag) {
    std::vector<double> sig(max_lag * 8);
    for (auto& v : sig) v = rng.normal();
    std::vector<double> r(max_lag + 1, 0.0);
    for (std::size_t j = 0; j <= max_lag; ++j)
        for (std::size_t t = j; t < sig.size(); ++t) r[j] += sig[t] * sig[t - j];
    for (auto& v : r) v /= static_cast<double>(sig.size());
    r[0] += 1e-6;  // keep comfortably positive definite
    return r;
}

}  // namespace

TEST_SUITE("armodel") {

TEST_CASE("autocorrelation: whiteness, cosine shape, constant signal") {
    oracles::Rng rng(501);
    std::size_t n = 40000;
    std::vector<double> white(n);
    for (auto& v : white) v = rng.normal();
    auto rw = autocorrelation(white, 5);
    for (std::size_t j = 1; j <= 5; ++j)
        CHECK(std::abs(rw[j] / rw[0]) < 3.0 / std::sqrt(static_cast<double>(n)));

    // Bin-aligned cosine: closed-form biased autocorrelation is
    // ((n-j)/(2n)) cos(w j) plus a cross term that vanishes over full periods.
    double w = 2.0 * M_PI * 50.0 / 400.0;
    std::vector<double> cosine(n);
    for (std::size_t t = 0; t < n; ++t) cosine[t] = std::cos(w * static_cast<double>(t));
    auto rc = autocorrelation(cosine, 8);
    for (std::size_t j = 0; j <= 8; ++j) {
        double expect = (static_cast<double>(n - j) / (2.0 * static_cast<double>(n))) *
                        std::cos(w * static_cast<double>(j));
        CHECK(rc[j] == doctest::Approx(expect).epsilon(1e-3));
    }

    std::vector<double> flat(10000, 2.0);
    auto rf = autocorrelation(flat, 4);
    for (std::size_t j = 0; j <= 4; ++j)
        CHECK(rf[j] == doctest::Approx(4.0).epsilon(1e-3));  // c^2 up to edge bias
    for (std::size_t j = 1; j <= 8; ++j) CHECK(rc[0] >= std::abs(rc[j]));
}

TEST_CASE("levinson_durbin: analytic AR(1), order 0") {
    // AR(1) with a1 = 0.5 and unit innovation: r(0) = 1/(1-0.25), r(j) = 0.5^j r(0).
    double r0 = 1.0 / 0.75;
    std::vector<double> r = {r0, 0.5 * r0, 0.25 * r0};
    ArFit fit = levinson_durbin(r, 1);
    REQUIRE(fit.coefficients.size() == 1);
    CHECK(fit.coefficients[0] == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(fit.residual_variance == doctest::Approx(1.0).epsilon(1e-12));

    ArFit base = levinson_durbin(r, 0);
    CHECK(base.coefficients.empty());
    CHECK(base.residual_variance == doctest::Approx(r0));
}

TEST_CASE("levinson_durbin matches direct Toeplitz solve") {
    oracles::Rng rng(502);
    for (int trial = 0; trial < 200; ++trial) {
        std::size_t order = 1 + rng.next_u64() % 12;
        auto r = random_psd_autocorr(rng, order + 2);
        ArFit fit = levinson_durbin(r, order);
        auto direct = oracles::toeplitz_solve(r, order);
        for (std::size_t k = 0; k < order; ++k) {
            double scale = std::max(1.0, std::abs(direct[k]));
            CHECK(std::abs(fit.coefficients[k] - direct[k]) <= 1e-8 * scale);
        }
    }
}

TEST_CASE("AR(8) coefficient recovery from a long simulation") {
    std::vector<double> a = {0.6, -0.3, 0.2, -0.15, 0.1, -0.05, 0.04, -0.02};
    auto x = simulate_ar(a, 100000, 503);
    auto r = autocorrelation(x, 8);
    ArFit fit = levinson_durbin(r, 8);
    for (std::size_t k = 0; k < 8; ++k)
        CHECK(std::abs(fit.coefficients[k] - a[k]) < 0.02);
}

TEST_CASE("poles_from_ar: linear root, conjugate pair, degenerate fit") {
    ArFit ar1;
    ar1.coefficients = {0.5};
    PoleSet p1 = poles_from_ar(ar1);
    REQUIRE(p1.poles.size() == 1);
    CHECK(std::abs(p1.poles[0] - std::complex<double>(0.5, 0.0)) < 1e-12);

    double rr = 0.99, theta = 2.0 * M_PI * 50.0 / 400.0;
    ArFit ar2;
    ar2.coefficients = {2.0 * rr * std::cos(theta), -rr * rr};
    PoleSet p2 = poles_from_ar(ar2);
    REQUIRE(p2.poles.size() == 2);
    std::complex<double> want(rr * std::cos(theta), rr * std::sin(theta));
    double best = 1e9;
    for (auto z : p2.poles) best = std::min(best, std::abs(z - want));
    CHECK(best < 1e-9);

    ArFit zero;
    zero.coefficients = {0.0, 0.0, 0.0};
    CHECK(poles_from_ar(zero).degenerate);
}

TEST_CASE("complex poles of real fits come in conjugate pairs") {
    oracles::Rng rng(504);
    for (int trial = 0; trial < 50; ++trial) {
        auto r = random_psd_autocorr(rng, 10);
        ArFit fit = levinson_durbin(r, 8);
        PoleSet ps = poles_from_ar(fit);
        for (const auto& z : ps.poles) {
            if (std::abs(z.imag()) < 1e-12) continue;
            double best = 1e9;
            for (const auto& w : ps.poles) best = std::min(best, std::abs(w - std::conj(z)));
            CHECK(best < 1e-9);
        }
        for (const auto& z : ps.poles) CHECK(std::abs(z) <= 1.0 + 1e-6);
    }
}

TEST_CASE("grid_pole_database: block count, tone pole angle, silent input") {
    Recording rec;
    rec.sample_rate_hz = 400.0;
    std::size_t n = 240000;  // 600 s
    rec.samples.resize(n);
    for (std::size_t i = 0; i < n; ++i)
        rec.samples[i] = std::sin(2.0 * M_PI * 50.0 * static_cast<double>(i) / 400.0);
    auto db = grid_pole_database(rec, DataType::power, "G1");
    CHECK(db.size() == 60);  // 600 / 10 block-count oracle

    double theta = 2.0 * M_PI * 50.0 / 400.0;
    for (const auto& ps : db) {
        double best_mag = 0.0;
        double best_angle = 0.0;
        for (const auto& z : ps.poles) {
            if (std::abs(z) > best_mag) {
                best_mag = std::abs(z);
                best_angle = std::abs(std::arg(z));
            }
        }
        CHECK(best_mag > 0.999);
        CHECK(std::abs(best_angle - theta) * 400.0 / (2.0 * M_PI) < 0.05);
    }

    Recording silent;
    silent.sample_rate_hz = 400.0;
    silent.samples.assign(24000, 0.0);
    CHECK(grid_pole_database(silent, DataType::power, "G1").empty());
}

TEST_CASE("audio blocks use order 12, power blocks order 8") {
    oracles::Rng rng(505);
    Recording rec;
    rec.sample_rate_hz = 1000.0;
    rec.samples.resize(20000);  // 20 s
    for (auto& v : rec.samples) v = rng.normal();
    auto audio = grid_pole_database(rec, DataType::audio, "G1");
    auto power = grid_pole_database(rec, DataType::power, "G1");
    REQUIRE(!audio.empty());
    REQUIRE(!power.empty());
    CHECK(audio[0].poles.size() == 12);
    CHECK(power[0].poles.size() == 8);
}

}  // TEST_SUITE
