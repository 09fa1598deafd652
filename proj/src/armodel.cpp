#include "enfgrid/armodel.hpp"

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>

#include "enfgrid/errors.hpp"

namespace enfgrid {

std::vector<double> autocorrelation(std::span<const double> segment,
                                    std::size_t max_lag) {
    const std::size_t n = segment.size();
    if (n <= max_lag)
        throw Error(errc::TooShort, "segment length must exceed max lag");
    std::vector<double> r(max_lag + 1, 0.0);
    for (std::size_t j = 0; j <= max_lag; ++j) {
        double acc = 0.0;
        for (std::size_t t = j; t < n; ++t) acc += segment[t] * segment[t - j];
        r[j] = acc / static_cast<double>(n);
    }
    return r;
}

ArFit levinson_durbin(std::span<const double> r, std::size_t order) {
    if (order >= r.size())
        throw Error(errc::InvalidArgument, "need order + 1 autocorrelation values");
    if (!(r[0] > 0.0))
        throw Error(errc::InvalidArgument, "r(0) must be positive (silent segment?)");

    ArFit fit;
    fit.coefficients.assign(order, 0.0);
    double err = r[0];
    if (order == 0) {
        fit.residual_variance = err;
        return fit;
    }

    std::vector<double> a(order, 0.0), prev(order, 0.0);
    for (std::size_t m = 0; m < order; ++m) {
        double acc = r[m + 1];
        for (std::size_t k = 0; k < m; ++k) acc -= a[k] * r[m - k];
        double kappa = acc / err;
        if (std::abs(kappa) >= 1.0) {
            kappa = std::copysign(1.0 - 1e-9, kappa);
            fit.clamped = true;
        }
        prev = a;
        a[m] = kappa;
        for (std::size_t k = 0; k < m; ++k) a[k] = prev[k] - kappa * prev[m - 1 - k];
        err *= (1.0 - kappa * kappa);
    }
    fit.coefficients = a;
    fit.residual_variance = std::max(err, 0.0);
    return fit;
}

PoleSet poles_from_ar(const ArFit& fit) {
    const std::size_t n = fit.coefficients.size();
    if (n == 0)
        throw Error(errc::InvalidArgument, "AR order must be >= 1");

    PoleSet out;
    bool all_zero = std::all_of(fit.coefficients.begin(), fit.coefficients.end(),
                                [](double a) { return a == 0.0; });
    if (all_zero) {
        out.degenerate = true;
        return out;
    }

    // Companion matrix of z^N - a1 z^{N-1} - ... - aN.
    Eigen::MatrixXd comp = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(n),
                                                 static_cast<Eigen::Index>(n));
    for (std::size_t k = 0; k < n; ++k)
        comp(0, static_cast<Eigen::Index>(k)) = fit.coefficients[k];
    for (std::size_t k = 1; k < n; ++k)
        comp(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(k - 1)) = 1.0;

    Eigen::EigenSolver<Eigen::MatrixXd> solver(comp, /*computeEigenvectors=*/false);
    if (solver.info() != Eigen::Success)
        throw Error(errc::InvalidArgument, "eigen solver failed on companion matrix");

    for (Eigen::Index i = 0; i < solver.eigenvalues().size(); ++i) {
        std::complex<double> z = solver.eigenvalues()(i);
        // residual of the monic polynomial at the root
        std::complex<double> val = 1.0;
        for (std::size_t k = 0; k < n; ++k) val = val * z - fit.coefficients[k];
        double scale = std::max(1.0, std::pow(std::abs(z), static_cast<double>(n)));
        if (std::abs(val) / scale > 1e-6)
            throw Error(errc::InvalidArgument, "companion root failed residual check");
        out.poles.push_back(z);
    }
    return out;
}

std::vector<PoleSet> grid_pole_database(const Recording& rec, DataType data_type,
                                        const std::string& grid_label,
                                        const PoleBlockParams& params) {
    const std::size_t order =
        data_type == DataType::audio ? params.order_audio : params.order_power;
    auto block_list = frames(rec, params.block_seconds, 0.0);

    std::vector<PoleSet> out;
    std::vector<double> block;
    for (std::size_t bi = 0; bi < block_list.size(); ++bi) {
        const Frame& fr = block_list[bi];
        block.assign(rec.samples.begin() + static_cast<std::ptrdiff_t>(fr.start),
                     rec.samples.begin() + static_cast<std::ptrdiff_t>(fr.start + fr.length));
        double mean = 0.0;
        for (double v : block) mean += v;
        mean /= static_cast<double>(block.size());
        for (double& v : block) v -= mean;

        std::vector<double> r = autocorrelation(block, order);
        if (r[0] <= params.silence_threshold) continue;  // silent block

        PoleSet ps = poles_from_ar(levinson_durbin(r, order));
        if (ps.degenerate) continue;
        ps.grid_label = grid_label;
        ps.segment_index = bi;
        out.push_back(std::move(ps));
    }
    return out;
}

}  // namespace enfgrid
