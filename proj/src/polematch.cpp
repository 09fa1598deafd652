#include "enfgrid/polematch.hpp"

#include <algorithm>
#include <cmath>

#include "enfgrid/errors.hpp"

namespace enfgrid {

double pairwise_distance(std::complex<double> p, std::complex<double> g) {
    return std::abs(p - g);
}

MatchResult match(const std::vector<std::complex<double>>& test_poles,
                  const PoleDatabase& db,
                  const std::vector<std::string>& shortlist, int nearest_count) {
    if (test_poles.empty())
        throw Error(errc::InvalidArgument, "no test poles");
    if (nearest_count < 1)
        throw Error(errc::InvalidArgument, "nearest count must be >= 1");
    if (shortlist.empty())
        throw Error(errc::InvalidArgument, "empty shortlist");

    const auto x = static_cast<std::size_t>(nearest_count);
    MatchResult out;
    out.nearest_count = nearest_count;
    out.test_pole_count = test_poles.size();

    double best = 0.0;
    bool have_best = false;
    std::vector<double> dist;
    for (const std::string& grid : shortlist) {
        auto it = db.find(grid);
        if (it == db.end())
            throw Error(errc::MissingGrid, "grid '" + grid + "' not in pole database");
        const auto& train = it->second;
        if (train.size() < x)
            throw Error(errc::MissingGrid,
                        "grid '" + grid + "' has fewer training poles than X");

        double acc = 0.0;
        for (const auto& p : test_poles) {
            dist.resize(train.size());
            for (std::size_t j = 0; j < train.size(); ++j)
                dist[j] = pairwise_distance(p, train[j]);
            std::partial_sort(dist.begin(), dist.begin() + static_cast<std::ptrdiff_t>(x),
                              dist.end());
            for (std::size_t j = 0; j < x; ++j) acc += dist[j];
        }
        double ok = acc / static_cast<double>(x * test_poles.size());
        out.avg_distance[grid] = ok;
        if (!have_best || ok < best) {  // strict <: ties keep earlier entry
            best = ok;
            out.chosen_grid = grid;
            have_best = true;
        }
    }
    return out;
}

}  // namespace enfgrid
