#pragma once

#include <complex>
#include <map>
#include <string>
#include <vector>

namespace enfgrid {

/// Flat training-pole lists keyed by grid label.
using PoleDatabase = std::map<std::string, std::vector<std::complex<double>>>;

struct MatchResult {
    std::map<std::string, double> avg_distance;  // o^k per shortlist grid
    std::string chosen_grid;
    int nearest_count = 2;        // X
    std::size_t test_pole_count = 0;
};

double pairwise_distance(std::complex<double> p, std::complex<double> g);

/// Minimum average nearest-pole distance over the shortlist; per test pole the
/// X smallest distances to a grid's training poles are kept. Ties resolve to
/// the earlier shortlist entry.
MatchResult match(const std::vector<std::complex<double>>& test_poles,
                  const PoleDatabase& db,
                  const std::vector<std::string>& shortlist, int nearest_count);

}  // namespace enfgrid
