#pragma once

#include <cstddef>
#include <map>
#include <string>
#include <vector>

#include "enfgrid/features.hpp"

namespace enfgrid {

struct BinarySvm {
    std::vector<std::vector<double>> support_vectors;
    std::vector<double> dual_coefficients;  // alpha_i * y_i
    double bias = 0.0;
    double gamma = 0.0;
    double c = 0.0;
    double calib_a = 0.0;  // sigmoid p = 1/(1+exp(A*f+B))
    double calib_b = 0.0;
    bool converged = true;
    double kkt_residual = 0.0;
    double dual_objective = 0.0;

    double decision_value(const std::vector<double>& x) const;
    double probability_positive(const std::vector<double>& x) const;
};

struct SmoResult {
    std::vector<double> alphas;
    double bias = 0.0;
    double objective = 0.0;      // dual objective value (maximized form)
    double kkt_residual = 0.0;   // final max violating-pair gap
    bool converged = true;
};

double rbf_kernel(const std::vector<double>& a, const std::vector<double>& b,
                  double gamma);

/// SMO on the C-SVC dual with maximal-violating-pair working set selection.
SmoResult smo_solve(const std::vector<std::vector<double>>& x,
                    const std::vector<int>& y, double c, double gamma,
                    double tol = 1e-6, std::size_t max_iterations = 0);

/// Regularized sigmoid fit (Newton with backtracking) on decision values.
void fit_sigmoid(const std::vector<double>& decision_values,
                 const std::vector<int>& labels, double& a_out, double& b_out);

/// Trains the dual and calibrates the sigmoid on 3-fold held-out decisions.
BinarySvm train_binary(const std::vector<std::vector<double>>& x,
                       const std::vector<int>& y, double c, double gamma,
                       double tol = 1e-6);

struct SvmTrainParams {
    std::vector<double> c_grid = {0.1, 1.0, 10.0, 100.0};
    std::vector<double> gamma_grid_scale = {0.01, 0.1, 1.0, 10.0};  // divided by dim
    int cv_folds = 5;
    double tol = 1e-6;
};

struct MulticlassSvm {
    DataKind data_kind = DataKind::p50;
    std::vector<std::string> labels;  // sorted class labels
    std::vector<BinarySvm> machines;  // one per unordered pair (i<j), i outer
    FeatureMask mask{DataKind::p50, {}};
    std::vector<double> norm_mean;    // per masked feature
    std::vector<double> norm_std;
    double chosen_c = 0.0;
    double chosen_gamma = 0.0;
    double cv_accuracy = 0.0;

    std::size_t pair_index(std::size_t i, std::size_t j) const;
};

/// One-vs-one multiclass training with (C, gamma) grid search by k-fold CV.
/// dataset maps grid label -> masked (unnormalized) feature vectors.
MulticlassSvm train_multiclass(
    const std::map<std::string, std::vector<std::vector<double>>>& dataset,
    DataKind kind, const FeatureMask& mask, const SvmTrainParams& params = {});

/// Pairwise-coupled class distribution for one masked, unnormalized vector.
std::map<std::string, double> segment_probabilities(const MulticlassSvm& model,
                                                    const std::vector<double>& fv);

/// Couple pairwise probabilities r[i][j] = P(class i beats class j) into a
/// distribution (iterative normalization, 100 iterations, 1e-10 floor).
std::vector<double> couple_pairwise(const std::vector<std::vector<double>>& r);

struct ShortlistDecision {
    std::map<std::string, double> probabilities;  // geometric-mean aggregated
    std::vector<std::string> shortlist;           // descending probability
};

/// Geometric-mean aggregation over segments, then top-k shortlist
/// (k = 2 for 60 Hz kinds, 3 for 50 Hz kinds, capped by class count).
ShortlistDecision aggregate_and_shortlist(
    const MulticlassSvm& model,
    const std::vector<std::map<std::string, double>>& segment_probs);

}  // namespace enfgrid
