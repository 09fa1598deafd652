#include "enfgrid/svm.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "enfgrid/errors.hpp"

namespace enfgrid {

double rbf_kernel(const std::vector<double>& a, const std::vector<double>& b,
                  double gamma) {
    double d2 = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        double d = a[i] - b[i];
        d2 += d * d;
    }
    return std::exp(-gamma * d2);
}

double BinarySvm::decision_value(const std::vector<double>& x) const {
    double acc = bias;
    for (std::size_t i = 0; i < support_vectors.size(); ++i)
        acc += dual_coefficients[i] * rbf_kernel(support_vectors[i], x, gamma);
    return acc;
}

double BinarySvm::probability_positive(const std::vector<double>& x) const {
    double f = decision_value(x);
    double fApB = calib_a * f + calib_b;
    // numerically safe logistic
    if (fApB >= 0)
        return std::exp(-fApB) / (1.0 + std::exp(-fApB));
    return 1.0 / (1.0 + std::exp(fApB));
}

SmoResult smo_solve(const std::vector<std::vector<double>>& x,
                    const std::vector<int>& y, double c, double gamma,
                    double tol, std::size_t max_iterations) {
    const std::size_t n = x.size();
    if (n == 0 || y.size() != n)
        throw Error(errc::InvalidArgument, "empty or mismatched training set");
    bool has_pos = false, has_neg = false;
    for (int v : y) (v > 0 ? has_pos : has_neg) = true;
    if (!has_pos || !has_neg)
        throw Error(errc::NeedTwoClasses, "both classes required");
    if (max_iterations == 0) max_iterations = std::max<std::size_t>(100000, 1000 * n);

    // dense kernel matrix; training sets here are small
    std::vector<std::vector<double>> K(n, std::vector<double>(n));
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i; j < n; ++j)
            K[i][j] = K[j][i] = rbf_kernel(x[i], x[j], gamma);

    std::vector<double> alpha(n, 0.0);
    std::vector<double> grad(n, -1.0);  // gradient of 1/2 a'Qa - e'a at a = 0

    SmoResult res;
    double gap = std::numeric_limits<double>::infinity();
    std::size_t iter = 0;
    for (; iter < max_iterations; ++iter) {
        // maximal violating pair
        double m = -std::numeric_limits<double>::infinity();
        double M = std::numeric_limits<double>::infinity();
        std::ptrdiff_t i = -1, j = -1;
        for (std::size_t t = 0; t < n; ++t) {
            double v = -y[t] * grad[t];
            bool in_up = (y[t] > 0 && alpha[t] < c) || (y[t] < 0 && alpha[t] > 0);
            bool in_low = (y[t] < 0 && alpha[t] < c) || (y[t] > 0 && alpha[t] > 0);
            if (in_up && v > m) { m = v; i = static_cast<std::ptrdiff_t>(t); }
            if (in_low && v < M) { M = v; j = static_cast<std::ptrdiff_t>(t); }
        }
        gap = m - M;
        if (i < 0 || j < 0 || gap < tol) break;

        const auto ii = static_cast<std::size_t>(i);
        const auto jj = static_cast<std::size_t>(j);
        double eta = K[ii][ii] + K[jj][jj] - 2.0 * K[ii][jj];
        if (eta <= 0.0) eta = 1e-12;
        // step along alpha_i += y_i t, alpha_j -= y_j t
        double t_star = -(y[ii] * grad[ii] - y[jj] * grad[jj]) / eta;
        double t_lo = -std::numeric_limits<double>::infinity();
        double t_hi = std::numeric_limits<double>::infinity();
        if (y[ii] > 0) { t_lo = std::max(t_lo, -alpha[ii]); t_hi = std::min(t_hi, c - alpha[ii]); }
        else           { t_lo = std::max(t_lo, alpha[ii] - c); t_hi = std::min(t_hi, alpha[ii]); }
        if (y[jj] > 0) { t_lo = std::max(t_lo, alpha[jj] - c); t_hi = std::min(t_hi, alpha[jj]); }
        else           { t_lo = std::max(t_lo, -alpha[jj]); t_hi = std::min(t_hi, c - alpha[jj]); }
        double t = std::clamp(t_star, t_lo, t_hi);
        if (t == 0.0) break;  // boxed in; no progress possible on this pair

        double d_ai = y[ii] * t;
        double d_aj = -y[jj] * t;
        alpha[ii] += d_ai;
        alpha[jj] += d_aj;
        for (std::size_t k = 0; k < n; ++k)
            grad[k] += y[k] * (y[ii] * K[k][ii] * d_ai + y[jj] * K[k][jj] * d_aj);
    }
    res.converged = gap < tol;
    res.kkt_residual = std::max(gap, 0.0);
    res.alphas = alpha;

    // bias from free support vectors, else midpoint of the violating bounds
    double acc = 0.0;
    std::size_t free_count = 0;
    for (std::size_t t = 0; t < n; ++t) {
        if (alpha[t] > 1e-12 && alpha[t] < c - 1e-12) {
            acc += -y[t] * grad[t];
            ++free_count;
        }
    }
    if (free_count > 0) {
        res.bias = acc / static_cast<double>(free_count);
    } else {
        double m = -std::numeric_limits<double>::infinity();
        double M = std::numeric_limits<double>::infinity();
        for (std::size_t t = 0; t < n; ++t) {
            double v = -y[t] * grad[t];
            bool in_up = (y[t] > 0 && alpha[t] < c) || (y[t] < 0 && alpha[t] > 0);
            bool in_low = (y[t] < 0 && alpha[t] < c) || (y[t] > 0 && alpha[t] > 0);
            if (in_up) m = std::max(m, v);
            if (in_low) M = std::min(M, v);
        }
        res.bias = 0.5 * (m + M);
    }

    // dual objective in the maximized form: e'a - 1/2 a'Qa
    double obj = 0.0;
    for (std::size_t t = 0; t < n; ++t)
        obj += alpha[t] - 0.5 * alpha[t] * (grad[t] + 1.0);  // grad = Qa - e
    res.objective = obj;
    return res;
}

void fit_sigmoid(const std::vector<double>& decision_values,
                 const std::vector<int>& labels, double& a_out, double& b_out) {
    const std::size_t l = decision_values.size();
    double prior1 = 0, prior0 = 0;
    for (int v : labels) (v > 0 ? prior1 : prior0) += 1.0;

    const int max_iter = 100;
    const double min_step = 1e-10;
    const double sigma = 1e-12;
    const double eps = 1e-5;
    const double hi_target = (prior1 + 1.0) / (prior1 + 2.0);
    const double lo_target = 1.0 / (prior0 + 2.0);

    std::vector<double> t(l);
    for (std::size_t i = 0; i < l; ++i)
        t[i] = labels[i] > 0 ? hi_target : lo_target;

    double a = 0.0;
    double b = std::log((prior0 + 1.0) / (prior1 + 1.0));
    auto fval = [&](double av, double bv) {
        double f = 0.0;
        for (std::size_t i = 0; i < l; ++i) {
            double fApB = decision_values[i] * av + bv;
            if (fApB >= 0)
                f += t[i] * fApB + std::log1p(std::exp(-fApB));
            else
                f += (t[i] - 1) * fApB + std::log1p(std::exp(fApB));
        }
        return f;
    };
    double f = fval(a, b);

    for (int it = 0; it < max_iter; ++it) {
        double h11 = sigma, h22 = sigma, h21 = 0, g1 = 0, g2 = 0;
        for (std::size_t i = 0; i < l; ++i) {
            double fApB = decision_values[i] * a + b;
            double p, q;
            if (fApB >= 0) {
                p = std::exp(-fApB) / (1.0 + std::exp(-fApB));
                q = 1.0 / (1.0 + std::exp(-fApB));
            } else {
                p = 1.0 / (1.0 + std::exp(fApB));
                q = std::exp(fApB) / (1.0 + std::exp(fApB));
            }
            double d2 = p * q;
            h11 += decision_values[i] * decision_values[i] * d2;
            h22 += d2;
            h21 += decision_values[i] * d2;
            double d1 = t[i] - p;
            g1 += decision_values[i] * d1;
            g2 += d1;
        }
        if (std::abs(g1) < eps && std::abs(g2) < eps) break;

        double det = h11 * h22 - h21 * h21;
        double da = -(h22 * g1 - h21 * g2) / det;
        double db = -(-h21 * g1 + h11 * g2) / det;
        double gd = g1 * da + g2 * db;

        double stepsize = 1.0;
        while (stepsize >= min_step) {
            double new_a = a + stepsize * da;
            double new_b = b + stepsize * db;
            double new_f = fval(new_a, new_b);
            if (new_f < f + 0.0001 * stepsize * gd) {
                a = new_a;
                b = new_b;
                f = new_f;
                break;
            }
            stepsize /= 2.0;
        }
        if (stepsize < min_step) break;
    }
    a_out = a;
    b_out = b;
}

namespace {

/// Deterministic stratified fold assignment (round-robin per class).
std::vector<int> fold_assignment(const std::vector<int>& y, int folds) {
    std::vector<int> fold(y.size());
    int next_pos = 0, next_neg = 0;
    for (std::size_t i = 0; i < y.size(); ++i) {
        if (y[i] > 0) fold[i] = next_pos++ % folds;
        else fold[i] = next_neg++ % folds;
    }
    return fold;
}

BinarySvm make_binary(const std::vector<std::vector<double>>& x,
                      const std::vector<int>& y, double c, double gamma,
                      double tol, bool calibrate) {
    SmoResult sol = smo_solve(x, y, c, gamma, tol);

    BinarySvm svm;
    svm.gamma = gamma;
    svm.c = c;
    svm.bias = sol.bias;
    svm.converged = sol.converged;
    svm.kkt_residual = sol.kkt_residual;
    svm.dual_objective = sol.objective;
    for (std::size_t i = 0; i < x.size(); ++i) {
        if (sol.alphas[i] > 1e-12) {
            svm.support_vectors.push_back(x[i]);
            svm.dual_coefficients.push_back(sol.alphas[i] * y[i]);
        }
    }

    if (!calibrate) return svm;

    // held-out decision values via 3-fold split; full-model fallback when a
    // fold cannot be trained (tiny pair data)
    std::vector<double> dec(x.size());
    std::vector<int> fold = fold_assignment(y, 3);
    bool ok = true;
    for (int f = 0; f < 3 && ok; ++f) {
        std::vector<std::vector<double>> xt;
        std::vector<int> yt;
        std::vector<std::size_t> held;
        for (std::size_t i = 0; i < x.size(); ++i) {
            if (fold[i] == f) held.push_back(i);
            else { xt.push_back(x[i]); yt.push_back(y[i]); }
        }
        bool p = false, ng = false;
        for (int v : yt) (v > 0 ? p : ng) = true;
        if (held.empty()) continue;
        if (!p || !ng) { ok = false; break; }
        BinarySvm sub = make_binary(xt, yt, c, gamma, tol, false);
        for (std::size_t i : held) dec[i] = sub.decision_value(x[i]);
    }
    if (!ok)
        for (std::size_t i = 0; i < x.size(); ++i) dec[i] = svm.decision_value(x[i]);

    fit_sigmoid(dec, y, svm.calib_a, svm.calib_b);
    return svm;
}

}  // namespace

BinarySvm train_binary(const std::vector<std::vector<double>>& x,
                       const std::vector<int>& y, double c, double gamma,
                       double tol) {
    return make_binary(x, y, c, gamma, tol, true);
}

std::size_t MulticlassSvm::pair_index(std::size_t i, std::size_t j) const {
    // machines stored in order (0,1),(0,2),...,(0,K-1),(1,2),...
    std::size_t idx = 0;
    for (std::size_t a = 0; a < i; ++a) idx += labels.size() - a - 1;
    return idx + (j - i - 1);
}

namespace {

struct FlatDataset {
    std::vector<std::vector<double>> x;  // normalized
    std::vector<std::size_t> cls;
};

std::vector<std::string> class_labels(
    const std::map<std::string, std::vector<std::vector<double>>>& dataset) {
    std::vector<std::string> labels;
    for (const auto& [k, _] : dataset) labels.push_back(k);
    return labels;  // std::map keeps them sorted
}

/// One-vs-one vote-based prediction used inside cross-validation.
std::size_t vote_predict(const std::vector<BinarySvm>& machines,
                         std::size_t n_classes, const std::vector<double>& x) {
    std::vector<int> votes(n_classes, 0);
    std::size_t m = 0;
    for (std::size_t i = 0; i < n_classes; ++i)
        for (std::size_t j = i + 1; j < n_classes; ++j, ++m)
            votes[machines[m].decision_value(x) > 0 ? i : j]++;
    return static_cast<std::size_t>(
        std::max_element(votes.begin(), votes.end()) - votes.begin());
}

std::vector<BinarySvm> train_pairs(const FlatDataset& data, std::size_t n_classes,
                                   double c, double gamma, double tol,
                                   bool calibrate) {
    std::vector<BinarySvm> machines;
    for (std::size_t i = 0; i < n_classes; ++i) {
        for (std::size_t j = i + 1; j < n_classes; ++j) {
            std::vector<std::vector<double>> xp;
            std::vector<int> yp;
            for (std::size_t t = 0; t < data.x.size(); ++t) {
                if (data.cls[t] == i) { xp.push_back(data.x[t]); yp.push_back(+1); }
                else if (data.cls[t] == j) { xp.push_back(data.x[t]); yp.push_back(-1); }
            }
            machines.push_back(make_binary(xp, yp, c, gamma, tol, calibrate));
        }
    }
    return machines;
}

}  // namespace

MulticlassSvm train_multiclass(
    const std::map<std::string, std::vector<std::vector<double>>>& dataset,
    DataKind kind, const FeatureMask& mask, const SvmTrainParams& params) {
    if (dataset.size() < 2)
        throw Error(errc::NeedTwoClasses, "need at least two grids");

    MulticlassSvm model;
    model.data_kind = kind;
    model.mask = mask;
    model.labels = class_labels(dataset);

    std::size_t dim = mask.indices.size();
    std::size_t min_class = std::numeric_limits<std::size_t>::max();
    FlatDataset data;
    for (std::size_t ci = 0; ci < model.labels.size(); ++ci) {
        const auto& vecs = dataset.at(model.labels[ci]);
        min_class = std::min(min_class, vecs.size());
        for (const auto& v : vecs) {
            if (v.size() != dim)
                throw Error(errc::DimensionMismatch, "feature vector size vs mask");
            data.x.push_back(v);
            data.cls.push_back(ci);
        }
    }
    if (min_class < 2)
        throw Error(errc::InvalidArgument, "need at least 2 segments per grid");

    // z-score normalization from training data
    model.norm_mean.assign(dim, 0.0);
    model.norm_std.assign(dim, 0.0);
    for (const auto& v : data.x)
        for (std::size_t d = 0; d < dim; ++d) model.norm_mean[d] += v[d];
    for (double& m : model.norm_mean) m /= static_cast<double>(data.x.size());
    for (const auto& v : data.x)
        for (std::size_t d = 0; d < dim; ++d) {
            double dd = v[d] - model.norm_mean[d];
            model.norm_std[d] += dd * dd;
        }
    for (double& s : model.norm_std) {
        s = std::sqrt(s / static_cast<double>(data.x.size()));
        if (s < 1e-12) s = 1.0;
    }
    for (auto& v : data.x)
        for (std::size_t d = 0; d < dim; ++d)
            v[d] = (v[d] - model.norm_mean[d]) / model.norm_std[d];

    const int folds = static_cast<int>(
        std::min<std::size_t>(static_cast<std::size_t>(params.cv_folds), min_class));

    // deterministic per-class round-robin fold ids
    std::vector<int> fold(data.x.size());
    {
        std::vector<int> counter(model.labels.size(), 0);
        for (std::size_t t = 0; t < data.x.size(); ++t)
            fold[t] = counter[data.cls[t]]++ % folds;
    }

    double best_acc = -1.0;
    for (double c : params.c_grid) {
        for (double gs : params.gamma_grid_scale) {
            double gamma = gs / static_cast<double>(dim);
            std::size_t correct = 0, total = 0;
            for (int f = 0; f < folds; ++f) {
                FlatDataset train;
                std::vector<std::size_t> held;
                for (std::size_t t = 0; t < data.x.size(); ++t) {
                    if (fold[t] == f) held.push_back(t);
                    else { train.x.push_back(data.x[t]); train.cls.push_back(data.cls[t]); }
                }
                std::vector<std::size_t> present(model.labels.size(), 0);
                for (std::size_t ci : train.cls) present[ci]++;
                if (std::any_of(present.begin(), present.end(),
                                [](std::size_t p) { return p == 0; }))
                    continue;
                auto machines = train_pairs(train, model.labels.size(), c, gamma,
                                            params.tol, false);
                for (std::size_t t : held) {
                    if (vote_predict(machines, model.labels.size(), data.x[t]) ==
                        data.cls[t])
                        ++correct;
                    ++total;
                }
            }
            double acc = total ? static_cast<double>(correct) / static_cast<double>(total)
                               : 0.0;
            if (acc > best_acc) {  // strict >: earlier (smaller C, gamma) wins ties
                best_acc = acc;
                model.chosen_c = c;
                model.chosen_gamma = gamma;
            }
        }
    }
    model.cv_accuracy = best_acc;
    model.machines = train_pairs(data, model.labels.size(), model.chosen_c,
                                 model.chosen_gamma, params.tol, true);
    return model;
}

std::vector<double> couple_pairwise(const std::vector<std::vector<double>>& r) {
    const std::size_t k = r.size();
    if (k == 0) throw Error(errc::InvalidArgument, "empty pairwise matrix");
    if (k == 1) return {1.0};

    std::vector<std::vector<double>> q(k, std::vector<double>(k, 0.0));
    for (std::size_t i = 0; i < k; ++i) {
        for (std::size_t j = 0; j < k; ++j) {
            if (i == j) continue;
            q[i][i] += r[j][i] * r[j][i];
            q[i][j] = -r[j][i] * r[i][j];
        }
    }

    std::vector<double> p(k, 1.0 / static_cast<double>(k));
    std::vector<double> qp(k);
    for (int iter = 0; iter < 100; ++iter) {
        double pqp = 0.0;
        for (std::size_t i = 0; i < k; ++i) {
            qp[i] = 0.0;
            for (std::size_t j = 0; j < k; ++j) qp[i] += q[i][j] * p[j];
            pqp += p[i] * qp[i];
        }
        double max_err = 0.0;
        for (std::size_t i = 0; i < k; ++i)
            max_err = std::max(max_err, std::abs(qp[i] - pqp));
        if (max_err < 1e-12) break;

        for (std::size_t i = 0; i < k; ++i) {
            double diff = (-qp[i] + pqp) / q[i][i];
            p[i] += diff;
            pqp = (pqp + diff * (diff * q[i][i] + 2.0 * qp[i])) /
                  ((1.0 + diff) * (1.0 + diff));
            for (std::size_t j = 0; j < k; ++j) {
                qp[j] = (qp[j] + diff * q[i][j]) / (1.0 + diff);
                p[j] /= (1.0 + diff);
            }
        }
    }
    double sum = 0.0;
    for (double& v : p) { v = std::max(v, 1e-10); sum += v; }
    for (double& v : p) v /= sum;
    return p;
}

std::map<std::string, double> segment_probabilities(const MulticlassSvm& model,
                                                    const std::vector<double>& fv) {
    const std::size_t dim = model.mask.indices.size();
    if (fv.size() != dim)
        throw Error(errc::DimensionMismatch, "feature vector vs mask dimension");
    std::vector<double> x(dim);
    for (std::size_t d = 0; d < dim; ++d)
        x[d] = (fv[d] - model.norm_mean[d]) / model.norm_std[d];

    const std::size_t k = model.labels.size();
    std::vector<std::vector<double>> r(k, std::vector<double>(k, 0.5));
    std::size_t m = 0;
    for (std::size_t i = 0; i < k; ++i) {
        for (std::size_t j = i + 1; j < k; ++j, ++m) {
            double pij = model.machines[m].probability_positive(x);
            pij = std::clamp(pij, 1e-10, 1.0 - 1e-10);
            r[i][j] = pij;
            r[j][i] = 1.0 - pij;
        }
    }
    std::vector<double> p = couple_pairwise(r);

    std::map<std::string, double> out;
    for (std::size_t i = 0; i < k; ++i) out[model.labels[i]] = p[i];
    return out;
}

ShortlistDecision aggregate_and_shortlist(
    const MulticlassSvm& model,
    const std::vector<std::map<std::string, double>>& segment_probs) {
    if (segment_probs.empty())
        throw Error(errc::InvalidArgument, "no segment probabilities");

    ShortlistDecision out;
    double sum = 0.0;
    for (const auto& label : model.labels) {
        double log_acc = 0.0;
        for (const auto& probs : segment_probs) {
            auto it = probs.find(label);
            double p = it == probs.end() ? 1e-12 : std::max(it->second, 1e-12);
            log_acc += std::log(p);
        }
        double gm = std::exp(log_acc / static_cast<double>(segment_probs.size()));
        out.probabilities[label] = gm;
        sum += gm;
    }
    for (auto& [_, v] : out.probabilities) v /= sum;

    std::size_t want = nominal_of(model.data_kind) == 60 ? 2 : 3;
    want = std::min(want, model.labels.size());
    std::vector<std::string> order(model.labels);
    std::stable_sort(order.begin(), order.end(),
                     [&](const std::string& a, const std::string& b) {
                         return out.probabilities[a] > out.probabilities[b];
                     });
    out.shortlist.assign(order.begin(),
                         order.begin() + static_cast<std::ptrdiff_t>(want));
    return out;
}

}  // namespace enfgrid
