#include "relasso/select.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <set>

#include "relasso/errors.hpp"
#include "relasso/rng.hpp"

namespace relasso {
namespace {

constexpr double kGmmVarianceFloor = 1e-12;
constexpr double kGmmTol = 1e-10;
constexpr int kGmmMaxIter = 500;
constexpr int kGmmRestarts = 3;

void check_importance(const ImportanceVector& imp) {
    if (imp.values.size() == 0) throw ContractError("importance vector is empty");
    for (Eigen::Index i = 0; i < imp.values.size(); ++i) {
        if (!std::isfinite(imp.values(i)) || imp.values(i) < 0.0) {
            throw ContractError("importance entries must be finite and nonnegative");
        }
    }
}

void check_support(const std::vector<int>& support, Eigen::Index p) {
    for (int i : support) {
        if (i < 0 || i >= p) throw ContractError("support index out of range");
    }
}

// Indices sorted by ascending value; ties by ascending index.
std::vector<int> sorted_indices(const Eigen::VectorXd& values) {
    std::vector<int> idx(static_cast<std::size_t>(values.size()));
    std::iota(idx.begin(), idx.end(), 0);
    std::stable_sort(idx.begin(), idx.end(),
                     [&](int a, int b) { return values(a) < values(b); });
    return idx;
}

// Exact 1-D two-means: choose the sorted cut point minimizing the total
// within-cluster sum of squares. Returns the number of points in the lower
// cluster.
int best_kmeans_split(const std::vector<double>& sorted_values) {
    const int p = static_cast<int>(sorted_values.size());
    std::vector<double> prefix(p + 1, 0.0), prefix_sq(p + 1, 0.0);
    for (int i = 0; i < p; ++i) {
        prefix[i + 1] = prefix[i] + sorted_values[static_cast<std::size_t>(i)];
        prefix_sq[i + 1] =
            prefix_sq[i] + sorted_values[static_cast<std::size_t>(i)] *
                               sorted_values[static_cast<std::size_t>(i)];
    }
    auto sse = [&](int lo, int hi) {  // half-open [lo, hi)
        const int count = hi - lo;
        if (count == 0) return 0.0;
        const double sum = prefix[hi] - prefix[lo];
        return (prefix_sq[hi] - prefix_sq[lo]) - sum * sum / count;
    };
    int best_cut = 1;
    double best = std::numeric_limits<double>::infinity();
    for (int cut = 1; cut < p; ++cut) {
        const double total = sse(0, cut) + sse(cut, p);
        if (total < best) {
            best = total;
            best_cut = cut;
        }
    }
    return best_cut;
}

struct Gmm1d {
    double mean[2];
    double var[2];
    double weight[2];
    double log_likelihood;
};

double log_normal_pdf(double x, double mean, double var) {
    constexpr double kLog2Pi = 1.8378770664093453;
    const double d = x - mean;
    return -0.5 * (kLog2Pi + std::log(var) + d * d / var);
}

Gmm1d run_em(const std::vector<double>& x, Gmm1d model) {
    const int n = static_cast<int>(x.size());
    std::vector<double> resp(static_cast<std::size_t>(n));
    double prev = -std::numeric_limits<double>::infinity();
    for (int iter = 0; iter < kGmmMaxIter; ++iter) {
        // E step
        double ll = 0.0;
        for (int i = 0; i < n; ++i) {
            const double l0 = std::log(model.weight[0]) +
                              log_normal_pdf(x[static_cast<std::size_t>(i)], model.mean[0],
                                             model.var[0]);
            const double l1 = std::log(model.weight[1]) +
                              log_normal_pdf(x[static_cast<std::size_t>(i)], model.mean[1],
                                             model.var[1]);
            const double mx = std::max(l0, l1);
            const double denom = std::exp(l0 - mx) + std::exp(l1 - mx);
            resp[static_cast<std::size_t>(i)] = std::exp(l1 - mx) / denom;
            ll += mx + std::log(denom);
        }
        model.log_likelihood = ll;
        if (std::abs(ll - prev) < kGmmTol) break;
        prev = ll;
        // M step
        double r1 = 0.0, s1 = 0.0, s0 = 0.0;
        for (int i = 0; i < n; ++i) {
            r1 += resp[static_cast<std::size_t>(i)];
            s1 += resp[static_cast<std::size_t>(i)] * x[static_cast<std::size_t>(i)];
            s0 += (1.0 - resp[static_cast<std::size_t>(i)]) * x[static_cast<std::size_t>(i)];
        }
        const double r0 = n - r1;
        if (r0 <= 0.0 || r1 <= 0.0) break;  // one component vanished
        model.mean[0] = s0 / r0;
        model.mean[1] = s1 / r1;
        double v0 = 0.0, v1 = 0.0;
        for (int i = 0; i < n; ++i) {
            const double d0 = x[static_cast<std::size_t>(i)] - model.mean[0];
            const double d1 = x[static_cast<std::size_t>(i)] - model.mean[1];
            v0 += (1.0 - resp[static_cast<std::size_t>(i)]) * d0 * d0;
            v1 += resp[static_cast<std::size_t>(i)] * d1 * d1;
        }
        model.var[0] = std::max(v0 / r0, kGmmVarianceFloor);
        model.var[1] = std::max(v1 / r1, kGmmVarianceFloor);
        model.weight[0] = r0 / n;
        model.weight[1] = r1 / n;
    }
    return model;
}

Gmm1d init_from_split(const std::vector<double>& sorted_values, int cut) {
    const int p = static_cast<int>(sorted_values.size());
    Gmm1d g{};
    double sum0 = 0.0, sum1 = 0.0;
    for (int i = 0; i < cut; ++i) sum0 += sorted_values[static_cast<std::size_t>(i)];
    for (int i = cut; i < p; ++i) sum1 += sorted_values[static_cast<std::size_t>(i)];
    g.mean[0] = sum0 / cut;
    g.mean[1] = sum1 / (p - cut);
    double v0 = 0.0, v1 = 0.0;
    for (int i = 0; i < cut; ++i) {
        const double d = sorted_values[static_cast<std::size_t>(i)] - g.mean[0];
        v0 += d * d;
    }
    for (int i = cut; i < p; ++i) {
        const double d = sorted_values[static_cast<std::size_t>(i)] - g.mean[1];
        v1 += d * d;
    }
    g.var[0] = std::max(v0 / cut, kGmmVarianceFloor);
    g.var[1] = std::max(v1 / (p - cut), kGmmVarianceFloor);
    g.weight[0] = static_cast<double>(cut) / p;
    g.weight[1] = 1.0 - g.weight[0];
    g.log_likelihood = -std::numeric_limits<double>::infinity();
    return g;
}

}  // namespace

ImportanceVector importance(const TwoLayerNet& net) {
    ImportanceVector imp;
    imp.values = net.W.rowwise().norm();
    imp.source = ImportanceSource::kNetworkRowNorm;
    return imp;
}

ImportanceVector importance(const DeepNet& net) {
    ImportanceVector imp;
    imp.values = net.W.rowwise().norm();
    imp.source = ImportanceSource::kNetworkRowNorm;
    return imp;
}

std::vector<int> threshold_select(const ImportanceVector& imp, double t) {
    check_importance(imp);
    if (t < 0.0) throw ContractError("threshold must be nonnegative");
    std::vector<int> selected;
    for (Eigen::Index i = 0; i < imp.values.size(); ++i) {
        if (imp.values(i) > t) selected.push_back(static_cast<int>(i));
    }
    return selected;
}

std::vector<int> topk_select(const ImportanceVector& imp, int k) {
    check_importance(imp);
    const int p = static_cast<int>(imp.values.size());
    if (k < 1 || k > p) {
        throw ContractError("k must satisfy 1 <= k <= " + std::to_string(p) + ", got " +
                            std::to_string(k));
    }
    std::vector<int> idx(static_cast<std::size_t>(p));
    std::iota(idx.begin(), idx.end(), 0);
    // descending value, ascending index on ties
    std::stable_sort(idx.begin(), idx.end(),
                     [&](int a, int b) { return imp.values(a) > imp.values(b); });
    std::vector<int> selected(idx.begin(), idx.begin() + k);
    std::sort(selected.begin(), selected.end());
    return selected;
}

std::pair<std::vector<int>, bool> cluster_select(const ImportanceVector& imp, ClusterMethod method,
                                                 std::uint64_t seed) {
    check_importance(imp);
    const int p = static_cast<int>(imp.values.size());
    if (p < 2) throw ContractError("clustering needs at least 2 variables");

    const double max_v = imp.values.maxCoeff();
    const double min_v = imp.values.minCoeff();
    if (max_v - min_v < 1e-12 * std::max(1.0, max_v)) {
        return {{}, true};  // no scale to split on
    }

    const std::vector<int> order = sorted_indices(imp.values);
    std::vector<double> sorted_values(static_cast<std::size_t>(p));
    for (int i = 0; i < p; ++i) {
        sorted_values[static_cast<std::size_t>(i)] = imp.values(order[static_cast<std::size_t>(i)]);
    }
    const int cut = best_kmeans_split(sorted_values);

    std::vector<int> selected;
    if (method == ClusterMethod::kKMeans2) {
        // Sorted order: the upper cluster is the one with the larger mean.
        selected.assign(order.begin() + cut, order.end());
    } else {
        Gmm1d best{};
        bool have_best = false;
        Rng rng = Rng::stream(seed, stream::kCluster);
        for (int restart = 0; restart < kGmmRestarts; ++restart) {
            Gmm1d init = init_from_split(sorted_values, cut);
            if (restart > 0) {
                // Perturbed restart around the data range.
                const double span = max_v - min_v;
                init.mean[0] = min_v + span * rng.uniform01();
                init.mean[1] = min_v + span * rng.uniform01();
                init.var[0] = init.var[1] = std::max(span * span / 4.0, kGmmVarianceFloor);
                init.weight[0] = init.weight[1] = 0.5;
            }
            const Gmm1d fitted = run_em(sorted_values, init);
            if (!have_best || fitted.log_likelihood > best.log_likelihood) {
                best = fitted;
                have_best = true;
            }
        }
        const int high = best.mean[1] >= best.mean[0] ? 1 : 0;
        const int low = 1 - high;
        for (int i = 0; i < p; ++i) {
            const double x = imp.values(i);
            const double lh = std::log(best.weight[high]) +
                              log_normal_pdf(x, best.mean[high], best.var[high]);
            const double ll = std::log(best.weight[low]) +
                              log_normal_pdf(x, best.mean[low], best.var[low]);
            const double mx = std::max(lh, ll);
            const double posterior = std::exp(lh - mx) / (std::exp(lh - mx) + std::exp(ll - mx));
            if (posterior >= 0.5) selected.push_back(i);
        }
    }
    std::sort(selected.begin(), selected.end());
    return {std::move(selected), false};
}

std::pair<int, int> evaluate_selection(const std::vector<int>& selected,
                                       const std::vector<int>& true_support) {
    const std::set<int> truth(true_support.begin(), true_support.end());
    int tp = 0, fp = 0;
    for (int i : selected) {
        if (truth.count(i)) {
            ++tp;
        } else {
            ++fp;
        }
    }
    return {tp, fp};
}

double auc_score(const ImportanceVector& imp, const std::vector<int>& true_support) {
    check_importance(imp);
    const Eigen::Index p = imp.values.size();
    check_support(true_support, p);
    const std::set<int> truth(true_support.begin(), true_support.end());
    const Eigen::Index n1 = static_cast<Eigen::Index>(truth.size());
    const Eigen::Index n0 = p - n1;
    if (n1 == 0 || n0 == 0) throw ContractError("AUC undefined: support is empty or full");

    const std::vector<int> order = sorted_indices(imp.values);
    // Midranks: tied values share the average of their 1-based rank range.
    std::vector<double> rank(static_cast<std::size_t>(p));
    Eigen::Index at = 0;
    while (at < p) {
        Eigen::Index end = at;
        while (end + 1 < p &&
               imp.values(order[static_cast<std::size_t>(end + 1)]) ==
                   imp.values(order[static_cast<std::size_t>(at)])) {
            ++end;
        }
        const double mid = 0.5 * static_cast<double>(at + end) + 1.0;
        for (Eigen::Index i = at; i <= end; ++i) {
            rank[static_cast<std::size_t>(order[static_cast<std::size_t>(i)])] = mid;
        }
        at = end + 1;
    }
    double rank_sum = 0.0;
    for (int i : truth) rank_sum += rank[static_cast<std::size_t>(i)];
    const double u = rank_sum - 0.5 * static_cast<double>(n1) * static_cast<double>(n1 + 1);
    return u / (static_cast<double>(n1) * static_cast<double>(n0));
}

std::vector<std::pair<double, double>> roc_curve(const ImportanceVector& imp,
                                                 const std::vector<int>& true_support) {
    check_importance(imp);
    const Eigen::Index p = imp.values.size();
    check_support(true_support, p);
    const std::set<int> truth(true_support.begin(), true_support.end());
    const Eigen::Index n1 = static_cast<Eigen::Index>(truth.size());
    const Eigen::Index n0 = p - n1;
    if (n1 == 0 || n0 == 0) throw ContractError("ROC undefined: support is empty or full");

    std::vector<int> order = sorted_indices(imp.values);
    std::reverse(order.begin(), order.end());  // descending importance

    std::vector<std::pair<double, double>> points;
    points.emplace_back(0.0, 0.0);
    Eigen::Index tp = 0, fp = 0, at = 0;
    while (at < p) {
        // Consume one distinct value entirely, then emit the point for the
        // selection {importance >= value}.
        const double value = imp.values(order[static_cast<std::size_t>(at)]);
        while (at < p && imp.values(order[static_cast<std::size_t>(at)]) == value) {
            if (truth.count(order[static_cast<std::size_t>(at)])) {
                ++tp;
            } else {
                ++fp;
            }
            ++at;
        }
        points.emplace_back(static_cast<double>(fp) / static_cast<double>(n0),
                            static_cast<double>(tp) / static_cast<double>(n1));
    }
    return points;
}

}  // namespace relasso
