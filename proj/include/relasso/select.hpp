#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "relasso/net.hpp"

namespace relasso {

enum class ImportanceSource { kNetworkRowNorm, kLinearCoefficient, kExternal };

struct ImportanceVector {
    Eigen::VectorXd values;  // nonnegative, one entry per input variable
    ImportanceSource source = ImportanceSource::kExternal;
};

enum class ClusterMethod { kKMeans2, kGmm2 };

struct SelectionReport {
    std::vector<int> selected;  // 0-based variable indices, ascending
    int tp = 0;
    int fp = 0;
    double auc = 0.0;
    std::string method;
    bool degenerate = false;
};

/// l2 norm of each input-layer row: how much the network uses variable i.
ImportanceVector importance(const TwoLayerNet& net);
ImportanceVector importance(const DeepNet& net);

/// Indices with importance strictly above t.
std::vector<int> threshold_select(const ImportanceVector& imp, double t);

/// Indices of the k largest importances; boundary ties go to smaller indices.
std::vector<int> topk_select(const ImportanceVector& imp, int k);

/// Splits the importances into two 1-D clusters and selects the cluster with
/// the larger mean. kmeans2 finds the exact SSE-optimal split by scanning
/// all p-1 sorted cut points; gmm2 runs 2-component EM (free means,
/// variances and weights, variance floor 1e-12, k-means init plus two
/// perturbed restarts, at most 500 iterations or log-likelihood change below
/// 1e-10) and assigns by posterior >= 0.5. If all importances coincide the
/// selection is empty and the degenerate flag is set.
std::pair<std::vector<int>, bool> cluster_select(const ImportanceVector& imp, ClusterMethod method,
                                                 std::uint64_t seed = 0);

/// (true positives, false positives) of `selected` against the true support.
std::pair<int, int> evaluate_selection(const std::vector<int>& selected,
                                       const std::vector<int>& true_support);

/// Rank-based AUC (Mann-Whitney with midranks for ties). The support must be
/// neither empty nor all of {1..p}.
double auc_score(const ImportanceVector& imp, const std::vector<int>& true_support);

/// ROC points (false-positive rate, true-positive rate) swept over the
/// distinct importance values, from (0,0) to (1,1). The trapezoidal area
/// under these points equals auc_score.
std::vector<std::pair<double, double>> roc_curve(const ImportanceVector& imp,
                                                 const std::vector<int>& true_support);

}  // namespace relasso
