#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "relasso/net.hpp"

namespace relasso {

/// Design matrix plus response, optionally carrying the generating truth.
/// true_support holds 0-based variable indices; file formats print them
/// 1-based to match the x1..xp column names.
struct Dataset {
    Eigen::MatrixXd X;
    Eigen::VectorXd y;
    std::optional<std::vector<int>> true_support;
    std::optional<TwoLayerNet> planted_net;
    std::vector<std::string> feature_names;  // empty -> x1..xp

    Eigen::Index n() const { return X.rows(); }
    Eigen::Index p() const { return X.cols(); }
};

/// Sparse planted network: rows 1..s of W* are Uniform(0,1), the rest zero;
/// biases Uniform(0,1); signs +-1 with equal probability; x ~ N(0, I);
/// y = f*(x) + sigma * z. With normalize_columns the W* columns are rescaled
/// to unit l2 norm so the norm bounds of the coherence checker hold.
struct PlantedSpec {
    int p = 100;
    int r_star = 16;
    int s = 10;
    int n_train = 500;
    int n_test = 2000;
    double sigma = 0.0;
    std::uint64_t seed = 0;
    bool normalize_columns = false;
};

/// Fixed 8-variable linear model y = x' beta + sigma * z with
/// beta = (3, 1.5, 0, 0, 2, 0, 0, 0) and cov(x_i, x_j) = 0.5^|i-j|.
struct LinearSpec {
    int n_train = 60;
    int n_test = 200;
    double sigma = 0.0;
    std::uint64_t seed = 0;
};

/// y = 10 sin(pi x1 x2) + 20 (x3 - 0.5)^2 + 10 x4 + 5 x5 + sigma * z with
/// standard Gaussian predictors; only the first five variables matter.
struct FriedmanSpec {
    int p = 50;
    int n_train = 500;
    int n_test = 2000;
    double sigma = 0.0;
    std::uint64_t seed = 0;
};

// Each generator is a pure function of its spec. Train and test come from
// disjoint substreams, the noise stream is independent of sigma (so
// responses at different noise levels share one noise realization, scaled),
// and the X draw does not move when only sigma changes.
std::pair<Dataset, Dataset> gen_planted(const PlantedSpec& spec);
std::pair<Dataset, Dataset> gen_linear(const LinearSpec& spec);
std::pair<Dataset, Dataset> gen_friedman(const FriedmanSpec& spec);

double friedman_response(const Eigen::VectorXd& x);

Eigen::VectorXd linear_beta();

}  // namespace relasso
