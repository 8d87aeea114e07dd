#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "relasso/select.hpp"

namespace relasso {

struct LinearFit {
    Eigen::VectorXd beta;
    double intercept = 0.0;
    double lambda_or_k = 0.0;
    int iterations = 0;
};

/// Cyclic coordinate descent for
///   (1/2n) |y - b0 - X beta|_2^2 + lambda |beta|_1
/// with an unpenalized intercept and exact soft-threshold updates. Stops
/// when the largest coordinate change in a sweep drops below tol or after
/// max_iter sweeps. Zero-variance columns are skipped (with a warning when
/// lambda is 0). An optional objective trace records the value after each
/// sweep.
LinearFit lasso_cd(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, double lambda,
                   double tol = 1e-8, int max_iter = 1000,
                   std::vector<std::string>* warnings = nullptr,
                   std::vector<double>* objective_trace = nullptr);

/// Smallest penalty that zeroes every coefficient:
/// max_j |(1/n) x_j' (y - mean(y))|.
double lasso_lambda_max(const Eigen::MatrixXd& X, const Eigen::VectorXd& y);

/// Orthogonal matching pursuit on mean-centered data: k rounds of picking
/// the column with the largest absolute inner product with the residual
/// (ties to the smaller index) and re-fitting least squares on the active
/// set. Stops early on a rank-deficient active set or a vanished residual;
/// `iterations` reports the rounds completed. The intercept absorbs the
/// removed means.
LinearFit omp(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, int k);

/// |beta| elementwise.
ImportanceVector linear_importance(const LinearFit& fit);

Eigen::VectorXd predict(const LinearFit& fit, const Eigen::MatrixXd& X);

// Validation-split tuning, mirroring the network protocol: candidates are
// scored by validation MSE on a seed-keyed split, then the winner is refit
// on all rows. lasso searches lambda_max * 2^-i for i = 0..10; omp searches
// k = 1..min(10, p).
LinearFit tune_lasso(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, double val_fraction,
                     std::uint64_t seed);
LinearFit tune_omp(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, double val_fraction,
                   std::uint64_t seed);

}  // namespace relasso
