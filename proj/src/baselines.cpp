#include "relasso/baselines.hpp"

#include <cmath>
#include <limits>

#include "relasso/errors.hpp"
#include "relasso/train.hpp"

namespace relasso {
namespace {

void check_xy(const Eigen::MatrixXd& X, const Eigen::VectorXd& y) {
    if (X.rows() == 0) throw ContractError("empty dataset");
    if (X.rows() != y.size()) {
        throw ContractError("X has " + std::to_string(X.rows()) + " rows but y has length " +
                            std::to_string(y.size()));
    }
}

double soft_threshold(double z, double t) {
    if (z > t) return z - t;
    if (z < -t) return z + t;
    return 0.0;
}

}  // namespace

double lasso_lambda_max(const Eigen::MatrixXd& X, const Eigen::VectorXd& y) {
    check_xy(X, y);
    const double inv_n = 1.0 / static_cast<double>(X.rows());
    const Eigen::VectorXd centered = y.array() - y.mean();
    double best = 0.0;
    // Same per-column arithmetic as the descent's first sweep, so that
    // lambda >= lambda_max zeroes every coordinate exactly.
    for (Eigen::Index j = 0; j < X.cols(); ++j) {
        best = std::max(best, std::abs(inv_n * X.col(j).dot(centered)));
    }
    return best;
}

LinearFit lasso_cd(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, double lambda, double tol,
                   int max_iter, std::vector<std::string>* warnings,
                   std::vector<double>* objective_trace) {
    check_xy(X, y);
    if (lambda < 0.0) throw ContractError("lambda must be nonnegative");
    if (tol <= 0.0) throw ContractError("tol must be positive");
    if (max_iter < 1) throw ContractError("max_iter must be positive");

    const Eigen::Index n = X.rows();
    const Eigen::Index p = X.cols();
    const double inv_n = 1.0 / static_cast<double>(n);

    // Per-coordinate curvature (1/n)|x_j|^2; zero marks a skipped column.
    // Columns with zero variance are unidentifiable next to the intercept
    // when lambda = 0, so they are frozen at zero.
    Eigen::VectorXd curvature(p);
    for (Eigen::Index j = 0; j < p; ++j) {
        curvature(j) = X.col(j).squaredNorm() * inv_n;
        const double mean = X.col(j).mean();
        const double variance = (X.col(j).array() - mean).square().sum() * inv_n;
        if (curvature(j) == 0.0 || (variance == 0.0 && lambda == 0.0)) {
            curvature(j) = 0.0;
            if (lambda == 0.0 && warnings != nullptr) {
                warnings->push_back("column " + std::to_string(j + 1) +
                                    " has zero variance; coordinate skipped");
            }
        }
    }

    LinearFit fit;
    fit.beta = Eigen::VectorXd::Zero(p);
    fit.intercept = y.mean();
    fit.lambda_or_k = lambda;
    Eigen::VectorXd residual = y.array() - fit.intercept;

    int sweep = 0;
    for (; sweep < max_iter; ++sweep) {
        double max_change = 0.0;
        for (Eigen::Index j = 0; j < p; ++j) {
            if (curvature(j) == 0.0) continue;
            const double old = fit.beta(j);
            const double rho = inv_n * X.col(j).dot(residual) + curvature(j) * old;
            const double updated = soft_threshold(rho, lambda) / curvature(j);
            if (updated != old) {
                residual -= (updated - old) * X.col(j);
                fit.beta(j) = updated;
            }
            max_change = std::max(max_change, std::abs(updated - old));
        }
        const double mean_res = residual.mean();
        if (mean_res != 0.0) {
            fit.intercept += mean_res;
            residual.array() -= mean_res;
            max_change = std::max(max_change, std::abs(mean_res));
        }
        if (objective_trace != nullptr) {
            objective_trace->push_back(0.5 * inv_n * residual.squaredNorm() +
                                       lambda * fit.beta.cwiseAbs().sum());
        }
        if (max_change < tol) {
            ++sweep;
            break;
        }
    }
    fit.iterations = sweep;
    return fit;
}

LinearFit omp(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, int k) {
    check_xy(X, y);
    const Eigen::Index n = X.rows();
    const Eigen::Index p = X.cols();
    if (k < 1 || k > std::min(n, p)) {
        throw ContractError("k must satisfy 1 <= k <= min(n, p) = " +
                            std::to_string(std::min(n, p)) + ", got " + std::to_string(k));
    }

    const Eigen::RowVectorXd col_means = X.colwise().mean();
    const Eigen::MatrixXd Xc = X.rowwise() - col_means;
    const double y_mean = y.mean();
    const Eigen::VectorXd yc = y.array() - y_mean;

    LinearFit fit;
    fit.beta = Eigen::VectorXd::Zero(p);
    fit.lambda_or_k = static_cast<double>(k);

    std::vector<int> active;
    std::vector<char> in_active(static_cast<std::size_t>(p), 0);
    Eigen::VectorXd residual = yc;
    Eigen::VectorXd coeffs;
    const double corr_floor = 1e-12 * std::max(1.0, yc.norm());

    for (int step = 0; step < k; ++step) {
        int best = -1;
        double best_corr = 0.0;
        for (Eigen::Index j = 0; j < p; ++j) {
            if (in_active[static_cast<std::size_t>(j)]) continue;
            const double corr = std::abs(Xc.col(j).dot(residual));
            if (corr > best_corr) {  // ties keep the smaller index
                best_corr = corr;
                best = static_cast<int>(j);
            }
        }
        if (best < 0 || best_corr <= corr_floor) break;  // residual exhausted

        active.push_back(best);
        in_active[static_cast<std::size_t>(best)] = 1;
        Eigen::MatrixXd active_cols(n, static_cast<Eigen::Index>(active.size()));
        for (std::size_t idx = 0; idx < active.size(); ++idx) {
            active_cols.col(static_cast<Eigen::Index>(idx)) = Xc.col(active[idx]);
        }
        const Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(active_cols);
        if (qr.rank() < static_cast<Eigen::Index>(active.size())) {
            active.pop_back();
            in_active[static_cast<std::size_t>(best)] = 0;
            break;  // rank-deficient active set
        }
        coeffs = qr.solve(yc);
        residual = yc - active_cols * coeffs;
    }

    for (std::size_t idx = 0; idx < active.size(); ++idx) {
        fit.beta(active[idx]) = coeffs(static_cast<Eigen::Index>(idx));
    }
    fit.intercept = y_mean - col_means * fit.beta;
    fit.iterations = static_cast<int>(active.size());
    return fit;
}

namespace {

struct SplitData {
    Eigen::MatrixXd Xtr, Xval;
    Eigen::VectorXd ytr, yval;
};

SplitData gather_split(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, double val_fraction,
                       std::uint64_t seed) {
    const auto [train_idx, val_idx] = validation_split(X.rows(), val_fraction, seed);
    SplitData s;
    s.Xtr.resize(static_cast<Eigen::Index>(train_idx.size()), X.cols());
    s.ytr.resize(static_cast<Eigen::Index>(train_idx.size()));
    for (std::size_t i = 0; i < train_idx.size(); ++i) {
        s.Xtr.row(static_cast<Eigen::Index>(i)) = X.row(train_idx[i]);
        s.ytr(static_cast<Eigen::Index>(i)) = y(train_idx[i]);
    }
    s.Xval.resize(static_cast<Eigen::Index>(val_idx.size()), X.cols());
    s.yval.resize(static_cast<Eigen::Index>(val_idx.size()));
    for (std::size_t i = 0; i < val_idx.size(); ++i) {
        s.Xval.row(static_cast<Eigen::Index>(i)) = X.row(val_idx[i]);
        s.yval(static_cast<Eigen::Index>(i)) = y(val_idx[i]);
    }
    return s;
}

double val_mse(const LinearFit& fit, const Eigen::MatrixXd& Xval, const Eigen::VectorXd& yval) {
    return (predict(fit, Xval) - yval).squaredNorm() / static_cast<double>(yval.size());
}

}  // namespace

LinearFit tune_lasso(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, double val_fraction,
                     std::uint64_t seed) {
    const SplitData s = gather_split(X, y, val_fraction, seed);
    const double lambda_max = lasso_lambda_max(s.Xtr, s.ytr);
    double best_lambda = lambda_max;
    double best = std::numeric_limits<double>::infinity();
    for (int i = 0; i <= 10; ++i) {
        const double lambda = lambda_max * std::pow(2.0, -i);
        const double score = val_mse(lasso_cd(s.Xtr, s.ytr, lambda), s.Xval, s.yval);
        if (score < best) {
            best = score;
            best_lambda = lambda;
        }
    }
    return lasso_cd(X, y, best_lambda);
}

LinearFit tune_omp(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, double val_fraction,
                   std::uint64_t seed) {
    const SplitData s = gather_split(X, y, val_fraction, seed);
    const int k_max = static_cast<int>(std::min<Eigen::Index>(
        10, std::min(s.Xtr.rows(), s.Xtr.cols())));
    int best_k = 1;
    double best = std::numeric_limits<double>::infinity();
    for (int k = 1; k <= k_max; ++k) {
        const double score = val_mse(omp(s.Xtr, s.ytr, k), s.Xval, s.yval);
        if (score < best) {
            best = score;
            best_k = k;
        }
    }
    return omp(X, y, best_k);
}

ImportanceVector linear_importance(const LinearFit& fit) {
    ImportanceVector imp;
    imp.values = fit.beta.cwiseAbs();
    imp.source = ImportanceSource::kLinearCoefficient;
    return imp;
}

Eigen::VectorXd predict(const LinearFit& fit, const Eigen::MatrixXd& X) {
    if (X.cols() != fit.beta.size()) {
        throw ContractError("X has " + std::to_string(X.cols()) + " columns, expected " +
                            std::to_string(fit.beta.size()));
    }
    return (X * fit.beta).array() + fit.intercept;
}

}  // namespace relasso
