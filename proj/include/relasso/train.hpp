#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <optional>
#include <utility>
#include <vector>

#include "relasso/net.hpp"

namespace relasso {

struct AdamHyper {
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
};

struct TrainConfig {
    double lambda = 0.0;         // l1 penalty on the input-layer weights
    int width = 20;              // neurons in the input layer
    double learning_rate = 0.01;
    int epochs = 100;
    int batch_size = 32;
    std::uint64_t seed = 0;
    AdamHyper adam;
    std::vector<int> hidden_widths;  // empty -> plain two-layer net
};

struct FitResult {
    DeepNet net;
    std::vector<double> train_loss_trace;  // one penalized-loss value per epoch
    std::optional<double> val_mse;
    TrainConfig config_used;

    // Only valid when the net has no hidden stack.
    TwoLayerNet two_layer() const { return to_two_layer(net); }
};

struct Grid {
    std::vector<double> lambdas;
    std::vector<int> widths;
    std::vector<double> learning_rates;
    std::vector<int> epoch_counts;
};

// Gradient with the same tensor layout as DeepNet.
struct DeepGrad {
    Eigen::MatrixXd W;
    Eigen::VectorXd b;
    std::vector<DeepNet::Layer> hidden;
    Eigen::VectorXd out;
};

/// Mean squared error plus lambda * l1-norm of the input-layer matrix.
/// The biases, outer coefficients and inner layers are not penalized.
double penalized_loss(const TwoLayerNet& net, const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                      double lambda);
double penalized_loss(const DeepNet& net, const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                      double lambda);

double mse(const Eigen::VectorXd& predicted, const Eigen::VectorXd& truth);

/// Exact gradient of the smooth part (with relu'(0) := 0) plus the
/// lambda * sign(W) subgradient on the input layer (sign(0) := 0).
DeepGrad gradient(const DeepNet& net, const Eigen::MatrixXd& X_batch,
                  const Eigen::VectorXd& y_batch, double lambda);

struct AdamState {
    Eigen::ArrayXd m;
    Eigen::ArrayXd v;
};

AdamState make_adam_state(Eigen::Index n);

/// One Adam update with bias correction; t is the 1-based step index.
void adam_step(Eigen::ArrayXd& params, const Eigen::ArrayXd& grads, AdamState& state, int t,
               double lr, const AdamHyper& hyper = {});

// Flat parameter order: W column-major, b, then per hidden layer (M
// column-major, bias), then out. pack/unpack are exact inverses.
Eigen::ArrayXd pack(const DeepNet& net);
Eigen::ArrayXd pack(const DeepGrad& grad);
void unpack(const Eigen::ArrayXd& flat, DeepNet& net);

/// Trains with Adam over shuffled minibatches. Deterministic given
/// (X, y, config, val): initialization and shuffling use substreams of
/// config.seed. Throws DivergenceError (with the epoch) on non-finite or
/// exploding loss.
FitResult fit(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, const TrainConfig& config,
              const std::optional<std::pair<Eigen::MatrixXd, Eigen::VectorXd>>& val = {});

/// Seed-keyed permutation split of {0..n-1}: the first (1 - val_fraction)
/// share goes to training, the rest to validation (at least one row each).
std::pair<std::vector<int>, std::vector<int>> validation_split(Eigen::Index n,
                                                               double val_fraction,
                                                               std::uint64_t seed);

/// Splits (X, y) once by a seed-derived permutation, fits every grid cell on
/// the training part and returns the cell with minimal validation MSE. Ties
/// break by enumeration order: lambdas outermost, then widths, then learning
/// rates, then epoch counts. Cell k trains with seed mix_seed(seed, k).
/// Diverged cells are skipped; throws only if every cell diverges.
std::pair<TrainConfig, FitResult> grid_search(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                                              const Grid& grid, double val_fraction,
                                              std::uint64_t seed,
                                              const TrainConfig& base = TrainConfig{});

}  // namespace relasso
