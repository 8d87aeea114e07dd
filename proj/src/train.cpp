#include "relasso/train.hpp"

#include <cmath>
#include <numeric>
#include <string>

#include "relasso/errors.hpp"
#include "relasso/rng.hpp"

namespace relasso {
namespace {

constexpr double kDivergenceCap = 1e12;

void check_config(const TrainConfig& c) {
    if (c.lambda < 0.0) throw ContractError("lambda must be nonnegative");
    if (c.width < 1) throw ContractError("width must be positive");
    if (c.learning_rate <= 0.0) throw ContractError("learning_rate must be positive");
    if (c.epochs < 1) throw ContractError("epochs must be positive");
    if (c.batch_size < 1) throw ContractError("batch_size must be at least 1");
    if (c.adam.beta1 <= 0.0 || c.adam.beta1 >= 1.0 || c.adam.beta2 <= 0.0 || c.adam.beta2 >= 1.0) {
        throw ContractError("adam betas must lie in (0, 1)");
    }
    if (c.adam.eps <= 0.0) throw ContractError("adam eps must be positive");
    for (int h : c.hidden_widths) {
        if (h < 1) throw ContractError("hidden widths must be positive");
    }
}

void check_data(const Eigen::MatrixXd& X, const Eigen::VectorXd& y) {
    if (X.rows() == 0) throw ContractError("empty dataset");
    if (X.rows() != y.size()) {
        throw ContractError("X has " + std::to_string(X.rows()) + " rows but y has length " +
                            std::to_string(y.size()));
    }
}

double sign0(double v) { return v > 0.0 ? 1.0 : (v < 0.0 ? -1.0 : 0.0); }

// Fan-in uniform init; biases start at zero. Entries are drawn in flat
// parameter order (biases skipped) so the layout is reproducible.
DeepNet init_net(int p, const TrainConfig& config, Rng& rng) {
    const double w_bound = 1.0 / std::sqrt(static_cast<double>(p));
    Eigen::MatrixXd W(p, config.width);
    for (Eigen::Index j = 0; j < W.cols(); ++j) {
        for (Eigen::Index i = 0; i < W.rows(); ++i) W(i, j) = rng.uniform(-w_bound, w_bound);
    }
    Eigen::VectorXd b = Eigen::VectorXd::Zero(config.width);

    std::vector<DeepNet::Layer> hidden;
    int fan_in = config.width;
    for (int h : config.hidden_widths) {
        const double bound = 1.0 / std::sqrt(static_cast<double>(fan_in));
        Eigen::MatrixXd M(fan_in, h);
        for (Eigen::Index j = 0; j < M.cols(); ++j) {
            for (Eigen::Index i = 0; i < M.rows(); ++i) M(i, j) = rng.uniform(-bound, bound);
        }
        hidden.push_back({std::move(M), Eigen::VectorXd::Zero(h)});
        fan_in = h;
    }

    const double out_bound = 1.0 / std::sqrt(static_cast<double>(fan_in));
    Eigen::VectorXd out(fan_in);
    for (Eigen::Index j = 0; j < out.size(); ++j) out(j) = rng.uniform(-out_bound, out_bound);

    return DeepNet{std::move(W), std::move(b), std::move(hidden), std::move(out)};
}

Eigen::Index param_count(const DeepNet& net) {
    Eigen::Index n = net.W.size() + net.b.size() + net.out.size();
    for (const auto& layer : net.hidden) n += layer.M.size() + layer.c.size();
    return n;
}

}  // namespace

double mse(const Eigen::VectorXd& predicted, const Eigen::VectorXd& truth) {
    if (predicted.size() != truth.size()) {
        throw ContractError("prediction/truth length mismatch");
    }
    if (predicted.size() == 0) throw ContractError("empty dataset");
    return (predicted - truth).squaredNorm() / static_cast<double>(truth.size());
}

double penalized_loss(const TwoLayerNet& net, const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                      double lambda) {
    check_data(X, y);
    return mse(forward_batch(net, X), y) + lambda * net.W.cwiseAbs().sum();
}

double penalized_loss(const DeepNet& net, const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                      double lambda) {
    check_data(X, y);
    return mse(forward_deep_batch(net, X), y) + lambda * net.W.cwiseAbs().sum();
}

DeepGrad gradient(const DeepNet& net, const Eigen::MatrixXd& X_batch,
                  const Eigen::VectorXd& y_batch, double lambda) {
    check_data(X_batch, y_batch);
    if (X_batch.cols() != net.W.rows()) {
        throw ContractError("X_batch has " + std::to_string(X_batch.cols()) +
                            " columns, expected " + std::to_string(net.W.rows()));
    }
    const Eigen::Index m = X_batch.rows();

    // Forward pass, keeping each layer's activations for the backward sweep.
    std::vector<Eigen::MatrixXd> acts;
    acts.reserve(net.hidden.size() + 1);
    acts.push_back(((X_batch * net.W).rowwise() + net.b.transpose()).cwiseMax(0.0));
    for (const auto& layer : net.hidden) {
        acts.push_back(((acts.back() * layer.M).rowwise() + layer.c.transpose()).cwiseMax(0.0));
    }
    // The residual uses the canonical prediction path, so a batch the net
    // fits exactly yields an exactly zero gradient.
    const Eigen::VectorXd residual = forward_deep_batch(net, X_batch) - y_batch;
    const Eigen::VectorXd dy = (2.0 / static_cast<double>(m)) * residual;

    DeepGrad g;
    g.out = acts.back().transpose() * dy;
    // H > 0 is exactly the relu'(z) = 1 region under relu'(0) := 0.
    Eigen::MatrixXd dH = dy * net.out.transpose();
    for (std::size_t k = net.hidden.size(); k-- > 0;) {
        const Eigen::MatrixXd dZ =
            ((acts[k + 1].array() > 0.0).cast<double>() * dH.array()).matrix();
        g.hidden.insert(g.hidden.begin(),
                        {acts[k].transpose() * dZ, dZ.colwise().sum().transpose()});
        dH = dZ * net.hidden[k].M.transpose();
    }
    const Eigen::MatrixXd dZ0 = ((acts[0].array() > 0.0).cast<double>() * dH.array()).matrix();
    g.W = X_batch.transpose() * dZ0 + lambda * net.W.unaryExpr(&sign0);
    g.b = dZ0.colwise().sum().transpose();
    return g;
}

AdamState make_adam_state(Eigen::Index n) {
    return AdamState{Eigen::ArrayXd::Zero(n), Eigen::ArrayXd::Zero(n)};
}

void adam_step(Eigen::ArrayXd& params, const Eigen::ArrayXd& grads, AdamState& state, int t,
               double lr, const AdamHyper& hyper) {
    if (t < 1) throw ContractError("adam step index must be >= 1");
    if (grads.size() != params.size() || state.m.size() != params.size() ||
        state.v.size() != params.size()) {
        throw ContractError("adam state/gradient shape mismatch");
    }
    state.m = hyper.beta1 * state.m + (1.0 - hyper.beta1) * grads;
    state.v = hyper.beta2 * state.v + (1.0 - hyper.beta2) * grads.square();
    const double m_corr = 1.0 - std::pow(hyper.beta1, t);
    const double v_corr = 1.0 - std::pow(hyper.beta2, t);
    params -= lr * (state.m / m_corr) / ((state.v / v_corr).sqrt() + hyper.eps);
}

Eigen::ArrayXd pack(const DeepNet& net) {
    Eigen::ArrayXd flat(param_count(net));
    Eigen::Index at = 0;
    auto put = [&](const double* data, Eigen::Index n) {
        flat.segment(at, n) = Eigen::Map<const Eigen::ArrayXd>(data, n);
        at += n;
    };
    put(net.W.data(), net.W.size());
    put(net.b.data(), net.b.size());
    for (const auto& layer : net.hidden) {
        put(layer.M.data(), layer.M.size());
        put(layer.c.data(), layer.c.size());
    }
    put(net.out.data(), net.out.size());
    return flat;
}

Eigen::ArrayXd pack(const DeepGrad& grad) {
    Eigen::Index total = grad.W.size() + grad.b.size() + grad.out.size();
    for (const auto& layer : grad.hidden) total += layer.M.size() + layer.c.size();
    Eigen::ArrayXd flat(total);
    Eigen::Index at = 0;
    auto put = [&](const double* data, Eigen::Index n) {
        flat.segment(at, n) = Eigen::Map<const Eigen::ArrayXd>(data, n);
        at += n;
    };
    put(grad.W.data(), grad.W.size());
    put(grad.b.data(), grad.b.size());
    for (const auto& layer : grad.hidden) {
        put(layer.M.data(), layer.M.size());
        put(layer.c.data(), layer.c.size());
    }
    put(grad.out.data(), grad.out.size());
    return flat;
}

void unpack(const Eigen::ArrayXd& flat, DeepNet& net) {
    if (flat.size() != param_count(net)) throw ContractError("flat parameter size mismatch");
    Eigen::Index at = 0;
    auto take = [&](double* data, Eigen::Index n) {
        Eigen::Map<Eigen::ArrayXd>(data, n) = flat.segment(at, n);
        at += n;
    };
    take(net.W.data(), net.W.size());
    take(net.b.data(), net.b.size());
    for (auto& layer : net.hidden) {
        take(layer.M.data(), layer.M.size());
        take(layer.c.data(), layer.c.size());
    }
    take(net.out.data(), net.out.size());
}

FitResult fit(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, const TrainConfig& config,
              const std::optional<std::pair<Eigen::MatrixXd, Eigen::VectorXd>>& val) {
    check_config(config);
    check_data(X, y);
    const Eigen::Index n = X.rows();
    const int p = static_cast<int>(X.cols());

    Rng init_rng = Rng::stream(config.seed, stream::kInit);
    Rng shuffle_rng = Rng::stream(config.seed, stream::kShuffle);
    DeepNet net = init_net(p, config, init_rng);

    Eigen::ArrayXd params = pack(net);
    AdamState state = make_adam_state(params.size());
    int t = 0;

    std::vector<int> order(static_cast<std::size_t>(n));
    std::iota(order.begin(), order.end(), 0);
    const Eigen::Index batch = std::min<Eigen::Index>(config.batch_size, n);
    Eigen::MatrixXd Xb(batch, p);
    Eigen::VectorXd yb(batch);

    std::vector<double> trace;
    trace.reserve(static_cast<std::size_t>(config.epochs));
    for (int epoch = 0; epoch < config.epochs; ++epoch) {
        shuffle_rng.shuffle(order);
        for (Eigen::Index start = 0; start < n; start += batch) {
            const Eigen::Index m = std::min(batch, n - start);
            for (Eigen::Index i = 0; i < m; ++i) {
                Xb.row(i) = X.row(order[static_cast<std::size_t>(start + i)]);
                yb(i) = y(order[static_cast<std::size_t>(start + i)]);
            }
            const DeepGrad g = gradient(net, Xb.topRows(m), yb.head(m), config.lambda);
            adam_step(params, pack(g), state, ++t, config.learning_rate, config.adam);
            unpack(params, net);
        }
        const double loss = penalized_loss(net, X, y, config.lambda);
        if (!std::isfinite(loss) || loss > kDivergenceCap) {
            throw DivergenceError(
                "training diverged at epoch " + std::to_string(epoch + 1) + " (loss " +
                    std::to_string(loss) + ")",
                epoch + 1);
        }
        trace.push_back(loss);
    }

    FitResult result{std::move(net), std::move(trace), std::nullopt, config};
    if (val.has_value()) {
        result.val_mse = mse(forward_deep_batch(result.net, val->first), val->second);
    }
    return result;
}

std::pair<std::vector<int>, std::vector<int>> validation_split(Eigen::Index n,
                                                               double val_fraction,
                                                               std::uint64_t seed) {
    if (val_fraction <= 0.0 || val_fraction >= 1.0) {
        throw ContractError("val_fraction must lie strictly between 0 and 1");
    }
    const Eigen::Index n_val =
        std::max<Eigen::Index>(1, static_cast<Eigen::Index>(val_fraction * static_cast<double>(n)));
    const Eigen::Index n_train = n - n_val;
    if (n_train < 1) throw ContractError("validation split leaves no training rows");

    std::vector<int> order(static_cast<std::size_t>(n));
    std::iota(order.begin(), order.end(), 0);
    Rng split_rng = Rng::stream(seed, stream::kSplit);
    split_rng.shuffle(order);
    std::vector<int> train_idx(order.begin(), order.begin() + n_train);
    std::vector<int> val_idx(order.begin() + n_train, order.end());
    return {std::move(train_idx), std::move(val_idx)};
}

std::pair<TrainConfig, FitResult> grid_search(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                                              const Grid& grid, double val_fraction,
                                              std::uint64_t seed, const TrainConfig& base) {
    check_data(X, y);
    if (grid.lambdas.empty() || grid.widths.empty() || grid.learning_rates.empty() ||
        grid.epoch_counts.empty()) {
        throw ContractError("grid has an empty candidate list");
    }

    const auto [train_idx, val_idx] = validation_split(X.rows(), val_fraction, seed);
    const Eigen::Index n_train = static_cast<Eigen::Index>(train_idx.size());
    const Eigen::Index n_val = static_cast<Eigen::Index>(val_idx.size());

    Eigen::MatrixXd Xtr(n_train, X.cols()), Xval(n_val, X.cols());
    Eigen::VectorXd ytr(n_train), yval(n_val);
    for (Eigen::Index i = 0; i < n_train; ++i) {
        Xtr.row(i) = X.row(train_idx[static_cast<std::size_t>(i)]);
        ytr(i) = y(train_idx[static_cast<std::size_t>(i)]);
    }
    for (Eigen::Index i = 0; i < n_val; ++i) {
        Xval.row(i) = X.row(val_idx[static_cast<std::size_t>(i)]);
        yval(i) = y(val_idx[static_cast<std::size_t>(i)]);
    }

    std::optional<std::pair<TrainConfig, FitResult>> best;
    std::uint64_t cell = 0;
    for (double lambda : grid.lambdas) {
        for (int width : grid.widths) {
            for (double lr : grid.learning_rates) {
                for (int epochs : grid.epoch_counts) {
                    TrainConfig config = base;
                    config.lambda = lambda;
                    config.width = width;
                    config.learning_rate = lr;
                    config.epochs = epochs;
                    config.seed = mix_seed(seed, cell++);
                    try {
                        FitResult res = fit(Xtr, ytr, config, std::make_pair(Xval, yval));
                        if (!best || *res.val_mse < *best->second.val_mse) {
                            best.emplace(config, std::move(res));
                        }
                    } catch (const DivergenceError&) {
                        // skipped; the cell simply does not compete
                    } catch (const ContractError&) {
                        // invalid cell (e.g. epochs = 0 sentinel); skip as well
                    }
                }
            }
        }
    }
    if (!best) throw DivergenceError("every grid cell diverged", 0);
    return std::move(*best);
}

}  // namespace relasso
