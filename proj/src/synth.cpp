#include "relasso/synth.hpp"

#include <cmath>
#include <numeric>

#include "relasso/errors.hpp"
#include "relasso/rng.hpp"

namespace relasso {
namespace {

constexpr double kPi = 3.14159265358979323846;

Eigen::MatrixXd sample_gaussian(Eigen::Index n, Eigen::Index p, Rng& rng) {
    Eigen::MatrixXd X(n, p);
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index j = 0; j < p; ++j) X(i, j) = rng.normal();
    }
    return X;
}

Eigen::VectorXd sample_noise(Eigen::Index n, Rng& rng) {
    Eigen::VectorXd z(n);
    for (Eigen::Index i = 0; i < n; ++i) z(i) = rng.normal();
    return z;
}

void check_counts(int n_train, int n_test) {
    if (n_train < 1) throw ContractError("n_train must be positive");
    if (n_test < 0) throw ContractError("n_test must be nonnegative");
}

}  // namespace

Eigen::VectorXd linear_beta() {
    Eigen::VectorXd beta(8);
    beta << 3.0, 1.5, 0.0, 0.0, 2.0, 0.0, 0.0, 0.0;
    return beta;
}

double friedman_response(const Eigen::VectorXd& x) {
    if (x.size() < 5) throw ContractError("friedman response needs at least 5 variables");
    return 10.0 * std::sin(kPi * x(0) * x(1)) + 20.0 * (x(2) - 0.5) * (x(2) - 0.5) +
           10.0 * x(3) + 5.0 * x(4);
}

std::pair<Dataset, Dataset> gen_planted(const PlantedSpec& spec) {
    if (spec.p < 1 || spec.r_star < 1) throw ContractError("p and r_star must be positive");
    if (spec.s < 1 || spec.s > spec.p) throw ContractError("s must satisfy 1 <= s <= p");
    if (spec.sigma < 0.0) throw ContractError("sigma must be nonnegative");
    check_counts(spec.n_train, spec.n_test);

    Rng net_rng = Rng::stream(spec.seed, stream::kNet);
    Eigen::MatrixXd W = Eigen::MatrixXd::Zero(spec.p, spec.r_star);
    for (int i = 0; i < spec.s; ++i) {
        for (int j = 0; j < spec.r_star; ++j) W(i, j) = net_rng.uniform01();
    }
    if (spec.normalize_columns) {
        for (int j = 0; j < spec.r_star; ++j) {
            const double norm = W.col(j).norm();
            if (norm > 0.0) W.col(j) /= norm;
        }
    }
    for (int j = 0; j < spec.r_star; ++j) {
        if (W.col(j).norm() == 0.0) throw ContractError("planted neuron has a zero weight vector");
    }
    Eigen::VectorXd b(spec.r_star);
    for (int j = 0; j < spec.r_star; ++j) b(j) = net_rng.uniform01();
    Eigen::VectorXd a(spec.r_star);
    for (int j = 0; j < spec.r_star; ++j) a(j) = net_rng.sign();
    TwoLayerNet truth = make_two_layer(std::move(W), std::move(a), std::move(b));

    std::vector<int> support(static_cast<std::size_t>(spec.s));
    std::iota(support.begin(), support.end(), 0);

    auto make_part = [&](Eigen::Index n, std::uint64_t x_tag, std::uint64_t noise_tag) {
        Rng x_rng = Rng::stream(spec.seed, x_tag);
        Rng noise_rng = Rng::stream(spec.seed, noise_tag);
        Dataset part;
        part.X = sample_gaussian(n, spec.p, x_rng);
        part.y = forward_batch(truth, part.X) + spec.sigma * sample_noise(n, noise_rng);
        part.true_support = support;
        part.planted_net = truth;
        return part;
    };
    return {make_part(spec.n_train, stream::kXTrain, stream::kNoiseTrain),
            make_part(spec.n_test, stream::kXTest, stream::kNoiseTest)};
}

std::pair<Dataset, Dataset> gen_linear(const LinearSpec& spec) {
    if (spec.sigma < 0.0) throw ContractError("sigma must be nonnegative");
    check_counts(spec.n_train, spec.n_test);

    const int p = 8;
    Eigen::MatrixXd cov(p, p);
    for (int i = 0; i < p; ++i) {
        for (int j = 0; j < p; ++j) cov(i, j) = std::pow(0.5, std::abs(i - j));
    }
    const Eigen::MatrixXd chol = Eigen::LLT<Eigen::MatrixXd>(cov).matrixL();
    const Eigen::VectorXd beta = linear_beta();

    auto make_part = [&](Eigen::Index n, std::uint64_t x_tag, std::uint64_t noise_tag) {
        Rng x_rng = Rng::stream(spec.seed, x_tag);
        Rng noise_rng = Rng::stream(spec.seed, noise_tag);
        Dataset part;
        part.X = sample_gaussian(n, p, x_rng) * chol.transpose();
        part.y = part.X * beta + spec.sigma * sample_noise(n, noise_rng);
        part.true_support = std::vector<int>{0, 1, 4};
        return part;
    };
    return {make_part(spec.n_train, stream::kXTrain, stream::kNoiseTrain),
            make_part(spec.n_test, stream::kXTest, stream::kNoiseTest)};
}

std::pair<Dataset, Dataset> gen_friedman(const FriedmanSpec& spec) {
    if (spec.p < 5) throw ContractError("friedman generator needs p >= 5");
    if (spec.sigma < 0.0) throw ContractError("sigma must be nonnegative");
    check_counts(spec.n_train, spec.n_test);

    auto make_part = [&](Eigen::Index n, std::uint64_t x_tag, std::uint64_t noise_tag) {
        Rng x_rng = Rng::stream(spec.seed, x_tag);
        Rng noise_rng = Rng::stream(spec.seed, noise_tag);
        Dataset part;
        part.X = sample_gaussian(n, spec.p, x_rng);
        part.y.resize(n);
        for (Eigen::Index i = 0; i < n; ++i) {
            part.y(i) = friedman_response(part.X.row(i).transpose());
        }
        part.y += spec.sigma * sample_noise(n, noise_rng);
        part.true_support = std::vector<int>{0, 1, 2, 3, 4};
        return part;
    };
    return {make_part(spec.n_train, stream::kXTrain, stream::kNoiseTrain),
            make_part(spec.n_test, stream::kXTest, stream::kNoiseTest)};
}

}  // namespace relasso
