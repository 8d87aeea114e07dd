#include "relasso/match.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include "relasso/errors.hpp"

namespace relasso {
namespace {

void require_sign(double a) {
    if (a != 1.0 && a != -1.0) {
        throw ContractError("outer coefficient " + std::to_string(a) +
                            " is not a sign; canonicalize first");
    }
}

struct Neuron {
    Eigen::VectorXd w;
    double a;
    double b;
    bool pad;
};

std::vector<Neuron> padded_neurons(const TwoLayerNet& net, int width, int input_dim) {
    std::vector<Neuron> out;
    out.reserve(static_cast<std::size_t>(width));
    for (int j = 0; j < net.width(); ++j) {
        out.push_back({net.W.col(j), net.a(j), net.b(j), false});
    }
    for (int j = net.width(); j < width; ++j) {
        out.push_back({Eigen::VectorXd::Zero(input_dim), 1.0, 0.0, true});
    }
    return out;
}

double neuron_d1(const Neuron& x, const Neuron& y) {
    if (x.pad && y.pad) return 0.0;
    if (x.pad || y.pad) {
        const Neuron& real = x.pad ? y : x;
        return real.w.cwiseAbs().sum() + std::abs(real.b);
    }
    return pair_d1(x.w, x.a, x.b, y.w, y.a, y.b);
}

double neuron_d2(const Neuron& x, const Neuron& y) {
    if (x.pad && y.pad) return 0.0;
    if (x.pad || y.pad) {
        const Neuron& real = x.pad ? y : x;
        return std::sqrt(real.w.squaredNorm() + real.b * real.b);
    }
    return pair_d2(x.w, x.a, x.b, y.w, y.a, y.b);
}

bool neuron_sign_agree(const Neuron& x, const Neuron& y) {
    if (x.pad || y.pad) return true;
    return x.a == y.a;
}

std::pair<std::vector<Neuron>, std::vector<Neuron>> prepare(const TwoLayerNet& a,
                                                            const TwoLayerNet& b) {
    if (!is_canonical(a) || !is_canonical(b)) {
        throw ContractError("match requires canonical nets (a in {-1, +1}); canonicalize first");
    }
    if (a.input_dim() != b.input_dim()) {
        throw ContractError("input dimensions differ: " + std::to_string(a.input_dim()) +
                            " vs " + std::to_string(b.input_dim()));
    }
    const int width = std::max(a.width(), b.width());
    return {padded_neurons(a, width, a.input_dim()), padded_neurons(b, width, b.input_dim())};
}

MatchResult build_result(const std::vector<Neuron>& lhs, const std::vector<Neuron>& rhs,
                         const std::vector<int>& perm1, const std::vector<int>& perm2) {
    const std::size_t width = rhs.size();
    MatchResult result;
    result.permutation = perm2;
    result.per_neuron.resize(width);
    double d1_total = 0.0;
    double d2_total_sq = 0.0;
    for (std::size_t j = 0; j < width; ++j) {
        const double d1 = neuron_d1(lhs[static_cast<std::size_t>(perm1[j])], rhs[j]);
        const double d2 = neuron_d2(lhs[static_cast<std::size_t>(perm2[j])], rhs[j]);
        d1_total += d1;
        d2_total_sq += d2 * d2;
        result.per_neuron[j] = {d1, d2,
                                neuron_sign_agree(lhs[static_cast<std::size_t>(perm2[j])], rhs[j])};
    }
    result.D1 = d1_total;
    result.D2 = std::sqrt(d2_total_sq);
    return result;
}

}  // namespace

double pair_d1(const Eigen::VectorXd& w1, double a1, double b1, const Eigen::VectorXd& w2,
               double a2, double b2) {
    require_sign(a1);
    require_sign(a2);
    if (w1.size() != w2.size()) throw ContractError("weight vectors have different lengths");
    if (a1 == a2) return (w1 - w2).cwiseAbs().sum() + std::abs(b1 - b2);
    return w1.cwiseAbs().sum() + w2.cwiseAbs().sum() + std::abs(b1) + std::abs(b2);
}

double pair_d2(const Eigen::VectorXd& w1, double a1, double b1, const Eigen::VectorXd& w2,
               double a2, double b2) {
    require_sign(a1);
    require_sign(a2);
    if (w1.size() != w2.size()) throw ContractError("weight vectors have different lengths");
    if (a1 == a2) return std::sqrt((w1 - w2).squaredNorm() + (b1 - b2) * (b1 - b2));
    return 1.0;
}

std::pair<std::vector<int>, double> solve_assignment(const Eigen::MatrixXd& cost) {
    if (cost.rows() != cost.cols()) throw ContractError("assignment needs a square cost matrix");
    const int n = static_cast<int>(cost.rows());
    if (n == 0) return {{}, 0.0};

    constexpr double kInf = std::numeric_limits<double>::infinity();
    // Shortest-augmenting-path assignment with potentials; 1-based arrays
    // with column 0 as the virtual start.
    std::vector<double> u(n + 1, 0.0), v(n + 1, 0.0), minv(n + 1);
    std::vector<int> p(n + 1, 0), way(n + 1, 0);
    for (int i = 1; i <= n; ++i) {
        p[0] = i;
        int j0 = 0;
        std::fill(minv.begin(), minv.end(), kInf);
        std::vector<char> used(n + 1, 0);
        do {
            used[j0] = 1;
            const int i0 = p[j0];
            int j1 = 0;
            double delta = kInf;
            for (int j = 1; j <= n; ++j) {
                if (used[j]) continue;
                const double cur = cost(i0 - 1, j - 1) - u[i0] - v[j];
                if (cur < minv[j]) {
                    minv[j] = cur;
                    way[j] = j0;
                }
                if (minv[j] < delta) {
                    delta = minv[j];
                    j1 = j;
                }
            }
            for (int j = 0; j <= n; ++j) {
                if (used[j]) {
                    u[p[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
        } while (p[j0] != 0);
        do {
            const int j1 = way[j0];
            p[j0] = p[j1];
            j0 = j1;
        } while (j0 != 0);
    }

    std::vector<int> row_of_col(static_cast<std::size_t>(n));
    double total = 0.0;
    for (int j = 1; j <= n; ++j) {
        row_of_col[static_cast<std::size_t>(j - 1)] = p[j] - 1;
        total += cost(p[j] - 1, j - 1);
    }
    return {std::move(row_of_col), total};
}

MatchResult match_networks(const TwoLayerNet& a, const TwoLayerNet& b) {
    auto [lhs, rhs] = prepare(a, b);
    const int width = static_cast<int>(rhs.size());

    Eigen::MatrixXd c1(width, width), c2sq(width, width);
    for (int i = 0; i < width; ++i) {
        for (int j = 0; j < width; ++j) {
            c1(i, j) = neuron_d1(lhs[static_cast<std::size_t>(i)], rhs[static_cast<std::size_t>(j)]);
            const double d2 =
                neuron_d2(lhs[static_cast<std::size_t>(i)], rhs[static_cast<std::size_t>(j)]);
            c2sq(i, j) = d2 * d2;
        }
    }
    const auto perm1 = solve_assignment(c1).first;
    const auto perm2 = solve_assignment(c2sq).first;
    return build_result(lhs, rhs, perm1, perm2);
}

MatchResult brute_force_match(const TwoLayerNet& a, const TwoLayerNet& b) {
    auto [lhs, rhs] = prepare(a, b);
    const int width = static_cast<int>(rhs.size());
    if (width > 8) {
        throw ContractError("brute-force matching is limited to width 8, got " +
                            std::to_string(width));
    }
    if (width == 0) return MatchResult{};

    std::vector<int> perm(static_cast<std::size_t>(width));
    std::iota(perm.begin(), perm.end(), 0);
    std::vector<int> best1 = perm, best2 = perm;
    double best_d1 = std::numeric_limits<double>::infinity();
    double best_d2sq = std::numeric_limits<double>::infinity();
    do {
        double d1 = 0.0, d2sq = 0.0;
        for (int j = 0; j < width; ++j) {
            const Neuron& x = lhs[static_cast<std::size_t>(perm[static_cast<std::size_t>(j)])];
            const Neuron& y = rhs[static_cast<std::size_t>(j)];
            d1 += neuron_d1(x, y);
            const double d2 = neuron_d2(x, y);
            d2sq += d2 * d2;
        }
        if (d1 < best_d1) {
            best_d1 = d1;
            best1 = perm;
        }
        if (d2sq < best_d2sq) {
            best_d2sq = d2sq;
            best2 = perm;
        }
    } while (std::next_permutation(perm.begin(), perm.end()));
    return build_result(lhs, rhs, best1, best2);
}

bool AssumptionReport::all_ok() const {
    if (!coherence_ok) return false;
    for (std::size_t j = 0; j < norm_lower_ok.size(); ++j) {
        if (!norm_lower_ok[j] || !norm_upper_ok[j] || !bias_ok[j]) return false;
    }
    return true;
}

AssumptionReport check_assumption1(const TwoLayerNet& net, double B, double omega) {
    if (!is_canonical(net)) throw ContractError("assumption check expects a canonical net");
    if (B < 1.0) throw ContractError("B must be at least 1");
    if (omega <= 0.0) throw ContractError("omega must be positive");

    const int r = net.width();
    AssumptionReport report;
    report.B = B;
    report.omega = omega;
    report.norm_lower_ok.resize(r);
    report.norm_upper_ok.resize(r);
    report.bias_ok.resize(r);
    report.zero_norm.resize(r);

    Eigen::VectorXd norms(r);
    for (int j = 0; j < r; ++j) {
        norms(j) = net.W.col(j).norm();
        report.zero_norm[j] = norms(j) == 0.0;
        report.norm_lower_ok[j] = norms(j) >= 1.0;
        report.norm_upper_ok[j] = norms(j) <= B;
        report.bias_ok[j] = std::abs(net.b(j)) <= B;
    }

    double max_coherence = 0.0;
    for (int j = 0; j < r; ++j) {
        if (norms(j) == 0.0) continue;
        for (int k = j + 1; k < r; ++k) {
            if (norms(k) == 0.0) continue;
            const double coherence =
                std::abs(net.W.col(j).dot(net.W.col(k))) / (norms(j) * norms(k));
            max_coherence = std::max(max_coherence, coherence);
        }
    }
    report.max_coherence = max_coherence;
    report.coherence_ok = max_coherence <= std::pow(static_cast<double>(r), -omega);
    return report;
}

}  // namespace relasso
