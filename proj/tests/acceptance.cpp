// Acceptance suite: one numbered criterion per run (or "all"). Each
// criterion prints a single PASS/FAIL line with the measured quantities; the
// process exits nonzero if any requested criterion fails.

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <cstring>
#include <iostream>
#include <numeric>
#include <sstream>
#include <string>
#include <vector>

#include "relasso/baselines.hpp"
#include "relasso/harness.hpp"
#include "relasso/match.hpp"
#include "relasso/rng.hpp"
#include "relasso/select.hpp"
#include "relasso/synth.hpp"
#include "relasso/train.hpp"

using namespace relasso;

namespace {

constexpr std::uint64_t kTrainTag = 0xC1;

double table_mean(const std::vector<AggregateRow>& table, const std::string& method, double sigma,
                  const std::string& metric) {
    for (const AggregateRow& row : table) {
        if (row.method == method && row.sigma == sigma && row.metric == metric) return row.mean;
    }
    return std::nan("");
}

void report(int criterion, bool pass, const std::string& detail) {
    std::cout << (pass ? "[PASS]" : "[FAIL]") << " criterion " << criterion << ": " << detail
              << std::endl;
}

std::string fmt(double v) {
    std::ostringstream out;
    out.precision(4);
    out << v;
    return out.str();
}

// ---- criterion 1: noiseless identifiability --------------------------------

bool criterion1() {
    int good = 0;
    int select_good = 0;
    std::vector<double> d2_values;
    for (std::uint64_t seed = 1; seed <= 10; ++seed) {
        PlantedSpec spec;
        spec.p = 50;
        spec.r_star = 3;
        spec.s = 5;
        spec.n_train = 2000;
        spec.n_test = 10;
        spec.sigma = 0.0;
        spec.seed = seed;
        spec.normalize_columns = true;
        const auto [train, test] = gen_planted(spec);

        TrainConfig config;
        config.lambda = 0.005;
        config.width = 20;
        config.learning_rate = 0.01;
        config.epochs = 500;
        config.batch_size = 32;
        config.seed = mix_seed(seed, kTrainTag);
        const FitResult res = fit(train.X, train.y, config);

        const TwoLayerNet canon = canonicalize(res.two_layer());
        const MatchResult match = match_networks(canon, *train.planted_net);
        d2_values.push_back(match.D2);

        const auto [selected, degenerate] =
            cluster_select(importance(res.net), ClusterMethod::kGmm2, seed);
        const bool select_ok = !degenerate && selected == *train.true_support;
        select_good += select_ok;
        if (match.D2 <= 0.15 && select_ok) ++good;
    }
    const double worst = *std::max_element(d2_values.begin(), d2_values.end());
    const double best = *std::min_element(d2_values.begin(), d2_values.end());
    const bool pass = good >= 8;
    report(1, pass,
           "noiseless recovery D2<=0.15 and exact gmm support in " + std::to_string(good) +
               "/10 seeds, need >= 8 (exact support alone: " + std::to_string(select_good) +
               "/10; D2 range [" + fmt(best) + ", " + fmt(worst) + "])");
    return pass;
}

// ---- criterion 2: NN-generated table at sigma 0 -----------------------------

bool criterion2() {
    ExperimentConfig config;
    config.generator = GeneratorKind::kPlanted;
    config.planted = PlantedSpec{100, 16, 10, 500, 2000, 0.0, 0};
    config.sigmas = {0.0};
    config.methods = {Method::kNn2};
    config.grid = desk_grid();
    config.replications = 10;
    config.base_seed = 1;
    config.batch_size = 32;
    const ExperimentResult result = run_experiment(config);
    const double tp = table_mean(result.table, "nn2", 0.0, "TP");
    const double fp = table_mean(result.table, "nn2", 0.0, "FP");
    const double auc = table_mean(result.table, "nn2", 0.0, "AUC");
    const bool pass = tp >= 9.0 && fp <= 3.0 && auc >= 0.97;
    report(2, pass,
           "nn2 on the planted benchmark: mean TP " + fmt(tp) + " (need >= 9), FP " +
               fmt(fp) + " (need <= 3), AUC " + fmt(auc) +
               " (need >= 0.97) over 10 replications");
    return pass;
}

// ---- criterion 3: linear table -----------------------------------------------

bool criterion3() {
    ExperimentConfig lasso;
    lasso.generator = GeneratorKind::kLinear;
    lasso.sigmas = {0.0, 1.0};
    lasso.methods = {Method::kLasso};
    lasso.replications = 20;
    lasso.base_seed = 1;
    const ExperimentResult lasso_result = run_experiment(lasso);

    int exact0 = 0, exact1 = 0;
    for (const ReplicationRecord& rep : lasso_result.raw) {
        for (const MethodRecord& rec : rep.records) {
            if (rec.failed || !rec.tp || !rec.fp) continue;
            if (*rec.tp == 3 && *rec.fp == 0) {
                if (rec.sigma == 0.0) ++exact0;
                if (rec.sigma == 1.0) ++exact1;
            }
        }
    }

    ExperimentConfig nn;
    nn.generator = GeneratorKind::kLinear;
    nn.sigmas = {0.0};
    nn.methods = {Method::kNn2};
    nn.grid = desk_grid();
    nn.replications = 10;
    nn.base_seed = 1;
    nn.batch_size = 32;
    const ExperimentResult nn_result = run_experiment(nn);
    const double auc = table_mean(nn_result.table, "nn2", 0.0, "AUC");

    const bool pass = exact0 >= 18 && exact1 >= 18 && auc >= 0.95;
    report(3, pass,
           "lasso exact TP=3/FP=0 in " + std::to_string(exact0) + "/20 (sigma 0) and " +
               std::to_string(exact1) + "/20 (sigma 1); nn2 mean AUC " + fmt(auc) +
               " (need >= 0.95)");
    return pass;
}

// ---- criterion 4: friedman table at sigma 0 ----------------------------------

bool criterion4() {
    ExperimentConfig config;
    config.generator = GeneratorKind::kFriedman;
    config.friedman = FriedmanSpec{50, 500, 2000, 0.0, 0};
    config.sigmas = {0.0};
    config.methods = {Method::kNn2, Method::kLasso};
    config.grid = desk_grid();
    config.replications = 10;
    config.base_seed = 1;
    config.batch_size = 32;
    const ExperimentResult result = run_experiment(config);
    const double nn_tp = table_mean(result.table, "nn2", 0.0, "TP");
    const double nn_auc = table_mean(result.table, "nn2", 0.0, "AUC");
    const double lasso_tp = table_mean(result.table, "lasso", 0.0, "TP");
    const bool pass = nn_tp >= 4.0 && nn_auc >= 0.97 && lasso_tp <= 4.5;
    report(4, pass,
           "friedman: nn2 mean TP " + fmt(nn_tp) + " (need >= 4), AUC " +
               fmt(nn_auc) + " (need >= 0.97); lasso mean TP " +
               fmt(lasso_tp) + " (need <= 4.5)");
    return pass;
}

// ---- criterion 5: noise degrades the AUC -------------------------------------

bool criterion5() {
    double auc_clean = 0.0, auc_noisy = 0.0;
    for (std::uint64_t seed = 1; seed <= 10; ++seed) {
        for (double sigma : {0.0, 5.0}) {
            PlantedSpec spec;
            spec.p = 50;
            spec.r_star = 3;
            spec.s = 5;
            spec.n_train = 2000;
            spec.n_test = 10;
            spec.sigma = sigma;
            spec.seed = seed;  // paired: only the noise scale differs
            spec.normalize_columns = true;
            const auto [train, test] = gen_planted(spec);

            TrainConfig config;
            config.lambda = 0.005;
            config.width = 20;
            config.learning_rate = 0.01;
            config.epochs = 500;
            config.batch_size = 32;
            config.seed = mix_seed(seed, kTrainTag);
            const FitResult res = fit(train.X, train.y, config);
            const double auc = auc_score(importance(res.net), *train.true_support);
            (sigma == 0.0 ? auc_clean : auc_noisy) += auc / 10.0;
        }
    }
    const bool pass = auc_noisy < auc_clean;
    report(5, pass,
           "mean AUC " + fmt(auc_noisy) + " at sigma 5 vs " +
               fmt(auc_clean) + " at sigma 0 over 10 paired seeds (need strict drop)");
    return pass;
}

// ---- criterion 6: gradient vs finite differences ------------------------------

bool criterion6() {
    Rng rng(1234);
    auto random_deep = [&](int p, int r) {
        Eigen::MatrixXd W(p, r);
        for (int i = 0; i < p; ++i)
            for (int j = 0; j < r; ++j) W(i, j) = rng.normal();
        Eigen::VectorXd b(r), out(r);
        for (int j = 0; j < r; ++j) {
            b(j) = rng.normal();
            out(j) = rng.normal();
        }
        return make_deep(W, b, {}, out);
    };
    auto well_separated = [](const DeepNet& net, const Eigen::MatrixXd& X) {
        for (int i = 0; i < X.rows(); ++i) {
            const Eigen::VectorXd z = net.W.transpose() * X.row(i).transpose() + net.b;
            for (int j = 0; j < z.size(); ++j) {
                if (std::abs(z(j)) <= 1e-3) return false;
            }
        }
        return net.W.cwiseAbs().minCoeff() > 1e-3;
    };

    double worst = 0.0;
    int done = 0;
    while (done < 200) {
        const int p = 3 + static_cast<int>(rng.bounded(4));
        const int r = 2 + static_cast<int>(rng.bounded(3));
        const int m = 3 + static_cast<int>(rng.bounded(4));
        DeepNet net = random_deep(p, r);
        Eigen::MatrixXd X(m, p);
        for (int i = 0; i < m; ++i)
            for (int j = 0; j < p; ++j) X(i, j) = rng.normal();
        if (!well_separated(net, X)) continue;
        ++done;
        Eigen::VectorXd y(m);
        for (int i = 0; i < m; ++i) y(i) = rng.normal();
        const double lambda = 0.05;
        const Eigen::ArrayXd analytic = pack(gradient(net, X, y, lambda));
        const Eigen::ArrayXd params = pack(net);
        for (Eigen::Index coord = 0; coord < params.size(); ++coord) {
            Eigen::ArrayXd up = params, down = params;
            up(coord) += 1e-5;
            down(coord) -= 1e-5;
            DeepNet probe = net;
            unpack(up, probe);
            const double hi = penalized_loss(probe, X, y, lambda);
            unpack(down, probe);
            const double lo = penalized_loss(probe, X, y, lambda);
            const double numeric = (hi - lo) / 2e-5;
            const double rel = std::abs(analytic(coord) - numeric) /
                               std::max(1.0, std::abs(numeric));
            worst = std::max(worst, rel);
        }
    }
    const bool pass = worst <= 1e-4;
    report(6, pass,
           "max relative gradient error " + fmt(worst) +
               " over 200 filtered points (need <= 1e-4)");
    return pass;
}

// ---- criterion 7: assignment equals brute force --------------------------------

bool criterion7() {
    Rng rng(777);
    auto random_canonical = [&](int p, int r) {
        Eigen::MatrixXd W(p, r);
        Eigen::VectorXd a(r), b(r);
        for (int j = 0; j < r; ++j) {
            for (int i = 0; i < p; ++i) W(i, j) = rng.normal();
            a(j) = rng.sign();
            b(j) = rng.normal();
        }
        return make_two_layer(W, a, b);
    };
    double worst = 0.0;
    for (int t = 0; t < 200; ++t) {
        const int r = 2 + static_cast<int>(rng.bounded(5));
        const int p = 2 + static_cast<int>(rng.bounded(5));
        const auto a = random_canonical(p, r);
        const auto b = random_canonical(p, r);
        const MatchResult fast = match_networks(a, b);
        const MatchResult slow = brute_force_match(a, b);
        worst = std::max(worst, std::abs(fast.D1 - slow.D1));
        worst = std::max(worst, std::abs(fast.D2 - slow.D2));
    }
    const bool pass = worst <= 1e-12;
    report(7, pass,
           "assignment vs factorial brute force: max |difference| " + fmt(worst) +
               " over 200 pairs, r in 2..6 (need <= 1e-12)");
    return pass;
}

// ---- criterion 8: l1/l2 distance inequality -------------------------------------

bool criterion8() {
    Rng rng(808);
    int violations = 0;
    int checked = 0;
    double worst_gap = -1e9;
    while (checked < 500) {
        const int r = 1 + static_cast<int>(rng.bounded(5));
        const int p = 4 + static_cast<int>(rng.bounded(10));

        Eigen::MatrixXd Wstar = Eigen::MatrixXd::Zero(p, r);
        Eigen::VectorXd astar(r), bstar(r);
        for (int j = 0; j < r; ++j) {
            const int support = 1 + static_cast<int>(rng.bounded(3));
            for (int k = 0; k < support; ++k) {
                Wstar(static_cast<int>(rng.bounded(p)), j) = rng.normal();
            }
            astar(j) = rng.sign();
            bstar(j) = 0.3 * rng.normal();
            const double mass = std::sqrt(Wstar.col(j).squaredNorm() + bstar(j) * bstar(j));
            if (mass > 1.0) {
                Wstar.col(j) /= mass * 1.0001;
                bstar(j) /= mass * 1.0001;
            }
        }
        Eigen::MatrixXd W = Wstar;
        Eigen::VectorXd a = astar, b = bstar;
        for (int j = 0; j < r; ++j) {
            if (rng.uniform01() < 0.3) a(j) = -a(j);
            if (rng.uniform01() < 0.5) {
                W(static_cast<int>(rng.bounded(p)), j) += 0.5 * rng.normal();
            }
            b(j) += 0.2 * rng.normal();
        }
        const double ref_mass = Wstar.cwiseAbs().sum() + bstar.cwiseAbs().sum();
        const double cand_mass = W.cwiseAbs().sum() + b.cwiseAbs().sum();
        if (cand_mass > ref_mass && cand_mass > 0.0) {
            const double shrink = ref_mass / cand_mass;
            W *= shrink;
            b *= shrink;
        }
        int S = 0;
        for (int i = 0; i < p; ++i)
            for (int j = 0; j < r; ++j) S += (W(i, j) != 0.0) + (Wstar(i, j) != 0.0);
        for (int j = 0; j < r; ++j) S += (b(j) != 0.0) + (bstar(j) != 0.0);
        if (S == 0) continue;
        ++checked;

        const MatchResult res =
            match_networks(make_two_layer(W, a, b), make_two_layer(Wstar, astar, bstar));
        const double gap = res.D1 - 2.0 * std::sqrt(static_cast<double>(S)) * res.D2;
        worst_gap = std::max(worst_gap, gap);
        if (gap > 1e-9) ++violations;
    }
    const bool pass = violations == 0;
    report(8, pass,
           "D1 <= 2 sqrt(S) D2 on 500 precondition-satisfying pairs: " +
               std::to_string(violations) + " violations (worst slack " +
               fmt(worst_gap) + ", need <= 1e-9)");
    return pass;
}

// ---- criterion 9: rank AUC vs pairwise brute force ------------------------------

bool criterion9() {
    Rng rng(909);
    double worst = 0.0;
    for (int t = 0; t < 500; ++t) {
        const int p = 3 + static_cast<int>(rng.bounded(25));
        ImportanceVector imp;
        imp.values.resize(p);
        const bool with_ties = t % 2 == 0;
        for (int i = 0; i < p; ++i) {
            imp.values(i) = with_ties ? 0.5 * static_cast<double>(rng.bounded(5))
                                      : std::abs(rng.normal());
        }
        const int support_size = 1 + static_cast<int>(rng.bounded(static_cast<std::uint64_t>(p - 1)));
        std::vector<int> all(static_cast<std::size_t>(p));
        std::iota(all.begin(), all.end(), 0);
        rng.shuffle(all);
        std::vector<int> support(all.begin(), all.begin() + support_size);

        // pairwise brute force
        double wins = 0.0;
        long pairs = 0;
        std::vector<char> is_pos(static_cast<std::size_t>(p), 0);
        for (int i : support) is_pos[static_cast<std::size_t>(i)] = 1;
        for (int i = 0; i < p; ++i) {
            if (!is_pos[static_cast<std::size_t>(i)]) continue;
            for (int j = 0; j < p; ++j) {
                if (is_pos[static_cast<std::size_t>(j)]) continue;
                ++pairs;
                if (imp.values(i) > imp.values(j)) {
                    wins += 1.0;
                } else if (imp.values(i) == imp.values(j)) {
                    wins += 0.5;
                }
            }
        }
        const double brute = wins / static_cast<double>(pairs);
        const double rank_auc = auc_score(imp, support);
        worst = std::max(worst, std::abs(rank_auc - brute));

        const auto points = roc_curve(imp, support);
        double area = 0.0;
        for (std::size_t i = 1; i < points.size(); ++i) {
            area += (points[i].first - points[i - 1].first) *
                    (points[i].second + points[i - 1].second) * 0.5;
        }
        worst = std::max(worst, std::abs(area - rank_auc));
    }
    const bool pass = worst <= 1e-12;
    report(9, pass,
           "rank AUC vs pairwise brute force and trapezoidal ROC area: max |difference| " +
               fmt(worst) + " over 500 instances (need <= 1e-12)");
    return pass;
}

// ---- criterion 10: lasso correctness --------------------------------------------

bool criterion10() {
    Rng rng(1010);
    auto random_matrix = [&](int n, int p) {
        Eigen::MatrixXd X(n, p);
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < p; ++j) X(i, j) = rng.normal();
        return X;
    };

    // KKT bounds on 100 random problems
    bool kkt_ok = true;
    for (int t = 0; t < 100; ++t) {
        const int n = 15 + static_cast<int>(rng.bounded(40));
        const int p = 2 + static_cast<int>(rng.bounded(15));
        const Eigen::MatrixXd X = random_matrix(n, p);
        const Eigen::VectorXd y = random_matrix(n, 1);
        const double lambda = 0.005 + 0.4 * rng.uniform01();
        const double tol = 1e-10;
        const LinearFit fit = lasso_cd(X, y, lambda, tol, 200000);
        const Eigen::VectorXd residual = y - predict(fit, X);
        for (int j = 0; j < p; ++j) {
            const double g = X.col(j).dot(residual) / n;
            const double slack = 10.0 * tol * X.col(j).norm();
            if (fit.beta(j) != 0.0) {
                const double sign = fit.beta(j) > 0.0 ? 1.0 : -1.0;
                kkt_ok = kkt_ok && std::abs(g - lambda * sign) <= slack;
            } else {
                kkt_ok = kkt_ok && std::abs(g) <= lambda + slack;
            }
        }
    }

    // closed-form agreement on orthonormal designs
    double worst_ortho = 0.0;
    for (int t = 0; t < 20; ++t) {
        const int n = 8;
        Eigen::MatrixXd X = random_matrix(n, n);
        const Eigen::HouseholderQR<Eigen::MatrixXd> qr(X);
        // columns with norm sqrt(n) so (1/n) X'X = I
        X = std::sqrt(static_cast<double>(n)) * (qr.householderQ() *
                                                 Eigen::MatrixXd::Identity(n, n));
        Eigen::VectorXd y = random_matrix(n, 1);
        y.array() -= y.mean();
        const double lambda = 0.02 + 0.3 * rng.uniform01();
        const LinearFit fit = lasso_cd(X, y, lambda, 1e-13, 200000);
        for (int j = 0; j < n; ++j) {
            const double rho = X.col(j).dot((y.array() - fit.intercept).matrix()) / n;
            const double expected =
                rho > lambda ? rho - lambda : (rho < -lambda ? rho + lambda : 0.0);
            worst_ortho = std::max(worst_ortho, std::abs(fit.beta(j) - expected));
        }
    }

    // the null-model threshold is exact
    bool null_ok = true;
    for (int t = 0; t < 20; ++t) {
        const int n = 10 + static_cast<int>(rng.bounded(30));
        const int p = 2 + static_cast<int>(rng.bounded(10));
        const Eigen::MatrixXd X = random_matrix(n, p);
        Eigen::VectorXd y = random_matrix(n, 1);
        y.array() += 2.0;
        const double lambda_max = lasso_lambda_max(X, y);
        const LinearFit fit = lasso_cd(X, y, lambda_max * (1.0 + 1e-12));
        null_ok = null_ok && fit.beta.cwiseAbs().maxCoeff() == 0.0;
    }

    const bool pass = kkt_ok && worst_ortho <= 1e-10 && null_ok;
    report(10, pass,
           std::string("lasso: KKT ") + (kkt_ok ? "ok" : "VIOLATED") +
               ", orthonormal closed-form max error " + fmt(worst_ortho) +
               " (need <= 1e-10), null threshold " + (null_ok ? "exact" : "VIOLATED"));
    return pass;
}

}  // namespace

int main(int argc, char** argv) {
    std::vector<int> wanted;
    if (argc < 2 || std::strcmp(argv[1], "all") == 0) {
        for (int i = 1; i <= 10; ++i) wanted.push_back(i);
    } else {
        for (int i = 1; i < argc; ++i) wanted.push_back(std::atoi(argv[i]));
    }

    bool all_pass = true;
    for (int criterion : wanted) {
        bool pass = false;
        switch (criterion) {
            case 1: pass = criterion1(); break;
            case 2: pass = criterion2(); break;
            case 3: pass = criterion3(); break;
            case 4: pass = criterion4(); break;
            case 5: pass = criterion5(); break;
            case 6: pass = criterion6(); break;
            case 7: pass = criterion7(); break;
            case 8: pass = criterion8(); break;
            case 9: pass = criterion9(); break;
            case 10: pass = criterion10(); break;
            default:
                std::cerr << "unknown criterion " << criterion << std::endl;
                return 2;
        }
        all_pass = all_pass && pass;
    }
    return all_pass ? 0 : 1;
}
