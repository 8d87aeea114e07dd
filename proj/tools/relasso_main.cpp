// relasso command-line tool: data generation, model fitting, variable
// selection, network matching, ROC export and full experiment replication.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "relasso/baselines.hpp"
#include "relasso/config.hpp"
#include "relasso/data_io.hpp"
#include "relasso/errors.hpp"
#include "relasso/harness.hpp"
#include "relasso/match.hpp"
#include "relasso/rng.hpp"
#include "relasso/select.hpp"
#include "relasso/synth.hpp"
#include "relasso/train.hpp"

using namespace relasso;
using nlohmann::json;

namespace {

// Parse "key=value" positional tokens of the gen subcommand.
std::map<std::string, std::string> parse_pairs(const std::vector<std::string>& tokens) {
    std::map<std::string, std::string> out;
    for (const std::string& token : tokens) {
        const auto eq = token.find('=');
        if (eq == std::string::npos) {
            throw ContractError("expected key=value, got '" + token + "'");
        }
        out[token.substr(0, eq)] = token.substr(eq + 1);
    }
    return out;
}

double pair_double(const std::map<std::string, std::string>& pairs, const std::string& key,
                   double fallback) {
    const auto hit = pairs.find(key);
    return hit == pairs.end() ? fallback : std::stod(hit->second);
}

json support_json(const std::vector<int>& support) {
    json arr = json::array();
    for (int i : support) arr.push_back(i + 1);  // 1-based, matching x1..xp
    return arr;
}

std::vector<int> support_from_json(const json& arr) {
    std::vector<int> out;
    for (const auto& v : arr) out.push_back(v.get<int>() - 1);
    return out;
}

void write_text(const std::string& path, const std::string& text) {
    std::ofstream out(path);
    if (!out) throw ContractError("cannot write file: " + path);
    out << text;
}

std::string read_text(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ContractError("cannot open file: " + path);
    return std::string(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

ImportanceVector importance_from_file(const std::string& net_path, const std::string& fit_path) {
    if (!net_path.empty()) {
        const DeepNet net = load_deep(net_path);
        return importance(net);
    }
    const json doc = json::parse(read_text(fit_path));
    LinearFit fit;
    fit.beta.resize(static_cast<Eigen::Index>(doc.at("beta").size()));
    for (Eigen::Index i = 0; i < fit.beta.size(); ++i) fit.beta(i) = doc.at("beta")[i];
    fit.intercept = doc.at("intercept").get<double>();
    return linear_importance(fit);
}

int run_gen(const std::string& kind, const std::vector<std::string>& tokens, std::uint64_t seed,
            const std::string& out_dir) {
    const auto pairs = parse_pairs(tokens);
    Dataset train, test;
    json meta;
    meta["generator"] = kind;
    meta["seed"] = seed;

    if (kind == "planted") {
        PlantedSpec spec;
        spec.p = static_cast<int>(pair_double(pairs, "p", spec.p));
        spec.r_star = static_cast<int>(pair_double(pairs, "r", spec.r_star));
        spec.s = static_cast<int>(pair_double(pairs, "s", spec.s));
        spec.n_train = static_cast<int>(pair_double(pairs, "n", spec.n_train));
        spec.n_test = static_cast<int>(pair_double(pairs, "n_test", spec.n_test));
        spec.sigma = pair_double(pairs, "sigma", spec.sigma);
        spec.normalize_columns = pair_double(pairs, "normalize_columns", 0.0) != 0.0;
        spec.seed = seed;
        std::cout << "# generator = planted, p = " << spec.p << ", r = " << spec.r_star
                  << ", s = " << spec.s << ", n = " << spec.n_train
                  << ", n_test = " << spec.n_test << ", sigma = " << spec.sigma
                  << ", normalize_columns = " << spec.normalize_columns << ", seed = " << seed
                  << "\n";
        std::tie(train, test) = gen_planted(spec);
        meta["p"] = spec.p;
        meta["sigma"] = spec.sigma;
        meta["planted_net"] = json::parse(to_json(*train.planted_net));
    } else if (kind == "linear") {
        LinearSpec spec;
        spec.n_train = static_cast<int>(pair_double(pairs, "n", spec.n_train));
        spec.n_test = static_cast<int>(pair_double(pairs, "n_test", spec.n_test));
        spec.sigma = pair_double(pairs, "sigma", spec.sigma);
        spec.seed = seed;
        std::cout << "# generator = linear, n = " << spec.n_train << ", n_test = " << spec.n_test
                  << ", sigma = " << spec.sigma << ", seed = " << seed << "\n";
        std::tie(train, test) = gen_linear(spec);
        meta["p"] = 8;
        meta["sigma"] = spec.sigma;
    } else if (kind == "friedman") {
        FriedmanSpec spec;
        spec.p = static_cast<int>(pair_double(pairs, "p", spec.p));
        spec.n_train = static_cast<int>(pair_double(pairs, "n", spec.n_train));
        spec.n_test = static_cast<int>(pair_double(pairs, "n_test", spec.n_test));
        spec.sigma = pair_double(pairs, "sigma", spec.sigma);
        spec.seed = seed;
        std::cout << "# generator = friedman, p = " << spec.p << ", n = " << spec.n_train
                  << ", n_test = " << spec.n_test << ", sigma = " << spec.sigma
                  << ", seed = " << seed << "\n";
        std::tie(train, test) = gen_friedman(spec);
        meta["p"] = spec.p;
        meta["sigma"] = spec.sigma;
    } else {
        throw ContractError("unknown generator '" + kind + "'");
    }

    if (train.true_support) meta["true_support"] = support_json(*train.true_support);
    if (!out_dir.empty()) std::filesystem::create_directories(out_dir);
    const std::string prefix = out_dir.empty() ? "" : out_dir + "/";
    write_dataset_csv(train, prefix + "train.csv");
    write_dataset_csv(test, prefix + "test.csv");
    write_text(prefix + "meta.json", meta.dump(2));
    std::cout << "wrote " << prefix << "train.csv, " << prefix << "test.csv, " << prefix
              << "meta.json\n";
    return 0;
}

int run_fit(const std::string& train_path, const std::string& val_path,
            const std::string& method, const std::string& config_path, double lambda, int width,
            double lr, int epochs, int batch, std::uint64_t seed, const std::string& out_path) {
    const RawTable table = load_csv(train_path, {"y", {}});
    const Dataset train = dataset_from_table(table);

    if (method == "lasso" || method == "omp") {
        LinearFit fit;
        if (method == "lasso") {
            if (lambda >= 0.0) {
                fit = lasso_cd(train.X, train.y, lambda);
                std::cout << "# method = lasso, lambda = " << lambda << "\n";
            } else {
                fit = tune_lasso(train.X, train.y, 0.2, seed);
                std::cout << "# method = lasso, lambda = " << fit.lambda_or_k
                          << " (validation-tuned), seed = " << seed << "\n";
            }
        } else {
            if (width > 0) {
                fit = omp(train.X, train.y, width);
                std::cout << "# method = omp, k = " << width << "\n";
            } else {
                fit = tune_omp(train.X, train.y, 0.2, seed);
                std::cout << "# method = omp, k = " << fit.lambda_or_k
                          << " (validation-tuned), seed = " << seed << "\n";
            }
        }
        json doc;
        doc["beta"] = json::array();
        for (Eigen::Index i = 0; i < fit.beta.size(); ++i) doc["beta"].push_back(fit.beta(i));
        doc["intercept"] = fit.intercept;
        doc["lambda_or_k"] = fit.lambda_or_k;
        doc["iterations"] = fit.iterations;
        write_text(out_path, doc.dump(2));
        std::cout << "wrote " << out_path << "\n";
        return 0;
    }

    if (method != "nn2" && method != "nn3") {
        throw ContractError("unknown method '" + method + "' (expected nn2|nn3|lasso|omp)");
    }
    TrainConfig config;
    if (!config_path.empty()) {
        const KeyValueConfig kv = KeyValueConfig::from_file(config_path);
        config.lambda = kv.get_double("lambda", config.lambda);
        config.width = kv.get_int("width", config.width);
        config.learning_rate = kv.get_double("learning_rate", config.learning_rate);
        config.epochs = kv.get_int("epochs", config.epochs);
        config.batch_size = kv.get_int("batch_size", config.batch_size);
        config.seed = kv.get_u64("seed", config.seed);
    }
    if (lambda >= 0.0) config.lambda = lambda;
    if (width > 0) config.width = width;
    if (lr > 0.0) config.learning_rate = lr;
    if (epochs > 0) config.epochs = epochs;
    if (batch > 0) config.batch_size = batch;
    config.seed = seed;
    if (method == "nn3") config.hidden_widths = {10};

    std::cout << "# method = " << method << ", lambda = " << config.lambda
              << ", width = " << config.width << ", learning_rate = " << config.learning_rate
              << ", epochs = " << config.epochs << ", batch_size = " << config.batch_size
              << ", seed = " << config.seed << "\n";

    std::optional<std::pair<Eigen::MatrixXd, Eigen::VectorXd>> val;
    if (!val_path.empty()) {
        const Dataset v = dataset_from_table(load_csv(val_path, {"y", {}}));
        val = std::make_pair(v.X, v.y);
    }
    const FitResult result = fit(train.X, train.y, config, val);

    json doc = json::parse(to_json(result.net));
    doc["train_loss_trace"] = result.train_loss_trace;
    if (result.val_mse) doc["val_mse"] = *result.val_mse;
    write_text(out_path, doc.dump());
    std::cout << "final penalized loss = " << result.train_loss_trace.back() << "\n";
    if (result.val_mse) std::cout << "validation mse = " << *result.val_mse << "\n";
    std::cout << "wrote " << out_path << "\n";
    return 0;
}

int run_select(const std::string& net_path, const std::string& fit_path, double threshold,
               int topk, const std::string& cluster, std::uint64_t seed,
               const std::string& truth_path, const std::string& out_path,
               const std::string& csv_path) {
    const ImportanceVector imp = importance_from_file(net_path, fit_path);

    std::vector<int> selected;
    bool degenerate = false;
    std::string method;
    if (threshold >= 0.0) {
        selected = threshold_select(imp, threshold);
        method = "threshold";
    } else if (topk > 0) {
        selected = topk_select(imp, topk);
        method = "topk";
    } else {
        const ClusterMethod cm =
            cluster == "kmeans" ? ClusterMethod::kKMeans2 : ClusterMethod::kGmm2;
        std::tie(selected, degenerate) = cluster_select(imp, cm, seed);
        method = "cluster-" + cluster;
    }
    std::cout << "# selection = " << method << ", seed = " << seed << "\n";

    json doc;
    doc["method"] = method;
    doc["degenerate"] = degenerate;
    doc["selected"] = support_json(selected);
    json imp_arr = json::array();
    for (Eigen::Index i = 0; i < imp.values.size(); ++i) imp_arr.push_back(imp.values(i));
    doc["importance"] = imp_arr;

    if (!truth_path.empty()) {
        const json meta = json::parse(read_text(truth_path));
        const std::vector<int> truth = support_from_json(meta.at("true_support"));
        const auto [tp, fp] = evaluate_selection(selected, truth);
        doc["tp"] = tp;
        doc["fp"] = fp;
        if (!truth.empty() && truth.size() < static_cast<std::size_t>(imp.values.size())) {
            doc["auc"] = auc_score(imp, truth);
        }
    }
    if (!csv_path.empty()) {
        std::vector<char> chosen(static_cast<std::size_t>(imp.values.size()), 0);
        for (int i : selected) chosen[static_cast<std::size_t>(i)] = 1;
        std::string csv = "variable,importance,selected\n";
        char buf[64];
        for (Eigen::Index i = 0; i < imp.values.size(); ++i) {
            std::snprintf(buf, sizeof(buf), "%lld,%.17g,%d\n", static_cast<long long>(i + 1),
                          imp.values(i), static_cast<int>(chosen[static_cast<std::size_t>(i)]));
            csv += buf;
        }
        write_text(csv_path, csv);
        std::cout << "wrote " << csv_path << "\n";
    }
    const std::string text = doc.dump(2);
    if (out_path.empty()) {
        std::cout << text << "\n";
    } else {
        write_text(out_path, text);
        std::cout << "wrote " << out_path << "\n";
    }
    return 0;
}

int run_match(const std::string& a_path, const std::string& b_path, double drop_tol,
              const std::string& per_neuron_path) {
    std::cout << "# match, drop_tol = " << drop_tol << "\n";
    const TwoLayerNet a = canonicalize(load_two_layer(a_path), drop_tol);
    const TwoLayerNet b = canonicalize(load_two_layer(b_path), drop_tol);
    const MatchResult res = match_networks(a, b);
    std::cout << "D1=" << res.D1 << " D2=" << res.D2 << "\n";
    std::cout << "permutation:";
    for (int j : res.permutation) std::cout << " " << j;
    std::cout << "\n";
    if (!per_neuron_path.empty()) {
        std::string csv = "neuron,d1,d2,sign_agree\n";
        for (std::size_t j = 0; j < res.per_neuron.size(); ++j) {
            csv += std::to_string(j + 1) + "," + std::to_string(res.per_neuron[j].d1) + "," +
                   std::to_string(res.per_neuron[j].d2) + "," +
                   (res.per_neuron[j].sign_agree ? "1" : "0") + "\n";
        }
        write_text(per_neuron_path, csv);
        std::cout << "wrote " << per_neuron_path << "\n";
    }
    return 0;
}

int run_roc(const std::string& net_path, const std::string& fit_path,
            const std::string& truth_path, const std::string& out_path) {
    std::cout << "# roc\n";
    const ImportanceVector imp = importance_from_file(net_path, fit_path);
    const json meta = json::parse(read_text(truth_path));
    const std::vector<int> truth = support_from_json(meta.at("true_support"));
    const auto points = roc_curve(imp, truth);
    std::string csv = "fpr,tpr\n";
    char buf[64];
    for (const auto& [fpr, tpr] : points) {
        std::snprintf(buf, sizeof(buf), "%.17g,%.17g\n", fpr, tpr);
        csv += buf;
    }
    if (out_path.empty()) {
        std::cout << csv;
    } else {
        write_text(out_path, csv);
        std::cout << "wrote " << out_path << " (auc = " << auc_score(imp, truth) << ")\n";
    }
    return 0;
}

int run_experiment_cmd(const std::string& config_path, bool full_grid, const std::string& out_dir,
                       std::optional<std::uint64_t> seed) {
    KeyValueConfig kv = config_path.empty() ? KeyValueConfig::from_string("")
                                            : KeyValueConfig::from_file(config_path);
    ExperimentConfig config = experiment_from_config(kv);
    if (full_grid && !kv.has("lambdas")) config.grid = full_table_grid();
    if (!out_dir.empty()) config.output_dir = out_dir;
    if (seed) config.base_seed = *seed;

    std::cout << "# resolved experiment configuration\n" << describe(config);
    const ExperimentResult result = run_experiment(config);
    std::cout << aggregate_csv(result.table);
    if (!config.output_dir.empty()) {
        std::cout << "wrote " << config.output_dir << "/aggregate.csv and raw.csv\n";
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"LASSO-regularized two-layer ReLU networks: training, identifiability "
                 "distances and variable selection"};
    app.require_subcommand(1);

    // gen
    auto* gen = app.add_subcommand("gen", "generate a synthetic dataset (train/test csv + meta)");
    std::string gen_kind;
    std::vector<std::string> gen_pairs;
    std::uint64_t gen_seed = 0;
    std::string gen_out;
    gen->add_flag_callback("--planted", [&] { gen_kind = "planted"; },
                           "planted sparse network generator");
    gen->add_flag_callback("--linear", [&] { gen_kind = "linear"; }, "linear model generator");
    gen->add_flag_callback("--friedman", [&] { gen_kind = "friedman"; }, "friedman generator");
    gen->add_option("params", gen_pairs, "key=value pairs: p, r, s, n, n_test, sigma");
    gen->add_option("--seed", gen_seed, "generator seed");
    gen->add_option("--out", gen_out, "output directory (default: current)");

    // fit
    auto* fitcmd = app.add_subcommand("fit", "fit a model to a csv dataset");
    std::string fit_train, fit_val, fit_method = "nn2", fit_config, fit_out = "fit.json";
    double fit_lambda = -1.0, fit_lr = -1.0;
    int fit_width = -1, fit_epochs = -1, fit_batch = -1;
    std::uint64_t fit_seed = 0;
    fitcmd->add_option("--train", fit_train, "training csv (header x1..xp,y)")->required();
    fitcmd->add_option("--val", fit_val, "validation csv");
    fitcmd->add_option("--method", fit_method, "nn2|nn3|lasso|omp");
    fitcmd->add_option("--config", fit_config, "key=value training config file");
    fitcmd->add_option("--lambda", fit_lambda, "l1 penalty (lasso: fixed lambda)");
    fitcmd->add_option("--width", fit_width, "neurons (omp: number of steps k)");
    fitcmd->add_option("--lr", fit_lr, "learning rate");
    fitcmd->add_option("--epochs", fit_epochs, "training epochs");
    fitcmd->add_option("--batch", fit_batch, "minibatch size");
    fitcmd->add_option("--seed", fit_seed, "training seed");
    fitcmd->add_option("--out", fit_out, "output json path");

    // select
    auto* select = app.add_subcommand("select", "variable selection from a fitted model");
    std::string sel_net, sel_fit, sel_cluster = "gmm", sel_truth, sel_out;
    double sel_threshold = -1.0;
    int sel_topk = 0;
    std::uint64_t sel_seed = 0;
    select->add_option("--net", sel_net, "network json");
    select->add_option("--fit", sel_fit, "linear fit json");
    select->add_option("--threshold", sel_threshold, "select importance > t");
    select->add_option("--topk", sel_topk, "select the k largest importances");
    select->add_option("--cluster", sel_cluster, "kmeans|gmm (default selection rule)");
    select->add_option("--seed", sel_seed, "clustering seed");
    select->add_option("--truth", sel_truth, "meta json with true_support for scoring");
    select->add_option("--out", sel_out, "write the report json here instead of stdout");
    std::string sel_csv;
    select->add_option("--csv", sel_csv, "also write a per-variable csv report");

    // match
    auto* match = app.add_subcommand("match", "permutation-invariant distance of two networks");
    std::string match_a, match_b, match_csv;
    double match_drop_tol = kDefaultDropTol;
    match->add_option("a", match_a, "first network json")->required();
    match->add_option("b", match_b, "second network json")->required();
    match->add_option("--drop-tol", match_drop_tol, "canonicalization drop tolerance");
    match->add_option("--per-neuron", match_csv, "write the per-neuron table as csv");

    // roc
    auto* roc = app.add_subcommand("roc", "roc curve of a model's importances");
    std::string roc_net, roc_fit, roc_truth, roc_out;
    roc->add_option("--net", roc_net, "network json");
    roc->add_option("--fit", roc_fit, "linear fit json");
    roc->add_option("--truth", roc_truth, "meta json with true_support")->required();
    roc->add_option("--out", roc_out, "output csv path");

    // experiment
    auto* experiment = app.add_subcommand("experiment", "replicated benchmark with aggregation");
    std::string exp_config, exp_out;
    bool exp_full_grid = false;
    std::uint64_t exp_seed = 0;
    bool exp_seed_set = false;
    experiment->add_option("--config", exp_config, "experiment config file");
    experiment->add_flag("--full-grid", exp_full_grid, "use the full published search grid");
    experiment->add_option("--out", exp_out, "output directory");
    experiment->add_option_function<std::uint64_t>(
        "--seed",
        [&](const std::uint64_t& v) {
            exp_seed = v;
            exp_seed_set = true;
        },
        "override base_seed");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) return app.exit(e);  // --help
        std::cerr << app.help() << std::endl;
        std::cerr << "error: " << e.what() << std::endl;
        return 2;
    }

    try {
        if (gen->parsed()) {
            if (gen_kind.empty()) throw ContractError("choose --planted, --linear or --friedman");
            return run_gen(gen_kind, gen_pairs, gen_seed, gen_out);
        }
        if (fitcmd->parsed()) {
            return run_fit(fit_train, fit_val, fit_method, fit_config, fit_lambda, fit_width,
                           fit_lr, fit_epochs, fit_batch, fit_seed, fit_out);
        }
        if (select->parsed()) {
            if (sel_net.empty() == sel_fit.empty()) {
                throw ContractError("pass exactly one of --net or --fit");
            }
            return run_select(sel_net, sel_fit, sel_threshold, sel_topk, sel_cluster, sel_seed,
                              sel_truth, sel_out, sel_csv);
        }
        if (match->parsed()) {
            return run_match(match_a, match_b, match_drop_tol, match_csv);
        }
        if (roc->parsed()) {
            if (roc_net.empty() == roc_fit.empty()) {
                throw ContractError("pass exactly one of --net or --fit");
            }
            return run_roc(roc_net, roc_fit, roc_truth, roc_out);
        }
        if (experiment->parsed()) {
            return run_experiment_cmd(exp_config, exp_full_grid, exp_out,
                                      exp_seed_set ? std::optional<std::uint64_t>(exp_seed)
                                                   : std::nullopt);
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << std::endl;
        return 1;
    }
    return 0;
}
