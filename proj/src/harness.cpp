#include "relasso/harness.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <numeric>
#include <sstream>
#include <thread>

#include "relasso/baselines.hpp"
#include "relasso/errors.hpp"
#include "relasso/match.hpp"
#include "relasso/rng.hpp"

namespace relasso {
namespace {

// Stream tags local to the harness.
constexpr std::uint64_t kTagTune = 0xA1;
constexpr std::uint64_t kTagSelect = 0xA2;
constexpr std::uint64_t kTagSample = 0xA3;

std::string format_sigma(double sigma) {
    std::ostringstream out;
    out << sigma;
    return out.str();
}

std::string format_value(double v) {
    std::ostringstream out;
    out.precision(17);
    out << v;
    return out.str();
}

struct TrainTest {
    Dataset train;
    Dataset test;
};

TrainTest generate_data(const ExperimentConfig& config, double sigma, std::uint64_t rep_seed,
                        const RawTable* preloaded) {
    switch (config.generator) {
        case GeneratorKind::kPlanted: {
            PlantedSpec spec = config.planted;
            spec.sigma = sigma;
            spec.seed = rep_seed;
            auto [train, test] = gen_planted(spec);
            return {std::move(train), std::move(test)};
        }
        case GeneratorKind::kLinear: {
            LinearSpec spec = config.linear;
            spec.sigma = sigma;
            spec.seed = rep_seed;
            auto [train, test] = gen_linear(spec);
            return {std::move(train), std::move(test)};
        }
        case GeneratorKind::kFriedman: {
            FriedmanSpec spec = config.friedman;
            spec.sigma = sigma;
            spec.seed = rep_seed;
            auto [train, test] = gen_friedman(spec);
            return {std::move(train), std::move(test)};
        }
        case GeneratorKind::kCsv: {
            RawTable local;
            const RawTable* table = preloaded;
            if (table == nullptr) {
                local = load_csv(config.csv_path, config.csv_schema);
                table = &local;
            }
            const int n_total = config.csv_n_train + config.csv_n_test;
            if (n_total < 2 || static_cast<std::size_t>(n_total) > table->n_rows) {
                throw ContractError("csv split sizes infeasible for " +
                                    std::to_string(table->n_rows) + " rows");
            }
            std::vector<int> order(table->n_rows);
            std::iota(order.begin(), order.end(), 0);
            Rng rng = Rng::stream(rep_seed, kTagSample);
            rng.shuffle(order);
            std::vector<int> train_rows(order.begin(), order.begin() + config.csv_n_train);
            std::vector<int> test_rows(order.begin() + config.csv_n_train,
                                       order.begin() + n_total);
            auto [all, state] = encode_and_standardize(*table, config.csv_schema, train_rows);
            (void)state;
            auto gather = [&](const std::vector<int>& rows) {
                Dataset part;
                part.X.resize(static_cast<Eigen::Index>(rows.size()), all.p());
                part.y.resize(static_cast<Eigen::Index>(rows.size()));
                for (std::size_t i = 0; i < rows.size(); ++i) {
                    part.X.row(static_cast<Eigen::Index>(i)) = all.X.row(rows[i]);
                    part.y(static_cast<Eigen::Index>(i)) = all.y(rows[i]);
                }
                part.feature_names = all.feature_names;
                return part;
            };
            return {gather(train_rows), gather(test_rows)};
        }
    }
    throw ContractError("unknown generator");
}

std::vector<int> apply_selection(const ExperimentConfig& config, const ImportanceVector& imp,
                                 std::uint64_t seed, bool* degenerate) {
    *degenerate = false;
    switch (config.selection.kind) {
        case SelectionRule::Kind::kCluster: {
            auto [selected, flag] = cluster_select(imp, config.selection.cluster, seed);
            *degenerate = flag;
            return selected;
        }
        case SelectionRule::Kind::kTopK: {
            const int k = std::min<int>(config.selection.k, static_cast<int>(imp.values.size()));
            return topk_select(imp, k);
        }
        case SelectionRule::Kind::kThreshold:
            return threshold_select(imp, config.selection.threshold);
    }
    throw ContractError("unknown selection rule");
}

void score_selection(const ExperimentConfig& config, const ImportanceVector& imp,
                     const Dataset& train, std::uint64_t select_seed, MethodRecord& record) {
    if (!train.true_support.has_value()) return;  // real data: MSE only
    bool degenerate = false;
    const std::vector<int> selected = apply_selection(config, imp, select_seed, &degenerate);
    const auto [tp, fp] = evaluate_selection(selected, *train.true_support);
    record.tp = tp;
    record.fp = fp;
    const Eigen::Index p = imp.values.size();
    const std::size_t support = train.true_support->size();
    if (support > 0 && support < static_cast<std::size_t>(p)) {
        record.auc = auc_score(imp, *train.true_support);
    }
}

void maybe_save_net(const ExperimentConfig& config, const DeepNet& net, int rep,
                    const std::string& method, double sigma) {
    if (!config.save_networks || config.output_dir.empty()) return;
    const std::string path = config.output_dir + "/net_rep" + std::to_string(rep) + "_" + method +
                             "_sigma" + format_sigma(sigma) + ".json";
    save_net(net, path);
}

MethodRecord run_method(const ExperimentConfig& config, Method method, const TrainTest& data,
                        double sigma, int rep_index, std::uint64_t rep_seed) {
    MethodRecord record;
    record.method = method_name(method);
    record.sigma = sigma;
    const std::uint64_t method_tag = static_cast<std::uint64_t>(method);
    const std::uint64_t tune_seed = mix_seed(mix_seed(rep_seed, kTagTune), method_tag);
    const std::uint64_t select_seed = mix_seed(mix_seed(rep_seed, kTagSelect), method_tag);
    record.seed = tune_seed;

    try {
        ImportanceVector imp;
        if (method == Method::kNn2 || method == Method::kNn3) {
            TrainConfig base;
            base.batch_size = config.batch_size;
            if (method == Method::kNn3) base.hidden_widths = {10};
            auto [best, tuned] = grid_search(data.train.X, data.train.y, config.grid,
                                             config.val_fraction, tune_seed, base);
            (void)tuned;
            const FitResult refit = fit(data.train.X, data.train.y, best);
            imp = importance(refit.net);
            record.mse = mse(forward_deep_batch(refit.net, data.test.X), data.test.y);
            maybe_save_net(config, refit.net, rep_index, record.method, sigma);
        } else {
            const LinearFit linear_fit =
                method == Method::kLasso
                    ? tune_lasso(data.train.X, data.train.y, config.val_fraction, tune_seed)
                    : tune_omp(data.train.X, data.train.y, config.val_fraction, tune_seed);
            imp = linear_importance(linear_fit);
            record.mse = mse(predict(linear_fit, data.test.X), data.test.y);
        }
        score_selection(config, imp, data.train, select_seed, record);
    } catch (const std::exception& e) {
        record.failed = true;
        record.error = e.what();
    }
    return record;
}

ReplicationRecord run_replication_impl(const ExperimentConfig& config, int rep_index,
                                       const RawTable* preloaded) {
    if (rep_index < 0) throw ContractError("rep_index must be nonnegative");
    const std::uint64_t rep_seed = mix_seed(config.base_seed, static_cast<std::uint64_t>(rep_index));
    ReplicationRecord record;
    record.rep = rep_index;
    for (double sigma : config.sigmas) {
        const TrainTest data = generate_data(config, sigma, rep_seed, preloaded);
        for (Method method : config.methods) {
            record.records.push_back(run_method(config, method, data, sigma, rep_index, rep_seed));
        }
    }
    return record;
}

int worker_count(int replications) {
    int threads = static_cast<int>(std::thread::hardware_concurrency());
    if (threads < 1) threads = 1;
    if (const char* cap = std::getenv("SPARSE_RELU_THREADS")) {
        const int requested = std::atoi(cap);
        if (requested >= 1) threads = requested;
    }
    return std::min(threads, replications);
}

}  // namespace

std::string method_name(Method m) {
    switch (m) {
        case Method::kNn2: return "nn2";
        case Method::kNn3: return "nn3";
        case Method::kLasso: return "lasso";
        case Method::kOmp: return "omp";
    }
    return "?";
}

Method method_from_name(const std::string& name) {
    if (name == "nn2") return Method::kNn2;
    if (name == "nn3") return Method::kNn3;
    if (name == "lasso") return Method::kLasso;
    if (name == "omp") return Method::kOmp;
    throw ContractError("unknown method '" + name + "' (expected nn2|nn3|lasso|omp)");
}

Grid desk_grid() {
    return Grid{{0.05, 0.01, 0.005}, {20, 50}, {0.01, 0.005}, {200, 500}};
}

Grid full_table_grid() {
    return Grid{{0.1, 0.05, 0.01, 0.005, 0.001}, {20, 50, 100}, {0.01, 0.005, 0.001},
                {100, 200, 500}};
}

ReplicationRecord run_replication(const ExperimentConfig& config, int rep_index) {
    return run_replication_impl(config, rep_index, nullptr);
}

std::vector<AggregateRow> aggregate(const std::vector<ReplicationRecord>& raw) {
    struct Cell {
        std::vector<std::pair<int, double>> values;  // (rep, value)
    };
    std::map<std::tuple<std::string, double, std::string>, Cell> cells;
    std::vector<std::tuple<std::string, double, std::string>> order;
    auto touch = [&](const std::string& method, double sigma,
                     const std::string& metric) -> Cell& {
        const auto key = std::make_tuple(method, sigma, metric);
        if (!cells.count(key)) order.push_back(key);
        return cells[key];
    };

    for (const ReplicationRecord& rep : raw) {
        for (const MethodRecord& rec : rep.records) {
            for (const char* metric : {"TP", "FP", "AUC", "MSE"}) touch(rec.method, rec.sigma, metric);
            if (rec.failed) continue;
            if (rec.tp) touch(rec.method, rec.sigma, "TP").values.emplace_back(rep.rep, *rec.tp);
            if (rec.fp) touch(rec.method, rec.sigma, "FP").values.emplace_back(rep.rep, *rec.fp);
            if (rec.auc) touch(rec.method, rec.sigma, "AUC").values.emplace_back(rep.rep, *rec.auc);
            if (rec.mse) touch(rec.method, rec.sigma, "MSE").values.emplace_back(rep.rep, *rec.mse);
        }
    }
    // Folding always happens in replication order, so feeding the records in
    // any order gives identical aggregates.
    for (auto& [key, cell] : cells) {
        (void)key;
        std::sort(cell.values.begin(), cell.values.end());
    }

    std::vector<AggregateRow> table;
    for (const auto& key : order) {
        const Cell& cell = cells[key];
        AggregateRow row;
        row.method = std::get<0>(key);
        row.sigma = std::get<1>(key);
        row.metric = std::get<2>(key);
        row.count = static_cast<int>(cell.values.size());
        if (row.count == 0) {
            row.mean = std::nan("");
            row.stderr_mean = std::nan("");
        } else {
            double sum = 0.0;
            for (const auto& [rep, v] : cell.values) {
                (void)rep;
                sum += v;
            }
            row.mean = sum / row.count;
            if (row.count > 1) {
                double sq = 0.0;
                for (const auto& [rep, v] : cell.values) {
                    (void)rep;
                    sq += (v - row.mean) * (v - row.mean);
                }
                const double sample_std = std::sqrt(sq / (row.count - 1));
                row.stderr_mean = sample_std / std::sqrt(static_cast<double>(row.count));
            }
        }
        table.push_back(std::move(row));
    }
    return table;
}

ExperimentResult run_experiment(const ExperimentConfig& config) {
    if (config.replications < 1) throw ContractError("replications must be at least 1");

    RawTable preloaded;
    const RawTable* table = nullptr;
    if (config.generator == GeneratorKind::kCsv) {
        preloaded = load_csv(config.csv_path, config.csv_schema);
        table = &preloaded;
    }
    if (!config.output_dir.empty()) {
        std::filesystem::create_directories(config.output_dir);
    }

    std::vector<ReplicationRecord> raw(static_cast<std::size_t>(config.replications));
    const int threads = worker_count(config.replications);
    if (threads <= 1) {
        for (int rep = 0; rep < config.replications; ++rep) {
            raw[static_cast<std::size_t>(rep)] = run_replication_impl(config, rep, table);
        }
    } else {
        std::atomic<int> next{0};
        auto worker = [&]() {
            while (true) {
                const int rep = next.fetch_add(1);
                if (rep >= config.replications) break;
                raw[static_cast<std::size_t>(rep)] = run_replication_impl(config, rep, table);
            }
        };
        std::vector<std::thread> pool;
        for (int i = 0; i < threads; ++i) pool.emplace_back(worker);
        for (auto& t : pool) t.join();
    }

    ExperimentResult result;
    result.raw = std::move(raw);
    result.table = aggregate(result.raw);

    if (!config.output_dir.empty()) {
        std::ofstream agg(config.output_dir + "/aggregate.csv");
        agg << aggregate_csv(result.table);
        std::ofstream rawfile(config.output_dir + "/raw.csv");
        rawfile << raw_csv(result.raw);
    }
    return result;
}

std::string aggregate_csv(const std::vector<AggregateRow>& table) {
    std::ostringstream out;
    out << "method,sigma,metric,mean,stderr,R\n";
    for (const AggregateRow& row : table) {
        out << row.method << "," << format_sigma(row.sigma) << "," << row.metric << ",";
        if (row.count == 0) {
            out << "NA,NA";
        } else {
            out << format_value(row.mean) << "," << format_value(row.stderr_mean);
        }
        out << "," << row.count << "\n";
    }
    return out.str();
}

std::string raw_csv(const std::vector<ReplicationRecord>& raw) {
    std::ostringstream out;
    out << "rep,method,sigma,tp,fp,auc,mse,seed\n";
    for (const ReplicationRecord& rep : raw) {
        for (const MethodRecord& rec : rep.records) {
            out << rep.rep << "," << rec.method << "," << format_sigma(rec.sigma) << ",";
            auto cell = [&](const auto& opt) {
                if (rec.failed || !opt) {
                    out << "NA";
                } else {
                    out << format_value(static_cast<double>(*opt));
                }
            };
            cell(rec.tp);
            out << ",";
            cell(rec.fp);
            out << ",";
            cell(rec.auc);
            out << ",";
            cell(rec.mse);
            out << "," << rec.seed << "\n";
        }
    }
    return out.str();
}

ExperimentConfig experiment_from_config(const KeyValueConfig& kv) {
    ExperimentConfig config;
    const std::string generator = kv.get_string("generator", "planted");
    if (generator == "planted") {
        config.generator = GeneratorKind::kPlanted;
    } else if (generator == "linear") {
        config.generator = GeneratorKind::kLinear;
    } else if (generator == "friedman") {
        config.generator = GeneratorKind::kFriedman;
    } else if (generator == "csv") {
        config.generator = GeneratorKind::kCsv;
    } else {
        throw ContractError("unknown generator '" + generator + "'");
    }

    config.planted.p = kv.get_int("p", config.planted.p);
    config.planted.r_star = kv.get_int("r_star", config.planted.r_star);
    config.planted.s = kv.get_int("s", config.planted.s);
    config.planted.n_train = kv.get_int("n_train", config.planted.n_train);
    config.planted.n_test = kv.get_int("n_test", config.planted.n_test);
    config.planted.normalize_columns =
        kv.get_bool("normalize_columns", config.planted.normalize_columns);
    config.linear.n_train = kv.get_int("n_train", config.linear.n_train);
    config.linear.n_test = kv.get_int("n_test", config.linear.n_test);
    config.friedman.p = kv.get_int("p", config.friedman.p);
    config.friedman.n_train = kv.get_int("n_train", config.friedman.n_train);
    config.friedman.n_test = kv.get_int("n_test", config.friedman.n_test);

    config.csv_path = kv.get_string("csv_path", "");
    config.csv_schema.target = kv.get_string("csv_target", "y");
    config.csv_schema.categoricals = kv.get_string_list("csv_categoricals", {});
    config.csv_n_train = kv.get_int("csv_n_train", 0);
    config.csv_n_test = kv.get_int("csv_n_test", 0);

    config.sigmas = kv.get_double_list("sigmas", config.sigmas);
    config.methods.clear();
    for (const std::string& name : kv.get_string_list("methods", {"nn2"})) {
        config.methods.push_back(method_from_name(name));
    }

    const Grid fallback = kv.get_bool("full_grid", false) ? full_table_grid() : desk_grid();
    config.grid.lambdas = kv.get_double_list("lambdas", fallback.lambdas);
    config.grid.widths = kv.get_int_list("widths", fallback.widths);
    config.grid.learning_rates = kv.get_double_list("learning_rates", fallback.learning_rates);
    config.grid.epoch_counts = kv.get_int_list("epoch_counts", fallback.epoch_counts);

    config.replications = kv.get_int("replications", config.replications);
    config.base_seed = kv.get_u64("base_seed", config.base_seed);
    config.output_dir = kv.get_string("output_dir", config.output_dir);
    config.batch_size = kv.get_int("batch_size", config.batch_size);
    config.val_fraction = kv.get_double("val_fraction", config.val_fraction);
    config.save_networks = kv.get_bool("save_networks", config.save_networks);

    const std::string selection = kv.get_string("selection", "gmm");
    if (selection == "gmm") {
        config.selection.kind = SelectionRule::Kind::kCluster;
        config.selection.cluster = ClusterMethod::kGmm2;
    } else if (selection == "kmeans") {
        config.selection.kind = SelectionRule::Kind::kCluster;
        config.selection.cluster = ClusterMethod::kKMeans2;
    } else if (selection.rfind("topk:", 0) == 0) {
        config.selection.kind = SelectionRule::Kind::kTopK;
        config.selection.k = std::atoi(selection.c_str() + 5);
        if (config.selection.k < 1) throw ContractError("topk selection needs k >= 1");
    } else if (selection.rfind("threshold:", 0) == 0) {
        config.selection.kind = SelectionRule::Kind::kThreshold;
        config.selection.threshold = std::atof(selection.c_str() + 10);
    } else {
        throw ContractError("unknown selection rule '" + selection + "'");
    }
    return config;
}

std::string describe(const ExperimentConfig& config) {
    std::ostringstream out;
    auto list_d = [&](const std::vector<double>& v) {
        std::string s;
        for (std::size_t i = 0; i < v.size(); ++i) s += (i ? "," : "") + format_sigma(v[i]);
        return s;
    };
    auto list_i = [&](const std::vector<int>& v) {
        std::string s;
        for (std::size_t i = 0; i < v.size(); ++i) s += (i ? "," : "") + std::to_string(v[i]);
        return s;
    };
    switch (config.generator) {
        case GeneratorKind::kPlanted:
            out << "generator = planted\n"
                << "p = " << config.planted.p << "\n"
                << "r_star = " << config.planted.r_star << "\n"
                << "s = " << config.planted.s << "\n"
                << "n_train = " << config.planted.n_train << "\n"
                << "n_test = " << config.planted.n_test << "\n"
                << "normalize_columns = " << (config.planted.normalize_columns ? "true" : "false")
                << "\n";
            break;
        case GeneratorKind::kLinear:
            out << "generator = linear\n"
                << "n_train = " << config.linear.n_train << "\n"
                << "n_test = " << config.linear.n_test << "\n";
            break;
        case GeneratorKind::kFriedman:
            out << "generator = friedman\n"
                << "p = " << config.friedman.p << "\n"
                << "n_train = " << config.friedman.n_train << "\n"
                << "n_test = " << config.friedman.n_test << "\n";
            break;
        case GeneratorKind::kCsv:
            out << "generator = csv\n"
                << "csv_path = " << config.csv_path << "\n"
                << "csv_target = " << config.csv_schema.target << "\n"
                << "csv_n_train = " << config.csv_n_train << "\n"
                << "csv_n_test = " << config.csv_n_test << "\n";
            break;
    }
    out << "sigmas = " << list_d(config.sigmas) << "\n";
    out << "methods = ";
    for (std::size_t i = 0; i < config.methods.size(); ++i) {
        out << (i ? "," : "") << method_name(config.methods[i]);
    }
    out << "\n";
    out << "lambdas = " << list_d(config.grid.lambdas) << "\n"
        << "widths = " << list_i(config.grid.widths) << "\n"
        << "learning_rates = " << list_d(config.grid.learning_rates) << "\n"
        << "epoch_counts = " << list_i(config.grid.epoch_counts) << "\n"
        << "replications = " << config.replications << "\n"
        << "base_seed = " << config.base_seed << "\n"
        << "batch_size = " << config.batch_size << "\n"
        << "val_fraction = " << config.val_fraction << "\n"
        << "save_networks = " << (config.save_networks ? "true" : "false") << "\n"
        << "output_dir = " << config.output_dir << "\n";
    out << "selection = ";
    switch (config.selection.kind) {
        case SelectionRule::Kind::kCluster:
            out << (config.selection.cluster == ClusterMethod::kGmm2 ? "gmm" : "kmeans");
            break;
        case SelectionRule::Kind::kTopK:
            out << "topk:" << config.selection.k;
            break;
        case SelectionRule::Kind::kThreshold:
            out << "threshold:" << config.selection.threshold;
            break;
    }
    out << "\n";
    return out.str();
}

}  // namespace relasso
