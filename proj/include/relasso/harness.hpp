#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "relasso/config.hpp"
#include "relasso/data_io.hpp"
#include "relasso/select.hpp"
#include "relasso/synth.hpp"
#include "relasso/train.hpp"

namespace relasso {

enum class GeneratorKind { kPlanted, kLinear, kFriedman, kCsv };
enum class Method { kNn2, kNn3, kLasso, kOmp };

std::string method_name(Method m);
Method method_from_name(const std::string& name);

struct SelectionRule {
    enum class Kind { kCluster, kTopK, kThreshold };
    Kind kind = Kind::kCluster;
    ClusterMethod cluster = ClusterMethod::kGmm2;
    int k = 10;
    double threshold = 0.0;
};

/// Everything a replication needs; a replication is a pure function of
/// (config, rep_index).
struct ExperimentConfig {
    GeneratorKind generator = GeneratorKind::kPlanted;
    PlantedSpec planted;    // sigma and seed are overridden per run
    LinearSpec linear;
    FriedmanSpec friedman;
    std::string csv_path;
    TabularSchema csv_schema;
    int csv_n_train = 0;
    int csv_n_test = 0;

    std::vector<double> sigmas{0.0};
    std::vector<Method> methods{Method::kNn2};
    Grid grid;  // filled with the desk grid by default
    int replications = 10;
    std::uint64_t base_seed = 1;
    SelectionRule selection;
    std::string output_dir;
    int batch_size = 32;
    double val_fraction = 0.2;
    bool save_networks = true;  // trained nets land in output_dir when it is set
};

/// Reduced grid used by default; the full published search space sits behind
/// full_table_grid().
Grid desk_grid();
Grid full_table_grid();

struct MethodRecord {
    std::string method;
    double sigma = 0.0;
    std::optional<int> tp;
    std::optional<int> fp;
    std::optional<double> auc;
    std::optional<double> mse;
    std::uint64_t seed = 0;
    bool failed = false;
    std::string error;
};

struct ReplicationRecord {
    int rep = 0;
    std::vector<MethodRecord> records;
};

struct AggregateRow {
    std::string method;
    double sigma = 0.0;
    std::string metric;  // TP | FP | AUC | MSE
    double mean = 0.0;
    double stderr_mean = 0.0;  // sample std / sqrt(count)
    int count = 0;             // successful replications behind the row
};

struct ExperimentResult {
    std::vector<AggregateRow> table;
    std::vector<ReplicationRecord> raw;
};

/// One replication: generate (or sample) data with seed mix(base_seed, rep),
/// then per sigma and per method tune on a validation split, refit, select
/// variables and score. Method failures are recorded, not thrown.
ReplicationRecord run_replication(const ExperimentConfig& config, int rep_index);

/// All replications plus the aggregate table. Replications may run on worker
/// threads (capped by the SPARSE_RELU_THREADS environment variable);
/// aggregation folds in replication order, so scheduling cannot change any
/// output. Writes aggregate.csv and raw.csv (and trained networks when
/// requested) under config.output_dir if it is nonempty.
ExperimentResult run_experiment(const ExperimentConfig& config);

std::vector<AggregateRow> aggregate(const std::vector<ReplicationRecord>& raw);

std::string aggregate_csv(const std::vector<AggregateRow>& table);
std::string raw_csv(const std::vector<ReplicationRecord>& raw);

ExperimentConfig experiment_from_config(const KeyValueConfig& kv);

/// Every field materialized as key = value lines, for reproducibility echo.
std::string describe(const ExperimentConfig& config);

}  // namespace relasso
