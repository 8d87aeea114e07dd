#pragma once

#include <string>
#include <utility>
#include <vector>

#include "relasso/synth.hpp"

namespace relasso {

enum class ColumnKind { kContinuous, kCategorical };

/// Declares the target column and which columns are categorical; every other
/// column found in the file is treated as continuous.
struct TabularSchema {
    std::string target;
    std::vector<std::string> categoricals;
};

struct RawColumn {
    std::string name;
    ColumnKind kind = ColumnKind::kContinuous;
    std::vector<double> numeric;       // filled for continuous columns
    std::vector<std::string> labels;   // filled for categorical columns
};

struct RawTable {
    std::vector<RawColumn> columns;
    std::size_t n_rows = 0;
    int target_index = -1;
};

struct PreprocessState {
    struct ContinuousStats {
        std::string name;
        double mean;
        double std_dev;
    };
    struct CategoryList {
        std::string name;
        std::vector<std::string> categories;  // sorted; one dummy column each
    };
    std::vector<ContinuousStats> continuous;
    std::vector<CategoryList> categoricals;
    std::vector<std::string> dropped;  // zero-variance continuous columns
};

/// Parses a comma-separated file with a header row. The header must contain
/// the target and every declared categorical column. Malformed numeric cells
/// report their (row, column) position, rows counted from 1 below the header.
RawTable load_csv(const std::string& path, const TabularSchema& schema);

/// Expands each categorical column into one 0/1 column per category observed
/// in the fit_on rows (full dummy coding, no dropped level; categories kept
/// in sorted order, columns named name_category) and standardizes continuous
/// columns with mean/std fitted on fit_on only. The transform is applied to
/// every row; categories unseen at fit time map to an all-zero block.
/// Zero-variance continuous columns are dropped and recorded in the state.
/// The target column becomes y, untouched.
std::pair<Dataset, PreprocessState> encode_and_standardize(const RawTable& table,
                                                           const TabularSchema& schema,
                                                           const std::vector<int>& fit_on);

/// Builds a dataset from an all-continuous table as-is, without any
/// standardization; feature order follows the file.
Dataset dataset_from_table(const RawTable& table);

/// Deterministic seed-keyed permutation split into disjoint parts of the
/// requested sizes; rows beyond n_train + n_test are left out.
std::pair<Dataset, Dataset> split_counts(const Dataset& data, int n_train, int n_test,
                                         std::uint64_t seed);
std::pair<Dataset, Dataset> split_fraction(const Dataset& data, double train_fraction,
                                           std::uint64_t seed);

/// Writes header x1..xp,y (or the dataset's feature names) and one row per
/// observation; values round-trip exactly.
void write_dataset_csv(const Dataset& data, const std::string& path);

}  // namespace relasso
