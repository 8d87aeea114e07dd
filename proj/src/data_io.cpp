#include "relasso/data_io.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <map>
#include <numeric>
#include <set>
#include <sstream>

#include "relasso/errors.hpp"
#include "relasso/rng.hpp"

namespace relasso {
namespace {

std::vector<std::string> split_line(const std::string& line) {
    std::vector<std::string> cells;
    std::string cell;
    std::stringstream ss(line);
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    if (!line.empty() && line.back() == ',') cells.emplace_back();
    return cells;
}

std::string strip_cr(std::string s) {
    if (!s.empty() && s.back() == '\r') s.pop_back();
    return s;
}

double parse_double(const std::string& cell, std::size_t row, const std::string& column) {
    const char* begin = cell.c_str();
    char* end = nullptr;
    const double value = std::strtod(begin, &end);
    if (end == begin || *end != '\0') {
        throw ContractError("cannot parse '" + cell + "' as a number at row " +
                            std::to_string(row) + ", column '" + column + "'");
    }
    return value;
}

// 17 significant digits: enough for an exact double round trip.
std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

}  // namespace

RawTable load_csv(const std::string& path, const TabularSchema& schema) {
    std::ifstream in(path);
    if (!in) throw ContractError("cannot open file: " + path);

    std::string line;
    if (!std::getline(in, line)) throw ContractError("file is empty: " + path);
    const std::vector<std::string> raw_header = split_line(strip_cr(line));

    RawTable table;
    const std::set<std::string> categorical_names(schema.categoricals.begin(),
                                                  schema.categoricals.end());
    std::set<std::string> seen;
    for (const std::string& name : raw_header) {
        if (!seen.insert(name).second) throw ContractError("duplicate column name: " + name);
        RawColumn col;
        col.name = name;
        col.kind = categorical_names.count(name) ? ColumnKind::kCategorical
                                                 : ColumnKind::kContinuous;
        if (name == schema.target) table.target_index = static_cast<int>(table.columns.size());
        table.columns.push_back(std::move(col));
    }
    if (table.target_index < 0) {
        throw ContractError("target column '" + schema.target + "' not found in header");
    }
    if (table.columns[static_cast<std::size_t>(table.target_index)].kind !=
        ColumnKind::kContinuous) {
        throw ContractError("target column '" + schema.target + "' must be continuous");
    }
    for (const std::string& name : schema.categoricals) {
        if (!seen.count(name)) throw ContractError("categorical column '" + name +
                                                   "' not found in header");
    }

    std::size_t row = 0;
    while (std::getline(in, line)) {
        line = strip_cr(line);
        if (line.empty()) continue;
        ++row;
        const std::vector<std::string> cells = split_line(line);
        if (cells.size() != table.columns.size()) {
            throw ContractError("row " + std::to_string(row) + " has " +
                                std::to_string(cells.size()) + " cells, expected " +
                                std::to_string(table.columns.size()));
        }
        for (std::size_t c = 0; c < cells.size(); ++c) {
            RawColumn& col = table.columns[c];
            if (col.kind == ColumnKind::kContinuous) {
                col.numeric.push_back(parse_double(cells[c], row, col.name));
            } else {
                col.labels.push_back(cells[c]);
            }
        }
    }
    table.n_rows = row;
    return table;
}

std::pair<Dataset, PreprocessState> encode_and_standardize(const RawTable& table,
                                                           const TabularSchema& schema,
                                                           const std::vector<int>& fit_on) {
    if (fit_on.empty()) throw ContractError("fit_on row set is empty");
    if (table.target_index < 0 ||
        table.columns[static_cast<std::size_t>(table.target_index)].name != schema.target) {
        throw ContractError("table was not loaded with target '" + schema.target + "'");
    }
    for (int i : fit_on) {
        if (i < 0 || static_cast<std::size_t>(i) >= table.n_rows) {
            throw ContractError("fit_on row index out of range: " + std::to_string(i));
        }
    }

    PreprocessState state;
    struct Block {
        const RawColumn* col;
        double mean = 0.0;
        double std_dev = 1.0;
        std::map<std::string, int> category_of;  // categorical only
        int width = 1;
    };
    std::vector<Block> blocks;

    for (std::size_t c = 0; c < table.columns.size(); ++c) {
        if (static_cast<int>(c) == table.target_index) continue;
        const RawColumn& col = table.columns[c];
        Block block;
        block.col = &col;
        if (col.kind == ColumnKind::kContinuous) {
            double sum = 0.0;
            for (int i : fit_on) sum += col.numeric[static_cast<std::size_t>(i)];
            block.mean = sum / static_cast<double>(fit_on.size());
            double sq = 0.0;
            for (int i : fit_on) {
                const double d = col.numeric[static_cast<std::size_t>(i)] - block.mean;
                sq += d * d;
            }
            block.std_dev = std::sqrt(sq / static_cast<double>(fit_on.size()));
            if (block.std_dev == 0.0) {
                state.dropped.push_back(col.name);
                continue;
            }
            state.continuous.push_back({col.name, block.mean, block.std_dev});
        } else {
            std::set<std::string> seen;
            for (int i : fit_on) seen.insert(col.labels[static_cast<std::size_t>(i)]);
            PreprocessState::CategoryList list{col.name, {seen.begin(), seen.end()}};
            for (std::size_t k = 0; k < list.categories.size(); ++k) {
                block.category_of[list.categories[k]] = static_cast<int>(k);
            }
            block.width = static_cast<int>(list.categories.size());
            state.categoricals.push_back(std::move(list));
        }
        blocks.push_back(std::move(block));
    }

    int p = 0;
    for (const Block& b : blocks) p += b.width;

    Dataset out;
    out.X.resize(static_cast<Eigen::Index>(table.n_rows), p);
    out.X.setZero();
    out.y.resize(static_cast<Eigen::Index>(table.n_rows));
    const RawColumn& target = table.columns[static_cast<std::size_t>(table.target_index)];
    for (std::size_t i = 0; i < table.n_rows; ++i) out.y(static_cast<Eigen::Index>(i)) =
        target.numeric[i];

    int at = 0;
    for (const Block& block : blocks) {
        if (block.col->kind == ColumnKind::kContinuous) {
            out.feature_names.push_back(block.col->name);
            for (std::size_t i = 0; i < table.n_rows; ++i) {
                out.X(static_cast<Eigen::Index>(i), at) =
                    (block.col->numeric[i] - block.mean) / block.std_dev;
            }
            ++at;
        } else {
            // dummy columns in sorted category order
            for (const auto& entry : block.category_of) {
                out.feature_names.push_back(block.col->name + "_" + entry.first);
            }
            for (std::size_t i = 0; i < table.n_rows; ++i) {
                const auto hit = block.category_of.find(block.col->labels[i]);
                if (hit != block.category_of.end()) {
                    out.X(static_cast<Eigen::Index>(i), at + hit->second) = 1.0;
                }
            }
            at += block.width;
        }
    }
    return {std::move(out), std::move(state)};
}

Dataset dataset_from_table(const RawTable& table) {
    Dataset out;
    int p = 0;
    for (std::size_t c = 0; c < table.columns.size(); ++c) {
        if (static_cast<int>(c) == table.target_index) continue;
        if (table.columns[c].kind != ColumnKind::kContinuous) {
            throw ContractError("column '" + table.columns[c].name +
                                "' is categorical; encode it first");
        }
        ++p;
    }
    out.X.resize(static_cast<Eigen::Index>(table.n_rows), p);
    out.y.resize(static_cast<Eigen::Index>(table.n_rows));
    int at = 0;
    for (std::size_t c = 0; c < table.columns.size(); ++c) {
        const RawColumn& col = table.columns[c];
        if (static_cast<int>(c) == table.target_index) {
            for (std::size_t i = 0; i < table.n_rows; ++i) {
                out.y(static_cast<Eigen::Index>(i)) = col.numeric[i];
            }
            continue;
        }
        out.feature_names.push_back(col.name);
        for (std::size_t i = 0; i < table.n_rows; ++i) {
            out.X(static_cast<Eigen::Index>(i), at) = col.numeric[i];
        }
        ++at;
    }
    return out;
}

std::pair<Dataset, Dataset> split_counts(const Dataset& data, int n_train, int n_test,
                                         std::uint64_t seed) {
    if (n_train < 1 || n_test < 0) throw ContractError("split sizes must be positive");
    if (static_cast<Eigen::Index>(n_train) + n_test > data.n()) {
        throw ContractError("split sizes exceed the " + std::to_string(data.n()) +
                            " available rows");
    }
    std::vector<int> order(static_cast<std::size_t>(data.n()));
    std::iota(order.begin(), order.end(), 0);
    Rng rng = Rng::stream(seed, stream::kSplit);
    rng.shuffle(order);

    auto take = [&](int offset, int count) {
        Dataset part;
        part.X.resize(count, data.p());
        part.y.resize(count);
        for (int i = 0; i < count; ++i) {
            part.X.row(i) = data.X.row(order[static_cast<std::size_t>(offset + i)]);
            part.y(i) = data.y(order[static_cast<std::size_t>(offset + i)]);
        }
        part.true_support = data.true_support;
        part.planted_net = data.planted_net;
        part.feature_names = data.feature_names;
        return part;
    };
    return {take(0, n_train), take(n_train, n_test)};
}

std::pair<Dataset, Dataset> split_fraction(const Dataset& data, double train_fraction,
                                           std::uint64_t seed) {
    if (train_fraction <= 0.0 || train_fraction >= 1.0) {
        throw ContractError("train_fraction must lie strictly between 0 and 1");
    }
    const int n = static_cast<int>(data.n());
    int n_train = static_cast<int>(train_fraction * n);
    n_train = std::max(1, std::min(n_train, n - 1));
    return split_counts(data, n_train, n - n_train, seed);
}

void write_dataset_csv(const Dataset& data, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw ContractError("cannot write file: " + path);
    for (Eigen::Index j = 0; j < data.p(); ++j) {
        if (data.feature_names.empty()) {
            out << "x" << (j + 1) << ",";
        } else {
            out << data.feature_names[static_cast<std::size_t>(j)] << ",";
        }
    }
    out << "y\n";
    for (Eigen::Index i = 0; i < data.n(); ++i) {
        for (Eigen::Index j = 0; j < data.p(); ++j) out << format_double(data.X(i, j)) << ",";
        out << format_double(data.y(i)) << "\n";
    }
}

}  // namespace relasso
