#include "relasso/net.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include "json.hpp"
#include "relasso/errors.hpp"

namespace relasso {
namespace {

using nlohmann::json;

void require_finite(const Eigen::MatrixXd& m, const char* name) {
    if (!m.allFinite()) {
        throw ContractError(std::string(name) + " contains a non-finite entry");
    }
}

void require_length(const Eigen::VectorXd& v, Eigen::Index expected, const char* name) {
    if (v.size() != expected) {
        throw ContractError(std::string(name) + " has length " + std::to_string(v.size()) +
                            ", expected " + std::to_string(expected));
    }
}

// Single evaluation path for one sample; forward, forward_batch and the
// hidden-free deep forward all land here so their outputs are bitwise
// identical.
double eval_two_layer(const Eigen::MatrixXd& W, const Eigen::VectorXd& a,
                      const Eigen::VectorXd& b, const Eigen::RowVectorXd& x) {
    double y = 0.0;
    for (Eigen::Index j = 0; j < W.cols(); ++j) {
        const double z = x.dot(W.col(j)) + b(j);
        if (z > 0.0) y += a(j) * z;
    }
    return y;
}

double eval_deep(const DeepNet& net, const Eigen::RowVectorXd& x) {
    if (net.hidden.empty()) return eval_two_layer(net.W, net.out, net.b, x);
    Eigen::VectorXd h = (net.W.transpose() * x.transpose() + net.b).cwiseMax(0.0);
    for (const auto& layer : net.hidden) {
        h = (layer.M.transpose() * h + layer.c).cwiseMax(0.0);
    }
    return net.out.dot(h);
}

json matrix_to_json(const Eigen::MatrixXd& m) {
    json rows = json::array();
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        json row = json::array();
        for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
        rows.push_back(std::move(row));
    }
    return rows;
}

json vector_to_json(const Eigen::VectorXd& v) {
    json arr = json::array();
    for (Eigen::Index i = 0; i < v.size(); ++i) arr.push_back(v(i));
    return arr;
}

Eigen::MatrixXd matrix_from_json(const json& rows, const char* name) {
    if (!rows.is_array()) throw ContractError(std::string(name) + " is not an array");
    const Eigen::Index n = static_cast<Eigen::Index>(rows.size());
    if (n == 0) return Eigen::MatrixXd(0, 0);
    const Eigen::Index m = static_cast<Eigen::Index>(rows[0].size());
    Eigen::MatrixXd out(n, m);
    for (Eigen::Index i = 0; i < n; ++i) {
        if (static_cast<Eigen::Index>(rows[i].size()) != m) {
            throw ContractError(std::string(name) + " has ragged rows");
        }
        for (Eigen::Index j = 0; j < m; ++j) out(i, j) = rows[i][j].get<double>();
    }
    return out;
}

Eigen::VectorXd vector_from_json(const json& arr, const char* name) {
    if (!arr.is_array()) throw ContractError(std::string(name) + " is not an array");
    Eigen::VectorXd out(static_cast<Eigen::Index>(arr.size()));
    for (Eigen::Index i = 0; i < out.size(); ++i) out(i) = arr[i].get<double>();
    return out;
}

json net_to_json_object(const TwoLayerNet& net) {
    json doc;
    doc["p"] = net.input_dim();
    doc["r"] = net.width();
    doc["a"] = vector_to_json(net.a);
    doc["b"] = vector_to_json(net.b);
    doc["W"] = matrix_to_json(net.W);
    return doc;
}

std::string read_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ContractError("cannot open file: " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

void write_file(const std::string& path, const std::string& text) {
    std::ofstream out(path);
    if (!out) throw ContractError("cannot write file: " + path);
    out << text;
}

}  // namespace

TwoLayerNet make_two_layer(Eigen::MatrixXd W, Eigen::VectorXd a, Eigen::VectorXd b) {
    require_finite(W, "W");
    require_finite(a, "a");
    require_finite(b, "b");
    require_length(a, W.cols(), "a");
    require_length(b, W.cols(), "b");
    if (W.rows() < 1) throw ContractError("input_dim must be positive");
    return TwoLayerNet{std::move(W), std::move(a), std::move(b)};
}

DeepNet make_deep(Eigen::MatrixXd W, Eigen::VectorXd b, std::vector<DeepNet::Layer> hidden,
                  Eigen::VectorXd out) {
    require_finite(W, "W");
    require_finite(b, "b");
    require_length(b, W.cols(), "b");
    Eigen::Index width = W.cols();
    int k = 0;
    for (const auto& layer : hidden) {
        ++k;
        const std::string tag = "hidden layer " + std::to_string(k);
        require_finite(layer.M, tag.c_str());
        require_finite(layer.c, tag.c_str());
        if (layer.M.rows() != width) {
            throw ContractError(tag + " expects fan-in " + std::to_string(width) + ", got " +
                                std::to_string(layer.M.rows()));
        }
        require_length(layer.c, layer.M.cols(), tag.c_str());
        width = layer.M.cols();
    }
    require_finite(out, "out");
    require_length(out, width, "out");
    return DeepNet{std::move(W), std::move(b), std::move(hidden), std::move(out)};
}

DeepNet to_deep(const TwoLayerNet& net) { return DeepNet{net.W, net.b, {}, net.a}; }

TwoLayerNet to_two_layer(const DeepNet& net) {
    if (!net.hidden.empty()) {
        throw ContractError("net has " + std::to_string(net.hidden.size()) +
                            " hidden layers; only an empty stack converts to a two-layer net");
    }
    return TwoLayerNet{net.W, net.out, net.b};
}

double forward(const TwoLayerNet& net, const Eigen::VectorXd& x) {
    if (x.size() != net.W.rows()) {
        throw ContractError("input has length " + std::to_string(x.size()) + ", expected " +
                            std::to_string(net.W.rows()));
    }
    return eval_two_layer(net.W, net.a, net.b, x.transpose());
}

Eigen::VectorXd forward_batch(const TwoLayerNet& net, const Eigen::MatrixXd& X) {
    if (X.cols() != net.W.rows()) {
        throw ContractError("X has " + std::to_string(X.cols()) + " columns, expected " +
                            std::to_string(net.W.rows()));
    }
    Eigen::VectorXd y(X.rows());
    for (Eigen::Index i = 0; i < X.rows(); ++i) {
        y(i) = eval_two_layer(net.W, net.a, net.b, X.row(i));
    }
    return y;
}

double forward_deep(const DeepNet& net, const Eigen::VectorXd& x) {
    if (x.size() != net.W.rows()) {
        throw ContractError("input has length " + std::to_string(x.size()) + ", expected " +
                            std::to_string(net.W.rows()));
    }
    return eval_deep(net, x.transpose());
}

Eigen::VectorXd forward_deep_batch(const DeepNet& net, const Eigen::MatrixXd& X) {
    if (X.cols() != net.W.rows()) {
        throw ContractError("X has " + std::to_string(X.cols()) + " columns, expected " +
                            std::to_string(net.W.rows()));
    }
    Eigen::VectorXd y(X.rows());
    for (Eigen::Index i = 0; i < X.rows(); ++i) y(i) = eval_deep(net, X.row(i));
    return y;
}

TwoLayerNet canonicalize(const TwoLayerNet& net, double drop_tol) {
    if (drop_tol < 0.0) throw ContractError("drop_tol must be nonnegative");
    std::vector<Eigen::Index> keep;
    for (Eigen::Index j = 0; j < net.width(); ++j) {
        if (std::abs(net.a(j)) > drop_tol) keep.push_back(j);
    }
    const Eigen::Index r = static_cast<Eigen::Index>(keep.size());
    Eigen::MatrixXd W(net.W.rows(), r);
    Eigen::VectorXd a(r);
    Eigen::VectorXd b(r);
    for (Eigen::Index k = 0; k < r; ++k) {
        const Eigen::Index j = keep[static_cast<std::size_t>(k)];
        const double scale = std::abs(net.a(j));
        W.col(k) = scale * net.W.col(j);
        a(k) = net.a(j) > 0.0 ? 1.0 : -1.0;
        b(k) = scale * net.b(j);
    }
    return TwoLayerNet{std::move(W), std::move(a), std::move(b)};
}

bool is_canonical(const TwoLayerNet& net) {
    for (Eigen::Index j = 0; j < net.width(); ++j) {
        if (net.a(j) != 1.0 && net.a(j) != -1.0) return false;
    }
    return true;
}

std::string to_json(const TwoLayerNet& net) { return net_to_json_object(net).dump(); }

std::string to_json(const DeepNet& net) {
    json doc;
    doc["p"] = net.input_dim();
    doc["r"] = net.input_width();
    doc["a"] = vector_to_json(net.out);  // mirrors the two-layer field
    doc["b"] = vector_to_json(net.b);
    doc["W"] = matrix_to_json(net.W);
    json hidden = json::array();
    for (const auto& layer : net.hidden) {
        hidden.push_back({{"M", matrix_to_json(layer.M)}, {"b", vector_to_json(layer.c)}});
    }
    doc["hidden"] = std::move(hidden);
    doc["out"] = vector_to_json(net.out);
    return doc.dump();
}

TwoLayerNet two_layer_from_json(const std::string& text) {
    const json doc = json::parse(text);
    auto net = make_two_layer(matrix_from_json(doc.at("W"), "W"),
                              vector_from_json(doc.at("a"), "a"),
                              vector_from_json(doc.at("b"), "b"));
    if (doc.at("p").get<int>() != net.input_dim() || doc.at("r").get<int>() != net.width()) {
        throw ContractError("declared p/r do not match the W matrix shape");
    }
    return net;
}

DeepNet deep_from_json(const std::string& text) {
    const json doc = json::parse(text);
    std::vector<DeepNet::Layer> hidden;
    if (doc.contains("hidden")) {
        for (const auto& item : doc.at("hidden")) {
            hidden.push_back(DeepNet::Layer{matrix_from_json(item.at("M"), "hidden M"),
                                            vector_from_json(item.at("b"), "hidden b")});
        }
    }
    const auto& out_field = doc.contains("out") ? doc.at("out") : doc.at("a");
    return make_deep(matrix_from_json(doc.at("W"), "W"), vector_from_json(doc.at("b"), "b"),
                     std::move(hidden), vector_from_json(out_field, "out"));
}

void save_net(const TwoLayerNet& net, const std::string& path) { write_file(path, to_json(net)); }
void save_net(const DeepNet& net, const std::string& path) { write_file(path, to_json(net)); }
TwoLayerNet load_two_layer(const std::string& path) { return two_layer_from_json(read_file(path)); }
DeepNet load_deep(const std::string& path) { return deep_from_json(read_file(path)); }

}  // namespace relasso
