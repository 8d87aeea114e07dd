#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

namespace relasso {

/// Two-layer ReLU regression network: x -> sum_j a_j * relu(w_j' x + b_j).
/// Column j of W is the weight vector of neuron j. Immutable by convention
/// after construction; all operations return new values.
struct TwoLayerNet {
    Eigen::MatrixXd W;  // p x r
    Eigen::VectorXd a;  // r
    Eigen::VectorXd b;  // r

    int input_dim() const { return static_cast<int>(W.rows()); }
    int width() const { return static_cast<int>(W.cols()); }
};

/// ReLU network with an arbitrary hidden stack on top of the input layer.
/// With an empty stack it computes the same function as TwoLayerNet{W, out, b}.
struct DeepNet {
    struct Layer {
        Eigen::MatrixXd M;  // fan_in x fan_out
        Eigen::VectorXd c;  // fan_out
    };

    Eigen::MatrixXd W;          // p x r0, the only l1-penalized block
    Eigen::VectorXd b;          // r0
    std::vector<Layer> hidden;  // ReLU layers after the input layer
    Eigen::VectorXd out;        // linear output weights

    int input_dim() const { return static_cast<int>(W.rows()); }
    int input_width() const { return static_cast<int>(W.cols()); }
};

// Construction helpers; both throw ContractError on inconsistent or
// non-finite parameters.
TwoLayerNet make_two_layer(Eigen::MatrixXd W, Eigen::VectorXd a, Eigen::VectorXd b);
DeepNet make_deep(Eigen::MatrixXd W, Eigen::VectorXd b, std::vector<DeepNet::Layer> hidden,
                  Eigen::VectorXd out);

DeepNet to_deep(const TwoLayerNet& net);
// Requires an empty hidden stack.
TwoLayerNet to_two_layer(const DeepNet& net);

double forward(const TwoLayerNet& net, const Eigen::VectorXd& x);
// Element i equals forward(net, row i of X) bit for bit: both paths share
// one per-neuron dot-product routine.
Eigen::VectorXd forward_batch(const TwoLayerNet& net, const Eigen::MatrixXd& X);

double forward_deep(const DeepNet& net, const Eigen::VectorXd& x);
Eigen::VectorXd forward_deep_batch(const DeepNet& net, const Eigen::MatrixXd& X);

inline constexpr double kDefaultDropTol = 1e-8;

/// Rescales every neuron to a in {-1, +1} using a*relu(v) = a*c*relu(v/c):
/// (a, w, b) -> (sign(a), |a| w, |a| b). Neurons with |a| <= drop_tol are
/// removed, so the width may shrink. Forward values are preserved up to the
/// dropped neurons' contribution.
TwoLayerNet canonicalize(const TwoLayerNet& net, double drop_tol = kDefaultDropTol);

bool is_canonical(const TwoLayerNet& net);

// JSON round trip. Serialized doubles reparse to bitwise-identical values.
std::string to_json(const TwoLayerNet& net);
std::string to_json(const DeepNet& net);
TwoLayerNet two_layer_from_json(const std::string& text);
DeepNet deep_from_json(const std::string& text);
void save_net(const TwoLayerNet& net, const std::string& path);
void save_net(const DeepNet& net, const std::string& path);
TwoLayerNet load_two_layer(const std::string& path);
DeepNet load_deep(const std::string& path);

}  // namespace relasso
