// Python bindings for the main operations: network evaluation and
// canonicalization, penalized training, matching distances, variable
// selection and the baselines.

#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "relasso/baselines.hpp"
#include "relasso/errors.hpp"
#include "relasso/harness.hpp"
#include "relasso/match.hpp"
#include "relasso/net.hpp"
#include "relasso/select.hpp"
#include "relasso/synth.hpp"
#include "relasso/train.hpp"

namespace py = pybind11;
using namespace relasso;

namespace {

TrainConfig config_from_kwargs(double lambda, int width, double lr, int epochs, int batch_size,
                               std::uint64_t seed, const std::vector<int>& hidden_widths) {
    TrainConfig config;
    config.lambda = lambda;
    config.width = width;
    config.learning_rate = lr;
    config.epochs = epochs;
    config.batch_size = batch_size;
    config.seed = seed;
    config.hidden_widths = hidden_widths;
    return config;
}

}  // namespace

PYBIND11_MODULE(relasso, m) {
    m.doc() = "LASSO-regularized two-layer ReLU networks: training, identifiability "
              "distances and variable selection";

    py::register_exception<ContractError>(m, "ContractError", PyExc_ValueError);
    py::register_exception<DivergenceError>(m, "DivergenceError", PyExc_RuntimeError);

    py::class_<TwoLayerNet>(m, "TwoLayerNet")
        .def(py::init([](Eigen::MatrixXd W, Eigen::VectorXd a, Eigen::VectorXd b) {
                 return make_two_layer(std::move(W), std::move(a), std::move(b));
             }),
             py::arg("W"), py::arg("a"), py::arg("b"))
        .def_readonly("W", &TwoLayerNet::W)
        .def_readonly("a", &TwoLayerNet::a)
        .def_readonly("b", &TwoLayerNet::b)
        .def_property_readonly("input_dim", &TwoLayerNet::input_dim)
        .def_property_readonly("width", &TwoLayerNet::width)
        .def("__repr__", [](const TwoLayerNet& net) {
            return "TwoLayerNet(p=" + std::to_string(net.input_dim()) +
                   ", r=" + std::to_string(net.width()) + ")";
        });

    py::class_<DeepNet>(m, "DeepNet")
        .def_readonly("W", &DeepNet::W)
        .def_readonly("b", &DeepNet::b)
        .def_readonly("out", &DeepNet::out)
        .def_property_readonly("n_hidden",
                               [](const DeepNet& net) { return net.hidden.size(); });

    m.def("forward", &forward, py::arg("net"), py::arg("x"));
    m.def("forward_batch", &forward_batch, py::arg("net"), py::arg("X"));
    m.def("forward_deep_batch", &forward_deep_batch, py::arg("net"), py::arg("X"));
    m.def(
        "canonicalize",
        [](const TwoLayerNet& net, double drop_tol) { return canonicalize(net, drop_tol); },
        py::arg("net"), py::arg("drop_tol") = kDefaultDropTol);
    m.def("to_two_layer", &to_two_layer, py::arg("net"));
    m.def("net_to_json", py::overload_cast<const TwoLayerNet&>(&to_json));
    m.def("net_from_json", &two_layer_from_json);

    m.def("penalized_loss",
          py::overload_cast<const TwoLayerNet&, const Eigen::MatrixXd&, const Eigen::VectorXd&,
                            double>(&penalized_loss),
          py::arg("net"), py::arg("X"), py::arg("y"), py::arg("lambda_"));

    py::class_<FitResult>(m, "FitResult")
        .def_readonly("net", &FitResult::net)
        .def_readonly("train_loss_trace", &FitResult::train_loss_trace)
        .def_readonly("val_mse", &FitResult::val_mse)
        .def("two_layer", &FitResult::two_layer);

    m.def(
        "fit",
        [](const Eigen::MatrixXd& X, const Eigen::VectorXd& y, double lambda, int width,
           double lr, int epochs, int batch_size, std::uint64_t seed,
           const std::vector<int>& hidden_widths) {
            return fit(X, y,
                       config_from_kwargs(lambda, width, lr, epochs, batch_size, seed,
                                          hidden_widths));
        },
        py::arg("X"), py::arg("y"), py::arg("lambda_") = 0.01, py::arg("width") = 20,
        py::arg("lr") = 0.01, py::arg("epochs") = 100, py::arg("batch_size") = 32,
        py::arg("seed") = 0, py::arg("hidden_widths") = std::vector<int>{});

    py::class_<MatchResult>(m, "MatchResult")
        .def_readonly("permutation", &MatchResult::permutation)
        .def_readonly("D1", &MatchResult::D1)
        .def_readonly("D2", &MatchResult::D2);

    m.def("match_networks", &match_networks, py::arg("a"), py::arg("b"));
    m.def("brute_force_match", &brute_force_match, py::arg("a"), py::arg("b"));
    m.def("pair_d1", &pair_d1);
    m.def("pair_d2", &pair_d2);

    py::class_<AssumptionReport>(m, "AssumptionReport")
        .def_readonly("norm_lower_ok", &AssumptionReport::norm_lower_ok)
        .def_readonly("norm_upper_ok", &AssumptionReport::norm_upper_ok)
        .def_readonly("bias_ok", &AssumptionReport::bias_ok)
        .def_readonly("max_coherence", &AssumptionReport::max_coherence)
        .def_readonly("coherence_ok", &AssumptionReport::coherence_ok)
        .def("all_ok", &AssumptionReport::all_ok);
    m.def("check_assumption1", &check_assumption1, py::arg("net"), py::arg("B"),
          py::arg("omega"));

    m.def("importance",
          [](const TwoLayerNet& net) { return importance(net).values; });
    m.def("importance_deep", [](const DeepNet& net) { return importance(net).values; });

    auto wrap = [](const Eigen::VectorXd& values) {
        ImportanceVector imp;
        imp.values = values;
        return imp;
    };
    m.def("threshold_select",
          [wrap](const Eigen::VectorXd& imp, double t) { return threshold_select(wrap(imp), t); });
    m.def("topk_select",
          [wrap](const Eigen::VectorXd& imp, int k) { return topk_select(wrap(imp), k); });
    m.def(
        "cluster_select",
        [wrap](const Eigen::VectorXd& imp, const std::string& method, std::uint64_t seed) {
            const ClusterMethod cm =
                method == "kmeans" ? ClusterMethod::kKMeans2 : ClusterMethod::kGmm2;
            return cluster_select(wrap(imp), cm, seed);
        },
        py::arg("importance"), py::arg("method") = "gmm", py::arg("seed") = 0);
    m.def("evaluate_selection", &evaluate_selection);
    m.def("auc_score", [wrap](const Eigen::VectorXd& imp, const std::vector<int>& support) {
        return auc_score(wrap(imp), support);
    });
    m.def("roc_curve", [wrap](const Eigen::VectorXd& imp, const std::vector<int>& support) {
        return roc_curve(wrap(imp), support);
    });

    py::class_<LinearFit>(m, "LinearFit")
        .def_readonly("beta", &LinearFit::beta)
        .def_readonly("intercept", &LinearFit::intercept)
        .def_readonly("lambda_or_k", &LinearFit::lambda_or_k)
        .def_readonly("iterations", &LinearFit::iterations);
    m.def(
        "lasso_cd",
        [](const Eigen::MatrixXd& X, const Eigen::VectorXd& y, double lambda, double tol,
           int max_iter) { return lasso_cd(X, y, lambda, tol, max_iter); },
        py::arg("X"), py::arg("y"), py::arg("lambda_"), py::arg("tol") = 1e-8,
        py::arg("max_iter") = 1000);
    m.def("lasso_lambda_max", &lasso_lambda_max);
    m.def("omp", &omp, py::arg("X"), py::arg("y"), py::arg("k"));
    m.def("linear_importance", [](const LinearFit& fit) { return linear_importance(fit).values; });
    m.def("predict", &predict, py::arg("fit"), py::arg("X"));

    py::class_<Dataset>(m, "Dataset")
        .def_readonly("X", &Dataset::X)
        .def_readonly("y", &Dataset::y)
        .def_readonly("true_support", &Dataset::true_support)
        .def_readonly("planted_net", &Dataset::planted_net);

    m.def(
        "gen_planted",
        [](int p, int r_star, int s, int n_train, int n_test, double sigma, std::uint64_t seed,
           bool normalize_columns) {
            return gen_planted({p, r_star, s, n_train, n_test, sigma, seed, normalize_columns});
        },
        py::arg("p") = 100, py::arg("r_star") = 16, py::arg("s") = 10, py::arg("n_train") = 500,
        py::arg("n_test") = 2000, py::arg("sigma") = 0.0, py::arg("seed") = 0,
        py::arg("normalize_columns") = false);
    m.def(
        "gen_linear",
        [](int n_train, int n_test, double sigma, std::uint64_t seed) {
            return gen_linear({n_train, n_test, sigma, seed});
        },
        py::arg("n_train") = 60, py::arg("n_test") = 200, py::arg("sigma") = 0.0,
        py::arg("seed") = 0);
    m.def(
        "gen_friedman",
        [](int p, int n_train, int n_test, double sigma, std::uint64_t seed) {
            return gen_friedman({p, n_train, n_test, sigma, seed});
        },
        py::arg("p") = 50, py::arg("n_train") = 500, py::arg("n_test") = 2000,
        py::arg("sigma") = 0.0, py::arg("seed") = 0);
    m.def("friedman_response", &friedman_response);
}
