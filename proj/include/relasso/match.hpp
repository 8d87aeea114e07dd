#pragma once

#include <Eigen/Dense>
#include <utility>
#include <vector>

#include "relasso/net.hpp"

namespace relasso {

/// Result of matching the neurons of two canonical networks.
///
/// D1 and D2 are each minimized under their own optimal permutation;
/// `permutation` reports the D2-optimal one, with permutation[j] giving the
/// index of the first net's neuron (after padding) matched to neuron j of
/// the second net. per_neuron[j] carries the d1 cost under the D1-optimal
/// matching and the d2 cost and sign flag under the D2-optimal matching.
struct MatchResult {
    std::vector<int> permutation;
    double D1 = 0.0;
    double D2 = 0.0;
    struct NeuronMatch {
        double d1;
        double d2;
        bool sign_agree;
    };
    std::vector<NeuronMatch> per_neuron;
};

/// Per-neuron l1 distance between sign-canonical neurons:
/// |w1 - w2|_1 + |b1 - b2| when the signs agree, otherwise the combined
/// mass |w1|_1 + |w2|_1 + |b1| + |b2|.
double pair_d1(const Eigen::VectorXd& w1, double a1, double b1, const Eigen::VectorXd& w2,
               double a2, double b2);

/// Per-neuron l2 distance: sqrt(|w1 - w2|_2^2 + (b1 - b2)^2) when the signs
/// agree, otherwise the constant 1.
double pair_d2(const Eigen::VectorXd& w1, double a1, double b1, const Eigen::VectorXd& w2,
               double a2, double b2);

/// Matches neurons by exact minimum-cost assignment. Both nets must be
/// canonical (a in {-1, +1}) with equal input dimension; the narrower net is
/// padded with zero neurons. A pad stands for an absent neuron: it costs the
/// matched neuron's full mass (|w|_1 + |b| for d1, sqrt(|w|_2^2 + b^2) for
/// d2) regardless of its sign, and two pads cost nothing.
MatchResult match_networks(const TwoLayerNet& a, const TwoLayerNet& b);

/// Exhaustive minimum over all permutations; refuses padded width above 8.
MatchResult brute_force_match(const TwoLayerNet& a, const TwoLayerNet& b);

/// Exact solver for the linear assignment problem on a square cost matrix
/// (shortest augmenting path). Returns (row index assigned to each column,
/// total cost).
std::pair<std::vector<int>, double> solve_assignment(const Eigen::MatrixXd& cost);

/// Per-neuron norm and bias bounds plus the pairwise coherence condition of
/// the recovery theory. Neurons with a zero weight vector fail the lower
/// norm bound and are excluded from the coherence maximum.
struct AssumptionReport {
    std::vector<bool> norm_lower_ok;  // |w_j|_2 >= 1
    std::vector<bool> norm_upper_ok;  // |w_j|_2 <= B
    std::vector<bool> bias_ok;        // |b_j| <= B
    std::vector<bool> zero_norm;      // |w_j|_2 == 0
    double max_coherence = 0.0;
    bool coherence_ok = true;  // max_coherence <= r^(-omega)
    double B = 1.0;
    double omega = 1.0;

    bool all_ok() const;
};

AssumptionReport check_assumption1(const TwoLayerNet& net, double B, double omega);

}  // namespace relasso
