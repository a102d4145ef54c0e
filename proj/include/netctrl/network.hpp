#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <vector>

#include "netctrl/errors.hpp"

namespace netctrl {

// Weighted undirected network: symmetric adjacency plus optional node labels.
struct Network {
    Eigen::MatrixXd adjacency;
    std::vector<std::string> labels;  // optional, size 0 or n

    int size() const { return static_cast<int>(adjacency.rows()); }
};

// Validates symmetry (exact) and finiteness, returns the wrapped network.
Network make_network(Eigen::MatrixXd adjacency, std::vector<std::string> labels = {});

// Erdos-Renyi style recipe: each pair gets an edge with probability p and a
// uniform weight from [weight_lo, weight_hi]; every node gets a self loop of
// weight a + s_i where s_i is minus the sum of its off-diagonal row entries.
// This pins the spectrum near the offset a for weak couplings.
struct ErRecipe {
    int n = 0;
    double edge_prob = 0.0;
    double weight_lo = 0.0;
    double weight_hi = 0.0;
    double self_loop_offset = 0.0;
    std::uint64_t seed = 0;
};

Network generate_er(const ErRecipe& recipe);

// Edge-list text format: `i j w` per line, 1-based indices, `#` comments and
// blank lines ignored. Missing mirror entries are added; listing the same
// unordered pair twice is a format error. n == 0 derives the size from the
// largest index seen.
Network load_edge_list(const std::string& path, int n = 0);
Network parse_edge_list(const std::string& text, int n = 0);

// JSON export stores only the upper triangle plus diagonal:
// {"n": ..., "entries": [[i, j, w], ...]} with 1-based indices.
std::string network_to_json(const Network& network);
Network network_from_json(const std::string& json_text);

// Continuous-time system to be sampled at a fixed period.
struct ContinuousSystem {
    Eigen::MatrixXd sys_matrix;    // n x n
    Eigen::MatrixXd input_matrix;  // n x m
    double sampling_period = 0.0;  // > 0
};

struct DiscretizedSystem {
    Eigen::MatrixXd A;
    Eigen::MatrixXd B;
};

// Zero-order-hold discretization: A = exp(sys * eta), B = (int_0^eta exp(sys t) dt) * input.
// The integral is evaluated through the augmented-matrix exponential, so A is
// nonsingular by construction.
DiscretizedSystem discretize(const ContinuousSystem& cs);

}  // namespace netctrl
