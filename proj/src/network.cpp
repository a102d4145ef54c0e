#include "netctrl/network.hpp"

#include <unsupported/Eigen/MatrixFunctions>

#include <cctype>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>
#include <utility>

#include "json.hpp"
#include "netctrl/rng.hpp"

namespace netctrl {

Network make_network(Eigen::MatrixXd adjacency, std::vector<std::string> labels) {
    const auto n = adjacency.rows();
    if (n < 1 || adjacency.cols() != n)
        throw ParameterError("adjacency must be a square matrix with n >= 1");
    if (!adjacency.allFinite())
        throw ParameterError("adjacency entries must be finite");
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = i + 1; j < n; ++j)
            if (adjacency(i, j) != adjacency(j, i))
                throw ParameterError("adjacency must be exactly symmetric");
    if (!labels.empty() && static_cast<Eigen::Index>(labels.size()) != n)
        throw ParameterError("labels must be empty or have one entry per node");
    return Network{std::move(adjacency), std::move(labels)};
}

Network generate_er(const ErRecipe& recipe) {
    if (recipe.n < 1) throw ParameterError("ErRecipe: n must be >= 1");
    if (!(recipe.edge_prob >= 0.0 && recipe.edge_prob <= 1.0))
        throw ParameterError("ErRecipe: edge probability must lie in [0, 1]");
    if (!(recipe.weight_lo <= recipe.weight_hi))
        throw ParameterError("ErRecipe: weight interval must satisfy lo <= hi");

    const int n = recipe.n;
    Eigen::MatrixXd A = Eigen::MatrixXd::Zero(n, n);
    Rng rng(recipe.seed);
    // Fixed pair order (row major over i<j); the weight draw happens only for
    // realized edges, so the stream is fully determined by the seed.
    for (int i = 0; i < n; ++i) {
        for (int j = i + 1; j < n; ++j) {
            if (rng.bernoulli(recipe.edge_prob)) {
                const double w = rng.uniform(recipe.weight_lo, recipe.weight_hi);
                A(i, j) = w;
                A(j, i) = w;
            }
        }
    }
    for (int i = 0; i < n; ++i) {
        double off = 0.0;
        for (int j = 0; j < n; ++j)
            if (j != i) off += A(i, j);
        A(i, i) = recipe.self_loop_offset - off;  // a + s_i with s_i = -sum_j a_ij
    }
    return Network{std::move(A), {}};
}

Network parse_edge_list(const std::string& text, int n) {
    struct Entry {
        int i, j;
        double w;
    };
    std::vector<Entry> entries;
    std::map<std::pair<int, int>, double> seen;
    int max_index = 0;

    std::istringstream stream(text);
    std::string line;
    int lineno = 0;
    while (std::getline(stream, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        bool blank = true;
        for (char c : line)
            if (!std::isspace(static_cast<unsigned char>(c))) blank = false;
        if (blank) continue;

        std::istringstream fields(line);
        int i = 0, j = 0;
        double w = 0.0;
        if (!(fields >> i >> j >> w))
            throw FormatError("edge list line " + std::to_string(lineno) +
                              ": expected `i j w`");
        std::string trailing;
        if (fields >> trailing)
            throw FormatError("edge list line " + std::to_string(lineno) +
                              ": unexpected trailing field '" + trailing + "'");
        if (i < 1 || j < 1)
            throw FormatError("edge list line " + std::to_string(lineno) +
                              ": indices are 1-based and must be positive");
        const auto key = std::minmax(i, j);
        if (auto it = seen.find(key); it != seen.end()) {
            throw FormatError("edge list line " + std::to_string(lineno) + ": pair (" +
                              std::to_string(key.first) + "," + std::to_string(key.second) +
                              ") listed more than once" +
                              (it->second != w ? " with conflicting weights" : ""));
        }
        seen.emplace(key, w);
        entries.push_back({i, j, w});
        max_index = std::max({max_index, i, j});
    }

    if (n == 0) n = max_index;
    if (n < 1) throw FormatError("edge list defines no nodes");
    if (max_index > n)
        throw FormatError("edge list index " + std::to_string(max_index) +
                          " out of range for n = " + std::to_string(n));

    Eigen::MatrixXd A = Eigen::MatrixXd::Zero(n, n);
    for (const auto& e : entries) {
        A(e.i - 1, e.j - 1) = e.w;
        A(e.j - 1, e.i - 1) = e.w;
    }
    return Network{std::move(A), {}};
}

Network load_edge_list(const std::string& path, int n) {
    std::ifstream in(path);
    if (!in) throw FormatError("cannot open edge list file: " + path);
    std::stringstream buf;
    buf << in.rdbuf();
    return parse_edge_list(buf.str(), n);
}

std::string network_to_json(const Network& network) {
    nlohmann::json j;
    const int n = network.size();
    j["n"] = n;
    auto entries = nlohmann::json::array();
    for (int i = 0; i < n; ++i)
        for (int k = i; k < n; ++k)
            if (network.adjacency(i, k) != 0.0)
                entries.push_back({i + 1, k + 1, network.adjacency(i, k)});
    j["entries"] = std::move(entries);
    if (!network.labels.empty()) j["labels"] = network.labels;
    return j.dump(2);
}

Network network_from_json(const std::string& json_text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(json_text);
    } catch (const nlohmann::json::parse_error& err) {
        throw FormatError(std::string("network JSON: ") + err.what());
    }
    if (!j.contains("n") || !j.contains("entries"))
        throw FormatError("network JSON: missing 'n' or 'entries'");
    const int n = j["n"].get<int>();
    if (n < 1) throw FormatError("network JSON: n must be >= 1");
    Eigen::MatrixXd A = Eigen::MatrixXd::Zero(n, n);
    for (const auto& e : j["entries"]) {
        if (!e.is_array() || e.size() != 3)
            throw FormatError("network JSON: entries must be [i, j, w] triples");
        const int i = e[0].get<int>(), k = e[1].get<int>();
        const double w = e[2].get<double>();
        if (i < 1 || i > n || k < 1 || k > n)
            throw FormatError("network JSON: index out of range");
        A(i - 1, k - 1) = w;
        A(k - 1, i - 1) = w;
    }
    std::vector<std::string> labels;
    if (j.contains("labels")) labels = j["labels"].get<std::vector<std::string>>();
    return make_network(std::move(A), std::move(labels));
}

DiscretizedSystem discretize(const ContinuousSystem& cs) {
    const auto n = cs.sys_matrix.rows();
    if (cs.sys_matrix.cols() != n) throw ParameterError("discretize: sys_matrix must be square");
    if (cs.input_matrix.rows() != n)
        throw ParameterError("discretize: input_matrix row count must match sys_matrix");
    if (!(cs.sampling_period > 0.0))
        throw ParameterError("discretize: sampling period must be positive");

    // exp([[S, I], [0, 0]] * eta) = [[exp(S eta), int_0^eta exp(S t) dt], [0, I]]
    Eigen::MatrixXd aug = Eigen::MatrixXd::Zero(2 * n, 2 * n);
    aug.topLeftCorner(n, n) = cs.sys_matrix;
    aug.topRightCorner(n, n) = Eigen::MatrixXd::Identity(n, n);
    const Eigen::MatrixXd aug_exp = (aug * cs.sampling_period).exp();

    DiscretizedSystem out;
    out.A = aug_exp.topLeftCorner(n, n);
    out.B = aug_exp.topRightCorner(n, n) * cs.input_matrix;
    if (!out.A.allFinite() || !out.B.allFinite())
        throw NumericalError("discretize: matrix exponential overflowed");
    return out;
}

}  // namespace netctrl
