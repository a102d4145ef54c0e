#include "netctrl/experiments.hpp"

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <set>
#include <sstream>

#include "json.hpp"
#include "netctrl/rng.hpp"

namespace netctrl {

namespace {

std::string fmt17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

std::string join_path(const std::string& dir, const std::string& name) {
    return (std::filesystem::path(dir) / name).string();
}

std::ofstream open_out(const std::string& path) {
    std::ofstream out(path);
    if (!out) throw FormatError("cannot open output file: " + path);
    return out;
}

nlohmann::json matrix_json(const Eigen::MatrixXd& M) {
    nlohmann::json rows = nlohmann::json::array();
    for (Eigen::Index i = 0; i < M.rows(); ++i) {
        nlohmann::json row = nlohmann::json::array();
        for (Eigen::Index j = 0; j < M.cols(); ++j) row.push_back(M(i, j));
        rows.push_back(std::move(row));
    }
    return rows;
}

std::vector<int> to_one_based(std::vector<int> v) {
    for (int& x : v) ++x;
    return v;
}

// target system with the selected targets permuted to the front, as the
// closed-form machinery expects
struct TargetSystem {
    Eigen::MatrixXd A;  // permuted adjacency
    Eigen::MatrixXd B;
    Eigen::MatrixXd C;                // r x n
    ControllableDecomposition dec;    // of the permuted pair
    std::vector<int> driver_pos;      // 1-based, <= rank
    std::vector<int> target_nodes;    // original 1-based ids, ascending
    std::vector<int> driver_nodes;    // original 1-based ids
    Eigen::VectorXd lambda_c;         // |.| ascending
};

std::vector<int> auto_drivers(const Network& net, int count) {
    const auto comps = connected_components(net.adjacency);
    const auto& comp = comps.front();
    if (static_cast<int>(comp.size()) < count)
        throw ParameterError("auto driver selection: largest component smaller than requested");
    return std::vector<int>(comp.begin(), comp.begin() + count);  // 0-based
}

TargetSystem prepare_target_system(const Network& net, std::vector<int> drivers0,
                                   const std::vector<int>& explicit_targets0) {
    const int n = net.size();
    std::sort(drivers0.begin(), drivers0.end());

    // Iterate: decompose, pick spanning targets, move them to the front, and
    // re-decompose until the rank agrees with the target count. The rank of a
    // borderline-conditioned Krylov matrix can flip under column reordering,
    // so a fixed point may need a couple of rounds.
    std::vector<int> node_of(n);  // current position -> original node
    std::iota(node_of.begin(), node_of.end(), 0);
    Eigen::MatrixXd A_cur = net.adjacency;
    std::vector<int> drv_cur = drivers0;

    ControllableDecomposition dec;
    Eigen::MatrixXd B_cur;
    bool stable = false;
    for (int round = 0; round < 6 && !stable; ++round) {
        std::vector<int> drv_1based = to_one_based(drv_cur);
        B_cur = input_matrix(DriverSet{drv_1based}, n);
        dec = decompose_gram_schmidt(A_cur, B_cur);

        std::vector<int> targets_cur;
        if (!explicit_targets0.empty()) {
            if (static_cast<int>(explicit_targets0.size()) != dec.rank)
                throw ParameterError(
                    "target system: target count must equal the controllable rank " +
                    std::to_string(dec.rank));
            if (round == 0) {
                targets_cur = explicit_targets0;  // original coords on first round
            } else {
                for (int k = 0; k < dec.rank; ++k) targets_cur.push_back(k);
            }
        } else {
            targets_cur = select_spanning_targets(dec, drv_cur);
        }

        std::vector<int> front(targets_cur.begin(), targets_cur.end());
        std::sort(front.begin(), front.end());
        bool already = static_cast<int>(front.size()) == dec.rank;
        for (int k = 0; already && k < dec.rank; ++k) already = (front[k] == k);
        if (already) {
            stable = true;
            break;
        }

        std::vector<int> perm = front;
        for (int i = 0; i < n; ++i)
            if (std::find(front.begin(), front.end(), i) == front.end()) perm.push_back(i);
        Eigen::MatrixXd A_next(n, n);
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) A_next(i, j) = A_cur(perm[i], perm[j]);
        std::vector<int> node_next(n);
        for (int i = 0; i < n; ++i) node_next[i] = node_of[perm[i]];
        std::vector<int> drv_next;
        for (int d : drv_cur) {
            const auto it = std::find(perm.begin(), perm.end(), d);
            drv_next.push_back(static_cast<int>(it - perm.begin()));
        }
        std::sort(drv_next.begin(), drv_next.end());
        A_cur = std::move(A_next);
        node_of = std::move(node_next);
        drv_cur = std::move(drv_next);
    }
    if (!stable)
        throw NumericalError(
            "target system: controllable rank did not stabilize under target permutation");

    TargetSystem sys;
    sys.A = A_cur;
    sys.B = B_cur;
    sys.dec = dec;
    for (int d : drv_cur) {
        if (d >= dec.rank)
            throw NumericalError("target system: a driver fell outside the target block");
        sys.driver_pos.push_back(d + 1);
    }
    for (int k = 0; k < dec.rank; ++k) sys.target_nodes.push_back(node_of[k] + 1);
    std::sort(sys.target_nodes.begin(), sys.target_nodes.end());
    sys.driver_nodes = to_one_based(drivers0);

    TargetSet ts;
    for (int k = 1; k <= dec.rank; ++k) ts.indices.push_back(k);
    sys.C = output_matrix(ts, n);

    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(dec.A_c);
    Eigen::VectorXd lam = es.eigenvalues();
    std::sort(lam.data(), lam.data() + lam.size(),
              [](double a, double b) { return std::abs(a) < std::abs(b); });
    sys.lambda_c = lam;
    return sys;
}

std::vector<int> tau_list(const ExperimentConfig& cfg) {
    if (!cfg.tau_values.empty()) {
        auto taus = cfg.tau_values;
        std::sort(taus.begin(), taus.end());
        taus.erase(std::unique(taus.begin(), taus.end()), taus.end());
        if (taus.front() < 1) throw ParameterError("tau values must be >= 1");
        return taus;
    }
    if (cfg.tau_min < 1 || cfg.tau_max < cfg.tau_min)
        throw ParameterError("tau range must satisfy 1 <= min <= max");
    std::vector<int> taus(cfg.tau_max - cfg.tau_min + 1);
    std::iota(taus.begin(), taus.end(), cfg.tau_min);
    return taus;
}

constexpr double kExactCondLimit = 1e12;

struct ExactBoundRow {
    double upper = 0.0, lower = 0.0, cond = 0.0;
    bool upper_ok = false, lower_ok = false;
};

ExactBoundRow exact_bounds(const Eigen::MatrixXd& A, const Eigen::MatrixXd& B,
                           const Eigen::MatrixXd& C, int tau_f) {
    ExactBoundRow row;
    if (gramian_would_overflow(A, tau_f)) return row;
    const Eigen::MatrixXd W = gramian_full(A, B, tau_f);
    const Eigen::MatrixXd W_C = C * W * C.transpose();
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(W_C);
    const double lo = es.eigenvalues()(0);
    const double hi = es.eigenvalues()(es.eigenvalues().size() - 1);
    if (hi > 0.0) {
        row.lower = 1.0 / hi;
        row.lower_ok = true;
    }
    if (lo > 0.0) {
        row.cond = hi / lo;
        if (row.cond <= kExactCondLimit) {
            row.upper = 1.0 / lo;
            row.upper_ok = true;
        }
    }
    return row;
}

}  // namespace

// ---------------------------------------------------------------------------
// demonstration networks
// ---------------------------------------------------------------------------

Network demo_star4() {
    Eigen::MatrixXd A(4, 4);
    A << 0, 1, 1, 1,
         1, 1, 0, 0,
         1, 0, 0, 0,
         1, 0, 0, 0;
    return make_network(A, {"hub", "looped", "leaf-a", "leaf-b"});
}

Network demo_driver_choice5() {
    // distinct self loops on 3 and 4 keep the leaf pair controllable from 5
    Eigen::MatrixXd A = Eigen::MatrixXd::Zero(5, 5);
    A(0, 1) = A(1, 0) = 0.5;
    A(2, 2) = 3.5;
    A(3, 3) = 4.5;
    A(4, 4) = 4.0;
    A(2, 4) = A(4, 2) = 1.5;
    A(3, 4) = A(4, 3) = 2.0;
    return make_network(A);
}

Network demo_target_vs_full10(std::uint64_t seed) {
    const int n = 10;
    Eigen::VectorXd v = Eigen::VectorXd::Zero(n);
    v(0) = 1.0;
    v(1) = 2.0;
    v(2) = 1.0;
    v.normalize();

    Rng rng(seed, 42);
    Eigen::MatrixXd raw(n, n);
    raw.col(0) = v;
    for (int j = 1; j < n; ++j)
        for (int i = 0; i < n; ++i) raw(i, j) = rng.gaussian();
    const Eigen::HouseholderQR<Eigen::MatrixXd> qr(raw);
    Eigen::MatrixXd U = qr.householderQ();
    if (U.col(0).dot(v) < 0) U = -U;

    Eigen::VectorXd lam(n);
    lam(0) = 0.5;  // the mode the target drivers cannot see
    for (int k = 0; k < 9; ++k) lam(k + 1) = 1.28 + 0.09 * k;  // 1.28 .. 2.00
    Eigen::MatrixXd A = U * lam.asDiagonal() * U.transpose();
    const Eigen::MatrixXd At = A.transpose();
    A = 0.5 * (A + At);
    return make_network(A);
}

Eigen::MatrixXd demo_sphere_wc() {
    Eigen::VectorXd d(3);
    d << 0.01, 0.01, 1.0;  // condition number 100
    return d.asDiagonal();
}

Network demo_triangle3() {
    Eigen::MatrixXd A(3, 3);
    A << 0.20, 1.00, 0.60,
         1.00, -0.10, 0.80,
         0.60, 0.80, 0.40;
    return make_network(A);
}

// ---------------------------------------------------------------------------
// configuration
// ---------------------------------------------------------------------------

namespace {

RecipeKind recipe_from_string(const std::string& s) {
    if (s == "sphere-distribution") return RecipeKind::SphereDistribution;
    if (s == "decomposition-demo") return RecipeKind::DecompositionDemo;
    if (s == "bound-sweep") return RecipeKind::BoundSweep;
    if (s == "driver-comparison") return RecipeKind::DriverComparison;
    if (s == "target-vs-full") return RecipeKind::TargetVsFull;
    throw FormatError("unknown recipe: " + s);
}

const char* recipe_name(RecipeKind k) {
    switch (k) {
        case RecipeKind::SphereDistribution: return "sphere-distribution";
        case RecipeKind::DecompositionDemo: return "decomposition-demo";
        case RecipeKind::BoundSweep: return "bound-sweep";
        case RecipeKind::DriverComparison: return "driver-comparison";
        case RecipeKind::TargetVsFull: return "target-vs-full";
    }
    return "unknown";
}

}  // namespace

ExperimentConfig parse_config(const std::string& json_text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(json_text);
    } catch (const nlohmann::json::parse_error& err) {
        throw FormatError(std::string("config JSON: ") + err.what());
    }

    static const std::set<std::string> known{
        "recipe",  "network", "w_c",          "w_c_diag",       "drivers", "drivers_b",
        "targets", "x0",      "x_f",          "tau",            "samples", "rollout_steps",
        "seed",    "energy_half", "histogram_only", "auto_driver_count", "out"};
    for (auto it = j.begin(); it != j.end(); ++it)
        if (!known.count(it.key())) throw FormatError("config: unknown key '" + it.key() + "'");

    ExperimentConfig cfg;
    if (j.contains("recipe")) cfg.recipe = recipe_from_string(j["recipe"].get<std::string>());

    if (j.contains("network")) {
        const auto& net = j["network"];
        int sources = 0;
        if (net.contains("generator")) {
            const auto& g = net["generator"];
            ErRecipe recipe;
            recipe.n = g.at("n").get<int>();
            recipe.edge_prob = g.at("p").get<double>();
            recipe.weight_lo = g.at("weight_lo").get<double>();
            recipe.weight_hi = g.at("weight_hi").get<double>();
            recipe.self_loop_offset = g.at("self_loop_offset").get<double>();
            recipe.seed = g.contains("seed") ? g["seed"].get<std::uint64_t>() : 0;
            cfg.generator = recipe;
            ++sources;
        }
        if (net.contains("edge_list")) {
            cfg.edge_list = net["edge_list"].get<std::string>();
            if (net.contains("n")) cfg.edge_list_n = net["n"].get<int>();
            ++sources;
        }
        if (net.contains("builtin")) {
            cfg.builtin = net["builtin"].get<std::string>();
            ++sources;
        }
        if (sources != 1) throw FormatError("config: network needs exactly one source");
    }
    if (j.contains("w_c")) {
        const auto& rows = j["w_c"];
        const int r = static_cast<int>(rows.size());
        Eigen::MatrixXd W(r, r);
        for (int i = 0; i < r; ++i) {
            if (static_cast<int>(rows[i].size()) != r)
                throw FormatError("config: w_c must be square");
            for (int k = 0; k < r; ++k) W(i, k) = rows[i][k].get<double>();
        }
        cfg.w_c = W;
    }
    if (j.contains("w_c_diag")) {
        if (cfg.w_c) throw FormatError("config: give w_c or w_c_diag, not both");
        const auto d = j["w_c_diag"].get<std::vector<double>>();
        Eigen::MatrixXd W = Eigen::MatrixXd::Zero(d.size(), d.size());
        for (std::size_t i = 0; i < d.size(); ++i) W(i, i) = d[i];
        cfg.w_c = W;
    }

    if (j.contains("drivers")) cfg.drivers = j["drivers"].get<std::vector<int>>();
    if (j.contains("drivers_b")) cfg.drivers_b = j["drivers_b"].get<std::vector<int>>();
    if (j.contains("targets")) cfg.targets = j["targets"].get<std::vector<int>>();
    if (j.contains("auto_driver_count")) cfg.auto_driver_count = j["auto_driver_count"].get<int>();
    if (j.contains("x0")) cfg.x0 = j["x0"].get<std::vector<double>>();
    if (j.contains("x_f")) cfg.x_f = j["x_f"].get<std::vector<double>>();
    if (j.contains("tau")) {
        const auto& t = j["tau"];
        if (t.contains("values")) {
            cfg.tau_values = t["values"].get<std::vector<int>>();
        } else {
            cfg.tau_min = t.at("min").get<int>();
            cfg.tau_max = t.at("max").get<int>();
        }
    }
    if (j.contains("samples")) cfg.samples = j["samples"].get<int>();
    if (j.contains("rollout_steps")) cfg.rollout_steps = j["rollout_steps"].get<int>();
    if (j.contains("seed")) cfg.seed = j["seed"].get<std::uint64_t>();
    if (j.contains("energy_half")) cfg.energy_half = j["energy_half"].get<bool>();
    if (j.contains("histogram_only")) cfg.histogram_only = j["histogram_only"].get<bool>();
    if (j.contains("out")) cfg.out_dir = j["out"].get<std::string>();

    if (cfg.samples < 1) throw FormatError("config: samples must be >= 1");
    return cfg;
}

ExperimentConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw FormatError("cannot open config file: " + path);
    std::stringstream buf;
    buf << in.rdbuf();
    return parse_config(buf.str());
}

Network resolve_network(const ExperimentConfig& cfg) {
    if (cfg.generator) return generate_er(*cfg.generator);
    if (cfg.edge_list) return load_edge_list(*cfg.edge_list, cfg.edge_list_n);
    if (cfg.builtin) {
        const std::string& b = *cfg.builtin;
        if (b == "star4") return demo_star4();
        if (b == "driver-choice-5") return demo_driver_choice5();
        if (b == "target-vs-full-10") return demo_target_vs_full10();
        if (b == "triangle-3") return demo_triangle3();
        throw FormatError("unknown builtin network: " + b);
    }
    throw ParameterError("config does not define a network");
}

// ---------------------------------------------------------------------------
// recipes
// ---------------------------------------------------------------------------

namespace {

struct Stopwatch {
    std::chrono::steady_clock::time_point start = std::chrono::steady_clock::now();
    double ms() const {
        return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start)
            .count();
    }
};

void write_summary(const std::string& dir, nlohmann::json& j, RecipeResult& result) {
    const std::string path = join_path(dir, "summary.json");
    auto out = open_out(path);
    result.summary_json = j.dump(2);
    out << result.summary_json << "\n";
    result.files_written.push_back(path);
}

}  // namespace

RecipeResult run_sphere_distribution(const ExperimentConfig& cfg) {
    Stopwatch watch;
    std::filesystem::create_directories(cfg.out_dir);

    Eigen::MatrixXd W_C;
    nlohmann::json source_meta;
    if (cfg.w_c) {
        W_C = *cfg.w_c;
        source_meta["kind"] = "w_c";
    } else {
        const Network net = resolve_network(cfg);
        if (cfg.drivers.empty() || cfg.targets.empty())
            throw ParameterError("sphere recipe: network source needs drivers and targets");
        const Eigen::MatrixXd B =
            input_matrix(DriverSet{cfg.drivers}, net.size());
        const auto bundle =
            gramian_target(net.adjacency, B, TargetSet{cfg.targets}, cfg.tau_max);
        W_C = bundle.W_C;
        source_meta["kind"] = "network";
        source_meta["tau_f"] = cfg.tau_max;
    }
    const int r = static_cast<int>(W_C.rows());
    if (r != 3 && !cfg.histogram_only)
        throw ParameterError(
            "sphere recipe: the direction cloud is defined for r = 3 only; set "
            "histogram_only for other sizes");

    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(W_C);
    const Eigen::VectorXd mu = es.eigenvalues();
    if (!(mu(0) > 0.0)) throw ParameterError("sphere recipe: W_C must be positive definite");
    const Eigen::MatrixXd U = es.eigenvectors();
    const double scale = cfg.energy_half ? 0.5 : 1.0;

    // axis-aligned energies through the factorization path
    const Eigen::LDLT<Eigen::MatrixXd> ldlt(W_C);
    Eigen::VectorXd axis_energy(r);
    for (int k = 0; k < r; ++k) {
        Eigen::VectorXd e = Eigen::VectorXd::Unit(r, k);
        axis_energy(k) = scale * e.dot(ldlt.solve(e));
    }

    Rng rng = SeedSplitter(cfg.seed).stream(10);
    Eigen::MatrixXd dirs(r, cfg.samples);
    Eigen::VectorXd energies(cfg.samples);
    for (int s = 0; s < cfg.samples; ++s) {
        Eigen::VectorXd y(r);
        double norm2 = 0.0;
        do {
            for (int k = 0; k < r; ++k) y(k) = rng.gaussian();
            norm2 = y.squaredNorm();
        } while (norm2 < 1e-24);
        y /= std::sqrt(norm2);
        dirs.col(s) = y;
        const Eigen::VectorXd c = U.transpose() * y;
        double e = 0.0;
        for (int k = 0; k < r; ++k) e += c(k) * c(k) / mu(k);
        energies(s) = scale * e;
    }

    const double e_min = energies.minCoeff();
    const double e_max = energies.maxCoeff();
    const double lo_bound = scale / mu(r - 1), hi_bound = scale / mu(0);
    const bool sandwich_ok = e_min >= lo_bound * (1 - 1e-9) - 1e-12 &&
                             e_max <= hi_bound * (1 + 1e-9) + 1e-12;

    // ten equal-width bins spanning [min, max]
    std::array<long, 10> counts{};
    const double width = (e_max - e_min) / 10.0;
    for (int s = 0; s < cfg.samples; ++s) {
        int bin = width > 0.0 ? static_cast<int>((energies(s) - e_min) / width) : 0;
        bin = std::clamp(bin, 0, 9);
        counts[static_cast<std::size_t>(bin)]++;
    }
    std::array<long, 4> quartiles{};
    for (int s = 0; s < cfg.samples; ++s) {
        const double rho = energies(s) / e_max;
        int q = rho <= 0.25 ? 0 : rho <= 0.5 ? 1 : rho <= 0.75 ? 2 : 3;
        quartiles[static_cast<std::size_t>(q)]++;
    }

    RecipeResult result;
    {
        const std::string path = join_path(cfg.out_dir, "histogram.csv");
        auto out = open_out(path);
        out << "bin_lo,bin_hi,count,share\n";
        for (int b = 0; b < 10; ++b) {
            const double lo = e_min + b * width, hi = (b == 9) ? e_max : e_min + (b + 1) * width;
            out << fmt17(lo) << "," << fmt17(hi) << "," << counts[b] << ","
                << fmt17(static_cast<double>(counts[b]) / cfg.samples) << "\n";
        }
        result.files_written.push_back(path);
    }
    if (r == 3) {
        const std::string path = join_path(cfg.out_dir, "cloud.csv");
        auto out = open_out(path);
        out << "x,y,z,E\n";
        for (int s = 0; s < cfg.samples; ++s) {
            const double d = std::log(energies(s));
            out << fmt17(d * dirs(0, s)) << "," << fmt17(d * dirs(1, s)) << ","
                << fmt17(d * dirs(2, s)) << "," << fmt17(energies(s)) << "\n";
        }
        result.files_written.push_back(path);
    }

    nlohmann::json summary;
    summary["recipe"] = recipe_name(RecipeKind::SphereDistribution);
    summary["seed"] = cfg.seed;
    summary["samples"] = cfg.samples;
    summary["r"] = r;
    summary["source"] = source_meta;
    summary["energy_half"] = cfg.energy_half;
    summary["E_min"] = e_min;
    summary["E_max"] = e_max;
    summary["condition_number"] = mu(r - 1) / mu(0);
    summary["quartile_shares"] = {
        static_cast<double>(quartiles[0]) / cfg.samples,
        static_cast<double>(quartiles[1]) / cfg.samples,
        static_cast<double>(quartiles[2]) / cfg.samples,
        static_cast<double>(quartiles[3]) / cfg.samples};
    summary["top_quartile_share"] = static_cast<double>(quartiles[3]) / cfg.samples;
    std::vector<double> axes(axis_energy.data(), axis_energy.data() + r);
    summary["axis_energies"] = axes;
    summary["sandwich_ok"] = sandwich_ok;
    summary["runtime_ms"] = watch.ms();
    write_summary(cfg.out_dir, summary, result);
    return result;
}

RecipeResult run_decomposition_demo(const ExperimentConfig& cfg) {
    Stopwatch watch;
    std::filesystem::create_directories(cfg.out_dir);
    const Network net = resolve_network(cfg);
    const int n = net.size();
    std::vector<int> drivers = cfg.drivers;
    if (drivers.empty()) drivers = to_one_based(auto_drivers(net, cfg.auto_driver_count));
    const Eigen::MatrixXd B = input_matrix(DriverSet{drivers}, n);
    const auto dec = decompose_gram_schmidt(net.adjacency, B);
    const auto members = controllable_node_members(dec);

    RecipeResult result;
    {
        const std::string path = join_path(cfg.out_dir, "report.json");
        auto out = open_out(path);
        out << decomposition_report_json(dec, members) << "\n";
        result.files_written.push_back(path);
    }

    nlohmann::json summary;
    summary["recipe"] = recipe_name(RecipeKind::DecompositionDemo);
    summary["seed"] = cfg.seed;
    summary["rank"] = dec.rank;
    summary["n"] = n;
    summary["drivers"] = drivers;
    summary["controllable_members"] = members;

    if (dec.rank < n) {
        // random rollouts from the origin must stay inside the controllable
        // subspace: coordinates along the uncontrollable basis rows vanish
        Rng rng = SeedSplitter(cfg.seed).stream(20);
        const int rollouts = std::min(cfg.samples, 5000);
        const Eigen::MatrixXd R_nc = dec.R.bottomRows(n - dec.rank);
        double worst = 0.0;
        for (int s = 0; s < rollouts; ++s) {
            Eigen::VectorXd x = Eigen::VectorXd::Zero(n);
            for (int t = 0; t < cfg.rollout_steps; ++t) {
                Eigen::VectorXd u(B.cols());
                for (Eigen::Index k = 0; k < u.size(); ++k) u(k) = rng.gaussian();
                x = net.adjacency * x + B * u;
                const double residual =
                    (R_nc * x).cwiseAbs().maxCoeff() / std::max(1.0, x.norm());
                worst = std::max(worst, residual);
            }
        }
        summary["rollouts"] = rollouts;
        summary["rollout_steps"] = cfg.rollout_steps;
        summary["max_constraint_residual"] = worst;
        summary["constraint_ok"] = (worst <= 1e-8);
    } else {
        summary["notice"] = "system is fully controllable; no subspace constraint to check";
    }
    summary["runtime_ms"] = watch.ms();
    write_summary(cfg.out_dir, summary, result);
    return result;
}

namespace {

struct SweepRow {
    int tau_f = 0;
    ExactBoundRow exact;
    BoundEstimate est;
};

std::vector<SweepRow> sweep_rows(const TargetSystem& sys, const std::vector<int>& taus) {
    std::vector<SweepRow> rows;
    rows.reserve(taus.size());
    for (int tau : taus) {
        SweepRow row;
        row.tau_f = tau;
        row.exact = exact_bounds(sys.A, sys.B, sys.C, tau);
        row.est = estimate_bounds(sys.dec, sys.driver_pos, tau);
        rows.push_back(row);
    }
    return rows;
}

nlohmann::json system_meta(const TargetSystem& sys, const ExperimentConfig& cfg) {
    nlohmann::json j;
    j["n"] = static_cast<int>(sys.A.rows());
    j["r"] = sys.dec.rank;
    j["m"] = static_cast<int>(sys.driver_nodes.size());
    j["drivers"] = sys.driver_nodes;
    j["targets"] = sys.target_nodes;
    j["lambda_c1"] = std::abs(sys.lambda_c(0));
    j["lambda_cr"] = std::abs(sys.lambda_c(sys.lambda_c.size() - 1));
    std::vector<double> lam(sys.lambda_c.data(), sys.lambda_c.data() + sys.lambda_c.size());
    j["spectrum_c"] = lam;
    j["regime_upper"] = regime_label(classify_regime(sys.lambda_c, BoundSide::Upper));
    j["regime_lower"] = regime_label(classify_regime(sys.lambda_c, BoundSide::Lower));
    j["reconstruction"] = cfg.builtin.has_value();
    return j;
}

}  // namespace

RecipeResult run_bound_sweep(const ExperimentConfig& cfg) {
    Stopwatch watch;
    std::filesystem::create_directories(cfg.out_dir);
    const Network net = resolve_network(cfg);

    std::vector<int> drivers0;
    if (cfg.drivers.empty()) {
        drivers0 = auto_drivers(net, cfg.auto_driver_count);
    } else {
        for (int d : cfg.drivers) drivers0.push_back(d - 1);
    }
    std::vector<int> targets0;
    for (int t : cfg.targets) targets0.push_back(t - 1);

    const TargetSystem sys = prepare_target_system(net, drivers0, targets0);
    const auto taus = tau_list(cfg);
    const auto rows = sweep_rows(sys, taus);

    RecipeResult result;
    const std::string path = join_path(cfg.out_dir, "bound_sweep.csv");
    {
        auto out = open_out(path);
        out << "tau_f,E_exact_upper,E_exact_lower,E_est_upper,E_est_lower,"
               "log10_E_est_upper,log10_E_est_lower,regime_upper,regime_lower,"
               "exact_upper_ok,overflow\n";
        for (const auto& row : rows) {
            out << row.tau_f << ",";
            out << (row.exact.upper_ok ? fmt17(row.exact.upper) : "") << ",";
            out << (row.exact.lower_ok ? fmt17(row.exact.lower) : "") << ",";
            out << (!row.est.overflow_upper ? fmt17(row.est.E_upper) : "") << ",";
            out << (!row.est.overflow_lower ? fmt17(row.est.E_lower) : "") << ",";
            out << fmt17(row.est.log10_E_upper) << "," << fmt17(row.est.log10_E_lower) << ",";
            out << regime_label(row.est.regime_upper) << "," << regime_label(row.est.regime_lower)
                << ",";
            out << (row.exact.upper_ok ? 1 : 0) << ","
                << ((row.est.overflow_upper || row.est.overflow_lower) ? 1 : 0) << "\n";
        }
        result.files_written.push_back(path);
    }

    nlohmann::json summary;
    summary["recipe"] = recipe_name(RecipeKind::BoundSweep);
    summary["seed"] = cfg.seed;
    summary["system"] = system_meta(sys, cfg);
    summary["rows"] = static_cast<int>(rows.size());
    summary["runtime_ms"] = watch.ms();
    write_summary(cfg.out_dir, summary, result);
    return result;
}

RecipeResult run_driver_comparison(const ExperimentConfig& cfg) {
    Stopwatch watch;
    std::filesystem::create_directories(cfg.out_dir);
    const Network net = resolve_network(cfg);
    if (cfg.drivers.empty() || cfg.drivers_b.empty())
        throw ParameterError("driver comparison: both drivers and drivers_b are required");

    std::vector<int> da, db;
    for (int d : cfg.drivers) da.push_back(d - 1);
    for (int d : cfg.drivers_b) db.push_back(d - 1);

    const TargetSystem sa = prepare_target_system(net, da, {});
    const TargetSystem sb = prepare_target_system(net, db, {});
    const auto taus = tau_list(cfg);
    const auto rows_a = sweep_rows(sa, taus);
    const auto rows_b = sweep_rows(sb, taus);

    RecipeResult result;
    const std::string path = join_path(cfg.out_dir, "driver_comparison.csv");
    {
        auto out = open_out(path);
        out << "tau_f,E_upper_a,log10_E_upper_a,E_exact_upper_a,"
               "E_upper_b,log10_E_upper_b,E_exact_upper_b\n";
        for (std::size_t i = 0; i < taus.size(); ++i) {
            out << taus[i] << ",";
            out << (!rows_a[i].est.overflow_upper ? fmt17(rows_a[i].est.E_upper) : "") << ",";
            out << fmt17(rows_a[i].est.log10_E_upper) << ",";
            out << (rows_a[i].exact.upper_ok ? fmt17(rows_a[i].exact.upper) : "") << ",";
            out << (!rows_b[i].est.overflow_upper ? fmt17(rows_b[i].est.E_upper) : "") << ",";
            out << fmt17(rows_b[i].est.log10_E_upper) << ",";
            out << (rows_b[i].exact.upper_ok ? fmt17(rows_b[i].exact.upper) : "") << "\n";
        }
        result.files_written.push_back(path);
    }

    auto describe = [](const TargetSystem& sys) {
        const Regime up = classify_regime(sys.lambda_c, BoundSide::Upper);
        nlohmann::json j;
        j["controllable_set_size"] = sys.dec.rank;
        j["controllable_nodes"] = sys.target_nodes;
        j["lambda_c1"] = std::abs(sys.lambda_c(0));
        j["lambda_cr"] = std::abs(sys.lambda_c(sys.lambda_c.size() - 1));
        j["regime_upper"] = regime_label(up);
        j["verdict"] = up.kind == RegimeKind::Constant
                           ? "upper bound approaches a constant"
                           : (up.kind == RegimeKind::PowerLaw
                                  ? "upper bound decays exponentially in tau_f"
                                  : "upper bound decays like 1/tau_f");
        return j;
    };

    nlohmann::json summary;
    summary["recipe"] = recipe_name(RecipeKind::DriverComparison);
    summary["seed"] = cfg.seed;
    summary["choice_a"] = describe(sa);
    summary["choice_a"]["drivers"] = cfg.drivers;
    summary["choice_b"] = describe(sb);
    summary["choice_b"]["drivers"] = cfg.drivers_b;
    summary["reconstruction"] = cfg.builtin.has_value();
    summary["runtime_ms"] = watch.ms();
    write_summary(cfg.out_dir, summary, result);
    return result;
}

RecipeResult run_target_vs_full(const ExperimentConfig& cfg) {
    Stopwatch watch;
    std::filesystem::create_directories(cfg.out_dir);
    const Network net = resolve_network(cfg);
    const int n = net.size();
    if (cfg.drivers.empty() || cfg.drivers_b.empty())
        throw ParameterError("target-vs-full: drivers (target set) and drivers_b (full set) required");

    std::vector<int> dt0;
    for (int d : cfg.drivers) dt0.push_back(d - 1);
    std::vector<int> targets = cfg.targets;
    if (targets.empty()) {
        const auto dec0 =
            decompose_gram_schmidt(net.adjacency, input_matrix(DriverSet{cfg.drivers}, n));
        targets = to_one_based(select_spanning_targets(dec0, dt0));
    }

    Eigen::VectorXd x_f = Eigen::VectorXd::Ones(n);
    if (!cfg.x_f.empty()) {
        if (static_cast<int>(cfg.x_f.size()) != n)
            throw ParameterError("target-vs-full: x_f must have n entries");
        x_f = Eigen::Map<const Eigen::VectorXd>(cfg.x_f.data(), n);
    }
    Eigen::VectorXd x0 = Eigen::VectorXd::Zero(n);
    if (!cfg.x0.empty()) {
        if (static_cast<int>(cfg.x0.size()) != n)
            throw ParameterError("target-vs-full: x0 must have n entries");
        x0 = Eigen::Map<const Eigen::VectorXd>(cfg.x0.data(), n);
    }
    Eigen::VectorXd y_f(targets.size());
    for (std::size_t k = 0; k < targets.size(); ++k) y_f(k) = x_f(targets[k] - 1);

    const Eigen::MatrixXd Bt = input_matrix(DriverSet{cfg.drivers}, n);
    const Eigen::MatrixXd Bf = input_matrix(DriverSet{cfg.drivers_b}, n);
    TargetSet ts{targets};
    TargetSet all;
    for (int k = 1; k <= n; ++k) all.indices.push_back(k);
    const auto convention = cfg.energy_half ? EnergyConvention::HalfSum : EnergyConvention::Sum;

    struct Row {
        int tau;
        double et, ef, ratio, cond_t, cond_f;
    };
    std::vector<Row> rows;
    int smallest_feasible = -1;
    bool sandwich_ok = true;
    const Eigen::MatrixXd C = output_matrix(ts, n);
    for (int tau : tau_list(cfg)) {
        Row row{tau, 0, 0, 0, 0, 0};
        Eigen::VectorXd eig_t;
        try {
            const Eigen::MatrixXd W_C =
                C * gramian_full(net.adjacency, Bt, tau) * C.transpose();
            const Eigen::MatrixXd W_F = gramian_full(net.adjacency, Bf, tau);
            Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> est(W_C), esf(W_F);
            eig_t = est.eigenvalues();
            if (!(est.eigenvalues()(0) > 0.0) || !(esf.eigenvalues()(0) > 0.0)) continue;
            row.cond_t = est.eigenvalues().maxCoeff() / est.eigenvalues().minCoeff();
            row.cond_f = esf.eigenvalues().maxCoeff() / esf.eigenvalues().minCoeff();
            if (row.cond_t > kExactCondLimit || row.cond_f > kExactCondLimit) continue;
            row.et = minimum_energy(net.adjacency, Bt, ts, {x0, y_f, tau}, convention);
            row.ef = minimum_energy(net.adjacency, Bf, all, {x0, x_f, tau}, convention);
        } catch (const NotControllableError&) {
            continue;  // horizon too short
        }
        row.ratio = row.et / row.ef;
        if (smallest_feasible < 0) smallest_feasible = tau;

        // independent sandwich check of the target energy
        Eigen::VectorXd xfree = x0;
        for (int t = 0; t < tau; ++t) xfree = net.adjacency * xfree;
        const Eigen::VectorXd beta = y_f - C * xfree;
        const double b2 = beta.squaredNorm();
        const double scale = cfg.energy_half ? 0.5 : 1.0;
        const double lo = scale * b2 / eig_t.maxCoeff();
        const double hi = scale * b2 / eig_t.minCoeff();
        if (!(row.et >= lo * (1 - 1e-9) - 1e-12 && row.et <= hi * (1 + 1e-9) + 1e-12))
            sandwich_ok = false;
        rows.push_back(row);
    }
    if (rows.empty())
        throw NotControllableError("target-vs-full: no feasible horizon in the requested range");

    RecipeResult result;
    const std::string path = join_path(cfg.out_dir, "target_vs_full.csv");
    {
        auto out = open_out(path);
        out << "tau_f,E_target,E_full,ratio,cond_target,cond_full\n";
        for (const auto& row : rows)
            out << row.tau << "," << fmt17(row.et) << "," << fmt17(row.ef) << ","
                << fmt17(row.ratio) << "," << fmt17(row.cond_t) << "," << fmt17(row.cond_f)
                << "\n";
        result.files_written.push_back(path);
    }

    int crossover = -1;
    for (const auto& row : rows)
        if (row.et < row.ef) {
            crossover = row.tau;
            break;
        }
    bool monotone_beyond = true;
    double prev = 0.0;
    bool started = false;
    for (const auto& row : rows) {
        if (crossover < 0 || row.tau < crossover) continue;
        if (started && row.ratio > prev * (1 + 1e-9)) monotone_beyond = false;
        prev = row.ratio;
        started = true;
    }

    nlohmann::json summary;
    summary["recipe"] = recipe_name(RecipeKind::TargetVsFull);
    summary["seed"] = cfg.seed;
    summary["m_target"] = static_cast<int>(cfg.drivers.size());
    summary["m_full"] = static_cast<int>(cfg.drivers_b.size());
    summary["targets"] = targets;
    summary["smallest_feasible_tau"] = smallest_feasible;
    summary["crossover_tau"] = crossover;
    summary["full_cheaper_at_smallest_tau"] = rows.front().ef <= rows.front().et;
    summary["ratio_monotone_beyond_crossover"] = monotone_beyond;
    summary["sandwich_ok"] = sandwich_ok;
    summary["energy_half"] = cfg.energy_half;
    summary["reconstruction"] = cfg.builtin.has_value();
    summary["runtime_ms"] = watch.ms();
    write_summary(cfg.out_dir, summary, result);
    return result;
}

RecipeResult run_recipe(const ExperimentConfig& cfg) {
    switch (cfg.recipe) {
        case RecipeKind::SphereDistribution: return run_sphere_distribution(cfg);
        case RecipeKind::DecompositionDemo: return run_decomposition_demo(cfg);
        case RecipeKind::BoundSweep: return run_bound_sweep(cfg);
        case RecipeKind::DriverComparison: return run_driver_comparison(cfg);
        case RecipeKind::TargetVsFull: return run_target_vs_full(cfg);
    }
    throw ParameterError("unknown recipe");
}

}  // namespace netctrl
