#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"
#include "netctrl/experiments.hpp"

using namespace netctrl;
namespace fs = std::filesystem;

namespace {

std::string slurp(const std::string& path) {
    std::ifstream in(path);
    REQUIRE(in.good());
    std::stringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

std::string out_dir(const std::string& name) {
    const auto dir = fs::temp_directory_path() / "netctrl-tests" / name;
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir.string();
}

// split preserving trailing empty fields
std::vector<std::string> split_csv(const std::string& line) {
    std::vector<std::string> fields;
    std::size_t start = 0;
    for (;;) {
        const auto pos = line.find(',', start);
        if (pos == std::string::npos) {
            fields.push_back(line.substr(start));
            return fields;
        }
        fields.push_back(line.substr(start, pos - start));
        start = pos + 1;
    }
}

nlohmann::json run(const std::string& recipe, nlohmann::json cfg, const std::string& dir) {
    cfg["recipe"] = recipe;
    cfg["out"] = dir;
    const auto parsed = parse_config(cfg.dump());
    const auto result = run_recipe(parsed);
    return nlohmann::json::parse(result.summary_json);
}

}  // namespace

TEST_CASE("config parsing rejects unknown keys and double network sources") {
    CHECK_THROWS_AS(parse_config("{\"speling\": 1}"), FormatError);
    CHECK_THROWS_AS(parse_config("not json"), FormatError);
    CHECK_THROWS_AS(
        parse_config(R"({"network": {"builtin": "star4", "edge_list": "x"}})"),
        FormatError);
    CHECK_THROWS_AS(parse_config(R"({"w_c": [[1,0],[0,1]], "w_c_diag": [1,1]})"), FormatError);
    const auto cfg = parse_config(R"({"network": {"builtin": "star4"}, "seed": 7})");
    CHECK(cfg.seed == 7);
}

TEST_CASE("sphere recipe: identity Gramian puts every sample in one bin") {
    const auto dir = out_dir("sphere-identity");
    nlohmann::json cfg{{"w_c_diag", {1.0, 1.0, 1.0}}, {"samples", 2000}, {"seed", 4}};
    const auto summary = run("sphere-distribution", cfg, dir);
    CHECK(summary["E_min"].get<double>() == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(summary["E_max"].get<double>() == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(summary["quartile_shares"][3].get<double>() == 1.0);
    CHECK(summary["top_quartile_share"].get<double>() == 1.0);
    CHECK(summary["sandwich_ok"].get<bool>());
}

TEST_CASE("sphere recipe: diagonal Gramian axis energies are exact inverses") {
    const auto dir = out_dir("sphere-diag");
    nlohmann::json cfg{{"w_c_diag", {0.25, 0.5, 2.0}}, {"samples", 500}, {"seed", 4}};
    const auto summary = run("sphere-distribution", cfg, dir);
    CHECK(summary["axis_energies"][0].get<double>() == 4.0);
    CHECK(summary["axis_energies"][1].get<double>() == 2.0);
    CHECK(summary["axis_energies"][2].get<double>() == 0.5);
}

TEST_CASE("sphere recipe: ill-conditioned Gramian sends most mass to the top quartile") {
    const auto dir = out_dir("sphere-ill");
    nlohmann::json cfg{{"w_c_diag", {0.01, 0.01, 1.0}}, {"samples", 90000}, {"seed", 9}};
    const auto summary = run("sphere-distribution", cfg, dir);
    CHECK(summary["condition_number"].get<double>() >= 100.0);
    CHECK(summary["top_quartile_share"].get<double>() > 0.5);
    CHECK(fs::exists(fs::path(dir) / "cloud.csv"));
}

TEST_CASE("sphere recipe: histogram bins partition the energy range evenly") {
    const auto dir = out_dir("sphere-bins");
    nlohmann::json cfg{{"w_c_diag", {0.2, 0.7, 1.0}}, {"samples", 4000}, {"seed", 11}};
    const auto summary = run("sphere-distribution", cfg, dir);
    std::ifstream in(fs::path(dir) / "histogram.csv");
    std::string line;
    std::getline(in, line);  // header
    double lo0 = 0, hi_prev = 0, width0 = 0;
    long total = 0;
    for (int b = 0; b < 10; ++b) {
        std::getline(in, line);
        double lo, hi, share;
        long count;
        REQUIRE(std::sscanf(line.c_str(), "%lf,%lf,%ld,%lf", &lo, &hi, &count, &share) == 4);
        if (b == 0) {
            lo0 = lo;
            width0 = hi - lo;
        } else {
            CHECK(lo == doctest::Approx(hi_prev).epsilon(1e-12));
            CHECK(hi - lo == doctest::Approx(width0).epsilon(1e-9));
        }
        hi_prev = hi;
        total += count;
    }
    CHECK(total == 4000);
    CHECK(lo0 == doctest::Approx(summary["E_min"].get<double>()));
    CHECK(hi_prev == doctest::Approx(summary["E_max"].get<double>()));
}

TEST_CASE("sphere recipe accepts a network source") {
    const auto dir = out_dir("sphere-net");
    nlohmann::json cfg{{"network", {{"builtin", "triangle-3"}}},
                       {"drivers", {1}},
                       {"targets", {1, 2, 3}},
                       {"tau", {{"min", 10}, {"max", 10}}},
                       {"samples", 2000},
                       {"seed", 4}};
    const auto summary = run("sphere-distribution", cfg, dir);
    CHECK(summary["condition_number"].get<double>() > 100.0);
    CHECK(summary["sandwich_ok"].get<bool>());
}

TEST_CASE("sphere recipe: r != 3 needs histogram_only") {
    nlohmann::json cfg{{"w_c_diag", {1.0, 2.0}}, {"samples", 100}, {"seed", 1}};
    cfg["recipe"] = "sphere-distribution";
    cfg["out"] = out_dir("sphere-r2");
    CHECK_THROWS_AS(run_recipe(parse_config(cfg.dump())), ParameterError);
    cfg["histogram_only"] = true;
    CHECK_NOTHROW(run_recipe(parse_config(cfg.dump())));
}

TEST_CASE("decomposition demo emits the golden report and bounded residuals") {
    const auto dir = out_dir("decomp-star");
    nlohmann::json cfg{{"network", {{"builtin", "star4"}}},
                       {"drivers", {1}},
                       {"samples", 5000},
                       {"rollout_steps", 12},
                       {"seed", 5}};
    const auto summary = run("decomposition-demo", cfg, dir);
    CHECK(summary["rank"].get<int>() == 3);
    CHECK(summary["max_constraint_residual"].get<double>() <= 1e-8);
    CHECK(summary["constraint_ok"].get<bool>());
    CHECK(summary["controllable_members"] == nlohmann::json({1, 2}));

    const auto report = nlohmann::json::parse(slurp((fs::path(dir) / "report.json").string()));
    CHECK(report["rank"].get<int>() == 3);
    const double a22 = report["A_c"][1][1].get<double>();
    CHECK(a22 == doctest::Approx(1.0 / 3.0).epsilon(1e-12));
}

TEST_CASE("decomposition demo notices fully controllable systems") {
    const auto dir = out_dir("decomp-full");
    nlohmann::json cfg{{"network", {{"builtin", "driver-choice-5"}}},
                       {"drivers", {1, 5}},
                       {"seed", 5}};
    const auto summary = run("decomposition-demo", cfg, dir);
    CHECK(summary["rank"].get<int>() == 5);
    CHECK(summary.contains("notice"));
}

TEST_CASE("bound sweep on the star demo produces labelled, gap-free rows") {
    const auto dir = out_dir("sweep-star");
    nlohmann::json cfg{{"network", {{"builtin", "star4"}}},
                       {"drivers", {1}},
                       {"tau", {{"min", 4}, {"max", 12}}},
                       {"seed", 3}};
    const auto summary = run("bound-sweep", cfg, dir);
    CHECK(summary["system"]["r"].get<int>() == 3);
    CHECK(summary["system"]["reconstruction"].get<bool>());
    const std::string csv = slurp((fs::path(dir) / "bound_sweep.csv").string());
    CHECK(csv.find("nan") == std::string::npos);
    CHECK(csv.find("power-law") != std::string::npos);
    // 9 data rows + header
    CHECK(std::count(csv.begin(), csv.end(), '\n') == 10);
}

TEST_CASE("recipes are byte-deterministic for a fixed seed") {
    nlohmann::json cfg{{"network", {{"builtin", "star4"}}},
                       {"drivers", {1}},
                       {"tau", {{"min", 4}, {"max", 10}}},
                       {"seed", 12}};
    const auto d1 = out_dir("det-a"), d2 = out_dir("det-b");
    run("bound-sweep", cfg, d1);
    run("bound-sweep", cfg, d2);
    CHECK(slurp((fs::path(d1) / "bound_sweep.csv").string()) ==
          slurp((fs::path(d2) / "bound_sweep.csv").string()));

    nlohmann::json scfg{{"w_c_diag", {0.1, 0.4, 1.0}}, {"samples", 3000}, {"seed", 8}};
    const auto s1 = out_dir("det-s1"), s2 = out_dir("det-s2");
    run("sphere-distribution", scfg, s1);
    run("sphere-distribution", scfg, s2);
    CHECK(slurp((fs::path(s1) / "cloud.csv").string()) ==
          slurp((fs::path(s2) / "cloud.csv").string()));

    scfg["seed"] = 9;
    const auto s3 = out_dir("det-s3");
    run("sphere-distribution", scfg, s3);
    CHECK(slurp((fs::path(s1) / "cloud.csv").string()) !=
          slurp((fs::path(s3) / "cloud.csv").string()));
}

TEST_CASE("driver comparison distinguishes constant from decaying upper bounds") {
    const auto dir = out_dir("driver-cmp");
    nlohmann::json cfg{{"network", {{"builtin", "driver-choice-5"}}},
                       {"drivers", {1}},
                       {"drivers_b", {5}},
                       {"tau", {{"min", 4}, {"max", 24}}},
                       {"seed", 2}};
    const auto summary = run("driver-comparison", cfg, dir);
    CHECK(summary["choice_a"]["controllable_set_size"].get<int>() == 2);
    CHECK(summary["choice_b"]["controllable_set_size"].get<int>() == 3);
    CHECK(summary["choice_a"]["regime_upper"].get<std::string>() == "constant");
    CHECK(summary["choice_b"]["regime_upper"].get<std::string>().find("power-law") == 0);
    CHECK(summary["choice_a"]["verdict"].get<std::string>().find("constant") !=
          std::string::npos);

    // decaying choice: estimator upper bound drops by orders of magnitude
    std::ifstream in(fs::path(dir) / "driver_comparison.csv");
    std::string line;
    std::getline(in, line);
    double first_b = -1, last_b = -1;
    while (std::getline(in, line)) {
        const auto fields = split_csv(line);
        const double log_up_b = std::stod(fields[5]);
        if (first_b < 0) first_b = log_up_b;
        last_b = log_up_b;
    }
    CHECK(first_b - last_b > 6.0);  // many decades of decay
}

TEST_CASE("identical driver choices give bit-identical comparison columns") {
    const auto dir = out_dir("driver-cmp-same");
    nlohmann::json cfg{{"network", {{"builtin", "driver-choice-5"}}},
                       {"drivers", {5}},
                       {"drivers_b", {5}},
                       {"tau", {{"min", 4}, {"max", 16}}},
                       {"seed", 2}};
    run("driver-comparison", cfg, dir);
    std::ifstream in(fs::path(dir) / "driver_comparison.csv");
    std::string line;
    std::getline(in, line);
    while (std::getline(in, line)) {
        const auto f = split_csv(line);
        REQUIRE(f.size() == 7);
        CHECK(f[1] == f[4]);
        CHECK(f[2] == f[5]);
        CHECK(f[3] == f[6]);
    }
}

TEST_CASE("target-vs-full reproduces the crossover story") {
    const auto dir = out_dir("tvf");
    nlohmann::json cfg{{"network", {{"builtin", "target-vs-full-10"}}},
                       {"drivers", {9, 4}},
                       {"drivers_b", {9, 4, 2}},
                       {"targets", {1, 3, 4, 5, 6, 7, 8, 9, 10}},
                       {"x_f", {1, 2, 1, 1, 1, 1, 1, 1, 1, 1}},
                       {"tau", {{"min", 5}, {"max", 24}}},
                       {"seed", 1}};
    const auto summary = run("target-vs-full", cfg, dir);
    CHECK(summary["m_target"].get<int>() == 2);
    CHECK(summary["m_full"].get<int>() == 3);
    CHECK(summary["smallest_feasible_tau"].get<int>() == 5);
    CHECK(summary["full_cheaper_at_smallest_tau"].get<bool>());
    CHECK(summary["crossover_tau"].get<int>() > 5);
    CHECK(summary["ratio_monotone_beyond_crossover"].get<bool>());
    CHECK(summary["sandwich_ok"].get<bool>());
}

TEST_CASE("target-vs-full with identical drivers and full targets is a ratio of one") {
    const auto dir = out_dir("tvf-same");
    nlohmann::json cfg{{"network", {{"builtin", "driver-choice-5"}}},
                       {"drivers", {1, 5}},
                       {"drivers_b", {1, 5}},
                       {"targets", {1, 2, 3, 4, 5}},
                       {"tau", {{"min", 4}, {"max", 10}}},
                       {"seed", 1}};
    run("target-vs-full", cfg, dir);
    std::ifstream in(fs::path(dir) / "target_vs_full.csv");
    std::string line;
    std::getline(in, line);
    int rows = 0;
    while (std::getline(in, line)) {
        const auto f = split_csv(line);
        CHECK(std::stod(f[3]) == 1.0);
        ++rows;
    }
    CHECK(rows > 0);
}

TEST_CASE("edge-list and generator sources work through the config") {
    const auto dir = out_dir("cfg-sources");
    const auto edge_path = (fs::path(dir) / "net.txt").string();
    std::ofstream(edge_path) << "1 2 1\n1 3 1\n1 4 1\n2 2 1\n";
    nlohmann::json cfg{{"network", {{"edge_list", edge_path}, {"n", 4}}},
                       {"drivers", {1}},
                       {"seed", 5}};
    const auto summary = run("decomposition-demo", cfg, dir);
    CHECK(summary["rank"].get<int>() == 3);

    nlohmann::json gcfg{{"network",
                         {{"generator",
                           {{"n", 12}, {"p", 0.2}, {"weight_lo", 0.0}, {"weight_hi", 0.1},
                            {"self_loop_offset", 0.8}, {"seed", 4}}}}},
                        {"tau", {{"min", 2}, {"max", 8}}},
                        {"seed", 5}};
    const auto sweep = run("bound-sweep", gcfg, out_dir("cfg-gen"));
    CHECK(sweep["system"]["lambda_cr"].get<double>() <= 0.8 + 1e-9);
}
