#include "doctest.h"

#include <filesystem>
#include <fstream>
#include <sstream>

#include "rydecay/commands.hpp"
#include "rydecay/config.hpp"

using namespace rydecay;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
    const auto dir = fs::temp_directory_path() / ("rydecay_test_" + name);
    fs::remove_all(dir);
    return dir;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

// Data rows of a CSV (comment lines and header dropped), split on commas.
std::vector<std::vector<std::string>> rows(const fs::path& p) {
    std::ifstream in(p);
    std::string line;
    std::vector<std::vector<std::string>> out;
    bool header = true;
    while (std::getline(in, line)) {
        if (line.starts_with("#")) continue;
        if (header) {
            header = false;
            continue;
        }
        std::vector<std::string> fields;
        std::stringstream ss(line);
        std::string f;
        while (std::getline(ss, f, ',')) fields.push_back(f);
        if (!line.empty() && line.back() == ',') fields.emplace_back();
        out.push_back(fields);
    }
    return out;
}

}  // namespace

TEST_CASE("config round-trips through JSON") {
    RunConfig c;
    c.extents = {3, 3};
    c.dimension = 2;
    c.seed = 18446744073709551615ull;
    c.V = 0.1 + 0.2;
    c.models = {"collective"};
    const nlohmann::json j = c;
    const auto back = j.get<RunConfig>();
    CHECK(back == c);
    CHECK(nlohmann::json::parse(j.dump()).get<RunConfig>() == c);
}

TEST_CASE("config validation and overrides") {
    CHECK_THROWS_AS(merge_config({}, {{"gama", 1.0}}), std::invalid_argument);
    const auto merged = merge_config({}, {{"V", 5.0}, {"n_traj", 10}});
    CHECK(merged.V == 5.0);
    CHECK(merged.n_traj == 10);
    CHECK(merged.delta_points == RunConfig{}.delta_points);

    CHECK(parse_assignment("V=2.5") == nlohmann::json{{"V", 2.5}});
    CHECK(parse_assignment("boundary=open") == nlohmann::json{{"boundary", "open"}});
    CHECK(parse_assignment("extents=[3,3]") == nlohmann::json{{"extents", {3, 3}}});
    CHECK_THROWS(parse_assignment("novalue"));

    RunConfig bad;
    bad.gamma = 0.0;
    CHECK_THROWS(bad.validate());
    bad = {};
    bad.models = {"both"};
    CHECK(bad.decay_models().size() == 2);
    bad.models = {"sideways"};
    CHECK_THROWS(bad.decay_models());

    RunConfig rescaled;
    rescaled.gamma = 2.0;
    rescaled.out = scratch("rate").string();
    CHECK_THROWS_AS(cmd_coherence(rescaled), std::invalid_argument);
}

TEST_CASE("load_config accepts plain files and manifests") {
    const auto dir = scratch("load");
    fs::create_directories(dir);
    {
        std::ofstream(dir / "plain.json") << "{\n  // a comment\n  \"V\": 3, \"threads\": 2\n}\n";
        std::ofstream(dir / "manifest.json") << R"({"command": "x", "config": {"V": 4}})";
    }
    CHECK(load_config((dir / "plain.json").string()).V == 3.0);
    CHECK(load_config((dir / "plain.json").string()).threads == 2);
    CHECK(load_config((dir / "manifest.json").string()).V == 4.0);
    CHECK_THROWS(load_config((dir / "missing.json").string()));
}

TEST_CASE("number formatting keeps 17 significant digits") {
    CHECK(format_number(0.1) == "0.10000000000000001");
    CHECK(format_number(-2.0) == "-2");
    CHECK(std::stod(format_number(1.0 / 3.0)) == 1.0 / 3.0);
}

TEST_CASE("coherence command") {
    RunConfig c;
    c.out = scratch("coherence").string();
    c.t_points = 2001;
    c.t_max = 2.0;
    c.cross_check_sites = 4;
    const auto res = cmd_coherence(c);
    const auto data = rows(fs::path(c.out) / "coherence.csv");
    REQUIRE(data.size() == 2001);
    CHECK(std::stod(data[0][1]) == 0.5);
    CHECK(std::stod(data[0][2]) == 0.5);
    // initial slopes in ratio 2d + 1 = 3
    const double h = std::stod(data[1][0]);
    const double ss = (std::stod(data[1][1]) - 0.5) / h, sc = (std::stod(data[1][2]) - 0.5) / h;
    CHECK(sc / ss == doctest::Approx(3.0).epsilon(0.05));
    CHECK(data[0].size() == 3 + 6 + 2);
    CHECK(res.manifest["cross_check"]["results"]["collective"]["max_deviation"].get<double>() < 1e-6);
    CHECK(fs::exists(fs::path(c.out) / "coherence.manifest.json"));

    c.V = 0.0;
    c.cross_check_sites = 0;
    cmd_coherence(c);
    for (const auto& r : rows(fs::path(c.out) / "coherence.csv"))
        CHECK(std::stod(r[1]) == doctest::Approx(0.5 * std::exp(-std::stod(r[0]) / 2)).epsilon(1e-13));
}

TEST_CASE("steady-state command on a small grid") {
    RunConfig c;
    c.out = scratch("steady").string();
    c.delta_min = -6.0;
    c.delta_max = 4.0;
    c.delta_points = 2;
    c.omega_min = 1e-3;
    c.omega_max = 2.5;
    c.omega_points = 2;
    const auto res = cmd_steady_state(c);
    const auto data = rows(fs::path(c.out) / "steady_state.csv");
    REQUIRE(data.size() == 4);
    for (int i = 0; i < 2; ++i) {
        CHECK(std::stod(data[i][2]) < 1e-5);
        CHECK(std::stod(data[i][3]) < 1e-5);
    }
    // positive detuning, strong drive: the models nearly agree
    CHECK(std::abs(std::stod(data[3][4])) < 0.5);
    CHECK(res.manifest.contains("max_delta_n_ss"));

    RunConfig big = c;
    big.extents = {11};
    CHECK_THROWS_AS(cmd_steady_state(big), std::invalid_argument);
}

TEST_CASE("trajectory command is reproducible from its manifest") {
    RunConfig c;
    c.out = scratch("traj_a").string();
    c.delta_min = c.delta_max = -6.0;
    c.delta_points = 1;
    c.omega_min = c.omega_max = 2.5;
    c.omega_points = 1;
    c.n_traj = 8;
    c.seed = 42;
    cmd_trajectories(c);
    const auto first = slurp(fs::path(c.out) / "trajectories.csv");
    auto again = load_config((fs::path(c.out) / "trajectories.manifest.json").string());
    again.out = scratch("traj_b").string();
    again.threads = 2;
    cmd_trajectories(again);
    CHECK(slurp(fs::path(again.out) / "trajectories.csv") == first);
    CHECK(rows(fs::path(c.out) / "trajectories.csv")[0].size() == 7);
}

TEST_CASE("mean-field command") {
    RunConfig c;
    c.out = scratch("meanfield").string();
    c.delta_min = -16.0;
    c.delta_max = 4.0;
    c.delta_points = 21;
    c.omega_min = 0.0;
    c.omega_max = 5.0;
    c.omega_points = 11;
    c.cut_points = 81;
    const auto res = cmd_meanfield(c);
    const auto grid = rows(fs::path(c.out) / "meanfield.csv");
    REQUIRE(grid.size() == 21 * 11);
    for (int i = 0; i < 21; ++i) {
        CHECK(grid[i][2] == "1");
        CHECK(std::stod(grid[i][3]) == doctest::Approx(0.0).epsilon(1e-12));
        CHECK(grid[i][4].empty());
    }
    CHECK(res.manifest["bistable_components"].get<int>() >= 1);
    int two = 0;
    for (const auto& r : rows(fs::path(c.out) / "meanfield_cut.csv")) two += r[1] == "2";
    CHECK(two > 0);
    const auto crit = nlohmann::json::parse(slurp(fs::path(c.out) / "critical_points.json"));
    CHECK_FALSE(crit["critical_points"].empty());
}
