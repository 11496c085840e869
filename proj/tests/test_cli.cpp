#include <catch2/catch_amalgamated.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <json.hpp>

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct TempDir {
    fs::path path;
    TempDir() {
        path = fs::temp_directory_path() / ("gyrocal_test_" + std::to_string(::getpid()) + "_" +
                                            std::to_string(counter()++));
        fs::create_directories(path);
    }
    ~TempDir() { std::error_code ec; fs::remove_all(path, ec); }
    static int& counter() {
        static int c = 0;
        return c;
    }
    std::string str(const std::string& name = "") const {
        return name.empty() ? path.string() : (path / name).string();
    }
};

int run_cli(const std::string& args) {
    const std::string cmd = std::string(GYROCAL_CLI_PATH) + " " + args + " >/dev/null 2>&1";
    const int status = std::system(cmd.c_str());
    return WEXITSTATUS(status);
}

std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_perfect_streams(const fs::path& dir) {
    // sense_in equals the rate, so a unit scale factor is a perfect model
    std::ofstream gyro(dir / "gyro.csv");
    gyro << "t,sense_in,sense_quad,sense_freq,sense_freq_err,sense_phase_err,"
            "drive_in,drive_quad,drive_freq,drive_freq_err,drive_phase_err\n";
    std::ofstream ref(dir / "ref.csv");
    ref << "t,omega\n";
    for (int i = 0; i < 600; ++i) {
        const double t = 0.1 * i;
        const double omega = (i % 100 < 50) ? 0.0 : 30.0;
        gyro << t << ',' << omega << ",0.1,3e6,0.01,0.1,500,25,3000380,0.02,0.2\n";
        ref << t << ',' << omega << '\n';
    }
}

}  // namespace

TEST_CASE("simulate is byte-identical for a fixed seed") {
    TempDir a, b;
    const std::string common =
        " --duration 60 --seed 5 --profile-seed 9 --out-dir ";
    REQUIRE(run_cli("simulate" + common + a.str()) == 0);
    REQUIRE(run_cli("simulate" + common + b.str()) == 0);
    for (const char* name : {"gyro.csv", "ref.csv", "truth.csv", "sim_config.json"}) {
        CHECK(slurp(a.str(name)) == slurp(b.str(name)));
        CHECK(!slurp(a.str(name)).empty());
    }
    TempDir c;
    REQUIRE(run_cli("simulate --duration 60 --seed 6 --profile-seed 9 --out-dir " + c.str()) == 0);
    CHECK(slurp(a.str("gyro.csv")) != slurp(c.str("gyro.csv")));
}

TEST_CASE("evaluate reports a perfect model as mse 0, r2 1") {
    TempDir dir;
    write_perfect_streams(dir.path);
    json model = {{"kind", "linear"},
                  {"s_linear", 1.0},
                  {"source_segment", {{"start", 0.0}, {"end", 1.0}, {"commanded_rate", 30.0}, {"steady", false}}}};
    {
        std::ofstream out(dir.path / "model.json");
        out << model.dump();
    }
    REQUIRE(run_cli("evaluate --gyro " + dir.str("gyro.csv") + " --ref " + dir.str("ref.csv") +
                    " --model " + dir.str("model.json") + " --out-dir " + dir.str()) == 0);
    const json rep = json::parse(slurp(dir.str("eval_linear.json")));
    CHECK(rep.at("mse").get<double>() == 0.0);
    CHECK(rep.at("r2").get<double>() == 1.0);
    CHECK(rep.at("n_test").get<int>() == 600);
}

TEST_CASE("exit codes distinguish usage, data and numeric failures") {
    TempDir dir;
    // usage: unknown subcommand
    CHECK(run_cli("frobnicate") == 1);
    // usage: missing required option
    CHECK(run_cli("train --gyro x.csv") == 1);
    // data: nonexistent input file
    CHECK(run_cli("features --gyro /nonexistent.csv --ref /nonexistent2.csv --out-dir " + dir.str()) == 2);
    // numeric: all-zero sense voltage makes the scale factor degenerate
    std::ofstream gyro(dir.path / "gyro.csv");
    gyro << "t,sense_in,sense_quad,sense_freq,sense_freq_err,sense_phase_err,"
            "drive_in,drive_quad,drive_freq,drive_freq_err,drive_phase_err\n";
    std::ofstream ref(dir.path / "ref.csv");
    ref << "t,omega\n";
    for (int i = 0; i < 400; ++i) {
        gyro << 0.1 * i << ",0,0,3e6,0,0,500,25,3000380,0,0\n";
        ref << 0.1 * i << ",20\n";
    }
    gyro.close();
    ref.close();
    CHECK(run_cli("fit-linear --gyro " + dir.str("gyro.csv") + " --ref " + dir.str("ref.csv") +
                  " --out-dir " + dir.str()) == 3);
}

TEST_CASE("calibrate writes a rate series") {
    TempDir dir;
    write_perfect_streams(dir.path);
    json model = {{"kind", "linear"},
                  {"s_linear", 2.0},
                  {"source_segment", {{"start", 0.0}, {"end", 1.0}, {"commanded_rate", 30.0}, {"steady", false}}}};
    {
        std::ofstream out(dir.path / "model.json");
        out << model.dump();
    }
    REQUIRE(run_cli("calibrate --gyro " + dir.str("gyro.csv") + " --model " + dir.str("model.json") +
                    " --out-dir " + dir.str()) == 0);
    std::ifstream in(dir.str("calibrated_linear.csv"));
    std::string header;
    std::getline(in, header);
    CHECK(header == "t,omega_hat");
    int rows = 0;
    std::string line;
    double last = 0.0;
    while (std::getline(in, line)) {
        ++rows;
        const auto comma = line.find(',');
        last = std::stod(line.substr(comma + 1));
    }
    CHECK(rows == 600);
    CHECK(last == 60.0);  // 2.0 * 30
}

TEST_CASE("full report pipeline on a small simulated dataset") {
    TempDir sim, out;
    REQUIRE(run_cli("simulate --duration 420 --seed 3 --profile-seed 4 --out-dir " + sim.str()) == 0);
    REQUIRE(run_cli("report --gyro " + sim.str("gyro.csv") + " --ref " + sim.str("ref.csv") +
                    " --truth " + sim.str("truth.csv") + " --out-dir " + out.str() +
                    " --epochs 8 --rounds 30 --seed 11") == 0);
    // comparison table has one row per model
    const std::string comparison = slurp(out.str("comparison.csv"));
    CHECK(comparison.find("linear,") != std::string::npos);
    CHECK(comparison.find("gbrt,") != std::string::npos);
    CHECK(comparison.find("mlp,") != std::string::npos);
    // config echo carries input hashes and the seed
    const json echo = json::parse(slurp(out.str("run_config.json")));
    CHECK(echo.at("seed").get<int>() == 11);
    CHECK(echo.at("input_hashes").contains("gyro_csv"));
    // models re-load and the feature report lists all ten channels
    const json feat = json::parse(slurp(out.str("feature_report_gbrt.json")));
    CHECK(feat.at("names").size() == 10);
    CHECK(json::parse(slurp(out.str("model_gbrt.json"))).at("kind") == "gbrt");
    CHECK(json::parse(slurp(out.str("model_mlp.json"))).at("kind") == "mlp");
    CHECK(json::parse(slurp(out.str("eval_mlp.json"))).at("n_test").is_number());
}

TEST_CASE("features subcommand writes the analysis json") {
    TempDir sim, out;
    REQUIRE(run_cli("simulate --duration 300 --seed 2 --profile-seed 8 --out-dir " + sim.str()) == 0);
    REQUIRE(run_cli("features --gyro " + sim.str("gyro.csv") + " --ref " + sim.str("ref.csv") +
                    " --out-dir " + out.str() + " --seed 5") == 0);
    const json rep = json::parse(slurp(out.str("feature_report.json")));
    CHECK(rep.at("names").size() == 10);
    CHECK(rep.at("rho").size() == 100);
    CHECK(rep.at("scores").size() == 10);
    CHECK(rep.at("selected").size() >= 1);
}

TEST_CASE("config file values are used and flags override them") {
    TempDir sim, out;
    REQUIRE(run_cli("simulate --duration 300 --seed 2 --profile-seed 8 --out-dir " + sim.str()) == 0);
    json cfg = {{"gyro_csv", sim.str("gyro.csv")},
                {"ref_csv", sim.str("ref.csv")},
                {"out_dir", out.str()},
                {"seed", 21},
                {"importance_repeats", 2}};
    {
        std::ofstream f(out.str("config.json"));
        f << cfg.dump();
    }
    REQUIRE(run_cli("features --config " + out.str("config.json") + " --gyro " + sim.str("gyro.csv") +
                    " --ref " + sim.str("ref.csv") + " --seed 22") == 0);
    const json echo = json::parse(slurp(out.str("run_config.json")));
    CHECK(echo.at("seed").get<int>() == 22);                  // flag wins
    CHECK(echo.at("importance_repeats").get<int>() == 2);     // file value survives
}
