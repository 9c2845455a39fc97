#include <doctest.h>

#include <array>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <sys/wait.h>

#include <json.hpp>

namespace fs = std::filesystem;

namespace {

struct Run {
    int code;
    std::string out;
};

Run run(const std::string& args) {
    const std::string cmd = std::string(DDSR_CLI_PATH) + " " + args + " 2>/dev/null";
    FILE* p = popen(cmd.c_str(), "r");
    REQUIRE(p != nullptr);
    std::string out;
    std::array<char, 4096> buf{};
    for (std::size_t n; (n = fread(buf.data(), 1, buf.size(), p)) > 0;) out.append(buf.data(), n);
    const int status = pclose(p);
    return {WIFEXITED(status) ? WEXITSTATUS(status) : -1, out};
}

fs::path workdir() {
    const fs::path d = fs::temp_directory_path() / "ddsr_cli_test";
    fs::create_directories(d);
    return d;
}

void write(const fs::path& p, const std::string& text) { std::ofstream(p) << text; }

std::string read(const fs::path& p) {
    std::ifstream in(p);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

const char* kFig1Scene = R"({"config": {"M": 8, "N": 8, "delta_f_hz": 5000, "T_s": 0.0002, "T_cp_s": 0.0001,
  "f_c_hz": 2e9, "noise_power_db": -10},
 "targets": [{"alpha_re": 1, "alpha_im": 0, "phi": 0.2, "psi": 0.3},
             {"alpha_re": 0, "alpha_im": 1, "phi": 0.6, "psi": 0.7}]})";

} // namespace

TEST_CASE("simulate -> solve -> spectrum pipeline") {
    const fs::path d = workdir();
    write(d / "scene.json", kFig1Scene);
    const auto m = d / "m.json", r = d / "r.json";
    REQUIRE(run("simulate " + (d / "scene.json").string() + " --seed 7 -q -o " + m.string()).code == 0);
    REQUIRE(run("solve " + m.string() + " --algo anl1 -q -o " + r.string()).code == 0);
    const auto doc = nlohmann::json::parse(read(r));
    CHECK(doc.contains("nu_hat"));
    CHECK(doc["nu_hat"].size() == 128);
    CHECK(doc["algorithm"] == "CS-ANL1");

    const auto peaks = run("spectrum " + r.string() + " --peaks");
    REQUIRE(peaks.code == 0);
    std::istringstream lines(peaks.out);
    std::string line;
    std::getline(lines, line);
    CHECK(line == "phi,psi,range_m,velocity_mps,magnitude");
    bool near_a = false, near_b = false;
    while (std::getline(lines, line)) {
        double phi = 0, psi = 0;
        REQUIRE(std::sscanf(line.c_str(), "%lf,%lf", &phi, &psi) == 2);
        near_a = near_a || (std::abs(phi - 0.2) < 1e-2 && std::abs(psi - 0.3) < 1e-2);
        near_b = near_b || (std::abs(phi - 0.6) < 1e-2 && std::abs(psi - 0.7) < 1e-2);
    }
    CHECK(near_a);
    CHECK(near_b);

    const auto grid = run("spectrum " + r.string() + " --oversample 2");
    REQUIRE(grid.code == 0);
    std::istringstream rows(grid.out);
    int n_rows = 0;
    while (std::getline(rows, line)) {
        ++n_rows;
        CHECK(std::count(line.begin(), line.end(), ',') == 15);
    }
    CHECK(n_rows == 16);

    const auto csv = run("solve " + m.string() + " --algo music --format csv -q");
    REQUIRE(csv.code == 0);
    CHECK(csv.out.rfind("phi,psi,range_m,velocity_mps,amp_re,amp_im,dual_peak_mag\n", 0) == 0);

    // stdin works as an input
    CHECK(run("solve - --algo csl1 --format csv -q < " + m.string()).code == 0);
}

TEST_CASE("bench prints one CSV row per algorithm and BER") {
    const auto res = run("bench --preset rmse --ber 0 --trials 1 --algo music -q");
    REQUIRE(res.code == 0);
    std::istringstream lines(res.out);
    std::string header, row, extra;
    std::getline(lines, header);
    CHECK(header == "ber,algorithm,range_rmse_m,velocity_rmse_mps,identification_rate,trials_used");
    CHECK(std::getline(lines, row));
    CHECK(row.rfind("0,2D-MUSIC,", 0) == 0);
    CHECK_FALSE(std::getline(lines, extra));

    const auto js = run("bench --preset rmse --ber 0,0.01 --trials 1 --algo music --format json -q");
    REQUIRE(js.code == 0);
    CHECK(nlohmann::json::parse(js.out)["rows"].size() == 2);
}

TEST_CASE("scenario presets print as spec files") {
    const fs::path d = workdir();
    const auto res = run("scenario scenario2");
    REQUIRE(res.code == 0);
    const auto spec = nlohmann::json::parse(res.out);
    CHECK(spec["n_clutter"] == 80);
    CHECK(spec["config"]["N"] == 64);

    write(d / "spec.json", res.out);
    CHECK(run("simulate " + (d / "spec.json").string() + " --trial 2 -q").code == 0);
}

TEST_CASE("exit codes") {
    CHECK(run("").code == 2);
    CHECK(run("solve").code == 2);
    CHECK(run("bench --bogus").code == 2);
    CHECK(run("frobnicate").code == 2);
    CHECK(run("scenario nope").code == 2);
    CHECK(run("simulate /nonexistent/file.json").code == 2);
    CHECK(run("--help").code == 0);

    const fs::path d = workdir();
    write(d / "scene.json", kFig1Scene);
    const auto m = d / "m2.json";
    REQUIRE(run("simulate " + (d / "scene.json").string() + " -q -o " + m.string()).code == 0);
    CHECK(run("solve " + m.string() + " --rho -1 -q").code == 2);
    CHECK(run("solve " + m.string() + " --algo an --mu 0.1 -q").code == 2);

    // a corrupted sample propagates as a numeric failure
    auto doc = nlohmann::json::parse(read(m));
    doc["r_bar"][0] = 1e308;
    doc["r_bar"][1] = 1e308;
    doc["S_hat"][0] = 1e-308;
    write(d / "bad.json", doc.dump());
    CHECK(run("solve " + (d / "bad.json").string() + " --algo an -q").code == 3);
}
