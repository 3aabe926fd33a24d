#include <doctest.h>

#include <array>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <nlohmann/json.hpp>
#include <sstream>
#include <string>

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct RunResult {
    int exit_code = -1;
    std::string output;
};

// Runs the built CLI (path from GEOPOSE_CLI) capturing stdout+stderr.
RunResult run_cli(const std::string& args) {
    const char* bin = std::getenv("GEOPOSE_CLI");
    REQUIRE_MESSAGE(bin != nullptr, "GEOPOSE_CLI must point at the built binary");
    const std::string cmd = std::string(bin) + " " + args + " 2>&1";
    FILE* pipe = popen(cmd.c_str(), "r");
    REQUIRE(pipe != nullptr);
    RunResult res;
    std::array<char, 4096> buf;
    while (std::size_t n = std::fread(buf.data(), 1, buf.size(), pipe)) res.output.append(buf.data(), n);
    const int status = pclose(pipe);
    res.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    return res;
}

fs::path fresh_dir(const std::string& name) {
    const fs::path dir = fs::temp_directory_path() / ("geopose_test_" + name);
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

json read_json(const fs::path& p) {
    std::ifstream in(p);
    REQUIRE(in.good());
    json j;
    in >> j;
    return j;
}

}  // namespace

TEST_CASE("cli gen: deterministic manifest, invalid shape rejected") {
    const fs::path dir_a = fresh_dir("gen_a");
    const fs::path dir_b = fresh_dir("gen_b");

    const RunResult a =
        run_cli("--seed 7 gen --out " + dir_a.string() + " --n 4 --shapes box --n-points 64");
    CHECK(a.exit_code == 0);
    const RunResult b =
        run_cli("--seed 7 gen --out " + dir_b.string() + " --n 4 --shapes box --n-points 64");
    CHECK(b.exit_code == 0);

    const json ma = read_json(dir_a / "manifest.json");
    const json mb = read_json(dir_b / "manifest.json");
    CHECK(ma.at("config_hash") == mb.at("config_hash"));
    CHECK(ma.at("seeds") == mb.at("seeds"));
    CHECK(ma.at("count").get<int>() == 4);

    // Scene payloads are byte-identical too.
    std::ifstream fa(dir_a / "scene_00000.json");
    std::ifstream fb(dir_b / "scene_00000.json");
    std::stringstream sa, sb;
    sa << fa.rdbuf();
    sb << fb.rdbuf();
    CHECK(sa.str() == sb.str());

    const RunResult bad =
        run_cli("gen --out " + dir_a.string() + " --n 1 --shapes pyramid");
    CHECK(bad.exit_code == 1);
    CHECK(bad.output.find("pyramid") != std::string::npos);
}

TEST_CASE("cli eval: noiseless scenes score perfectly and totals match the csv") {
    const fs::path dir = fresh_dir("eval");
    REQUIRE(run_cli("--seed 3 gen --out " + dir.string() +
                    " --n 6 --shapes box,cylinder,laptop --n-points 400")
                .exit_code == 0);

    const fs::path report_path = dir / "report.json";
    const fs::path csv_path = dir / "rows.csv";
    const RunResult eval =
        run_cli("--seed 3 --jobs 2 eval --scenes " + dir.string() + " --out " +
                report_path.string() + " --csv " + csv_path.string() +
                " --noise-profile none --iou-samples 50000");
    CHECK(eval.exit_code == 0);

    const json report = read_json(report_path);
    CHECK(report.at("kind") == "report");
    CHECK(report.at("format_version").get<int>() == 1);
    CHECK(!report.at("config_hash").get<std::string>().empty());
    for (const char* key : {"acc_5deg_2cm", "acc_5deg_5cm", "acc_10deg_5cm", "acc_10deg_10cm"})
        CHECK(report.at("aggregate").at(key).get<double>() == 1.0);
    for (const char* key : {"iou_25", "iou_50", "iou_75"})
        CHECK(report.at("aggregate").at(key).get<double>() == 1.0);

    // Re-aggregate the per-scene rows: fractions must match exactly.
    std::ifstream csv(csv_path);
    REQUIRE(csv.good());
    std::string line;
    std::getline(csv, line);  // header
    int rows = 0, hits_5_2 = 0;
    while (std::getline(csv, line)) {
        std::stringstream ss(line);
        std::string field;
        std::getline(ss, field, ',');  // id
        std::getline(ss, field, ',');  // seed
        std::getline(ss, field, ',');
        const double rot = std::stod(field);
        std::getline(ss, field, ',');
        const double trans = std::stod(field);
        ++rows;
        if (rot < 5.0 && trans * 100.0 < 2.0) ++hits_5_2;
    }
    CHECK(rows == 6);
    CHECK(static_cast<double>(hits_5_2) / rows ==
          report.at("aggregate").at("acc_5deg_2cm").get<double>());
}

TEST_CASE("cli eval: empty scene dir fails without writing a report") {
    const fs::path dir = fresh_dir("empty");
    const fs::path report_path = dir / "report.json";
    const RunResult res =
        run_cli("eval --scenes " + dir.string() + " --out " + report_path.string());
    CHECK(res.exit_code != 0);
    CHECK(!fs::exists(report_path));
}

TEST_CASE("cli audit-loss: near-zero terms at gt on a noiseless scene") {
    const fs::path dir = fresh_dir("audit");
    REQUIRE(run_cli("--seed 5 gen --out " + dir.string() + " --n 1 --shapes box --n-points 400")
                .exit_code == 0);

    const RunResult res =
        run_cli("audit-loss --scene " + (dir / "scene_00000.json").string() + " --json");
    CHECK(res.exit_code == 0);
    const json terms = json::parse(res.output);
    for (const char* key : {"pc_rt", "pc_s", "bb_r", "bb_t", "bb_s"})
        CHECK(terms.at(key).get<double>() < 1e-6);

    // Total equals the weighted sum of the printed parts (paper weights).
    const double manual = 8.0 * (terms.at("basic_rot_conf").get<double>() / 8.0 +
                                 terms.at("basic_sym").get<double>() / 8.0 +
                                 terms.at("basic_vote_conf").get<double>() / 8.0) +
                          1.0 * (terms.at("bb_r").get<double>() + terms.at("bb_t").get<double>() +
                                 terms.at("bb_s").get<double>()) +
                          1.0 * (terms.at("pc_rt").get<double>() + terms.at("pc_s").get<double>());
    CHECK(terms.at("total").get<double>() == doctest::Approx(manual).epsilon(1e-9));

    const RunResult missing = run_cli("audit-loss --scene /nonexistent/scene.json");
    CHECK(missing.exit_code != 0);
}

TEST_CASE("cli gradcheck: passes by default, fails with an injected bug, eps=0 is usage") {
    const RunResult ok = run_cli("gradcheck --points 10");
    CHECK(ok.exit_code == 0);
    CHECK(ok.output.find("pass") != std::string::npos);

    const RunResult bug = run_cli("gradcheck --points 5 --inject-gradient-bug");
    CHECK(bug.exit_code != 0);
    CHECK(bug.output.find("FAIL") != std::string::npos);

    const RunResult zero = run_cli("gradcheck --eps 0");
    CHECK(zero.exit_code == 1);
}

TEST_CASE("cli iou: analytic offset case") {
    const std::string box_a =
        R"({"R":[1,0,0,0,1,0,0,0,1],"t":[0,0,0],"s":[1,1,1]})";
    const std::string box_b =
        R"({"R":[1,0,0,0,1,0,0,0,1],"t":[0.5,0,0],"s":[1,1,1]})";
    const RunResult res = run_cli("iou --box-a '" + box_a + "' --box-b '" + box_b +
                                  "' --samples 200000 --json");
    CHECK(res.exit_code == 0);
    const json j = json::parse(res.output);
    CHECK(std::abs(j.at("iou").get<double>() - 1.0 / 3.0) < 0.01);

    const RunResult bad = run_cli("iou --box-a '{broken' --box-b '" + box_b + "'");
    CHECK(bad.exit_code == 1);
}

TEST_CASE("cli recover: reports exact recovery on a noiseless scene") {
    const fs::path dir = fresh_dir("recover");
    REQUIRE(run_cli("--seed 11 gen --out " + dir.string() + " --n 1 --shapes laptop --n-points 500")
                .exit_code == 0);
    const RunResult res =
        run_cli("recover --scene " + (dir / "scene_00000.json").string() + " --json");
    CHECK(res.exit_code == 0);
    const json j = json::parse(res.output);
    CHECK(j.at("rot_err_deg").get<double>() < 1e-6);
    CHECK(j.at("trans_err_m").get<double>() < 1e-9);
}
