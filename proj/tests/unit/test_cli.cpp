#include <doctest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

namespace fs = std::filesystem;
using Json = nlohmann::json;

namespace {

const fs::path kData = ISP_TEST_DATA;

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

struct Run {
    int code;
    fs::path out;
    Json report;
};

Run run(const std::string& cmd, const std::string& config, const std::string& tag, const std::string& extra = "") {
    const fs::path out = fs::temp_directory_path() / ("isp_test_cli_" + tag);
    fs::remove_all(out);
    const std::string line = std::string("\"") + ISP_CLI_PATH + "\" " + cmd + " --config \"" + (kData / config).string() +
                             "\" --out \"" + out.string() + "\" " + extra + " 2>/dev/null";
    const int status = std::system(line.c_str());
    REQUIRE(WIFEXITED(status));
    Run r{WEXITSTATUS(status), out, Json()};
    if (fs::exists(out / "report.json")) r.report = Json::parse(slurp(out / "report.json"));
    return r;
}

}  // namespace

TEST_CASE("forward on the zero potential: S_H is the identity") {
    const auto r = run("forward", "zero_forward.json", "zero");
    CHECK(r.code == 0);
    CHECK(r.report["status"] == "ok");
    CHECK(r.report["results"]["edge_residual_S"] == 0.0);
    CHECK(r.report["results"]["min_abs_det_I_plus_AH_plus"] == 1.0);
    // every manifest entry exists with the recorded size
    for (const auto& f : r.report["manifest"]) CHECK(fs::file_size(r.out / f["file"].get<std::string>()) == f["bytes"]);
    const std::string csv = slurp(r.out / "scattering.csv");
    CHECK(csv.rfind("lambda,block,k,j,re,im\n", 0) == 0);
    CHECK(csv.find(",S_H,1,1,1,0\n") != std::string::npos);
    CHECK(csv.find(",S_H,1,2,0,0\n") != std::string::npos);
}

TEST_CASE("coupled-example round trip succeeds within 1e-4") {
    const auto r = run("e1-roundtrip", "e1_roundtrip.json", "e1");
    CHECK(r.code == 0);
    CHECK(r.report["results"]["max_rel_error"].get<double>() <= 1e-4);
    CHECK(fs::exists(r.out / "e1_recovered.csv"));
}

TEST_CASE("recover-blocks with H1 = H2 fails with DegenerateBoundaryPair") {
    const auto r = run("recover-blocks", "degenerate_pair.json", "degenerate");
    CHECK(r.code == 1);
    CHECK(r.report["error"]["name"] == "DegenerateBoundaryPair");
    CHECK(r.report["error"]["context"].contains("abs_det"));
    CHECK(r.report["status"] == "failed");
}

TEST_CASE("input errors exit with 2 and still write a report") {
    for (const char* cfg : {"bad_n_lambda.json", "syntax_error.json", "unknown_key.json", "does_not_exist.json"}) {
        const auto r = run("validate", cfg, "bad");
        CHECK(r.code == 2);
        CHECK(r.report.contains("error"));
    }
    const auto v = run("validate", "invalid_potential.json", "invalid");
    CHECK(v.code == 2);
    CHECK(v.report["results"]["valid"] == false);
    CHECK(v.report["results"]["violations"][0]["block"] == "q11");
    CHECK(run("bogus", "minimal.json", "bogus").code == 2);
}

TEST_CASE("split and rh-solve from rational input") {
    const auto s = run("split", "split_rational.json", "split");
    CHECK(s.code == 0);
    CHECK(s.report["results"]["exact_vs_numeric_plus"].get<double>() < 1e-8);
    CHECK(s.report["results"]["exact_vs_numeric_minus"].get<double>() < 1e-8);
    const auto w = run("rh-solve", "rh_winding.json", "winding");
    CHECK(w.code == 1);
    CHECK(w.report["error"]["name"] == "FredholmSingular");
}

TEST_CASE("forward output feeds rh-solve through the csv path") {
    const auto f = run("forward", "n1_forward.json", "n1");
    REQUIRE(f.code == 0);
    const fs::path cfg = fs::temp_directory_path() / "isp_test_cli_rh_from_csv.json";
    {
        std::ofstream out(cfg);
        out << Json{{"lambda_max", 1000},
                    {"n_lambda", 1024},
                    {"problem", {{"input", {{"csv", (f.out / "scattering.csv").string()}, {"block", "S_H"}}}}}}
                   .dump();
    }
    const std::string line = std::string("\"") + ISP_CLI_PATH + "\" rh-solve --config \"" + cfg.string() + "\" --out \"" +
                             (f.out / "rh").string() + "\" 2>/dev/null";
    const int status = std::system(line.c_str());
    CHECK(WEXITSTATUS(status) == 0);
    const Json rep = Json::parse(slurp(f.out / "rh" / "report.json"));
    CHECK(rep["results"]["rh"]["factorization_residual"].get<double>() < 1e-8);
}

TEST_CASE("reports are byte-identical across runs and thread counts") {
    const auto a = run("forward", "random_forward.json", "det_a", "--seed 5 --threads 1");
    const auto b = run("forward", "random_forward.json", "det_b", "--seed 5 --threads 3");
    REQUIRE(a.code == 0);
    REQUIRE(b.code == 0);
    CHECK(slurp(a.out / "report.json") == slurp(b.out / "report.json"));
    CHECK(slurp(a.out / "kernels.csv") == slurp(b.out / "kernels.csv"));
    CHECK(a.report["seed"] == 5);
    const auto c = run("forward", "random_forward.json", "det_c", "--seed 6");
    CHECK(c.report["generated_problem"] != a.report["generated_problem"]);
}

TEST_CASE("output directory falls back to ISP_OUT_DIR") {
    const fs::path out = fs::temp_directory_path() / "isp_test_cli_env";
    fs::remove_all(out);
    const std::string line = "ISP_OUT_DIR=\"" + out.string() + "\" \"" + ISP_CLI_PATH + "\" validate --config \"" +
                             (kData / "n1_forward.json").string() + "\" 2>/dev/null";
    const int status = std::system(line.c_str());
    CHECK(WEXITSTATUS(status) == 0);
    CHECK(fs::exists(out / "report.json"));
}
