#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "cli.hpp"
#include "steerlab/io.hpp"
#include "steerlab/nm_povm.hpp"

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

struct Result {
    int code = 0;
    std::string out;
    std::string err;
};

Result run(std::vector<std::string> args) {
    std::ostringstream out, err;
    const int code = steerlab::cli::run(args, out, err);
    return {code, out.str(), err.str()};
}

class CliFiles : public ::testing::Test {
protected:
    void SetUp() override {
        dir_ = fs::temp_directory_path() /
               ("steerlab_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
        fs::create_directories(dir_);
    }
    void TearDown() override { fs::remove_all(dir_); }
    std::string path(const std::string& name) const { return (dir_ / name).string(); }

    fs::path dir_;
};

} // namespace

TEST(Cli, UsageErrors) {
    EXPECT_EQ(run({}).code, steerlab::cli::kExitUsage);
    EXPECT_EQ(run({"frobnicate"}).code, steerlab::cli::kExitUsage);
    EXPECT_EQ(run({"--help"}).code, steerlab::cli::kExitOk);
    EXPECT_EQ(run({"detect", "--state", "singlet", "--format", "yaml"}).code, steerlab::cli::kExitUsage);
    const Result bad = run({"detect", "--state", "werner:2"});
    EXPECT_EQ(bad.code, steerlab::cli::kExitUsage);
    EXPECT_NE(bad.err.find("Werner"), std::string::npos);
    EXPECT_EQ(run({"detect"}).code, steerlab::cli::kExitUsage);
    EXPECT_EQ(run({"volume", "--da", "3", "--detector", "das-npt", "-n", "10"}).code, steerlab::cli::kExitUsage);
    const Result version = run({"--version"});
    EXPECT_EQ(version.code, steerlab::cli::kExitOk);
    EXPECT_NE(version.out.find(std::string(steerlab::version())), std::string::npos);
}

TEST(Cli, DetectSingletJson) {
    const Result r = run({"--format", "json", "detect", "--state", "singlet", "--detector", "loo"});
    ASSERT_EQ(r.code, 0) << r.err;
    const json doc = json::parse(r.out);
    EXPECT_EQ(doc["verdict"]["violated"], true);
    EXPECT_NEAR(doc["verdict"]["lhs"].get<double>(), 1.5, 1e-12);
    EXPECT_EQ(doc["header"]["command"], "detect");
    EXPECT_EQ(doc["header"]["seed"], 1);
}

TEST(Cli, DetectorsAgreeOnWerner) {
    for (const char* det : {"loo", "loo-reverse", "loo-rescaled", "povm", "das-npt"}) {
        const Result hi = run({"--format", "json", "detect", "--state", "werner:0.6", "--detector", det});
        const Result lo = run({"--format", "json", "detect", "--state", "werner:0.55", "--detector", det});
        ASSERT_EQ(hi.code, 0) << det << hi.err;
        EXPECT_EQ(json::parse(hi.out)["verdict"]["violated"], true) << det;
        EXPECT_EQ(json::parse(lo.out)["verdict"]["violated"], false) << det;
    }
    const Result npt = run({"--format", "csv", "detect", "--state", "werner:0.4", "--detector", "npt"});
    ASSERT_EQ(npt.code, 0);
    EXPECT_NE(npt.out.find("method,witness,entangled,conclusive\nnpt,"), std::string::npos);
    const Result povm = run({"detect", "--state", "isotropic:3,0.6", "--detector", "povm", "--povm-a", "2,5",
                             "--povm-b", "8,2"});
    ASSERT_EQ(povm.code, 0) << povm.err;
    EXPECT_NE(povm.out.find("violated          yes"), std::string::npos);
}

TEST_F(CliFiles, PovmConstructValidateSpectrum) {
    const std::string file = path("mub.json");
    const Result c = run({"--out", file, "povm", "construct", "-d", "2", "-N", "3", "-M", "2", "-x", "1", "--aligned"});
    ASSERT_EQ(c.code, 0) << c.err;
    const json doc = json::parse(std::ifstream(file));
    EXPECT_EQ(doc["header"]["config"]["rotation"], "aligned");
    EXPECT_EQ(doc["params"]["x"], 1.0);

    const Result v = run({"povm", "validate", file});
    EXPECT_EQ(v.code, 0) << v.out;
    EXPECT_NE(v.out.find("valid"), std::string::npos);

    const Result s = run({"--format", "json", "povm", "spectrum", file});
    ASSERT_EQ(s.code, 0);
    const json spec = json::parse(s.out);
    EXPECT_LT(spec["max_deviation"].get<double>(), 1e-9);
    EXPECT_EQ(spec["spectrum"].size(), 6u);

    // A tampered file fails validation with the dedicated exit code.
    json bad = doc;
    bad["S"]["data"][5] = bad["S"]["data"][5].get<double>() + 1e-3;
    std::ofstream(path("bad.json")) << bad.dump();
    const Result vb = run({"--format", "csv", "povm", "validate", path("bad.json")});
    EXPECT_EQ(vb.code, steerlab::cli::kExitValidation);
    EXPECT_NE(vb.out.find("fail"), std::string::npos);
}

TEST_F(CliFiles, PovmConstructFailureExitCode) {
    const Result r = run({"--seed", "3", "povm", "construct", "-d", "3", "-N", "4", "-M", "3", "-x", "1"});
    EXPECT_EQ(r.code, steerlab::cli::kExitValidation);
    const Result s = run({"povm", "construct", "-d", "3", "-N", "4", "-M", "3", "-x", "1", "--search"});
    EXPECT_EQ(s.code, 0) << s.err;
    EXPECT_EQ(run({"povm", "construct", "-d", "2", "-N", "2", "-M", "2"}).code, steerlab::cli::kExitUsage);
    EXPECT_EQ(run({"povm", "validate", path("missing.json")}).code, steerlab::cli::kExitUsage);
}

TEST_F(CliFiles, DetectFromStateFile) {
    std::ofstream(path("state.json")) << steerlab::state_to_json(steerlab::singlet()).dump();
    const Result r = run({"detect", "--state-file", path("state.json"), "--detector", "ccnr"});
    ASSERT_EQ(r.code, 0) << r.err;
    EXPECT_NE(r.out.find("entangled         yes"), std::string::npos);
    std::ofstream(path("broken.json")) << "{";
    EXPECT_EQ(run({"detect", "--state-file", path("broken.json")}).code, steerlab::cli::kExitUsage);
}

TEST(Cli, VolumeJsonRecordReplays) {
    const std::vector<std::string> args{"--seed", "9", "--format", "json", "volume", "--da", "2", "--db", "2",
                                        "-n", "300", "--chains", "2", "--record-hits"};
    const Result a = run(args);
    const Result b = run(args);
    ASSERT_EQ(a.code, 0) << a.err;
    const json ra = json::parse(a.out), rb = json::parse(b.out);
    EXPECT_EQ(ra["hit_indices"], rb["hit_indices"]);
    EXPECT_EQ(ra["hits"], ra["hit_indices"].size());
    EXPECT_EQ(ra["config"]["seed"], 9);
    EXPECT_EQ(ra["config"]["chains"], 2);
    EXPECT_EQ(ra["samples"], 300);
}

TEST(Cli, WorkersDoNotChangeResults) {
    const Result one = run({"--workers", "1", "--format", "csv", "volume", "-n", "200", "--chains", "2"});
    const Result two = run({"--workers", "2", "--format", "csv", "volume", "-n", "200", "--chains", "2"});
    ASSERT_EQ(one.code, 0);
    // Everything but the trailing wall-clock column must match.
    auto without_wall = [](const std::string& s) { return s.substr(0, s.rfind(',')); };
    EXPECT_EQ(without_wall(one.out), without_wall(two.out));
}

TEST(Cli, TableScaleGuard) {
    EXPECT_EQ(run({"volume", "table", "--which", "2", "--scale", "100"}).code, steerlab::cli::kExitUsage);
    EXPECT_EQ(run({"volume", "table", "--which", "3"}).code, steerlab::cli::kExitUsage);
}

TEST(Cli, BellScanCsv) {
    const Result r = run({"bellscan", "--resolution", "0.5"});
    ASSERT_EQ(r.code, 0);
    std::istringstream in(r.out);
    std::string header, columns;
    std::getline(in, header);
    std::getline(in, columns);
    EXPECT_EQ(header.rfind("# ", 0), 0u);
    EXPECT_EQ(columns, "t1,t2,t3,class");
    EXPECT_NE(r.out.find("-0.5,-0.5,-0.5,detected"), std::string::npos);
}
