#include <array>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>
#include <sys/wait.h>

#include <gtest/gtest.h>
#include <json.hpp>

namespace fs = std::filesystem;

namespace {

struct Result {
    int code = -1;
    std::string out;
};

// Runs the CLI with the given arguments; stderr is discarded.
Result run(const std::string& args) {
    const std::string cmd = std::string(FRACTAL_CLI) + " " + args + " 2>/dev/null";
    Result r;
    FILE* pipe = popen(cmd.c_str(), "r");
    if (!pipe) return r;
    std::array<char, 4096> buf{};
    std::size_t n = 0;
    while ((n = fread(buf.data(), 1, buf.size(), pipe)) > 0) r.out.append(buf.data(), n);
    const int status = pclose(pipe);
    r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    return r;
}

std::string system_file(const std::string& name) { return (fs::path(DEMO_SYSTEMS) / name).string(); }

fs::path scratch(const std::string& name) {
    const auto dir = fs::temp_directory_path() / "fractal_cli_tests";
    fs::create_directories(dir);
    return dir / name;
}

fs::path write(const std::string& name, const std::string& text) {
    const auto p = scratch(name);
    std::ofstream(p) << text;
    return p;
}

}  // namespace

TEST(Cli, MoranJson) {
    const auto r = run("--format json moran --ratios 0.5,0.5");
    ASSERT_EQ(r.code, 0);
    EXPECT_NEAR(nlohmann::json::parse(r.out)["s"].get<double>(), 1.0, 1e-12);
}

TEST(Cli, GlobalOptionsAfterSubcommand) {
    const auto r = run("attractor --ifs " + system_file("cantor.json") + " --tol 1e-2 --format json");
    ASSERT_EQ(r.code, 0);
    const auto j = nlohmann::json::parse(r.out);
    EXPECT_EQ(j["dimension"].get<int>(), 1);
}

TEST(Cli, UsageErrors) {
    EXPECT_EQ(run("").code, 2);
    EXPECT_EQ(run("bogus").code, 2);
    EXPECT_EQ(run("attractor").code, 2);
    EXPECT_EQ(run("attractor --ifs /nonexistent/ifs.json").code, 2);
    EXPECT_EQ(run("--tol -1 moran --ratios 0.5").code, 2);
    EXPECT_EQ(run("verify --only nosuchsuite").code, 2);
    EXPECT_EQ(run("dimension --cloud a --manifest b").code, 2);
}

TEST(Cli, HelpExitsZero) { EXPECT_EQ(run("--help").code, 0); }

TEST(Cli, MalformedInputsExitTwo) {
    EXPECT_EQ(run("attractor --ifs " + write("broken.json", "{").string()).code, 2);
    EXPECT_EQ(run("attractor --ifs " + write("nomaps.json", R"({"maps": []})").string()).code, 2);
    EXPECT_EQ(run("moran --ratios 0.5,1.5").code, 2);
    EXPECT_EQ(run("fif --data " + system_file("knots.csv") + " --alpha 1.5,0,0,0").code, 2);
    EXPECT_EQ(run("fif --data " + system_file("knots.csv") + " --alpha 0.5").code, 2);
}

TEST(Cli, CapacityExitsThree) {
    EXPECT_EQ(run("attractor --ifs " + system_file("sierpinski.json") + " --tol 1e-4 --point-cap 10").code, 3);
}

TEST(Cli, OscVerdictDrivesExitCode) {
    EXPECT_EQ(run("osc --ifs " + system_file("cantor.json") + " --box 0,1").code, 0);
    const auto overlap = write("overlap.json", R"({"dimension": 1, "maps": [
        {"linear": 0.5, "offset": [0]}, {"linear": 0.5, "offset": [0.25]}]})");
    EXPECT_EQ(run("osc --ifs " + overlap.string() + " --box 0,1").code, 1);
}

TEST(Cli, FifReproducesKnots) {
    const auto r = run("fif --data " + system_file("knots.csv") + " --alpha 0.5,-0.5,0.3,0.2 --grid 4096 --tol 1e-8");
    ASSERT_EQ(r.code, 0);
    std::istringstream in(r.out);
    std::string line;
    std::getline(in, line);
    EXPECT_EQ(line, "x,g");
    std::size_t rows = 0;
    double x = 0.0, g = 0.0;
    char comma = 0;
    while (in >> x >> comma >> g) {
        if (rows == 1024) EXPECT_NEAR(g, 0.6, 1e-7);
        if (rows == 3072) EXPECT_NEAR(g, 0.9, 1e-7);
        ++rows;
    }
    EXPECT_EQ(rows, 4097u);
}

TEST(Cli, ProductFifJob) {
    const auto out = scratch("pfif.csv");
    const auto r = run("pfif --job " + system_file("pfif_job.json") + " --out " + out.string());
    ASSERT_EQ(r.code, 0);
    std::ifstream in(out);
    std::string header;
    std::getline(in, header);
    EXPECT_EQ(header, "x1,x2,g1,g2");
    std::size_t rows = 0;
    for (std::string line; std::getline(in, line);) ++rows;
    EXPECT_EQ(rows, 81u);
}

TEST(Cli, RenderHashIsDeterministic) {
    const auto cloud = scratch("cc.csv");
    ASSERT_EQ(run("--out " + cloud.string() + " attractor --ifs " + write("cc.json", R"({"factors": [
        {"dimension": 1, "maps": [{"linear": 0.3333333333333333, "offset": [0]}, {"linear": 0.3333333333333333, "offset": [0.6666666666666666]}]},
        {"dimension": 1, "maps": [{"linear": 0.3333333333333333, "offset": [0]}, {"linear": 0.3333333333333333, "offset": [0.6666666666666666]}]}]})")
                                                                  .string() +
                  " --tol 1e-3")
                  .code,
              0);
    const std::string cmd = "render --cloud " + cloud.string() + " --image " + scratch("cc.ppm").string();
    const auto a = run(cmd), b = run(cmd);
    ASSERT_EQ(a.code, 0);
    EXPECT_EQ(a.out, b.out);
    EXPECT_EQ(a.out.size(), 17u);
    EXPECT_GT(fs::file_size(scratch("cc.ppm")), 512u * 512u * 3u);
}

TEST(Cli, VerifyFifSuiteAsJson) {
    const auto r = run("--format json verify --only fif");
    ASSERT_EQ(r.code, 0);
    const auto j = nlohmann::json::parse(r.out);
    ASSERT_EQ(j.size(), 5u);
    for (const auto& row : j) {
        EXPECT_EQ(row["suite"], "fif");
        EXPECT_EQ(row["status"], "pass");
    }
}

TEST(Cli, InjectedFaultFailsTheProductSuite) {
    const auto r = run("verify --only product --inject-fault");
    EXPECT_EQ(r.code, 1);
    EXPECT_NE(r.out.find(",fail,"), std::string::npos);
}
