#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <gtest/gtest.h>

#include "ruelle/cli.hpp"

namespace {

const std::string data = RUELLE_DATA_DIR;

struct Outcome {
    int code;
    std::string out;
    std::string err;
};

Outcome run(std::vector<std::string> args) {
    args.insert(args.begin(), "ruelle_cli");
    std::vector<const char*> argv;
    for (const auto& a : args) argv.push_back(a.c_str());
    std::ostringstream out, err;
    const int code = ruelle::cli::run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
    return {code, out.str(), err.str()};
}

std::string file(const std::string& name) { return data + "/" + name; }

std::string slurp(const std::filesystem::path& p) {
    std::ifstream in(p);
    return {std::istreambuf_iterator<char>(in), {}};
}

std::filesystem::path temp_file(const std::string& name) {
    return std::filesystem::temp_directory_path() / ("ruelle_cli_test_" + name);
}

}  // namespace

TEST(Cli, CheckWorkedFilter) {
    const auto r = run({"check", "--filter", file("stretched_haar.json")});
    EXPECT_EQ(r.code, 0);
    EXPECT_EQ(r.out, "quadrature=true lowpass=true\n");
}

TEST(Cli, CheckJson) {
    const auto r = run({"check", "--filter", file("not_quadrature.json"), "--format", "json"});
    EXPECT_EQ(r.code, 0);
    const auto j = nlohmann::json::parse(r.out);
    EXPECT_EQ(j["quadrature"], false);
    EXPECT_EQ(j["lowpass"], true);
}

TEST(Cli, EigenspaceHaar) {
    const auto r = run({"eigenspace", "--filter", file("haar.json")});
    EXPECT_EQ(r.code, 0);
    EXPECT_EQ(r.out.substr(0, r.out.find('\n')), "dimension=1 pure=true");
    const auto j = nlohmann::json::parse(run({"eigenspace", "--filter", file("stretched_haar.json"), "--format", "json"}).out);
    EXPECT_EQ(j["dimension"], 2);
    EXPECT_EQ(j["pure"], false);
}

TEST(Cli, UnknownSubcommandPrintsUsage) {
    const auto r = run({"run"});
    EXPECT_EQ(r.code, 2);
    EXPECT_NE(r.err.find("Usage"), std::string::npos);
    EXPECT_EQ(run({}).code, 2);
}

TEST(Cli, CascadeToFile) {
    const auto path = temp_file("cascade.csv");
    const auto r = run({"cascade", "--filter", file("haar.json"), "--iters", "3", "--out", path.string()});
    EXPECT_EQ(r.code, 0);
    EXPECT_EQ(slurp(path), "x,re,im\n0,1,0\n");
    EXPECT_NE(r.out.find("residual=0"), std::string::npos);
    std::filesystem::remove(path);
}

TEST(Cli, CascadeRejectsBadInit) {
    EXPECT_EQ(run({"cascade", "--filter", file("haar.json"), "--init", "gauss"}).code, 2);
}

TEST(Cli, MomentsTable) {
    const auto r = run({"moments", "--filter", file("stretched_haar.json"), "--h", file("h_phi.json"), "--n", "0",
                        "--jmax", "1"});
    EXPECT_EQ(r.code, 0);
    EXPECT_EQ(r.out, "k,n,f,re,im\n0,0,-1,0.222222222222,0\n0,0,0,0.333333333333,0\n0,0,1,0.222222222222,0\n");
}

TEST(Cli, MomentsRejectsNonHarmonicDensity) {
    EXPECT_EQ(run({"moments", "--filter", file("haar.json"), "--h", file("h_phi.json")}).code, 2);
}

TEST(Cli, CocycleCsv) {
    const auto r = run({"cocycle", "--filter", file("stretched_haar.json"), "--h", file("h_phi.json"), "--grid", "6"});
    EXPECT_EQ(r.code, 0);
    EXPECT_EQ(r.out.substr(0, r.out.find('\n')), "omega,re,im,admissible");
    EXPECT_EQ(std::count(r.out.begin(), r.out.end(), '\n'), 7);
}

TEST(Cli, CuntzNeedsSeed) {
    EXPECT_EQ(run({"cuntz", "--filter", file("haar.json")}).code, 2);
    const auto r = run({"cuntz", "--filter", file("daub4.json"), "--seed", "1", "--samples", "20", "--format", "json"});
    EXPECT_EQ(r.code, 0);
    const auto j = nlohmann::json::parse(r.out);
    EXPECT_LT(j["adjoint_error"].get<double>(), 1e-14);
    EXPECT_LT(j["completeness_error"].get<double>(), 1e-14);
}

TEST(Cli, CuntzRejectsNonQuadratureFilter) {
    EXPECT_EQ(run({"cuntz", "--filter", file("not_quadrature.json"), "--seed", "1"}).code, 2);
}

TEST(Cli, DualityJson) {
    const auto r = run({"duality", "--base", file("haar.json"), "--p", "3"});
    EXPECT_EQ(r.code, 0);
    const auto j = nlohmann::json::parse(r.out);
    EXPECT_EQ(j["orbits"], nlohmann::json::parse("[[0],[1,2]]"));
    EXPECT_EQ(j["periods"], nlohmann::json::parse("[1,2]"));
    EXPECT_EQ(j["dim"], 2);
    EXPECT_EQ(j["equal"], true);
    EXPECT_EQ(j["reciprocity"], true);
    for (const auto& v : j["residuals"]["twisted"]) EXPECT_LT(v.get<double>(), 1e-12);
    EXPECT_EQ(run({"duality", "--base", file("haar.json"), "--p", "4"}).code, 2);
}

TEST(Cli, JuliaSamples) {
    const auto path = temp_file("julia.csv");
    const std::vector<std::string> args = {"julia", "--poly", "1,0,-5.5125,0,6.07753125,0", "--samples", "100",
                                           "--depth", "25", "--seed", "42", "--out", path.string()};
    const auto r = run(args);
    EXPECT_EQ(r.code, 0);
    EXPECT_NE(r.out.find("case=fixed-a"), std::string::npos);
    const std::string first = slurp(path);
    EXPECT_EQ(std::count(first.begin(), first.end(), '\n'), 101);
    EXPECT_EQ(run(args).code, 0);
    EXPECT_EQ(slurp(path), first);
    std::filesystem::remove(path);
    EXPECT_EQ(run({"julia", "--poly", "1,0,-5.5125,0,6.07753125,0"}).code, 2);
    EXPECT_EQ(run({"julia", "--poly", "1,0,0", "--seed", "1"}).code, 2);
    EXPECT_EQ(run({"julia", "--poly", "1,x", "--seed", "1"}).code, 2);
}

TEST(Cli, UlamDoubling) {
    const auto r = run({"ulam", "--map", file("doubling.json"), "--bins", "8"});
    EXPECT_EQ(r.code, 0);
    EXPECT_EQ(r.out, "x,density\n0,1\n0.125,1\n0.25,1\n0.375,1\n0.5,1\n0.625,1\n0.75,1\n0.875,1\n");
    EXPECT_EQ(run({"ulam", "--map", file("two_branch.json"), "--bins", "64"}).code, 2);
}

TEST(Cli, BohrKernelAndVerdict) {
    const auto r = run({"bohr", "--filter", file("stretched_haar.json"), "--h", file("h_phi.json"), "--nmax", "4",
                        "--kmax", "2"});
    EXPECT_EQ(r.code, 0);
    const auto last = r.out.substr(r.out.rfind('{'));
    const auto verdict = nlohmann::json::parse(last);
    EXPECT_EQ(verdict["pass"], true);
    EXPECT_EQ(verdict["size"], 17);
    EXPECT_NE(r.out.find("n,k,re,im\n"), std::string::npos);
    EXPECT_NE(r.out.find("\n1,0,0.222222222222,0\n"), std::string::npos);
}

TEST(Cli, BadInputsExitTwo) {
    EXPECT_EQ(run({"check", "--filter", "/nonexistent.json"}).code, 2);
    EXPECT_EQ(run({"check", "--filter", file("haar.json"), "--format", "csv"}).code, 2);
    EXPECT_EQ(run({"check", "--filter", file("h_phi.json")}).code, 2);
    EXPECT_EQ(run({"eigenspace"}).code, 2);
}

TEST(Cli, HelpExitsZero) { EXPECT_EQ(run({"--help"}).code, 0); }
