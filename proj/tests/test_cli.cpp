#include <doctest.h>

#include <filesystem>
#include <sstream>

#include "cnpgap/cli.hpp"
#include "cnpgap/io/csv.hpp"
#include "cnpgap/io/files.hpp"
#include "cnpgap/io/serialization.hpp"

namespace fs = std::filesystem;
using cnpgap::io::Json;

namespace {

struct Result {
    int code;
    std::string out;
    std::string err;
};

Result run(std::vector<std::string> args) {
    args.insert(args.begin(), "cnp_gapmeter");
    std::vector<const char*> argv;
    for (const auto& a : args) argv.push_back(a.c_str());
    std::ostringstream out, err;
    const int code = cnpgap::cli::run(static_cast<int>(argv.size()), argv.data(), out, err);
    return {code, out.str(), err.str()};
}

fs::path scratch(const std::string& name) {
    const fs::path dir = fs::temp_directory_path() / ("cnpgap_test_cli_" + name);
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

std::string slurp(const fs::path& p) { return cnpgap::io::read_text_file(p); }

}  // namespace

TEST_CASE("gap on the all-negative context") {
    const Result r = run({"gap", "--negative-context", "100", "--new-y", "1"});
    REQUIRE(r.code == 0);
    const Json j = Json::parse(r.out);
    CHECK(j["delta"].get<double>() == doctest::Approx(2.0 / (101.0 * 101.0)).epsilon(1e-10));
    CHECK(j["n"] == 100);
}

TEST_CASE("gap with explicit context values") {
    const Result r = run({"gap", "--context-y", "-0.5,-2,-1", "--new-y", "-4", "--bh", "2"});
    REQUIRE(r.code == 0);
    CHECK(Json::parse(r.out)["delta"].get<double>() == 0.0);
}

TEST_CASE("gap error exits") {
    const fs::path dir = scratch("errors");
    cnpgap::io::atomic_write(dir / "empty.json", "[]");
    const Result empty = run({"gap", "--context-file", (dir / "empty.json").string(), "--new-y", "1"});
    CHECK(empty.code == 1);
    CHECK(empty.err.find("EmptyContext") != std::string::npos);

    cnpgap::io::atomic_write(dir / "bad.json", R"({"decoder": {"type": "linear", "weights": [1], "sigma": -2}})");
    const Result bad = run({"gap", "--config", (dir / "bad.json").string(), "--negative-context", "3", "--new-y", "1"});
    CHECK(bad.code == 2);
    CHECK(bad.err.find("decoder") != std::string::npos);

    CHECK(run({"gap", "--negative-context", "3"}).code == 2);
    CHECK(run({"frobnicate"}).code == 2);
    CHECK(run({}).code == 2);
    fs::remove_all(dir);
}

TEST_CASE("bounds command") {
    const Result r = run({"bounds", "--bw", "1", "--bh", "1", "--sigma", "1", "--eps", "0.02"});
    REQUIRE(r.code == 0);
    CHECK(r.out.find("min_context_for_eps(eps=0.02): 10\n") != std::string::npos);
    CHECK(r.out.find("0.5") != std::string::npos);

    const Result l = run({"bounds", "--lmu", "1", "--lsigma", "1", "--sigma-min", "0.5", "--n", "4,20"});
    REQUIRE(l.code == 0);
    CHECK(l.out.find("false") != std::string::npos);
    CHECK(l.out.find("true") != std::string::npos);

    CHECK(run({"bounds", "--sigma", "0"}).code == 2);
    CHECK(run({"bounds", "--eps", "-1"}).code == 2);
}

TEST_CASE("worstcase command") {
    const Result r = run({"worstcase", "--kind", "linear", "--n", "99"});
    REQUIRE(r.code == 0);
    const Json j = Json::parse(r.out);
    CHECK(j["predicted_gap"].get<double>() == doctest::Approx(2e-4));
    CHECK(j["measured"]["delta"].get<double>() == doctest::Approx(2e-4).epsilon(1e-10));
    CHECK(j["context"].size() == 99);

    const Result l = run({"worstcase", "--kind", "lipschitz", "--n", "200"});
    REQUIRE(l.code == 0);
    const Json lj = Json::parse(l.out);
    const double ratio = lj["measured"]["delta"].get<double>() / lj["predicted_gap"].get<double>();
    CHECK(std::abs(ratio - 1.0) <= 0.05);

    CHECK(run({"worstcase", "--kind", "quadratic"}).code == 2);
}

TEST_CASE("sweep writes artifacts and is reproducible") {
    const fs::path dir = scratch("sweep");
    const std::vector<std::string> base{"sweep", "--mode", "random", "--n", "2:30", "--trials", "20", "--seed", "7"};

    auto args = base;
    args.insert(args.end(), {"--out", (dir / "a").string(), "--threads", "1"});
    REQUIRE(run(args).code == 0);
    args = base;
    args.insert(args.end(), {"--out", (dir / "b").string(), "--threads", "6", "--figures"});
    REQUIRE(run(args).code == 0);

    CHECK(slurp(dir / "a" / "trials.csv") == slurp(dir / "b" / "trials.csv"));
    CHECK(slurp(dir / "a" / "fit.json") == slurp(dir / "b" / "fit.json"));
    CHECK(fs::exists(dir / "b" / "gap.svg"));
    CHECK(fs::exists(dir / "b" / "ratio.svg"));
    CHECK(!fs::exists(dir / "a" / "gap.svg"));

    const Json manifest = Json::parse(slurp(dir / "a" / "manifest.json"));
    CHECK(manifest["tool_version"] == "0.1.0");
    CHECK(manifest["master_seed"] == 7);
    CHECK(manifest["output_paths"].size() == 3);
    CHECK(manifest.contains("timestamp"));

    const Result replay = run({"sweep", "--replay", (dir / "a" / "manifest.json").string(), "--out", (dir / "c").string()});
    REQUIRE(replay.code == 0);
    CHECK(slurp(dir / "a" / "trials.csv") == slurp(dir / "c" / "trials.csv"));
    CHECK(slurp(dir / "a" / "fit.json") == slurp(dir / "c" / "fit.json"));
    fs::remove_all(dir);
}

TEST_CASE("worst-case and singularity sweeps") {
    const fs::path dir = scratch("modes");
    const Result wc = run({"sweep", "--mode", "worstcase", "--n", "2:300", "--out", dir.string(), "--name", "wc"});
    REQUIRE(wc.code == 0);
    const std::string csv = slurp(dir / "wc_trials.csv");
    const auto recs = cnpgap::io::parse_trials_csv(csv);
    REQUIRE(recs.size() == 299);
    CHECK(recs[97].n == 99);
    CHECK(recs[97].delta == doctest::Approx(2e-4).epsilon(1e-10));
    CHECK(recs[97].bound == doctest::Approx(2e-4).epsilon(1e-14));

    const Result sing = run({"sweep", "--mode", "singularity", "--decoder", "sqrt", "--n", "2:300", "--out",
                             dir.string(), "--name", "sq"});
    REQUIRE(sing.code == 0);
    CHECK(sing.err.find("skipped 149 odd") != std::string::npos);
    const double beta = Json::parse(sing.out)["beta"].get<double>();
    CHECK(beta == doctest::Approx(1.0).epsilon(0.1));

    const Result few = run({"sweep", "--mode", "worstcase", "--n", "2:6", "--out", dir.string(), "--name", "few"});
    REQUIRE(few.code == 0);
    CHECK(Json::parse(few.out)["beta"].is_null());

    CHECK(run({"sweep", "--mode", "sideways", "--out", dir.string()}).code == 2);
    CHECK(run({"sweep", "--mode", "singularity", "--n", "7:7", "--out", dir.string()}).code == 2);
    CHECK(run({"sweep", "--n", "9:3", "--out", dir.string()}).code == 2);
    fs::remove_all(dir);
}

TEST_CASE("panel preset") {
    const fs::path dir = scratch("panel");
    const Result r = run({"sweep", "--panel", "fig1c", "--out", dir.string(), "--figures"});
    REQUIRE(r.code == 0);
    CHECK(fs::exists(dir / "fig1c_fit.json"));
    CHECK(fs::exists(dir / "fig1c_manifest.json"));
    CHECK(run({"sweep", "--panel", "fig9z", "--out", dir.string()}).code == 2);
    fs::remove_all(dir);
}
