#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <sstream>

#include <json.hpp>

#include "cli_fixture.hpp"
#include "coinflip/cli.hpp"
#include "coinflip/io.hpp"

using namespace coinflip;
using clitest::Run;
using clitest::run;
namespace fs = std::filesystem;

TEST_CASE("evaluate") {
    SUBCASE("reference TD parameters") {
        const Run r = run({"evaluate", "--preset", "td"});
        REQUIRE(r.code == kExitOk);
        const auto j = nlohmann::json::parse(r.out);
        CHECK(j["v"][0].get<double>() == doctest::Approx(0.500132).epsilon(1e-6));
        CHECK(j["v"][3].get<double>() == doctest::Approx(0.166598).epsilon(1e-6));
        CHECK(j["kl_nats"].get<double>() < 1e-6);
    }
    SUBCASE("fair coins") {
        const Run r = run({"evaluate", "--params", "0.5,0.5,0.5,0.5,0.5"});
        REQUIRE(r.code == kExitOk);
        const auto j = nlohmann::json::parse(r.out);
        for (int i = 0; i < 4; ++i) CHECK(j["v"][i].get<double>() == 0.25);
        CHECK(j["kl_nats"].get<double>() == 0.130812);
    }
    SUBCASE("printed fitness recombines from printed components") {
        const Run r = run({"evaluate", "--device", "mtj_she", "--params", "0.2,0.3,0.4,0.9,0.7"});
        REQUIRE(r.code == kExitOk);
        const auto j = nlohmann::json::parse(r.out);
        const double w1 = j["weights"]["omega1"], w2 = j["weights"]["omega2"], w3 = j["weights"]["omega3"];
        const double recombined = w1 * j["kl_nats"].get<double>() + w2 * j["fairness"].get<double>() +
                                  w3 * j["energy_fj"].get<double>();
        // Components are printed to six significant digits.
        CHECK(std::abs(recombined - j["fitness"].get<double>()) <= 1e-5 * std::abs(recombined));
    }
    SUBCASE("invalid parameters") {
        CHECK(run({"evaluate", "--params", "1.2,0.5,0.5,0.5,0.5"}).code == kExitUsage);
        CHECK(run({"evaluate", "--params", "0.5,0.5"}).code == kExitUsage);
        CHECK(run({"evaluate", "--params", "a,b,c,d,e"}).code == kExitUsage);
        CHECK(run({"evaluate", "--device", "nonexistent"}).code == kExitUsage);
        CHECK(run({"evaluate", "--target", "0.5,0.5,0,0"}).code == kExitUsage);
        CHECK(run({"bogus"}).code == kExitUsage);
        CHECK(run(std::vector<std::string>{}).code == kExitUsage);
    }
}

TEST_CASE("solve") {
    SUBCASE("loaded die") {
        const Run r = run({"solve", "--target", "0.5,0.1666667,0.1666667,0.1666667"});
        REQUIRE(r.code == kExitOk);
        const auto j = nlohmann::json::parse(r.out);
        CHECK_FALSE(j["solvable"].get<bool>());
        CHECK(j["message"] == "no independent two-coin solution");
        CHECK(j["residual"].get<double>() == doctest::Approx(1.0 / 12.0 - 1.0 / 36.0).epsilon(1e-5));
    }
    SUBCASE("uniform") {
        const auto j = nlohmann::json::parse(run({"solve", "--target", "0.25,0.25,0.25,0.25"}).out);
        CHECK(j["solvable"].get<bool>());
        CHECK(j["p"].get<double>() == 0.5);
        CHECK(j["q"].get<double>() == 0.5);
    }
    SUBCASE("product target") {
        const auto j = nlohmann::json::parse(run({"solve", "--target", "0.42,0.28,0.18,0.12"}).out);
        CHECK(j["solvable"].get<bool>());
        CHECK(j["p"].get<double>() == 0.7);
        CHECK(j["q"].get<double>() == 0.6);
    }
    CHECK(run({"solve", "--target", "0.5,0.5,0.5,0.5"}).code == kExitUsage);
    CHECK(run({"solve", "--target", "0.5,0.5"}).code == kExitUsage);
}

TEST_CASE("file-writing subcommands") {
    const clitest::TempDir dir("cli");

    SUBCASE("optimize writes document, history and manifest") {
        const fs::path out = dir.path / "opt.json";
        const Run r = run({"optimize", "--generations", "20", "--population", "16", "--seed", "3", "--out",
                           out.string()});
        REQUIRE(r.code == kExitOk);
        CHECK(fs::exists(out));
        CHECK(fs::exists(dir.path / "opt.history.csv"));
        CHECK(fs::exists(dir.path / "opt.json.manifest.json"));
        const auto m = nlohmann::json::parse(read_text_file(dir.path / "opt.json.manifest.json"));
        CHECK(m["subcommand"] == "optimize");
        CHECK(m["seed"] == 3);
        CHECK(m["outputs"] == nlohmann::json::array({out.string(), (dir.path / "opt.history.csv").string()}));
        CHECK(parse_csv(read_text_file(dir.path / "opt.history.csv")).rows.size() == 20);

        // Re-running the manifest's recorded arguments reproduces the outputs.
        const std::string before = read_text_file(out);
        const std::vector<std::string> args = m["args"].get<std::vector<std::string>>();
        REQUIRE(run(args).code == kExitOk);
        CHECK(read_text_file(out) == before);
    }
    SUBCASE("sample writes report and histogram") {
        const fs::path out = dir.path / "s.json";
        const Run r = run({"sample", "--device", "mtj_she", "--n", "2000", "--out", out.string()});
        REQUIRE(r.code == kExitOk);
        const auto j = nlohmann::json::parse(read_text_file(out));
        CHECK(j["n"] == 2000);
        const CsvTable h = parse_csv(read_text_file(dir.path / "s.histogram.csv"));
        CHECK(h.rows.size() == 4);
        CHECK(run({"sample", "--n", "0"}).code == kExitUsage);
    }
    SUBCASE("sweep then plot") {
        const fs::path csv = dir.path / "sweep.csv";
        REQUIRE(run({"sweep", "--sizes", "10,100", "--trials", "3", "--out", csv.string()}).code == kExitOk);
        CHECK(parse_csv(read_text_file(csv)).rows.size() == 6);
        const fs::path svg = dir.path / "sweep.svg";
        REQUIRE(run({"plot", "--in", csv.string(), "--out", svg.string()}).code == kExitOk);
        CHECK(read_text_file(svg).find("<svg") != std::string::npos);
        // Plot and data manifests live side by side.
        CHECK(nlohmann::json::parse(read_text_file(dir.path / "sweep.csv.manifest.json"))["subcommand"] == "sweep");
        CHECK(nlohmann::json::parse(read_text_file(dir.path / "sweep.svg.manifest.json"))["subcommand"] == "plot");
        CHECK(run({"sweep", "--sizes", "100,10"}).code == kExitUsage);
        CHECK(run({"sweep", "--sizes", "10.5"}).code == kExitUsage);
    }
    SUBCASE("plot failures leave no output") {
        const fs::path empty = dir.path / "empty.csv";
        write_text_file(empty, "");
        const fs::path svg = dir.path / "never.svg";
        CHECK(run({"plot", "--in", empty.string(), "--out", svg.string()}).code == kExitRuntime);
        CHECK_FALSE(fs::exists(svg));
        CHECK_FALSE(fs::exists(dir.path / "never.svg.manifest.json"));

        const fs::path header_only = dir.path / "header.csv";
        write_text_file(header_only, "device,sample_size,trial,substream_seed,kl_nats,total_energy_fj\n");
        CHECK(run({"plot", "--in", header_only.string(), "--out", svg.string()}).code == kExitRuntime);
        CHECK_FALSE(fs::exists(svg));

        CHECK(run({"plot", "--in", (dir.path / "missing.csv").string(), "--out", svg.string()}).code ==
              kExitRuntime);
        CHECK_FALSE(fs::exists(svg));
    }
    SUBCASE("invalid optimizer settings write nothing") {
        const fs::path out = dir.path / "bad.json";
        CHECK(run({"optimize", "--population", "1", "--out", out.string()}).code == kExitUsage);
        CHECK(run({"optimize", "--w1", "-1", "--out", out.string()}).code == kExitUsage);
        CHECK_FALSE(fs::exists(out));
    }
    SUBCASE("weight-sweep and runs") {
        const fs::path ws = dir.path / "ws.csv";
        REQUIRE(run({"weight-sweep", "--device", "mtj_she", "--generations", "5", "--population", "8",
                     "--grid-points", "3", "--reps", "1", "--out", ws.string()})
                    .code == kExitOk);
        CHECK(parse_csv(read_text_file(ws)).rows.size() == 9);
        const fs::path runs = dir.path / "runs.csv";
        REQUIRE(run({"runs", "--runs", "3", "--generations", "5", "--population", "8", "--out", runs.string()})
                    .code == kExitOk);
        CHECK(parse_csv(read_text_file(runs)).rows.size() == 3);
    }
    SUBCASE("custom device file") {
        const fs::path dev = dir.path / "custom.json";
        write_text_file(dev, R"({"name":"cheap","model":"constant","e0_fj":2})");
        const Run r = run({"evaluate", "--device", dev.string(), "--params", "0.5,0.5,0.5,0.5,0.5"});
        REQUIRE(r.code == kExitOk);
        CHECK(nlohmann::json::parse(r.out)["energy_fj"].get<double>() == 8.0);
    }
}
