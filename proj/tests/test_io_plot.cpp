#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "coinflip/harness.hpp"
#include "coinflip/io.hpp"
#include "coinflip/plot.hpp"

using namespace coinflip;

TEST_CASE("number formatting") {
    CHECK(format_full(0.1) == "0.1");
    CHECK(format_full(1.0 / 3.0) == "0.3333333333333333");
    CHECK(format_sig6(1.0 / 3.0) == "0.333333");
    CHECK(format_sig6(1051.0902695585273) == "1051.09");

    Rng rng(1);
    for (int i = 0; i < 1000; ++i) {
        const double x = rng.uniform() * std::pow(10.0, static_cast<int>(rng.below(20)) - 10);
        CHECK(std::stod(format_full(x)) == x);
    }
}

TEST_CASE("CSV parsing") {
    const CsvTable t = parse_csv("a,b\n1,2\n\n3, 4\r\n");
    CHECK(t.header == std::vector<std::string>{"a", "b"});
    REQUIRE(t.rows.size() == 2);
    CHECK(t.number(1, "b") == 4.0);
    CHECK_THROWS_AS(t.column("c"), DataError);
    CHECK_THROWS_AS(parse_csv(""), DataError);
    CHECK_THROWS_AS(parse_csv("\n\n"), DataError);
    CHECK_THROWS_AS(parse_csv("a,b\n1\n"), DataError);
    CHECK_THROWS_AS(parse_csv("a,b\nx,1\n").number(0, "a"), DataError);

    CHECK(parse_number_list("0.5, 0.25,0.25") == std::vector<double>{0.5, 0.25, 0.25});
    CHECK_THROWS_AS(parse_number_list("0.5,,1"), std::invalid_argument);
    CHECK_THROWS_AS(parse_number_list("0.5x"), std::invalid_argument);
}

TEST_CASE("plot kind detection") {
    CHECK(detect_plot_kind(parse_csv("device,sample_size,trial,substream_seed,kl_nats,total_energy_fj\n")) ==
          PlotKind::SampleSweep);
    CHECK(detect_plot_kind(parse_csv("outcome,label,count,frequency,target,exact\n")) == PlotKind::Histogram);
    CHECK(detect_plot_kind(parse_csv("varied_omega,omega1,omega2,omega3,rep,best_kl_nats,best_energy_fj\n")) ==
          PlotKind::WeightSweep);
    CHECK_THROWS_AS(detect_plot_kind(parse_csv("x,y\n1,2\n")), DataError);
}

TEST_CASE("sweep SVG is deterministic and well formed") {
    const SweepConfig c{kDefaultSampleSizes, 3, 42, resolve_device("td"), CircuitParams::td_reference(),
                        Distribution4::die_target(), true};
    const CsvTable table = parse_csv(sweep_to_csv(run_sample_sweep(c)));
    const std::string a = render_svg(table, PlotKind::SampleSweep);
    const std::string b = render_svg(table, PlotKind::SampleSweep);
    CHECK(a == b);
    CHECK(a.rfind("<?xml", 0) == 0);
    CHECK(a.find("</svg>") != std::string::npos);
    // One scatter point per trial per panel.
    std::size_t circles = 0;
    for (std::size_t pos = 0; (pos = a.find("<circle", pos)) != std::string::npos; ++pos) ++circles;
    CHECK(circles == 2 * table.rows.size());
    CHECK(a.find("nan") == std::string::npos);
}

TEST_CASE("histogram and weight-sweep SVGs render") {
    const CsvTable hist = parse_csv(
        "outcome,label,count,frequency,target,exact\n"
        "0,HH,1000,0.5,0.5,0.5\n1,HT,330,0.165,0.1666,0.1666\n"
        "2,TH,340,0.17,0.1666,0.1666\n3,TT,330,0.165,0.1666,0.1666\n");
    const std::string h = render_svg(hist, PlotKind::Histogram);
    CHECK(h.find(">HT</text>") != std::string::npos);

    const CsvTable ws = parse_csv(
        "varied_omega,omega1,omega2,omega3,rep,best_kl_nats,best_energy_fj\n"
        "omega1,75,0.005,0.5,0,0.01,4\nomega1,7500,0.005,0.5,0,0.001,5\n"
        "omega3,7500,0.005,0.005,0,0.0001,8\nomega3,7500,0.005,50,0,0.02,4\n");
    const std::string w = render_svg(ws, PlotKind::WeightSweep);
    CHECK(w.find("best KL vs omega1") != std::string::npos);
    CHECK(w.find("best KL vs omega2") == std::string::npos);
}

TEST_CASE("empty tables are rejected") {
    const CsvTable empty = parse_csv("device,sample_size,trial,substream_seed,kl_nats,total_energy_fj\n");
    CHECK_THROWS_AS(render_svg(empty, PlotKind::SampleSweep), DataError);
    CHECK_THROWS_AS(render_svg(parse_csv("outcome,frequency,target\n"), PlotKind::Histogram), DataError);
}
