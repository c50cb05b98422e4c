#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <ifperf/bounds.hpp>
#include <ifperf/channel.hpp>
#include <ifperf/errors.hpp>
#include <ifperf/experiments.hpp>
#include <ifperf/mellin.hpp>
#include <ifperf/rng.hpp>
#include <ifperf/simulator.hpp>

#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

using namespace ifperf;

namespace {

ChannelSpec interfered(double snr_db, double sinr_db, int n) {
    ScenarioSpec sc;
    sc.avg_snr = db_to_linear(snr_db);
    sc.avg_sinr = db_to_linear(sinr_db);
    sc.n_interferers = n;
    sc.symbols_per_slot = 1.0;
    return scenario_to_channel(sc);
}

std::size_t find_row(const CsvDocument& d,
                     const std::vector<std::pair<std::string, std::string>>& match) {
    for (std::size_t r = 0; r < d.rows.size(); ++r) {
        bool ok = true;
        for (const auto& [col, want] : match)
            if (d.rows[r][d.column_index(col)] != want) ok = false;
        if (ok) return r;
    }
    FAIL("no row matches");
    return 0;
}

const std::string& cell(const CsvDocument& d, std::size_t row,
                        const std::string& col) {
    return d.rows[row][d.column_index(col)];
}

} // namespace

TEST_CASE("kind names round-trip") {
    for (ExperimentKind kind : all_experiment_kinds())
        CHECK(kind_from_name(kind_name(kind)) == kind);
    CHECK_THROWS_WITH_AS(kind_from_name("nope"), doctest::Contains("nope"),
                         ConfigError);
}

TEST_CASE("config parsing applies overrides and rejects junk") {
    const ExperimentConfig cfg = config_from_text(
        "kind = validate\nseed = 7\nslots = 1234\nthreads = 2\nrate = 0.5\n",
        "t.cfg");
    CHECK(cfg.kind == ExperimentKind::Validate);
    CHECK(cfg.seed == 7);
    CHECK(cfg.slots == 1234);
    CHECK(cfg.threads == 2);
    CHECK(cfg.settings.get_double("rate") == 0.5);

    // fallback kind fills in and must agree when both are present
    CHECK(config_from_text("slots = 10\n", "t.cfg", "validate").kind ==
          ExperimentKind::Validate);
    CHECK_THROWS_AS(config_from_text("slots = 10\n"), ConfigError);
    CHECK_THROWS_WITH_AS(
        config_from_text("kind = validate\n", "t.cfg", "delay-vs-rate"),
        doctest::Contains("does not match"), ConfigError);

    CHECK_THROWS_WITH_AS(config_from_text("kind = validate\ntypo_key = 1\n"),
                         doctest::Contains("typo_key"), ConfigError);
    CHECK_THROWS_AS(config_from_text("kind = validate\nseed = -1\n"), ConfigError);
    CHECK_THROWS_AS(config_from_text("kind = validate\nslots = 0\n"), ConfigError);
    CHECK_THROWS_AS(config_from_text("kind = validate\nthreads = -2\n"),
                    ConfigError);
    // settings keys are validated per kind
    CHECK_THROWS_WITH_AS(config_from_text("kind = effective-capacity\nrate = 1\n"),
                         doctest::Contains("rate"), ConfigError);
    CHECK_THROWS_AS(config_from_text("kind = effective-capacity\ns_min = 0\n"),
                    ConfigError);
    CHECK_THROWS_AS(
        config_from_text("kind = delay-vs-epsilon\nepsilon_max = 1.5\n"),
        ConfigError);
    CHECK_THROWS_AS(
        config_from_text("kind = delay-vs-epsilon\ninterferers = 1.5\n"),
        ConfigError);
    CHECK_THROWS_AS(config_from_text("kind = validate\ndelays = 5, 3\n"),
                    ConfigError);
    // scenario sanity is caught at parse time, not deep inside the run
    CHECK_THROWS_AS(
        config_from_text("kind = delay-vs-epsilon\nsinr_db = 16\n"),
        ConfigError);
}

TEST_CASE("default configs validate for every kind") {
    for (ExperimentKind kind : all_experiment_kinds())
        CHECK_NOTHROW(default_config(kind).validate());
}

TEST_CASE("effective capacity dataset matches direct evaluation") {
    ExperimentConfig cfg = config_from_text(
        "kind = effective-capacity\nsnr_db = 8\ns_min = 0.1\ns_max = 2\n"
        "s_points = 5\n");
    const CsvDocument doc = run_experiment(cfg);
    CHECK(doc.rows.size() == 10);
    CHECK(*doc.find_meta("kind") == "effective-capacity");
    // every dB parameter carries a linear twin in the header
    CHECK(std::stod(*doc.find_meta("snr")) ==
          doctest::Approx(db_to_linear(8.0)).epsilon(1e-12));

    ChannelSpec noise;
    noise.avg_snr = db_to_linear(8.0);
    noise.symbols_per_slot = 1.0;
    ChannelSpec one = noise;
    one.interferer_ratios = {1.0};

    const std::size_t r0 = find_row(doc, {{"channel", "noise"}, {"s", "0.1"}});
    CHECK(std::stod(cell(doc, r0, "effective_capacity")) ==
          effective_capacity(noise, 0.1));
    const std::size_t r1 = find_row(doc, {{"channel", "interference"}, {"s", "2"}});
    CHECK(std::stod(cell(doc, r1, "effective_capacity")) ==
          effective_capacity(one, 2.0));

    const CheckReport report = check_reproduction(doc);
    CHECK(report.items.size() == 3);
    CHECK(report.all_passed());
    CHECK(report.to_text().find("[PASS]") == 0);
}

TEST_CASE("delay-vs-epsilon dataset matches the standalone solver") {
    ExperimentConfig cfg = config_from_text("kind = delay-vs-epsilon\n");
    const CsvDocument doc = run_experiment(cfg);
    CHECK(doc.rows.size() == 44);

    const std::size_t r = find_row(doc, {{"sinr_db", "4"},
                                         {"interferers", "5"},
                                         {"epsilon", "1e-06"}});
    ArrivalSpec arrivals;
    arrivals.rate = 0.85;
    const int direct = delay_bound(interfered(15.0, 4.0, 5), arrivals, 1e-6);
    CHECK(std::stoi(cell(doc, r, "delay_slots")) == direct);

    CHECK(check_reproduction(doc).all_passed());
}

TEST_CASE("delay-vs-rate marks the infeasible region") {
    ExperimentConfig cfg = config_from_text(
        "kind = delay-vs-rate\nsinr_db = 4\ninterferers = 1\nrate_min = 0.5\n"
        "rate_max = 3\nrate_points = 6\n");
    const CsvDocument doc = run_experiment(cfg);
    CHECK(doc.rows.size() == 6);
    CHECK(cell(doc, 0, "delay_slots") != "unstable");
    CHECK(cell(doc, 5, "delay_slots") == "unstable");
    CHECK(check_reproduction(doc).all_passed());

    // the marker sits exactly where the average capacity says it should
    const double cap = average_capacity(interfered(15.0, 4.0, 1));
    for (std::size_t r = 0; r < doc.rows.size(); ++r) {
        const double rate = std::stod(cell(doc, r, "rate"));
        if (cell(doc, r, "delay_slots") == "unstable")
            CHECK(rate >= cap);
        else
            CHECK(rate < cap);
    }
}

TEST_CASE("delay-vs-interferers includes the noise reference") {
    ExperimentConfig cfg = config_from_text(
        "kind = delay-vs-interferers\nrates = 2.0\nmax_interferers = 4\n");
    const CsvDocument doc = run_experiment(cfg);
    CHECK(doc.rows.size() == 5);

    const std::size_t ref = find_row(doc, {{"channel", "noise"}});
    CHECK(cell(doc, ref, "interferers") == "0");
    ChannelSpec noise;
    noise.avg_snr = db_to_linear(8.0);
    noise.symbols_per_slot = 1.0;
    ArrivalSpec arrivals;
    arrivals.rate = 2.0;
    CHECK(std::stoi(cell(doc, ref, "delay_slots")) ==
          delay_bound(noise, arrivals, 1e-6));

    const std::size_t two = find_row(doc, {{"interferers", "2"}});
    CHECK(std::stoi(cell(doc, two, "delay_slots")) ==
          delay_bound(interfered(15.0, 8.0, 2), arrivals, 1e-6));

    CHECK(check_reproduction(doc).all_passed());
}

TEST_CASE("maxrate dataset matches the standalone solver") {
    ExperimentConfig cfg = config_from_text(
        "kind = maxrate-vs-snr\nsnr_db_min = 10\nsnr_db_max = 12\n"
        "sinr_db = 8\ninterferers = 1\n");
    const CsvDocument doc = run_experiment(cfg);
    CHECK(doc.rows.size() == 2);
    CHECK(std::stod(*doc.find_meta("snr_min")) ==
          doctest::Approx(db_to_linear(10.0)).epsilon(1e-12));
    CHECK(std::stod(*doc.find_meta("snr_max")) ==
          doctest::Approx(db_to_linear(12.0)).epsilon(1e-12));
    CHECK(std::stod(*doc.find_meta("sinr")) ==
          doctest::Approx(db_to_linear(8.0)).epsilon(1e-12));

    const ChannelSpec spec = interfered(10.0, 8.0, 1);
    CHECK(std::stod(cell(doc, 0, "max_rate")) == max_rate(spec, 10, 1e-6));
    CHECK(std::stod(cell(doc, 0, "avg_capacity")) == average_capacity(spec));
    CHECK(std::stod(cell(doc, 1, "max_rate")) >
          std::stod(cell(doc, 0, "max_rate")));
}

TEST_CASE("avgcap dataset matches quadrature") {
    ExperimentConfig cfg = config_from_text(
        "kind = avgcap-vs-snr\nsnr_db_min = 10\nsnr_db_max = 14\n"
        "sinr_db = 8, 9\ninterferers = 1, 3\n");
    const CsvDocument doc = run_experiment(cfg);
    CHECK(doc.rows.size() == 12);
    const std::size_t r = find_row(doc, {{"sinr_db", "9"},
                                         {"interferers", "3"},
                                         {"snr_db", "12"}});
    CHECK(std::stod(cell(doc, r, "avg_capacity")) ==
          average_capacity(interfered(12.0, 9.0, 3)));
    CHECK(check_reproduction(doc).all_passed());
}

TEST_CASE("validate dataset ties bound, simulation, and seed together") {
    ExperimentConfig cfg = config_from_text(
        "kind = validate\nslots = 50000\nseed = 99\nsinr_db = 4\n"
        "interferers = 1\ndelays = 1, 2, 3, 5\n");
    const CsvDocument doc = run_experiment(cfg);
    CHECK(doc.rows.size() == 4);
    CHECK(*doc.find_meta("seed") == "99");
    CHECK(*doc.find_meta("slots") == "50000");

    const ChannelSpec spec = interfered(15.0, 4.0, 1);
    ArrivalSpec arrivals;
    arrivals.rate = 0.85;
    CHECK(std::stod(cell(doc, 1, "analytic_epsilon")) ==
          violation_probability(spec, arrivals, 2));

    SimConfig sim;
    sim.spec = spec;
    sim.arrivals = arrivals;
    sim.slots = 50000;
    sim.seed = derive_stream_seed(99, 0);  // first scenario, first stream block
    sim.delay_grid = {1, 2, 3, 5};
    const SimOutcome out = run_queue(sim);
    for (std::size_t j = 0; j < 4; ++j) {
        CHECK(std::stod(cell(doc, j, "empirical_freq")) == out.violation_freq[j]);
        CHECK(std::stoll(cell(doc, j, "violations")) == out.violation_count[j]);
        CHECK(std::stod(cell(doc, j, "ccdf_upper_99")) == out.ccdf_upper_99[j]);
    }

    // decay of the bound per extra slot of delay, from the transform at the
    // optimizing point
    KernelEvaluator ev(spec);
    CHECK(std::stod(cell(doc, 0, "analytic_slope")) ==
          ev.log_service_mellin(ev.optimal_s(0.85, 5)));

    CHECK(check_reproduction(doc).all_passed());
}

TEST_CASE("runs are deterministic and thread-count independent") {
    const std::string text =
        "kind = validate\nslots = 20000\nsinr_db = 0, 4\ninterferers = 1\n"
        "delays = 1, 2, 4\n";
    ExperimentConfig serial = config_from_text(text);
    serial.threads = 1;
    ExperimentConfig pooled = config_from_text(text);
    pooled.threads = 4;
    const std::string a = csv_emit(run_experiment(serial));
    const std::string b = csv_emit(run_experiment(pooled));
    CHECK(a == b);
    CHECK(csv_emit(run_experiment(serial)) == a);

    // seed moves the simulated columns but not the analytic ones
    ExperimentConfig reseeded = config_from_text(text + "seed = 5\n");
    const CsvDocument doc2 = run_experiment(reseeded);
    const CsvDocument doc1 = csv_parse(a);
    CHECK(cell(doc2, 0, "analytic_epsilon") == cell(doc1, 0, "analytic_epsilon"));
    CHECK(cell(doc2, 0, "empirical_freq") != cell(doc1, 0, "empirical_freq"));
}

TEST_CASE("checker flags corrupted datasets") {
    ExperimentConfig cfg = config_from_text(
        "kind = effective-capacity\nsnr_db = 4, 8\ns_points = 7\n");
    CsvDocument doc = run_experiment(cfg);
    REQUIRE(check_reproduction(doc).all_passed());

    // raising an interfered point above its noise partner breaks dominance
    CsvDocument bad = doc;
    const std::size_t r = find_row(bad, {{"channel", "interference"}});
    bad.rows[r][bad.column_index("effective_capacity")] = "1e9";
    const CheckReport report = check_reproduction(bad);
    CHECK_FALSE(report.all_passed());
    CHECK_FALSE(report.items[1].passed);
    CHECK(report.to_text().find("[FAIL]") != std::string::npos);

    // zeroing the first point of a curve makes it rise afterwards
    CsvDocument rising = doc;
    const std::size_t r2 = find_row(rising, {{"channel", "noise"}});
    rising.rows[r2][rising.column_index("effective_capacity")] = "0";
    CHECK_FALSE(check_reproduction(rising).items[0].passed);

    // a violation frequency above the bound must be caught
    ExperimentConfig vcfg = config_from_text(
        "kind = validate\nslots = 20000\nsinr_db = 4\ninterferers = 1\n"
        "delays = 1, 2\n");
    CsvDocument vdoc = run_experiment(vcfg);
    REQUIRE(check_reproduction(vdoc).all_passed());
    vdoc.rows[0][vdoc.column_index("empirical_freq")] = "0.999";
    CHECK_FALSE(check_reproduction(vdoc).items[0].passed);

    // reordered rows must not confuse the checker
    CsvDocument shuffled = doc;
    std::rotate(shuffled.rows.begin(), shuffled.rows.begin() + 5,
                shuffled.rows.end());
    CHECK(check_reproduction(shuffled).all_passed());

    CsvDocument no_kind = doc;
    no_kind.meta.clear();
    CHECK_THROWS_AS(check_reproduction(no_kind), ConfigError);
}

TEST_CASE("dataset round-trips through text unchanged") {
    ExperimentConfig cfg = config_from_text(
        "kind = delay-vs-epsilon\nsinr_db = 4\ninterferers = 1\n"
        "epsilon_points = 4\n");
    const CsvDocument doc = run_experiment(cfg);
    const std::string text = csv_emit(doc);
    const CsvDocument back = csv_parse(text);
    CHECK(csv_emit(back) == text);
    CHECK(check_reproduction(back).all_passed());
}
