#include <ifperf/experiments.hpp>

#include <ifperf/arrivals.hpp>
#include <ifperf/bounds.hpp>
#include <ifperf/channel.hpp>
#include <ifperf/errors.hpp>
#include <ifperf/mellin.hpp>
#include <ifperf/rng.hpp>
#include <ifperf/simulator.hpp>
#include <ifperf/version.hpp>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <exception>
#include <functional>
#include <iomanip>
#include <limits>
#include <map>
#include <sstream>
#include <string>
#include <thread>
#include <utility>
#include <vector>

namespace ifperf {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

struct KindRow {
    ExperimentKind kind;
    const char* name;
};

constexpr KindRow kKinds[] = {
    {ExperimentKind::EffectiveCapacity, "effective-capacity"},
    {ExperimentKind::DelayVsEpsilon, "delay-vs-epsilon"},
    {ExperimentKind::DelayVsRate, "delay-vs-rate"},
    {ExperimentKind::DelayVsInterferers, "delay-vs-interferers"},
    {ExperimentKind::MaxRateVsSnr, "maxrate-vs-snr"},
    {ExperimentKind::AvgCapVsSnr, "avgcap-vs-snr"},
    {ExperimentKind::Validate, "validate"},
};

// Runs work(0..n-1) on up to `threads` workers (0 picks the hardware count).
// Results land in caller-indexed slots, so output never depends on the
// worker count; the lowest-index exception wins for the same reason.
void run_parallel(int threads, std::size_t n,
                  const std::function<void(std::size_t)>& work) {
    if (n == 0) return;
    std::size_t workers = threads > 0
        ? static_cast<std::size_t>(threads)
        : std::max(1u, std::thread::hardware_concurrency());
    workers = std::min(workers, n);
    std::vector<std::exception_ptr> errors(n);
    if (workers <= 1) {
        for (std::size_t i = 0; i < n; ++i) {
            try {
                work(i);
            } catch (...) {
                errors[i] = std::current_exception();
                break;
            }
        }
    } else {
        std::atomic<std::size_t> next{0};
        auto body = [&] {
            for (;;) {
                const std::size_t i = next.fetch_add(1);
                if (i >= n) return;
                try {
                    work(i);
                } catch (...) {
                    errors[i] = std::current_exception();
                }
            }
        };
        std::vector<std::thread> pool;
        pool.reserve(workers);
        for (std::size_t t = 0; t < workers; ++t) pool.emplace_back(body);
        for (std::thread& t : pool) t.join();
    }
    for (const std::exception_ptr& e : errors)
        if (e) std::rethrow_exception(e);
}

void merge_warnings(const std::vector<WarningSink>& locals, WarningSink* sink) {
    if (!sink) return;
    for (const WarningSink& local : locals)
        for (const Warning& w : local.warnings()) sink->emit(w.code, w.message);
}

// endpoints land exactly on lo and hi
std::vector<double> lin_grid(double lo, double hi, int n) {
    std::vector<double> g;
    g.reserve(static_cast<std::size_t>(n));
    if (n == 1) {
        g.push_back(lo);
        return g;
    }
    for (int i = 0; i < n; ++i)
        g.push_back(lo + (hi - lo) * i / (n - 1));
    g.back() = hi;
    return g;
}

std::vector<double> log_grid(double lo, double hi, int n) {
    std::vector<double> g = lin_grid(std::log(lo), std::log(hi), n);
    for (double& v : g) v = std::exp(v);
    g.front() = lo;
    g.back() = hi;
    return g;
}

std::vector<double> step_grid(double lo, double hi, double step) {
    std::vector<double> g;
    const double slack = 1e-9 * std::max(1.0, std::abs(hi));
    for (int i = 0;; ++i) {
        const double v = lo + step * i;
        if (v > hi + slack) break;
        g.push_back(v);
    }
    return g;
}

std::string join_doubles(const std::vector<double>& v) {
    std::string out;
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (i) out += ' ';
        out += format_double(v[i]);
    }
    return out;
}

std::string join_ints(const std::vector<int>& v) {
    std::string out;
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (i) out += ' ';
        out += std::to_string(v[i]);
    }
    return out;
}

// dB parameters get a linear twin in the metadata so datasets are readable
// without unit conversion.
std::string join_linear(const std::vector<double>& db) {
    std::string out;
    for (std::size_t i = 0; i < db.size(); ++i) {
        if (i) out += ' ';
        out += format_double(db_to_linear(db[i]));
    }
    return out;
}

// All studies fix one symbol per slot, so rates read as bits per symbol.
ChannelSpec interfered(double snr_db, double sinr_db, int n, double perturbation) {
    ScenarioSpec sc;
    sc.avg_snr = db_to_linear(snr_db);
    sc.avg_sinr = db_to_linear(sinr_db);
    sc.n_interferers = n;
    sc.perturbation = perturbation;
    sc.symbols_per_slot = 1.0;
    return scenario_to_channel(sc);
}

ChannelSpec noise_limited(double snr_db) {
    ChannelSpec spec;
    spec.avg_snr = db_to_linear(snr_db);
    spec.symbols_per_slot = 1.0;
    return spec;
}

std::string config_token(const ChannelSpec& spec, double rate, int hops) {
    std::string text = "snr=" + format_double(spec.avg_snr) + ";a=";
    for (std::size_t i = 0; i < spec.interferer_ratios.size(); ++i) {
        if (i) text += ',';
        text += format_double(spec.interferer_ratios[i]);
    }
    text += ";rate=" + format_double(rate) + ";hops=" + std::to_string(hops);
    std::uint64_t h = 1469598103934665603ULL;  // FNV-1a 64
    for (char c : text) {
        h ^= static_cast<unsigned char>(c);
        h *= 1099511628211ULL;
    }
    std::ostringstream os;
    os << std::hex << std::setw(16) << std::setfill('0') << h;
    return os.str();
}

[[noreturn]] void setting_error(const ConfigMap& m, const std::string& msg) {
    throw ConfigError(m.source + ": " + msg);
}

std::vector<int> as_counts(const ConfigMap& m, const std::string& key,
                           const std::vector<double>& raw, int lo, int hi) {
    std::vector<int> out;
    out.reserve(raw.size());
    for (double v : raw) {
        if (!(v >= lo) || !(v <= hi) || v != std::floor(v))
            setting_error(m, key + " entries must be integers in [" +
                                 std::to_string(lo) + ", " + std::to_string(hi) + "]");
        out.push_back(static_cast<int>(v));
    }
    if (out.empty()) setting_error(m, key + " must not be empty");
    return out;
}

void check_db_list(const ConfigMap& m, const std::string& key,
                   const std::vector<double>& v) {
    if (v.empty()) setting_error(m, key + " must not be empty");
    for (double x : v)
        if (!std::isfinite(x)) setting_error(m, key + " entries must be finite");
}

int read_hops(const ConfigMap& m) {
    const long long h = m.get_int("hops", 1);
    if (h < 1 || h > 10000) setting_error(m, "hops must be in [1, 10000]");
    return static_cast<int>(h);
}

double read_perturbation(const ConfigMap& m) {
    const double p = m.get_double("perturbation", 1e-2);
    if (!(p >= 0.0) || !std::isfinite(p))
        setting_error(m, "perturbation must be nonnegative and finite");
    return p;
}

void check_sinr_below_snr(const ConfigMap& m, const std::vector<double>& sinr_db,
                          double snr_db) {
    for (double s : sinr_db)
        if (!(s < snr_db))
            setting_error(m, "sinr_db must stay strictly below snr_db when "
                             "interferers are present");
}

// ---- effective-capacity ----------------------------------------------------

struct EcParams {
    std::vector<double> snr_db;
    double s_min = 0.0;
    double s_max = 0.0;
    int s_points = 0;
};

EcParams read_ec(const ConfigMap& m) {
    EcParams p;
    p.snr_db = m.get_double_list("snr_db", {0.0, 4.0, 8.0, 10.0});
    check_db_list(m, "snr_db", p.snr_db);
    p.s_min = m.get_double("s_min", 0.01);
    p.s_max = m.get_double("s_max", 10.0);
    const long long n = m.get_int("s_points", 41);
    if (!(p.s_min > 0.0) || !std::isfinite(p.s_max) || !(p.s_max >= p.s_min))
        setting_error(m, "need 0 < s_min <= s_max");
    if (n < 1 || n > 100000) setting_error(m, "s_points must be in [1, 100000]");
    p.s_points = static_cast<int>(n);
    return p;
}

CsvDocument run_effective_capacity(const ExperimentConfig& cfg, WarningSink* sink) {
    const EcParams p = read_ec(cfg.settings);
    const std::vector<double> s_grid = log_grid(p.s_min, p.s_max, p.s_points);

    CsvDocument doc;
    doc.meta.emplace_back("kind", kind_name(cfg.kind));
    doc.meta.emplace_back("generator", std::string("ifperf ") + version_string);
    doc.meta.emplace_back("snr_db", join_doubles(p.snr_db));
    doc.meta.emplace_back("snr", join_linear(p.snr_db));
    doc.meta.emplace_back("s_min", format_double(p.s_min));
    doc.meta.emplace_back("s_max", format_double(p.s_max));
    doc.meta.emplace_back("s_points", std::to_string(p.s_points));
    doc.meta.emplace_back("symbols_per_slot", "1");
    doc.meta.emplace_back("capacity_units", "bits per symbol");
    doc.columns = {"channel", "snr_db", "s", "effective_capacity"};

    for (double snr_db : p.snr_db) {
        // equal mean received power: one interferer at unit power ratio
        ChannelSpec one = noise_limited(snr_db);
        one.interferer_ratios = {1.0};
        const std::pair<const char*, ChannelSpec> channels[] = {
            {"noise", noise_limited(snr_db)},
            {"interference", one},
        };
        for (const auto& [label, spec] : channels) {
            for (double s : s_grid) {
                const double ec = effective_capacity(spec, s, {}, sink);
                doc.rows.push_back({label, format_double(snr_db),
                                    format_double(s), format_double(ec)});
            }
        }
    }
    return doc;
}

// ---- delay-vs-epsilon / delay-vs-rate ---------------------------------------

struct SweepScenario {
    double snr_db = 15.0;
    std::vector<double> sinr_db;
    std::vector<int> interferers;
    double perturbation = 1e-2;
    int hops = 1;
};

SweepScenario read_sweep_scenario(const ConfigMap& m) {
    SweepScenario p;
    p.snr_db = m.get_double("snr_db", 15.0);
    if (!std::isfinite(p.snr_db)) setting_error(m, "snr_db must be finite");
    p.sinr_db = m.get_double_list("sinr_db", {0.0, 4.0});
    check_db_list(m, "sinr_db", p.sinr_db);
    check_sinr_below_snr(m, p.sinr_db, p.snr_db);
    p.interferers = as_counts(m, "interferers",
                              m.get_double_list("interferers", {1.0, 5.0}), 1, 1000);
    p.perturbation = read_perturbation(m);
    p.hops = read_hops(m);
    return p;
}

struct DveParams {
    SweepScenario scenario;
    double rate = 0.85;
    double eps_min = 1e-6;
    double eps_max = 0.1;
    int eps_points = 11;
};

DveParams read_dve(const ConfigMap& m) {
    DveParams p;
    p.scenario = read_sweep_scenario(m);
    p.rate = m.get_double("rate", 0.85);
    if (!(p.rate >= 0.0) || !std::isfinite(p.rate))
        setting_error(m, "rate must be nonnegative and finite");
    p.eps_min = m.get_double("epsilon_min", 1e-6);
    p.eps_max = m.get_double("epsilon_max", 0.1);
    const long long n = m.get_int("epsilon_points", 11);
    if (!(p.eps_min > 0.0) || !(p.eps_max >= p.eps_min) || !(p.eps_max < 1.0))
        setting_error(m, "need 0 < epsilon_min <= epsilon_max < 1");
    if (n < 1 || n > 10000) setting_error(m, "epsilon_points must be in [1, 10000]");
    p.eps_points = static_cast<int>(n);
    return p;
}

CsvDocument run_delay_vs_epsilon(const ExperimentConfig& cfg, WarningSink* sink) {
    const DveParams p = read_dve(cfg.settings);
    const SweepScenario& sc = p.scenario;
    // epsilon descending, so delay ascends along each curve
    const std::vector<double> eps = log_grid(p.eps_max, p.eps_min, p.eps_points);

    struct Item {
        double sinr_db;
        int n;
    };
    std::vector<Item> items;
    for (double sinr : sc.sinr_db)
        for (int n : sc.interferers) items.push_back({sinr, n});

    std::vector<std::vector<std::string>> cells(items.size());
    std::vector<WarningSink> locals(items.size());
    run_parallel(cfg.threads, items.size(), [&](std::size_t i) {
        const Item& it = items[i];
        KernelEvaluator ev(interfered(sc.snr_db, it.sinr_db, it.n, sc.perturbation),
                           sc.hops, {}, &locals[i]);
        for (double e : eps) {
            if (!ev.feasible(p.rate)) {
                cells[i].push_back("unstable");
                continue;
            }
            cells[i].push_back(std::to_string(ev.delay_bound(p.rate, e)));
        }
    });
    merge_warnings(locals, sink);

    CsvDocument doc;
    doc.meta.emplace_back("kind", kind_name(cfg.kind));
    doc.meta.emplace_back("generator", std::string("ifperf ") + version_string);
    doc.meta.emplace_back("snr_db", format_double(sc.snr_db));
    doc.meta.emplace_back("snr", format_double(db_to_linear(sc.snr_db)));
    doc.meta.emplace_back("sinr_db", join_doubles(sc.sinr_db));
    doc.meta.emplace_back("sinr", join_linear(sc.sinr_db));
    doc.meta.emplace_back("interferers", join_ints(sc.interferers));
    doc.meta.emplace_back("rate", format_double(p.rate));
    doc.meta.emplace_back("hops", std::to_string(sc.hops));
    doc.meta.emplace_back("perturbation", format_double(sc.perturbation));
    doc.meta.emplace_back("symbols_per_slot", "1");
    doc.meta.emplace_back("rate_units", "bits per symbol");
    doc.columns = {"sinr_db", "interferers", "rate", "epsilon", "delay_slots"};
    for (std::size_t i = 0; i < items.size(); ++i)
        for (std::size_t j = 0; j < eps.size(); ++j)
            doc.rows.push_back({format_double(items[i].sinr_db),
                                std::to_string(items[i].n), format_double(p.rate),
                                format_double(eps[j]), cells[i][j]});
    return doc;
}

struct DvrParams {
    SweepScenario scenario;
    double epsilon = 1e-6;
    double rate_min = 0.2;
    double rate_max = 3.0;
    int rate_points = 15;
};

DvrParams read_dvr(const ConfigMap& m) {
    DvrParams p;
    p.scenario = read_sweep_scenario(m);
    p.epsilon = m.get_double("epsilon", 1e-6);
    if (!(p.epsilon > 0.0) || !(p.epsilon < 1.0))
        setting_error(m, "epsilon must lie in (0, 1)");
    p.rate_min = m.get_double("rate_min", 0.2);
    p.rate_max = m.get_double("rate_max", 3.0);
    const long long n = m.get_int("rate_points", 15);
    if (!(p.rate_min >= 0.0) || !std::isfinite(p.rate_max) ||
        !(p.rate_max >= p.rate_min))
        setting_error(m, "need 0 <= rate_min <= rate_max");
    if (n < 1 || n > 100000) setting_error(m, "rate_points must be in [1, 100000]");
    p.rate_points = static_cast<int>(n);
    return p;
}

CsvDocument run_delay_vs_rate(const ExperimentConfig& cfg, WarningSink* sink) {
    const DvrParams p = read_dvr(cfg.settings);
    const SweepScenario& sc = p.scenario;
    const std::vector<double> rates = lin_grid(p.rate_min, p.rate_max, p.rate_points);

    struct Item {
        double sinr_db;
        int n;
    };
    std::vector<Item> items;
    for (double sinr : sc.sinr_db)
        for (int n : sc.interferers) items.push_back({sinr, n});

    std::vector<std::vector<std::string>> cells(items.size());
    std::vector<WarningSink> locals(items.size());
    run_parallel(cfg.threads, items.size(), [&](std::size_t i) {
        const Item& it = items[i];
        KernelEvaluator ev(interfered(sc.snr_db, it.sinr_db, it.n, sc.perturbation),
                           sc.hops, {}, &locals[i]);
        for (double rate : rates) {
            if (!ev.feasible(rate)) {
                cells[i].push_back("unstable");
                continue;
            }
            cells[i].push_back(std::to_string(ev.delay_bound(rate, p.epsilon)));
        }
    });
    merge_warnings(locals, sink);

    CsvDocument doc;
    doc.meta.emplace_back("kind", kind_name(cfg.kind));
    doc.meta.emplace_back("generator", std::string("ifperf ") + version_string);
    doc.meta.emplace_back("snr_db", format_double(sc.snr_db));
    doc.meta.emplace_back("snr", format_double(db_to_linear(sc.snr_db)));
    doc.meta.emplace_back("sinr_db", join_doubles(sc.sinr_db));
    doc.meta.emplace_back("sinr", join_linear(sc.sinr_db));
    doc.meta.emplace_back("interferers", join_ints(sc.interferers));
    doc.meta.emplace_back("epsilon", format_double(p.epsilon));
    doc.meta.emplace_back("hops", std::to_string(sc.hops));
    doc.meta.emplace_back("perturbation", format_double(sc.perturbation));
    doc.meta.emplace_back("symbols_per_slot", "1");
    doc.meta.emplace_back("rate_units", "bits per symbol");
    doc.columns = {"sinr_db", "interferers", "epsilon", "rate", "delay_slots"};
    for (std::size_t i = 0; i < items.size(); ++i)
        for (std::size_t j = 0; j < rates.size(); ++j)
            doc.rows.push_back({format_double(items[i].sinr_db),
                                std::to_string(items[i].n), format_double(p.epsilon),
                                format_double(rates[j]), cells[i][j]});
    return doc;
}

// ---- delay-vs-interferers ----------------------------------------------------

struct DviParams {
    double snr_db = 15.0;
    double sinr_db = 8.0;
    double epsilon = 1e-6;
    std::vector<double> rates;
    int max_interferers = 8;
    double perturbation = 1e-2;
    int hops = 1;
};

DviParams read_dvi(const ConfigMap& m) {
    DviParams p;
    p.snr_db = m.get_double("snr_db", 15.0);
    p.sinr_db = m.get_double("sinr_db", 8.0);
    if (!std::isfinite(p.snr_db) || !std::isfinite(p.sinr_db))
        setting_error(m, "snr_db and sinr_db must be finite");
    check_sinr_below_snr(m, {p.sinr_db}, p.snr_db);
    p.epsilon = m.get_double("epsilon", 1e-6);
    if (!(p.epsilon > 0.0) || !(p.epsilon < 1.0))
        setting_error(m, "epsilon must lie in (0, 1)");
    p.rates = m.get_double_list("rates", {1.8, 2.0, 2.2});
    if (p.rates.empty()) setting_error(m, "rates must not be empty");
    for (double r : p.rates)
        if (!(r >= 0.0) || !std::isfinite(r))
            setting_error(m, "rates entries must be nonnegative and finite");
    const long long n = m.get_int("max_interferers", 8);
    if (n < 1 || n > 1000) setting_error(m, "max_interferers must be in [1, 1000]");
    p.max_interferers = static_cast<int>(n);
    p.perturbation = read_perturbation(m);
    p.hops = read_hops(m);
    return p;
}

CsvDocument run_delay_vs_interferers(const ExperimentConfig& cfg, WarningSink* sink) {
    const DviParams p = read_dvi(cfg.settings);

    // items: 1..max interferers at fixed SINR, then the reference channel
    // with the whole interference budget folded into the noise floor
    const std::size_t n_items = static_cast<std::size_t>(p.max_interferers) + 1;
    std::vector<std::vector<std::string>> cells(n_items);
    std::vector<WarningSink> locals(n_items);
    run_parallel(cfg.threads, n_items, [&](std::size_t i) {
        const bool reference = i + 1 == n_items;
        const ChannelSpec spec = reference
            ? noise_limited(p.sinr_db)
            : interfered(p.snr_db, p.sinr_db, static_cast<int>(i) + 1,
                         p.perturbation);
        KernelEvaluator ev(spec, p.hops, {}, &locals[i]);
        for (double rate : p.rates) {
            if (!ev.feasible(rate)) {
                cells[i].push_back("unstable");
                continue;
            }
            cells[i].push_back(std::to_string(ev.delay_bound(rate, p.epsilon)));
        }
    });
    merge_warnings(locals, sink);

    CsvDocument doc;
    doc.meta.emplace_back("kind", kind_name(cfg.kind));
    doc.meta.emplace_back("generator", std::string("ifperf ") + version_string);
    doc.meta.emplace_back("snr_db", format_double(p.snr_db));
    doc.meta.emplace_back("snr", format_double(db_to_linear(p.snr_db)));
    doc.meta.emplace_back("sinr_db", format_double(p.sinr_db));
    doc.meta.emplace_back("sinr", format_double(db_to_linear(p.sinr_db)));
    doc.meta.emplace_back("epsilon", format_double(p.epsilon));
    doc.meta.emplace_back("rates", join_doubles(p.rates));
    doc.meta.emplace_back("max_interferers", std::to_string(p.max_interferers));
    doc.meta.emplace_back("reference_snr_db", format_double(p.sinr_db));
    doc.meta.emplace_back("reference_snr", format_double(db_to_linear(p.sinr_db)));
    doc.meta.emplace_back("hops", std::to_string(p.hops));
    doc.meta.emplace_back("perturbation", format_double(p.perturbation));
    doc.meta.emplace_back("symbols_per_slot", "1");
    doc.meta.emplace_back("rate_units", "bits per symbol");
    doc.columns = {"rate", "channel", "interferers", "delay_slots"};
    for (std::size_t j = 0; j < p.rates.size(); ++j) {
        for (int n = 1; n <= p.max_interferers; ++n)
            doc.rows.push_back({format_double(p.rates[j]), "interference",
                                std::to_string(n),
                                cells[static_cast<std::size_t>(n) - 1][j]});
        doc.rows.push_back({format_double(p.rates[j]), "noise", "0",
                            cells[n_items - 1][j]});
    }
    return doc;
}

// ---- maxrate-vs-snr / avgcap-vs-snr ------------------------------------------

struct SnrSweep {
    double snr_db_min = 10.0;
    double snr_db_max = 24.0;
    double snr_db_step = 2.0;
    std::vector<double> sinr_db;
    std::vector<int> interferers;
    double perturbation = 1e-2;
};

SnrSweep read_snr_sweep(const ConfigMap& m) {
    SnrSweep p;
    p.snr_db_min = m.get_double("snr_db_min", 10.0);
    p.snr_db_max = m.get_double("snr_db_max", 24.0);
    p.snr_db_step = m.get_double("snr_db_step", 2.0);
    if (!std::isfinite(p.snr_db_min) || !std::isfinite(p.snr_db_max) ||
        !(p.snr_db_step > 0.0) || !(p.snr_db_max >= p.snr_db_min))
        setting_error(m, "need snr_db_min <= snr_db_max and snr_db_step > 0");
    if ((p.snr_db_max - p.snr_db_min) / p.snr_db_step > 100000)
        setting_error(m, "snr_db sweep has too many points");
    p.sinr_db = m.get_double_list("sinr_db", {8.0, 9.0});
    check_db_list(m, "sinr_db", p.sinr_db);
    check_sinr_below_snr(m, p.sinr_db, p.snr_db_min);
    p.interferers = as_counts(m, "interferers",
                              m.get_double_list("interferers", {1.0, 3.0, 8.0}),
                              1, 1000);
    p.perturbation = read_perturbation(m);
    return p;
}

struct MrParams {
    SnrSweep sweep;
    double epsilon = 1e-6;
    int delay_target = 10;
    int hops = 1;
};

MrParams read_mr(const ConfigMap& m) {
    MrParams p;
    p.sweep = read_snr_sweep(m);
    p.epsilon = m.get_double("epsilon", 1e-6);
    if (!(p.epsilon > 0.0) || !(p.epsilon < 1.0))
        setting_error(m, "epsilon must lie in (0, 1)");
    const long long w = m.get_int("delay_target", 10);
    if (w < 0 || w > 1000000) setting_error(m, "delay_target must be in [0, 1000000]");
    p.delay_target = static_cast<int>(w);
    p.hops = read_hops(m);
    return p;
}

CsvDocument run_maxrate_vs_snr(const ExperimentConfig& cfg, WarningSink* sink) {
    const MrParams p = read_mr(cfg.settings);
    const SnrSweep& sw = p.sweep;
    const std::vector<double> snrs =
        step_grid(sw.snr_db_min, sw.snr_db_max, sw.snr_db_step);

    struct Item {
        double sinr_db;
        int n;
        double snr_db;
    };
    std::vector<Item> items;
    for (double sinr : sw.sinr_db)
        for (int n : sw.interferers)
            for (double snr : snrs) items.push_back({sinr, n, snr});

    struct Result {
        double max_rate = 0.0;
        double avg_cap = 0.0;
    };
    std::vector<Result> results(items.size());
    std::vector<WarningSink> locals(items.size());
    run_parallel(cfg.threads, items.size(), [&](std::size_t i) {
        const Item& it = items[i];
        const ChannelSpec spec =
            interfered(it.snr_db, it.sinr_db, it.n, sw.perturbation);
        KernelEvaluator ev(spec, p.hops, {}, &locals[i]);
        results[i].max_rate = ev.max_rate(p.delay_target, p.epsilon);
        results[i].avg_cap = average_capacity(spec);
    });
    merge_warnings(locals, sink);

    CsvDocument doc;
    doc.meta.emplace_back("kind", kind_name(cfg.kind));
    doc.meta.emplace_back("generator", std::string("ifperf ") + version_string);
    doc.meta.emplace_back("snr_db_min", format_double(sw.snr_db_min));
    doc.meta.emplace_back("snr_db_max", format_double(sw.snr_db_max));
    doc.meta.emplace_back("snr_db_step", format_double(sw.snr_db_step));
    doc.meta.emplace_back("snr_min", format_double(db_to_linear(sw.snr_db_min)));
    doc.meta.emplace_back("snr_max", format_double(db_to_linear(sw.snr_db_max)));
    doc.meta.emplace_back("sinr_db", join_doubles(sw.sinr_db));
    doc.meta.emplace_back("sinr", join_linear(sw.sinr_db));
    doc.meta.emplace_back("interferers", join_ints(sw.interferers));
    doc.meta.emplace_back("epsilon", format_double(p.epsilon));
    doc.meta.emplace_back("delay_target", std::to_string(p.delay_target));
    doc.meta.emplace_back("hops", std::to_string(p.hops));
    doc.meta.emplace_back("perturbation", format_double(sw.perturbation));
    doc.meta.emplace_back("symbols_per_slot", "1");
    doc.meta.emplace_back("rate_units", "bits per symbol");
    doc.columns = {"sinr_db", "interferers", "snr_db", "max_rate", "avg_capacity"};
    for (std::size_t i = 0; i < items.size(); ++i)
        doc.rows.push_back({format_double(items[i].sinr_db),
                            std::to_string(items[i].n),
                            format_double(items[i].snr_db),
                            format_double(results[i].max_rate),
                            format_double(results[i].avg_cap)});
    return doc;
}

CsvDocument run_avgcap_vs_snr(const ExperimentConfig& cfg, WarningSink* sink) {
    (void)sink;  // pure quadrature, nothing to warn about
    const SnrSweep sw = read_snr_sweep(cfg.settings);
    const std::vector<double> snrs =
        step_grid(sw.snr_db_min, sw.snr_db_max, sw.snr_db_step);

    CsvDocument doc;
    doc.meta.emplace_back("kind", kind_name(cfg.kind));
    doc.meta.emplace_back("generator", std::string("ifperf ") + version_string);
    doc.meta.emplace_back("snr_db_min", format_double(sw.snr_db_min));
    doc.meta.emplace_back("snr_db_max", format_double(sw.snr_db_max));
    doc.meta.emplace_back("snr_db_step", format_double(sw.snr_db_step));
    doc.meta.emplace_back("snr_min", format_double(db_to_linear(sw.snr_db_min)));
    doc.meta.emplace_back("snr_max", format_double(db_to_linear(sw.snr_db_max)));
    doc.meta.emplace_back("sinr_db", join_doubles(sw.sinr_db));
    doc.meta.emplace_back("sinr", join_linear(sw.sinr_db));
    doc.meta.emplace_back("interferers", join_ints(sw.interferers));
    doc.meta.emplace_back("perturbation", format_double(sw.perturbation));
    doc.meta.emplace_back("symbols_per_slot", "1");
    doc.meta.emplace_back("rate_units", "bits per symbol");
    doc.columns = {"sinr_db", "interferers", "snr_db", "avg_capacity"};
    for (double sinr : sw.sinr_db)
        for (int n : sw.interferers)
            for (double snr : snrs) {
                const double cap =
                    average_capacity(interfered(snr, sinr, n, sw.perturbation));
                doc.rows.push_back({format_double(sinr), std::to_string(n),
                                    format_double(snr), format_double(cap)});
            }
    return doc;
}

// ---- validate -----------------------------------------------------------------

struct ValParams {
    SweepScenario scenario;
    double rate = 0.85;
    std::vector<int> delays;
};

ValParams read_val(const ConfigMap& m) {
    ValParams p;
    p.scenario = read_sweep_scenario(m);
    p.rate = m.get_double("rate", 0.85);
    if (!(p.rate >= 0.0) || !std::isfinite(p.rate))
        setting_error(m, "rate must be nonnegative and finite");
    const std::vector<double> raw = m.get_double_list(
        "delays", {1, 2, 3, 4, 5, 6, 8, 10, 12, 15, 20, 25, 30, 40, 50});
    p.delays = as_counts(m, "delays", raw, 0, 1000000);
    for (std::size_t i = 1; i < p.delays.size(); ++i)
        if (p.delays[i] <= p.delays[i - 1])
            setting_error(m, "delays must be strictly increasing");
    return p;
}

CsvDocument run_validate(const ExperimentConfig& cfg, WarningSink* sink) {
    const ValParams p = read_val(cfg.settings);
    const SweepScenario& sc = p.scenario;

    struct Item {
        double sinr_db;
        int n;
    };
    std::vector<Item> items;
    for (double sinr : sc.sinr_db)
        for (int n : sc.interferers) items.push_back({sinr, n});

    struct Result {
        std::string token;
        double utilization = 0.0;
        double slope = 0.0;
        std::vector<double> analytic;
        SimOutcome sim;
    };
    std::vector<Result> results(items.size());
    std::vector<WarningSink> locals(items.size());
    run_parallel(cfg.threads, items.size(), [&](std::size_t i) {
        const Item& it = items[i];
        const ChannelSpec spec =
            interfered(sc.snr_db, it.sinr_db, it.n, sc.perturbation);
        Result& r = results[i];
        r.token = config_token(spec, p.rate, sc.hops);
        r.utilization = p.rate / average_capacity(spec);
        KernelEvaluator ev(spec, sc.hops, {}, &locals[i]);
        // per-slot decay of the bound at the deepest configured delay
        r.slope = ev.log_service_mellin(ev.optimal_s(p.rate, p.delays.back()));
        r.analytic.reserve(p.delays.size());
        for (int w : p.delays)
            r.analytic.push_back(ev.violation_probability(p.rate, w));

        SimConfig sim;
        sim.spec = spec;
        sim.arrivals.rate = p.rate;
        sim.slots = cfg.slots;
        sim.seed = derive_stream_seed(cfg.seed, static_cast<std::uint64_t>(i));
        sim.delay_grid = p.delays;
        sim.hops = sc.hops;
        r.sim = run_queue(sim);
    });
    merge_warnings(locals, sink);

    CsvDocument doc;
    doc.meta.emplace_back("kind", kind_name(cfg.kind));
    doc.meta.emplace_back("generator", std::string("ifperf ") + version_string);
    doc.meta.emplace_back("seed", std::to_string(cfg.seed));
    doc.meta.emplace_back("slots", std::to_string(cfg.slots));
    doc.meta.emplace_back("snr_db", format_double(sc.snr_db));
    doc.meta.emplace_back("snr", format_double(db_to_linear(sc.snr_db)));
    doc.meta.emplace_back("sinr_db", join_doubles(sc.sinr_db));
    doc.meta.emplace_back("sinr", join_linear(sc.sinr_db));
    doc.meta.emplace_back("interferers", join_ints(sc.interferers));
    doc.meta.emplace_back("rate", format_double(p.rate));
    doc.meta.emplace_back("hops", std::to_string(sc.hops));
    doc.meta.emplace_back("perturbation", format_double(sc.perturbation));
    doc.meta.emplace_back("symbols_per_slot", "1");
    doc.meta.emplace_back("rate_units", "bits per symbol");
    doc.columns = {"config", "sinr_db", "interferers", "rate", "utilization",
                   "delay_slots", "analytic_epsilon", "analytic_slope",
                   "empirical_freq", "ccdf_upper_99", "violations", "slots"};
    for (std::size_t i = 0; i < items.size(); ++i) {
        const Result& r = results[i];
        for (std::size_t j = 0; j < p.delays.size(); ++j)
            doc.rows.push_back({r.token, format_double(items[i].sinr_db),
                                std::to_string(items[i].n), format_double(p.rate),
                                format_double(r.utilization),
                                std::to_string(p.delays[j]),
                                format_double(r.analytic[j]),
                                format_double(r.slope),
                                format_double(r.sim.violation_freq[j]),
                                format_double(r.sim.ccdf_upper_99[j]),
                                std::to_string(r.sim.violation_count[j]),
                                std::to_string(r.sim.slots_run)});
    }
    return doc;
}

std::vector<std::string> known_keys(ExperimentKind kind) {
    std::vector<std::string> keys = {"kind", "seed", "slots", "threads"};
    auto add = [&keys](std::initializer_list<const char*> more) {
        for (const char* k : more) keys.emplace_back(k);
    };
    switch (kind) {
        case ExperimentKind::EffectiveCapacity:
            add({"snr_db", "s_min", "s_max", "s_points"});
            break;
        case ExperimentKind::DelayVsEpsilon:
            add({"snr_db", "sinr_db", "interferers", "rate", "epsilon_min",
                 "epsilon_max", "epsilon_points", "perturbation", "hops"});
            break;
        case ExperimentKind::DelayVsRate:
            add({"snr_db", "sinr_db", "interferers", "epsilon", "rate_min",
                 "rate_max", "rate_points", "perturbation", "hops"});
            break;
        case ExperimentKind::DelayVsInterferers:
            add({"snr_db", "sinr_db", "epsilon", "rates", "max_interferers",
                 "perturbation", "hops"});
            break;
        case ExperimentKind::MaxRateVsSnr:
            add({"snr_db_min", "snr_db_max", "snr_db_step", "sinr_db",
                 "interferers", "epsilon", "delay_target", "perturbation",
                 "hops"});
            break;
        case ExperimentKind::AvgCapVsSnr:
            add({"snr_db_min", "snr_db_max", "snr_db_step", "sinr_db",
                 "interferers", "perturbation"});
            break;
        case ExperimentKind::Validate:
            add({"snr_db", "sinr_db", "interferers", "rate", "delays",
                 "perturbation", "hops"});
            break;
    }
    return keys;
}

void read_settings(ExperimentKind kind, const ConfigMap& m) {
    switch (kind) {
        case ExperimentKind::EffectiveCapacity: read_ec(m); break;
        case ExperimentKind::DelayVsEpsilon: read_dve(m); break;
        case ExperimentKind::DelayVsRate: read_dvr(m); break;
        case ExperimentKind::DelayVsInterferers: read_dvi(m); break;
        case ExperimentKind::MaxRateVsSnr: read_mr(m); break;
        case ExperimentKind::AvgCapVsSnr: read_snr_sweep(m); break;
        case ExperimentKind::Validate: read_val(m); break;
    }
}

} // namespace

const char* kind_name(ExperimentKind kind) {
    for (const KindRow& row : kKinds)
        if (row.kind == kind) return row.name;
    throw std::invalid_argument("unknown experiment kind");
}

ExperimentKind kind_from_name(const std::string& name) {
    for (const KindRow& row : kKinds)
        if (name == row.name) return row.kind;
    std::string names;
    for (const KindRow& row : kKinds) {
        if (!names.empty()) names += ", ";
        names += row.name;
    }
    throw ConfigError("unknown experiment '" + name + "' (expected one of: " +
                      names + ")");
}

std::vector<ExperimentKind> all_experiment_kinds() {
    std::vector<ExperimentKind> kinds;
    for (const KindRow& row : kKinds) kinds.push_back(row.kind);
    return kinds;
}

void ExperimentConfig::validate() const {
    if (slots < 1 || slots > (1LL << 40))
        throw ConfigError(settings.source + ": slots must be in [1, 2^40]");
    if (threads < 0 || threads > 1024)
        throw ConfigError(settings.source + ": threads must be in [0, 1024]");
    const std::vector<std::string> unknown = settings.unknown_keys(known_keys(kind));
    if (!unknown.empty()) {
        std::string joined;
        for (const std::string& k : unknown) {
            if (!joined.empty()) joined += ", ";
            joined += k;
        }
        throw ConfigError(settings.source + ": unknown setting(s) for " +
                          kind_name(kind) + ": " + joined);
    }
    read_settings(kind, settings);
}

ExperimentConfig default_config(ExperimentKind kind) {
    ExperimentConfig cfg;
    cfg.kind = kind;
    return cfg;
}

ExperimentConfig config_from_text(const std::string& text,
                                  const std::string& source_name,
                                  const std::string& fallback_kind) {
    ConfigMap m = parse_config_text(text, source_name);
    const std::string name = m.get_string("kind", fallback_kind);
    if (name.empty())
        throw ConfigError(source_name + ": missing 'kind'");
    if (!fallback_kind.empty() && name != fallback_kind)
        throw ConfigError(source_name + ": kind '" + name +
                          "' does not match the requested experiment '" +
                          fallback_kind + "'");
    ExperimentConfig cfg;
    cfg.kind = kind_from_name(name);
    const long long seed = m.get_int("seed", static_cast<long long>(cfg.seed));
    if (seed < 0)
        throw ConfigError(source_name + ": seed must be nonnegative");
    cfg.seed = static_cast<std::uint64_t>(seed);
    cfg.slots = m.get_int("slots", cfg.slots);
    const long long threads = m.get_int("threads", cfg.threads);
    if (threads < 0 || threads > 1024)
        throw ConfigError(source_name + ": threads must be in [0, 1024]");
    cfg.threads = static_cast<int>(threads);
    cfg.settings = std::move(m);
    cfg.validate();
    return cfg;
}

CsvDocument run_experiment(const ExperimentConfig& config, WarningSink* sink) {
    config.validate();
    switch (config.kind) {
        case ExperimentKind::EffectiveCapacity:
            return run_effective_capacity(config, sink);
        case ExperimentKind::DelayVsEpsilon:
            return run_delay_vs_epsilon(config, sink);
        case ExperimentKind::DelayVsRate:
            return run_delay_vs_rate(config, sink);
        case ExperimentKind::DelayVsInterferers:
            return run_delay_vs_interferers(config, sink);
        case ExperimentKind::MaxRateVsSnr:
            return run_maxrate_vs_snr(config, sink);
        case ExperimentKind::AvgCapVsSnr:
            return run_avgcap_vs_snr(config, sink);
        case ExperimentKind::Validate:
            return run_validate(config, sink);
    }
    throw std::invalid_argument("unknown experiment kind");
}

bool CheckReport::all_passed() const {
    for (const CheckItem& item : items)
        if (!item.passed) return false;
    return true;
}

std::string CheckReport::to_text() const {
    std::string out;
    for (const CheckItem& item : items) {
        out += item.passed ? "[PASS] " : "[FAIL] ";
        out += item.description;
        if (!item.detail.empty()) {
            out += " (";
            out += item.detail;
            out += ')';
        }
        out += '\n';
    }
    return out;
}

} // namespace ifperf
