#include <CLI11.hpp>

#include <ifperf/errors.hpp>
#include <ifperf/experiments.hpp>
#include <ifperf/version.hpp>

#include <cstdint>
#include <fstream>
#include <iostream>
#include <map>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

using namespace ifperf;

namespace {

struct RunOpts {
    std::string config_path;
    std::string out_path;
    std::uint64_t seed = 0;
    long long slots = 0;
    int threads = 0;
    bool seed_set = false;
    bool slots_set = false;
    bool threads_set = false;
};

std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot open config file '" + path + "'");
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

// identical messages collapse into one line with a count
void print_warnings(const WarningSink& sink) {
    std::vector<std::pair<std::string, int>> seen;
    for (const Warning& w : sink.warnings()) {
        bool found = false;
        for (auto& [msg, count] : seen)
            if (msg == w.message) {
                ++count;
                found = true;
            }
        if (!found) seen.push_back({w.message, 1});
    }
    for (const auto& [msg, count] : seen) {
        std::cerr << "warning: " << msg;
        if (count > 1) std::cerr << " (x" << count << ")";
        std::cerr << '\n';
    }
}

int run_kind(ExperimentKind kind, const RunOpts& opts) {
    ExperimentConfig cfg = opts.config_path.empty()
        ? default_config(kind)
        : config_from_text(slurp(opts.config_path), opts.config_path,
                           kind_name(kind));
    if (opts.seed_set) cfg.seed = opts.seed;
    if (opts.slots_set) cfg.slots = opts.slots;
    if (opts.threads_set) cfg.threads = opts.threads;

    WarningSink sink;
    const CsvDocument doc = run_experiment(cfg, &sink);
    print_warnings(sink);

    const std::string out =
        opts.out_path.empty() ? std::string(kind_name(kind)) + ".csv"
                              : opts.out_path;
    csv_write_file(doc, out);
    std::cout << "wrote " << out << " (" << doc.rows.size() << " rows)\n";
    return 0;
}

int run_check(const std::string& path) {
    const CheckReport report = check_reproduction(csv_read_file(path));
    std::cout << path << ": " << report.kind << '\n' << report.to_text();
    return report.all_passed() ? 0 : 1;
}

const char* kind_blurb(ExperimentKind kind) {
    switch (kind) {
        case ExperimentKind::EffectiveCapacity:
            return "Transform-domain capacity against the QoS decay exponent, "
                   "with and without an equal-power interferer";
        case ExperimentKind::DelayVsEpsilon:
            return "Delay bound against the violation target for a set of "
                   "interference scenarios";
        case ExperimentKind::DelayVsRate:
            return "Delay bound against the arrival rate, marking the "
                   "infeasible region";
        case ExperimentKind::DelayVsInterferers:
            return "Delay bound against the interferer count at fixed total "
                   "interference, with an equal-power noise reference";
        case ExperimentKind::MaxRateVsSnr:
            return "Largest arrival rate meeting a delay target, swept over "
                   "the mean SNR";
        case ExperimentKind::AvgCapVsSnr:
            return "Average capacity swept over the mean SNR at fixed SINR";
        case ExperimentKind::Validate:
            return "Analytic delay bounds next to seeded queue simulations of "
                   "the same scenarios";
    }
    return "";
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Delay and rate studies for fading channels under "
                 "interference"};
    app.set_version_flag("--version", version_string);
    app.require_subcommand(1);

    std::map<ExperimentKind, std::shared_ptr<RunOpts>> opts;
    int exit_code = 0;
    for (ExperimentKind kind : all_experiment_kinds()) {
        auto o = std::make_shared<RunOpts>();
        opts[kind] = o;
        CLI::App* sub = app.add_subcommand(kind_name(kind), kind_blurb(kind));
        sub->add_option("--config", o->config_path,
                        "Experiment config file (key = value lines)")
            ->check(CLI::ExistingFile);
        sub->add_option("--out", o->out_path,
                        "Output CSV path (default: <kind>.csv)");
        sub->add_option("--seed", o->seed, "Master seed for simulated columns")
            ->each([o](const std::string&) { o->seed_set = true; });
        sub->add_option("--slots", o->slots, "Simulated slots per scenario")
            ->each([o](const std::string&) { o->slots_set = true; });
        sub->add_option("--threads", o->threads,
                        "Worker threads (0: hardware count)")
            ->each([o](const std::string&) { o->threads_set = true; });
        sub->callback([kind, o, &exit_code] { exit_code = run_kind(kind, *o); });
    }

    std::string check_path;
    CLI::App* check = app.add_subcommand(
        "check", "Re-derive a dataset's qualitative claims and report "
                 "pass/fail per claim");
    check->add_option("csv", check_path, "Dataset produced by this tool")
        ->required()
        ->check(CLI::ExistingFile);
    check->callback([&] { exit_code = run_check(check_path); });

    try {
        CLI11_PARSE(app, argc, argv);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    }
    return exit_code;
}
