#include <ifperf/experiments.hpp>

#include <ifperf/errors.hpp>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <map>
#include <string>
#include <utility>
#include <vector>

namespace ifperf {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double cell_num(const CsvDocument& d, std::size_t row, std::size_t col) {
    const std::string& cell = d.rows[row][col];
    try {
        std::size_t used = 0;
        const double v = std::stod(cell, &used);
        if (used != cell.size()) throw std::invalid_argument(cell);
        return v;
    } catch (const std::exception&) {
        throw ConfigError("row " + std::to_string(row + 1) + ", column '" +
                          d.columns[col] + "': expected a number, got '" +
                          cell + "'");
    }
}

// delay columns may carry the infeasible marker
double delay_num(const CsvDocument& d, std::size_t row, std::size_t col) {
    if (d.rows[row][col] == "unstable") return kInf;
    return cell_num(d, row, col);
}

std::string fmt(double v) { return format_double(v); }

// row indices grouped by the named key columns, first appearance order
std::vector<std::pair<std::vector<std::string>, std::vector<std::size_t>>>
group_rows(const CsvDocument& d, const std::vector<std::size_t>& key_cols) {
    std::vector<std::pair<std::vector<std::string>, std::vector<std::size_t>>> groups;
    std::map<std::string, std::size_t> index;
    for (std::size_t r = 0; r < d.rows.size(); ++r) {
        std::string token;
        std::vector<std::string> key;
        for (std::size_t c : key_cols) {
            token += d.rows[r][c];
            token += '\x1f';
            key.push_back(d.rows[r][c]);
        }
        auto [it, fresh] = index.emplace(token, groups.size());
        if (fresh) groups.push_back({std::move(key), {}});
        groups[it->second].second.push_back(r);
    }
    return groups;
}

void sort_by_column(const CsvDocument& d, std::vector<std::size_t>& rows,
                    std::size_t col, bool ascending = true) {
    std::stable_sort(rows.begin(), rows.end(),
                     [&](std::size_t a, std::size_t b) {
                         const double va = cell_num(d, a, col);
                         const double vb = cell_num(d, b, col);
                         return ascending ? va < vb : va > vb;
                     });
}

CheckItem make_item(std::string description, bool passed, std::string detail) {
    CheckItem item;
    item.description = std::move(description);
    item.passed = passed;
    item.detail = std::move(detail);
    return item;
}

// ---- effective-capacity ----------------------------------------------------

std::vector<CheckItem> check_effective_capacity(const CsvDocument& d) {
    const std::size_t c_channel = d.column_index("channel");
    const std::size_t c_snr = d.column_index("snr_db");
    const std::size_t c_s = d.column_index("s");
    const std::size_t c_ec = d.column_index("effective_capacity");
    std::vector<CheckItem> items;

    auto curves = group_rows(d, {c_channel, c_snr});
    double worst_rise = -kInf;
    for (auto& [key, rows] : curves) {
        sort_by_column(d, rows, c_s);
        for (std::size_t i = 1; i < rows.size(); ++i)
            worst_rise = std::max(worst_rise, cell_num(d, rows[i], c_ec) -
                                                  cell_num(d, rows[i - 1], c_ec));
    }
    items.push_back(make_item(
        "capacity is nonincreasing in the decay exponent on every curve",
        worst_rise <= 1e-9,
        std::to_string(curves.size()) + " curves, largest rise " + fmt(worst_rise)));

    // pair rows across channels at identical (snr_db, s) grid cells
    std::map<std::string, std::pair<double, double>> paired;
    for (std::size_t r = 0; r < d.rows.size(); ++r) {
        const std::string key = d.rows[r][c_snr] + '\x1f' + d.rows[r][c_s];
        auto [it, fresh] = paired.emplace(key, std::make_pair(kInf, -kInf));
        (void)fresh;
        if (d.rows[r][c_channel] == "noise")
            it->second.first = cell_num(d, r, c_ec);
        else
            it->second.second = cell_num(d, r, c_ec);
    }
    double worst_margin = kInf;
    for (const auto& [key, pair] : paired)
        worst_margin = std::min(worst_margin, pair.first - pair.second);
    items.push_back(make_item(
        "interference never raises the capacity at any operating point",
        worst_margin >= -1e-12,
        std::to_string(paired.size()) + " points, smallest noise margin " +
            fmt(worst_margin)));

    // gap between the channels must widen with SNR; restrict to exponents
    // below one, where the gap has not yet flattened into its tail
    std::map<std::string, std::map<double, double>> gap_by_s;
    for (const auto& [key, pair] : paired) {
        const std::size_t cut = key.find('\x1f');
        const double s = std::stod(key.substr(cut + 1));
        if (s > 1.0 + 1e-12) continue;
        gap_by_s[key.substr(cut + 1)][std::stod(key.substr(0, cut))] =
            pair.first - pair.second;
    }
    double worst_shrink = -kInf;
    for (const auto& [s_cell, by_snr] : gap_by_s) {
        double prev = -kInf;
        for (const auto& [snr, gap] : by_snr) {
            if (prev != -kInf) worst_shrink = std::max(worst_shrink, prev - gap);
            prev = gap;
        }
    }
    items.push_back(make_item(
        "the interference penalty widens with SNR for decay exponents up to 1",
        worst_shrink <= 1e-9, "largest shrink " + fmt(worst_shrink)));
    return items;
}

// ---- shared delay-curve pieces ----------------------------------------------

struct DelayCurve {
    double sinr_db = 0.0;
    int interferers = 0;
    std::vector<std::size_t> rows;
};

// dominance: weaker SINR or more interferers never shrinks the delay bound
CheckItem dominance_item(const CsvDocument& d,
                         const std::vector<DelayCurve>& curves,
                         std::size_t c_x, std::size_t c_w) {
    long long checked = 0;
    long long broken = 0;
    for (const DelayCurve& strong : curves) {
        for (const DelayCurve& weak : curves) {
            const bool comparable = weak.sinr_db <= strong.sinr_db &&
                                    weak.interferers >= strong.interferers;
            const bool same = weak.sinr_db == strong.sinr_db &&
                              weak.interferers == strong.interferers;
            if (!comparable || same) continue;
            std::map<std::string, double> strong_at;
            for (std::size_t r : strong.rows)
                strong_at[d.rows[r][c_x]] = delay_num(d, r, c_w);
            for (std::size_t r : weak.rows) {
                const auto it = strong_at.find(d.rows[r][c_x]);
                if (it == strong_at.end()) continue;
                ++checked;
                if (delay_num(d, r, c_w) < it->second) ++broken;
            }
        }
    }
    // vacuously true for single-curve datasets
    return make_item(
        "weaker SINR or more interferers never shrinks the delay bound",
        broken == 0,
        std::to_string(checked) + " comparisons, " + std::to_string(broken) +
            " broken");
}

std::vector<DelayCurve> delay_curves(const CsvDocument& d, std::size_t c_sinr,
                                     std::size_t c_n) {
    std::vector<DelayCurve> curves;
    for (auto& [key, rows] : group_rows(d, {c_sinr, c_n})) {
        DelayCurve c;
        c.sinr_db = std::stod(key[0]);
        c.interferers = static_cast<int>(std::stod(key[1]));
        c.rows = std::move(rows);
        curves.push_back(std::move(c));
    }
    return curves;
}

// ---- delay-vs-epsilon ---------------------------------------------------------

std::vector<CheckItem> check_delay_vs_epsilon(const CsvDocument& d) {
    const std::size_t c_sinr = d.column_index("sinr_db");
    const std::size_t c_n = d.column_index("interferers");
    const std::size_t c_eps = d.column_index("epsilon");
    const std::size_t c_w = d.column_index("delay_slots");
    std::vector<CheckItem> items;

    std::vector<DelayCurve> curves = delay_curves(d, c_sinr, c_n);
    long long rises = 0;
    for (DelayCurve& c : curves) {
        sort_by_column(d, c.rows, c_eps, /*ascending=*/false);
        for (std::size_t i = 1; i < c.rows.size(); ++i)
            if (delay_num(d, c.rows[i], c_w) < delay_num(d, c.rows[i - 1], c_w))
                ++rises;
    }
    items.push_back(make_item(
        "delay bounds grow as the violation target tightens", rises == 0,
        std::to_string(curves.size()) + " curves, " + std::to_string(rises) +
            " inversions"));

    items.push_back(dominance_item(d, curves, c_eps, c_w));

    long long unstable = 0;
    for (std::size_t r = 0; r < d.rows.size(); ++r)
        if (d.rows[r][c_w] == "unstable") ++unstable;
    items.push_back(make_item("every configured load is inside the stability region",
                              unstable == 0,
                              std::to_string(unstable) + " infeasible rows"));
    return items;
}

// ---- delay-vs-rate -------------------------------------------------------------

std::vector<CheckItem> check_delay_vs_rate(const CsvDocument& d) {
    const std::size_t c_sinr = d.column_index("sinr_db");
    const std::size_t c_n = d.column_index("interferers");
    const std::size_t c_rate = d.column_index("rate");
    const std::size_t c_w = d.column_index("delay_slots");
    std::vector<CheckItem> items;

    std::vector<DelayCurve> curves = delay_curves(d, c_sinr, c_n);
    long long inversions = 0;
    long long resumed = 0;  // feasible row after an infeasible one
    long long crossings = 0;
    for (DelayCurve& c : curves) {
        sort_by_column(d, c.rows, c_rate);
        bool seen_unstable = false;
        double prev = -kInf;
        for (std::size_t r : c.rows) {
            const double w = delay_num(d, r, c_w);
            if (w < prev) ++inversions;
            prev = w;
            if (std::isinf(w)) {
                seen_unstable = true;
            } else if (seen_unstable) {
                ++resumed;
            }
        }
        const bool starts_finite =
            !c.rows.empty() && !std::isinf(delay_num(d, c.rows.front(), c_w));
        if (starts_finite && seen_unstable) ++crossings;
    }
    items.push_back(make_item("delay bounds are nondecreasing in the arrival rate",
                              inversions == 0,
                              std::to_string(inversions) + " inversions"));
    items.push_back(make_item(
        "once a rate is infeasible, every larger rate is infeasible",
        resumed == 0, std::to_string(resumed) + " resumptions"));
    items.push_back(make_item(
        "each curve spans the stability boundary",
        crossings == static_cast<long long>(curves.size()),
        std::to_string(crossings) + " of " + std::to_string(curves.size()) +
            " curves cross"));
    items.push_back(dominance_item(d, curves, c_rate, c_w));
    return items;
}

// ---- delay-vs-interferers ------------------------------------------------------

std::vector<CheckItem> check_delay_vs_interferers(const CsvDocument& d) {
    const std::size_t c_rate = d.column_index("rate");
    const std::size_t c_channel = d.column_index("channel");
    const std::size_t c_n = d.column_index("interferers");
    const std::size_t c_w = d.column_index("delay_slots");
    std::vector<CheckItem> items;

    auto by_rate = group_rows(d, {c_rate});
    std::sort(by_rate.begin(), by_rate.end(), [](const auto& a, const auto& b) {
        return std::stod(a.first[0]) < std::stod(b.first[0]);
    });

    long long inversions = 0;
    long long above_reference = 0;
    long long load_inversions = 0;
    std::map<std::string, double> prev_by_channel;
    for (auto& [key, rows] : by_rate) {
        double reference = kInf;
        std::vector<std::pair<int, double>> split;
        for (std::size_t r : rows) {
            const double w = delay_num(d, r, c_w);
            if (d.rows[r][c_channel] == "noise")
                reference = w;
            else
                split.push_back({static_cast<int>(cell_num(d, r, c_n)), w});
            // within one channel the delay grows with the load
            const std::string token = d.rows[r][c_channel] + d.rows[r][c_n];
            const auto it = prev_by_channel.find(token);
            if (it != prev_by_channel.end() && w < it->second) ++load_inversions;
            prev_by_channel[token] = w;
        }
        std::sort(split.begin(), split.end());
        for (std::size_t i = 0; i < split.size(); ++i) {
            if (i && split[i].second < split[i - 1].second) ++inversions;
            if (split[i].second > reference) ++above_reference;
        }
    }
    items.push_back(make_item(
        "delay bounds grow with the interferer count at fixed total interference",
        inversions == 0, std::to_string(inversions) + " inversions"));
    items.push_back(make_item(
        "every interferer split beats the equal-power noise reference",
        above_reference == 0,
        std::to_string(above_reference) + " rows above the reference"));
    items.push_back(make_item(
        "higher load never shrinks the delay bound at any interferer count",
        load_inversions == 0, std::to_string(load_inversions) + " inversions"));
    return items;
}

// ---- maxrate-vs-snr ------------------------------------------------------------

std::vector<CheckItem> check_maxrate_vs_snr(const CsvDocument& d) {
    const std::size_t c_sinr = d.column_index("sinr_db");
    const std::size_t c_n = d.column_index("interferers");
    const std::size_t c_snr = d.column_index("snr_db");
    const std::size_t c_rate = d.column_index("max_rate");
    const std::size_t c_cap = d.column_index("avg_capacity");
    std::vector<CheckItem> items;

    auto curves = group_rows(d, {c_sinr, c_n});
    double worst_rate_step = kInf;
    double worst_cap_step = kInf;
    for (auto& [key, rows] : curves) {
        sort_by_column(d, rows, c_snr);
        for (std::size_t i = 1; i < rows.size(); ++i) {
            worst_rate_step = std::min(worst_rate_step,
                                       cell_num(d, rows[i], c_rate) -
                                           cell_num(d, rows[i - 1], c_rate));
            worst_cap_step = std::min(worst_cap_step,
                                      cell_num(d, rows[i], c_cap) -
                                          cell_num(d, rows[i - 1], c_cap));
        }
    }
    items.push_back(make_item("the admissible rate grows with SNR on every curve",
                              worst_rate_step > 0.0,
                              "smallest step " + fmt(worst_rate_step)));
    items.push_back(make_item("the average capacity grows with SNR on every curve",
                              worst_cap_step > 0.0,
                              "smallest step " + fmt(worst_cap_step)));

    // more interferers never help; separation must be real at the top SNR
    auto points = group_rows(d, {c_sinr, c_snr});
    double top_snr = -kInf;
    for (std::size_t r = 0; r < d.rows.size(); ++r)
        top_snr = std::max(top_snr, cell_num(d, r, c_snr));
    double worst_gain = -kInf;
    double top_separation = kInf;
    for (auto& [key, rows] : points) {
        std::vector<std::pair<int, double>> by_n;
        for (std::size_t r : rows)
            by_n.push_back({static_cast<int>(cell_num(d, r, c_n)),
                            cell_num(d, r, c_rate)});
        std::sort(by_n.begin(), by_n.end());
        for (std::size_t i = 1; i < by_n.size(); ++i)
            worst_gain = std::max(worst_gain, by_n[i].second - by_n[i - 1].second);
        if (by_n.size() >= 2 && std::stod(key[1]) == top_snr)
            top_separation = std::min(top_separation,
                                      by_n.front().second - by_n.back().second);
    }
    // slack absorbs the rate bisection resolution
    items.push_back(make_item(
        "more interferers never raise the admissible rate",
        worst_gain <= 2e-3 && top_separation > 1e-2,
        "largest gain " + fmt(worst_gain) + ", top-SNR separation " +
            fmt(top_separation)));

    double worst_headroom = kInf;
    for (std::size_t r = 0; r < d.rows.size(); ++r)
        worst_headroom = std::min(worst_headroom, cell_num(d, r, c_cap) -
                                                      cell_num(d, r, c_rate));
    items.push_back(make_item(
        "the delay-constrained rate stays below the average capacity",
        worst_headroom > 0.0, "smallest headroom " + fmt(worst_headroom)));
    return items;
}

// ---- avgcap-vs-snr -------------------------------------------------------------

std::vector<CheckItem> check_avgcap_vs_snr(const CsvDocument& d) {
    const std::size_t c_sinr = d.column_index("sinr_db");
    const std::size_t c_n = d.column_index("interferers");
    const std::size_t c_snr = d.column_index("snr_db");
    const std::size_t c_cap = d.column_index("avg_capacity");
    std::vector<CheckItem> items;

    auto curves = group_rows(d, {c_sinr, c_n});
    double worst_step = kInf;
    for (auto& [key, rows] : curves) {
        sort_by_column(d, rows, c_snr);
        for (std::size_t i = 1; i < rows.size(); ++i)
            worst_step = std::min(worst_step, cell_num(d, rows[i], c_cap) -
                                                  cell_num(d, rows[i - 1], c_cap));
    }
    items.push_back(make_item("the average capacity grows with SNR at fixed SINR",
                              worst_step > 0.0, "smallest step " + fmt(worst_step)));

    auto points = group_rows(d, {c_sinr, c_snr});
    double worst_gain = -kInf;
    for (auto& [key, rows] : points) {
        std::vector<std::pair<int, double>> by_n;
        for (std::size_t r : rows)
            by_n.push_back({static_cast<int>(cell_num(d, r, c_n)),
                            cell_num(d, r, c_cap)});
        std::sort(by_n.begin(), by_n.end());
        for (std::size_t i = 1; i < by_n.size(); ++i)
            worst_gain = std::max(worst_gain, by_n[i].second - by_n[i - 1].second);
    }
    items.push_back(make_item(
        "concentrating interference into fewer sources leaves more capacity",
        worst_gain < -1e-9, "largest gain from splitting " + fmt(worst_gain)));
    return items;
}

// ---- validate ------------------------------------------------------------------

std::vector<CheckItem> check_validate(const CsvDocument& d) {
    const std::size_t c_cfg = d.column_index("config");
    const std::size_t c_util = d.column_index("utilization");
    const std::size_t c_w = d.column_index("delay_slots");
    const std::size_t c_eps = d.column_index("analytic_epsilon");
    const std::size_t c_slope = d.column_index("analytic_slope");
    const std::size_t c_freq = d.column_index("empirical_freq");
    const std::size_t c_ucl = d.column_index("ccdf_upper_99");
    const std::size_t c_count = d.column_index("violations");
    std::vector<CheckItem> items;

    // bound validity wherever the run can resolve the frequency
    long long resolvable = 0;
    long long exceeded = 0;
    double worst_ratio = 0.0;
    for (std::size_t r = 0; r < d.rows.size(); ++r) {
        if (cell_num(d, r, c_ucl) <= 1e-4) continue;
        ++resolvable;
        const double freq = cell_num(d, r, c_freq);
        const double eps = cell_num(d, r, c_eps);
        if (freq > eps) ++exceeded;
        if (eps > 0.0) worst_ratio = std::max(worst_ratio, freq / eps);
    }
    items.push_back(make_item(
        "simulated violation frequencies stay below the analytic bound "
        "wherever resolvable",
        resolvable > 0 && exceeded == 0,
        std::to_string(resolvable) + " resolvable rows, worst freq/bound " +
            fmt(worst_ratio)));

    auto curves = group_rows(d, {c_cfg});
    for (auto& [key, rows] : curves) sort_by_column(d, rows, c_w);

    // decay-rate agreement for the two most lightly loaded runs, where the
    // simulation can follow the tail deep enough for a slope to mean anything
    std::sort(curves.begin(), curves.end(), [&](const auto& a, const auto& b) {
        return cell_num(d, a.second.front(), c_util) <
               cell_num(d, b.second.front(), c_util);
    });
    const std::size_t n_fit = std::min<std::size_t>(2, curves.size());
    bool slopes_ok = true;
    bool any_fit = false;
    std::string slope_detail;
    for (std::size_t ci = 0; ci < n_fit; ++ci) {
        const auto& rows = curves[ci].second;
        std::vector<std::pair<double, double>> pts;
        for (std::size_t r : rows)
            if (cell_num(d, r, c_count) >= 100.0)
                pts.push_back({cell_num(d, r, c_w),
                               std::log(cell_num(d, r, c_freq))});
        if (!slope_detail.empty()) slope_detail += "; ";
        if (pts.size() < 3) {
            slope_detail += "curve " + std::to_string(ci + 1) +
                            " not resolvable at this scale";
            continue;
        }
        any_fit = true;
        double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
        for (const auto& [x, y] : pts) {
            sx += x;
            sy += y;
            sxx += x * x;
            sxy += x * y;
        }
        const double n = static_cast<double>(pts.size());
        const double fitted = (n * sxy - sx * sy) / (n * sxx - sx * sx);
        const double analytic = cell_num(d, rows.front(), c_slope);
        if (!(std::abs(fitted - analytic) <= 0.15 * std::abs(analytic)))
            slopes_ok = false;
        slope_detail += "fit " + fmt(fitted) + " vs bound " + fmt(analytic);
    }
    items.push_back(make_item(
        "simulation and bound decay at matching rates under light load",
        slopes_ok, any_fit ? slope_detail : slope_detail + " (vacuous)"));

    long long freq_rises = 0;
    double worst_eps_rise = -kInf;
    for (const auto& [key, rows] : curves) {
        for (std::size_t i = 1; i < rows.size(); ++i) {
            if (cell_num(d, rows[i], c_freq) > cell_num(d, rows[i - 1], c_freq))
                ++freq_rises;
            worst_eps_rise = std::max(worst_eps_rise,
                                      cell_num(d, rows[i], c_eps) -
                                          cell_num(d, rows[i - 1], c_eps));
        }
    }
    items.push_back(make_item(
        "violation curves decay with the delay target",
        freq_rises == 0 && worst_eps_rise <= 1e-12,
        std::to_string(freq_rises) + " frequency rises, largest bound rise " +
            fmt(std::max(worst_eps_rise, 0.0))));
    return items;
}

} // namespace

CheckReport check_reproduction(const CsvDocument& dataset) {
    const std::string* kind_cell = dataset.find_meta("kind");
    if (!kind_cell)
        throw ConfigError("dataset carries no 'kind' metadata line");
    CheckReport report;
    report.kind = *kind_cell;
    switch (kind_from_name(*kind_cell)) {
        case ExperimentKind::EffectiveCapacity:
            report.items = check_effective_capacity(dataset);
            break;
        case ExperimentKind::DelayVsEpsilon:
            report.items = check_delay_vs_epsilon(dataset);
            break;
        case ExperimentKind::DelayVsRate:
            report.items = check_delay_vs_rate(dataset);
            break;
        case ExperimentKind::DelayVsInterferers:
            report.items = check_delay_vs_interferers(dataset);
            break;
        case ExperimentKind::MaxRateVsSnr:
            report.items = check_maxrate_vs_snr(dataset);
            break;
        case ExperimentKind::AvgCapVsSnr:
            report.items = check_avgcap_vs_snr(dataset);
            break;
        case ExperimentKind::Validate:
            report.items = check_validate(dataset);
            break;
    }
    return report;
}

} // namespace ifperf
