#include "sectoral/cli.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <thread>

#include <CLI11.hpp>

#include "sectoral/errors.hpp"
#include "sectoral/fit.hpp"
#include "sectoral/ingest.hpp"
#include "sectoral/model.hpp"
#include "sectoral/numerics.hpp"

namespace sectoral::cli {

namespace {

struct UsageError : Error {
    using Error::Error;
};

struct DataOptions {
    std::vector<std::string> inputs;
    int first_year = 1980;
    int last_year = 2005;
};

struct CleaningOptions {
    int cutoff_year = 1995;
    std::string exclusions;
    std::size_t min_years = 4;
    bool no_renormalize = false;
    double band = 0.05;
};

struct OutputOptions {
    std::string out;
    std::string format;
};

void add_data_options(CLI::App& cmd, DataOptions& d)
{
    cmd.add_option("inputs", d.inputs, "Indicator CSV files (wide World Bank layout or long layout)")
        ->required()
        ->check(CLI::ExistingFile);
    cmd.add_option("--first-year", d.first_year, "First year read from the indicator files")->capture_default_str();
    cmd.add_option("--last-year", d.last_year, "Last year read from the indicator files")->capture_default_str();
}

void add_cleaning_options(CLI::App& cmd, CleaningOptions& c)
{
    cmd.add_option("--cutoff-year", c.cutoff_year, "Drop earlier years for countries on the exclusion list")
        ->capture_default_str();
    cmd.add_option("--exclusions", c.exclusions, "Exclusion list file (default: bundled list)")
        ->check(CLI::ExistingFile);
    cmd.add_option("--min-years", c.min_years, "Minimum retained years per country")->capture_default_str();
    cmd.add_flag("--no-renormalize", c.no_renormalize, "Keep raw sector shares instead of rescaling to sum 1");
    cmd.add_option("--share-band", c.band, "Max |a+i+s-1| before a year is dropped")->capture_default_str();
}

void add_output_options(CLI::App& cmd, OutputOptions& o, bool required)
{
    auto* opt = cmd.add_option("--out", o.out, "Output file");
    if (required)
        opt->required();
    cmd.add_option("--format", o.format, "Output format (default: from the --out extension, else csv)")
        ->check(CLI::IsMember({"csv", "json"}));
}

OutputFormat resolve_format(const OutputOptions& o)
{
    if (!o.format.empty())
        return parse_format(o.format);
    return std::filesystem::path(o.out).extension() == ".json" ? OutputFormat::Json : OutputFormat::Csv;
}

OutputFormat format_for_path(const std::string& path)
{
    return std::filesystem::path(path).extension() == ".json" ? OutputFormat::Json : OutputFormat::Csv;
}

IndicatorTable load_table(const std::vector<std::string>& paths, const ParseOptions& opts)
{
    IndicatorTable table;
    bool first = true;
    for (const auto& p : paths) {
        IndicatorTable t = parse_indicators(std::filesystem::path(p), opts);
        if (first)
            table = std::move(t);
        else
            merge_tables(table, t);
        first = false;
    }
    return table;
}

CleaningConfig make_cleaning(const CleaningOptions& c)
{
    CleaningConfig cfg;
    cfg.cutoff_year = c.cutoff_year;
    cfg.excluded_before_cutoff =
        load_exclusions(c.exclusions.empty() ? default_exclusions_path() : std::filesystem::path(c.exclusions));
    cfg.min_years = c.min_years;
    cfg.renormalize_shares = !c.no_renormalize;
    cfg.renormalize_band = c.band;
    return cfg;
}

// Writes to the named file, or to `out` when the name is empty or "-".
template <class Fn>
void emit(const std::string& path, std::ostream& out, Fn&& write)
{
    if (path.empty() || path == "-") {
        write(out);
        return;
    }
    std::ofstream file(path, std::ios::binary);
    if (!file)
        throw IoError("cannot write " + path);
    write(file);
    if (!file)
        throw IoError("write failed for " + path);
}

// ---------------------------------------------------------------- fit

struct FitArgs {
    DataOptions data;
    CleaningOptions cleaning;
    OutputOptions output;
    std::uint64_t seed = 42;
    double threshold = 0.1;
    std::size_t jobs = 0;
    std::size_t max_evaluations = 50'000;
    std::vector<double> k2_bounds{-5.0, 5.0};
    std::vector<double> alpha_bounds{0.0, 5.0};
    std::vector<double> g0_bounds{1.0, 15.0};
};

int cmd_fit(const FitArgs& a, std::ostream& out, std::ostream& err)
{
    const IndicatorTable table = load_table(a.data.inputs, {.first_year = a.data.first_year,
                                                            .last_year = a.data.last_year});
    for (const auto& [code, n] : table.skipped_series)
        err << "warning: skipped " << n << " row(s) of unknown series '" << code << "'\n";
    const AssemblyReport assembled = assemble_series(table, make_cleaning(a.cleaning));

    FitConfig config;
    config.threshold = a.threshold;
    config.min_years = a.cleaning.min_years;
    config.bounds = {a.k2_bounds[0], a.k2_bounds[1], a.alpha_bounds[0],
                     a.alpha_bounds[1], a.g0_bounds[0], a.g0_bounds[1]};
    config.bounds.as_box().validate();
    config.optimizer.seed = a.seed;
    config.optimizer.max_evaluations = a.max_evaluations;
    config.jobs = a.jobs > 0 ? a.jobs : std::max(1u, std::thread::hardware_concurrency());

    const FitReport report = fit_all(assembled.series, config);
    for (const auto& f : report.failures)
        err << "warning: " << f.reason << '\n';

    write_results(report.results, std::filesystem::path(a.output.out), resolve_format(a.output));

    const std::size_t countries = table.countries().size();
    out << "countries: " << countries << '\n';
    out << "eligible: " << assembled.series.size() << '\n';
    out << "fitted: " << report.summary.fitted << '\n';
    out << "accepted: " << report.summary.accepted << '\n';
    out << "types:";
    for (const auto& [id, n] : report.summary.type_counts)
        out << ' ' << id << ':' << n;
    out << '\n';
    if (report.summary.unclassified > 0)
        out << "unclassified: " << report.summary.unclassified << '\n';

    return report.summary.accepted > 0 ? kExitOk : kExitNoneAccepted;
}

// ---------------------------------------------------------------- collapse

struct CollapseArgs {
    DataOptions data;
    OutputOptions output;
    std::string results;
    std::vector<std::string> countries;
    bool accepted_only = false;
};

int cmd_collapse(const CollapseArgs& a, std::ostream& out, std::ostream& err)
{
    std::vector<FitResult> results = read_results(std::filesystem::path(a.results), format_for_path(a.results));
    std::sort(results.begin(), results.end(), [](const auto& l, const auto& r) { return l.code < r.code; });
    for (const auto& code : a.countries)
        if (std::none_of(results.begin(), results.end(), [&](const FitResult& r) { return r.code == code; }))
            throw UsageError("no fit for country " + code + " in " + a.results);

    // Every observed year is shown, including those the fit excluded before the cutoff.
    const IndicatorTable table = load_table(a.data.inputs, {.first_year = a.data.first_year,
                                                            .last_year = a.data.last_year});
    CleaningConfig cleaning;
    cleaning.min_years = 1;
    const AssemblyReport assembled = assemble_series(table, cleaning);

    std::vector<CollapseRow> rows;
    std::size_t skipped = 0;
    for (const auto& r : results) {
        if (!a.countries.empty() && std::find(a.countries.begin(), a.countries.end(), r.code) == a.countries.end())
            continue;
        if (a.accepted_only && !r.accepted)
            continue;
        const auto it = std::find_if(assembled.series.begin(), assembled.series.end(),
                                     [&](const CountrySeries& s) { return s.code == r.code; });
        if (it == assembled.series.end()) {
            err << "warning: no observations for " << r.code << '\n';
            continue;
        }
        for (const auto& obs : it->observations) {
            CollapseRow row;
            row.code = r.code;
            row.year = obs.year;
            row.transfer_type = r.transfer_type;
            try {
                const CollapsePoint pt = collapse_transform(r.params, obs.shares.a, obs.shares.i);
                row.x = pt.x;
                row.y = pt.y;
            } catch (const DomainError&) {
                ++skipped;
                continue;
            }
            try {
                const CollapsePoint disp = collapse_display(r.transfer_type.value_or(0), {row.x, row.y});
                row.x_display = disp.x;
                row.y_display = disp.y;
            } catch (const DomainError&) {
            }
            rows.push_back(std::move(row));
        }
    }
    if (skipped > 0)
        err << "warning: skipped " << skipped << " observation(s) with a <= 0\n";

    const OutputFormat fmt = resolve_format(a.output);
    emit(a.output.out, out, [&](std::ostream& os) { write_collapse_points(rows, os, fmt); });
    return kExitOk;
}

// ---------------------------------------------------------------- simulate

struct SimulateArgs {
    double k1 = 0.0, k2 = 0.0, alpha = 0.0, g0 = 0.0;
    std::optional<double> g_min, g_max;
    double step = 0.01;
    bool rk4 = false;
    std::string out;
};

int cmd_simulate(const SimulateArgs& a, std::ostream& out)
{
    const ModelParams params{a.k1, a.k2, a.alpha, a.g0};
    const double lo = a.g_min.value_or(a.g0);
    const double hi = a.g_max.value_or(lo + 6.0);
    if (!(a.step > 0.0) || !std::isfinite(a.step))
        throw UsageError("--step must be positive");
    if (!(hi >= lo) || !std::isfinite(lo) || !std::isfinite(hi))
        throw UsageError("invalid g-range: --g-max must not be below --g-min");

    Trajectory traj;
    if (a.rk4) {
        traj = rk4_integrate(params, lo, shares_at(params, lo), hi, a.step);
    } else {
        // Same grid as the integrator: uniform steps, last point pinned to g-max.
        const auto n = static_cast<std::size_t>(std::ceil((hi - lo) / a.step - 1e-9));
        for (std::size_t k = 0; k <= n; ++k) {
            const double g = k == n ? hi : lo + static_cast<double>(k) * a.step;
            traj.g_values.push_back(g);
            traj.shares.push_back(shares_at(params, g));
        }
    }

    emit(a.out, out, [&](std::ostream& os) {
        os << "g,a,i,s\n";
        for (std::size_t k = 0; k < traj.g_values.size(); ++k) {
            const auto& sh = traj.shares[k];
            os << format_number(traj.g_values[k]) << ',' << format_number(sh.a) << ',' << format_number(sh.i) << ','
               << format_number(sh.s) << '\n';
        }
    });
    return kExitOk;
}

// ---------------------------------------------------------------- correlate

struct CorrelateArgs {
    std::vector<std::string> inputs;
    std::string rural;
    std::string rural_code = kRuralPopulationCode;
    int year = 2005;
    std::string results;
    bool accepted_only = false;
    std::string out;
};

int cmd_correlate(const CorrelateArgs& a, std::ostream& out)
{
    const ParseOptions data_opts{{kAgricultureCode, kGdpPerCapitaCode}, a.year, a.year};
    const IndicatorTable data = load_table(a.inputs, data_opts);
    const IndicatorTable rural_table = load_table({a.rural}, {{a.rural_code}, a.year, a.year});

    const auto agr = join_auxiliary(data, kAgricultureCode, a.year);
    const auto rural = join_auxiliary(rural_table, a.rural_code, a.year);

    std::optional<std::set<std::string>> keep;
    if (!a.results.empty()) {
        keep.emplace();
        for (const auto& r : read_results(std::filesystem::path(a.results), format_for_path(a.results)))
            if (!a.accepted_only || r.accepted)
                keep->insert(r.code);
    }

    std::vector<double> log_a, rural_frac, gdp_key;
    std::vector<std::pair<double, double>> paired;
    for (const auto& [code, share] : agr) {
        if (keep && !keep->contains(code))
            continue;
        const auto rit = rural.find(code);
        if (!share || !(*share > 0.0) || rit == rural.end() || !rit->second)
            continue;
        log_a.push_back(std::log(*share));
        rural_frac.push_back(*rit->second);
        const auto gdp = data.value(code, kGdpPerCapitaCode, a.year);
        if (gdp && *gdp > 0.0) {
            gdp_key.push_back(*gdp);
            paired.emplace_back(log_a.back(), rural_frac.back());
        }
    }
    if (log_a.size() < 2)
        throw DegenerateError("degenerate sample: fewer than two countries with both ln a and rural fraction in " +
                              std::to_string(a.year));

    const double r = pearson(log_a, rural_frac);
    emit(a.out, out, [&](std::ostream& os) {
        os << "year: " << a.year << '\n';
        os << "n: " << log_a.size() << '\n';
        os << "pearson_r: " << format_number(r) << '\n';
        if (gdp_key.size() < 4) {
            os << "quartiles: unavailable (" << gdp_key.size() << " countries with GDP/cap)\n";
            return;
        }
        const QuartileStats qs = quartile_stats(gdp_key, paired);
        os << "quartile,n,gdp_min,gdp_max,mean_log_a,std_log_a,mean_rural,std_rural\n";
        for (std::size_t q = 0; q < 4; ++q) {
            const auto& grp = qs.groups[q];
            os << q + 1 << ',' << grp.size << ',' << format_number(grp.key_min) << ',' << format_number(grp.key_max)
               << ',' << format_number(grp.mean_u) << ',' << format_number(grp.std_u) << ','
               << format_number(grp.mean_v) << ',' << format_number(grp.std_v) << '\n';
        }
    });
    return kExitOk;
}

// ---------------------------------------------------------------- classify

struct ClassifyArgs {
    std::optional<double> k1, k2, alpha;
    double g0 = 0.0;
    std::string results;
};

void print_type(std::ostream& os, const TransferType& t)
{
    os << "type " << t.id << '\n' << t.describe() << '\n';
}

int cmd_classify(const ClassifyArgs& a, std::ostream& out)
{
    if (!a.results.empty()) {
        for (const auto& r : read_results(std::filesystem::path(a.results), format_for_path(a.results))) {
            out << r.code << ',';
            try {
                const TransferType t = classify(r.params);
                out << t.id << ',' << t.describe() << '\n';
            } catch (const BoundaryError&) {
                out << ",unclassifiable\n";
            }
        }
        return kExitOk;
    }

    if (a.k1 && std::abs(*a.k1) < kDegeneracyEps)
        throw BoundaryError("k1 = 0 is a boundary case; the transfer type is undefined");
    if (a.k2 && std::abs(*a.k2) < kDegeneracyEps)
        throw BoundaryError("k2 = 0 is a boundary case; the transfer type is undefined");
    if (a.alpha && std::abs(*a.alpha - 1.0) < kDegeneracyEps)
        throw BoundaryError("alpha = 1 is a boundary case; the transfer type is undefined");
    if (!a.k1 || !a.k2 || !a.alpha)
        throw UsageError("classify needs --k1, --k2 and --alpha, or --results");

    const ModelParams p{*a.k1, *a.k2, *a.alpha, a.g0};
    const TransferType t = classify(p);
    print_type(out, t);
    out << "convergent: " << (t.convergent ? "yes" : "no") << '\n';
    if (const auto gm = g_max_industry(p))
        out << "g_max_i: " << format_number(*gm) << '\n';
    return kExitOk;
}

} // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err)
{
    CLI::App app{"Fit and analyse the three-sector GDP composition transfer model", "sectoral"};
    app.require_subcommand(1);

    FitArgs fit;
    auto* fit_cmd = app.add_subcommand("fit", "Two-step fit of every eligible country");
    add_data_options(*fit_cmd, fit.data);
    add_cleaning_options(*fit_cmd, fit.cleaning);
    add_output_options(*fit_cmd, fit.output, true);
    fit_cmd->add_option("--seed", fit.seed, "Global optimizer seed")->capture_default_str();
    fit_cmd->add_option("--threshold", fit.threshold, "Accept fits with summed MSE below this")->capture_default_str();
    fit_cmd->add_option("--jobs", fit.jobs, "Worker threads (default: available processors)");
    fit_cmd->add_option("--max-evals", fit.max_evaluations, "Optimizer evaluation budget per country")
        ->capture_default_str();
    fit_cmd->add_option("--k2-bounds", fit.k2_bounds, "Open interval for k2")->expected(2)->capture_default_str();
    fit_cmd->add_option("--alpha-bounds", fit.alpha_bounds, "Open interval for alpha")
        ->expected(2)
        ->capture_default_str();
    fit_cmd->add_option("--g0-bounds", fit.g0_bounds, "Open interval for g0")->expected(2)->capture_default_str();

    CollapseArgs collapse;
    auto* collapse_cmd = app.add_subcommand("collapse", "Collapse observations onto the universal diagonal");
    add_data_options(*collapse_cmd, collapse.data);
    add_output_options(*collapse_cmd, collapse.output, false);
    collapse_cmd->add_option("--results", collapse.results, "Fit results (csv or json)")
        ->required()
        ->check(CLI::ExistingFile);
    collapse_cmd->add_option("--country", collapse.countries, "Restrict to these country codes");
    collapse_cmd->add_flag("--accepted-only", collapse.accepted_only, "Skip fits above the acceptance threshold");

    SimulateArgs sim;
    auto* sim_cmd = app.add_subcommand("simulate", "Print a model trajectory g,a,i,s");
    sim_cmd->add_option("--k1", sim.k1, "Agrarian outflow rate")->required();
    sim_cmd->add_option("--k2", sim.k2, "Industry-to-service rate")->required();
    sim_cmd->add_option("--alpha", sim.alpha, "Fraction of agrarian outflow going to industry")->required();
    sim_cmd->add_option("--g0", sim.g0, "Log GDP/cap where a = 1")->capture_default_str();
    sim_cmd->add_option("--g-min", sim.g_min, "Start of the g range (default: g0)");
    sim_cmd->add_option("--g-max", sim.g_max, "End of the g range (default: g-min + 6)");
    sim_cmd->add_option("--step", sim.step, "Grid spacing, also the RK4 step")->capture_default_str();
    sim_cmd->add_flag("--rk4", sim.rk4, "Integrate the ODE instead of evaluating the closed form");
    sim_cmd->add_option("--out", sim.out, "Output file (default: standard output)");

    CorrelateArgs corr;
    auto* corr_cmd = app.add_subcommand("correlate", "Correlate ln a with the rural population fraction");
    corr_cmd->add_option("inputs", corr.inputs, "Indicator files with agriculture share and GDP/cap")
        ->required()
        ->check(CLI::ExistingFile);
    corr_cmd->add_option("--rural", corr.rural, "Indicator file with the rural population series")
        ->required()
        ->check(CLI::ExistingFile);
    corr_cmd->add_option("--rural-code", corr.rural_code, "Series code of the rural indicator")->capture_default_str();
    corr_cmd->add_option("--year", corr.year, "Year to correlate")->capture_default_str();
    corr_cmd->add_option("--results", corr.results, "Restrict to countries in this results file")
        ->check(CLI::ExistingFile);
    corr_cmd->add_flag("--accepted-only", corr.accepted_only, "With --results, keep accepted fits only");
    corr_cmd->add_option("--out", corr.out, "Output file (default: standard output)");

    ClassifyArgs cls;
    auto* cls_cmd = app.add_subcommand("classify", "Transfer type of a parameter set or results file");
    cls_cmd->add_option("--k1", cls.k1, "Agrarian outflow rate");
    cls_cmd->add_option("--k2", cls.k2, "Industry-to-service rate");
    cls_cmd->add_option("--alpha", cls.alpha, "Fraction of agrarian outflow going to industry");
    cls_cmd->add_option("--g0", cls.g0, "Log GDP/cap where a = 1 (shifts g_max_i)")->capture_default_str();
    cls_cmd->add_option("--results", cls.results, "Classify every row of a results file")->check(CLI::ExistingFile);

    try {
        std::vector<std::string> reversed(args.rbegin(), args.rend());
        app.parse(reversed);
    } catch (const CLI::Success& e) {
        app.exit(e, out, err);
        return kExitOk;
    } catch (const CLI::ParseError& e) {
        app.exit(e, out, err);
        return kExitUsage;
    }

    try {
        if (*fit_cmd)
            return cmd_fit(fit, out, err);
        if (*collapse_cmd)
            return cmd_collapse(collapse, out, err);
        if (*sim_cmd)
            return cmd_simulate(sim, out);
        if (*corr_cmd)
            return cmd_correlate(corr, out);
        if (*cls_cmd)
            return cmd_classify(cls, out);
    } catch (const BoundaryError& e) {
        err << "error: unclassifiable: " << e.what() << '\n';
        return kExitUsage;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return kExitUsage;
    }
    return kExitUsage;
}

} // namespace sectoral::cli
