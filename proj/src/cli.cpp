#include "signgate/cli.hpp"

#include "signgate/config.hpp"
#include "signgate/procedures.hpp"
#include "signgate/report.hpp"

#include <CLI11.hpp>

#include <charconv>
#include <chrono>
#include <cstdlib>
#include <fstream>
#include <sstream>

namespace signgate {

namespace {

class InputError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

std::string trim(std::string_view s) {
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string_view::npos) {
        return {};
    }
    const auto last = s.find_last_not_of(" \t\r");
    return std::string(s.substr(first, last - first + 1));
}

double parse_real(const std::string& token, std::size_t row) {
    double v = 0.0;
    const char* first = token.data() + (!token.empty() && token[0] == '+' ? 1 : 0);
    const char* last = token.data() + token.size();
    auto [ptr, ec] = std::from_chars(first, last, v);
    if (token.empty() || ec != std::errc() || ptr != last) {
        throw InputError("row " + std::to_string(row) + ": cannot parse '" + token + "' as a number");
    }
    if (!std::isfinite(v)) {
        throw InputError("row " + std::to_string(row) + ": value is not finite");
    }
    return v;
}

std::vector<std::string> split_csv(const std::string& line) {
    std::vector<std::string> cells;
    std::string cell;
    bool quoted = false;
    for (char c : line) {
        if (c == '"') {
            quoted = !quoted;
        } else if (c == ',' && !quoted) {
            cells.push_back(trim(cell));
            cell.clear();
        } else {
            cell += c;
        }
    }
    cells.push_back(trim(cell));
    return cells;
}

std::vector<double> read_statistics(const std::string& path, const std::optional<std::string>& column) {
    std::ifstream in(path);
    if (!in) {
        throw InputError("cannot read input file '" + path + "'");
    }
    std::vector<double> values;
    std::string line;
    std::size_t row = 0;
    if (!column) {
        while (std::getline(in, line)) {
            ++row;
            const std::string token = trim(line);
            if (token.empty()) {
                continue;
            }
            values.push_back(parse_real(token, row));
        }
    } else {
        if (!std::getline(in, line)) {
            throw InputError("input CSV is empty");
        }
        ++row;
        const std::vector<std::string> header = split_csv(line);
        std::size_t index = header.size();
        for (std::size_t i = 0; i < header.size(); ++i) {
            if (header[i] == *column) {
                index = i;
            }
        }
        if (index == header.size()) {
            std::size_t pos = 0;
            auto [ptr, ec] = std::from_chars(column->data(), column->data() + column->size(), pos);
            if (ec != std::errc() || ptr != column->data() + column->size() || pos < 1 || pos > header.size()) {
                throw InputError("CSV column '" + *column + "' not found in header");
            }
            index = pos - 1;
        }
        while (std::getline(in, line)) {
            ++row;
            if (trim(line).empty()) {
                continue;
            }
            const std::vector<std::string> cells = split_csv(line);
            if (index >= cells.size()) {
                throw InputError("row " + std::to_string(row) + ": missing column " + *column);
            }
            values.push_back(parse_real(cells[index], row));
        }
    }
    if (values.empty()) {
        throw InputError("input contains no statistics");
    }
    return values;
}

class OutputTarget {
public:
    OutputTarget(const std::string& path, std::ostream& fallback) : out_(&fallback) {
        if (!path.empty()) {
            file_.open(path, std::ios::binary | std::ios::trunc);
            if (!file_) {
                throw InputError("cannot write output file '" + path + "'");
            }
            out_ = &file_;
        }
    }
    std::ostream& stream() { return *out_; }

private:
    std::ofstream file_;
    std::ostream* out_;
};

} // namespace

int cmd_infer(const InferRequest& request, std::ostream& out, std::ostream& err) {
    try {
        const Dataset y(read_statistics(request.input, request.csv_column));
        DecisionSet d;
        const std::string& proc = request.procedure;
        if (proc == "by") {
            d = by_procedure(y, request.alpha_s);
        } else if (proc == "lc") {
            d = lc_procedure(y, request.alpha_s);
        } else if (proc == "nlc") {
            d = nlc_procedure(y, request.alpha_s);
        } else if (proc == "tce") {
            if (request.model != "ald0") {
                throw InputError("unsupported model '" + request.model + "' (only ald0)");
            }
            d = tce_procedure(y, request.alpha_s);
        } else if (proc == "fixed-alpha") {
            if (!request.alpha) {
                throw InputError("fixed-alpha requires --alpha");
            }
            d = decide(y, AcceptanceRegion(*request.alpha, request.s));
        } else {
            throw InputError("unknown procedure '" + proc + "'");
        }

        OutputTarget target(request.output, out);
        std::ostream& csv = target.stream();
        csv << "index,y,rejected,sign,p_value\n";
        for (std::size_t i = 0; i < y.size(); ++i) {
            csv << i + 1 << ',' << format_real(y[i]) << ',' << static_cast<int>(d.rejected[i]) << ',' << d.sign[i]
                << ',' << format_real(two_sided_p(y[i])) << '\n';
        }
        err << "procedure=" << proc;
        if (d.per_experiment_alpha.empty()) {
            err << " alpha_chosen=" << format_real(d.alpha);
        } else {
            const auto [lo, hi] = std::minmax_element(d.per_experiment_alpha.begin(), d.per_experiment_alpha.end());
            err << " alpha_chosen=per-experiment[" << format_real(*lo) << ',' << format_real(*hi) << ']';
        }
        err << " R=" << d.rejections();
        if (d.region) {
            err << " region=(" << format_real(d.region->lower()) << ',' << format_real(d.region->upper()) << ')';
        }
        if (d.cap != AlphaCap::none) {
            err << " cap=" << (d.cap == AlphaCap::upper ? "upper" : "lower");
        }
        err << '\n';
        if (!d.warning.empty()) {
            err << "warning: " << d.warning << '\n';
        }
        return exit_code::ok;
    } catch (const InputError& e) {
        err << "error: " << e.what() << '\n';
        return exit_code::usage;
    } catch (const std::invalid_argument& e) {
        err << "error: " << e.what() << '\n';
        return exit_code::usage;
    } catch (const std::domain_error& e) {
        err << "error: " << e.what() << '\n';
        return exit_code::usage;
    } catch (const NumericalError& e) {
        err << "numerical failure: " << e.what() << '\n';
        return exit_code::numerical;
    }
}

int cmd_simulate(const SimulateRequest& request, std::ostream& out, std::ostream& err) {
    try {
        ScenarioOverrides overrides;
        overrides.replicates = request.replicates;
        overrides.seed = request.seed;
        overrides.default_seed = request.env_seed;
        const std::vector<Scenario> points = load_scenario_file(request.scenario, overrides);

        std::vector<ScenarioReport> reports;
        for (const Scenario& s : points) {
            const auto start = std::chrono::steady_clock::now();
            reports.push_back(run_scenario(s, request.workers));
            const std::chrono::duration<double> took = std::chrono::steady_clock::now() - start;
            err << s.id << ": " << s.effect->describe() << ", " << s.replicates << " replicates in " << took.count()
                << " s\n";
            if (reports.back().dominance_violations > 0) {
                err << "warning: " << reports.back().dominance_violations << " replicates broke BY/NLC <= LC\n";
            }
        }
        OutputTarget target(request.output, out);
        write_report_csv(target.stream(), reports);
        if (!request.plot.empty()) {
            std::ofstream svg(request.plot, std::ios::binary | std::ios::trunc);
            if (!svg) {
                throw InputError("cannot write plot file '" + request.plot + "'");
            }
            write_report_svg(svg, reports, points.front().alpha_s);
        }
        return exit_code::ok;
    } catch (const ConfigError& e) {
        err << "error: " << e.what() << '\n';
        return exit_code::usage;
    } catch (const InputError& e) {
        err << "error: " << e.what() << '\n';
        return exit_code::usage;
    } catch (const std::invalid_argument& e) {
        err << "error: " << e.what() << '\n';
        return exit_code::usage;
    } catch (const NumericalError& e) {
        err << "numerical failure: " << e.what() << '\n';
        return exit_code::numerical;
    }
}

std::vector<Table1Row> compute_table1(double noise_sd) {
    const ShiftedChiSquare g({3, 3.0});
    RateOptions opts;
    opts.noise_sd = noise_sd;
    auto row = [&](std::string label, double s) {
        const AcceptanceRegion region(kTable1Alpha, s);
        const RateTriple r = rate_triple(g, region, opts);
        return Table1Row{std::move(label), s, region.lower(), region.upper(), r.mser, r.msdr};
    };
    const double s_d = optimize_s(g, kTable1Alpha, SplitObjective::maximize_msdr, opts).s;
    const double s_e = optimize_s(g, kTable1Alpha, SplitObjective::minimize_mser, opts).s;
    return {row("sU", 0.5), row("sD", s_d), row("sE", s_e)};
}

int cmd_table1(const std::string& output, double noise_sd, std::ostream& out, std::ostream& err) {
    try {
        if (!(noise_sd > 0.0)) {
            throw InputError("--noise-sd must be positive");
        }
        const std::vector<Table1Row> rows = compute_table1(noise_sd);
        OutputTarget target(output, out);
        std::ostream& csv = target.stream();
        csv << "row,s,lower_z,upper_z,lower,upper,mser_percent,msdr\n";
        for (const auto& r : rows) {
            csv << r.label << ',' << format_real(r.s) << ',' << format_real(r.lower_z) << ','
                << format_real(r.upper_z) << ',' << format_real(noise_sd * r.lower_z) << ','
                << format_real(noise_sd * r.upper_z) << ',' << format_real(100.0 * r.mser) << ','
                << format_real(r.msdr) << '\n';
        }
        err << "theta ~ chi2_3 - 3, alpha = " << kTable1Alpha << ", Y = theta + " << noise_sd
            << " Z; endpoints are given in z units and scaled by the noise sd\n";
        return exit_code::ok;
    } catch (const InputError& e) {
        err << "error: " << e.what() << '\n';
        return exit_code::usage;
    } catch (const NumericalError& e) {
        err << "numerical failure: " << e.what() << '\n';
        return exit_code::numerical;
    }
}

int run_cli(int argc, char** argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Adaptive sign-error-rate control for the normal-means model"};
    app.require_subcommand(1);

    InferRequest infer;
    std::string csv_column;
    double fixed_alpha = 0.0;
    auto* infer_cmd = app.add_subcommand("infer", "Infer signs for observed z-statistics");
    infer_cmd->add_option("--input", infer.input, "Input file, one statistic per line")->required();
    infer_cmd->add_option("--csv", csv_column, "Read this CSV column (header name or 1-based index)");
    infer_cmd->add_option("--procedure", infer.procedure, "by, lc, nlc, tce or fixed-alpha")
        ->check(CLI::IsMember({"by", "lc", "nlc", "tce", "fixed-alpha"}));
    infer_cmd->add_option("--alpha-s", infer.alpha_s, "Target sign error rate");
    auto* alpha_opt = infer_cmd->add_option("--alpha", fixed_alpha, "Type I error rate for fixed-alpha");
    infer_cmd->add_option("--s", infer.s, "Tail split for fixed-alpha");
    infer_cmd->add_option("--model", infer.model, "Effect model for tce (ald0)");
    infer_cmd->add_option("--output", infer.output, "Decision CSV path (default stdout)");

    SimulateRequest sim;
    std::size_t replicates = 0;
    std::uint64_t seed = 0;
    auto* sim_cmd = app.add_subcommand("simulate", "Run a Monte Carlo scenario file");
    sim_cmd->add_option("--scenario", sim.scenario, "Scenario file (.toml or .json)")->required();
    auto* rep_opt = sim_cmd->add_option("--replicates", replicates, "Override the replicate count");
    auto* seed_opt = sim_cmd->add_option("--seed", seed, "Override the master seed");
    sim_cmd->add_option("--workers", sim.workers, "Worker threads");
    sim_cmd->add_option("--output", sim.output, "Report CSV path (default stdout)");
    sim_cmd->add_option("--plot", sim.plot, "Also write an SVG plot here");

    std::string table_output;
    double noise_sd = kTable1NoiseSd;
    auto* table_cmd = app.add_subcommand("table1", "Acceptance-region comparison for chi2_3 - 3 effects");
    table_cmd->add_option("--output", table_output, "CSV path (default stdout)");
    table_cmd->add_option("--noise-sd", noise_sd, "Noise standard deviation convention");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) {
            out << app.help();
            return exit_code::ok;
        }
        err << "error: " << e.what() << '\n';
        return exit_code::usage;
    }

    if (infer_cmd->parsed()) {
        if (!csv_column.empty()) {
            infer.csv_column = csv_column;
        }
        if (alpha_opt->count() > 0) {
            infer.alpha = fixed_alpha;
        }
        return cmd_infer(infer, out, err);
    }
    if (sim_cmd->parsed()) {
        if (rep_opt->count() > 0) {
            sim.replicates = replicates;
        }
        if (seed_opt->count() > 0) {
            sim.seed = seed;
        }
        if (const char* env = std::getenv("SIGNGATE_SEED"); env && *env) {
            std::uint64_t v = 0;
            const std::string_view text(env);
            auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
            if (ec != std::errc() || ptr != text.data() + text.size()) {
                err << "error: SIGNGATE_SEED must be an unsigned integer\n";
                return exit_code::usage;
            }
            sim.env_seed = v;
        }
        return cmd_simulate(sim, out, err);
    }
    return cmd_table1(table_output, noise_sd, out, err);
}

} // namespace signgate
