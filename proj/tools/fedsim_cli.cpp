#include <cstdio>
#include <exception>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "fedsim/harness.hpp"

namespace {

using namespace fedsim;

struct CommonOpts {
    std::string config_path;
    std::string out_dir = "out";
    std::string format = "kv";
    std::uint64_t seed = 0;
    bool seed_set = false;
    std::string scenario;
    std::vector<std::string> overrides;
};

void add_common(CLI::App* cmd, CommonOpts& opts) {
    cmd->add_option("--config", opts.config_path, "experiment config file (key = value lines)");
    cmd->add_option("--out", opts.out_dir, "output directory");
    cmd->add_option("--format", opts.format, "output format: kv or json")
        ->check(CLI::IsMember({"kv", "json"}));
    cmd->add_option("--seed", opts.seed, "master seed override")
        ->each([&opts](const std::string&) { opts.seed_set = true; });
    cmd->add_option("--scenario", opts.scenario, "scenario override: stable or early")
        ->check(CLI::IsMember({"stable", "early"}));
    cmd->add_option("--set", opts.overrides, "config override as key=value (repeatable)");
}

ExperimentConfig build_config(const CommonOpts& opts) {
    KvDoc doc;
    if (!opts.config_path.empty()) doc = KvDoc::load(opts.config_path);
    // flags override file values
    if (opts.seed_set) doc.set_u64("master_seed", opts.seed);
    if (!opts.scenario.empty()) doc.set("scenario", opts.scenario);
    for (const std::string& kv : opts.overrides) {
        const auto eq = kv.find('=');
        if (eq == std::string::npos || eq == 0)
            throw ConfigError("--set expects key=value, got '" + kv + "'");
        doc.set(kv.substr(0, eq), kv.substr(eq + 1));
    }
    ExperimentConfig config = ExperimentConfig::from_kv(doc);
    config.check_valid();
    return config;
}

ReportFormat format_of(const CommonOpts& opts) {
    return opts.format == "json" ? ReportFormat::Json : ReportFormat::Kv;
}

void print_rates(const Report& report) {
    if (report.fp_rate)
        std::printf("fp_rate %.4f +- %.4f\n", report.fp_rate->mean, report.fp_rate->stddev);
    else
        std::printf("fp_rate n/a\n");
    if (report.fn_rate)
        std::printf("fn_rate %.4f +- %.4f\n", report.fn_rate->mean, report.fn_rate->stddev);
    else
        std::printf("fn_rate n/a\n");
}

int cmd_run(const CommonOpts& opts) {
    const ExperimentConfig config = build_config(opts);
    const Report report = run_experiment(config);
    const EmittedFiles files = emit_report(report, format_of(opts), opts.out_dir);
    print_rates(report);
    std::printf("summary %s\n", files.summary.c_str());
    for (const std::string& t : files.round_tables) std::printf("rounds  %s\n", t.c_str());
    return 0;
}

int cmd_sweep(const CommonOpts& opts, const std::vector<int>& lookbacks,
              const std::vector<int>& quorums, const std::vector<double>& shares) {
    const ExperimentConfig base = build_config(opts);
    SweepGrid grid{lookbacks, quorums, shares};
    const std::vector<Report> reports = sweep(base, grid);
    for (const Report& r : reports) {
        std::printf("lookback=%s quorum=%s share=%s  ",
                    r.config_echo.get_string("defense.lookback", "?").c_str(),
                    r.config_echo.get_string("defense.quorum", "?").c_str(),
                    r.config_echo.get_string("split.client_share", "?").c_str());
        print_rates(r);
        emit_report(r, format_of(opts), opts.out_dir);
    }
    const std::string summary = emit_sweep_summary(reports, opts.out_dir);
    std::printf("sweep summary %s\n", summary.c_str());
    return 0;
}

int cmd_report(const std::string& input, const std::string& out_dir, const std::string& format) {
    const Report report = parse_report_json(input);
    const EmittedFiles files = emit_report(
        report, format == "json" ? ReportFormat::Json : ReportFormat::Kv, out_dir);
    std::printf("summary %s\n", files.summary.c_str());
    for (const std::string& t : files.round_tables) std::printf("rounds  %s\n", t.c_str());
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Federated-learning poisoning simulator with a feedback-loop defense"};
    app.require_subcommand(1);

    CommonOpts run_opts;
    CLI::App* run = app.add_subcommand("run", "run one experiment");
    add_common(run, run_opts);

    CommonOpts sweep_opts;
    std::vector<int> lookbacks, quorums;
    std::vector<double> shares;
    CLI::App* sw = app.add_subcommand("sweep", "run a parameter grid");
    add_common(sw, sweep_opts);
    sw->add_option("--lookbacks", lookbacks, "lookback values to sweep");
    sw->add_option("--quorums", quorums, "quorum values to sweep");
    sw->add_option("--shares", shares, "client share values to sweep");

    std::string report_input, report_out = "out", report_format = "kv";
    CLI::App* rep = app.add_subcommand("report", "reformat an existing json report");
    rep->add_option("--input", report_input, "json report file")->required();
    rep->add_option("--out", report_out, "output directory");
    rep->add_option("--format", report_format, "output format: kv or json")
        ->check(CLI::IsMember({"kv", "json"}));

    CLI11_PARSE(app, argc, argv);

    try {
        if (run->parsed()) return cmd_run(run_opts);
        if (sw->parsed()) return cmd_sweep(sweep_opts, lookbacks, quorums, shares);
        if (rep->parsed()) return cmd_report(report_input, report_out, report_format);
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
    return 0;
}
