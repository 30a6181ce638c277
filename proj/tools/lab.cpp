// lab: run one experiment from a JSON config and write its tables and plots.
//
//   lab <experiment> [--config FILE] [--seed N] [--out DIR] [--format csv|json]
//   lab fit --csv FILE --observable NAME
//
// Without --out the table goes to stdout. Exit codes: 0 ok, 2 config error, 3 budget error.

#include <cstdio>
#include <iostream>
#include <optional>

#include "CLI11.hpp"

#include "isinglab/harness.hpp"

using namespace isinglab;

namespace {

struct RunOptions {
    std::string config;
    std::optional<std::uint64_t> seed;
    std::optional<std::string> out, format;
    std::vector<int> sizes;
    std::optional<long> replicas;
    std::optional<std::string> beta;
    bool no_plots = false;
};

ExperimentConfig make_config(const std::string& kind, const RunOptions& o)
{
    ExperimentConfig c;
    if (!o.config.empty()) {
        c = load_config(o.config);
        if (c.experiment != kind) throw ConfigError("config is for '" + c.experiment + "', not '" + kind + "'");
    } else {
        c.experiment = kind;
        c.sizes = kind == "spectrum" ? std::vector<int>{2, 3} : std::vector<int>{8, 16, 32};
        c.out = "";
    }
    if (o.seed) c.seed = *o.seed;
    if (o.format) c.format = *o.format;
    if (!o.sizes.empty()) c.sizes = o.sizes;
    if (o.replicas) c.replicas = *o.replicas;
    if (o.beta) {
        if (*o.beta == "inf")
            c.beta = kInf;
        else
            try {
                c.beta = std::stod(*o.beta);
            } catch (const std::exception&) {
                throw ConfigError("bad --beta value " + *o.beta);
            }
    }
    if (o.out) c.out = *o.out;
    validate(c);
    return c;
}

int run(const std::string& kind, const RunOptions& o)
{
    ExperimentConfig c = make_config(kind, o);
    ResultTable t = run_experiment(c);
    bool to_stdout = !o.out && o.config.empty();
    if (to_stdout) {
        std::cout << (c.format == "json" ? to_json(t).dump(2) + "\n" : to_csv(t));
        return 0;
    }
    for (const std::string& p : emit_report(t, c.out, c.format, c.experiment, !o.no_plots)) std::cerr << "wrote " << p << "\n";
    return 0;
}

int fit(const std::string& csv, const std::string& obs)
{
    ResultTable t = read_csv(csv);
    ScalingFit f = scaling_fit(t, obs);
    std::printf("observable %s\n", obs.c_str());
    for (std::size_t i = 0; i < f.sizes.size(); ++i) std::printf("  L=%d median=%.6g\n", f.sizes[i], f.medians[i]);
    std::printf("slope %.4f  95%% CI [%.4f, %.4f]  intercept %.4f  r2 %.5f\n", f.slope, f.ci_lo, f.ci_hi, f.intercept, f.r2);
    return 0;
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Experiments on zero-temperature Glauber dynamics and friends"};
    app.require_subcommand(1);
    RunOptions ro;
    for (const std::string& kind : experiment_kinds()) {
        CLI::App* sub = app.add_subcommand(kind, "run the " + kind + " experiment");
        sub->add_option("--config", ro.config, "JSON config file")->check(CLI::ExistingFile);
        sub->add_option("--seed", ro.seed, "master seed (overrides the config)");
        sub->add_option("--out", ro.out, "output directory; stdout when neither --out nor --config is given");
        sub->add_option("--format", ro.format, "csv or json")->check(CLI::IsMember({"csv", "json"}));
        sub->add_option("--sizes", ro.sizes, "size sweep");
        sub->add_option("--replicas", ro.replicas, "replicas per size");
        sub->add_option("--beta", ro.beta, "inverse temperature, or inf");
        sub->add_flag("--no-plots", ro.no_plots, "skip SVG output");
    }
    std::string csv, obs;
    CLI::App* fsub = app.add_subcommand("fit", "log-log fit of median(observable) against L");
    fsub->add_option("--csv", csv, "result table")->required()->check(CLI::ExistingFile);
    fsub->add_option("--observable", obs, "observable name")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }
    try {
        if (fsub->parsed()) return fit(csv, obs);
        for (CLI::App* s : app.get_subcommands()) return run(s->get_name(), ro);
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const BudgetError& e) {
        std::cerr << "budget exceeded: " << e.what() << "\n";
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
