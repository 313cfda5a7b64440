// meda command line: configure and run adaptation experiment grids against
// the shared library's C interface.

#include <cstdint>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <memory>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <meda/meda.h>

namespace {

struct ConfigHandle {
    meda_config* cfg = nullptr;
    ~ConfigHandle() { meda_config_free(cfg); }
};

[[noreturn]] void die(int code, const std::string& msg) {
    std::cerr << "error: " << msg << "\n";
    std::exit(code);
}

void check(meda_status st, int exit_code) {
    if (st != MEDA_OK)
        die(exit_code, std::string(meda_status_name(st)) + ": " + meda_last_error());
}

// Overrides shared by run/validate/sweep; values are applied to the config
// in the order the flags appear on the command line.
struct Overrides {
    std::vector<std::pair<std::string, std::string>> kv;

    void add(CLI::App* app, bool grids_as_lists) {
        auto opt = [this, app](const char* flag, const char* key, const char* desc) {
            app->add_option_function<std::string>(
                   flag, [this, key](const std::string& v) { kv.emplace_back(key, v); }, desc)
                ->expected(1);
        };
        opt("--scenario", "scenario", "adaptation scenario: us|sup|ss");
        opt("--model", "models", "comma-separated model list (BL,S1,S1M,S1C,S1D,J12,J12M,J12C,J12D)");
        opt("--classifier", "classifiers", "comma-separated classifier list (ridge,nn,dscm)");
        if (!grids_as_lists) {
            opt("--noise", "noise", "feature dropout probability p");
            opt("--lambda", "lambda", "class-loss weight");
            opt("--gamma", "gamma", "domain-loss weight");
        }
        opt("--omega", "omega", "denoiser norm regularizer");
        opt("--delta", "delta", "classifier norm regularizer");
        opt("--alpha", "alpha", "domain-classifier norm regularizer");
        opt("--labeled-per-class", "labeled_per_class", "labeled target rows drawn per class (sup/ss)");
        opt("--seeds", "seeds", "comma-separated seed list");
        opt("--coupling-rule", "coupling_rule", "coupled-expectation rule: exact|paper");
        opt("--sigma", "sigma", "dscm bandwidth");
        opt("--format", "format", "dataset file format: auto|dense|sparse");
        opt("--output", "output", "output directory");
        opt("--max-iters", "max_iters", "joint-optimization iteration cap");
        opt("--rel-tol", "rel_tol", "joint-optimization relative tolerance");
        app->add_flag_callback(
            "--no-standardize", [this] { kv.emplace_back("standardize", "false"); },
            "skip per-feature standardization");
        app->add_flag_callback(
            "--add-bias", [this] { kv.emplace_back("add_bias", "true"); },
            "append a constant feature column");
        app->add_flag_callback(
            "--no-timing", [this] { kv.emplace_back("timing", "false"); },
            "record zero wall times (byte-reproducible outputs)");
    }

    void apply(meda_config* cfg) const {
        for (const auto& [k, v] : kv) check(meda_config_set(cfg, k.c_str(), v.c_str()), 2);
    }
};

meda_config* load_with_overrides(const std::string& path, const Overrides& ov) {
    meda_config* cfg = nullptr;
    check(meda_config_load(path.c_str(), &cfg), 2);
    ov.apply(cfg);
    return cfg;
}

int validate_and_report(const meda_config* cfg, bool print_report) {
    char* report = nullptr;
    int ok = 0;
    check(meda_validate(cfg, &report, &ok), 2);
    if (print_report || !ok) std::cout << report;
    meda_string_free(report);
    return ok;
}

std::string output_dir_of(const meda_config* cfg) {
    // the resolved configuration echo carries the output path
    char* report = nullptr;
    int ok = 0;
    if (meda_validate(cfg, &report, &ok) != MEDA_OK) return "results";
    std::string text(report);
    meda_string_free(report);
    const std::string key = "output = ";
    const auto pos = text.rfind(key);
    if (pos == std::string::npos) return "results";
    const auto end = text.find('\n', pos);
    return text.substr(pos + key.size(), end - pos - key.size());
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"marginalized denoising domain adaptation toolkit"};
    app.require_subcommand(1);

    std::string config_path;
    Overrides run_ov, val_ov, sweep_ov;

    auto* cmd_run = app.add_subcommand("run", "run the configured experiment grid");
    cmd_run->add_option("--config", config_path, "experiment config file")->required();
    run_ov.add(cmd_run, false);

    auto* cmd_validate = app.add_subcommand("validate", "check a config without fitting");
    cmd_validate->add_option("--config", config_path, "experiment config file")->required();
    val_ov.add(cmd_validate, false);

    auto* cmd_synth = app.add_subcommand("synth", "generate a synthetic shifted domain pair");
    std::string synth_out = "synth";
    std::uint64_t synth_seed = 0;
    std::size_t synth_dim = 20, synth_per_class = 50;
    int synth_classes = 4;
    double synth_shift = 4.0, synth_rotation = 0.3;
    cmd_synth->add_option("--output", synth_out, "directory for source.csv/target.csv");
    cmd_synth->add_option("--seed", synth_seed, "generator seed");
    cmd_synth->add_option("--dim", synth_dim, "feature dimensionality");
    cmd_synth->add_option("--classes", synth_classes, "number of classes");
    cmd_synth->add_option("--per-class", synth_per_class, "instances per class and domain");
    cmd_synth->add_option("--shift", synth_shift, "norm of the domain translation");
    cmd_synth->add_option("--rotation", synth_rotation, "rotation angle (radians) in a random 2-plane");

    auto* cmd_sweep = app.add_subcommand("sweep", "grid-sweep lambda/gamma/noise");
    cmd_sweep->add_option("--config", config_path, "experiment config file")->required();
    std::string grid_lambda, grid_gamma, grid_noise;
    cmd_sweep->add_option("--lambda", grid_lambda, "comma-separated lambda grid");
    cmd_sweep->add_option("--gamma", grid_gamma, "comma-separated gamma grid");
    cmd_sweep->add_option("--noise", grid_noise, "comma-separated dropout grid");
    sweep_ov.add(cmd_sweep, true);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? 0 : 2;
    }

    if (cmd_synth->parsed()) {
        check(meda_synth_write(synth_seed, synth_dim, synth_classes, synth_per_class, synth_shift,
                               synth_rotation, synth_out.c_str()),
              1);
        std::cout << "wrote " << synth_out << "/source.csv and " << synth_out << "/target.csv\n";
        return 0;
    }

    if (cmd_validate->parsed()) {
        ConfigHandle h{load_with_overrides(config_path, val_ov)};
        return validate_and_report(h.cfg, true) ? 0 : 2;
    }

    if (cmd_run->parsed()) {
        ConfigHandle h{load_with_overrides(config_path, run_ov)};
        if (!validate_and_report(h.cfg, false)) return 2;
        int failed = 0;
        check(meda_run(h.cfg, &failed), 1);
        const std::string out_dir = output_dir_of(h.cfg);
        std::ifstream agg(out_dir + "/aggregate.txt");
        std::string line;
        while (std::getline(agg, line))
            if (!line.empty() && line[0] != '#') std::cout << line << "\n";
        std::cout << "wrote " << out_dir << "/records.csv and " << out_dir << "/aggregate.txt\n";
        if (failed > 0) {
            std::cerr << failed << " cell(s) failed; see " << out_dir << "/failures.txt\n";
            return 1;
        }
        return 0;
    }

    if (cmd_sweep->parsed()) {
        ConfigHandle h{load_with_overrides(config_path, sweep_ov)};
        if (!validate_and_report(h.cfg, false)) return 2;
        check(meda_sweep(h.cfg, grid_lambda.c_str(), grid_gamma.c_str(), grid_noise.c_str()), 1);
        std::cout << "wrote " << output_dir_of(h.cfg) << "/sweep.csv\n";
        return 0;
    }

    return 2;
}
