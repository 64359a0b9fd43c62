#include <CLI11.hpp>

#include <cstddef>
#include <fstream>
#include <iostream>
#include <string>
#include <utility>
#include <vector>

#include "coxsat/cli.hpp"

namespace {

using KV = std::pair<std::string, std::string>;

/**
 * Every flag funnels into the same (section.key, value) override list the
 * config file feeds, so precedence is a single rule: defaults, then file,
 * then --set, then named flags.
 */
void bind_common(CLI::App* cmd, std::string* config_path, std::vector<KV>* sets,
                 std::vector<KV>* named) {
    cmd->add_option("--config", *config_path,
                    "Configuration file: key = value lines under [sections]");
    cmd->add_option_function<std::vector<std::string>>(
           "--set",
           [sets](const std::vector<std::string>& items) {
               for (const std::string& item : items) {
                   const std::size_t eq = item.find('=');
                   if (eq == std::string::npos || eq == 0)
                       throw CLI::ValidationError(
                           "--set", "expected section.key=value, got '" + item +
                                        "'");
                   sets->emplace_back(item.substr(0, eq), item.substr(eq + 1));
               }
           },
           "Generic override section.key=value (repeatable)")
        ->type_size(1);
    const auto opt = [cmd, named](const char* flag, const char* key,
                                  const char* desc) {
        cmd->add_option_function<std::string>(
            flag,
            [named, key](const std::string& v) { named->emplace_back(key, v); },
            desc);
    };
    const auto flag = [cmd, named](const char* name, const char* key,
                                   const char* desc) {
        cmd->add_flag_function(
            name,
            [named, key](std::int64_t n) {
                if (n > 0) named->emplace_back(key, "true");
            },
            desc);
    };
    opt("--seed", "run.seed", "Master seed");
    opt("--replicates", "run.replicates", "Monte Carlo replicate count");
    opt("--out", "run.out", "Output file (stdout when omitted)");
    opt("--format", "run.format", "Output format: csv or json");
    flag("--verify", "run.verify",
         "Fail (exit 1) if analytic and empirical columns disagree beyond 3 "
         "sigma");
    opt("--threads", "run.threads", "Worker thread cap");
    opt("--model", "model.kind",
        "Constellation model: cox|binomial|regular|walker|shells");
    opt("--lambda", "model.lambda", "Mean orbit count");
    opt("--mu", "model.mu", "Mean satellites per orbit");
    opt("--n", "model.n", "Satellite count for the binomial model");
    opt("--shells", "model.shells",
        "Shell list PLANESxSATS/COCH@ALT:INC_DEG, comma separated");
    opt("--altitude", "geometry.r_a", "Constellation altitude [km]");
    opt("--earth-radius", "geometry.r_e", "Earth radius [km]");
    opt("--alpha", "link.alpha", "Path-loss exponent");
    opt("--m", "link.m", "Nakagami fading shape (integer >= 1)");
    flag("--with-noise", "link.with_noise", "Include thermal noise (SINR)");
    opt("--thresholds", "run.thresholds_db",
        "Threshold grid [dB]: a:b:step or comma list");
    opt("--distances", "run.distances_km",
        "Distance grid [km]: a:b:step, comma list, or auto");
    opt("--lambda-grid", "run.lambda_grid", "Lambda sweep: a:b:step or list");
    opt("--mu-grid", "run.mu_grid", "Mu sweep: a:b:step or list");
    opt("--latitude-deg", "run.latitude_deg", "Observer latitude [deg]");
    opt("--sources", "run.sources", "Columns: analytic, mc, or analytic,mc");
    opt("--metric", "run.metric",
        "simulate metric: coverage|nosat|mean-visible|nearest-ccdf|rate");
    flag("--rate", "run.rate", "coverage: emit the ergodic rate instead");
    opt("--curve-samples", "run.curve_samples",
        "Orbit-set draws behind m > 1 analytic curves");
    opt("--fit-replicates", "fit.replicates",
        "Replicates for measuring the target's moments");
    opt("--fit-altitude", "fit.altitude",
        "Shell altitude of the fitted model [km]");
    flag("--curves", "fit.curves",
         "fit: also write side-by-side coverage curves (needs --out)");
}

struct Command {
    const char* name;
    const char* help;
    int (*run)(const coxsat::RunConfig&);
};

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Downlink analysis for orbit-based satellite constellations"};
    app.set_version_flag("--version", coxsat::kToolVersion);
    app.require_subcommand(1);

    std::string config_path;
    std::vector<KV> sets, named;
    const Command commands[] = {
        {"nosat", "No-visible-satellite probability over a (lambda, mu) grid",
         &coxsat::cmd_nosat},
        {"mean-visible", "Mean visible-satellite count over a (lambda, mu) grid",
         &coxsat::cmd_mean_visible},
        {"nearest-ccdf", "Nearest visible-satellite distance CCDF",
         &coxsat::cmd_nearest_ccdf},
        {"coverage", "SIR/SINR coverage curve over a threshold grid",
         &coxsat::cmd_coverage},
        {"rate", "Ergodic spectral efficiency", &coxsat::cmd_rate},
        {"simulate", "Monte Carlo estimate of one metric for any model",
         &coxsat::cmd_simulate},
        {"fit", "Fit the random-orbit model to a target constellation",
         &coxsat::cmd_fit},
        {"sample", "Export one seeded constellation snapshot",
         &coxsat::cmd_sample},
    };
    std::vector<std::pair<CLI::App*, const Command*>> subs;
    for (const Command& c : commands) {
        CLI::App* sub = app.add_subcommand(c.name, c.help);
        bind_common(sub, &config_path, &sets, &named);
        subs.emplace_back(sub, &c);
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::Success& e) {
        return app.exit(e);  // --help / --version
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    try {
        coxsat::RunConfig cfg;
        if (!config_path.empty()) {
            std::ifstream f(config_path);
            if (!f)
                throw coxsat::ParseError("cannot open config file " +
                                         config_path);
            cfg = coxsat::parse_config(f);
        }
        for (const KV& kv : sets) cfg.apply(kv.first, kv.second);
        for (const KV& kv : named) cfg.apply(kv.first, kv.second);
        cfg.validate();
        for (const auto& [sub, c] : subs)
            if (sub->parsed()) return c->run(cfg);
        std::cerr << "error: no subcommand selected\n";
        return 2;
    } catch (const coxsat::ParseError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
