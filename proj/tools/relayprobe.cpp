/*
   Copyright 2026 The relayprobe Authors

   Licensed under the Apache License, Version 2.0 (the "License");
   you may not use this file except in compliance with the License.
   You may obtain a copy of the License at

       http://www.apache.org/licenses/LICENSE-2.0

   Unless required by applicable law or agreed to in writing, software
   distributed under the License is distributed on an "AS IS" BASIS,
   WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
   See the License for the specific language governing permissions and
   limitations under the License.
*/

// relayprobe: optimal relay probing solver and protocol simulator.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include "CLI11.hpp"

#include "relayprobe/relayprobe.hpp"

namespace {

using namespace relayprobe;

constexpr int kExitFailure = 1;
constexpr int kExitUsage = 2;

struct GlobalFlags {
    std::optional<std::uint64_t> seed;
    std::optional<std::uint64_t> periods;
    unsigned workers = 1;
    std::string out;
    std::size_t samples = 1'000'000;
};

/// Writes `text` to the --out path, or stdout when none was given.
void emit(const GlobalFlags& flags, const std::string& text)
{
    if (flags.out.empty()) {
        std::cout << text;
        return;
    }
    std::ofstream out(flags.out, std::ios::binary);
    if (!out) {
        throw ConfigError("cannot write output file: " + flags.out);
    }
    out << text;
}

int cmd_solve(const GlobalFlags& flags, const std::string& config_path, const std::string& dist_name,
              const std::string& samples_in, const std::string& samples_out)
{
    const auto cfg = load_scenario(config_path);
    DistMode mode = cfg.channel_mode == ChannelMode::onoff ? DistMode::onoff : DistMode::empirical;
    if (!dist_name.empty()) {
        mode = parse_dist_mode(dist_name);
    }
    const std::uint64_t seed = flags.seed.value_or(1);
    const auto dist = !samples_in.empty() ? load_empirical(samples_in, cfg.se_cap)
                                          : make_distribution(cfg, mode, flags.samples, seed, flags.workers);
    if (!samples_out.empty()) {
        save_empirical(dist, samples_out);
    }

    const auto sol = solve_mu_star(dist, ProbingCosts::from(cfg));
    emit(flags, to_json(sol).dump(2) + "\n");

    std::ostream& report = flags.out.empty() ? std::cerr : std::cout;
    report << "mu_star      " << format_number(sol.mu_star) << " bit/s\n"
           << "threshold    " << format_number(sol.threshold_se) << " bit/s/Hz\n";
    if (dist.is_on_off()) {
        report << "genie_ratio  " << format_number(genie_ratio_onoff(cfg.p_avail, cfg.tau, cfg.T_data)) << "\n";
    }
    return 0;
}

int cmd_sweep(const GlobalFlags& flags, const std::string& config_path, const std::string& spec_path)
{
    const auto cfg = load_scenario(config_path);
    auto spec = load_sweep_spec(spec_path);
    if (flags.seed) {
        spec.seed = *flags.seed;
    }
    if (flags.periods) {
        spec.n_periods = *flags.periods;
    }
    std::ostringstream csv;
    run_sweep(cfg, spec, {flags.workers, flags.samples}, csv);
    emit(flags, csv.str());
    return 0;
}

int cmd_figure(const GlobalFlags& flags, const std::string& config_path, const std::string& figure_name)
{
    const auto figure = parse_figure_id(figure_name);
    const auto cfg = load_scenario(config_path);
    std::ostringstream csv;
    run_figure(cfg, figure, flags.periods.value_or(100'000), flags.seed.value_or(1),
               {flags.workers, flags.samples}, csv);
    emit(flags, csv.str());
    return 0;
}

int cmd_simulate(const GlobalFlags& flags, const std::string& config_path, const std::string& strategy,
                 const std::string& trace_path)
{
    const auto cfg = load_scenario(config_path);
    const std::uint64_t seed = flags.seed.value_or(1);
    const ExperimentOptions opts{flags.workers, flags.samples};
    OptimalThresholds thresholds(seed, opts);
    const auto policy = make_policy(strategy, cfg, 0.0, thresholds);
    const auto records = simulate_periods(policy, cfg, flags.periods.value_or(100'000), seed, {flags.workers});
    const auto est = summarize(records);
    if (!trace_path.empty()) {
        std::ofstream trace(trace_path, std::ios::binary);
        if (!trace) {
            throw ConfigError("cannot write trace file: " + trace_path);
        }
        write_trace_csv(trace, records);
    }
    const nlohmann::json j = {{"strategy", policy_label(policy)},
                              {"throughput_bps", est.throughput_bps},
                              {"stderr_bps", est.stderr_bps},
                              {"n_periods", est.n_periods},
                              {"total_bits", est.total_bits},
                              {"total_time", est.total_time}};
    emit(flags, j.dump(2) + "\n");
    return 0;
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Optimal relay probing for two-hop mmWave links: solver and simulator"};
    app.require_subcommand(1);
    app.fallthrough();

    GlobalFlags flags;
    app.add_option("--seed", flags.seed, "Random seed");
    app.add_option("--periods", flags.periods, "Simulated periods per point")->check(CLI::Range(30ull, 1ull << 40));
    app.add_option("--workers", flags.workers, "Worker threads (results do not depend on it)")
        ->check(CLI::Range(1u, 1024u));
    app.add_option("--out", flags.out, "Output file (default: stdout)");
    app.add_option("--samples", flags.samples, "Samples in an empirical rate distribution")
        ->check(CLI::Range(std::size_t{1}, std::size_t{1} << 32));

    std::string config_path;

    auto* solve = app.add_subcommand("solve", "Compute the maximum throughput and optimal threshold");
    std::string dist_name, samples_in, samples_out;
    solve->add_option("--config", config_path, "Scenario JSON")->required();
    solve->add_option("--dist", dist_name, "onoff | empirical (default follows channel_mode)");
    solve->add_option("--load-samples", samples_in, "Read an empirical rate sample (.csv or .bin)");
    solve->add_option("--save-samples", samples_out, "Write the empirical rate sample (.csv or .bin)");

    auto* sweep = app.add_subcommand("sweep", "Run a parameter sweep and write CSV");
    std::string spec_path;
    sweep->add_option("--config", config_path, "Scenario JSON")->required();
    sweep->add_option("--spec", spec_path, "Sweep JSON")->required();

    auto* figure = app.add_subcommand("figure", "Run a canonical figure sweep and write CSV");
    std::string figure_name;
    figure->add_option("figure_id", figure_name, "threshold_sweep | strategy_vs_p")->required();
    figure->add_option("--config", config_path, "Scenario JSON")->required();

    auto* simulate = app.add_subcommand("simulate", "Estimate one strategy's throughput");
    std::string strategy = "optimal", trace_path;
    simulate->add_option("--config", config_path, "Scenario JSON")->required();
    simulate->add_option("--strategy", strategy, "optimal | myopic | genie | fixed:<beta> | explicit:<rho>");
    simulate->add_option("--trace", trace_path, "Per-period trace CSV");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    }

    try {
        if (*solve) {
            return cmd_solve(flags, config_path, dist_name, samples_in, samples_out);
        }
        if (*sweep) {
            return cmd_sweep(flags, config_path, spec_path);
        }
        if (*figure) {
            return cmd_figure(flags, config_path, figure_name);
        }
        return cmd_simulate(flags, config_path, strategy, trace_path);
    } catch (const ConfigError& e) {
        std::cerr << "relayprobe: " << e.what() << "\n";
        return kExitUsage;
    } catch (const std::exception& e) {
        std::cerr << "relayprobe: " << e.what() << "\n";
        return kExitFailure;
    }
}
