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

#pragma once

// Parameter sweeps and figure presets behind the command-line tool.

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <map>
#include <optional>
#include <ostream>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

#include "relayprobe/errors.hpp"
#include "relayprobe/format.hpp"
#include "relayprobe/scenario.hpp"
#include "relayprobe/sedist.hpp"
#include "relayprobe/simulator.hpp"
#include "relayprobe/solver.hpp"

namespace relayprobe {

enum class SweepVariable { threshold, p_avail, tau };

inline const char* to_string(SweepVariable v)
{
    switch (v) {
    case SweepVariable::threshold: return "threshold";
    case SweepVariable::p_avail: return "p_avail";
    case SweepVariable::tau: return "tau";
    }
    return "unknown";
}

struct SweepSpec {
    SweepVariable variable = SweepVariable::p_avail;
    std::vector<double> grid;
    /// optimal | myopic | genie | fixed:<beta> | explicit:<rho> | threshold.
    /// `threshold` runs an explicit threshold at the grid value and is only
    /// meaningful when variable == threshold.
    std::vector<std::string> strategies;
    std::uint64_t n_periods = 100'000;
    std::uint64_t seed = 1;
};

inline void validate(const SweepSpec& spec)
{
    if (spec.grid.empty()) {
        throw ConfigError("sweep grid must not be empty");
    }
    for (std::size_t i = 1; i < spec.grid.size(); ++i) {
        if (!(spec.grid[i] > spec.grid[i - 1])) {
            throw ConfigError("sweep grid must be strictly increasing");
        }
    }
    if (spec.strategies.empty()) {
        throw ConfigError("sweep needs at least one strategy");
    }
    if (spec.n_periods < kDefaultBatches) {
        throw ConfigError("sweep n_periods must be at least 30");
    }
}

inline SweepSpec sweep_spec_from_json(const nlohmann::json& j)
{
    if (!j.is_object()) {
        throw ConfigError("sweep spec must be a JSON object");
    }
    static const std::set<std::string> known = {"variable", "grid", "strategies", "n_periods", "seed"};
    for (const auto& [key, _] : j.items()) {
        if (!known.contains(key)) {
            throw ConfigError("unknown sweep key: " + key);
        }
    }
    SweepSpec spec;
    try {
        const auto variable = j.at("variable").get<std::string>();
        if (variable == "threshold") {
            spec.variable = SweepVariable::threshold;
        } else if (variable == "p_avail") {
            spec.variable = SweepVariable::p_avail;
        } else if (variable == "tau") {
            spec.variable = SweepVariable::tau;
        } else {
            throw ConfigError("sweep variable must be threshold, p_avail or tau");
        }
        spec.grid = j.at("grid").get<std::vector<double>>();
        spec.strategies = j.at("strategies").get<std::vector<std::string>>();
        if (j.contains("n_periods")) {
            spec.n_periods = j.at("n_periods").get<std::uint64_t>();
        }
        if (j.contains("seed")) {
            spec.seed = j.at("seed").get<std::uint64_t>();
        }
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("malformed sweep spec: ") + e.what());
    }
    validate(spec);
    return spec;
}

inline SweepSpec load_sweep_spec(const std::string& path)
{
    std::ifstream in(path);
    if (!in) {
        throw ConfigError("cannot open sweep spec: " + path);
    }
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::parse_error& e) {
        throw ConfigError("sweep spec " + path + " is not valid JSON: " + e.what());
    }
    return sweep_spec_from_json(j);
}

struct ExperimentOptions {
    unsigned workers = 1;
    std::size_t dist_samples = 1'000'000;
    std::uint64_t max_probes = kDefaultMaxProbes;
};

/// Computes and caches optimal thresholds for variations of one scenario.
///
/// On/off scenarios use the analytic law. Geometric scenarios draw an
/// empirical rate distribution once per distinct p_avail (the only swept
/// parameter that changes the law) from the distribution substreams of
/// `seed`.
class OptimalThresholds {
public:
    OptimalThresholds(std::uint64_t seed, const ExperimentOptions& opts) : seed_(seed), opts_(opts) {}

    StoppingSolution solve(const ScenarioConfig& cfg)
    {
        return solve_mu_star(distribution(cfg), ProbingCosts::from(cfg));
    }

    const SeDistribution& distribution(const ScenarioConfig& cfg)
    {
        auto it = cache_.find(cfg.p_avail);
        if (it == cache_.end()) {
            auto dist = cfg.channel_mode == ChannelMode::onoff
                            ? SeDistribution::on_off(cfg.p_avail, cfg.se_cap)
                            : build_empirical(cfg, opts_.dist_samples, seed_, opts_.workers);
            it = cache_.emplace(cfg.p_avail, std::move(dist)).first;
        }
        return it->second;
    }

private:
    std::uint64_t seed_;
    ExperimentOptions opts_;
    std::map<double, SeDistribution> cache_;
};

/// Parses a strategy name. `grid_value` feeds `threshold`; `thresholds`
/// feeds `optimal`.
inline StoppingPolicy make_policy(std::string_view name, const ScenarioConfig& cfg, double grid_value,
                                  OptimalThresholds& thresholds)
{
    auto number_after = [&](std::string_view prefix) -> std::optional<double> {
        if (!name.starts_with(prefix)) {
            return std::nullopt;
        }
        const auto rest = name.substr(prefix.size());
        double value = 0.0;
        auto [ptr, ec] = std::from_chars(rest.data(), rest.data() + rest.size(), value);
        if (ec != std::errc{} || ptr != rest.data() + rest.size()) {
            throw ConfigError("malformed strategy: " + std::string(name));
        }
        return value;
    };

    if (name == "optimal") {
        return OptimalThreshold{thresholds.solve(cfg).threshold_se};
    }
    if (name == "myopic") {
        return Myopic{};
    }
    if (name == "genie") {
        return GenieOnOff{};
    }
    if (name == "threshold") {
        return ExplicitThreshold{grid_value};
    }
    if (auto beta = number_after("fixed:")) {
        if (!(*beta >= 1.0 && *beta <= 4294967295.0) || *beta != std::floor(*beta)) {
            throw ConfigError("fixed:<beta> needs a positive integer beta");
        }
        return FixedBeta{static_cast<std::uint32_t>(*beta)};
    }
    if (auto rho = number_after("explicit:")) {
        return ExplicitThreshold{*rho};
    }
    throw ConfigError("unknown strategy: " + std::string(name));
}

inline constexpr std::string_view kSweepCsvHeader =
    "variable,value,strategy,p,tau,T,W,throughput_bps,stderr_bps,n_periods,seed,error";

namespace detail {

inline void run_sweep_rows(const ScenarioConfig& base, const SweepSpec& spec, const ExperimentOptions& opts,
                           OptimalThresholds& thresholds, std::ostream& csv)
{
    for (double value : spec.grid) {
        ScenarioConfig cfg = base;
        if (spec.variable == SweepVariable::p_avail) {
            cfg.p_avail = value;
        } else if (spec.variable == SweepVariable::tau) {
            cfg.tau = value;
        }
        for (const auto& strategy : spec.strategies) {
            std::string throughput, stderr_bps, error;
            try {
                validate(cfg);
                const auto policy = make_policy(strategy, cfg, value, thresholds);
                const auto est = estimate_throughput(policy, cfg, spec.n_periods, spec.seed,
                                                     {opts.workers, opts.max_probes});
                throughput = format_number(est.throughput_bps);
                stderr_bps = format_number(est.stderr_bps);
            } catch (const std::exception& e) {
                error = e.what();
            }
            csv << to_string(spec.variable) << ',' << format_number(value) << ',' << csv_field(strategy) << ','
                << format_number(cfg.p_avail) << ',' << format_number(cfg.tau) << ','
                << format_number(cfg.T_data) << ',' << format_number(cfg.bandwidth_W) << ',' << throughput
                << ',' << stderr_bps << ',' << spec.n_periods << ',' << spec.seed << ',' << csv_field(error)
                << '\n';
        }
    }
}

} // namespace detail

/// Writes the header and one row per grid point x strategy, in grid order
/// then strategy order. Per-point failures go to the error column.
inline void run_sweep(const ScenarioConfig& cfg, const SweepSpec& spec, const ExperimentOptions& opts,
                      std::ostream& csv)
{
    validate(cfg);
    validate(spec);
    OptimalThresholds thresholds(spec.seed, opts);
    csv << kSweepCsvHeader << '\n';
    detail::run_sweep_rows(cfg, spec, opts, thresholds, csv);
}

enum class FigureId { threshold_sweep, strategy_vs_p };

inline FigureId parse_figure_id(std::string_view name)
{
    if (name == "threshold_sweep") {
        return FigureId::threshold_sweep;
    }
    if (name == "strategy_vs_p") {
        return FigureId::strategy_vs_p;
    }
    throw ConfigError("unknown figure: " + std::string(name) + " (expected threshold_sweep or strategy_vs_p)");
}

inline constexpr double kFigureTaus[] = {0.01, 0.05};
inline constexpr std::size_t kThresholdGridPoints = 21;

/// 21 evenly spaced thresholds on [0.2, 1.0] * top, where top is
/// min(se_cap, 1.5 * the largest optimal threshold over the figure's tau
/// values). For on/off scenarios top is se_cap.
inline std::vector<double> figure_threshold_grid(const ScenarioConfig& cfg, OptimalThresholds& thresholds)
{
    double largest = 0.0;
    for (double tau : kFigureTaus) {
        ScenarioConfig c = cfg;
        c.tau = tau;
        largest = std::max(largest, thresholds.solve(c).threshold_se);
    }
    const double top = std::min(cfg.se_cap, 1.5 * largest);
    std::vector<double> grid(kThresholdGridPoints);
    for (std::size_t i = 0; i < grid.size(); ++i) {
        grid[i] = top * (0.2 + 0.8 * static_cast<double>(i) / static_cast<double>(grid.size() - 1));
    }
    return grid;
}

/// Canonical sweeps:
///   threshold_sweep  explicit-threshold throughput vs threshold, one series
///                    per tau in {10 ms, 50 ms}, p from the scenario;
///   strategy_vs_p    optimal, myopic, fixed:5, fixed:10 over p = 0.1..1.0,
///                    tau from the scenario.
inline void run_figure(const ScenarioConfig& cfg, FigureId figure, std::uint64_t n_periods, std::uint64_t seed,
                       const ExperimentOptions& opts, std::ostream& csv)
{
    validate(cfg);
    OptimalThresholds thresholds(seed, opts);
    csv << kSweepCsvHeader << '\n';
    if (figure == FigureId::strategy_vs_p) {
        SweepSpec spec;
        spec.variable = SweepVariable::p_avail;
        for (int k = 1; k <= 10; ++k) {
            spec.grid.push_back(k / 10.0);
        }
        spec.strategies = {"optimal", "myopic", "fixed:5", "fixed:10"};
        spec.n_periods = n_periods;
        spec.seed = seed;
        validate(spec);
        detail::run_sweep_rows(cfg, spec, opts, thresholds, csv);
        return;
    }
    SweepSpec spec;
    spec.variable = SweepVariable::threshold;
    spec.grid = figure_threshold_grid(cfg, thresholds);
    spec.strategies = {"threshold"};
    spec.n_periods = n_periods;
    spec.seed = seed;
    validate(spec);
    for (double tau : kFigureTaus) {
        ScenarioConfig c = cfg;
        c.tau = tau;
        detail::run_sweep_rows(c, spec, opts, thresholds, csv);
    }
}

/// Distribution used by the solve command.
enum class DistMode { onoff, empirical };

inline DistMode parse_dist_mode(std::string_view name)
{
    if (name == "onoff") {
        return DistMode::onoff;
    }
    if (name == "empirical") {
        return DistMode::empirical;
    }
    throw ConfigError("unknown distribution mode: " + std::string(name) + " (expected onoff or empirical)");
}

inline SeDistribution make_distribution(const ScenarioConfig& cfg, DistMode mode, std::size_t n_samples,
                                        std::uint64_t seed, unsigned workers = 1)
{
    if (mode == DistMode::onoff) {
        return SeDistribution::on_off(cfg.p_avail, cfg.se_cap);
    }
    return build_empirical(cfg, n_samples, seed, workers);
}

} // namespace relayprobe
