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

// Monte Carlo simulation of the periodic probe-then-transmit protocol.
//
// A period probes relays one at a time. Probing a relay trains the
// source-relay beam (tau); if that hop is clear the relay-destination beam
// is trained too (another tau). Once the policy stops, data flows for T
// seconds at the selected relay's rate. Long-run throughput is estimated
// by the renewal-reward ratio sum(bits) / sum(time).

#include <algorithm>
#include <cstdint>
#include <exception>
#include <limits>
#include <ostream>
#include <span>
#include <string>
#include <thread>
#include <variant>
#include <vector>

#include "relayprobe/channel.hpp"
#include "relayprobe/errors.hpp"
#include "relayprobe/format.hpp"
#include "relayprobe/scenario.hpp"
#include "relayprobe/stats.hpp"

namespace relayprobe {

/// Stop at the first relay with rate >= threshold_se (= mu*/W).
struct OptimalThreshold {
    double threshold_se = 0.0;
};

/// Stop at the first relay with rate >= rho.
struct ExplicitThreshold {
    double rho = 0.0;
};

/// Stop at the first relay with both hops clear, whatever its rate.
struct Myopic {};

/// Probe exactly beta relays and keep the best.
struct FixedBeta {
    std::uint32_t beta = 1;
};

/// Free and perfect relay knowledge: every period transmits at r_bar.
struct GenieOnOff {};

using StoppingPolicy = std::variant<OptimalThreshold, ExplicitThreshold, Myopic, FixedBeta, GenieOnOff>;

inline void validate(const StoppingPolicy& policy, const ScenarioConfig& cfg)
{
    if (const auto* f = std::get_if<FixedBeta>(&policy); f && f->beta < 1) {
        throw ConfigError("fixed-beta policy needs beta >= 1");
    }
    if (const auto* e = std::get_if<ExplicitThreshold>(&policy);
        e && !(e->rho >= 0.0 && e->rho <= cfg.se_cap)) {
        throw ConfigError("explicit threshold must lie in [0, se_cap]");
    }
    if (const auto* o = std::get_if<OptimalThreshold>(&policy);
        o && !(o->threshold_se >= 0.0 && o->threshold_se <= cfg.se_cap)) {
        throw ConfigError("optimal threshold must lie in [0, se_cap]");
    }
}

/// Short label used in CSV output: optimal, explicit:<rho>, myopic, fixed:<beta>, genie.
inline std::string policy_label(const StoppingPolicy& policy)
{
    struct Labeler {
        std::string operator()(const OptimalThreshold&) const { return "optimal"; }
        std::string operator()(const ExplicitThreshold& e) const { return "explicit:" + format_number(e.rho); }
        std::string operator()(const Myopic&) const { return "myopic"; }
        std::string operator()(const FixedBeta& f) const { return "fixed:" + std::to_string(f.beta); }
        std::string operator()(const GenieOnOff&) const { return "genie"; }
    };
    return std::visit(Labeler{}, policy);
}

/// Both hops of the probed relay can be established.
inline bool myopic_stop_test(bool first_hop_clear, bool second_hop_clear)
{
    return first_hop_clear && second_hop_clear;
}

struct PeriodRecord {
    std::uint64_t n_probed = 0;
    double period_time = 0.0;    // s
    double bits = 0.0;
    double selected_se = 0.0;    // bit/s/Hz of the relay used for data
    double running_max = 0.0;    // best rate seen in the period
    std::uint64_t selected_stage = 0; // 1-based probe index of the relay used
};

inline constexpr std::uint64_t kDefaultMaxProbes = 1'000'000;

/// Runs one period, pulling relays from `next_relay()` (returns RelayProbe).
///
/// Threshold and myopic rules transmit on the relay they stop at; FixedBeta
/// transmits on the best relay probed. The genie record has n_probed = 0
/// and period_time = T since it never probes.
template <class RelaySource>
PeriodRecord run_period(const StoppingPolicy& policy, const ScenarioConfig& cfg, RelaySource&& next_relay,
                        std::uint64_t max_probes = kDefaultMaxProbes)
{
    const double wt = cfg.bandwidth_W * cfg.T_data;
    PeriodRecord rec;
    if (std::holds_alternative<GenieOnOff>(policy)) {
        rec.period_time = cfg.T_data;
        rec.selected_se = rec.running_max = cfg.se_cap;
        rec.bits = wt * cfg.se_cap;
        return rec;
    }

    double probe_time = 0.0;
    for (std::uint64_t n = 1;; ++n) {
        const RelayProbe probe = next_relay();
        probe_time += probe.first_hop_clear ? 2.0 * cfg.tau : cfg.tau;
        if (n == 1 || probe.se > rec.running_max) {
            rec.running_max = probe.se;
            if (std::holds_alternative<FixedBeta>(policy)) {
                rec.selected_stage = n;
            }
        }

        bool stop = false;
        if (const auto* o = std::get_if<OptimalThreshold>(&policy)) {
            stop = probe.se >= o->threshold_se;
        } else if (const auto* e = std::get_if<ExplicitThreshold>(&policy)) {
            stop = probe.se >= e->rho;
        } else if (std::holds_alternative<Myopic>(policy)) {
            stop = myopic_stop_test(probe.first_hop_clear, probe.second_hop_clear);
        } else if (const auto* f = std::get_if<FixedBeta>(&policy)) {
            stop = n >= f->beta;
        }

        if (stop) {
            rec.n_probed = n;
            rec.period_time = probe_time + cfg.T_data;
            if (std::holds_alternative<FixedBeta>(policy)) {
                rec.selected_se = rec.running_max;
            } else {
                rec.selected_se = probe.se;
                rec.selected_stage = n;
            }
            rec.bits = wt * rec.selected_se;
            return rec;
        }
        if (n >= max_probes) {
            throw RunawayPeriodError("period exceeded " + std::to_string(max_probes) +
                                         " probes without stopping (" + policy_label(policy) + ")",
                                     n);
        }
    }
}

/// The threshold rule written with recall: stop once the best rate seen so
/// far reaches rho and use the best relay. Selects the same relay at the
/// same stage as ExplicitThreshold{rho}.
template <class RelaySource>
PeriodRecord run_period_with_recall(double rho, const ScenarioConfig& cfg, RelaySource&& next_relay,
                                    std::uint64_t max_probes = kDefaultMaxProbes)
{
    PeriodRecord rec;
    double probe_time = 0.0;
    for (std::uint64_t n = 1;; ++n) {
        const RelayProbe probe = next_relay();
        probe_time += probe.first_hop_clear ? 2.0 * cfg.tau : cfg.tau;
        if (n == 1 || probe.se > rec.running_max) {
            rec.running_max = probe.se;
            rec.selected_stage = n;
        }
        if (rec.running_max >= rho) {
            rec.n_probed = n;
            rec.period_time = probe_time + cfg.T_data;
            rec.selected_se = rec.running_max;
            rec.bits = cfg.bandwidth_W * cfg.T_data * rec.selected_se;
            return rec;
        }
        if (n >= max_probes) {
            throw RunawayPeriodError("period exceeded the probe limit without stopping", n);
        }
    }
}

/// Relay source for period `period` of a simulation: relay k comes from
/// substream (seed, period, k), so every policy sees the same relays.
class PeriodRelays {
public:
    PeriodRelays(const RelaySampler& sampler, std::uint64_t period) : sampler_(&sampler), period_(period) {}

    RelayProbe operator()()
    {
        if (next_ > std::numeric_limits<std::uint32_t>::max()) {
            throw RunawayPeriodError("relay index space exhausted", next_);
        }
        return sampler_->probe(period_, static_cast<std::uint32_t>(next_++));
    }

private:
    const RelaySampler* sampler_;
    std::uint64_t period_;
    std::uint64_t next_ = 0;
};

struct SimulationOptions {
    unsigned workers = 1;
    std::uint64_t max_probes = kDefaultMaxProbes;
};

struct ThroughputEstimate {
    double throughput_bps = 0.0;
    double stderr_bps = 0.0;
    std::uint64_t n_periods = 0;
    double total_bits = 0.0;
    double total_time = 0.0;
};

namespace detail {

/// Calls body(i) for i in [0, n) split over `workers` contiguous ranges.
/// If any call throws, rethrows the exception of the smallest failing i.
template <class Body>
void parallel_for_ordered(std::uint64_t n, unsigned workers, Body&& body)
{
    workers = static_cast<unsigned>(std::clamp<std::uint64_t>(workers, 1, std::max<std::uint64_t>(n, 1)));
    if (workers == 1) {
        for (std::uint64_t i = 0; i < n; ++i) {
            body(i);
        }
        return;
    }
    std::vector<std::exception_ptr> errors(workers);
    std::vector<std::uint64_t> failed_at(workers, std::numeric_limits<std::uint64_t>::max());
    {
        std::vector<std::jthread> pool;
        const std::uint64_t chunk = (n + workers - 1) / workers;
        for (unsigned w = 0; w < workers; ++w) {
            pool.emplace_back([&, w] {
                const std::uint64_t begin = std::min(n, w * chunk);
                const std::uint64_t end = std::min(n, begin + chunk);
                for (std::uint64_t i = begin; i < end; ++i) {
                    try {
                        body(i);
                    } catch (...) {
                        errors[w] = std::current_exception();
                        failed_at[w] = i;
                        return;
                    }
                }
            });
        }
    }
    const auto first = std::min_element(failed_at.begin(), failed_at.end()) - failed_at.begin();
    if (errors[first]) {
        std::rethrow_exception(errors[first]);
    }
}

} // namespace detail

/// Simulates periods 0..n-1 of `policy`. The result depends only on
/// (policy, cfg, n_periods, seed), never on opts.workers.
inline std::vector<PeriodRecord> simulate_periods(const StoppingPolicy& policy, const ScenarioConfig& cfg,
                                                  std::uint64_t n_periods, std::uint64_t seed,
                                                  const SimulationOptions& opts = {})
{
    validate(cfg);
    validate(policy, cfg);
    const RelaySampler sampler(cfg, seed, StreamDomain::simulation);
    std::vector<PeriodRecord> records(n_periods);
    detail::parallel_for_ordered(n_periods, opts.workers, [&](std::uint64_t i) {
        records[i] = run_period(policy, cfg, PeriodRelays(sampler, i), opts.max_probes);
    });
    return records;
}

/// Renewal-reward estimate with a 30-batch batch-means standard error.
inline ThroughputEstimate summarize(std::span<const PeriodRecord> records)
{
    if (records.size() < kDefaultBatches) {
        throw DomainError("summarize: need at least 30 periods");
    }
    std::vector<double> bits(records.size()), time(records.size());
    ThroughputEstimate est;
    for (std::size_t i = 0; i < records.size(); ++i) {
        bits[i] = records[i].bits;
        time[i] = records[i].period_time;
        est.total_bits += bits[i];
        est.total_time += time[i];
    }
    est.n_periods = records.size();
    est.throughput_bps = est.total_bits / est.total_time;
    est.stderr_bps = batch_means_ratio_stderr(bits, time);
    return est;
}

inline ThroughputEstimate estimate_throughput(const StoppingPolicy& policy, const ScenarioConfig& cfg,
                                              std::uint64_t n_periods, std::uint64_t seed,
                                              const SimulationOptions& opts = {})
{
    if (n_periods < kDefaultBatches) {
        throw DomainError("estimate_throughput: n_periods must be at least 30");
    }
    const auto records = simulate_periods(policy, cfg, n_periods, seed, opts);
    return summarize(records);
}

/// Per-period trace: period_index,n_probed,period_time_s,bits,selected_se.
inline void write_trace_csv(std::ostream& out, std::span<const PeriodRecord> records)
{
    out << "period_index,n_probed,period_time_s,bits,selected_se\n";
    for (std::size_t i = 0; i < records.size(); ++i) {
        const auto& r = records[i];
        out << i << ',' << r.n_probed << ',' << format_number(r.period_time) << ','
            << format_number(r.bits) << ',' << format_number(r.selected_se) << '\n';
    }
}

} // namespace relayprobe
