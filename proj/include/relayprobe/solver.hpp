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

// Maximum throughput of the probe-then-transmit protocol.
//
// With bandwidth W, data time T, beam-training time tau and per-hop
// availability p, the best achievable long-run throughput mu* is the unique
// root of
//
//   h(mu) = W T E[(R - mu/W)^+] - mu tau (1 + p),
//
// and the optimal rule stops at the first relay whose rate is >= mu*/W.
// h is convex and strictly decreasing, so Newton's method started at or
// below the root climbs monotonically onto it. Written out, the Newton
// step is the renewal ratio of the threshold rule at rho = mu/W:
//
//   mu' = W T E[R; R >= rho] / (T P(R >= rho) + tau (1 + p)).

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <string>

#include "json.hpp"

#include "relayprobe/errors.hpp"
#include "relayprobe/scenario.hpp"
#include "relayprobe/sedist.hpp"

namespace relayprobe {

/// Time and bandwidth parameters that price one probe.
struct ProbingCosts {
    double bandwidth_hz = 1.0;
    double data_time_s = 1.0;
    double probe_time_s = 0.01;
    double p_avail = 1.0;

    static ProbingCosts from(const ScenarioConfig& cfg)
    {
        return {cfg.bandwidth_W, cfg.T_data, cfg.tau, cfg.p_avail};
    }

    /// Expected beam-training time per probed relay, tau (1 + p).
    double expected_probe_time() const { return probe_time_s * (1.0 + p_avail); }
};

inline void validate(const ProbingCosts& c)
{
    if (!(c.bandwidth_hz > 0.0) || !(c.data_time_s > 0.0) || !(c.probe_time_s >= 0.0)) {
        throw DomainError("probing costs: need W > 0, T > 0 and tau >= 0");
    }
    if (!(c.p_avail > 0.0 && c.p_avail <= 1.0)) {
        throw DomainError("probing costs: p_avail must lie in (0, 1]");
    }
}

enum class SolveMethod { closed_form, newton_ratio, bisection, literal_fixed_point };

inline const char* to_string(SolveMethod m)
{
    switch (m) {
    case SolveMethod::closed_form: return "closed_form";
    case SolveMethod::newton_ratio: return "newton_ratio";
    case SolveMethod::bisection: return "bisection";
    case SolveMethod::literal_fixed_point: return "literal_fixed_point";
    }
    return "unknown";
}

struct StoppingSolution {
    double mu_star = 0.0;      // bit/s
    double threshold_se = 0.0; // bit/s/Hz, always mu_star / W
    std::uint32_t iterations = 0;
    double residual = 0.0;     // |h(mu_star)|, bit/s
    SolveMethod method = SolveMethod::newton_ratio;
};

struct SolverSettings {
    enum class Iteration {
        newton_ratio,
        /// mu' = W T E[(R - mu/W)^+] / (tau (1 + p)). Its slope at the root is
        /// T P(R >= mu*/W) / (tau (1 + p)), which is usually far above one, so
        /// it oscillates. Kept for demonstrations only.
        literal_fixed_point,
    };

    double rel_tol = 1e-10;
    std::uint32_t max_iter = 100;
    double mu_init = 0.0;
    Iteration iteration = Iteration::newton_ratio;
};

inline void validate(const SolverSettings& s)
{
    if (!(s.rel_tol > 0.0) || s.max_iter < 1 || !(s.mu_init >= 0.0)) {
        throw DomainError("solver settings: need rel_tol > 0, max_iter >= 1 and mu_init >= 0");
    }
}

/// h(mu); positive below mu*, negative above.
inline double fixed_point_gap(const SeDistribution& dist, double mu, const ProbingCosts& c)
{
    const double w = c.bandwidth_hz;
    return w * c.data_time_s * expected_excess(dist, mu / w) - mu * c.expected_probe_time();
}

/// One Newton step on h, i.e. the throughput of the threshold rule rho = mu/W.
inline double newton_ratio_step(const SeDistribution& dist, double mu, const ProbingCosts& c)
{
    const double w = c.bandwidth_hz;
    const double rho = mu / w;
    const double time = c.data_time_s * tail_prob(dist, rho) + c.expected_probe_time();
    if (time == 0.0) {
        return 0.0;
    }
    return w * c.data_time_s * mean_above(dist, rho) / time;
}

inline double literal_fixed_point_step(const SeDistribution& dist, double mu, const ProbingCosts& c)
{
    const double w = c.bandwidth_hz;
    return w * c.data_time_s * expected_excess(dist, mu / w) / c.expected_probe_time();
}

namespace detail {

inline void require_positive_mean(const SeDistribution& dist)
{
    if (!(mean(dist) > 0.0)) {
        throw DegenerateDistributionError("rate distribution has zero mean: no relay can carry data");
    }
}

inline StoppingSolution finish(const SeDistribution& dist, double mu, const ProbingCosts& c,
                               std::uint32_t iterations, SolveMethod method)
{
    return {mu, mu / c.bandwidth_hz, iterations, std::abs(fixed_point_gap(dist, mu, c)), method};
}

inline bool close_enough(double prev, double next, double rel_tol)
{
    return std::abs(next - prev) <= rel_tol * std::max(1.0, std::abs(next));
}

} // namespace detail

/// Root of h by bisection on [0, W r_bar]. Returns the smallest root when
/// h has a flat zero stretch (tau = 0).
inline StoppingSolution solve_mu_star_bisection(const SeDistribution& dist, const ProbingCosts& c,
                                                const SolverSettings& settings = {})
{
    validate(c);
    validate(settings);
    detail::require_positive_mean(dist);

    double lo = 0.0;
    double hi = c.bandwidth_hz * dist.r_bar();
    std::uint32_t iterations = 0;
    const std::uint32_t cap = std::max<std::uint32_t>(settings.max_iter, 2000);
    while (!detail::close_enough(lo, hi, 0.25 * settings.rel_tol) && iterations < cap) {
        const double mid = 0.5 * (lo + hi);
        if (mid == lo || mid == hi) {
            break;
        }
        (fixed_point_gap(dist, mid, c) > 0.0 ? lo : hi) = mid;
        ++iterations;
    }
    return detail::finish(dist, 0.5 * (lo + hi), c, iterations, SolveMethod::bisection);
}

/// Maximum throughput mu* and its threshold mu*/W.
///
/// Runs the Newton ratio iteration from settings.mu_init and switches to
/// bisection if |h| ever grows after the first step. Stops once
/// |mu(t+1) - mu(t)| <= rel_tol * max(1, mu(t+1)); `iterations` counts the
/// steps taken including the final confirming one.
inline StoppingSolution solve_mu_star(const SeDistribution& dist, const ProbingCosts& c,
                                      const SolverSettings& settings = {})
{
    validate(c);
    validate(settings);
    detail::require_positive_mean(dist);

    const bool literal = settings.iteration == SolverSettings::Iteration::literal_fixed_point;
    const double scale = c.bandwidth_hz * c.data_time_s * dist.r_bar();
    const double slack = 64.0 * std::numeric_limits<double>::epsilon() * scale;

    double mu = settings.mu_init;
    double gap = std::abs(fixed_point_gap(dist, mu, c));
    for (std::uint32_t t = 1; t <= settings.max_iter; ++t) {
        const double next = literal ? literal_fixed_point_step(dist, mu, c) : newton_ratio_step(dist, mu, c);
        if (!std::isfinite(next)) {
            throw NonConvergenceError("solve_mu_star: iterate is not finite", mu);
        }
        if (detail::close_enough(mu, next, settings.rel_tol)) {
            return detail::finish(dist, next, c, t,
                                  literal ? SolveMethod::literal_fixed_point : SolveMethod::newton_ratio);
        }
        const double next_gap = std::abs(fixed_point_gap(dist, next, c));
        if (!literal && t > 1 && next_gap > gap + slack) {
            auto sol = solve_mu_star_bisection(dist, c, settings);
            sol.iterations += t;
            return sol;
        }
        mu = next;
        gap = next_gap;
    }
    throw NonConvergenceError("solve_mu_star: no convergence within max_iter iterations", mu);
}

/// Threshold rho with E[(R - rho)^+] = mu tau (1 + p) / (W T).
///
/// Closed form for the on/off law; bisection on [0, r_bar] for samples,
/// run until the bracket cannot shrink further in double precision.
inline double solve_rho(const SeDistribution& dist, double mu, const ProbingCosts& c)
{
    validate(c);
    if (!(mu >= 0.0)) {
        throw DomainError("solve_rho: mu must be non-negative");
    }
    const double target = mu * c.expected_probe_time() / (c.bandwidth_hz * c.data_time_s);
    if (target > mean(dist)) {
        throw InfeasibleError("solve_rho: required excess exceeds E[R]; stopping is never profitable");
    }
    if (const auto* law = dist.as_on_off()) {
        return std::max(0.0, law->r_bar - target / (law->p_avail * law->p_avail));
    }
    if (expected_excess(dist, 0.0) <= target) {
        return 0.0;
    }
    double lo = 0.0;           // excess(lo) > target
    double hi = dist.r_bar();  // excess(hi) <= target
    for (int i = 0; i < 2000; ++i) {
        const double mid = 0.5 * (lo + hi);
        if (mid == lo || mid == hi) {
            break;
        }
        (expected_excess(dist, mid) > target ? lo : hi) = mid;
    }
    return hi;
}

/// mu* for the on/off law, W T p^2 r / ((1 + p) tau + p^2 T).
inline StoppingSolution closed_form_onoff(const ProbingCosts& c, double r_bar)
{
    validate(c);
    const double p2 = c.p_avail * c.p_avail;
    const double mu = c.bandwidth_hz * c.data_time_s * p2 * r_bar /
                      ((1.0 + c.p_avail) * c.probe_time_s + p2 * c.data_time_s);
    return detail::finish(SeDistribution::on_off(c.p_avail, r_bar), mu, c, 0, SolveMethod::closed_form);
}

/// mu* / (W r_bar) for the on/off law: the fraction of the genie-aided
/// throughput left after paying for probing.
inline double genie_ratio_onoff(double p_avail, double tau, double data_time)
{
    if (!(p_avail > 0.0 && p_avail <= 1.0)) {
        throw DomainError("genie_ratio_onoff: p_avail must lie in (0, 1]");
    }
    return 1.0 / (1.0 + (1.0 + p_avail) / (p_avail * p_avail) * (tau / data_time));
}

/// V(mu) = E[U_N - mu T_N] under the threshold rule that is optimal for mu.
/// Nonincreasing in mu and zero at mu*.
inline double ordinary_value(const SeDistribution& dist, double mu, const ProbingCosts& c)
{
    const double rho = solve_rho(dist, mu, c);
    const double q = tail_prob(dist, rho);
    if (q == 0.0) {
        throw InfeasibleError("ordinary_value: threshold has zero stopping probability");
    }
    const double wt = c.bandwidth_hz * c.data_time_s;
    return (wt * mean_above(dist, rho) - mu * c.data_time_s * q) / q - mu * c.expected_probe_time() / q;
}

inline nlohmann::json to_json(const StoppingSolution& s)
{
    return {{"mu_star_bps", s.mu_star},
            {"threshold_se", s.threshold_se},
            {"iterations", s.iterations},
            {"residual", s.residual},
            {"method", to_string(s.method)}};
}

} // namespace relayprobe
