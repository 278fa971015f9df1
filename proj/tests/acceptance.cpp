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

// Acceptance suite. Usage: acceptance [1|2|3|4|4g|5|6|7|8|9|all]...
// Prints one PASS/FAIL line per criterion; exits 1 if any failed.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "relayprobe/relayprobe.hpp"

namespace {

using namespace relayprobe;
using Clock = std::chrono::steady_clock;

struct Outcome {
    bool pass = true;
    std::string detail;
};

double seconds_since(Clock::time_point start)
{
    return std::chrono::duration<double>(Clock::now() - start).count();
}

std::string fmt(const char* pattern, auto... args)
{
    char buf[512];
    std::snprintf(buf, sizeof buf, pattern, args...);
    return buf;
}

void fail(Outcome& out, const std::string& why)
{
    if (out.pass) {
        out.detail.clear();
    }
    out.pass = false;
    if (out.detail.size() < 400) {
        out.detail += (out.detail.empty() ? "" : "; ") + why;
    }
}

ScenarioConfig onoff_config(double p, double tau, double r_bar)
{
    ScenarioConfig cfg;
    cfg.channel_mode = ChannelMode::onoff;
    cfg.bandwidth_W = 1.0;
    cfg.T_data = 1.0;
    cfg.p_avail = p;
    cfg.tau = tau;
    cfg.se_cap = r_bar;
    return cfg;
}

double combined(double a, double b)
{
    return std::sqrt(a * a + b * b);
}

// 1. Closed-form oracle on the on/off grid, analytic and sampled laws.
Outcome criterion1()
{
    Outcome out;
    const auto start = Clock::now();
    double worst_rel = 0.0, worst_z = 0.0;
    for (int k = 1; k <= 10; ++k) {
        const double p = k / 10.0;
        for (double r_bar : {1.0, 4.0}) {
            const auto cfg = onoff_config(p, 0.01, r_bar);
            const auto sampled = build_empirical(cfg, 1'000'000, 1000 + k);
            const auto analytic = SeDistribution::on_off(p, r_bar);
            for (double tau : {0.01, 0.05}) {
                const ProbingCosts c{1.0, 1.0, tau, p};
                const double exact = closed_form_onoff(c, r_bar).mu_star;
                const double a = solve_mu_star(analytic, c).mu_star;
                const double rel = std::abs(a - exact) / exact;
                worst_rel = std::max(worst_rel, rel);
                if (rel > 1e-9) {
                    fail(out, fmt("analytic p=%.1f tau=%.2f r=%.0f rel err %.2e", p, tau, r_bar, rel));
                }
                // Delta-method standard error of mu* through the sampled atom
                // frequency q_hat ~ Binomial(n, p^2) / n.
                const double q = p * p, n = 1e6;
                const double denom = (1.0 + p) * tau + q;
                const double dmu_dq = r_bar * (1.0 + p) * tau / (denom * denom);
                const double se = dmu_dq * std::sqrt(q * (1.0 - q) / n);
                const double e = solve_mu_star(sampled, c).mu_star;
                const double tol = std::max(3.0 * se, 1e-9 * exact);
                worst_z = std::max(worst_z, se > 0 ? std::abs(e - exact) / se : 0.0);
                if (std::abs(e - exact) > tol) {
                    fail(out, fmt("sampled p=%.1f tau=%.2f r=%.0f off by %.3g (tol %.3g)", p, tau, r_bar,
                                  std::abs(e - exact), tol));
                }
            }
        }
    }
    const double elapsed = seconds_since(start);
    if (elapsed >= 5.0) {
        fail(out, fmt("runtime %.2f s >= 5 s", elapsed));
    }
    if (out.pass) {
        out.detail = fmt("40 points, analytic max rel err %.2e, sampled max |z| %.2f, %.2f s", worst_rel, worst_z,
                         elapsed);
    }
    return out;
}

// 2. Simulated optimal-threshold throughput against the closed form.
Outcome criterion2()
{
    Outcome out;
    const auto start = Clock::now();
    double worst_rel = 0.0;
    for (double p : {0.3, 0.5, 0.9}) {
        for (double tau : {0.01, 0.05}) {
            const auto cfg = onoff_config(p, tau, 2.0);
            const double exact = closed_form_onoff(ProbingCosts::from(cfg), cfg.se_cap).mu_star;
            const auto est = estimate_throughput(OptimalThreshold{exact / cfg.bandwidth_W}, cfg, 100'000, 2);
            const double err = std::abs(est.throughput_bps - exact);
            worst_rel = std::max(worst_rel, err / exact);
            if (err > 0.01 * exact || err > 3.0 * est.stderr_bps) {
                fail(out, fmt("p=%.1f tau=%.2f sim %.6f vs %.6f (stderr %.2e)", p, tau, est.throughput_bps, exact,
                              est.stderr_bps));
            }
        }
    }
    const double elapsed = seconds_since(start);
    if (elapsed >= 30.0) {
        fail(out, fmt("runtime %.2f s >= 30 s", elapsed));
    }
    if (out.pass) {
        out.detail = fmt("6 points, max rel err %.2e, %.2f s", worst_rel, elapsed);
    }
    return out;
}

// 3. The ordinary value vanishes at mu*, analytically and in simulation.
Outcome criterion3()
{
    Outcome out;
    double worst_z = 0.0;
    auto check = [&](const std::string& name, const SeDistribution& dist, const ScenarioConfig& cfg,
                     std::uint64_t seed) {
        const auto costs = ProbingCosts::from(cfg);
        const auto sol = solve_mu_star(dist, costs);
        const double scale = cfg.bandwidth_W * cfg.T_data * dist.r_bar();
        const double v = ordinary_value(dist, sol.mu_star, costs);
        if (std::abs(v) > 1e-8 * scale) {
            fail(out, fmt("%s: |V(mu*)| = %.3e", name.c_str(), std::abs(v)));
        }
        const auto records = simulate_periods(OptimalThreshold{sol.threshold_se}, cfg, 100'000, seed);
        std::vector<double> net(records.size());
        double mean = 0.0;
        for (std::size_t i = 0; i < records.size(); ++i) {
            net[i] = records[i].bits - sol.mu_star * records[i].period_time;
            mean += net[i] / static_cast<double>(records.size());
        }
        const double se = batch_means_stderr(net, kDefaultBatches);
        const double z = std::abs(mean) / se;
        worst_z = std::max(worst_z, z);
        if (!(z <= 3.0)) {
            fail(out, fmt("%s: E[U - mu* T] = %.4g, stderr %.3g", name.c_str(), mean, se));
        }
    };
    for (double p : {0.3, 0.5, 0.9}) {
        for (double tau : {0.01, 0.05}) {
            const auto cfg = onoff_config(p, tau, 2.0);
            check(fmt("on/off p=%.1f tau=%.2f", p, tau), SeDistribution::on_off(p, 2.0), cfg, 3);
        }
    }
    ScenarioConfig geo;
    geo.p_avail = 0.5;
    check("geometric p=0.5", build_empirical(geo, 1'000'000, 3), geo, 3);
    if (out.pass) {
        out.detail = fmt("7 scenarios, max |z| %.2f", worst_z);
    }
    return out;
}

struct Series {
    std::vector<double> grid;
    std::vector<ThroughputEstimate> est;
    std::size_t argmax() const
    {
        std::size_t best = 0;
        for (std::size_t i = 1; i < est.size(); ++i) {
            if (est[i].throughput_bps > est[best].throughput_bps) {
                best = i;
            }
        }
        return best;
    }
    std::size_t nearest(double x) const
    {
        std::size_t best = 0;
        for (std::size_t i = 1; i < grid.size(); ++i) {
            if (std::abs(grid[i] - x) < std::abs(grid[best] - x)) {
                best = i;
            }
        }
        return best;
    }
};

// Threshold sweep check shared by the on/off and geometric variants.
Outcome threshold_sweep_check(bool geometric)
{
    Outcome out;
    const double r_bar = 2.0;
    const std::vector<double> ps = {0.5, 0.9};
    const std::vector<double> taus = {0.01, 0.05};
    OptimalThresholds thresholds(4, {});

    auto config = [&](double p, double tau) {
        if (!geometric) {
            return onoff_config(p, tau, r_bar);
        }
        ScenarioConfig cfg;
        cfg.p_avail = p;
        cfg.tau = tau;
        return cfg;
    };

    // Common grid on [0.2, 1.0] * top.
    double top = r_bar;
    if (geometric) {
        double largest = 0.0;
        for (double p : ps) {
            for (double tau : taus) {
                largest = std::max(largest, thresholds.solve(config(p, tau)).threshold_se);
            }
        }
        top = 1.5 * largest;
    }
    std::vector<double> grid(21);
    for (std::size_t i = 0; i < grid.size(); ++i) {
        grid[i] = top * (0.2 + 0.8 * static_cast<double>(i) / 20.0);
    }

    std::map<std::pair<double, double>, std::size_t> peak;
    std::string summary;
    for (double p : ps) {
        for (double tau : taus) {
            const auto cfg = config(p, tau);
            const double rho_star = thresholds.solve(cfg).threshold_se;
            Series s{grid, {}};
            for (double rho : grid) {
                s.est.push_back(estimate_throughput(ExplicitThreshold{rho}, cfg, 100'000, 4));
            }
            const auto at = [&](std::size_t i) { return s.est[i]; };
            const std::size_t c = s.nearest(rho_star);
            const std::size_t lo = s.nearest(0.75 * rho_star);
            const std::size_t hi = s.nearest(1.25 * rho_star);
            for (std::size_t other : {lo, hi}) {
                const double gap = at(c).throughput_bps - at(other).throughput_bps;
                const double se = combined(at(c).stderr_bps, at(other).stderr_bps);
                if (other == c || !(gap > 3.0 * se)) {
                    fail(out, fmt("p=%.1f tau=%.2f: T(%.3f)=%.6g vs T(%.3f)=%.6g, gap %.3g <= 3 se %.3g", p, tau,
                                  grid[c], at(c).throughput_bps, grid[other], at(other).throughput_bps, gap,
                                  3.0 * se));
                }
            }
            peak[{p, tau}] = s.argmax();
            summary += fmt("%s(p=%.1f,tau=%.2f) rho*=%.3f peak=%.3f", summary.empty() ? "" : " ", p, tau, rho_star,
                           grid[s.argmax()]);
        }
    }
    // A higher threshold for cheaper probing and for better availability.
    for (double p : ps) {
        if (!(peak[{p, 0.01}] > peak[{p, 0.05}])) {
            fail(out, fmt("p=%.1f: peak does not move up as tau falls", p));
        }
    }
    for (double tau : taus) {
        if (!(peak[{0.9, tau}] > peak[{0.5, tau}])) {
            fail(out, fmt("tau=%.2f: peak does not move up as p rises", tau));
        }
    }
    if (out.pass) {
        out.detail = summary;
    }
    return out;
}

// 4. Threshold optimality on the on/off law, literally as stated.
Outcome criterion4()
{
    return threshold_sweep_check(false);
}

// 4g. The same check on the geometric scenario, where throughput does
// depend on the threshold within the support.
Outcome criterion4g()
{
    return threshold_sweep_check(true);
}

// 5. Strategy ordering on the geometric scenario.
Outcome criterion5()
{
    Outcome out;
    ScenarioConfig base;
    base.tau = 0.01;
    OptimalThresholds thresholds(5, {});
    const std::vector<std::string> names = {"optimal", "myopic", "fixed:5", "fixed:10"};
    std::string summary;
    for (int k = 1; k <= 10; ++k) {
        ScenarioConfig cfg = base;
        cfg.p_avail = k / 10.0;
        std::map<std::string, ThroughputEstimate> est;
        for (const auto& name : names) {
            est[name] = estimate_throughput(make_policy(name, cfg, 0.0, thresholds), cfg, 100'000, 5);
        }
        const auto& opt = est["optimal"];
        for (const auto& name : names) {
            const auto& h = est[name];
            if (opt.throughput_bps < h.throughput_bps - 3.0 * combined(opt.stderr_bps, h.stderr_bps)) {
                fail(out, fmt("p=%.1f: optimal below %s", cfg.p_avail, name.c_str()));
            }
        }
        const auto& my = est["myopic"];
        if (k == 1) {
            const double se = combined(opt.stderr_bps, my.stderr_bps);
            const double z = (opt.throughput_bps - my.throughput_bps) / se;
            summary += fmt("p=0.1 optimal %.5g myopic %.5g (z=%.1f) fixed:5 %.5g fixed:10 %.5g", opt.throughput_bps,
                           my.throughput_bps, z, est["fixed:5"].throughput_bps, est["fixed:10"].throughput_bps);
            if (std::abs(z) > 3.0) {
                fail(out, fmt("p=0.1: myopic %.5g not within 3 combined stderr of optimal %.5g (%.1f stderr apart)",
                              my.throughput_bps, opt.throughput_bps, std::abs(z)));
            }
            for (const char* f : {"fixed:5", "fixed:10"}) {
                if (!(my.throughput_bps > est[f].throughput_bps)) {
                    fail(out, fmt("p=0.1: myopic not above %s", f));
                }
            }
        }
        if (k == 9) {
            summary += fmt("; p=0.9 myopic %.5g fixed:5 %.5g fixed:10 %.5g", my.throughput_bps,
                           est["fixed:5"].throughput_bps, est["fixed:10"].throughput_bps);
            for (const char* f : {"fixed:5", "fixed:10"}) {
                if (!(est[f].throughput_bps > my.throughput_bps)) {
                    fail(out, fmt("p=0.9: %s not above myopic", f));
                }
            }
        }
    }
    if (out.pass) {
        out.detail = summary;
    } else {
        out.detail += " [" + summary + "]";
    }
    return out;
}

std::vector<std::pair<std::string, SeDistribution>> solver_test_distributions()
{
    std::vector<std::pair<std::string, SeDistribution>> out;
    for (int k = 1; k <= 10; ++k) {
        for (double r_bar : {1.0, 4.0}) {
            out.emplace_back(fmt("onoff(%.1f,%.0f)", k / 10.0, r_bar), SeDistribution::on_off(k / 10.0, r_bar));
            out.emplace_back(fmt("sampled-onoff(%.1f,%.0f)", k / 10.0, r_bar),
                             build_empirical(onoff_config(k / 10.0, 0.01, r_bar), 100'000, 60 + k));
        }
        ScenarioConfig geo;
        geo.p_avail = k / 10.0;
        out.emplace_back(fmt("geometric(%.1f)", geo.p_avail), build_empirical(geo, 200'000, 6));
    }
    return out;
}

// 6. Newton-ratio convergence and bisection agreement.
Outcome criterion6()
{
    Outcome out;
    std::size_t worst_iter = 0, cases = 0;
    double worst_rel = 0.0;
    for (const auto& [name, dist] : solver_test_distributions()) {
        for (double tau : {0.01, 0.05}) {
            const ProbingCosts c{500e6, 1.0, tau, dist.is_on_off() ? dist.as_on_off()->p_avail : 0.5};
            ++cases;
            try {
                const auto sol = solve_mu_star(dist, c);
                const auto ref = solve_mu_star_bisection(dist, c);
                worst_iter = std::max<std::size_t>(worst_iter, sol.iterations);
                const double rel = std::abs(sol.mu_star - ref.mu_star) / ref.mu_star;
                worst_rel = std::max(worst_rel, rel);
                if (sol.method != SolveMethod::newton_ratio || sol.iterations > 30) {
                    fail(out, fmt("%s tau=%.2f: %s in %zu iterations", name.c_str(), tau, to_string(sol.method),
                                  static_cast<std::size_t>(sol.iterations)));
                }
                if (rel > 1e-9) {
                    fail(out, fmt("%s tau=%.2f: bisection differs by %.2e", name.c_str(), tau, rel));
                }
            } catch (const std::exception& e) {
                fail(out, name + ": " + e.what());
            }
        }
    }
    if (out.pass) {
        out.detail = fmt("%zu cases, max iterations %zu, max rel diff %.2e", cases, worst_iter, worst_rel);
    }
    return out;
}

// 7. Threshold rule with and without recall stop identically.
Outcome criterion7()
{
    Outcome out;
    ScenarioConfig cfg;
    cfg.p_avail = 0.5;
    const RelaySampler sampler(cfg, 7);
    std::uint64_t checked = 0;
    for (int j = 1; j <= 10; ++j) {
        const double rho = 0.15 * j;
        for (std::uint64_t i = 0; i < 10'000; ++i) {
            const auto a = run_period(ExplicitThreshold{rho}, cfg, PeriodRelays(sampler, i));
            const auto b = run_period_with_recall(rho, cfg, PeriodRelays(sampler, i));
            ++checked;
            if (a.n_probed != b.n_probed || a.selected_stage != b.selected_stage || a.selected_se != b.selected_se ||
                a.bits != b.bits || a.period_time != b.period_time) {
                fail(out, fmt("rho=%.2f period %llu differs", rho, static_cast<unsigned long long>(i)));
            }
        }
    }
    if (out.pass) {
        out.detail = fmt("%llu period comparisons identical", static_cast<unsigned long long>(checked));
    }
    return out;
}

// 8. Functional identities of both distribution variants.
Outcome criterion8()
{
    Outcome out;
    ScenarioConfig geo;
    const auto emp = build_empirical(geo, 1'000'000, 8);
    const auto onoff = SeDistribution::on_off(0.6, 4.0);
    for (const auto* d : {&emp, &onoff}) {
        for (int k = 0; k < 100; ++k) {
            const double rho = 1.1 * d->r_bar() * k / 99.0;
            if (expected_excess(*d, rho) != mean_above(*d, rho) - rho * tail_prob(*d, rho)) {
                fail(out, fmt("%s identity broken at rho=%.4f", d->is_on_off() ? "onoff" : "empirical", rho));
            }
        }
    }
    double worst = 0.0;
    for (double p : {0.1, 0.3, 0.5, 0.7, 0.9, 1.0}) {
        for (double r_bar : {1.0, 4.0, 8.0}) {
            const auto d = SeDistribution::on_off(p, r_bar);
            for (int k = 0; k < 100; ++k) {
                const double rho = r_bar * k / 99.0;
                const double err = std::abs(expected_excess(d, rho) - p * p * (r_bar - rho));
                worst = std::max(worst, err);
            }
        }
    }
    if (worst > 1e-12) {
        fail(out, fmt("on/off excess off by %.2e", worst));
    }
    if (out.pass) {
        out.detail = fmt("identities exact on 100-point grids; on/off excess max err %.2e", worst);
    }
    return out;
}

// 9. Sweep CSV does not depend on worker count or on the run.
Outcome criterion9()
{
    Outcome out;
    ScenarioConfig cfg;
    SweepSpec spec;
    spec.variable = SweepVariable::p_avail;
    spec.grid = {0.1, 0.5, 0.9};
    spec.strategies = {"optimal", "myopic", "fixed:5", "genie"};
    spec.n_periods = 20'000;
    spec.seed = 9;
    std::vector<std::string> runs;
    for (unsigned workers : {1u, 1u, 2u, 4u}) {
        std::ostringstream csv;
        run_sweep(cfg, spec, {workers, 200'000}, csv);
        runs.push_back(csv.str());
    }
    for (std::size_t i = 1; i < runs.size(); ++i) {
        if (runs[i] != runs[0]) {
            fail(out, fmt("run %zu differs from run 0", i));
        }
    }
    if (out.pass) {
        out.detail = fmt("4 runs (workers 1, 1, 2, 4), %zu bytes each, identical", runs[0].size());
    }
    return out;
}

} // namespace

int main(int argc, char** argv)
{
    const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
        {"1", criterion1}, {"2", criterion2}, {"3", criterion3}, {"4", criterion4},   {"4g", criterion4g},
        {"5", criterion5}, {"6", criterion6}, {"7", criterion7}, {"8", criterion8}, {"9", criterion9},
    };
    std::vector<std::string> wanted(argv + 1, argv + argc);
    if (wanted.empty()) {
        wanted = {"all"};
    }
    bool all_pass = true;
    for (const auto& [id, run] : criteria) {
        bool selected = false;
        for (const auto& w : wanted) {
            selected = selected || w == "all" || w == id;
        }
        if (!selected) {
            continue;
        }
        Outcome out;
        const auto start = Clock::now();
        try {
            out = run();
        } catch (const std::exception& e) {
            out = {false, std::string("exception: ") + e.what()};
        }
        all_pass = all_pass && out.pass;
        std::cout << (out.pass ? "PASS" : "FAIL") << " C" << id << " (" << fmt("%.1f", seconds_since(start))
                  << " s): " << out.detail << std::endl;
    }
    return all_pass ? 0 : 1;
}
