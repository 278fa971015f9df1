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

#include <cmath>
#include <filesystem>
#include <sstream>
#include <vector>

#include <gtest/gtest.h>

#include "relayprobe/sedist.hpp"

namespace relayprobe {
namespace {

// Brute-force functionals straight from the definitions, used as the
// independent side of every empirical check below.
double brute_tail(const std::vector<double>& xs, double rho)
{
    double count = 0;
    for (double x : xs) {
        count += x >= rho ? 1 : 0;
    }
    return count / static_cast<double>(xs.size());
}

double brute_excess(const std::vector<double>& xs, double rho)
{
    double sum = 0;
    for (double x : xs) {
        sum += std::max(x - rho, 0.0);
    }
    return sum / static_cast<double>(xs.size());
}

TEST(OnOff, TailProb)
{
    const auto d = SeDistribution::on_off(0.5, 2.0);
    EXPECT_DOUBLE_EQ(tail_prob(d, 1.0), 0.25);
    EXPECT_DOUBLE_EQ(tail_prob(d, 0.0), 1.0);
    EXPECT_DOUBLE_EQ(tail_prob(d, 2.0), 0.25);
    EXPECT_DOUBLE_EQ(tail_prob(d, 2.0001), 0.0);
}

TEST(OnOff, MeanAbove)
{
    const auto d = SeDistribution::on_off(0.5, 2.0);
    EXPECT_DOUBLE_EQ(mean_above(d, 1.0), 0.5);
    EXPECT_DOUBLE_EQ(mean_above(d, 2.5), 0.0);
}

TEST(OnOff, ExpectedExcess)
{
    const auto d = SeDistribution::on_off(0.5, 2.0);
    EXPECT_NEAR(expected_excess(d, 1.88679), 0.0283025, 1e-12);
    EXPECT_DOUBLE_EQ(expected_excess(d, 0.0), mean(d));
    EXPECT_DOUBLE_EQ(expected_excess(d, 3.0), 0.0);
}

TEST(OnOff, RejectsBadParameters)
{
    EXPECT_THROW(SeDistribution::on_off(0.0, 1.0), DomainError);
    EXPECT_THROW(SeDistribution::on_off(1.1, 1.0), DomainError);
    EXPECT_THROW(SeDistribution::on_off(0.5, 0.0), DomainError);
}

TEST(Empirical, Examples)
{
    const auto d = SeDistribution::empirical({1.5, 0.5, 2.0}, 8.0);
    EXPECT_DOUBLE_EQ(tail_prob(d, 1.0), 2.0 / 3.0);
    EXPECT_NEAR(mean_above(d, 1.0), 3.5 / 3.0, 1e-15);
    EXPECT_EQ(mean_above(d, 9.0), 0.0);

    const auto two = SeDistribution::empirical({0.5, 1.5}, 8.0);
    EXPECT_EQ(expected_excess(two, 2.0), 0.0);
    EXPECT_DOUBLE_EQ(expected_excess(two, 0.0), 1.0);
}

TEST(Empirical, ClosedTailAtAtoms)
{
    const auto d = SeDistribution::empirical({1.0, 1.0, 3.0, 3.0}, 4.0);
    EXPECT_DOUBLE_EQ(tail_prob(d, 3.0), 0.5);
    EXPECT_DOUBLE_EQ(tail_prob(d, 1.0), 1.0);
    EXPECT_DOUBLE_EQ(mean_above(d, 3.0), 1.5);
}

TEST(Empirical, RejectsBadSamples)
{
    EXPECT_THROW(SeDistribution::empirical({}, 1.0), DomainError);
    EXPECT_THROW(SeDistribution::empirical({-0.1}, 1.0), DomainError);
    EXPECT_THROW(SeDistribution::empirical({1.2}, 1.0), DomainError);
    EXPECT_THROW(SeDistribution::empirical({std::nan("")}, 1.0), DomainError);
}

TEST(Functionals, RejectNegativeRho)
{
    const auto d = SeDistribution::on_off(0.5, 1.0);
    EXPECT_THROW(tail_prob(d, -1.0), DomainError);
    EXPECT_THROW(mean_above(d, -1e-9), DomainError);
}

TEST(Empirical, MatchesBruteForceOnRandomSamples)
{
    CounterStream gen(21, {});
    for (int trial = 0; trial < 20; ++trial) {
        std::vector<double> xs(1 + trial * 37);
        for (auto& x : xs) {
            // mix of an atom at zero and continuous mass
            x = uniform01(gen) < 0.3 ? 0.0 : 4.0 * uniform01(gen);
        }
        const auto d = SeDistribution::empirical(xs, 4.0);
        for (int k = 0; k <= 50; ++k) {
            const double rho = 4.2 * k / 50.0;
            ASSERT_DOUBLE_EQ(tail_prob(d, rho), brute_tail(xs, rho));
            ASSERT_NEAR(expected_excess(d, rho), brute_excess(xs, rho), 1e-12);
        }
    }
}

TEST(Functionals, IdentityExcessEqualsMeanAboveMinusRhoTail)
{
    CounterStream gen(22, {});
    std::vector<double> xs(5000);
    for (auto& x : xs) {
        x = 3.0 * uniform01(gen) * uniform01(gen);
    }
    const auto emp = SeDistribution::empirical(xs, 3.0);
    const auto onoff = SeDistribution::on_off(0.7, 3.0);
    for (const auto* d : {&emp, &onoff}) {
        for (int k = 0; k < 100; ++k) {
            const double rho = 3.3 * k / 99.0;
            ASSERT_EQ(expected_excess(*d, rho), mean_above(*d, rho) - rho * tail_prob(*d, rho));
        }
    }
}

TEST(Functionals, ShapeProperties)
{
    CounterStream gen(23, {});
    std::vector<double> xs(3000);
    for (auto& x : xs) {
        x = uniform01(gen) < 0.5 ? 0.0 : 2.0 * std::sqrt(uniform01(gen));
    }
    const auto d = SeDistribution::empirical(xs, 2.0);
    EXPECT_DOUBLE_EQ(tail_prob(d, 0.0), 1.0);
    EXPECT_DOUBLE_EQ(expected_excess(d, 0.0), mean_above(d, 0.0));

    const int n = 400;
    const double h = 2.2 / n;
    for (int k = 1; k < n; ++k) {
        const double a = (k - 1) * h, b = k * h, c = (k + 1) * h;
        ASSERT_LE(tail_prob(d, b), tail_prob(d, a));
        ASSERT_LE(expected_excess(d, b), expected_excess(d, a) + 1e-15);
        // midpoint convexity
        ASSERT_LE(expected_excess(d, b), 0.5 * (expected_excess(d, a) + expected_excess(d, c)) + 1e-12);
    }
}

TEST(OnOff, ExcessIsAtomArithmetic)
{
    for (double p : {0.1, 0.35, 0.8, 1.0}) {
        for (double r_bar : {1.0, 4.0}) {
            const auto d = SeDistribution::on_off(p, r_bar);
            for (int k = 0; k < 100; ++k) {
                const double rho = r_bar * k / 99.0;
                ASSERT_NEAR(expected_excess(d, rho), p * p * (r_bar - rho), 1e-12);
            }
        }
    }
}

TEST(BuildEmpirical, DegenerateWhenGeometryIsFixed)
{
    ScenarioConfig cfg;
    cfg.p_avail = 1.0;
    cfg.shadow_sigma = 0.0;
    cfg.relay_pool_size = 1; // one forced relay position
    const auto d = build_empirical(cfg, 1000, 3);
    const auto samples = d.as_empirical()->samples();
    EXPECT_GT(samples.front(), 0.0);
    EXPECT_EQ(samples.front(), samples.back());
}

TEST(BuildEmpirical, OnOffTailIsBinomial)
{
    ScenarioConfig cfg;
    cfg.channel_mode = ChannelMode::onoff;
    cfg.p_avail = 0.6;
    cfg.se_cap = 2.0;
    const std::size_t n = 200'000;
    const auto d = build_empirical(cfg, n, 4);
    const double q = 0.36;
    EXPECT_NEAR(tail_prob(d, 1.0), q, 3.0 * std::sqrt(q * (1 - q) / n));
}

TEST(BuildEmpirical, OnOffMeanMatchesLaw)
{
    ScenarioConfig cfg;
    cfg.channel_mode = ChannelMode::onoff;
    cfg.p_avail = 0.3;
    cfg.se_cap = 4.0;
    const std::size_t n = 1'000'000;
    const auto d = build_empirical(cfg, n, 5);
    const double q = 0.09;
    const double analytic = q * 4.0;
    const double se = 4.0 * std::sqrt(q * (1 - q) / n);
    EXPECT_NEAR(expected_excess(d, 0.0), analytic, 3.0 * se);
}

TEST(BuildEmpirical, IndependentOfWorkerCount)
{
    ScenarioConfig cfg;
    cfg.p_avail = 0.8;
    const auto a = build_empirical(cfg, 20'000, 6, 1);
    const auto b = build_empirical(cfg, 20'000, 6, 3);
    const auto sa = a.as_empirical()->samples();
    const auto sb = b.as_empirical()->samples();
    ASSERT_EQ(sa.size(), sb.size());
    EXPECT_TRUE(std::equal(sa.begin(), sa.end(), sb.begin()));
}

TEST(BuildEmpirical, RejectsZeroSamples)
{
    EXPECT_THROW(build_empirical(ScenarioConfig{}, 0, 1), DomainError);
}

TEST(SampleFiles, CsvAndBinaryRoundTripExactly)
{
    ScenarioConfig cfg;
    const auto d = build_empirical(cfg, 5000, 7);
    const auto dir = std::filesystem::temp_directory_path();
    for (const char* name : {"relayprobe_samples.csv", "relayprobe_samples.bin"}) {
        const auto path = (dir / name).string();
        save_empirical(d, path);
        const auto back = load_empirical(path, cfg.se_cap);
        const auto a = d.as_empirical()->samples();
        const auto b = back.as_empirical()->samples();
        ASSERT_EQ(a.size(), b.size());
        EXPECT_TRUE(std::equal(a.begin(), a.end(), b.begin())) << name;
        std::filesystem::remove(path);
    }
}

TEST(SampleFiles, MalformedCsvRejected)
{
    std::istringstream in("0.5\nnot-a-number\n");
    EXPECT_THROW(read_samples_csv(in), ConfigError);
}

} // namespace
} // namespace relayprobe
