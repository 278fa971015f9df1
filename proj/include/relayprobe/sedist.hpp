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

// Distribution of the two-hop spectral efficiency R and the tail
// functionals the threshold solver needs:
//
//   tail_prob(rho)       = P(R >= rho)
//   mean_above(rho)      = E[R 1{R >= rho}]
//   expected_excess(rho) = E[(R - rho)^+] = mean_above(rho) - rho * tail_prob(rho)
//
// Tails are closed (>=) so that an atom sitting exactly at the threshold
// counts as a stop.

#include <algorithm>
#include <bit>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <istream>
#include <ostream>
#include <span>
#include <string>
#include <thread>
#include <variant>
#include <vector>

#include "relayprobe/channel.hpp"
#include "relayprobe/errors.hpp"
#include "relayprobe/scenario.hpp"

namespace relayprobe {

/// R = r_bar with probability p^2, else 0.
struct OnOffLaw {
    double p_avail = 1.0;
    double r_bar = 1.0;
};

/// Sorted sample of R with suffix sums for O(log n) tail queries.
class EmpiricalLaw {
public:
    EmpiricalLaw(std::vector<double> samples, double r_bar)
        : samples_(std::move(samples)), r_bar_(r_bar)
    {
        if (samples_.empty()) {
            throw DomainError("empirical distribution needs at least one sample");
        }
        if (!(r_bar_ > 0.0)) {
            throw DomainError("empirical distribution: r_bar must be positive");
        }
        for (double s : samples_) {
            if (!(s >= 0.0 && s <= r_bar_)) {
                throw DomainError("empirical distribution: samples must lie in [0, r_bar]");
            }
        }
        std::sort(samples_.begin(), samples_.end());

        // suffix_[i] = sum of samples_[i..n), accumulated in long double so
        // that sums of ~1e6 terms keep full double precision.
        suffix_.assign(samples_.size() + 1, 0.0);
        long double acc = 0.0L;
        for (std::size_t i = samples_.size(); i-- > 0;) {
            acc += samples_[i];
            suffix_[i] = static_cast<double>(acc);
        }
    }

    std::span<const double> samples() const noexcept { return samples_; }
    double r_bar() const noexcept { return r_bar_; }
    std::size_t size() const noexcept { return samples_.size(); }

    /// Index of the first sample >= rho.
    std::size_t first_at_or_above(double rho) const
    {
        return static_cast<std::size_t>(
            std::lower_bound(samples_.begin(), samples_.end(), rho) - samples_.begin());
    }

    double tail_prob(double rho) const
    {
        const auto k = first_at_or_above(rho);
        return static_cast<double>(samples_.size() - k) / static_cast<double>(samples_.size());
    }

    double mean_above(double rho) const
    {
        return suffix_[first_at_or_above(rho)] / static_cast<double>(samples_.size());
    }

private:
    std::vector<double> samples_;
    std::vector<double> suffix_;
    double r_bar_;
};

class SeDistribution {
public:
    static SeDistribution on_off(double p_avail, double r_bar)
    {
        if (!(p_avail > 0.0 && p_avail <= 1.0)) {
            throw DomainError("on/off law: p_avail must lie in (0, 1]");
        }
        if (!(r_bar > 0.0)) {
            throw DomainError("on/off law: r_bar must be positive");
        }
        return SeDistribution(OnOffLaw{p_avail, r_bar});
    }

    static SeDistribution empirical(std::vector<double> samples, double r_bar)
    {
        return SeDistribution(EmpiricalLaw(std::move(samples), r_bar));
    }

    bool is_on_off() const noexcept { return std::holds_alternative<OnOffLaw>(law_); }
    const OnOffLaw* as_on_off() const noexcept { return std::get_if<OnOffLaw>(&law_); }
    const EmpiricalLaw* as_empirical() const noexcept { return std::get_if<EmpiricalLaw>(&law_); }

    /// Upper end of the support bound.
    double r_bar() const noexcept
    {
        if (const auto* o = as_on_off()) {
            return o->r_bar;
        }
        return as_empirical()->r_bar();
    }

    template <class Visitor>
    decltype(auto) visit(Visitor&& v) const
    {
        return std::visit(std::forward<Visitor>(v), law_);
    }

private:
    explicit SeDistribution(std::variant<OnOffLaw, EmpiricalLaw> law) : law_(std::move(law)) {}

    std::variant<OnOffLaw, EmpiricalLaw> law_;
};

namespace detail {

inline void require_nonnegative_rho(double rho)
{
    if (!(rho >= 0.0)) {
        throw DomainError("threshold rho must be non-negative");
    }
}

template <class... Fs>
struct overloaded : Fs... {
    using Fs::operator()...;
};
template <class... Fs>
overloaded(Fs...) -> overloaded<Fs...>;

} // namespace detail

inline double tail_prob(const SeDistribution& dist, double rho)
{
    detail::require_nonnegative_rho(rho);
    return dist.visit(detail::overloaded{
        [&](const OnOffLaw& law) {
            if (rho == 0.0) {
                return 1.0;
            }
            return rho <= law.r_bar ? law.p_avail * law.p_avail : 0.0;
        },
        [&](const EmpiricalLaw& law) { return law.tail_prob(rho); },
    });
}

inline double mean_above(const SeDistribution& dist, double rho)
{
    detail::require_nonnegative_rho(rho);
    return dist.visit(detail::overloaded{
        [&](const OnOffLaw& law) {
            return rho <= law.r_bar ? law.p_avail * law.p_avail * law.r_bar : 0.0;
        },
        [&](const EmpiricalLaw& law) { return law.mean_above(rho); },
    });
}

inline double expected_excess(const SeDistribution& dist, double rho)
{
    return mean_above(dist, rho) - rho * tail_prob(dist, rho);
}

inline double mean(const SeDistribution& dist)
{
    return mean_above(dist, 0.0);
}

/// Draws n i.i.d. two-hop rates for `cfg` from the distribution-domain
/// substreams of `seed`. Sample i depends only on (seed, i), so the result
/// is the same for any worker count.
inline SeDistribution build_empirical(const ScenarioConfig& cfg, std::size_t n_samples,
                                      std::uint64_t seed, unsigned workers = 1)
{
    if (n_samples == 0) {
        throw DomainError("build_empirical: n_samples must be at least 1");
    }
    const RelaySampler sampler(cfg, seed, StreamDomain::distribution);
    std::vector<double> samples(n_samples);

    auto fill = [&](std::size_t begin, std::size_t end) {
        for (std::size_t i = begin; i < end; ++i) {
            samples[i] = sampler.probe(i, 0).se;
        }
    };
    workers = std::max(1u, std::min<unsigned>(workers, static_cast<unsigned>(n_samples)));
    if (workers == 1) {
        fill(0, n_samples);
    } else {
        std::vector<std::jthread> pool;
        const std::size_t chunk = (n_samples + workers - 1) / workers;
        for (unsigned w = 0; w < workers; ++w) {
            const std::size_t begin = std::min(n_samples, w * chunk);
            const std::size_t end = std::min(n_samples, begin + chunk);
            pool.emplace_back(fill, begin, end);
        }
    }
    return SeDistribution::empirical(std::move(samples), cfg.se_cap);
}

// Sample files. CSV holds one value per line in shortest round-trip form;
// the binary form is the raw little-endian IEEE-754 doubles, no header.

inline void write_samples_csv(std::ostream& out, std::span<const double> samples)
{
    char buf[32];
    for (double s : samples) {
        auto [end, ec] = std::to_chars(buf, buf + sizeof buf, s);
        out.write(buf, end - buf);
        out.put('\n');
    }
}

inline std::vector<double> read_samples_csv(std::istream& in)
{
    std::vector<double> out;
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') {
            line.pop_back();
        }
        if (line.empty()) {
            continue;
        }
        double value = 0.0;
        auto [ptr, ec] = std::from_chars(line.data(), line.data() + line.size(), value);
        if (ec != std::errc{} || ptr != line.data() + line.size()) {
            throw ConfigError("malformed sample line: " + line);
        }
        out.push_back(value);
    }
    return out;
}

inline void write_samples_binary(std::ostream& out, std::span<const double> samples)
{
    static_assert(std::endian::native == std::endian::little, "binary sample files are little-endian");
    out.write(reinterpret_cast<const char*>(samples.data()),
              static_cast<std::streamsize>(samples.size_bytes()));
}

inline std::vector<double> read_samples_binary(std::istream& in)
{
    std::vector<double> out;
    double value = 0.0;
    while (in.read(reinterpret_cast<char*>(&value), sizeof value)) {
        out.push_back(value);
    }
    if (in.gcount() != 0) {
        throw ConfigError("binary sample file length is not a multiple of 8 bytes");
    }
    return out;
}

inline void save_empirical(const SeDistribution& dist, const std::string& path)
{
    const auto* law = dist.as_empirical();
    if (law == nullptr) {
        throw DomainError("save_empirical: distribution is not empirical");
    }
    const bool binary = path.ends_with(".bin");
    std::ofstream out(path, binary ? std::ios::binary : std::ios::out);
    if (!out) {
        throw ConfigError("cannot write sample file: " + path);
    }
    if (binary) {
        write_samples_binary(out, law->samples());
    } else {
        write_samples_csv(out, law->samples());
    }
}

inline SeDistribution load_empirical(const std::string& path, double r_bar)
{
    const bool binary = path.ends_with(".bin");
    std::ifstream in(path, binary ? std::ios::binary : std::ios::in);
    if (!in) {
        throw ConfigError("cannot open sample file: " + path);
    }
    return SeDistribution::empirical(binary ? read_samples_binary(in) : read_samples_csv(in), r_bar);
}

} // namespace relayprobe
