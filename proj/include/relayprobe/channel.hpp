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

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <vector>

#include "relayprobe/errors.hpp"
#include "relayprobe/random.hpp"
#include "relayprobe/scenario.hpp"

namespace relayprobe {

inline double db_to_linear(double db) { return std::pow(10.0, db / 10.0); }
inline double linear_to_db(double linear) { return 10.0 * std::log10(linear); }

/// Pathloss a + b*log10(d / 1 km), in dB.
inline double pathloss_db(double distance_m, const ScenarioConfig& cfg)
{
    if (!(distance_m > 0.0)) {
        throw DomainError("pathloss_db: distance must be positive");
    }
    return cfg.pathloss_a + cfg.pathloss_b * std::log10(distance_m / 1000.0);
}

/// Thermal noise power over the channel bandwidth, in dBm.
inline double noise_power_dbm(const ScenarioConfig& cfg)
{
    return cfg.noise_psd + 10.0 * std::log10(cfg.bandwidth_W) + cfg.noise_figure;
}

/// Linear SNR of a single hop. A blocked hop receives nothing.
inline double snr_linear(double tx_dbm, double g_tx_db, double g_rx_db, double distance_m,
                         double shadow_db, bool unblocked, const ScenarioConfig& cfg)
{
    const double loss = pathloss_db(distance_m, cfg);
    if (!unblocked) {
        return 0.0;
    }
    const double rx_dbm = tx_dbm + g_tx_db + g_rx_db - loss + shadow_db;
    return db_to_linear(rx_dbm - noise_power_dbm(cfg));
}

/// Half-duplex decode-and-forward rate in bit/s/Hz, capped at cfg.se_cap.
inline double two_hop_se(double snr1, double snr2, const ScenarioConfig& cfg)
{
    if (snr1 < 0.0 || snr2 < 0.0 || std::isnan(snr1) || std::isnan(snr2)) {
        throw DomainError("two_hop_se: SNR must be non-negative");
    }
    const double weaker = std::min(snr1, snr2);
    return std::min(0.5 * std::log2(1.0 + 2.0 * weaker), cfg.se_cap);
}

struct LinkSample {
    bool unblocked = false;     // blockage indicator, 1 = line of sight
    double shadowing_db = 0.0;
    double distance_m = 0.0;
    double snr_linear = 0.0;
};

struct RelayLinkPair {
    LinkSample source_relay;
    LinkSample relay_dest;
    Point relay;
};

/// What the protocol learns from probing one relay.
struct RelayProbe {
    bool first_hop_clear = false;
    bool second_hop_clear = false;
    double se = 0.0; // two-hop rate; zero unless both hops are clear
};

namespace detail {

inline Point uniform_in_disk(const Disk& disk, double u_radius, double u_angle)
{
    const double r = disk.radius * std::sqrt(u_radius);
    const double theta = 2.0 * std::numbers::pi * u_angle;
    return {disk.center.x + r * std::cos(theta), disk.center.y + r * std::sin(theta)};
}

inline RelayLinkPair evaluate_links(const ScenarioConfig& cfg, const Point& relay, bool clear1,
                                    bool clear2, double shadow1_db, double shadow2_db)
{
    RelayLinkPair out;
    out.relay = relay;

    auto& first = out.source_relay;
    first.unblocked = clear1;
    first.shadowing_db = shadow1_db;
    first.distance_m = distance(cfg.source_pos, relay);
    first.snr_linear = snr_linear(cfg.tx_power_bs, cfg.bf_gain_bs, cfg.bf_gain_dev, first.distance_m,
                                  shadow1_db, clear1, cfg);

    auto& second = out.relay_dest;
    second.unblocked = clear2;
    second.shadowing_db = shadow2_db;
    second.distance_m = distance(relay, cfg.dest_pos);
    second.snr_linear = snr_linear(cfg.tx_power_dev, cfg.bf_gain_dev, cfg.bf_gain_dev,
                                   second.distance_m, shadow2_db, clear2, cfg);
    return out;
}

} // namespace detail

/// Draws one relay uniformly on the relay disk together with independent
/// blockage and shadowing for both hops.
///
/// Consumption order is fixed: two blockage words, two position words,
/// two shadowing words.
template <class Gen>
RelayLinkPair sample_relay_link_pair(Gen& rng, const ScenarioConfig& cfg)
{
    const bool clear1 = uniform01(rng) < cfg.p_avail;
    const bool clear2 = uniform01(rng) < cfg.p_avail;
    const double u_radius = uniform01(rng);
    const double u_angle = uniform01(rng);
    const auto [z1, z2] = standard_normal_pair(rng);
    const Point relay = detail::uniform_in_disk(cfg.relay_region, u_radius, u_angle);
    return detail::evaluate_links(cfg, relay, clear1, clear2, cfg.shadow_sigma * z1,
                                  cfg.shadow_sigma * z2);
}

inline double two_hop_se(const RelayLinkPair& links, const ScenarioConfig& cfg)
{
    return two_hop_se(links.source_relay.snr_linear, links.relay_dest.snr_linear, cfg);
}

/// Deterministic relay generator keyed by (seed, domain, index, relay).
///
/// Each relay owns its own counter-based substream: block 0 holds the two
/// blockage draws, block 1 the position, block 2 the shadowing and block 3
/// the pool slot. Blocks a probe does not need are never generated, so a
/// relay whose first hop is blocked costs one Philox block.
class RelaySampler {
public:
    RelaySampler(const ScenarioConfig& cfg, std::uint64_t seed,
                 StreamDomain domain = StreamDomain::simulation)
        : cfg_(cfg), seed_(seed), domain_(domain)
    {
        if (cfg_.relay_pool_size > 0 && cfg_.channel_mode == ChannelMode::geometric) {
            pool_.reserve(cfg_.relay_pool_size);
            for (std::uint64_t i = 0; i < cfg_.relay_pool_size; ++i) {
                CounterStream stream(seed_, {StreamDomain::relay_pool, i, 0});
                const double u_radius = uniform01(stream);
                const double u_angle = uniform01(stream);
                pool_.push_back(detail::uniform_in_disk(cfg_.relay_region, u_radius, u_angle));
            }
        }
    }

    const ScenarioConfig& config() const noexcept { return cfg_; }

    RelayProbe probe(std::uint64_t index, std::uint32_t relay) const
    {
        CounterStream stream = stream_for(index, relay);
        RelayProbe out;
        out.first_hop_clear = uniform01(stream) < cfg_.p_avail;
        out.second_hop_clear = uniform01(stream) < cfg_.p_avail;
        if (!(out.first_hop_clear && out.second_hop_clear)) {
            return out;
        }
        if (cfg_.channel_mode == ChannelMode::onoff) {
            out.se = cfg_.se_cap;
            return out;
        }
        out.se = two_hop_se(links(index, relay), cfg_);
        return out;
    }

    /// Full link detail for one relay (geometric mode).
    RelayLinkPair links(std::uint64_t index, std::uint32_t relay) const
    {
        CounterStream stream = stream_for(index, relay);
        RelayLinkPair pair = sample_relay_link_pair(stream, cfg_);
        if (!pool_.empty()) {
            stream.seek_block(3);
            const auto slot = static_cast<std::size_t>(uniform01(stream) * static_cast<double>(pool_.size()));
            pair = detail::evaluate_links(cfg_, pool_[std::min(slot, pool_.size() - 1)],
                                          pair.source_relay.unblocked, pair.relay_dest.unblocked,
                                          pair.source_relay.shadowing_db,
                                          pair.relay_dest.shadowing_db);
        }
        return pair;
    }

private:
    CounterStream stream_for(std::uint64_t index, std::uint32_t relay) const
    {
        return CounterStream(seed_, {domain_, index, relay});
    }

    ScenarioConfig cfg_;
    std::uint64_t seed_;
    StreamDomain domain_;
    std::vector<Point> pool_;
};

} // namespace relayprobe
