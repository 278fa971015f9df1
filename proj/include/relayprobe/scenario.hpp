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

#include <cmath>
#include <cstdint>
#include <fstream>
#include <set>
#include <string>

#include "json.hpp"

#include "relayprobe/errors.hpp"

namespace relayprobe {

struct Point {
    double x = 0.0;
    double y = 0.0;

    friend bool operator==(const Point&, const Point&) = default;
};

inline double distance(const Point& a, const Point& b)
{
    return std::hypot(a.x - b.x, a.y - b.y);
}

struct Disk {
    Point center;
    double radius = 250.0;
};

/// How relay rates are generated.
///
/// `geometric` draws a relay position, Bernoulli blockage and log-normal
/// shadowing per hop and evaluates the link budget. `onoff` keeps only the
/// blockage: each hop is clear with probability p_avail and a relay with
/// both hops clear has rate se_cap.
enum class ChannelMode { geometric, onoff };

/// Geometry, radio, timing and blockage parameters of one scenario.
/// Defaults are the pico-BS / device relaying setup at 28 GHz.
struct ScenarioConfig {
    Point source_pos{-250.0, 0.0};
    Point dest_pos{250.0, 0.0};
    Disk relay_region{{0.0, 0.0}, 250.0};

    double tx_power_bs = 30.0;  // dBm
    double tx_power_dev = 23.0; // dBm
    double bf_gain_bs = 20.0;   // dB
    double bf_gain_dev = 10.0;  // dB

    double bandwidth_W = 500e6;  // Hz
    double noise_psd = -174.0;   // dBm/Hz
    double noise_figure = 7.0;   // dB

    double pathloss_a = 141.3;   // dB at 1 km
    double pathloss_b = 20.0;    // dB per decade of distance
    double shadow_sigma = 7.0;   // dB

    double p_avail = 0.5;
    double tau = 0.01;           // s per beam-training step
    double T_data = 1.0;         // s of data transmission per period
    double se_cap = 8.0;         // bit/s/Hz

    ChannelMode channel_mode = ChannelMode::geometric;
    /// 0 means every probe sees a fresh relay position.
    std::uint64_t relay_pool_size = 0;
};

/// Throws ConfigError on the first violated invariant.
inline void validate(const ScenarioConfig& cfg)
{
    auto require = [](bool ok, const char* msg) {
        if (!ok) {
            throw ConfigError(msg);
        }
    };
    require(cfg.p_avail > 0.0 && cfg.p_avail <= 1.0, "p_avail must lie in (0, 1]");
    require(cfg.tau >= 0.0 && std::isfinite(cfg.tau), "tau must be non-negative");
    require(cfg.T_data > 0.0 && std::isfinite(cfg.T_data), "T_data must be positive");
    require(cfg.bandwidth_W > 0.0 && std::isfinite(cfg.bandwidth_W), "bandwidth_W must be positive");
    require(cfg.se_cap > 0.0 && std::isfinite(cfg.se_cap), "se_cap must be positive");
    require(cfg.shadow_sigma >= 0.0, "shadow_sigma must be non-negative");
    require(cfg.relay_region.radius > 0.0, "relay_region radius must be positive");
    require(!(cfg.source_pos == cfg.dest_pos), "source_pos and dest_pos must differ");
}

namespace detail {

inline nlohmann::json point_to_json(const Point& p)
{
    return nlohmann::json::array({p.x, p.y});
}

inline Point point_from_json(const nlohmann::json& j, const char* key)
{
    if (!j.is_array() || j.size() != 2 || !j[0].is_number() || !j[1].is_number()) {
        throw ConfigError(std::string(key) + " must be a two-element numeric array");
    }
    return {j[0].get<double>(), j[1].get<double>()};
}

inline double number_from_json(const nlohmann::json& j, const char* key)
{
    if (!j.is_number()) {
        throw ConfigError(std::string(key) + " must be a number");
    }
    return j.get<double>();
}

} // namespace detail

inline nlohmann::json to_json(const ScenarioConfig& cfg)
{
    nlohmann::json j;
    j["source_pos"] = detail::point_to_json(cfg.source_pos);
    j["dest_pos"] = detail::point_to_json(cfg.dest_pos);
    j["relay_region"] = {{"center", detail::point_to_json(cfg.relay_region.center)},
                         {"radius", cfg.relay_region.radius}};
    j["tx_power_bs"] = cfg.tx_power_bs;
    j["tx_power_dev"] = cfg.tx_power_dev;
    j["bf_gain_bs"] = cfg.bf_gain_bs;
    j["bf_gain_dev"] = cfg.bf_gain_dev;
    j["bandwidth_W"] = cfg.bandwidth_W;
    j["noise_psd"] = cfg.noise_psd;
    j["noise_figure"] = cfg.noise_figure;
    j["pathloss_a"] = cfg.pathloss_a;
    j["pathloss_b"] = cfg.pathloss_b;
    j["shadow_sigma"] = cfg.shadow_sigma;
    j["p_avail"] = cfg.p_avail;
    j["tau"] = cfg.tau;
    j["T_data"] = cfg.T_data;
    j["se_cap"] = cfg.se_cap;
    j["channel_mode"] = cfg.channel_mode == ChannelMode::onoff ? "onoff" : "geometric";
    j["relay_pool_size"] = cfg.relay_pool_size;
    return j;
}

/// Parses a scenario. Missing keys keep their defaults; unknown keys are
/// rejected. The result is validated.
inline ScenarioConfig scenario_from_json(const nlohmann::json& j)
{
    if (!j.is_object()) {
        throw ConfigError("scenario must be a JSON object");
    }
    static const std::set<std::string> known = {
        "source_pos", "dest_pos", "relay_region", "tx_power_bs", "tx_power_dev",
        "bf_gain_bs", "bf_gain_dev", "bandwidth_W", "noise_psd", "noise_figure",
        "pathloss_a", "pathloss_b", "shadow_sigma", "p_avail", "tau", "T_data",
        "se_cap", "channel_mode", "relay_pool_size"};
    for (const auto& [key, _] : j.items()) {
        if (!known.contains(key)) {
            throw ConfigError("unknown scenario key: " + key);
        }
    }

    ScenarioConfig cfg;
    auto number = [&](const char* key, double& field) {
        if (j.contains(key)) {
            field = detail::number_from_json(j.at(key), key);
        }
    };
    if (j.contains("source_pos")) {
        cfg.source_pos = detail::point_from_json(j.at("source_pos"), "source_pos");
    }
    if (j.contains("dest_pos")) {
        cfg.dest_pos = detail::point_from_json(j.at("dest_pos"), "dest_pos");
    }
    if (j.contains("relay_region")) {
        const auto& region = j.at("relay_region");
        if (!region.is_object()) {
            throw ConfigError("relay_region must be an object with center and radius");
        }
        for (const auto& [key, _] : region.items()) {
            if (key != "center" && key != "radius") {
                throw ConfigError("unknown relay_region key: " + key);
            }
        }
        if (region.contains("center")) {
            cfg.relay_region.center = detail::point_from_json(region.at("center"), "relay_region.center");
        }
        if (region.contains("radius")) {
            cfg.relay_region.radius = detail::number_from_json(region.at("radius"), "relay_region.radius");
        }
    }
    number("tx_power_bs", cfg.tx_power_bs);
    number("tx_power_dev", cfg.tx_power_dev);
    number("bf_gain_bs", cfg.bf_gain_bs);
    number("bf_gain_dev", cfg.bf_gain_dev);
    number("bandwidth_W", cfg.bandwidth_W);
    number("noise_psd", cfg.noise_psd);
    number("noise_figure", cfg.noise_figure);
    number("pathloss_a", cfg.pathloss_a);
    number("pathloss_b", cfg.pathloss_b);
    number("shadow_sigma", cfg.shadow_sigma);
    number("p_avail", cfg.p_avail);
    number("tau", cfg.tau);
    number("T_data", cfg.T_data);
    number("se_cap", cfg.se_cap);
    if (j.contains("channel_mode")) {
        const auto& mode = j.at("channel_mode");
        if (mode == "geometric") {
            cfg.channel_mode = ChannelMode::geometric;
        } else if (mode == "onoff") {
            cfg.channel_mode = ChannelMode::onoff;
        } else {
            throw ConfigError("channel_mode must be \"geometric\" or \"onoff\"");
        }
    }
    if (j.contains("relay_pool_size")) {
        const auto& pool = j.at("relay_pool_size");
        if (!pool.is_number_unsigned()) {
            throw ConfigError("relay_pool_size must be a non-negative integer");
        }
        cfg.relay_pool_size = pool.get<std::uint64_t>();
    }
    validate(cfg);
    return cfg;
}

inline ScenarioConfig load_scenario(const std::string& path)
{
    std::ifstream in(path);
    if (!in) {
        throw ConfigError("cannot open scenario file: " + path);
    }
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::parse_error& e) {
        throw ConfigError("scenario file " + path + " is not valid JSON: " + e.what());
    }
    return scenario_from_json(j);
}

} // namespace relayprobe
