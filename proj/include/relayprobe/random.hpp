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

// Counter-based random streams.
//
// Every random number in the library is a pure function of
// (seed, domain, index, sub, block). A worker that owns period i can
// therefore reproduce exactly the numbers a serial run would draw for
// period i, which is what makes results independent of the worker count.
//
// The generator is Philox4x32-10 (Salmon et al., SC'11).

#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <utility>

namespace relayprobe {

using PhiloxCounter = std::array<std::uint32_t, 4>;
using PhiloxKey = std::array<std::uint32_t, 2>;

namespace detail {

inline constexpr std::uint32_t kPhiloxM0 = 0xD2511F53u;
inline constexpr std::uint32_t kPhiloxM1 = 0xCD9E8D57u;
inline constexpr std::uint32_t kPhiloxW0 = 0x9E3779B9u;
inline constexpr std::uint32_t kPhiloxW1 = 0xBB67AE85u;

constexpr PhiloxCounter philox_round(const PhiloxCounter& ctr, const PhiloxKey& key)
{
    const std::uint64_t p0 = std::uint64_t{kPhiloxM0} * ctr[0];
    const std::uint64_t p1 = std::uint64_t{kPhiloxM1} * ctr[2];
    return {static_cast<std::uint32_t>(p1 >> 32) ^ ctr[1] ^ key[0],
            static_cast<std::uint32_t>(p1),
            static_cast<std::uint32_t>(p0 >> 32) ^ ctr[3] ^ key[1],
            static_cast<std::uint32_t>(p0)};
}

} // namespace detail

/// Philox4x32 with 10 rounds.
constexpr PhiloxCounter philox4x32_10(PhiloxCounter ctr, PhiloxKey key)
{
    for (int round = 0; round < 10; ++round) {
        if (round > 0) {
            key[0] += detail::kPhiloxW0;
            key[1] += detail::kPhiloxW1;
        }
        ctr = detail::philox_round(ctr, key);
    }
    return ctr;
}

/// Named sub-streams. Distinct domains never share a counter value.
enum class StreamDomain : std::uint32_t {
    simulation = 0,
    distribution = 1,
    relay_pool = 2,
};

struct StreamId {
    StreamDomain domain = StreamDomain::simulation;
    std::uint64_t index = 0; // period or sample index
    std::uint32_t sub = 0;   // relay index within the period
};

/// A UniformRandomBitGenerator over one (seed, StreamId) substream.
///
/// Output word k is taken from Philox block k/2. Block numbers are limited
/// to 28 bits; the top nibble of counter word 0 carries the domain.
class CounterStream {
public:
    using result_type = std::uint64_t;

    static constexpr std::uint32_t kMaxBlocks = 1u << 28;

    CounterStream(std::uint64_t seed, StreamId id, std::uint32_t first_block = 0) noexcept
        : key_{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)}
        , id_(id)
        , block_(first_block)
    {
    }

    static constexpr result_type min() noexcept { return 0; }
    static constexpr result_type max() noexcept { return std::numeric_limits<result_type>::max(); }

    result_type operator()() noexcept
    {
        if (lane_ == 0) {
            cache_ = philox4x32_10(counter(block_++), key_);
        }
        const auto lo = cache_[2 * lane_];
        const auto hi = cache_[2 * lane_ + 1];
        lane_ ^= 1u;
        return (std::uint64_t{hi} << 32) | lo;
    }

    /// Skip to the start of block `block`, discarding any buffered output.
    void seek_block(std::uint32_t block) noexcept
    {
        block_ = block;
        lane_ = 0;
    }

private:
    PhiloxCounter counter(std::uint32_t block) const noexcept
    {
        return {(static_cast<std::uint32_t>(id_.domain) << 28) | (block & (kMaxBlocks - 1)),
                id_.sub,
                static_cast<std::uint32_t>(id_.index),
                static_cast<std::uint32_t>(id_.index >> 32)};
    }

    PhiloxKey key_;
    StreamId id_;
    std::uint32_t block_;
    std::uint32_t lane_ = 0;
    PhiloxCounter cache_{};
};

/// Uniform double on [0, 1) with 53 random bits.
template <class Gen>
double uniform01(Gen& gen)
{
    return static_cast<double>(gen() >> 11) * 0x1.0p-53;
}

/// Uniform double on (0, 1].
template <class Gen>
double uniform_open_closed(Gen& gen)
{
    return static_cast<double>((gen() >> 11) + 1) * 0x1.0p-53;
}

/// Two independent standard normals (Box-Muller). Consumes exactly two words.
template <class Gen>
std::pair<double, double> standard_normal_pair(Gen& gen)
{
    const double radius = std::sqrt(-2.0 * std::log(uniform_open_closed(gen)));
    const double angle = 2.0 * std::numbers::pi * uniform01(gen);
    return {radius * std::cos(angle), radius * std::sin(angle)};
}

} // namespace relayprobe
