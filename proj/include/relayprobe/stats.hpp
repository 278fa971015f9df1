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
#include <cstddef>
#include <span>
#include <vector>

#include "relayprobe/errors.hpp"

namespace relayprobe {

inline constexpr std::size_t kDefaultBatches = 30;

/// Batch-means standard error of the sample mean of `values`.
///
/// The series is cut into `batches` equal consecutive batches; trailing
/// values that do not fill a batch are left out of the variance estimate.
inline double batch_means_stderr(std::span<const double> values, std::size_t batches = kDefaultBatches)
{
    if (batches < 2 || values.size() < batches) {
        throw DomainError("batch_means_stderr: need at least two batches of one value each");
    }
    const std::size_t size = values.size() / batches;
    std::vector<double> means(batches, 0.0);
    for (std::size_t b = 0; b < batches; ++b) {
        double sum = 0.0;
        for (std::size_t i = b * size; i < (b + 1) * size; ++i) {
            sum += values[i];
        }
        means[b] = sum / static_cast<double>(size);
    }
    double grand = 0.0;
    for (double m : means) {
        grand += m;
    }
    grand /= static_cast<double>(batches);
    double ss = 0.0;
    for (double m : means) {
        ss += (m - grand) * (m - grand);
    }
    return std::sqrt(ss / static_cast<double>(batches - 1) / static_cast<double>(batches));
}

/// Batch-means standard error of the ratio sum(num) / sum(den).
///
/// Uses the linearised residual num_b - ratio * den_b per batch, which is
/// the usual delta-method treatment of a renewal-reward estimator.
inline double batch_means_ratio_stderr(std::span<const double> num, std::span<const double> den,
                                       std::size_t batches = kDefaultBatches)
{
    if (num.size() != den.size()) {
        throw DomainError("batch_means_ratio_stderr: length mismatch");
    }
    if (batches < 2 || num.size() < batches) {
        throw DomainError("batch_means_ratio_stderr: need at least two batches of one value each");
    }
    const std::size_t size = num.size() / batches;
    std::vector<double> bnum(batches, 0.0), bden(batches, 0.0);
    double tnum = 0.0, tden = 0.0;
    for (std::size_t b = 0; b < batches; ++b) {
        for (std::size_t i = b * size; i < (b + 1) * size; ++i) {
            bnum[b] += num[i];
            bden[b] += den[i];
        }
        tnum += bnum[b];
        tden += bden[b];
    }
    const double ratio = tnum / tden;
    const double mean_den = tden / static_cast<double>(batches);
    double ss = 0.0;
    for (std::size_t b = 0; b < batches; ++b) {
        const double e = bnum[b] - ratio * bden[b];
        ss += e * e;
    }
    return std::sqrt(ss / static_cast<double>(batches - 1) / static_cast<double>(batches)) / mean_den;
}

} // namespace relayprobe
