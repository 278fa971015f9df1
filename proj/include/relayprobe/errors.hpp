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

#include <cstdint>
#include <stdexcept>
#include <string>

namespace relayprobe {

/// Argument outside the mathematical domain of an operation.
class DomainError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

/// Malformed or inconsistent scenario / sweep description.
class ConfigError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// The rate distribution has E[R] = 0, so no relay can ever carry data.
class DegenerateDistributionError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A threshold equation has no root for the requested arguments.
class InfeasibleError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class NonConvergenceError : public std::runtime_error {
public:
    NonConvergenceError(const std::string& what, double last_iterate)
        : std::runtime_error(what), last_iterate_(last_iterate)
    {
    }

    double last_iterate() const noexcept { return last_iterate_; }

private:
    double last_iterate_;
};

/// A period hit the probe limit without the policy ever stopping.
class RunawayPeriodError : public std::runtime_error {
public:
    RunawayPeriodError(const std::string& what, std::uint64_t probes)
        : std::runtime_error(what), probes_(probes)
    {
    }

    std::uint64_t probes() const noexcept { return probes_; }

private:
    std::uint64_t probes_;
};

} // namespace relayprobe
