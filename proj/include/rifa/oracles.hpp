/*
 * SPDX-License-Identifier: GPL-2.0-only
 */

/*
 * Independent reference computations. None of these call the closed forms
 * they are used to check.
 */
#pragma once

#include "rifa/mobility.hpp"

#include <cstdint>
#include <functional>
#include <map>
#include <string>
#include <vector>

namespace rifa::oracle
{

/**
 * Distribution of draw counts after `draws` steps of an urn with initial
 * weights `c` and quantum `t`, found by walking every draw sequence and
 * multiplying the per-step proportional probabilities.
 */
std::map<std::vector<std::uint64_t>, double> EnumerateUrn(const std::vector<double>& c, double t, int draws);

/// All count vectors of length n summing to `total`, in lexicographic order.
std::vector<std::vector<std::uint64_t>> Compositions(std::size_t n, std::uint64_t total);

/**
 * First time, on a dt grid, at which two constant-velocity nodes are more
 * than `tr` apart. Infinite when that never happens before `horizon`.
 */
double SteppedExitTime(const NodeKinematics& p, const NodeKinematics& q, double tr, double dt, double horizon);

/// (n-1)! computed by repeated multiplication.
long double FactorialGamma(int n);

struct KsResult
{
    double statistic{0.0};
    double pValue{0.0};
};

/// One-sample Kolmogorov-Smirnov test against Uniform(0, 1), asymptotic p-value.
KsResult KsUniform(std::vector<double> samples);

struct SuiteResult
{
    std::string name;
    bool passed{true};
    std::uint64_t cases{0};
    std::vector<std::string> failures;
    double seconds{0.0};
};

SuiteResult UrnSuite();

using LetFunction = std::function<double(const NodeKinematics&, const NodeKinematics&, double)>;

/// 1,000 seeded in-range pairs plus degenerate cases, checked against SteppedExitTime.
SuiteResult LetSuite(const LetFunction& let);

SuiteResult StirlingSuite();

/// Link expiry with the sign of the cross term flipped; used to prove the LET suite can fail.
double LinkExpiryTimeSignFlipped(const NodeKinematics& p, const NodeKinematics& q, double tr);

} // namespace rifa::oracle
