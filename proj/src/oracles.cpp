/*
 * SPDX-License-Identifier: GPL-2.0-only
 */
#include "rifa/oracles.hpp"

#include "rifa/pheromone.hpp"
#include "rifa/random.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numbers>

namespace rifa::oracle
{

namespace
{

void
Walk(std::vector<double>& weights,
     std::vector<std::uint64_t>& counts,
     double t,
     int left,
     double prob,
     std::map<std::vector<std::uint64_t>, double>& out)
{
    if (left == 0)
    {
        out[counts] += prob;
        return;
    }
    double total = 0.0;
    for (double w : weights)
    {
        total += w;
    }
    for (std::size_t d = 0; d < weights.size(); ++d)
    {
        const double p = weights[d] / total;
        weights[d] += t;
        ++counts[d];
        Walk(weights, counts, t, left - 1, prob * p, out);
        --counts[d];
        weights[d] -= t;
    }
}

void
Compose(std::size_t n, std::uint64_t left, std::vector<std::uint64_t>& cur, std::vector<std::vector<std::uint64_t>>& out)
{
    if (cur.size() + 1 == n)
    {
        cur.push_back(left);
        out.push_back(cur);
        cur.pop_back();
        return;
    }
    for (std::uint64_t a = 0; a <= left; ++a)
    {
        cur.push_back(a);
        Compose(n, left - a, cur, out);
        cur.pop_back();
    }
}

std::string
Describe(const char* fmt, double a, double b, double c)
{
    char buf[256];
    std::snprintf(buf, sizeof buf, fmt, a, b, c);
    return buf;
}

class Timer
{
  public:
    double Seconds() const
    {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - m_start).count();
    }

  private:
    std::chrono::steady_clock::time_point m_start{std::chrono::steady_clock::now()};
};

void
Fail(SuiteResult& r, std::string what)
{
    r.passed = false;
    if (r.failures.size() < 20)
    {
        r.failures.push_back(std::move(what));
    }
}

} // namespace

std::map<std::vector<std::uint64_t>, double>
EnumerateUrn(const std::vector<double>& c, double t, int draws)
{
    std::map<std::vector<std::uint64_t>, double> out;
    std::vector<double> weights = c;
    std::vector<std::uint64_t> counts(c.size(), 0);
    Walk(weights, counts, t, draws, 1.0, out);
    return out;
}

std::vector<std::vector<std::uint64_t>>
Compositions(std::size_t n, std::uint64_t total)
{
    std::vector<std::vector<std::uint64_t>> out;
    if (n == 0)
    {
        return out;
    }
    std::vector<std::uint64_t> cur;
    Compose(n, total, cur, out);
    return out;
}

double
SteppedExitTime(const NodeKinematics& p, const NodeKinematics& q, double tr, double dt, double horizon)
{
    const double pvx = p.speed * std::cos(p.heading);
    const double pvy = p.speed * std::sin(p.heading);
    const double qvx = q.speed * std::cos(q.heading);
    const double qvy = q.speed * std::sin(q.heading);
    for (std::uint64_t k = 1;; ++k)
    {
        const double t = static_cast<double>(k) * dt;
        if (t > horizon)
        {
            return std::numeric_limits<double>::infinity();
        }
        const double dx = (p.x + pvx * t) - (q.x + qvx * t);
        const double dy = (p.y + pvy * t) - (q.y + qvy * t);
        if (std::sqrt(dx * dx + dy * dy) > tr)
        {
            return t;
        }
    }
}

long double
FactorialGamma(int n)
{
    long double f = 1.0L;
    for (int k = 2; k < n; ++k)
    {
        f *= static_cast<long double>(k);
    }
    return f;
}

KsResult
KsUniform(std::vector<double> samples)
{
    std::sort(samples.begin(), samples.end());
    const double n = static_cast<double>(samples.size());
    double d = 0.0;
    for (std::size_t i = 0; i < samples.size(); ++i)
    {
        const double x = std::clamp(samples[i], 0.0, 1.0);
        d = std::max(d, static_cast<double>(i + 1) / n - x);
        d = std::max(d, x - static_cast<double>(i) / n);
    }
    const double sq = std::sqrt(n);
    const double lambda = (sq + 0.12 + 0.11 / sq) * d;
    double p = 0.0;
    for (int k = 1; k <= 100; ++k)
    {
        const double term = std::exp(-2.0 * k * k * lambda * lambda);
        p += (k % 2 == 1 ? 2.0 : -2.0) * term;
        if (term < 1e-16)
        {
            break;
        }
    }
    return KsResult{d, std::clamp(p, 0.0, 1.0)};
}

SuiteResult
UrnSuite()
{
    Timer timer;
    SuiteResult r;
    r.name = "urn-enumeration";
    for (std::size_t n = 2; n <= 3; ++n)
    {
        std::vector<double> c(n, 1.0);
        const std::size_t combos = n == 2 ? 9 : 27;
        for (std::size_t code = 0; code < combos; ++code)
        {
            std::size_t rest = code;
            for (std::size_t d = 0; d < n; ++d)
            {
                c[d] = static_cast<double>(1 + rest % 3);
                rest /= 3;
            }
            for (double t : {1.0, 2.0})
            {
                const PheromoneTable table(c, t);
                for (int b = 1; b <= 6; ++b)
                {
                    const auto reference = EnumerateUrn(c, t, b);
                    double sum = 0.0;
                    for (const auto& counts : Compositions(n, static_cast<std::uint64_t>(b)))
                    {
                        ++r.cases;
                        const double got = UrnProbability(table, CountVector{counts});
                        sum += got;
                        auto it = reference.find(counts);
                        const double want = it == reference.end() ? 0.0 : it->second;
                        if (std::abs(got - want) > 1e-9)
                        {
                            Fail(r, Describe("n=%g b=%g: |P - enumeration| = %.3g", double(n), double(b), std::abs(got - want)));
                        }
                    }
                    if (std::abs(sum - 1.0) > 1e-9)
                    {
                        Fail(r, Describe("n=%g b=%g: distribution sums to %.12g", double(n), double(b), sum));
                    }
                }
            }
        }
    }
    r.seconds = timer.Seconds();
    return r;
}

SuiteResult
LetSuite(const LetFunction& let)
{
    Timer timer;
    SuiteResult r;
    r.name = "link-expiry";
    constexpr double tr = 200.0;
    constexpr double dt = 1e-3;
    constexpr double horizon = 1e6;
    const auto check = [&](const NodeKinematics& p, const NodeKinematics& q) {
        ++r.cases;
        const double got = let(p, q, tr);
        const double want = SteppedExitTime(p, q, tr, dt, horizon);
        if (std::isinf(want) || std::isinf(got))
        {
            if (std::isinf(want) != std::isinf(got))
            {
                Fail(r, Describe("formula %.6g vs stepped %.6g (dt %g)", got, want, dt));
            }
            return;
        }
        const double tol = std::max(0.005 * want, 0.010);
        if (!(std::abs(got - want) <= tol))
        {
            Fail(r, Describe("formula %.6g s vs stepped %.6g s, tolerance %.3g s", got, want, tol));
        }
    };

    RandomStream rng(20240917);
    for (int i = 0; i < 1000; ++i)
    {
        NodeKinematics p;
        p.x = rng.Uniform(0.0, 1200.0);
        p.y = rng.Uniform(0.0, 1200.0);
        p.speed = rng.Uniform(20.0, 25.0);
        p.heading = rng.Uniform(0.0, 2.0 * std::numbers::pi);
        const double rho = tr * std::sqrt(rng.Uniform01());
        const double phi = rng.Uniform(0.0, 2.0 * std::numbers::pi);
        NodeKinematics q;
        q.x = p.x + rho * std::cos(phi);
        q.y = p.y + rho * std::sin(phi);
        q.speed = rng.Uniform(20.0, 25.0);
        q.heading = rng.Uniform(0.0, 2.0 * std::numbers::pi);
        check(p, q);
    }

    // Degenerate cases: no relative motion never breaks.
    NodeKinematics a{100.0, 100.0, 0.0, 0.0};
    NodeKinematics b{150.0, 120.0, 0.0, 0.0};
    check(a, b);
    NodeKinematics c{100.0, 100.0, 22.0, 1.0};
    NodeKinematics d{250.0, 80.0, 22.0, 1.0};
    check(c, d);
    NodeKinematics e{500.0, 500.0, 20.0, 0.0};
    NodeKinematics f{500.0, 500.0, 0.0, 0.0};
    check(e, f);
    r.seconds = timer.Seconds();
    return r;
}

SuiteResult
StirlingSuite()
{
    Timer timer;
    SuiteResult r;
    r.name = "stirling";
    double previous = std::numeric_limits<double>::infinity();
    for (int b = 10; b <= 100; ++b)
    {
        ++r.cases;
        const long double exact = FactorialGamma(b);
        const long double approx = StirlingGamma(static_cast<double>(b));
        const double rel = static_cast<double>(std::fabs(approx - exact) / exact);
        if (!(rel < 0.01))
        {
            Fail(r, Describe("b=%g: relative error %.4g (limit %.2g)", b, rel, 0.01));
        }
        if (!(rel < previous))
        {
            Fail(r, Describe("b=%g: relative error %.6g not below previous %.6g", b, rel, previous));
        }
        previous = rel;
    }
    r.seconds = timer.Seconds();
    return r;
}

double
LinkExpiryTimeSignFlipped(const NodeKinematics& p, const NodeKinematics& q, double tr)
{
    const double dvx = p.VelocityX() - q.VelocityX();
    const double dx = p.x - q.x;
    const double dvy = p.VelocityY() - q.VelocityY();
    const double dy = p.y - q.y;
    const double denom = dvx * dvx + dvy * dvy;
    if (denom == 0.0)
    {
        return std::numeric_limits<double>::infinity();
    }
    const double cross = dvx * dy - dx * dvy;
    const double disc = std::max(0.0, denom * tr * tr - cross * cross);
    return std::max(0.0, ((dvx * dx + dvy * dy) + std::sqrt(disc)) / denom);
}

} // namespace rifa::oracle
