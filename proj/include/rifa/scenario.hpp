/*
 * SPDX-License-Identifier: GPL-2.0-only
 */
#pragma once

#include "rifa/energy.hpp"
#include "rifa/mobility.hpp"
#include "rifa/routing.hpp"

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace rifa
{

struct MetricsReport;

struct ChannelModel
{
    double tr{200.0};
    double perHopLatency{0.002};
    double lossProbability{0.01};

    bool operator==(const ChannelModel&) const = default;
};

/**
 * Everything a run needs. An unset `flowCount` means max(1, nodeCount / 10);
 * a nonzero `fileSizeKb` turns every flow into a finite burst of
 * ceil(fileSizeKb * 1024 / packetSize) packets. An unset `warningMargin`
 * means helloInterval + 0.5 s.
 */
struct Scenario
{
    std::uint32_t nodeCount{50};
    AreaSpec area;
    ValueRange speedRange{20.0, 25.0};
    ValueRange pauseRange{0.0, 50.0};
    double simDuration{600.0};
    std::uint32_t packetSize{512};
    double cbrRate{4.0};
    std::optional<std::uint32_t> flowCount;
    double fileSizeKb{0.0};
    Protocol protocol{Protocol::Rifa};
    double helloInterval{1.0};
    double initialEnergy{100.0};
    double dangerFraction{0.2};
    OpiWeights opiWeights;
    double depositQuantum{1.0};
    double pheromoneInitial{1.0};
    double pheromoneDecay{1.0};
    bool failurePrediction{true};
    std::optional<double> warningMargin;
    std::uint32_t sendBufferCapacity{64};
    double sendBufferTimeout{30.0};
    std::uint64_t seed{1};
    RadioCostModel radioCosts;
    ChannelModel channel;

    bool operator==(const Scenario& other) const;

    std::uint32_t EffectiveFlowCount() const;
    double EffectiveWarningMargin() const;
    RoutingConfig MakeRoutingConfig() const;
};

inline bool
operator==(const AreaSpec& a, const AreaSpec& b)
{
    return a.width == b.width && a.height == b.height;
}

/// Library defaults with a fixed 10 s pause.
Scenario FixedPausePreset();

/// Parses `[section]` / `key = value` text; `#` and `;` start comments.
Scenario ParseScenario(std::string_view text);
Scenario LoadScenario(const std::filesystem::path& path);
std::string SerializeScenario(const Scenario& scenario);

/// Throws ValidationError naming the first offending key.
void ValidateScenario(const Scenario& scenario);

enum class SweepAxis
{
    Nodes,
    Pause,
    FileSize,
};

std::string_view ToString(SweepAxis axis);
std::optional<SweepAxis> ParseSweepAxis(std::string_view name);

struct SweepSpec
{
    Scenario base;
    SweepAxis axis{SweepAxis::Nodes};
    std::vector<double> values;
    std::vector<std::uint64_t> seeds;
};

struct SweepPoint
{
    std::size_t valueIndex{0};
    std::size_t seedIndex{0};
    double axisValue{0.0};
    Scenario scenario;
};

/// Applies one axis value to a scenario.
Scenario WithAxisValue(Scenario scenario, SweepAxis axis, double value);

/// values x seeds, ordered by (value index, seed index).
std::vector<SweepPoint> ExpandSweep(const SweepSpec& spec);

struct ResultRow
{
    std::string protocol;
    double axisValue{0.0};
    std::uint64_t seed{0};
    std::optional<double> pdrPercent;
    std::optional<double> e2edMs;
    double econsJoules{0.0};
    std::uint64_t routesDiscovered{0};
    std::uint64_t warningsEmitted{0};
    std::uint64_t packetsSent{0};
    std::uint64_t packetsReceived{0};
};

ResultRow MakeResultRow(const MetricsReport& report, double axisValue);

std::string ResultsHeader();
std::string FormatResultRow(const ResultRow& row);

/// Per-run rows to `path`; means and standard deviations to `<stem>_aggregate.csv`.
void WriteResults(const std::vector<ResultRow>& rows, const std::filesystem::path& path);

std::string FormatAggregate(const std::vector<ResultRow>& rows);
/// One row per axis value, one mean-PDR/E2ED/Econs column group per protocol.
std::string FormatComparison(const std::vector<ResultRow>& rows, std::string_view axisName);

/// Appends rows to a results file one at a time, flushing each, so an
/// interrupted sweep keeps every completed row.
class ResultsWriter
{
  public:
    explicit ResultsWriter(std::filesystem::path path);
    void Append(const ResultRow& row);

  private:
    std::filesystem::path m_path;
};

/// Path of the aggregate file next to `path`.
std::filesystem::path AggregatePath(const std::filesystem::path& path);

} // namespace rifa
