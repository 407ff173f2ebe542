/*
 * SPDX-License-Identifier: GPL-2.0-only
 */
#include "rifa/errors.hpp"
#include "rifa/random.hpp"
#include "rifa/report.hpp"
#include "rifa/scenario.hpp"

#include <doctest.h>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <unistd.h>

using namespace rifa;

namespace
{

std::string
Slurp(const std::filesystem::path& p)
{
    std::ifstream is(p, std::ios::binary);
    std::ostringstream ss;
    ss << is.rdbuf();
    return ss.str();
}

std::size_t
Lines(const std::string& text)
{
    return static_cast<std::size_t>(std::count(text.begin(), text.end(), '\n'));
}

struct TempDir
{
    TempDir()
    {
        static int counter = 0;
        path = std::filesystem::temp_directory_path() /
               ("rifa-scenario-" + std::to_string(::getpid()) + "-" + std::to_string(++counter));
        std::filesystem::create_directories(path);
    }
    ~TempDir()
    {
        std::error_code ec;
        std::filesystem::remove_all(path, ec);
    }
    std::filesystem::path path;
};

Scenario
RandomScenario(RandomStream& rng)
{
    Scenario s;
    s.nodeCount = 2 + static_cast<std::uint32_t>(rng.UniformIndex(500));
    s.area = AreaSpec{rng.Uniform(10.0, 5000.0), rng.Uniform(10.0, 5000.0)};
    const double v = rng.Uniform(0.0, 30.0);
    s.speedRange = ValueRange{v, v + rng.Uniform(0.0, 10.0)};
    const double p = rng.Uniform(0.0, 60.0);
    s.pauseRange = ValueRange{p, p + rng.Uniform(0.0, 60.0)};
    s.simDuration = rng.Uniform(1.0, 1000.0);
    s.packetSize = 1 + static_cast<std::uint32_t>(rng.UniformIndex(4096));
    s.cbrRate = rng.Uniform(0.1, 20.0);
    if (rng.Uniform01() < 0.5)
    {
        s.flowCount = static_cast<std::uint32_t>(rng.UniformIndex(50));
    }
    s.fileSizeKb = rng.Uniform01() < 0.5 ? 0.0 : rng.Uniform(0.5, 64.0);
    s.protocol = static_cast<Protocol>(rng.UniformIndex(3));
    s.helloInterval = rng.Uniform(0.1, 5.0);
    s.initialEnergy = rng.Uniform(1.0, 1000.0);
    s.dangerFraction = rng.Uniform01();
    const double a = rng.Uniform01();
    const double b = rng.Uniform(0.0, 1.0 - a);
    s.opiWeights = OpiWeights{a, b, 1.0 - a - b};
    s.depositQuantum = rng.Uniform(0.01, 5.0);
    s.pheromoneInitial = rng.Uniform(0.01, 5.0);
    s.pheromoneDecay = rng.Uniform(0.01, 1.0);
    s.failurePrediction = rng.Uniform01() < 0.5;
    if (rng.Uniform01() < 0.5)
    {
        s.warningMargin = rng.Uniform(0.0, 5.0);
    }
    s.sendBufferCapacity = 1 + static_cast<std::uint32_t>(rng.UniformIndex(256));
    s.sendBufferTimeout = rng.Uniform(0.5, 120.0);
    s.seed = rng.NextBits();
    s.radioCosts = RadioCostModel{rng.Uniform(0.0, 0.1), rng.Uniform(0.0, 0.1), rng.Uniform(0.0, 0.01)};
    s.channel = ChannelModel{rng.Uniform(10.0, 500.0), rng.Uniform(1e-4, 0.05), rng.Uniform01()};
    return s;
}

ResultRow
Row(std::string protocol, double axis, std::uint64_t seed, double pdr, double econs)
{
    ResultRow r;
    r.protocol = std::move(protocol);
    r.axisValue = axis;
    r.seed = seed;
    r.pdrPercent = pdr;
    r.e2edMs = 10.0;
    r.econsJoules = econs;
    r.packetsSent = 100;
    r.packetsReceived = static_cast<std::uint64_t>(pdr);
    return r;
}

} // namespace

TEST_CASE("fixed-pause preset defaults")
{
    const Scenario s;
    CHECK(s.area.width == 1200.0);
    CHECK(s.area.height == 1200.0);
    CHECK(s.channel.tr == 200.0);
    CHECK(s.speedRange.min == 20.0);
    CHECK(s.speedRange.max == 25.0);
    CHECK(s.simDuration == 600.0);
    CHECK(s.packetSize == 512);
    CHECK(s.nodeCount >= 20);
    CHECK(s.nodeCount <= 125);
    CHECK(s.pauseRange.min == 0.0);
    CHECK(s.pauseRange.max == 50.0);
    CHECK(s.helloInterval == 1.0);
    CHECK(s.dangerFraction == 0.2);
    CHECK(s.opiWeights == OpiWeights{0.4, 0.4, 0.2});
    CHECK(s.EffectiveWarningMargin() == 1.5);
    CHECK(s.EffectiveFlowCount() == 5);
    CHECK(s.radioCosts.txPerPacket == 0.02);
    CHECK(s.radioCosts.rxPerPacket == 0.01);
    CHECK(s.radioCosts.idlePerSecond == 0.001);

    const Scenario preset = FixedPausePreset();
    CHECK(preset.pauseRange.min == 10.0);
    CHECK(preset.pauseRange.max == 10.0);

    CHECK(ParseScenario("") == Scenario{});
}

TEST_CASE("flow count and warning margin defaults")
{
    Scenario s;
    s.nodeCount = 9;
    CHECK(s.EffectiveFlowCount() == 1);
    s.nodeCount = 125;
    CHECK(s.EffectiveFlowCount() == 12);
    s.flowCount = 3;
    CHECK(s.EffectiveFlowCount() == 3);
    s.helloInterval = 2.0;
    CHECK(s.EffectiveWarningMargin() == 2.5);
    s.warningMargin = 0.7;
    CHECK(s.EffectiveWarningMargin() == 0.7);
}

TEST_CASE("parse reads sections, comments and every value form")
{
    const Scenario s = ParseScenario("# experiment\n"
                                     "[simulation]\n"
                                     "node_count = 80   ; nodes\n"
                                     "protocol = baseline-minhop\n"
                                     "seed = 12345678901234\n"
                                     "\n"
                                     "[mobility]\n"
                                     "speed_range = (1.5, 3)\n"
                                     "pause_range = 10, 10\n"
                                     "[traffic]\n"
                                     "flow_count = auto\n"
                                     "file_size_kb = 6\n"
                                     "[routing]\n"
                                     "failure_prediction = off\n"
                                     "opi_weights = 0.5, 0.25, 0.25\n"
                                     "warning_margin = 2\n");
    CHECK(s.nodeCount == 80);
    CHECK(s.protocol == Protocol::BaselineMinHop);
    CHECK(s.seed == 12345678901234ULL);
    CHECK(s.speedRange.min == 1.5);
    CHECK(s.speedRange.max == 3.0);
    CHECK(s.pauseRange.min == 10.0);
    CHECK_FALSE(s.flowCount.has_value());
    CHECK(s.fileSizeKb == 6.0);
    CHECK_FALSE(s.failurePrediction);
    CHECK(s.opiWeights == OpiWeights{0.5, 0.25, 0.25});
    CHECK(s.warningMargin == 2.0);
}

TEST_CASE("parse errors name the line or the key")
{
    const auto lineOf = [](const char* text) {
        try
        {
            ParseScenario(text);
        }
        catch (const ParseError& e)
        {
            return e.Line();
        }
        return -1;
    };
    const auto keyOf = [](const char* text) {
        try
        {
            ParseScenario(text);
        }
        catch (const ValidationError& e)
        {
            return e.Key();
        }
        return std::string("none");
    };

    CHECK(lineOf("[simulation]\nnode_count = lots\n") == 2);
    CHECK(lineOf("node_count = 5\n") == 1);
    CHECK(lineOf("[simulation]\n\n\nnode_count\n") == 4);
    CHECK(lineOf("[simulation\n") == 1);
    CHECK(lineOf("[simulation]\nnode_count = 5\nnode_count = 6\n") == 3);
    CHECK(lineOf("[simulation]\nnode_count =\n") == 2);
    CHECK(lineOf("[mobility]\nspeed_range = 1\n") == 2);
    CHECK(lineOf("[routing]\nfailure_prediction = maybe\n") == 2);

    CHECK(keyOf("[simulation]\nnodes = 5\n") == "nodes");
    CHECK(keyOf("[nowhere]\n") == "nowhere");
    CHECK(keyOf("[simulation]\nnode_count = 1\n") == "node_count");
    CHECK(keyOf("[simulation]\nprotocol = aodv\n") == "protocol");
    CHECK(keyOf("[mobility]\nspeed_range = 5, 1\n") == "speed_range");
    CHECK(keyOf("[routing]\nopi_weights = 0.5, 0.5, 0.5\n") == "opi_weights");
    CHECK(keyOf("[radio]\nloss_probability = 1.5\n") == "loss_probability");
    CHECK(keyOf("[energy]\ninitial_energy = 0\n") == "initial_energy");
    CHECK(keyOf("[simulation]\nsim_duration = -1\n") == "sim_duration");
    CHECK(keyOf("[energy]\ndanger_fraction = 2\n") == "danger_fraction");
}

TEST_CASE("parse and serialize round-trip over generated scenarios")
{
    CHECK(ParseScenario(SerializeScenario(Scenario{})) == Scenario{});
    RandomStream rng(2718);
    for (int i = 0; i < 500; ++i)
    {
        const Scenario s = RandomScenario(rng);
        REQUIRE_NOTHROW(ValidateScenario(s));
        const std::string text = SerializeScenario(s);
        const Scenario back = ParseScenario(text);
        REQUIRE(back == s);
        REQUIRE(SerializeScenario(back) == text);
    }
}

TEST_CASE("load reports missing files")
{
    CHECK_THROWS_AS(LoadScenario("/nonexistent/rifa/scenario.ini"), IoError);
    TempDir dir;
    const auto path = dir.path / "s.ini";
    std::ofstream(path) << "[simulation]\nnode_count = 33\n";
    CHECK(LoadScenario(path).nodeCount == 33);
}

TEST_CASE("sweep expansion")
{
    SweepSpec spec;
    spec.axis = SweepAxis::Nodes;
    spec.values = {20, 40, 60, 80, 100, 120};
    for (std::uint64_t k = 1; k <= 10; ++k)
    {
        spec.seeds.push_back(k);
    }
    const auto points = ExpandSweep(spec);
    REQUIRE(points.size() == 60);
    for (std::size_t i = 0; i < points.size(); ++i)
    {
        CHECK(points[i].valueIndex == i / 10);
        CHECK(points[i].seedIndex == i % 10);
        Scenario expected = spec.base;
        expected.nodeCount = static_cast<std::uint32_t>(spec.values[i / 10]);
        expected.seed = spec.seeds[i % 10];
        CHECK(points[i].scenario == expected);
    }

    SweepSpec single;
    single.axis = SweepAxis::FileSize;
    single.values = {6};
    single.seeds = {42};
    const auto one = ExpandSweep(single);
    REQUIRE(one.size() == 1);
    Scenario expected;
    expected.fileSizeKb = 6.0;
    expected.seed = 42;
    CHECK(one.front().scenario == expected);

    CHECK(WithAxisValue(Scenario{}, SweepAxis::Pause, 25.0).pauseRange.max == 25.0);
    CHECK_THROWS_AS(WithAxisValue(Scenario{}, SweepAxis::Nodes, 20.5), ValidationError);

    SweepSpec empty = single;
    empty.values.clear();
    CHECK_THROWS_AS(ExpandSweep(empty), InvalidArgument);
    empty = single;
    empty.seeds.clear();
    CHECK_THROWS_AS(ExpandSweep(empty), InvalidArgument);
    SweepSpec bad = single;
    bad.axis = SweepAxis::Nodes;
    bad.values = {1};
    CHECK_THROWS_AS(ExpandSweep(bad), ValidationError);

    CHECK(ParseSweepAxis("filesize") == SweepAxis::FileSize);
    CHECK_FALSE(ParseSweepAxis("speed").has_value());
}

TEST_CASE("results and aggregate files")
{
    TempDir dir;
    std::vector<ResultRow> rows;
    for (double axis : {20.0, 40.0})
    {
        for (std::uint64_t seed = 1; seed <= 30; ++seed)
        {
            rows.push_back(Row("rifa", axis, seed, 80.0, 12.5));
        }
    }
    const auto path = dir.path / "results.csv";
    WriteResults(rows, path);
    const std::string body = Slurp(path);
    CHECK(Lines(body) == 61);
    CHECK(body.rfind(ResultsHeader(), 0) == 0);
    CHECK(body.find("rifa,20,1,80.000000,10.000000,12.500000,0,0,100,80\n") != std::string::npos);

    const std::string agg = Slurp(AggregatePath(path));
    CHECK(AggregatePath(path).filename() == "results_aggregate.csv");
    CHECK(Lines(agg) == 3);
    CHECK(agg.find("rifa,20,30,80.000000,0.000000,10.000000,0.000000,12.500000,0.000000") != std::string::npos);

    WriteResults(rows, dir.path / "again.csv");
    CHECK(Slurp(dir.path / "again.csv") == body);

    CHECK_THROWS_AS(WriteResults(rows, "/nonexistent/dir/results.csv"), IoError);
    CHECK_THROWS_AS(WriteResults({}, dir.path / "none.csv"), InvalidArgument);
}

TEST_CASE("aggregate means, deviations and missing metrics")
{
    std::vector<ResultRow> rows{Row("rifa", 2, 1, 70.0, 10.0), Row("rifa", 2, 2, 90.0, 14.0)};
    ResultRow silent = Row("rifa", 4, 1, 0.0, 3.0);
    silent.pdrPercent.reset();
    silent.e2edMs.reset();
    rows.push_back(silent);
    const std::string agg = FormatAggregate(rows);
    CHECK(agg.find("rifa,2,2,80.000000,14.142136,10.000000,0.000000,12.000000,2.828427") != std::string::npos);
    CHECK(agg.find("rifa,4,1,no-data,no-data,no-data,no-data,3.000000,0.000000") != std::string::npos);
}

TEST_CASE("comparison file has one column group per protocol")
{
    const std::vector<ResultRow> rows{Row("rifa", 20, 1, 90.0, 5.0),
                                      Row("baseline-flood", 20, 1, 80.0, 6.0),
                                      Row("rifa", 40, 1, 85.0, 7.0)};
    const std::string text = FormatComparison(rows, "nodes");
    std::istringstream is(text);
    std::string header;
    std::string first;
    std::string second;
    std::getline(is, header);
    std::getline(is, first);
    std::getline(is, second);
    CHECK(header ==
          "nodes,rifa_pdr_percent,rifa_e2ed_ms,rifa_econs_joules,"
          "baseline-flood_pdr_percent,baseline-flood_e2ed_ms,baseline-flood_econs_joules");
    CHECK(first == "20,90.000000,10.000000,5.000000,80.000000,10.000000,6.000000");
    CHECK(second == "40,85.000000,10.000000,7.000000,no-data,no-data,no-data");
}

TEST_CASE("appending writer keeps completed rows")
{
    TempDir dir;
    const auto path = dir.path / "live.csv";
    ResultsWriter w(path);
    CHECK(Slurp(path) == ResultsHeader());
    w.Append(Row("rifa", 20, 1, 50.0, 1.0));
    w.Append(Row("rifa", 20, 2, 60.0, 2.0));
    const std::string body = Slurp(path);
    CHECK(Lines(body) == 3);
    CHECK(body.substr(body.size() - FormatResultRow(Row("rifa", 20, 2, 60.0, 2.0)).size()) ==
          FormatResultRow(Row("rifa", 20, 2, 60.0, 2.0)));
}

TEST_CASE("report serialization")
{
    MetricsReport r;
    r.protocol = "rifa";
    r.seed = 3;
    r.packetsSent = 10;
    r.packetsReceived = 7;
    r.pdrPercent = 70.0;
    const std::string text = SerializeReport(r);
    CHECK(text.find("protocol = rifa\n") != std::string::npos);
    CHECK(text.find("pdr_percent = 70.000000000\n") != std::string::npos);
    CHECK(text.find("e2ed_ms = no-data\n") != std::string::npos);
    CHECK(SerializeReport(r) == text);
}
