/*
 * SPDX-License-Identifier: GPL-2.0-only
 */
#include "rifa/scenario.hpp"

#include "rifa/errors.hpp"
#include "rifa/report.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <map>
#include <set>
#include <sstream>

namespace rifa
{

namespace
{

std::string_view
Trim(std::string_view s)
{
    const auto* ws = " \t\r";
    const auto b = s.find_first_not_of(ws);
    if (b == std::string_view::npos)
    {
        return {};
    }
    const auto e = s.find_last_not_of(ws);
    return s.substr(b, e - b + 1);
}

std::string
FormatDouble(double v)
{
    char buf[64];
    auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, end);
}

double
ParseDouble(std::string_view text, int line, std::string_view key)
{
    text = Trim(text);
    if (!text.empty() && text.front() == '+')
    {
        text.remove_prefix(1);
    }
    double v = 0.0;
    auto [end, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
    if (ec != std::errc{} || end != text.data() + text.size() || text.empty())
    {
        throw ParseError(line, std::string(key) + ": expected a number, got '" + std::string(text) + "'");
    }
    return v;
}

std::uint64_t
ParseUnsigned(std::string_view text, int line, std::string_view key)
{
    text = Trim(text);
    std::uint64_t v = 0;
    auto [end, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
    if (ec == std::errc::result_out_of_range)
    {
        throw ValidationError(std::string(key), "value out of range");
    }
    if (ec != std::errc{} || end != text.data() + text.size() || text.empty())
    {
        throw ParseError(line, std::string(key) + ": expected a non-negative integer, got '" + std::string(text) + "'");
    }
    return v;
}

std::vector<double>
ParseList(std::string_view text, int line, std::string_view key)
{
    text = Trim(text);
    if (text.size() >= 2 && text.front() == '(' && text.back() == ')')
    {
        text = text.substr(1, text.size() - 2);
    }
    std::vector<double> out;
    while (true)
    {
        const auto comma = text.find(',');
        out.push_back(ParseDouble(text.substr(0, comma), line, key));
        if (comma == std::string_view::npos)
        {
            break;
        }
        text.remove_prefix(comma + 1);
    }
    return out;
}

ValueRange
ParseRange(std::string_view text, int line, std::string_view key)
{
    const auto v = ParseList(text, line, key);
    if (v.size() != 2)
    {
        throw ParseError(line, std::string(key) + ": expected 'min, max'");
    }
    return ValueRange{v[0], v[1]};
}

bool
ParseBool(std::string_view text, int line, std::string_view key)
{
    text = Trim(text);
    if (text == "true" || text == "yes" || text == "on" || text == "1")
    {
        return true;
    }
    if (text == "false" || text == "no" || text == "off" || text == "0")
    {
        return false;
    }
    throw ParseError(line, std::string(key) + ": expected true or false");
}

std::uint32_t
Narrow(std::uint64_t v, std::string_view key)
{
    if (v > 0xffffffffULL)
    {
        throw ValidationError(std::string(key), "value out of range");
    }
    return static_cast<std::uint32_t>(v);
}

using Setter = std::function<void(Scenario&, std::string_view, int)>;

const std::map<std::string, Setter, std::less<>>&
Setters()
{
    static const std::map<std::string, Setter, std::less<>> table = {
        {"simulation.node_count",
         [](Scenario& s, std::string_view v, int l) {
             s.nodeCount = Narrow(ParseUnsigned(v, l, "node_count"), "node_count");
         }},
        {"simulation.sim_duration",
         [](Scenario& s, std::string_view v, int l) { s.simDuration = ParseDouble(v, l, "sim_duration"); }},
        {"simulation.seed", [](Scenario& s, std::string_view v, int l) { s.seed = ParseUnsigned(v, l, "seed"); }},
        {"simulation.protocol",
         [](Scenario& s, std::string_view v, int) {
             auto p = ParseProtocol(Trim(v));
             if (!p)
             {
                 throw ValidationError("protocol", "unknown protocol '" + std::string(Trim(v)) + "'");
             }
             s.protocol = *p;
         }},
        {"simulation.area_width",
         [](Scenario& s, std::string_view v, int l) { s.area.width = ParseDouble(v, l, "area_width"); }},
        {"simulation.area_height",
         [](Scenario& s, std::string_view v, int l) { s.area.height = ParseDouble(v, l, "area_height"); }},
        {"mobility.speed_range",
         [](Scenario& s, std::string_view v, int l) { s.speedRange = ParseRange(v, l, "speed_range"); }},
        {"mobility.pause_range",
         [](Scenario& s, std::string_view v, int l) { s.pauseRange = ParseRange(v, l, "pause_range"); }},
        {"traffic.packet_size",
         [](Scenario& s, std::string_view v, int l) {
             s.packetSize = Narrow(ParseUnsigned(v, l, "packet_size"), "packet_size");
         }},
        {"traffic.cbr_rate", [](Scenario& s, std::string_view v, int l) { s.cbrRate = ParseDouble(v, l, "cbr_rate"); }},
        {"traffic.flow_count",
         [](Scenario& s, std::string_view v, int l) {
             if (Trim(v) == "auto")
             {
                 s.flowCount.reset();
             }
             else
             {
                 s.flowCount = Narrow(ParseUnsigned(v, l, "flow_count"), "flow_count");
             }
         }},
        {"traffic.file_size_kb",
         [](Scenario& s, std::string_view v, int l) { s.fileSizeKb = ParseDouble(v, l, "file_size_kb"); }},
        {"radio.tr", [](Scenario& s, std::string_view v, int l) { s.channel.tr = ParseDouble(v, l, "tr"); }},
        {"radio.per_hop_latency",
         [](Scenario& s, std::string_view v, int l) {
             s.channel.perHopLatency = ParseDouble(v, l, "per_hop_latency");
         }},
        {"radio.loss_probability",
         [](Scenario& s, std::string_view v, int l) {
             s.channel.lossProbability = ParseDouble(v, l, "loss_probability");
         }},
        {"energy.initial_energy",
         [](Scenario& s, std::string_view v, int l) { s.initialEnergy = ParseDouble(v, l, "initial_energy"); }},
        {"energy.danger_fraction",
         [](Scenario& s, std::string_view v, int l) { s.dangerFraction = ParseDouble(v, l, "danger_fraction"); }},
        {"energy.tx_cost",
         [](Scenario& s, std::string_view v, int l) { s.radioCosts.txPerPacket = ParseDouble(v, l, "tx_cost"); }},
        {"energy.rx_cost",
         [](Scenario& s, std::string_view v, int l) { s.radioCosts.rxPerPacket = ParseDouble(v, l, "rx_cost"); }},
        {"energy.idle_cost",
         [](Scenario& s, std::string_view v, int l) {
             s.radioCosts.idlePerSecond = ParseDouble(v, l, "idle_cost");
         }},
        {"routing.hello_interval",
         [](Scenario& s, std::string_view v, int l) { s.helloInterval = ParseDouble(v, l, "hello_interval"); }},
        {"routing.failure_prediction",
         [](Scenario& s, std::string_view v, int l) {
             s.failurePrediction = ParseBool(v, l, "failure_prediction");
         }},
        {"routing.warning_margin",
         [](Scenario& s, std::string_view v, int l) {
             if (Trim(v) == "auto")
             {
                 s.warningMargin.reset();
             }
             else
             {
                 s.warningMargin = ParseDouble(v, l, "warning_margin");
             }
         }},
        {"routing.opi_weights",
         [](Scenario& s, std::string_view v, int l) {
             const auto w = ParseList(v, l, "opi_weights");
             if (w.size() != 3)
             {
                 throw ParseError(l, "opi_weights: expected 'lifetime, energy, hops'");
             }
             s.opiWeights = OpiWeights{w[0], w[1], w[2]};
         }},
        {"routing.deposit_quantum",
         [](Scenario& s, std::string_view v, int l) { s.depositQuantum = ParseDouble(v, l, "deposit_quantum"); }},
        {"routing.pheromone_initial",
         [](Scenario& s, std::string_view v, int l) {
             s.pheromoneInitial = ParseDouble(v, l, "pheromone_initial");
         }},
        {"routing.pheromone_decay",
         [](Scenario& s, std::string_view v, int l) { s.pheromoneDecay = ParseDouble(v, l, "pheromone_decay"); }},
        {"routing.send_buffer_capacity",
         [](Scenario& s, std::string_view v, int l) {
             s.sendBufferCapacity = Narrow(ParseUnsigned(v, l, "send_buffer_capacity"), "send_buffer_capacity");
         }},
        {"routing.send_buffer_timeout",
         [](Scenario& s, std::string_view v, int l) {
             s.sendBufferTimeout = ParseDouble(v, l, "send_buffer_timeout");
         }},
    };
    return table;
}

void
Require(bool ok, const char* key, const char* what)
{
    if (!ok)
    {
        throw ValidationError(key, what);
    }
}

bool
Finite(double v)
{
    return std::isfinite(v);
}

double
Mean(const std::vector<double>& v)
{
    double s = 0.0;
    for (double x : v)
    {
        s += x;
    }
    return s / static_cast<double>(v.size());
}

double
SampleStd(const std::vector<double>& v)
{
    if (v.size() < 2)
    {
        return 0.0;
    }
    const double m = Mean(v);
    double s = 0.0;
    for (double x : v)
    {
        s += (x - m) * (x - m);
    }
    return std::sqrt(s / static_cast<double>(v.size() - 1));
}

std::string
Fixed(double v)
{
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.6f", v);
    return buf;
}

std::string
OptionalFixed(const std::optional<double>& v)
{
    return v ? Fixed(*v) : std::string("no-data");
}

std::string
AxisText(double v)
{
    return FormatDouble(v);
}

struct Group
{
    std::string protocol;
    double axisValue;
    std::vector<const ResultRow*> rows;
};

std::vector<Group>
GroupRows(const std::vector<ResultRow>& rows)
{
    std::vector<Group> groups;
    for (const ResultRow& r : rows)
    {
        auto it = std::find_if(groups.begin(), groups.end(), [&](const Group& g) {
            return g.protocol == r.protocol && g.axisValue == r.axisValue;
        });
        if (it == groups.end())
        {
            groups.push_back(Group{r.protocol, r.axisValue, {}});
            it = std::prev(groups.end());
        }
        it->rows.push_back(&r);
    }
    return groups;
}

template <typename F>
std::vector<double>
Collect(const Group& g, F field)
{
    std::vector<double> out;
    for (const ResultRow* r : g.rows)
    {
        std::optional<double> v = field(*r);
        if (v)
        {
            out.push_back(*v);
        }
    }
    return out;
}

void
WriteFile(const std::filesystem::path& path, const std::string& content)
{
    std::ofstream os(path, std::ios::binary | std::ios::trunc);
    if (!os)
    {
        throw IoError("cannot open '" + path.string() + "' for writing");
    }
    os << content;
    os.flush();
    if (!os)
    {
        throw IoError("failed writing '" + path.string() + "'");
    }
}

} // namespace

bool
Scenario::operator==(const Scenario& o) const
{
    return nodeCount == o.nodeCount && area == o.area && speedRange == o.speedRange &&
           pauseRange == o.pauseRange && simDuration == o.simDuration && packetSize == o.packetSize &&
           cbrRate == o.cbrRate && flowCount == o.flowCount && fileSizeKb == o.fileSizeKb &&
           protocol == o.protocol && helloInterval == o.helloInterval && initialEnergy == o.initialEnergy &&
           dangerFraction == o.dangerFraction && opiWeights == o.opiWeights && depositQuantum == o.depositQuantum &&
           pheromoneInitial == o.pheromoneInitial && pheromoneDecay == o.pheromoneDecay &&
           failurePrediction == o.failurePrediction && warningMargin == o.warningMargin &&
           sendBufferCapacity == o.sendBufferCapacity && sendBufferTimeout == o.sendBufferTimeout &&
           seed == o.seed && radioCosts == o.radioCosts && channel == o.channel;
}

std::uint32_t
Scenario::EffectiveFlowCount() const
{
    return flowCount ? *flowCount : std::max<std::uint32_t>(1, nodeCount / 10);
}

double
Scenario::EffectiveWarningMargin() const
{
    return warningMargin ? *warningMargin : helloInterval + 0.5;
}

RoutingConfig
Scenario::MakeRoutingConfig() const
{
    RoutingConfig c;
    c.protocol = protocol;
    c.tr = channel.tr;
    c.helloInterval = helloInterval;
    c.warningMargin = EffectiveWarningMargin();
    c.weights = opiWeights;
    c.depositQuantum = depositQuantum;
    c.pheromoneInitial = pheromoneInitial;
    c.pheromoneDecay = pheromoneDecay;
    c.failurePrediction = failurePrediction;
    c.sendBufferCapacity = sendBufferCapacity;
    c.sendBufferTimeout = sendBufferTimeout;
    return c;
}

Scenario
FixedPausePreset()
{
    Scenario s;
    s.pauseRange = ValueRange{10.0, 10.0};
    return s;
}

Scenario
ParseScenario(std::string_view text)
{
    Scenario s;
    std::string section;
    std::set<std::string, std::less<>> seen;
    int line = 0;
    while (!text.empty())
    {
        ++line;
        const auto nl = text.find('\n');
        std::string_view raw = text.substr(0, nl);
        text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);

        const auto comment = raw.find_first_of("#;");
        std::string_view body = Trim(raw.substr(0, comment));
        if (body.empty())
        {
            continue;
        }
        if (body.front() == '[')
        {
            if (body.back() != ']' || body.size() < 3)
            {
                throw ParseError(line, "malformed section header");
            }
            section = std::string(Trim(body.substr(1, body.size() - 2)));
            static const std::set<std::string, std::less<>> known = {
                "simulation", "mobility", "traffic", "radio", "energy", "routing"};
            if (!known.contains(section))
            {
                throw ValidationError(section, "unknown section (line " + std::to_string(line) + ")");
            }
            continue;
        }
        const auto eq = body.find('=');
        if (eq == std::string_view::npos)
        {
            throw ParseError(line, "expected 'key = value'");
        }
        const std::string key(Trim(body.substr(0, eq)));
        const std::string_view value = Trim(body.substr(eq + 1));
        if (key.empty())
        {
            throw ParseError(line, "missing key");
        }
        if (section.empty())
        {
            throw ParseError(line, "key '" + key + "' outside any [section]");
        }
        const std::string full = section + "." + key;
        auto it = Setters().find(full);
        if (it == Setters().end())
        {
            throw ValidationError(key, "unknown key in [" + section + "] (line " + std::to_string(line) + ")");
        }
        if (!seen.insert(full).second)
        {
            throw ParseError(line, "duplicate key '" + key + "'");
        }
        if (value.empty())
        {
            throw ParseError(line, "missing value for '" + key + "'");
        }
        it->second(s, value, line);
    }
    ValidateScenario(s);
    return s;
}

Scenario
LoadScenario(const std::filesystem::path& path)
{
    std::ifstream is(path, std::ios::binary);
    if (!is)
    {
        throw IoError("cannot open scenario '" + path.string() + "'");
    }
    std::ostringstream ss;
    ss << is.rdbuf();
    return ParseScenario(ss.str());
}

std::string
SerializeScenario(const Scenario& s)
{
    std::string out;
    const auto kv = [&](std::string_view key, const std::string& value) {
        out.append(key).append(" = ").append(value).push_back('\n');
    };
    const auto range = [](const ValueRange& r) { return FormatDouble(r.min) + ", " + FormatDouble(r.max); };

    out += "[simulation]\n";
    kv("node_count", std::to_string(s.nodeCount));
    kv("sim_duration", FormatDouble(s.simDuration));
    kv("seed", std::to_string(s.seed));
    kv("protocol", std::string(ToString(s.protocol)));
    kv("area_width", FormatDouble(s.area.width));
    kv("area_height", FormatDouble(s.area.height));
    out += "\n[mobility]\n";
    kv("speed_range", range(s.speedRange));
    kv("pause_range", range(s.pauseRange));
    out += "\n[traffic]\n";
    kv("packet_size", std::to_string(s.packetSize));
    kv("cbr_rate", FormatDouble(s.cbrRate));
    kv("flow_count", s.flowCount ? std::to_string(*s.flowCount) : std::string("auto"));
    kv("file_size_kb", FormatDouble(s.fileSizeKb));
    out += "\n[radio]\n";
    kv("tr", FormatDouble(s.channel.tr));
    kv("per_hop_latency", FormatDouble(s.channel.perHopLatency));
    kv("loss_probability", FormatDouble(s.channel.lossProbability));
    out += "\n[energy]\n";
    kv("initial_energy", FormatDouble(s.initialEnergy));
    kv("danger_fraction", FormatDouble(s.dangerFraction));
    kv("tx_cost", FormatDouble(s.radioCosts.txPerPacket));
    kv("rx_cost", FormatDouble(s.radioCosts.rxPerPacket));
    kv("idle_cost", FormatDouble(s.radioCosts.idlePerSecond));
    out += "\n[routing]\n";
    kv("hello_interval", FormatDouble(s.helloInterval));
    kv("failure_prediction", s.failurePrediction ? "true" : "false");
    kv("warning_margin", s.warningMargin ? FormatDouble(*s.warningMargin) : std::string("auto"));
    kv("opi_weights",
       FormatDouble(s.opiWeights.lifetime) + ", " + FormatDouble(s.opiWeights.energy) + ", " +
           FormatDouble(s.opiWeights.hops));
    kv("deposit_quantum", FormatDouble(s.depositQuantum));
    kv("pheromone_initial", FormatDouble(s.pheromoneInitial));
    kv("pheromone_decay", FormatDouble(s.pheromoneDecay));
    kv("send_buffer_capacity", std::to_string(s.sendBufferCapacity));
    kv("send_buffer_timeout", FormatDouble(s.sendBufferTimeout));
    return out;
}

void
ValidateScenario(const Scenario& s)
{
    Require(s.nodeCount >= 2 && s.nodeCount <= 10000, "node_count", "must be in [2, 10000]");
    Require(Finite(s.area.width) && s.area.width > 0.0, "area_width", "must be positive");
    Require(Finite(s.area.height) && s.area.height > 0.0, "area_height", "must be positive");
    Require(Finite(s.speedRange.min) && Finite(s.speedRange.max) && s.speedRange.min >= 0.0,
            "speed_range",
            "speeds must be finite and non-negative");
    Require(s.speedRange.min <= s.speedRange.max, "speed_range", "min exceeds max");
    Require(Finite(s.pauseRange.min) && Finite(s.pauseRange.max) && s.pauseRange.min >= 0.0,
            "pause_range",
            "pauses must be finite and non-negative");
    Require(s.pauseRange.min <= s.pauseRange.max, "pause_range", "min exceeds max");
    Require(Finite(s.simDuration) && s.simDuration > 0.0, "sim_duration", "must be positive");
    Require(s.packetSize > 0, "packet_size", "must be positive");
    Require(Finite(s.cbrRate) && s.cbrRate > 0.0, "cbr_rate", "must be positive");
    Require(!s.flowCount || *s.flowCount <= 100000, "flow_count", "must be at most 100000");
    Require(Finite(s.fileSizeKb) && s.fileSizeKb >= 0.0, "file_size_kb", "must be non-negative");
    Require(Finite(s.channel.tr) && s.channel.tr > 0.0, "tr", "must be positive");
    Require(Finite(s.channel.perHopLatency) && s.channel.perHopLatency > 0.0, "per_hop_latency", "must be positive");
    Require(s.channel.lossProbability >= 0.0 && s.channel.lossProbability <= 1.0,
            "loss_probability",
            "must be in [0, 1]");
    Require(Finite(s.initialEnergy) && s.initialEnergy > 0.0, "initial_energy", "must be positive");
    Require(s.dangerFraction >= 0.0 && s.dangerFraction <= 1.0, "danger_fraction", "must be in [0, 1]");
    Require(Finite(s.radioCosts.txPerPacket) && s.radioCosts.txPerPacket >= 0.0, "tx_cost", "must be non-negative");
    Require(Finite(s.radioCosts.rxPerPacket) && s.radioCosts.rxPerPacket >= 0.0, "rx_cost", "must be non-negative");
    Require(Finite(s.radioCosts.idlePerSecond) && s.radioCosts.idlePerSecond >= 0.0,
            "idle_cost",
            "must be non-negative");
    Require(Finite(s.helloInterval) && s.helloInterval > 0.0, "hello_interval", "must be positive");
    Require(!s.warningMargin || (Finite(*s.warningMargin) && *s.warningMargin >= 0.0),
            "warning_margin",
            "must be non-negative");
    const OpiWeights& w = s.opiWeights;
    Require(Finite(w.lifetime) && Finite(w.energy) && Finite(w.hops) && w.lifetime >= 0.0 && w.energy >= 0.0 &&
                w.hops >= 0.0,
            "opi_weights",
            "weights must be non-negative");
    Require(std::abs(w.lifetime + w.energy + w.hops - 1.0) <= 1e-9, "opi_weights", "weights must sum to 1");
    Require(Finite(s.depositQuantum) && s.depositQuantum > 0.0, "deposit_quantum", "must be positive");
    Require(Finite(s.pheromoneInitial) && s.pheromoneInitial > 0.0, "pheromone_initial", "must be positive");
    Require(s.pheromoneDecay > 0.0 && s.pheromoneDecay <= 1.0, "pheromone_decay", "must be in (0, 1]");
    Require(s.sendBufferCapacity >= 1, "send_buffer_capacity", "must be at least 1");
    Require(Finite(s.sendBufferTimeout) && s.sendBufferTimeout > 0.0, "send_buffer_timeout", "must be positive");
}

std::string_view
ToString(SweepAxis axis)
{
    switch (axis)
    {
    case SweepAxis::Nodes:
        return "nodes";
    case SweepAxis::Pause:
        return "pause";
    case SweepAxis::FileSize:
        return "filesize";
    }
    return "?";
}

std::optional<SweepAxis>
ParseSweepAxis(std::string_view name)
{
    if (name == "nodes")
    {
        return SweepAxis::Nodes;
    }
    if (name == "pause")
    {
        return SweepAxis::Pause;
    }
    if (name == "filesize")
    {
        return SweepAxis::FileSize;
    }
    return std::nullopt;
}

Scenario
WithAxisValue(Scenario s, SweepAxis axis, double value)
{
    switch (axis)
    {
    case SweepAxis::Nodes:
        if (!(value >= 0.0) || value != std::floor(value) || value > 1e9)
        {
            throw ValidationError("node_count", "sweep value must be a whole number");
        }
        s.nodeCount = static_cast<std::uint32_t>(value);
        break;
    case SweepAxis::Pause:
        s.pauseRange = ValueRange{value, value};
        break;
    case SweepAxis::FileSize:
        s.fileSizeKb = value;
        break;
    }
    return s;
}

std::vector<SweepPoint>
ExpandSweep(const SweepSpec& spec)
{
    if (spec.values.empty())
    {
        throw InvalidArgument("ExpandSweep: no axis values");
    }
    if (spec.seeds.empty())
    {
        throw InvalidArgument("ExpandSweep: no seeds");
    }
    std::vector<SweepPoint> out;
    out.reserve(spec.values.size() * spec.seeds.size());
    for (std::size_t v = 0; v < spec.values.size(); ++v)
    {
        const Scenario withValue = WithAxisValue(spec.base, spec.axis, spec.values[v]);
        ValidateScenario(withValue);
        for (std::size_t k = 0; k < spec.seeds.size(); ++k)
        {
            SweepPoint p;
            p.valueIndex = v;
            p.seedIndex = k;
            p.axisValue = spec.values[v];
            p.scenario = withValue;
            p.scenario.seed = spec.seeds[k];
            out.push_back(std::move(p));
        }
    }
    return out;
}

ResultRow
MakeResultRow(const MetricsReport& report, double axisValue)
{
    ResultRow r;
    r.protocol = report.protocol;
    r.axisValue = axisValue;
    r.seed = report.seed;
    r.pdrPercent = report.pdrPercent;
    r.e2edMs = report.e2edMs;
    r.econsJoules = report.econsJoules;
    r.routesDiscovered = report.routesDiscovered;
    r.warningsEmitted = report.warningsEmitted;
    r.packetsSent = report.packetsSent;
    r.packetsReceived = report.packetsReceived;
    return r;
}

std::string
ResultsHeader()
{
    return "protocol,axis_value,seed,pdr_percent,e2ed_ms,econs_joules,routes_discovered,warnings_emitted,"
           "packets_sent,packets_received\n";
}

std::string
FormatResultRow(const ResultRow& r)
{
    std::string out = r.protocol;
    out += ',' + AxisText(r.axisValue);
    out += ',' + std::to_string(r.seed);
    out += ',' + OptionalFixed(r.pdrPercent);
    out += ',' + OptionalFixed(r.e2edMs);
    out += ',' + Fixed(r.econsJoules);
    out += ',' + std::to_string(r.routesDiscovered);
    out += ',' + std::to_string(r.warningsEmitted);
    out += ',' + std::to_string(r.packetsSent);
    out += ',' + std::to_string(r.packetsReceived);
    out += '\n';
    return out;
}

std::string
FormatAggregate(const std::vector<ResultRow>& rows)
{
    std::string out = "protocol,axis_value,runs,pdr_percent_mean,pdr_percent_std,e2ed_ms_mean,e2ed_ms_std,"
                      "econs_joules_mean,econs_joules_std,routes_discovered_mean,routes_discovered_std,"
                      "warnings_emitted_mean,warnings_emitted_std\n";
    for (const Group& g : GroupRows(rows))
    {
        out += g.protocol + ',' + AxisText(g.axisValue) + ',' + std::to_string(g.rows.size());
        const auto stat = [&](auto field) {
            const auto v = Collect(g, field);
            if (v.empty())
            {
                out += ",no-data,no-data";
                return;
            }
            out += ',' + Fixed(Mean(v)) + ',' + Fixed(SampleStd(v));
        };
        stat([](const ResultRow& r) { return r.pdrPercent; });
        stat([](const ResultRow& r) { return r.e2edMs; });
        stat([](const ResultRow& r) { return std::optional<double>(r.econsJoules); });
        stat([](const ResultRow& r) { return std::optional<double>(static_cast<double>(r.routesDiscovered)); });
        stat([](const ResultRow& r) { return std::optional<double>(static_cast<double>(r.warningsEmitted)); });
        out += '\n';
    }
    return out;
}

std::string
FormatComparison(const std::vector<ResultRow>& rows, std::string_view axisName)
{
    std::vector<std::string> protocols;
    std::vector<double> values;
    for (const ResultRow& r : rows)
    {
        if (std::find(protocols.begin(), protocols.end(), r.protocol) == protocols.end())
        {
            protocols.push_back(r.protocol);
        }
        if (std::find(values.begin(), values.end(), r.axisValue) == values.end())
        {
            values.push_back(r.axisValue);
        }
    }
    const auto groups = GroupRows(rows);
    std::string out(axisName);
    for (const auto& p : protocols)
    {
        out += ',' + p + "_pdr_percent," + p + "_e2ed_ms," + p + "_econs_joules";
    }
    out += '\n';
    for (double v : values)
    {
        out += AxisText(v);
        for (const auto& p : protocols)
        {
            auto g = std::find_if(groups.begin(), groups.end(), [&](const Group& x) {
                return x.protocol == p && x.axisValue == v;
            });
            if (g == groups.end())
            {
                out += ",no-data,no-data,no-data";
                continue;
            }
            const auto mean = [&](auto field) {
                const auto xs = Collect(*g, field);
                out += ',' + (xs.empty() ? std::string("no-data") : Fixed(Mean(xs)));
            };
            mean([](const ResultRow& r) { return r.pdrPercent; });
            mean([](const ResultRow& r) { return r.e2edMs; });
            mean([](const ResultRow& r) { return std::optional<double>(r.econsJoules); });
        }
        out += '\n';
    }
    return out;
}

std::filesystem::path
AggregatePath(const std::filesystem::path& path)
{
    std::filesystem::path out = path;
    out.replace_filename(path.stem().string() + "_aggregate" + path.extension().string());
    return out;
}

void
WriteResults(const std::vector<ResultRow>& rows, const std::filesystem::path& path)
{
    if (rows.empty())
    {
        throw InvalidArgument("WriteResults: no rows");
    }
    std::string body = ResultsHeader();
    for (const ResultRow& r : rows)
    {
        body += FormatResultRow(r);
    }
    WriteFile(path, body);
    WriteFile(AggregatePath(path), FormatAggregate(rows));
}

ResultsWriter::ResultsWriter(std::filesystem::path path)
    : m_path(std::move(path))
{
    WriteFile(m_path, ResultsHeader());
}

void
ResultsWriter::Append(const ResultRow& row)
{
    std::ofstream os(m_path, std::ios::binary | std::ios::app);
    if (!os)
    {
        throw IoError("cannot append to '" + m_path.string() + "'");
    }
    os << FormatResultRow(row);
    os.flush();
    if (!os)
    {
        throw IoError("failed writing '" + m_path.string() + "'");
    }
}

} // namespace rifa
