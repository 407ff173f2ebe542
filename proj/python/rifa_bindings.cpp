/*
 * SPDX-License-Identifier: GPL-2.0-only
 */
#include "rifa/errors.hpp"
#include "rifa/mobility.hpp"
#include "rifa/pheromone.hpp"
#include "rifa/report.hpp"
#include "rifa/scenario.hpp"
#include "rifa/simengine.hpp"

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

namespace py = pybind11;
using namespace rifa;

namespace
{

NodeKinematics
Kin(const std::tuple<double, double, double, double>& t)
{
    return NodeKinematics{std::get<0>(t), std::get<1>(t), std::get<2>(t), std::get<3>(t)};
}

py::dict
ReportDict(const MetricsReport& r)
{
    py::dict d;
    d["protocol"] = r.protocol;
    d["seed"] = r.seed;
    d["node_count"] = r.nodeCount;
    d["sim_duration"] = r.simDuration;
    d["flow_count"] = r.flowCount;
    d["packets_sent"] = r.packetsSent;
    d["packets_received"] = r.packetsReceived;
    d["pdr_percent"] = r.pdrPercent;
    d["e2ed_ms"] = r.e2edMs;
    d["econs_joules"] = r.econsJoules;
    d["routes_discovered"] = r.routesDiscovered;
    d["rreq_originated"] = r.rreqOriginated;
    d["warnings_emitted"] = r.warningsEmitted;
    d["rerr_sent"] = r.rerrSent;
    d["route_switches"] = r.routeSwitches;
    d["control_transmissions"] = r.controlTransmissions;
    d["data_transmissions"] = r.dataTransmissions;
    d["data_dropped"] = r.dataDropped;
    d["danger_discards"] = r.dangerDiscards;
    d["dead_nodes"] = r.deadNodes;
    d["events_processed"] = r.eventsProcessed;
    d["event_digest"] = r.eventDigest;
    d["residuals"] = r.residuals;
    return d;
}

} // namespace

PYBIND11_MODULE(_rifa, m)
{
    m.doc() = "Deterministic MANET simulator for the RIFA routing protocol and its baselines";

    py::register_exception<ValidationError>(m, "ValidationError", PyExc_ValueError);
    py::register_exception<ParseError>(m, "ParseError", PyExc_ValueError);
    py::register_exception<NotANeighbor>(m, "NotANeighbor", PyExc_ValueError);
    py::register_exception<DomainError>(m, "DomainError", PyExc_ValueError);

    py::class_<Scenario>(m, "Scenario")
        .def(py::init<>())
        .def_static("from_ini", &ParseScenario, py::arg("text"))
        .def_static("fixed_pause", &FixedPausePreset)
        .def("to_ini", &SerializeScenario)
        .def("validate", &ValidateScenario)
        .def_readwrite("node_count", &Scenario::nodeCount)
        .def_readwrite("sim_duration", &Scenario::simDuration)
        .def_readwrite("seed", &Scenario::seed)
        .def_readwrite("packet_size", &Scenario::packetSize)
        .def_readwrite("cbr_rate", &Scenario::cbrRate)
        .def_readwrite("flow_count", &Scenario::flowCount)
        .def_readwrite("file_size_kb", &Scenario::fileSizeKb)
        .def_readwrite("initial_energy", &Scenario::initialEnergy)
        .def_readwrite("failure_prediction", &Scenario::failurePrediction)
        .def_property(
            "protocol",
            [](const Scenario& s) { return std::string(ToString(s.protocol)); },
            [](Scenario& s, const std::string& name) {
                const auto p = ParseProtocol(name);
                if (!p)
                {
                    throw ValidationError("protocol", "unknown protocol '" + name + "'");
                }
                s.protocol = *p;
            })
        .def_property(
            "area", [](const Scenario& s) { return std::make_pair(s.area.width, s.area.height); },
            [](Scenario& s, std::pair<double, double> a) { s.area = AreaSpec{a.first, a.second}; })
        .def_property(
            "speed_range", [](const Scenario& s) { return std::make_pair(s.speedRange.min, s.speedRange.max); },
            [](Scenario& s, std::pair<double, double> r) { s.speedRange = ValueRange{r.first, r.second}; })
        .def_property(
            "pause_range", [](const Scenario& s) { return std::make_pair(s.pauseRange.min, s.pauseRange.max); },
            [](Scenario& s, std::pair<double, double> r) { s.pauseRange = ValueRange{r.first, r.second}; })
        .def_property(
            "loss_probability", [](const Scenario& s) { return s.channel.lossProbability; },
            [](Scenario& s, double p) { s.channel.lossProbability = p; })
        .def("__eq__", [](const Scenario& a, const Scenario& b) { return a == b; });

    m.def(
        "run",
        [](const Scenario& s, bool eventLog) {
            std::ostringstream log;
            StreamSink sink(log);
            SimulatorOptions opts;
            if (eventLog)
            {
                opts.sink = &sink;
            }
            MetricsReport report;
            {
                py::gil_scoped_release release;
                report = RunScenario(s, std::move(opts));
            }
            return py::make_tuple(ReportDict(report), log.str());
        },
        py::arg("scenario"),
        py::arg("event_log") = false,
        "Runs one scenario; returns (metrics dict, event log text).");

    m.def(
        "link_expiry_time",
        [](const std::tuple<double, double, double, double>& p, const std::tuple<double, double, double, double>& q,
           double tr) { return LinkExpiryTime(Kin(p), Kin(q), tr); },
        py::arg("p"),
        py::arg("q"),
        py::arg("tr"),
        "Seconds until two (x, y, speed, heading) nodes drift beyond tr; inf when they never do.");

    m.def(
        "urn_probability",
        [](const std::vector<double>& intensities, double quantum, const std::vector<std::uint64_t>& counts) {
            return UrnProbability(PheromoneTable(intensities, quantum), CountVector{counts});
        },
        py::arg("intensities"),
        py::arg("quantum"),
        py::arg("counts"));

    m.def("stirling_gamma", &StirlingGamma, py::arg("b"));
}
