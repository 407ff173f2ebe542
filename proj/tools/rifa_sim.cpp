/*
 * SPDX-License-Identifier: GPL-2.0-only
 */

/*
 * rifa-sim: run scenarios, sweeps and the reference checks from the shell.
 *
 * Exit codes: 0 ok, 1 check or run failure, 2 missing input, 3 invalid scenario.
 */
#include "rifa/errors.hpp"
#include "rifa/oracles.hpp"
#include "rifa/scenario.hpp"
#include "rifa/simengine.hpp"

#include <CLI11.hpp>

#include <atomic>
#include <condition_variable>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <mutex>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

namespace fs = std::filesystem;

namespace
{

constexpr int kExitOk = 0;
constexpr int kExitFailure = 1;
constexpr int kExitMissingInput = 2;
constexpr int kExitInvalid = 3;

struct Options
{
    std::string scenarioPath;
    std::string outDir;
    std::string protocols;
    std::optional<std::uint64_t> seed;
    unsigned runs{1};
    unsigned jobs{1};
    std::string axis{"nodes"};
    std::string values;
    bool eventLog{false};
    std::string perturb;
    int verbosity{0};
};

class ExitWith : public std::runtime_error
{
  public:
    ExitWith(int code, const std::string& what)
        : std::runtime_error(what),
          m_code(code)
    {
    }
    int Code() const
    {
        return m_code;
    }

  private:
    int m_code;
};

fs::path
OutputDir(const Options& o)
{
    if (!o.outDir.empty())
    {
        return o.outDir;
    }
    if (const char* env = std::getenv("RIFA_OUT_DIR"); env != nullptr && *env != '\0')
    {
        return env;
    }
    return "rifa-out";
}

fs::path
PrepareOutput(const Options& o)
{
    const fs::path dir = OutputDir(o);
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec)
    {
        throw ExitWith(kExitFailure, "cannot create output directory '" + dir.string() + "': " + ec.message());
    }
    return dir;
}

rifa::Scenario
Load(const Options& o)
{
    if (o.scenarioPath.empty())
    {
        throw ExitWith(kExitMissingInput, "no scenario given (use --scenario PATH)");
    }
    if (!fs::is_regular_file(o.scenarioPath))
    {
        throw ExitWith(kExitMissingInput, "scenario file not found: " + o.scenarioPath);
    }
    return rifa::LoadScenario(o.scenarioPath);
}

std::vector<std::string>
SplitList(const std::string& text)
{
    std::vector<std::string> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ','))
    {
        const auto b = item.find_first_not_of(" \t");
        const auto e = item.find_last_not_of(" \t");
        if (b != std::string::npos)
        {
            out.push_back(item.substr(b, e - b + 1));
        }
    }
    return out;
}

std::vector<rifa::Protocol>
Protocols(const Options& o, rifa::Protocol fallback)
{
    if (o.protocols.empty())
    {
        return {fallback};
    }
    std::vector<rifa::Protocol> out;
    for (const auto& name : SplitList(o.protocols))
    {
        auto p = rifa::ParseProtocol(name);
        if (!p)
        {
            throw rifa::ValidationError("protocol", "unknown protocol '" + name + "'");
        }
        out.push_back(*p);
    }
    if (out.empty())
    {
        throw rifa::ValidationError("protocol", "empty protocol list");
    }
    return out;
}

void
WriteText(const fs::path& path, const std::string& text)
{
    const fs::path tmp = path.string() + ".tmp";
    {
        std::ofstream os(tmp, std::ios::binary | std::ios::trunc);
        if (!os)
        {
            throw rifa::IoError("cannot write '" + tmp.string() + "'");
        }
        os << text;
        if (!os.flush())
        {
            throw rifa::IoError("failed writing '" + tmp.string() + "'");
        }
    }
    fs::rename(tmp, path);
}

std::string
RunName(const rifa::Scenario& s)
{
    return std::string(rifa::ToString(s.protocol)) + "_seed" + std::to_string(s.seed);
}

int
CmdRun(const Options& o)
{
    rifa::Scenario base = Load(o);
    const fs::path dir = PrepareOutput(o);
    if (o.seed)
    {
        base.seed = *o.seed;
    }
    for (rifa::Protocol p : Protocols(o, base.protocol))
    {
        for (unsigned k = 0; k < o.runs; ++k)
        {
            rifa::Scenario s = base;
            s.protocol = p;
            s.seed = base.seed + k;
            const std::string name = RunName(s);

            rifa::SimulatorOptions opts;
            std::ofstream log;
            std::optional<rifa::StreamSink> sink;
            const fs::path logPath = dir / ("events_" + name + ".log");
            if (o.eventLog)
            {
                log.open(logPath, std::ios::binary | std::ios::trunc);
                if (!log)
                {
                    throw rifa::IoError("cannot write '" + logPath.string() + "'");
                }
                sink.emplace(log);
                opts.sink = &*sink;
            }
            const rifa::MetricsReport report = rifa::RunScenario(s, std::move(opts));
            const fs::path reportPath = dir / ("report_" + name + ".txt");
            WriteText(reportPath, rifa::SerializeReport(report));
            std::cout << reportPath.string() << '\n';
            if (o.verbosity > 0)
            {
                std::cerr << rifa::SerializeReport(report);
            }
        }
    }
    return kExitOk;
}

int
CmdValidate(const Options& o)
{
    const rifa::Scenario s = Load(o);
    std::cout << "ok: " << o.scenarioPath << '\n';
    if (o.verbosity > 0)
    {
        std::cout << rifa::SerializeScenario(s);
    }
    return kExitOk;
}

struct Job
{
    rifa::Scenario scenario;
    double axisValue;
};

int
CmdSweep(const Options& o)
{
    rifa::Scenario base = Load(o);
    const auto axis = rifa::ParseSweepAxis(o.axis);
    if (!axis)
    {
        throw rifa::ValidationError("axis", "unknown axis '" + o.axis + "' (nodes, pause, filesize)");
    }
    std::vector<double> values;
    for (const auto& v : SplitList(o.values))
    {
        try
        {
            std::size_t used = 0;
            values.push_back(std::stod(v, &used));
            if (used != v.size())
            {
                throw std::invalid_argument(v);
            }
        }
        catch (const std::logic_error&)
        {
            throw rifa::ValidationError("values", "not a number: '" + v + "'");
        }
    }
    if (values.empty())
    {
        throw rifa::ValidationError("values", "no sweep values given (use --values a,b,c)");
    }
    if (o.seed)
    {
        base.seed = *o.seed;
    }
    std::vector<std::uint64_t> seeds;
    for (unsigned k = 0; k < o.runs; ++k)
    {
        seeds.push_back(base.seed + k);
    }
    const auto protocols = Protocols(o, base.protocol);

    std::vector<Job> jobs;
    for (rifa::Protocol p : protocols)
    {
        rifa::SweepSpec spec;
        spec.base = base;
        spec.base.protocol = p;
        spec.axis = *axis;
        spec.values = values;
        spec.seeds = seeds;
        for (auto& point : rifa::ExpandSweep(spec))
        {
            jobs.push_back(Job{std::move(point.scenario), point.axisValue});
        }
    }

    const fs::path dir = PrepareOutput(o);
    const fs::path runsDir = dir / "runs";
    fs::create_directories(runsDir);
    const fs::path resultsPath = dir / "results.csv";
    rifa::ResultsWriter writer(resultsPath);

    std::vector<std::optional<rifa::ResultRow>> done(jobs.size());
    std::vector<std::string> errors;
    std::mutex mu;
    std::condition_variable cv;
    std::atomic<std::size_t> next{0};

    const auto worker = [&]() {
        while (true)
        {
            const std::size_t i = next.fetch_add(1);
            if (i >= jobs.size())
            {
                return;
            }
            try
            {
                const rifa::MetricsReport report = rifa::RunScenario(jobs[i].scenario);
                char axisText[64];
                std::snprintf(axisText, sizeof axisText, "%g", jobs[i].axisValue);
                WriteText(runsDir / (RunName(jobs[i].scenario) + "_" + o.axis + axisText + ".txt"),
                          rifa::SerializeReport(report));
                std::lock_guard lock(mu);
                done[i] = rifa::MakeResultRow(report, jobs[i].axisValue);
            }
            catch (const std::exception& e)
            {
                std::lock_guard lock(mu);
                errors.push_back(e.what());
                done[i] = rifa::ResultRow{};
            }
            cv.notify_all();
        }
    };

    const unsigned threads = std::max(1u, std::min<unsigned>(o.jobs, static_cast<unsigned>(jobs.size())));
    std::vector<std::thread> pool;
    for (unsigned t = 0; t < threads; ++t)
    {
        pool.emplace_back(worker);
    }

    // Rows are committed in job order no matter which worker finishes first.
    std::vector<rifa::ResultRow> rows;
    for (std::size_t i = 0; i < jobs.size(); ++i)
    {
        std::unique_lock lock(mu);
        cv.wait(lock, [&] { return done[i].has_value(); });
        if (!errors.empty())
        {
            break;
        }
        rows.push_back(*done[i]);
        lock.unlock();
        writer.Append(rows.back());
        if (o.verbosity > 1)
        {
            std::cerr << "run " << (i + 1) << "/" << jobs.size() << " done\n";
        }
    }
    next.store(jobs.size());
    for (auto& t : pool)
    {
        t.join();
    }
    if (!errors.empty())
    {
        throw ExitWith(kExitFailure, "sweep run failed: " + errors.front());
    }

    WriteText(rifa::AggregatePath(resultsPath), rifa::FormatAggregate(rows));
    if (protocols.size() > 1)
    {
        WriteText(dir / "comparison.csv", rifa::FormatComparison(rows, o.axis));
    }
    std::cout << resultsPath.string() << '\n';
    if (o.verbosity > 0)
    {
        std::cerr << rifa::FormatAggregate(rows);
    }
    return kExitOk;
}

int
CmdOracleCheck(const Options& o)
{
    rifa::oracle::LetFunction let = rifa::LinkExpiryTime;
    if (o.perturb == "let-sign")
    {
        let = rifa::oracle::LinkExpiryTimeSignFlipped;
    }
    else if (!o.perturb.empty())
    {
        throw rifa::ValidationError("perturb", "unknown perturbation '" + o.perturb + "'");
    }
    const std::vector<rifa::oracle::SuiteResult> suites = {
        rifa::oracle::UrnSuite(),
        rifa::oracle::LetSuite(let),
        rifa::oracle::StirlingSuite(),
    };
    bool ok = true;
    for (const auto& s : suites)
    {
        std::printf("%s %s (%llu cases, %.2f s)\n",
                    s.passed ? "PASS" : "FAIL",
                    s.name.c_str(),
                    static_cast<unsigned long long>(s.cases),
                    s.seconds);
        for (const auto& f : s.failures)
        {
            std::printf("  %s\n", f.c_str());
        }
        ok = ok && s.passed;
    }
    return ok ? kExitOk : kExitFailure;
}

} // namespace

int
main(int argc, char** argv)
{
    CLI::App app{"Discrete-event MANET simulator for the RIFA routing protocol and baselines"};
    app.require_subcommand(1, 1);
    Options o;
    std::vector<CLI::Option*> verbose;

    const auto common = [&](CLI::App* cmd) {
        cmd->add_option("--scenario", o.scenarioPath, "Scenario file");
        verbose.push_back(cmd->add_flag("-v", "More output (-vv for progress)"));
    };
    const auto outputs = [&](CLI::App* cmd) {
        cmd->add_option("--out", o.outDir, "Output directory (default $RIFA_OUT_DIR or ./rifa-out)");
        cmd->add_option("--protocol", o.protocols, "rifa, baseline-flood, baseline-minhop (comma list)");
        cmd->add_option("--seed", o.seed, "Base seed; run k uses seed + k");
        cmd->add_option("--runs", o.runs, "Seeds per configuration")->check(CLI::PositiveNumber);
    };

    CLI::App* run = app.add_subcommand("run", "Run one scenario and write its report");
    common(run);
    outputs(run);
    run->add_flag("--event-log", o.eventLog, "Also write the structured event log");

    CLI::App* validate = app.add_subcommand("validate", "Parse and validate a scenario file");
    common(validate);

    CLI::App* sweep = app.add_subcommand("sweep", "Sweep one axis over several seeds and protocols");
    common(sweep);
    outputs(sweep);
    sweep->add_option("--jobs", o.jobs, "Parallel runs")->check(CLI::PositiveNumber);
    sweep->add_option("--axis", o.axis, "nodes, pause or filesize");
    sweep->add_option("--values", o.values, "Comma-separated axis values");

    CLI::App* oracle = app.add_subcommand("oracle-check", "Run the reference-computation suites");
    oracle->add_option("--perturb", o.perturb)->group("");

    try
    {
        app.parse(argc, argv);
    }
    catch (const CLI::CallForHelp& e)
    {
        return app.exit(e);
    }
    catch (const CLI::CallForAllHelp& e)
    {
        return app.exit(e);
    }
    catch (const CLI::ParseError& e)
    {
        app.exit(e);
        return kExitMissingInput;
    }
    for (const CLI::Option* v : verbose)
    {
        o.verbosity += static_cast<int>(v->count());
    }

    try
    {
        if (run->parsed())
        {
            return CmdRun(o);
        }
        if (validate->parsed())
        {
            return CmdValidate(o);
        }
        if (sweep->parsed())
        {
            return CmdSweep(o);
        }
        return CmdOracleCheck(o);
    }
    catch (const ExitWith& e)
    {
        std::cerr << "rifa-sim: " << e.what() << '\n';
        return e.Code();
    }
    catch (const rifa::ParseError& e)
    {
        std::cerr << "rifa-sim: invalid scenario: " << e.what() << '\n';
        return kExitInvalid;
    }
    catch (const rifa::ValidationError& e)
    {
        std::cerr << "rifa-sim: invalid scenario: " << e.what() << '\n';
        return kExitInvalid;
    }
    catch (const std::exception& e)
    {
        std::cerr << "rifa-sim: " << e.what() << '\n';
        return kExitFailure;
    }
}
