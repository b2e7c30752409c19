// rtlat: real-time firing-latency benchmark and deadline-feasibility toolkit.
// Subcommands: bench | load | configure | experiment | analyze | report

#include <csignal>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <thread>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "rtlat/analysis.hpp"
#include "rtlat/bench.hpp"
#include "rtlat/experiment.hpp"
#include "rtlat/loadgen.hpp"
#include "rtlat/report.hpp"
#include "rtlat/sample_file.hpp"
#include "rtlat/sysconfig.hpp"
#include "rtlat/version.hpp"

namespace fs = std::filesystem;
using namespace rtlat;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitDegraded = 2;  // strict mode, RT privileges refused
constexpr int kExitConfig = 3;
constexpr int kExitUsage = 64;

volatile std::sig_atomic_t g_interrupted = 0;
void on_sigint(int) { g_interrupted = 1; }

TimeNs duration_arg(const std::string& text) { return parse_duration(text); }

std::string file_stem(const std::string& path) { return fs::path(path).stem().string(); }

std::string slurp(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ValidationError("cannot open " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

TaskSpec task_from_json_file(const std::string& path) {
    const auto j = nlohmann::json::parse(slurp(path));
    auto dur = [&](const char* key) -> std::optional<TimeNs> {
        if (!j.contains(key)) return std::nullopt;
        const auto& v = j.at(key);
        if (v.is_string()) return parse_duration(v.get<std::string>());
        return TimeNs(v.get<std::uint64_t>());
    };
    TaskSpec t;
    t.name = j.value("name", file_stem(path));
    const auto period = dur("period");
    if (!period) throw ValidationError(path + ": task needs a period");
    t.period = *period;
    t.deadline = dur("deadline").value_or(*period);  // implicit deadline
    const auto budget = dur("runtime_budget");
    if (!budget) throw ValidationError(path + ": task needs a runtime_budget");
    t.runtime_budget = *budget;
    t.validate();
    return t;
}

void write_output(const std::string& out, const std::string& content) {
    if (out.empty() || out == "-") {
        std::cout << content;
        return;
    }
    std::ofstream f(out, std::ios::binary);
    f << content;
    f.flush();
    if (!f) throw std::runtime_error("cannot write " + out);
}

std::string worker_out_path(const std::string& base, int worker, int workers) {
    if (workers == 1) return base;
    fs::path p(base);
    const std::string ext = p.extension().string();
    p.replace_extension();
    return p.string() + ".w" + std::to_string(worker) + ext;
}

int cmd_bench(const std::string& interval, std::uint64_t loops, const std::string& cpus,
              int priority, int workers, const std::string& simulate, std::uint64_t warmup,
              bool strict, const std::string& distribute, const std::string& out) {
    BenchConfig cfg;
    cfg.interval = duration_arg(interval);
    cfg.loops = loops;
    if (!cpus.empty()) cfg.cpu_set = CpuSet::parse(cpus);
    cfg.priority = priority;
    if (workers > 0) cfg.workers = workers;
    cfg.warmup = warmup;
    cfg.strict = strict;
    if (!distribute.empty()) cfg.distribute_offset = duration_arg(distribute);
    if (!simulate.empty()) {
        cfg.clock = ClockKind::Simulated;
        cfg.simulated_delays = load_delay_trace(simulate);
    }

    const auto series = run_cyclic(cfg);
    const int n = static_cast<int>(series.size());
    for (const auto& s : series) {
        persist_samples(s, worker_out_path(out, s.meta.worker_id, n));
    }
    bool degraded = false;
    for (const auto& s : series) degraded = degraded || s.meta.degraded;
    if (degraded) {
        std::cerr << "warning: ran without RT privileges, series tagged degraded\n";
    }
    std::cerr << "wrote " << n << (n == 1 ? " series to " : " series based on ") << out << "\n";
    return kExitOk;
}

int cmd_load(int cpu, int vm, int io, int hdd, const std::string& cpus,
             const std::string& timeout, const std::string& scratch,
             std::uint64_t vm_bytes, std::uint64_t hdd_bytes) {
    LoadSpec spec;
    spec.cpu_workers = cpu;
    spec.mem_workers = vm;
    spec.io_workers = io;
    spec.disk_workers = hdd;
    if (!cpus.empty()) spec.cpu_set = CpuSet::parse(cpus);
    if (!timeout.empty()) spec.duration = duration_arg(timeout);
    spec.scratch_dir = scratch;
    if (vm_bytes) spec.mem_bytes = vm_bytes;
    if (hdd_bytes) spec.disk_bytes = hdd_bytes;

    std::signal(SIGINT, on_sigint);
    auto handle = start_load(spec);
    if (spec.duration) {
        const auto end = std::chrono::steady_clock::now() +
                         std::chrono::nanoseconds(spec.duration->ns);
        while (!g_interrupted && std::chrono::steady_clock::now() < end) {
            std::this_thread::sleep_for(std::chrono::milliseconds(50));
        }
    } else {
        while (!g_interrupted) std::this_thread::sleep_for(std::chrono::milliseconds(50));
    }
    const LoadReport r = handle.stop();

    nlohmann::json j{{"duration_ns", r.duration.ns},
                     {"cpu_iterations", r.cpu_iterations},
                     {"mem_iterations", r.mem_iterations},
                     {"io_iterations", r.io_iterations},
                     {"disk_iterations", r.disk_iterations}};
    nlohmann::json util = nlohmann::json::object();
    for (const auto& [c, u] : r.cpu_utilization) util[std::to_string(c)] = u;
    j["cpu_utilization"] = util;
    std::cout << j.dump(2) << "\n";
    return kExitOk;
}

int cmd_configure(const std::string& action, const std::string& plan_file,
                  const std::string& state_file) {
    SysConfigurator::Paths paths;
    if (!state_file.empty()) paths.state_file = state_file;
    SysConfigurator sysconf(paths);

    if (action == "env") {
        std::cout << sysconf.capture_environment().to_json().dump(2) << "\n";
        return kExitOk;
    }
    if (action == "teardown") {
        sysconf.teardown();
        std::cout << "teardown complete\n";
        return kExitOk;
    }
    if (plan_file.empty()) throw ValidationError(action + " needs --plan");
    const IsolationPlan plan = IsolationPlan::from_json(nlohmann::json::parse(slurp(plan_file)));

    if (action == "apply") {
        const AppliedConfig applied = sysconf.apply(plan);
        nlohmann::json j{{"plan_checksum", applied.plan_checksum},
                         {"rt_partition", applied.rt_partition_path},
                         {"system_partition", applied.system_partition_path},
                         {"unmovable_tasks", applied.unmovable_tasks}};
        nlohmann::json irq = nlohmann::json::array();
        for (const auto& r : applied.irq_results) {
            irq.push_back({{"irq", r.irq}, {"ok", r.ok}, {"error", r.error}});
        }
        j["irq_results"] = irq;
        std::cout << j.dump(2) << "\n";
        return kExitOk;
    }
    if (action == "verify") {
        const auto diffs = sysconf.verify(plan);
        for (const auto& d : diffs) {
            std::cout << d.field << ": expected " << d.expected << ", got " << d.actual << "\n";
        }
        if (diffs.empty()) {
            std::cout << "configuration matches plan\n";
            return kExitOk;
        }
        return 1;
    }
    throw ValidationError("unknown configure action '" + action + "'");
}

int cmd_experiment_run(const std::string& plan_file, const std::string& out_dir) {
    const ExperimentPlan plan =
        ExperimentPlan::from_json(nlohmann::json::parse(slurp(plan_file)));
    const RunArtifacts artifacts = run_matrix(plan, out_dir);
    int failed = 0;
    for (const auto& c : artifacts.cases) {
        std::cout << (c.ok ? "ok   " : "FAIL ") << c.label;
        if (!c.ok) std::cout << "  (" << c.error << ")";
        std::cout << "\n";
        failed += c.ok ? 0 : 1;
    }
    std::cout << "manifest: " << artifacts.manifest_path << "\n";
    return failed == 0 ? kExitOk : 1;
}

int cmd_experiment_presets(const std::string& emit) {
    if (emit.empty()) {
        for (const auto& n : preset_names()) std::cout << n << "\n";
    } else {
        std::cout << preset_plan(emit).to_json().dump(2) << "\n";
    }
    return kExitOk;
}

struct LoadedFile {
    std::string label;
    SampleSeries series;
};

std::vector<LoadedFile> load_inputs(const std::vector<std::string>& inputs) {
    std::vector<LoadedFile> out;
    for (const auto& path : inputs) {
        out.push_back({file_stem(path), load_samples(path)});
    }
    return out;
}

int cmd_analyze(const std::vector<std::string>& inputs, const std::string& task_file,
                const std::string& threshold, const std::string& format,
                const std::string& statistic, bool allow_degraded) {
    const auto files = load_inputs(inputs);

    std::vector<SummaryRow> rows;
    for (const auto& f : files) {
        SummaryRow row;
        row.test = f.label;
        row.label = f.series.meta.degraded ? "degraded" : "";
        row.stats = summarize(f.series.samples);
        TimeNs thr{0};
        if (threshold == "auto") {
            thr = deadline_threshold(f.series.meta.interval);
        } else if (!threshold.empty()) {
            thr = duration_arg(threshold);
        }
        if (thr.ns > 0) row.overshoot = overshoot(f.series.samples, thr);
        rows.push_back(std::move(row));
    }

    if (format == "table") {
        std::cout << emit_table(rows);
    } else if (format == "csv") {
        std::cout << emit_csv(rows);
    } else if (format == "json") {
        std::cout << emit_json(rows);
    } else {
        throw ValidationError("unknown format '" + format + "'");
    }

    if (!task_file.empty()) {
        const TaskSpec task = task_from_json_file(task_file);
        const Statistic stat = Statistic::parse(statistic);
        int infeasible = 0;
        for (const auto& f : files) {
            const auto v = feasibility_report(f.series, task, stat, allow_degraded);
            std::cout << f.label << ": task '" << task.name << "' "
                      << (v.feasible ? "FEASIBLE" : "INFEASIBLE") << " (f[" << stat.name()
                      << "]=" << format_duration(v.firing_latency_used)
                      << ", c=" << format_duration(v.completion_time)
                      << ", margin=" << v.margin_ns << "ns)\n";
            infeasible += v.feasible ? 0 : 1;
        }
        return infeasible == 0 ? kExitOk : 1;
    }
    return kExitOk;
}

int cmd_report(const std::vector<std::string>& inputs, const std::string& format,
               const std::vector<std::string>& refs, const std::string& title,
               const std::string& out) {
    std::vector<TimeNs> ref_lines;
    for (const auto& r : refs) ref_lines.push_back(duration_arg(r));

    // CSV input carries summaries only; sample files carry everything
    const bool csv_input = inputs.size() == 1 && fs::path(inputs[0]).extension() == ".csv";

    if (format == "svg") {
        if (csv_input) throw ValidationError("svg report needs raw sample files, not a csv");
        std::vector<BoxplotData> boxes;
        for (const auto& path : inputs) {
            const SampleSeries s = load_samples(path);
            boxes.push_back(boxplot_data(file_stem(path), s.samples));
        }
        write_output(out, emit_boxplot_svg(boxes, ref_lines, title));
        return kExitOk;
    }

    std::vector<SummaryRow> rows;
    if (csv_input) {
        rows = parse_csv(slurp(inputs[0]));
    } else {
        for (const auto& path : inputs) {
            const SampleSeries s = load_samples(path);
            SummaryRow row;
            row.test = file_stem(path);
            row.stats = summarize(s.samples);
            if (!ref_lines.empty()) row.overshoot = overshoot(s.samples, ref_lines.front());
            rows.push_back(std::move(row));
        }
    }
    if (format == "table") write_output(out, emit_table(rows));
    else if (format == "csv") write_output(out, emit_csv(rows));
    else if (format == "json") write_output(out, emit_json(rows));
    else throw ValidationError("unknown format '" + format + "'");
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"rtlat: cyclic firing-latency benchmark and deadline feasibility toolkit"};
    app.require_subcommand(0, 1);

    bool version = false;
    app.add_flag("--version", version, "print toolkit and format versions");

    // bench
    auto* bench = app.add_subcommand("bench", "run the cyclic latency measurement");
    std::string b_interval = "1ms", b_cpus, b_simulate, b_distribute, b_out = "samples.rtfs";
    std::uint64_t b_loops = 10'000'000, b_warmup = 0;
    int b_priority = 98, b_workers = 0;
    bool b_strict = false;
    bench->add_option("--interval", b_interval, "cycle interval (default 1ms)");
    bench->add_option("--loops", b_loops, "iterations per worker");
    bench->add_option("--cpus", b_cpus, "CPU set to pin workers to, e.g. 2-3");
    bench->add_option("--priority", b_priority, "SCHED_FIFO priority (default 98)");
    bench->add_option("--workers", b_workers, "worker count (default: one per CPU in --cpus)");
    bench->add_option("--simulate", b_simulate, "delay trace file, run on the simulated clock");
    bench->add_option("--warmup", b_warmup, "samples to discard from the front");
    bench->add_option("--distribute-offset", b_distribute, "start stagger between workers");
    bench->add_flag("--strict", b_strict, "fail instead of degrading without RT privileges");
    bench->add_option("--out", b_out, "output sample file")->required();

    // load
    auto* load = app.add_subcommand("load", "run the stress-style load generator");
    int l_cpu = 0, l_vm = 0, l_io = 0, l_hdd = 0;
    std::string l_cpus, l_timeout, l_scratch = ".";
    std::uint64_t l_vm_bytes = 0, l_hdd_bytes = 0;
    load->add_option("--cpu", l_cpu, "CPU spin workers");
    load->add_option("--vm", l_vm, "memory allocate/touch/free workers");
    load->add_option("--io", l_io, "sync-call workers");
    load->add_option("--hdd", l_hdd, "disk write workers");
    load->add_option("--cpus", l_cpus, "restrict workers to this CPU set");
    load->add_option("--timeout", l_timeout, "stop after this duration");
    load->add_option("--scratch", l_scratch, "scratch directory for disk workers");
    load->add_option("--vm-bytes", l_vm_bytes, "bytes per memory allocation");
    load->add_option("--hdd-bytes", l_hdd_bytes, "bytes per scratch file");

    // configure
    auto* configure = app.add_subcommand("configure",
                                         "apply/verify/teardown isolation plans");
    std::string c_action, c_plan, c_state;
    configure->add_option("action", c_action, "apply | verify | teardown | env")->required();
    configure->add_option("--plan", c_plan, "isolation plan JSON file");
    configure->add_option("--state", c_state, "snapshot state file");

    // experiment
    auto* experiment = app.add_subcommand("experiment", "run configuration matrices");
    auto* exp_run = experiment->add_subcommand("run", "execute a plan");
    std::string e_plan, e_out_dir = "runs";
    exp_run->add_option("--plan", e_plan, "experiment plan JSON file")->required();
    exp_run->add_option("--out-dir", e_out_dir, "artifact output directory");
    auto* exp_presets = experiment->add_subcommand("presets", "list or emit built-in plans");
    std::string e_emit;
    exp_presets->add_option("--emit", e_emit, "print this preset's plan JSON");
    experiment->require_subcommand(1);

    // analyze
    auto* analyze = app.add_subcommand("analyze", "statistics and feasibility verdicts");
    std::vector<std::string> a_in;
    std::string a_task, a_threshold, a_format = "table", a_statistic = "max";
    bool a_allow_degraded = false;
    analyze->add_option("--in", a_in, "sample files")->required()->expected(-1);
    analyze->add_option("--task", a_task,
                        "task spec JSON file (period/deadline/runtime_budget)");
    analyze->add_option("--threshold", a_threshold,
                        "overshoot threshold duration, or 'auto' for interval/10");
    analyze->add_option("--format", a_format, "table | csv | json");
    analyze->add_option("--statistic", a_statistic, "f statistic: max | mean | p<q>");
    analyze->add_flag("--allow-degraded", a_allow_degraded,
                      "accept series captured without RT privileges");

    // report
    auto* report = app.add_subcommand("report", "tables, CSV/JSON exports, SVG boxplots");
    std::vector<std::string> r_in, r_refs;
    std::string r_format = "table", r_title, r_out;
    report->add_option("--in", r_in, "sample files or one summary CSV")->required()->expected(-1);
    report->add_option("--format", r_format, "table | csv | json | svg");
    report->add_option("--ref", r_refs, "reference line duration (repeatable)");
    report->add_option("--title", r_title, "plot title");
    report->add_option("--out", r_out, "output file (default stdout)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) return app.exit(e);
        app.exit(e);
        return kExitUsage;
    }

    try {
        if (version) {
            std::cout << "rtlat " << kToolkitVersion << " (sample-format "
                      << kSampleFormatVersion << ", csv-schema " << kCsvSchemaVersion << ")\n";
            return kExitOk;
        }
        if (bench->parsed()) {
            return cmd_bench(b_interval, b_loops, b_cpus, b_priority, b_workers, b_simulate,
                             b_warmup, b_strict, b_distribute, b_out);
        }
        if (load->parsed()) {
            return cmd_load(l_cpu, l_vm, l_io, l_hdd, l_cpus, l_timeout, l_scratch, l_vm_bytes,
                            l_hdd_bytes);
        }
        if (configure->parsed()) return cmd_configure(c_action, c_plan, c_state);
        if (experiment->parsed()) {
            if (exp_run->parsed()) return cmd_experiment_run(e_plan, e_out_dir);
            return cmd_experiment_presets(e_emit);
        }
        if (analyze->parsed()) {
            return cmd_analyze(a_in, a_task, a_threshold, a_format, a_statistic,
                               a_allow_degraded);
        }
        if (report->parsed()) return cmd_report(r_in, r_format, r_refs, r_title, r_out);
        std::cout << app.help();
        return kExitOk;
    } catch (const PrivilegeError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitDegraded;
    } catch (const ValidationError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
