#include "rtlat/experiment.hpp"

#include <chrono>
#include <filesystem>
#include <fstream>
#include <set>
#include <thread>

#include "rtlat/sample_file.hpp"
#include "rtlat/version.hpp"

namespace fs = std::filesystem;

namespace rtlat {

namespace {

std::string utc_timestamp() {
    const std::time_t t =
        std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    char buf[32];
    std::tm tm{};
    gmtime_r(&t, &tm);
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

nlohmann::json bench_to_json(const BenchConfig& b) {
    nlohmann::json j{{"interval_ns", b.interval.ns},
                     {"loops", b.loops},
                     {"cpus", b.cpu_set.to_list_string()},
                     {"priority", b.priority},
                     {"clock", b.clock == ClockKind::Simulated ? "simulated" : "monotonic"},
                     {"distribute_offset_ns", b.distribute_offset.ns},
                     {"warmup", b.warmup},
                     {"strict", b.strict}};
    if (b.workers) j["workers"] = *b.workers;
    if (!b.simulated_delays.empty()) {
        nlohmann::json d = nlohmann::json::array();
        for (TimeNs t : b.simulated_delays) d.push_back(t.ns);
        j["simulated_delays_ns"] = d;
    }
    return j;
}

BenchConfig bench_from_json(const nlohmann::json& j) {
    BenchConfig b;
    b.interval = TimeNs(j.value("interval_ns", TimeNs::from_ms(1).ns));
    b.loops = j.value("loops", std::uint64_t{10'000'000});
    if (j.contains("workers")) b.workers = j.at("workers").get<int>();
    b.cpu_set = CpuSet::parse(j.value("cpus", ""));
    b.priority = j.value("priority", 98);
    b.clock = j.value("clock", "monotonic") == "simulated" ? ClockKind::Simulated
                                                           : ClockKind::Monotonic;
    if (j.contains("simulated_delays_ns")) {
        for (const auto& d : j.at("simulated_delays_ns")) {
            b.simulated_delays.emplace_back(d.get<std::uint64_t>());
        }
    }
    b.distribute_offset = TimeNs(j.value("distribute_offset_ns", std::uint64_t{0}));
    b.warmup = j.value("warmup", std::uint64_t{0});
    b.strict = j.value("strict", false);
    return b;
}

nlohmann::json load_to_json(const LoadSpec& l) {
    return {{"cpu_workers", l.cpu_workers},
            {"mem_workers", l.mem_workers},
            {"io_workers", l.io_workers},
            {"disk_workers", l.disk_workers},
            {"mem_bytes", l.mem_bytes},
            {"disk_bytes", l.disk_bytes},
            {"cpus", l.cpu_set.to_list_string()},
            {"scratch_dir", l.scratch_dir}};
}

LoadSpec load_from_json(const nlohmann::json& j) {
    LoadSpec l;
    l.cpu_workers = j.value("cpu_workers", 0);
    l.mem_workers = j.value("mem_workers", 0);
    l.io_workers = j.value("io_workers", 0);
    l.disk_workers = j.value("disk_workers", 0);
    l.mem_bytes = j.value("mem_bytes", l.mem_bytes);
    l.disk_bytes = j.value("disk_bytes", l.disk_bytes);
    l.cpu_set = CpuSet::parse(j.value("cpus", ""));
    l.scratch_dir = j.value("scratch_dir", ".");
    return l;
}

// FNV-1a, matches IsolationPlan::checksum
std::string fnv1a_hex(const std::string& data) {
    std::uint64_t h = 1469598103934665603ull;
    for (unsigned char c : data) {
        h ^= c;
        h *= 1099511628211ull;
    }
    char buf[20];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

std::string sanitize_label(const std::string& label) {
    std::string out = label;
    for (char& c : out) {
        if (!std::isalnum(static_cast<unsigned char>(c)) && c != '-' && c != '_') c = '_';
    }
    return out;
}

}  // namespace

void ExperimentPlan::validate() const {
    std::set<std::string> labels;
    for (const auto& c : cases) {
        if (c.label.empty()) throw ValidationError("experiment: case with empty label");
        if (!labels.insert(c.label).second) {
            throw ValidationError("experiment: duplicate case label '" + c.label + "'");
        }
        if (c.isolation && !c.bench.cpu_set.empty()) {
            for (int cpu : c.bench.cpu_set.cpus()) {
                if (!c.isolation->rt_cpus.contains(cpu)) {
                    throw ValidationError("experiment: case '" + c.label + "' benches CPU " +
                                          std::to_string(cpu) + " outside its rt_cpus");
                }
            }
        }
    }
    if (repetitions < 1) throw ValidationError("experiment: repetitions must be >= 1");
}

nlohmann::json ExperimentPlan::to_json() const {
    nlohmann::json jcases = nlohmann::json::array();
    for (const auto& c : cases) {
        nlohmann::json jc{{"label", c.label}, {"bench", bench_to_json(c.bench)}};
        if (c.isolation) jc["isolation"] = c.isolation->to_json();
        if (c.load) jc["load"] = load_to_json(*c.load);
        jcases.push_back(jc);
    }
    return {{"cases", jcases}, {"repetitions", repetitions}, {"settle_ns", settle.ns}};
}

ExperimentPlan ExperimentPlan::from_json(const nlohmann::json& j) {
    ExperimentPlan p;
    for (const auto& jc : j.at("cases")) {
        ExperimentCase c;
        c.label = jc.at("label").get<std::string>();
        c.bench = bench_from_json(jc.value("bench", nlohmann::json::object()));
        if (jc.contains("isolation")) c.isolation = IsolationPlan::from_json(jc.at("isolation"));
        if (jc.contains("load")) c.load = load_from_json(jc.at("load"));
        p.cases.push_back(std::move(c));
    }
    p.repetitions = j.value("repetitions", 1);
    p.settle = TimeNs(j.value("settle_ns", TimeNs::from_s(10).ns));
    p.validate();
    return p;
}

std::string ExperimentPlan::checksum() const { return fnv1a_hex(to_json().dump()); }

RunArtifacts run_matrix(const ExperimentPlan& plan, const std::string& out_dir,
                        SysConfigurator* configurator) {
    plan.validate();
    fs::create_directories(out_dir);

    SysConfigurator local;
    SysConfigurator& sysconf = configurator ? *configurator : local;

    RunArtifacts artifacts;
    artifacts.plan_checksum = plan.checksum();
    artifacts.environment = sysconf.capture_environment();

    for (int rep = 0; rep < plan.repetitions; ++rep) {
        for (const auto& c : plan.cases) {
            CaseResult result;
            result.label = c.label;
            result.repetition = rep;
            result.started_at = utc_timestamp();
            bool applied = false;
            try {
                if (c.isolation) {
                    sysconf.apply(*c.isolation);
                    applied = true;
                }
                std::optional<LoadHandle> load;
                if (c.load) load = start_load(*c.load);

                auto series = run_cyclic(c.bench);

                if (load) result.load_report = load->stop();

                for (auto& s : series) {
                    if (c.isolation) {
                        // checksum of the plan this case actually applied
                        s.meta.plan_checksum = c.isolation->checksum();
                    }
                    const std::string path = out_dir + "/" + sanitize_label(c.label) +
                                             "-rep" + std::to_string(rep) + "-w" +
                                             std::to_string(s.meta.worker_id) + ".rtfs";
                    persist_samples(s, path);  // persistence failure aborts the matrix
                    result.sample_files.push_back(path);
                }
                result.ok = true;
            } catch (const std::runtime_error& e) {
                if (std::string(e.what()).find("cannot open for writing") != std::string::npos ||
                    std::string(e.what()).find("short write") != std::string::npos) {
                    if (applied) sysconf.teardown();
                    throw;
                }
                result.error = e.what();
            } catch (const std::exception& e) {
                result.error = e.what();
            }
            if (applied) {
                try {
                    sysconf.teardown();
                } catch (const std::exception& e) {
                    if (result.error.empty()) result.error = e.what();
                }
            }
            result.ended_at = utc_timestamp();
            artifacts.cases.push_back(std::move(result));

            const bool simulated = c.bench.clock == ClockKind::Simulated;
            if (!simulated && plan.settle.ns > 0) {
                std::this_thread::sleep_for(std::chrono::nanoseconds(plan.settle.ns));
            }
        }
    }

    nlohmann::json manifest{{"plan_checksum", artifacts.plan_checksum},
                            {"toolkit_version", kToolkitVersion},
                            {"environment", artifacts.environment.to_json()},
                            {"plan", plan.to_json()}};
    nlohmann::json jcases = nlohmann::json::array();
    for (const auto& r : artifacts.cases) {
        nlohmann::json jr{{"label", r.label},
                          {"repetition", r.repetition},
                          {"ok", r.ok},
                          {"error", r.error},
                          {"sample_files", r.sample_files},
                          {"started_at", r.started_at},
                          {"ended_at", r.ended_at}};
        jcases.push_back(jr);
    }
    manifest["cases"] = jcases;
    artifacts.manifest_path = out_dir + "/manifest.json";
    std::ofstream mf(artifacts.manifest_path);
    mf << manifest.dump(2) << "\n";
    mf.flush();
    if (!mf) throw std::runtime_error("cannot write manifest " + artifacts.manifest_path);
    return artifacts;
}

namespace {

IsolationPlan half_split_plan(int cpus, bool load_balancer) {
    IsolationPlan p;
    std::vector<int> rt, sys;
    for (int c = 0; c < cpus; ++c) {
        (c >= cpus / 2 ? rt : sys).push_back(c);
    }
    p.rt_cpus = CpuSet(rt);
    p.system_cpus = CpuSet(sys);
    p.load_balancer_on_rt = load_balancer;
    return p;
}

LoadSpec one_of_each_load(int count) {
    LoadSpec l;
    l.cpu_workers = count;
    l.mem_workers = count;
    l.io_workers = count;
    l.disk_workers = count;
    l.scratch_dir = ".";
    return l;
}

}  // namespace

std::vector<std::string> preset_names() {
    return {"phase1-guest-host-matrix", "table1", "hardware-comparison"};
}

ExperimentPlan preset_plan(const std::string& name) {
    const int cpus = std::max(2, static_cast<int>(std::thread::hardware_concurrency()));
    ExperimentPlan plan;

    BenchConfig bench;
    bench.interval = TimeNs::from_ms(1);

    if (name == "table1") {
        // the printed excerpt: 12 configuration rows, single test thread
        bench.loops = 1'000'000;
        bench.workers = 1;
        const char* labels[12] = {"default",
                                  "w-stress",
                                  "iso",
                                  "iso-w-stress",
                                  "iso-nlb-irq",
                                  "iso-nlb-irq-w-stress",
                                  "iso--host-iso",
                                  "iso-w-stress--host-iso",
                                  "iso--host-iso-nlb-irq",
                                  "iso-w-stress--host-iso-nlb-irq",
                                  "iso-nlb-irq--host-iso-irq",
                                  "iso-nlb-irq-w-stress--host-iso-irq"};
        for (int i = 0; i < 12; ++i) {
            ExperimentCase c;
            c.label = labels[i];
            c.bench = bench;
            const bool stressed = i % 2 == 1;
            const bool isolated = i >= 2;
            const bool nlb = i == 4 || i == 5 || i == 10 || i == 11;
            if (isolated) {
                auto p = half_split_plan(cpus, !nlb);
                p.scope = i >= 6 ? PlanScope::Host : PlanScope::Guest;
                c.bench.cpu_set = p.rt_cpus;
                c.isolation = p;
            }
            if (stressed) c.load = one_of_each_load(1);
            plan.cases.push_back(std::move(c));
        }
    } else if (name == "phase1-guest-host-matrix") {
        bench.loops = 1'000'000;
        bench.workers = 1;
        for (int host_iso = 0; host_iso <= 1; ++host_iso) {
            for (int nlb = 0; nlb <= 1; ++nlb) {
                for (int irq = 0; irq <= 1; ++irq) {
                    for (int stress = 0; stress <= 1; ++stress) {
                        ExperimentCase c;
                        c.label = std::string("iso") + (host_iso ? "-host" : "-guest") +
                                  (nlb ? "-nlb" : "") + (irq ? "-irq" : "") +
                                  (stress ? "-stress" : "");
                        c.bench = bench;
                        auto p = half_split_plan(cpus, nlb == 0);
                        p.scope = host_iso ? PlanScope::Host : PlanScope::Guest;
                        c.bench.cpu_set = p.rt_cpus;
                        c.isolation = p;
                        if (stress) c.load = one_of_each_load(1);
                        plan.cases.push_back(std::move(c));
                    }
                }
            }
        }
    } else if (name == "hardware-comparison") {
        // the favorable configuration: isolation with the load balancer on,
        // under stress, one bench and one stress thread per RT vCPU
        bench.loops = 10'000'000;
        ExperimentCase c;
        c.label = "isolated-lb-stress";
        auto p = half_split_plan(cpus, true);
        c.bench = bench;
        c.bench.cpu_set = p.rt_cpus;
        c.bench.workers = static_cast<int>(p.rt_cpus.size());
        c.isolation = p;
        c.load = one_of_each_load(static_cast<int>(p.rt_cpus.size()));
        plan.cases.push_back(std::move(c));
    } else {
        throw ValidationError("unknown preset '" + name + "'");
    }
    plan.validate();
    return plan;
}

}  // namespace rtlat
