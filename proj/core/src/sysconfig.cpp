#include "rtlat/sysconfig.hpp"

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <optional>
#include <set>
#include <sstream>
#include <thread>

namespace fs = std::filesystem;

namespace rtlat {

namespace {

std::optional<std::string> read_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) return std::nullopt;
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::string trim(std::string s) {
    while (!s.empty() && (s.back() == '\n' || s.back() == ' ' || s.back() == '\t')) s.pop_back();
    std::size_t i = 0;
    while (i < s.size() && (s[i] == ' ' || s[i] == '\t')) ++i;
    return s.substr(i);
}

bool write_file(const std::string& path, const std::string& content) {
    std::ofstream out(path);
    if (!out) return false;
    out << content;
    out.flush();
    return static_cast<bool>(out);
}

// cgroup procs/tasks files take one pid per write and never truncate
bool append_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::app);
    if (!out) return false;
    out << content;
    out.flush();
    return static_cast<bool>(out);
}

// FNV-1a 64, stable across platforms.
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

nlohmann::json cpuset_json(const CpuSet& s) { return s.to_list_string(); }

CpuSet cpuset_from_json(const nlohmann::json& j) { return CpuSet::parse(j.get<std::string>()); }

}  // namespace

std::string to_string(PlanScope s) { return s == PlanScope::Host ? "host" : "guest"; }

std::string to_string(RtFlavor f) {
    switch (f) {
        case RtFlavor::PreemptRt: return "preempt_rt";
        case RtFlavor::XenomaiDetected: return "xenomai-detected";
        default: return "none";
    }
}

void IsolationPlan::validate(int online_cpus) const {
    if (rt_cpus.empty()) throw ValidationError("isolation plan: rt_cpus is empty");
    if (system_cpus.empty()) throw ValidationError("isolation plan: system_cpus is empty");
    if (rt_cpus.intersects(system_cpus)) {
        throw ValidationError("isolation plan: rt_cpus and system_cpus overlap: " +
                              rt_cpus.intersect(system_cpus).to_list_string());
    }
    if (online_cpus >= 0) {
        for (int c = 0; c < online_cpus; ++c) {
            if (!rt_cpus.contains(c) && !system_cpus.contains(c)) {
                throw ValidationError("isolation plan: online CPU " + std::to_string(c) +
                                      " is in neither partition");
            }
        }
        for (int c : rt_cpus.cpus()) {
            if (c >= online_cpus) {
                throw ValidationError("isolation plan: CPU " + std::to_string(c) +
                                      " exceeds online CPU count");
            }
        }
    }
}

nlohmann::json IsolationPlan::to_json() const {
    nlohmann::json irq = nlohmann::json::array();
    for (const auto& [id, set] : irq_moves) {
        irq.push_back({{"irq", id}, {"cpus", cpuset_json(set)}});
    }
    return {{"rt_cpus", cpuset_json(rt_cpus)},
            {"system_cpus", cpuset_json(system_cpus)},
            {"load_balancer_on_rt", load_balancer_on_rt},
            {"irq_moves", irq},
            {"scope", to_string(scope)}};
}

IsolationPlan IsolationPlan::from_json(const nlohmann::json& j) {
    IsolationPlan p;
    p.rt_cpus = cpuset_from_json(j.at("rt_cpus"));
    p.system_cpus = cpuset_from_json(j.at("system_cpus"));
    p.load_balancer_on_rt = j.value("load_balancer_on_rt", true);
    if (j.contains("irq_moves")) {
        for (const auto& e : j.at("irq_moves")) {
            p.irq_moves.emplace_back(e.at("irq").get<int>(), cpuset_from_json(e.at("cpus")));
        }
    }
    const std::string scope = j.value("scope", "host");
    if (scope == "guest") p.scope = PlanScope::Guest;
    else if (scope == "host") p.scope = PlanScope::Host;
    else throw ValidationError("isolation plan: unknown scope '" + scope + "'");
    return p;
}

std::string IsolationPlan::checksum() const { return fnv1a_hex(to_json().dump()); }

nlohmann::json EnvReport::to_json() const {
    nlohmann::json sib = nlohmann::json::array();
    for (const auto& [a, b] : smt_siblings) sib.push_back({a, b});
    return {{"kernel_version", kernel_version},
            {"rt_flavor", to_string(rt_flavor)},
            {"cpu_count", cpu_count},
            {"smt_siblings", sib},
            {"hypervisor", hypervisor},
            {"applied_plan_checksum", applied_plan_checksum}};
}

EnvReport EnvReport::from_json(const nlohmann::json& j) {
    EnvReport r;
    r.kernel_version = j.value("kernel_version", "unknown");
    const std::string flavor = j.value("rt_flavor", "none");
    if (flavor == "preempt_rt") r.rt_flavor = RtFlavor::PreemptRt;
    else if (flavor == "xenomai-detected") r.rt_flavor = RtFlavor::XenomaiDetected;
    r.cpu_count = j.value("cpu_count", 0);
    if (j.contains("smt_siblings")) {
        for (const auto& e : j.at("smt_siblings")) {
            r.smt_siblings.emplace_back(e.at(0).get<int>(), e.at(1).get<int>());
        }
    }
    r.hypervisor = j.value("hypervisor", "unknown");
    r.applied_plan_checksum = j.value("applied_plan_checksum", "");
    return r;
}

bool SysConfigurator::cgroup_v2() const {
    return fs::exists(paths_.cgroup_root + "/cgroup.controllers");
}

int SysConfigurator::online_cpu_count() const {
    if (auto online = read_file(paths_.sys_root + "/devices/system/cpu/online")) {
        const CpuSet set = CpuSet::parse(trim(*online));
        if (!set.empty()) return set.cpus().back() + 1;
    }
    if (paths_.proc_root == "/proc") {
        return static_cast<int>(std::thread::hardware_concurrency());
    }
    return -1;
}

std::string SysConfigurator::rt_dir() const {
    return cgroup_v2() ? paths_.cgroup_root + "/rtlat_rt"
                       : paths_.cgroup_root + "/cpuset/rtlat_rt";
}

std::string SysConfigurator::sys_dir() const {
    return cgroup_v2() ? paths_.cgroup_root + "/rtlat_sys"
                       : paths_.cgroup_root + "/cpuset/rtlat_sys";
}

std::string SysConfigurator::irq_affinity_path(int irq) const {
    return paths_.proc_root + "/irq/" + std::to_string(irq) + "/smp_affinity";
}

std::vector<int> SysConfigurator::discover_irqs() const {
    std::vector<int> irqs;
    std::ifstream in(paths_.proc_root + "/interrupts");
    std::string line;
    while (std::getline(in, line)) {
        std::istringstream ls(line);
        std::string head;
        ls >> head;
        if (head.empty() || head.back() != ':') continue;
        head.pop_back();
        if (head.empty() || !std::all_of(head.begin(), head.end(),
                                         [](char c) { return c >= '0' && c <= '9'; })) {
            continue;
        }
        irqs.push_back(std::stoi(head));
    }
    return irqs;
}

std::vector<IrqMoveResult> SysConfigurator::set_irq_affinity(
    const std::vector<std::pair<int, CpuSet>>& moves) {
    std::vector<IrqMoveResult> results;
    const int total = std::max(online_cpu_count(), 1);
    for (const auto& [irq, set] : moves) {
        IrqMoveResult r;
        r.irq = irq;
        const std::string path = irq_affinity_path(irq);
        if (!fs::exists(path)) {
            r.error = "no such IRQ";
        } else if (!write_file(path, set.to_hex_mask(total) + "\n")) {
            r.error = "kernel rejected affinity write";
        } else {
            // some IRQs silently ignore the write; re-read to confirm
            auto back = read_file(path);
            if (back && CpuSet::from_hex_mask(trim(*back)) == set) {
                r.ok = true;
            } else {
                r.error = "affinity not applied (immovable IRQ?)";
            }
        }
        results.push_back(std::move(r));
    }
    return results;
}

AppliedConfig SysConfigurator::apply(const IsolationPlan& plan) {
    plan.validate(online_cpu_count());
    const bool v2 = cgroup_v2();
    const std::string base = v2 ? paths_.cgroup_root : paths_.cgroup_root + "/cpuset";
    if (!fs::exists(base)) {
        throw std::runtime_error("control-group filesystem not mounted at " + base);
    }

    // snapshot before any mutation so aborted runs can be rolled back;
    // re-applying keeps the oldest recorded IRQ masks
    nlohmann::json snapshot;
    nlohmann::json irq_masks = nlohmann::json::object();
    if (auto prior = read_file(paths_.state_file)) {
        try {
            irq_masks = nlohmann::json::parse(*prior).value("irq_masks",
                                                            nlohmann::json::object());
        } catch (const nlohmann::json::exception&) {
        }
    }
    snapshot["plan"] = plan.to_json();
    snapshot["checksum"] = plan.checksum();
    for (const auto& [irq, set] : plan.irq_moves) {
        (void)set;
        const std::string key = std::to_string(irq);
        if (irq_masks.contains(key)) continue;
        if (auto mask = read_file(irq_affinity_path(irq))) {
            irq_masks[key] = trim(*mask);
        }
    }
    snapshot["irq_masks"] = irq_masks;
    if (!write_file(paths_.state_file, snapshot.dump(2) + "\n")) {
        throw std::runtime_error("cannot write state file " + paths_.state_file);
    }

    AppliedConfig applied;
    applied.plan_checksum = plan.checksum();
    applied.rt_partition_path = rt_dir();
    applied.system_partition_path = sys_dir();

    std::error_code ec;
    fs::create_directories(rt_dir(), ec);
    fs::create_directories(sys_dir(), ec);
    if (!fs::exists(rt_dir()) || !fs::exists(sys_dir())) {
        throw std::runtime_error("cannot create cpuset partitions under " + base +
                                 " (privileges?)");
    }

    if (v2) {
        write_file(paths_.cgroup_root + "/cgroup.subtree_control", "+cpuset\n");
        write_file(rt_dir() + "/cpuset.cpus", plan.rt_cpus.to_list_string() + "\n");
        write_file(sys_dir() + "/cpuset.cpus", plan.system_cpus.to_list_string() + "\n");
        write_file(rt_dir() + "/cpuset.cpus.partition",
                   plan.load_balancer_on_rt ? "root\n" : "isolated\n");
    } else {
        const auto mems = read_file(base + "/cpuset.mems");
        write_file(rt_dir() + "/cpuset.mems", mems ? trim(*mems) + "\n" : "0\n");
        write_file(sys_dir() + "/cpuset.mems", mems ? trim(*mems) + "\n" : "0\n");
        write_file(rt_dir() + "/cpuset.cpus", plan.rt_cpus.to_list_string() + "\n");
        write_file(sys_dir() + "/cpuset.cpus", plan.system_cpus.to_list_string() + "\n");
        write_file(rt_dir() + "/cpuset.cpu_exclusive", "1\n");
        write_file(rt_dir() + "/cpuset.sched_load_balance",
                   plan.load_balancer_on_rt ? "1\n" : "0\n");
    }

    // shield the RT partition: move every movable task to the system side
    const std::string procs_name = v2 ? "cgroup.procs" : "tasks";
    if (auto procs = read_file(base + "/" + procs_name)) {
        std::istringstream ps(*procs);
        std::string pid;
        while (std::getline(ps, pid)) {
            if (pid.empty()) continue;
            if (!append_file(sys_dir() + "/" + procs_name, pid + "\n")) {
                applied.unmovable_tasks.push_back(std::stoi(pid));
            }
        }
    }

    applied.irq_results = set_irq_affinity(plan.irq_moves);
    return applied;
}

std::vector<ConfigDiff> SysConfigurator::verify(const IsolationPlan& plan) const {
    std::vector<ConfigDiff> diffs;
    const bool v2 = cgroup_v2();
    auto check_cpus = [&](const std::string& dir, const CpuSet& want, const std::string& field) {
        const auto got = read_file(dir + "/cpuset.cpus");
        if (!got) {
            diffs.push_back({field, want.to_list_string(), "<partition missing>"});
            return;
        }
        const CpuSet live = CpuSet::parse(trim(*got));
        if (live != want) diffs.push_back({field, want.to_list_string(), live.to_list_string()});
    };
    check_cpus(rt_dir(), plan.rt_cpus, "rt_cpus");
    check_cpus(sys_dir(), plan.system_cpus, "system_cpus");

    if (v2) {
        const auto part = read_file(rt_dir() + "/cpuset.cpus.partition");
        const std::string want = plan.load_balancer_on_rt ? "root" : "isolated";
        const std::string got = part ? trim(*part) : "<missing>";
        if (got != want) diffs.push_back({"load_balancer_on_rt", want, got});
    } else {
        const auto lb = read_file(rt_dir() + "/cpuset.sched_load_balance");
        const std::string want = plan.load_balancer_on_rt ? "1" : "0";
        const std::string got = lb ? trim(*lb) : "<missing>";
        if (got != want) diffs.push_back({"load_balancer_on_rt", want, got});
    }

    const int total = std::max(online_cpu_count(), 1);
    for (const auto& [irq, set] : plan.irq_moves) {
        const auto mask = read_file(irq_affinity_path(irq));
        const std::string field = "irq." + std::to_string(irq);
        if (!mask) {
            diffs.push_back({field, set.to_hex_mask(total), "<missing>"});
        } else if (CpuSet::from_hex_mask(trim(*mask)) != set) {
            diffs.push_back({field, set.to_hex_mask(total), trim(*mask)});
        }
    }
    return diffs;
}

std::vector<ConfigDiff> SysConfigurator::verify_default() const {
    std::vector<ConfigDiff> diffs;
    if (fs::exists(rt_dir())) diffs.push_back({"rt_partition", "<absent>", rt_dir()});
    if (fs::exists(sys_dir())) diffs.push_back({"system_partition", "<absent>", sys_dir()});
    if (fs::exists(paths_.state_file)) {
        diffs.push_back({"state_file", "<absent>", paths_.state_file});
    }
    return diffs;
}

void SysConfigurator::teardown() {
    const auto state = read_file(paths_.state_file);
    const bool v2 = cgroup_v2();
    const std::string base = v2 ? paths_.cgroup_root : paths_.cgroup_root + "/cpuset";
    const std::string procs_name = v2 ? "cgroup.procs" : "tasks";

    for (const std::string& dir : {rt_dir(), sys_dir()}) {
        if (!fs::exists(dir)) continue;
        if (auto procs = read_file(dir + "/" + procs_name)) {
            std::istringstream ps(*procs);
            std::string pid;
            while (std::getline(ps, pid)) {
                if (!pid.empty()) append_file(base + "/" + procs_name, pid + "\n");
            }
        }
        std::error_code ec;
        fs::remove(dir, ec);  // cgroup dirs only rmdir once empty
        if (fs::exists(dir)) {
            // a real cgroupfs drops its control files on rmdir; plain
            // filesystems (tests, bind-mounted copies) need them unlinked first
            for (const auto& entry : fs::directory_iterator(dir, ec)) {
                const std::string name = entry.path().filename().string();
                if (name.rfind("cpuset.", 0) == 0 || name.rfind("cgroup.", 0) == 0 ||
                    name == "tasks" || name == "notify_on_release") {
                    fs::remove(entry.path(), ec);
                }
            }
            fs::remove(dir, ec);
        }
    }

    if (state) {
        try {
            const auto snapshot = nlohmann::json::parse(*state);
            if (snapshot.contains("irq_masks")) {
                for (const auto& [irq, mask] : snapshot.at("irq_masks").items()) {
                    write_file(irq_affinity_path(std::stoi(irq)),
                               mask.get<std::string>() + "\n");
                }
            }
        } catch (const nlohmann::json::exception&) {
            // corrupt state file: nothing more to restore
        }
    }
    std::error_code ec;
    fs::remove(paths_.state_file, ec);
}

EnvReport SysConfigurator::capture_environment() const {
    EnvReport r;
    if (auto k = read_file(paths_.proc_root + "/sys/kernel/osrelease")) {
        r.kernel_version = trim(*k);
    } else {
        r.kernel_version = "unknown";
    }

    if (auto rt = read_file(paths_.sys_root + "/kernel/realtime"); rt && trim(*rt) == "1") {
        r.rt_flavor = RtFlavor::PreemptRt;
    } else if (fs::exists(paths_.proc_root + "/xenomai") ||
               fs::exists(paths_.proc_root + "/ipipe")) {
        r.rt_flavor = RtFlavor::XenomaiDetected;
    }

    const std::string cpu_base = paths_.sys_root + "/devices/system/cpu";
    int count = 0;
    std::set<std::pair<int, int>> siblings;
    for (int c = 0;; ++c) {
        const std::string topo = cpu_base + "/cpu" + std::to_string(c) + "/topology";
        if (!fs::exists(cpu_base + "/cpu" + std::to_string(c))) break;
        ++count;
        if (auto sib = read_file(topo + "/thread_siblings_list")) {
            const CpuSet set = CpuSet::parse(trim(*sib));
            const auto& v = set.cpus();
            for (std::size_t i = 0; i < v.size(); ++i) {
                for (std::size_t j = i + 1; j < v.size(); ++j) {
                    siblings.emplace(v[i], v[j]);
                }
            }
        }
    }
    if (count == 0) count = std::max(online_cpu_count(), 0);
    r.cpu_count = count;
    r.smt_siblings.assign(siblings.begin(), siblings.end());

    if (auto hv = read_file(paths_.sys_root + "/hypervisor/type")) {
        r.hypervisor = trim(*hv);
    } else if (auto cpuinfo = read_file(paths_.proc_root + "/cpuinfo")) {
        r.hypervisor = cpuinfo->find(" hypervisor") != std::string::npos ? "kvm/hvm"
                                                                         : "bare-metal";
    } else {
        r.hypervisor = "unknown";
    }

    r.applied_plan_checksum = active_plan_checksum();
    return r;
}

std::string SysConfigurator::active_plan_checksum() const {
    const auto state = read_file(paths_.state_file);
    if (!state) return "";
    try {
        return nlohmann::json::parse(*state).value("checksum", "");
    } catch (const nlohmann::json::exception&) {
        return "";
    }
}

std::string active_plan_checksum_default() {
    return SysConfigurator().active_plan_checksum();
}

}  // namespace rtlat
