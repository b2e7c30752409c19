#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "rtlat/cpuset.hpp"

namespace rtlat {

enum class PlanScope { Host, Guest };
enum class RtFlavor { None, PreemptRt, XenomaiDetected };

std::string to_string(PlanScope s);
std::string to_string(RtFlavor f);

// Desired CPU partition, IRQ affinity and load-balancer state.
struct IsolationPlan {
    CpuSet rt_cpus;
    CpuSet system_cpus;
    bool load_balancer_on_rt = true;
    std::vector<std::pair<int, CpuSet>> irq_moves;
    PlanScope scope = PlanScope::Host;

    // rt and system sets must be disjoint and non-empty; when online_cpus
    // is known, their union must cover all online CPUs.
    void validate(int online_cpus = -1) const;

    // Stable content hash over the canonical JSON form.
    std::string checksum() const;

    nlohmann::json to_json() const;
    static IsolationPlan from_json(const nlohmann::json& j);
    bool operator==(const IsolationPlan&) const = default;
};

struct IrqMoveResult {
    int irq = 0;
    bool ok = false;
    std::string error;  // empty on success
};

struct AppliedConfig {
    std::string plan_checksum;
    std::string rt_partition_path;
    std::string system_partition_path;
    std::vector<int> unmovable_tasks;  // pids that refused migration
    std::vector<IrqMoveResult> irq_results;
};

struct ConfigDiff {
    std::string field;
    std::string expected;
    std::string actual;
};

struct EnvReport {
    std::string kernel_version;              // "unknown" when unreadable
    RtFlavor rt_flavor = RtFlavor::None;
    int cpu_count = 0;
    std::vector<std::pair<int, int>> smt_siblings;  // each pair once, lo < hi
    std::string hypervisor;                  // "bare-metal" | "kvm/hvm" | other | "unknown"
    std::string applied_plan_checksum;       // empty when no plan is active

    nlohmann::json to_json() const;
    static EnvReport from_json(const nlohmann::json& j);
};

// Applies, verifies and reverts isolation plans against the cgroup and
// /proc filesystems. All roots are injectable so tests can run against
// fixture trees.
class SysConfigurator {
public:
    struct Paths {
        std::string proc_root = "/proc";
        std::string sys_root = "/sys";
        std::string cgroup_root = "/sys/fs/cgroup";
        std::string state_file = "/tmp/rtlat-sysconfig-state.json";
    };

    SysConfigurator() = default;
    explicit SysConfigurator(Paths paths) : paths_(std::move(paths)) {}

    // Creates the RT/system cpuset partitions, migrates movable tasks off
    // the RT CPUs, sets the load-balance flag, applies IRQ moves.
    // Snapshots prior state to the state file first.
    AppliedConfig apply(const IsolationPlan& plan);

    // Rewrites smp_affinity per entry; immovable IRQs report per-entry
    // failure, never a global abort.
    std::vector<IrqMoveResult> set_irq_affinity(
        const std::vector<std::pair<int, CpuSet>>& moves);

    // Read-only comparison of the live system against the plan.
    std::vector<ConfigDiff> verify(const IsolationPlan& plan) const;

    // Restores the snapshot taken by apply: removes partitions, returns
    // tasks to the root group, restores saved IRQ masks bit-exactly.
    void teardown();

    // Checks the system is back to its unpartitioned default (no rtlat
    // partitions present, no recorded state).
    std::vector<ConfigDiff> verify_default() const;

    EnvReport capture_environment() const;

    // IRQ ids present in /proc/interrupts.
    std::vector<int> discover_irqs() const;

    // Checksum of the currently applied plan per the state file, or "".
    std::string active_plan_checksum() const;

    bool cgroup_v2() const;
    int online_cpu_count() const;

    const Paths& paths() const { return paths_; }

private:
    std::string rt_dir() const;
    std::string sys_dir() const;
    std::string irq_affinity_path(int irq) const;

    Paths paths_;
};

// Convenience: checksum of the plan recorded in the default state file.
std::string active_plan_checksum_default();

}  // namespace rtlat
