#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>
#include <fstream>

#include "rtlat/sysconfig.hpp"

namespace fs = std::filesystem;
using namespace rtlat;

namespace {

void write(const fs::path& p, const std::string& content) {
    fs::create_directories(p.parent_path());
    std::ofstream out(p);
    out << content;
}

// Fake host with a cgroup-v1 cpuset hierarchy, 4 CPUs, a few IRQs.
struct Fixture {
    fs::path root;
    SysConfigurator::Paths paths;

    explicit Fixture(const std::string& name) {
        root = fs::path("sysconfig_fixture") / name;
        fs::remove_all(root);
        paths.proc_root = (root / "proc").string();
        paths.sys_root = (root / "sys").string();
        paths.cgroup_root = (root / "cgroup").string();
        paths.state_file = (root / "state.json").string();

        write(root / "proc/sys/kernel/osrelease", "5.15.0-fixture\n");
        write(root / "sys/devices/system/cpu/online", "0-3\n");
        for (int c = 0; c < 4; ++c) {
            write(root / ("sys/devices/system/cpu/cpu" + std::to_string(c)) /
                      "topology/thread_siblings_list",
                  std::to_string(c % 2) + "," + std::to_string(c % 2 + 2) + "\n");
        }
        write(root / "proc/cpuinfo", "processor : 0\nflags : fpu vme\n");
        write(root / "cgroup/cpuset/cpuset.cpus", "0-3\n");
        write(root / "cgroup/cpuset/cpuset.mems", "0\n");
        write(root / "cgroup/cpuset/tasks", "100\n101\n");
        write(root / "proc/interrupts",
              "            CPU0       CPU1\n"
              "   0:       1000       1000   IO-APIC    timer\n"
              "  16:         10         10   IO-APIC    ehci\n"
              "  24:          5          5   PCI-MSI    eth0\n");
        write(root / "proc/irq/0/smp_affinity", "f\n");
        write(root / "proc/irq/16/smp_affinity", "f\n");
        write(root / "proc/irq/24/smp_affinity", "f\n");
    }

    ~Fixture() { fs::remove_all("sysconfig_fixture"); }
};

IsolationPlan sample_plan() {
    IsolationPlan plan;
    plan.rt_cpus = CpuSet::parse("2-3");
    plan.system_cpus = CpuSet::parse("0-1");
    plan.load_balancer_on_rt = false;
    plan.irq_moves = {{16, CpuSet::parse("0-1")}, {24, CpuSet::parse("0-1")}};
    return plan;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p);
    std::string s((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return s;
}

}  // namespace

TEST_CASE("plan validation") {
    IsolationPlan plan;
    plan.rt_cpus = CpuSet::parse("1-2");
    plan.system_cpus = CpuSet::parse("2-3");
    CHECK_THROWS_WITH_AS(plan.validate(), doctest::Contains("overlap"), ValidationError);

    plan = sample_plan();
    CHECK_NOTHROW(plan.validate(4));
    CHECK_THROWS_AS(plan.validate(8), ValidationError);  // CPUs 4-7 uncovered
}

TEST_CASE("plan json round trip and stable checksum") {
    const auto plan = sample_plan();
    const auto back = IsolationPlan::from_json(plan.to_json());
    CHECK(back == plan);
    CHECK(plan.checksum() == back.checksum());
    auto other = plan;
    other.load_balancer_on_rt = true;
    CHECK(other.checksum() != plan.checksum());
}

TEST_CASE("apply creates partitions, migrates tasks, moves IRQs") {
    Fixture fx("apply");
    SysConfigurator sc(fx.paths);
    const auto plan = sample_plan();

    const auto applied = sc.apply(plan);
    CHECK(applied.plan_checksum == plan.checksum());
    CHECK(slurp(fx.root / "cgroup/cpuset/rtlat_rt/cpuset.cpus") == "2-3\n");
    CHECK(slurp(fx.root / "cgroup/cpuset/rtlat_sys/cpuset.cpus") == "0-1\n");
    CHECK(slurp(fx.root / "cgroup/cpuset/rtlat_rt/cpuset.sched_load_balance") == "0\n");
    // tasks from the root group landed in the system partition
    const std::string tasks = slurp(fx.root / "cgroup/cpuset/rtlat_sys/tasks");
    CHECK(tasks.find("100") != std::string::npos);
    CHECK(tasks.find("101") != std::string::npos);
    CHECK(applied.unmovable_tasks.empty());
    // both IRQ moves succeeded
    REQUIRE(applied.irq_results.size() == 2);
    CHECK(applied.irq_results[0].ok);
    CHECK(applied.irq_results[1].ok);
    CHECK(CpuSet::from_hex_mask(slurp(fx.root / "proc/irq/16/smp_affinity")) ==
          CpuSet::parse("0-1"));

    SUBCASE("verify after apply is clean; applying twice stays clean") {
        CHECK(sc.verify(plan).empty());
        const auto applied2 = sc.apply(plan);
        CHECK(applied2.plan_checksum == applied.plan_checksum);
        CHECK(sc.verify(plan).empty());
    }

    SUBCASE("tampered load-balancer flag shows a single-field diff") {
        write(fx.root / "cgroup/cpuset/rtlat_rt/cpuset.sched_load_balance", "1\n");
        const auto diffs = sc.verify(plan);
        REQUIRE(diffs.size() == 1);
        CHECK(diffs[0].field == "load_balancer_on_rt");
    }

    SUBCASE("teardown restores IRQ masks and removes partitions") {
        sc.teardown();
        CHECK(sc.verify_default().empty());
        CHECK(slurp(fx.root / "proc/irq/16/smp_affinity") == "f\n");
        CHECK(slurp(fx.root / "proc/irq/24/smp_affinity") == "f\n");
        CHECK_FALSE(fs::exists(fx.root / "cgroup/cpuset/rtlat_rt"));
    }
}

TEST_CASE("verify without apply reports differences") {
    Fixture fx("verify");
    SysConfigurator sc(fx.paths);
    CHECK_FALSE(sc.verify(sample_plan()).empty());
}

TEST_CASE("irq moves report per-entry failures") {
    Fixture fx("irq");
    SysConfigurator sc(fx.paths);
    CHECK(sc.set_irq_affinity({}).empty());

    const auto results = sc.set_irq_affinity({{999, CpuSet::parse("0")}});
    REQUIRE(results.size() == 1);
    CHECK_FALSE(results[0].ok);
    CHECK(results[0].error == "no such IRQ");
}

TEST_CASE("irq discovery parses /proc/interrupts") {
    Fixture fx("discover");
    SysConfigurator sc(fx.paths);
    CHECK(sc.discover_irqs() == std::vector<int>{0, 16, 24});
}

TEST_CASE("environment capture from fixture") {
    Fixture fx("env");

    SUBCASE("plain kernel") {
        SysConfigurator sc(fx.paths);
        const auto env = sc.capture_environment();
        CHECK(env.kernel_version == "5.15.0-fixture");
        CHECK(env.rt_flavor == RtFlavor::None);
        CHECK(env.cpu_count == 4);
        CHECK(env.hypervisor == "bare-metal");
        // sibling relation is symmetric by construction and irreflexive
        for (const auto& [a, b] : env.smt_siblings) CHECK(a < b);
    }

    SUBCASE("preempt_rt flag detected") {
        write(fx.root / "sys/kernel/realtime", "1\n");
        SysConfigurator sc(fx.paths);
        CHECK(sc.capture_environment().rt_flavor == RtFlavor::PreemptRt);
    }

    SUBCASE("xenomai detected via /proc") {
        fs::create_directories(fx.root / "proc/xenomai");
        SysConfigurator sc(fx.paths);
        CHECK(sc.capture_environment().rt_flavor == RtFlavor::XenomaiDetected);
    }

    SUBCASE("hypervisor hint from cpuinfo flags") {
        write(fx.root / "proc/cpuinfo", "processor : 0\nflags : fpu vme hypervisor\n");
        SysConfigurator sc(fx.paths);
        CHECK(sc.capture_environment().hypervisor == "kvm/hvm");
    }
}

TEST_CASE("two-socket 16-thread topology yields 8 sibling pairs") {
    Fixture fx("xeon");
    fs::remove_all(fx.root / "sys/devices/system/cpu");
    // 8 cores, 16 threads: thread pairs (i, i+8)
    for (int c = 0; c < 16; ++c) {
        const int core = c % 8;
        write(fx.root / ("sys/devices/system/cpu/cpu" + std::to_string(c)) /
                  "topology/thread_siblings_list",
              std::to_string(core) + "," + std::to_string(core + 8) + "\n");
    }
    write(fx.root / "sys/devices/system/cpu/online", "0-15\n");
    SysConfigurator sc(fx.paths);
    const auto env = sc.capture_environment();
    CHECK(env.cpu_count == 16);
    CHECK(env.smt_siblings.size() == 8);
}

TEST_CASE("active plan checksum reflects the state file") {
    Fixture fx("state");
    SysConfigurator sc(fx.paths);
    CHECK(sc.active_plan_checksum().empty());
    sc.apply(sample_plan());
    CHECK(sc.active_plan_checksum() == sample_plan().checksum());
    sc.teardown();
    CHECK(sc.active_plan_checksum().empty());
}
