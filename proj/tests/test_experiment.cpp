#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>

#include "rtlat/experiment.hpp"
#include "rtlat/sample_file.hpp"

namespace fs = std::filesystem;
using namespace rtlat;

namespace {

ExperimentPlan simulated_plan() {
    ExperimentPlan plan;
    plan.settle = TimeNs(0);
    for (const char* label : {"case-a", "case-b"}) {
        ExperimentCase c;
        c.label = label;
        c.bench.clock = ClockKind::Simulated;
        c.bench.simulated_delays = {TimeNs(100), TimeNs(200)};
        c.bench.loops = 500;
        plan.cases.push_back(std::move(c));
    }
    return plan;
}

}  // namespace

TEST_CASE("plan validation") {
    auto plan = simulated_plan();
    CHECK_NOTHROW(plan.validate());

    SUBCASE("duplicate labels rejected") {
        plan.cases[1].label = plan.cases[0].label;
        CHECK_THROWS_AS(plan.validate(), ValidationError);
    }
    SUBCASE("bench CPUs must sit inside the isolation rt set") {
        IsolationPlan iso;
        iso.rt_cpus = CpuSet::parse("2-3");
        iso.system_cpus = CpuSet::parse("0-1");
        plan.cases[0].isolation = iso;
        plan.cases[0].bench.cpu_set = CpuSet::parse("0");
        CHECK_THROWS_AS(plan.validate(), ValidationError);
        plan.cases[0].bench.cpu_set = CpuSet::parse("2");
        CHECK_NOTHROW(plan.validate());
    }
    SUBCASE("repetitions must be positive") {
        plan.repetitions = 0;
        CHECK_THROWS_AS(plan.validate(), ValidationError);
    }
}

TEST_CASE("plan json round trip") {
    const auto plan = simulated_plan();
    const auto back = ExperimentPlan::from_json(plan.to_json());
    CHECK(back.to_json() == plan.to_json());
    CHECK(back.checksum() == plan.checksum());
}

TEST_CASE("empty plan runs to empty artifacts") {
    ExperimentPlan plan;
    plan.settle = TimeNs(0);
    const std::string dir = "exp_empty_out";
    const auto artifacts = run_matrix(plan, dir);
    CHECK(artifacts.cases.empty());
    CHECK(fs::exists(artifacts.manifest_path));
    fs::remove_all(dir);
}

TEST_CASE("simulated matrix persists one file per worker with provenance") {
    const std::string dir = "exp_sim_out";
    fs::remove_all(dir);
    const auto plan = simulated_plan();
    const auto artifacts = run_matrix(plan, dir);

    REQUIRE(artifacts.cases.size() == 2);
    for (const auto& c : artifacts.cases) {
        REQUIRE(c.ok);
        REQUIRE(c.sample_files.size() == 1);
        const auto series = load_samples(c.sample_files[0]);
        CHECK(series.samples.size() == 500);
        // provenance embedded in every file
        CHECK(series.meta.toolkit_version == std::string("0.1.0"));
        CHECK_FALSE(series.meta.environment.empty());
    }
    CHECK(artifacts.plan_checksum == plan.checksum());
    CHECK(fs::exists(dir + "/manifest.json"));
    fs::remove_all(dir);
}

TEST_CASE("a failing case is recorded and the matrix continues") {
    auto plan = simulated_plan();
    // invalid load spec fails at start_load
    LoadSpec bad;
    bad.disk_workers = 1;
    bad.scratch_dir = "/nonexistent/scratch";
    plan.cases[0].load = bad;

    const std::string dir = "exp_fail_out";
    fs::remove_all(dir);
    const auto artifacts = run_matrix(plan, dir);
    REQUIRE(artifacts.cases.size() == 2);
    CHECK_FALSE(artifacts.cases[0].ok);
    CHECK_FALSE(artifacts.cases[0].error.empty());
    CHECK(artifacts.cases[1].ok);
    fs::remove_all(dir);
}

TEST_CASE("repetitions run every case again") {
    auto plan = simulated_plan();
    plan.repetitions = 2;
    const std::string dir = "exp_rep_out";
    fs::remove_all(dir);
    const auto artifacts = run_matrix(plan, dir);
    CHECK(artifacts.cases.size() == 4);
    fs::remove_all(dir);
}

TEST_CASE("presets exist and validate") {
    const auto names = preset_names();
    REQUIRE(names.size() == 3);
    for (const auto& n : names) {
        const auto plan = preset_plan(n);
        CHECK_NOTHROW(plan.validate());
        CHECK_FALSE(plan.cases.empty());
    }
    CHECK(preset_plan("table1").cases.size() == 12);
    CHECK(preset_plan("phase1-guest-host-matrix").cases.size() == 16);
    CHECK_THROWS_AS(preset_plan("nope"), ValidationError);
}
