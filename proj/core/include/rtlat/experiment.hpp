#pragma once

#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "rtlat/bench.hpp"
#include "rtlat/loadgen.hpp"
#include "rtlat/sysconfig.hpp"

namespace rtlat {

struct ExperimentCase {
    std::string label;
    std::optional<IsolationPlan> isolation;
    std::optional<LoadSpec> load;
    BenchConfig bench;
};

struct ExperimentPlan {
    std::vector<ExperimentCase> cases;
    int repetitions = 1;
    TimeNs settle = TimeNs::from_s(10);  // quiesce time between cases

    // Labels unique; each case's bench CPU set inside its plan's rt_cpus.
    void validate() const;
    std::string checksum() const;

    nlohmann::json to_json() const;
    static ExperimentPlan from_json(const nlohmann::json& j);
};

struct CaseResult {
    std::string label;
    int repetition = 0;
    bool ok = false;
    std::string error;
    std::vector<std::string> sample_files;
    std::optional<LoadReport> load_report;
    std::string started_at;
    std::string ended_at;
};

struct RunArtifacts {
    std::string plan_checksum;
    EnvReport environment;
    std::vector<CaseResult> cases;
    std::string manifest_path;
};

// Executes cases in order: apply isolation, start load, run the bench,
// stop load, teardown, settle. A failing case is recorded and the matrix
// continues; only a persistence failure aborts the run.
RunArtifacts run_matrix(const ExperimentPlan& plan, const std::string& out_dir,
                        SysConfigurator* configurator = nullptr);

std::vector<std::string> preset_names();
ExperimentPlan preset_plan(const std::string& name);

}  // namespace rtlat
