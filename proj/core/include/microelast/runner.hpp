#pragma once

#include <optional>
#include <string>

#include "microelast/config.hpp"
#include "microelast/export.hpp"

namespace microelast {

enum class Subcommand {
    solve,
    study_convergence,
    study_split,
    material_fit,
    export_fields_cmd
};

struct RunOptions {
    Subcommand subcommand = Subcommand::solve;
    std::string config_path;
    std::optional<std::uint64_t> seed;
    std::optional<std::string> out_dir;
    ExportFormat format = ExportFormat::csv;
    std::string snapshot_path;  // export subcommand input
    int threads = 1;
};

/// Execute one subcommand. Exit codes: 0 success, 1 fault,
/// 2 missing required config key. Diagnostics go to stderr; the
/// MICROELAST_LOG environment variable ("info", "debug") enables
/// progress output.
int run(const RunOptions& options);

/// Material field construction shared by the subcommands (constants,
/// tanh inclusion, or the voxel image pipeline with network fit).
std::unique_ptr<MaterialField> build_material(const ExperimentConfig& config);

/// Experiment translation used by `run`; exposed for tests.
StudyConfig study_config(const ExperimentConfig& config);

}  // namespace microelast
