#include <CLI11.hpp>

#include "microelast/runner.hpp"

int main(int argc, char** argv) {
    CLI::App app{"Collocation-based elastic micromechanics solver"};
    app.require_subcommand(1);

    microelast::RunOptions opts;
    std::string format = "csv";
    std::uint64_t seed = 0;
    std::string out_dir;
    bool seed_set = false, out_set = false;

    auto add_common = [&](CLI::App* cmd) {
        cmd->add_option("--config", opts.config_path, "Experiment JSON")
            ->required();
        cmd->add_option("--seed", seed, "Override the config seed")
            ->each([&](const std::string&) { seed_set = true; });
        cmd->add_option("--out", out_dir, "Override the output directory")
            ->each([&](const std::string&) { out_set = true; });
        cmd->add_option("--threads", opts.threads, "Worker thread count");
        cmd->add_option("--format", format, "Field export format")
            ->check(CLI::IsMember({"csv", "vtk"}));
    };

    CLI::App* solve = app.add_subcommand("solve", "Train and report");
    add_common(solve);

    CLI::App* study = app.add_subcommand("study", "Parameter studies");
    study->require_subcommand(1);
    CLI::App* conv =
        study->add_subcommand("convergence", "Mean R vs. point budget");
    add_common(conv);
    CLI::App* split =
        study->add_subcommand("split", "Mean R vs. domain split");
    add_common(split);

    CLI::App* fit =
        app.add_subcommand("material-fit", "Fit the material network");
    add_common(fit);

    CLI::App* exp =
        app.add_subcommand("export", "Re-export fields from a snapshot");
    add_common(exp);
    exp->add_option("--snapshot", opts.snapshot_path, "Parameter snapshot")
        ->required();

    CLI11_PARSE(app, argc, argv);

    if (solve->parsed()) opts.subcommand = microelast::Subcommand::solve;
    if (conv->parsed())
        opts.subcommand = microelast::Subcommand::study_convergence;
    if (split->parsed()) opts.subcommand = microelast::Subcommand::study_split;
    if (fit->parsed()) opts.subcommand = microelast::Subcommand::material_fit;
    if (exp->parsed())
        opts.subcommand = microelast::Subcommand::export_fields_cmd;

    if (seed_set) opts.seed = seed;
    if (out_set) opts.out_dir = out_dir;
    opts.format = format == "vtk" ? microelast::ExportFormat::vtk
                                  : microelast::ExportFormat::csv;
    return microelast::run(opts);
}
