#include "microelast/runner.hpp"

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include <json.hpp>

#include "microelast/image.hpp"
#include "microelast/snapshot.hpp"

namespace microelast {

namespace fs = std::filesystem;
using Json = nlohmann::ordered_json;

namespace {

bool log_enabled() {
    const char* v = std::getenv("MICROELAST_LOG");
    return v != nullptr && *v != '\0';
}

void log_info(const std::string& msg) {
    if (log_enabled()) std::cerr << "[microelast] " << msg << "\n";
}

Method effective_method(const ExperimentConfig& c) {
    if (c.sampling.mode != "adaptive") return c.method;
    switch (c.method) {
        case Method::pinn: return Method::ada_pinn;
        case Method::cpinn: return Method::ada_cpinn;
        default: return c.method;
    }
}

std::string fields_filename(ExportFormat f) {
    return f == ExportFormat::csv ? "fields.csv" : "fields.vtk";
}

/// Physical field channels + residual grids on the report grid.
FieldExport make_field_export(const Predictor& pred,
                              const ResidualReport& rep,
                              const ScaleSet& sc) {
    BatchEval comp = pred(rep.points);
    const Eigen::Index n = rep.points.cols();
    FieldExport f;
    f.nx = rep.n_per_side;
    f.ny = rep.n_per_side;
    f.points = rep.points;
    f.channel_names = {"u_x",       "u_y",        "s_xx",       "s_yy",
                       "s_xy",      "W_int",      "R",          "R_div_x",
                       "R_div_y",   "R_const_xx", "R_const_yy", "R_const_xy"};
    Vector ux(n), uy(n), sxx(n), syy(n), sxy(n), wint(n);
    const double du = sc.u_c / sc.x_c;
    for (Eigen::Index c = 0; c < n; ++c) {
        ux[c] = comp.y(0, c) * sc.u_c;
        uy[c] = comp.y(1, c) * sc.u_c;
        sxx[c] = comp.y(2, c) * sc.sigma_c;
        syy[c] = comp.y(3, c) * sc.sigma_c;
        sxy[c] = comp.y(4, c) * sc.sigma_c;
        wint[c] = sxx[c] * comp.jx(0, c) * du + syy[c] * comp.jy(1, c) * du +
                  sxy[c] * (comp.jy(0, c) + comp.jx(1, c)) * du;
    }
    f.channels = {std::move(ux),    std::move(uy),   std::move(sxx),
                  std::move(syy),   std::move(sxy),  std::move(wint),
                  rep.r_total,      rep.r_div_x,     rep.r_div_y,
                  rep.r_const_xx,   rep.r_const_yy,  rep.r_const_xy};
    return f;
}

void write_text(const fs::path& path, const std::string& text) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("runner: cannot write " + path.string());
    out << text;
    if (!out)
        throw std::runtime_error("runner: write failed for " + path.string());
}

void write_history_csv(const fs::path& path, const OptHistory& history) {
    std::ostringstream os;
    os << "iter,loss,grad_norm,step_length\n";
    for (std::size_t i = 0; i < history.iterations.size(); ++i) {
        const auto& r = history.iterations[i];
        char buf[128];
        std::snprintf(buf, sizeof(buf), "%zu,%.9e,%.9e,%.9e\n", i, r.loss,
                      r.grad_norm, r.step_length);
        os << buf;
    }
    write_text(path, os.str());
}

void write_study_csv(const fs::path& path, const StudyResult& result) {
    std::ostringstream os;
    os << "key,mean_r,ok,error\n";
    for (const StudyRow& row : result.rows) {
        char buf[64];
        std::snprintf(buf, sizeof(buf), "%d,%.9e,%d,", row.key, row.mean_r,
                      row.ok ? 1 : 0);
        os << buf << row.error << "\n";
    }
    write_text(path, os.str());
}

Json stats_json(const GridStats& s) {
    return Json{{"mean", s.mean}, {"max", s.max}, {"min", s.min}};
}

int run_solve(const ExperimentConfig& config, const RunOptions& options,
              const fs::path& out) {
    auto material = build_material(config);
    StudyConfig cfg = study_config(config);
    cfg.fixed_units = config.units_per_layer;
    const Method method = effective_method(config);
    log_info("training " + to_string(method) + " on a " +
             std::to_string(config.sampling.n_per_side) + "^2 grid");
    TrainedModel model =
        train_model(method, cfg, *material, config.sampling.n_per_side);
    const ScaleSet& sc =
        model.cpinn ? model.cpinn->scales() : model.pinn->scales();
    Predictor pred = model.predictor();
    ResidualReport rep =
        residual_report(pred, *material, sc, config.edge_length,
                        config.eval_side);

    export_fields(make_field_export(pred, rep, sc), options.format,
                  (out / fields_filename(options.format)).string());
    write_history_csv(out / "history.csv", model.history);
    save_snapshot((out / "params.snap").string(), model.topology,
                  model.theta);

    Json summary;
    summary["problem"] = to_string(config.problem);
    summary["method"] = to_string(method);
    summary["seed"] = config.seed;
    summary["eval_side"] = config.eval_side;
    summary["param_count"] = model.theta.size();
    summary["final_loss"] = model.final_loss;
    summary["iterations"] = model.history.iterations.size();
    summary["termination"] = to_string(model.history.reason);
    summary["r"] = stats_json(rep.total);
    summary["r_div_x"] = stats_json(rep.div_x);
    summary["r_div_y"] = stats_json(rep.div_y);
    summary["r_const_xx"] = stats_json(rep.const_xx);
    summary["r_const_yy"] = stats_json(rep.const_yy);
    summary["r_const_xy"] = stats_json(rep.const_xy);
    summary["work_norm"] = rep.work_norm;
    write_text(out / "summary.json", summary.dump(2) + "\n");
    log_info("mean R = " + std::to_string(rep.total.mean));
    return 0;
}

int run_study(const ExperimentConfig& config, const RunOptions& options,
              const fs::path& out, bool convergence) {
    auto material = build_material(config);
    StudyConfig cfg = study_config(config);
    StudyResult result =
        convergence
            ? convergence_study(cfg, effective_method(config), *material)
            : split_study(cfg, *material);
    write_study_csv(out / "study.csv", result);

    Json summary;
    summary["kind"] = convergence ? "convergence" : "split";
    summary["method"] = to_string(result.method);
    summary["seed"] = result.seed;
    summary["param_budget"] = result.param_budget;
    summary["eval_side"] = result.eval_side;
    Json rows = Json::array();
    for (const StudyRow& row : result.rows)
        rows.push_back(Json{{"key", row.key},
                            {"mean_r", row.mean_r},
                            {"ok", row.ok},
                            {"error", row.error}});
    summary["rows"] = rows;
    write_text(out / "summary.json", summary.dump(2) + "\n");
    (void)options;
    return 0;
}

VoxelGrid voxel_pipeline(const ExperimentConfig& config) {
    VoxelGrid raw;
    if (config.material.image_path.empty()) {
        FiberFixtureOptions f;
        f.seed = config.seed;
        raw = synthetic_fiber_grid(f);
        log_info("generated synthetic fiber grid " +
                 std::to_string(raw.width) + "x" + std::to_string(raw.height));
    } else {
        raw = load_grayscale_pgm(config.material.image_path);
        log_info("loaded " + config.material.image_path);
    }
    return binarize(gaussian_filter(raw, config.material.sigma_px),
                    config.material.threshold);
}

int run_material_fit(const ExperimentConfig& config,
                     const RunOptions& options, const fs::path& out) {
    VoxelGrid grid = voxel_pipeline(config);
    MaterialNetOptions mopts;
    mopts.max_iters = config.material.fit_iters;
    mopts.seed = config.seed + 1;
    auto net = train_material_network(
        grid, lame_from_engineering(config.material.matrix),
        lame_from_engineering(config.material.inclusion), config.edge_length,
        mopts);

    // Fitted Lame fields on the evaluation grid.
    CollocationSet eval = regular_grid(config.eval_side, config.edge_length);
    auto [lam, mu] = net->query_batch(eval.interior);
    FieldExport f;
    f.nx = f.ny = config.eval_side;
    f.points = eval.interior;
    f.channel_names = {"lambda", "mu"};
    f.channels = {lam, mu};
    export_fields(f, options.format,
                  (out / fields_filename(options.format)).string());
    save_snapshot((out / "material.snap").string(), net->topology(),
                  net->params().values);
    save_pgm(grid, (out / "microstructure.pgm").string());

    Json summary;
    summary["problem"] = to_string(config.problem);
    summary["seed"] = config.seed;
    summary["grid"] = {{"width", grid.width}, {"height", grid.height}};
    summary["lambda"] = {{"min", net->lower().lambda},
                         {"max", net->upper().lambda}};
    summary["mu"] = {{"min", net->lower().mu}, {"max", net->upper().mu}};
    write_text(out / "summary.json", summary.dump(2) + "\n");
    return 0;
}

int run_export(const ExperimentConfig& config, const RunOptions& options,
               const fs::path& out) {
    if (options.snapshot_path.empty())
        throw std::invalid_argument("export: missing snapshot path");
    auto [topo, theta] = load_snapshot(options.snapshot_path);
    auto material = build_material(config);
    BvpSpec bvp = BvpSpec::uniaxial(config.edge_length, config.sigma_bar,
                                    *material, config.corrected_shear);
    CollocationSet points =
        regular_grid(config.sampling.n_per_side, config.edge_length);

    const auto n_subnets = theta.size() / topo.param_count();
    Predictor pred;
    ScaleSet sc = bvp.scales;
    if (n_subnets == 1) {
        auto problem = std::make_shared<PinnProblem>(
            topo, bvp.rules, *material, bvp.scales, bvp.edge_length,
            points.interior, points.boundary);
        const double x_c = sc.x_c;
        pred = [problem, theta, x_c](const Matrix& x) {
            return problem->evaluate_scaled(ParamVector{theta}, x / x_c);
        };
    } else {
        const auto [nx, ny] = config.split;
        if (static_cast<std::int64_t>(nx) * ny != n_subnets)
            throw std::runtime_error(
                "export: snapshot subnet count disagrees with config split");
        CpinnOptions copts;
        copts.psi = config.psi;
        copts.interface_full = config.interface_full;
        auto problem = std::make_shared<CpinnProblem>(
            topo, bvp, *material, decompose(nx, ny), points, copts);
        pred = [problem, theta](const Matrix& x) {
            return problem->predict(theta, x);
        };
    }
    ResidualReport rep = residual_report(pred, *material, sc,
                                         config.edge_length,
                                         config.eval_side);
    export_fields(make_field_export(pred, rep, sc), options.format,
                  (out / fields_filename(options.format)).string());
    return 0;
}

}  // namespace

std::unique_ptr<MaterialField> build_material(const ExperimentConfig& config) {
    const double L = config.edge_length;
    const LameConstants matrix = lame_from_engineering(config.material.matrix);
    switch (config.problem) {
        case ProblemKind::homogeneous:
            return std::make_unique<ConstantMaterial>(matrix, L);
        case ProblemKind::single_inclusion:
            return std::make_unique<TanhInclusionMaterial>(
                lame_from_engineering(config.material.inclusion), matrix,
                config.material.radius, config.material.delta, L);
        case ProblemKind::voxel: {
            VoxelGrid grid = voxel_pipeline(config);
            MaterialNetOptions mopts;
            mopts.max_iters = config.material.fit_iters;
            mopts.seed = config.seed + 1;
            return train_material_network(
                grid, matrix,
                lame_from_engineering(config.material.inclusion), L, mopts);
        }
    }
    throw std::invalid_argument("runner: unknown problem kind");
}

StudyConfig study_config(const ExperimentConfig& config) {
    StudyConfig cfg;
    cfg.edge_length = config.edge_length;
    cfg.sigma_bar = config.sigma_bar;
    cfg.corrected_shear = config.corrected_shear;
    cfg.param_budget = config.study.param_budget;
    cfg.n_layers = config.n_layers;
    cfg.activation = config.activation_enum();
    cfg.budgets = config.study.budgets;
    cfg.splits = config.study.splits;
    cfg.cpinn_split = config.split;
    cfg.train_side = config.study.train_side;
    cfg.eval_side = config.eval_side;
    cfg.bfgs = config.optimizer;
    cfg.psi = config.psi;
    cfg.interface_full = config.interface_full;
    cfg.seed = config.seed;
    cfg.adaptive = config.sampling.adaptive;
    return cfg;
}

int run(const RunOptions& options) {
    try {
        ExperimentConfig config = load_config(options.config_path);
        if (options.seed) config.seed = *options.seed;
        if (options.out_dir) config.out_dir = *options.out_dir;
        Eigen::setNbThreads(options.threads);

        const fs::path out(config.out_dir);
        fs::create_directories(out);
        write_text(out / "config.json", serialize_config(config));

        switch (options.subcommand) {
            case Subcommand::solve:
                return run_solve(config, options, out);
            case Subcommand::study_convergence:
                return run_study(config, options, out, true);
            case Subcommand::study_split:
                return run_study(config, options, out, false);
            case Subcommand::material_fit:
                return run_material_fit(config, options, out);
            case Subcommand::export_fields_cmd:
                return run_export(config, options, out);
        }
        std::cerr << "error: unknown subcommand\n";
        return 1;
    } catch (const MissingKeyError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}

}  // namespace microelast
