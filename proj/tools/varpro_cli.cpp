// varpro command-line front end.
//
//   varpro fit       --data d.csv --model example1 --b0 5 [--prior-center ... --prior-width ...]
//   varpro simulate  --truth "expsum:3" --a 100,20,4 --b=-0.10,-0.04,-0.02
//                    --grid 0,0.3,100 --noise 0.02 --seed 7 [--out d.csv]
//   varpro ensemble  --n 50 --truth ... --a ... --b ... --grid ... --noise ... --seed ...
//                    --prior-center ... --prior-width ... --b0 ... [--out dir]
//
// Exit codes: 0 success, 2 input/parse error, 3 fit failure, 4 inconsistent
// configuration. Failures print exactly one line to stderr of the form
//   varpro: error[<code>]: <message>
// and nothing to stdout.

#include <charconv>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "varpro/io.hpp"
#include "varpro/varpro.hpp"

namespace {

std::vector<double> parse_double_list(const std::string& text, const std::string& flag) {
    std::vector<double> out;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        std::size_t comma = text.find(',', pos);
        if (comma == std::string::npos) comma = text.size();
        const std::string cell = text.substr(pos, comma - pos);
        try {
            std::size_t used = 0;
            out.push_back(std::stod(cell, &used));
            if (used != cell.size()) throw std::invalid_argument(cell);
        } catch (const std::exception&) {
            throw varpro::ConfigError(flag + ": malformed number '" + cell + "'");
        }
        pos = comma + 1;
        if (comma == text.size()) break;
    }
    if (out.empty()) throw varpro::ConfigError(flag + ": empty list");
    return out;
}

varpro::GridSpec parse_grid(const std::string& text) {
    const std::vector<double> v = parse_double_list(text, "--grid");
    if (v.size() != 3) throw varpro::ConfigError("--grid wants start,step,count");
    if (!(v[2] >= 1.0) || v[2] != static_cast<double>(static_cast<std::size_t>(v[2]))) {
        throw varpro::ConfigError("--grid count must be a positive integer");
    }
    varpro::GridSpec g;
    g.start = v[0];
    g.step = v[1];
    g.count = static_cast<std::size_t>(v[2]);
    g.validate();
    return g;
}

std::optional<varpro::GaussianPrior> make_prior(const std::string& centers,
                                                const std::string& widths) {
    if (centers.empty() && widths.empty()) return std::nullopt;
    if (centers.empty() || widths.empty()) {
        throw varpro::ConfigError("--prior-center and --prior-width must be given together");
    }
    return varpro::GaussianPrior(
        varpro::Vector(parse_double_list(centers, "--prior-center")),
        varpro::Vector(parse_double_list(widths, "--prior-width")));
}

std::string vec_text(const varpro::Vector& v) {
    std::string s = "[";
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (i) s += ", ";
        s += varpro::format_double(v[i]);
    }
    return s + "]";
}

struct FitArgs {
    std::string data_path, model, b0, prior_center, prior_width, out_dir = ".";
    double ap = 1e-6, rp = 1e-4;
    std::size_t ns = 200;
    std::optional<std::uint64_t> seed;  // bookkeeping only; echoed in the report
};

int cmd_fit(const FitArgs& args) {
    const varpro::Dataset data =
        varpro::dataset_from_csv(varpro::read_file(args.data_path), args.data_path);
    const varpro::ModelBasis basis = varpro::resolve_model(args.model);

    varpro::OptimizerSettings settings = varpro::OptimizerSettings::for_fit();
    settings.ap = args.ap;
    settings.rp = args.rp;
    settings.ns = args.ns;
    settings.validate();

    varpro::FitProblem problem{data, basis,
                               varpro::Vector(parse_double_list(args.b0, "--b0")),
                               make_prior(args.prior_center, args.prior_width), settings};
    const varpro::FitResult result = varpro::fit(problem);

    std::optional<std::vector<double>> errors_b;
    try {
        errors_b = varpro::parameter_errors(result).entries();
    } catch (const varpro::Error&) {
        // curvature not invertible; report without parameter errors
    }

    nlohmann::json report = varpro::fit_report_json(result, errors_b ? &*errors_b : nullptr);
    if (args.seed) report["seed"] = *args.seed;

    // fitted curve over the data range
    double xmin = data[0].x, xmax = data[0].x;
    for (const auto& p : data.points()) {
        xmin = std::min(xmin, p.x);
        xmax = std::max(xmax, p.x);
    }
    std::vector<std::pair<double, double>> curve;
    const std::size_t samples = 200;
    for (std::size_t i = 0; i < samples; ++i) {
        const double t = (samples == 1) ? 0.0
                                        : static_cast<double>(i) / static_cast<double>(samples - 1);
        const double x = xmin + t * (xmax - xmin);
        curve.emplace_back(x, basis.model_value(result.a, result.b, x));
    }

    namespace fs = std::filesystem;
    fs::create_directories(args.out_dir);
    const std::string report_path = (fs::path(args.out_dir) / "fit_report.json").string();
    const std::string curve_path = (fs::path(args.out_dir) / "curve.csv").string();
    varpro::write_file(report_path, report.dump(2) + "\n");
    varpro::write_file(curve_path, varpro::curve_to_csv(curve));

    const std::size_t dof =
        result.n_points > result.n_params ? result.n_points - result.n_params : 0;
    std::cout << "status: converged\n"
              << "a = " << vec_text(result.a) << "\n"
              << "b = " << vec_text(result.b);
    if (errors_b) std::cout << " +- " << vec_text(varpro::Vector(*errors_b));
    std::cout << "\n"
              << "chi2 = " << varpro::format_double(result.chi2);
    if (dof > 0) {
        std::cout << "  (chi2/dof = "
                  << varpro::format_double(result.chi2 / static_cast<double>(dof))
                  << ", dof = " << dof << ")";
    }
    std::cout << "\n"
              << "chi2_augmented = " << varpro::format_double(result.chi2_augmented) << "\n"
              << "iterations = " << result.iterations
              << ", descent_reversions = " << result.descent_reversions << "\n"
              << "wrote " << report_path << " and " << curve_path << "\n";
    return 0;
}

struct SimulateArgs {
    std::string truth, a, b, grid, out = "dataset.csv";
    double noise = 0.0;
    std::uint64_t seed = 0;
    std::optional<double> dy_rel;
};

int cmd_simulate(const SimulateArgs& args) {
    const varpro::ModelBasis truth = varpro::resolve_model(args.truth);
    const varpro::Vector a(parse_double_list(args.a, "--a"));
    varpro::Vector b{0.0};
    if (truth.n_b() > 0) {
        if (args.b.empty()) {
            throw varpro::ConfigError("the truth model has nonlinear parameters; --b is required");
        }
        b = varpro::Vector(parse_double_list(args.b, "--b"));
        if (b.size() != truth.n_b()) {
            throw varpro::ConfigError("--b length does not match the truth model");
        }
    }
    if (a.size() != truth.n_a()) {
        throw varpro::ConfigError("--a length does not match the truth model");
    }
    const varpro::GridSpec grid = parse_grid(args.grid);
    varpro::NoiseSpec noise;
    noise.relative_sigma = args.noise;
    noise.seed = args.seed;

    const varpro::Dataset data =
        varpro::generate_experiment(truth, a, b, grid, noise, args.dy_rel);
    varpro::write_file(args.out, varpro::dataset_to_csv(data));
    std::cout << "wrote " << args.out << " (" << data.size() << " points)\n";
    return 0;
}

struct EnsembleArgs {
    std::string truth, a, b, grid, prior_center, prior_width, b0, out_dir = ".";
    std::size_t n = 0;
    double noise = 0.0;
    std::uint64_t seed = 0;
    std::optional<double> dy_rel;
    double ap = 1e-6, rp = 1e-4;
    std::size_t ns = 200;
};

int cmd_ensemble(const EnsembleArgs& args) {
    const std::optional<varpro::GaussianPrior> prior =
        make_prior(args.prior_center, args.prior_width);
    if (!prior) throw varpro::ConfigError("ensemble needs --prior-center and --prior-width");

    varpro::OptimizerSettings settings = varpro::OptimizerSettings::for_fit();
    settings.ap = args.ap;
    settings.rp = args.rp;
    settings.ns = args.ns;

    varpro::EnsembleConfig config{
        args.n,
        varpro::resolve_model(args.truth),
        varpro::Vector(parse_double_list(args.a, "--a")),
        varpro::Vector(parse_double_list(args.b, "--b")),
        parse_grid(args.grid),
        varpro::NoiseSpec{args.noise, args.seed},
        *prior,
        varpro::Vector(parse_double_list(args.b0, "--b0")),
        settings,
        args.dy_rel};

    const varpro::EnsembleReport report = varpro::run_ensemble(config);

    nlohmann::json summary = varpro::ensemble_summary_json(report);
    summary["seed"] = args.seed;

    namespace fs = std::filesystem;
    fs::create_directories(args.out_dir);
    const std::string summary_path = (fs::path(args.out_dir) / "ensemble_summary.json").string();
    varpro::write_file(summary_path, summary.dump(2) + "\n");

    std::string pc_path;
    if (!report.retained_b_table.empty()) {
        pc_path = (fs::path(args.out_dir) / "parallel_coordinates.csv").string();
        varpro::write_file(
            pc_path, varpro::parallel_coordinates_to_csv(varpro::parallel_coordinates_table(report)));
    } else {
        std::cerr << "varpro: warning: no experiment retained; parallel-coordinates file not "
                     "written\n";
    }

    std::cout << "experiments: " << report.outcomes.size() << "\n"
              << "failure_rate: " << varpro::format_double(report.failure_rate) << "\n";
    for (varpro::FitStatus s :
         {varpro::FitStatus::converged, varpro::FitStatus::no_convergence,
          varpro::FitStatus::unstable_solution, varpro::FitStatus::singular_hessian,
          varpro::FitStatus::stalled_descent, varpro::FitStatus::singular_normal_equations,
          varpro::FitStatus::evaluation_error}) {
        const std::size_t n = report.count(s);
        if (n) std::cout << "  " << varpro::to_string(s) << ": " << n << "\n";
    }
    std::cout << "retained: " << report.retained_b_table.size() << "\n";
    if (summary["retained_medians_b"].is_array()) {
        std::cout << "retained_medians_b = "
                  << vec_text(varpro::Vector(
                         summary["retained_medians_b"].get<std::vector<double>>()))
                  << "\n";
    }
    std::cout << "wrote " << summary_path;
    if (!pc_path.empty()) std::cout << " and " << pc_path;
    std::cout << "\n";
    return 0;
}

int exit_code_for(const varpro::Error& e) {
    switch (e.code()) {
        case varpro::ErrorCode::io_error:
        case varpro::ErrorCode::parse_error:
            return 2;
        case varpro::ErrorCode::evaluation_error:
        case varpro::ErrorCode::singular_normal_equations:
        case varpro::ErrorCode::unstable_solution:
        case varpro::ErrorCode::singular_hessian:
        case varpro::ErrorCode::no_convergence:
        case varpro::ErrorCode::stalled_descent:
            return 3;
        default:
            return 4;
    }
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"variable-projection fitting of separable models"};
    app.set_config("--config", "",
                   "INI file with per-subcommand sections, e.g. [simulate]; "
                   "flags take precedence");
    app.require_subcommand(1);

    FitArgs fit_args;
    CLI::App* fit = app.add_subcommand("fit", "fit a dataset with a separable model");
    fit->add_option("--data", fit_args.data_path, "input dataset CSV (header x,y,dy)")
        ->required();
    fit->add_option("--model", fit_args.model,
                    "model: example1 | expsum:K | grammar text, e.g. \"x; x^2; 1/(x+b0)\"")
        ->required();
    fit->add_option("--b0", fit_args.b0, "starting nonlinear parameters, comma-separated")
        ->required();
    fit->add_option("--prior-center", fit_args.prior_center, "prior centers, comma-separated");
    fit->add_option("--prior-width", fit_args.prior_width, "prior widths, comma-separated");
    fit->add_option("--ap", fit_args.ap, "absolute precision target");
    fit->add_option("--rp", fit_args.rp, "relative precision target");
    fit->add_option("--ns", fit_args.ns, "max Newton iterations");
    std::uint64_t fit_seed = 0;
    CLI::Option* fit_seed_opt =
        fit->add_option("--seed", fit_seed, "echoed into the report for bookkeeping");
    fit->add_option("--out", fit_args.out_dir, "output directory");

    SimulateArgs sim_args;
    double sim_dy = 0.0;
    CLI::App* sim = app.add_subcommand("simulate", "generate a synthetic dataset");
    sim->add_option("--truth", sim_args.truth, "truth model (same forms as --model)")->required();
    sim->add_option("--a", sim_args.a, "true linear coefficients")->required();
    sim->add_option("--b", sim_args.b, "true nonlinear parameters");
    sim->add_option("--grid", sim_args.grid, "x grid as start,step,count")->required();
    sim->add_option("--noise", sim_args.noise, "relative Gaussian noise level (e.g. 0.02)")
        ->required();
    sim->add_option("--seed", sim_args.seed, "PRNG seed")->required();
    CLI::Option* sim_dy_opt = sim->add_option(
        "--dy", sim_dy, "fix dy = this fraction of |y_true| (required when --noise 0)");
    sim->add_option("--out", sim_args.out, "output CSV path");

    EnsembleArgs ens_args;
    double ens_dy = 0.0;
    CLI::App* ens = app.add_subcommand("ensemble", "run a batch of simulated experiments");
    ens->add_option("--n", ens_args.n, "number of experiments")->required();
    ens->add_option("--truth", ens_args.truth, "truth model")->required();
    ens->add_option("--a", ens_args.a, "true linear coefficients")->required();
    ens->add_option("--b", ens_args.b, "true nonlinear parameters")->required();
    ens->add_option("--grid", ens_args.grid, "x grid as start,step,count")->required();
    ens->add_option("--noise", ens_args.noise, "relative noise level")->required();
    ens->add_option("--seed", ens_args.seed, "base seed; experiment k uses seed+k")->required();
    ens->add_option("--prior-center", ens_args.prior_center, "prior centers")->required();
    ens->add_option("--prior-width", ens_args.prior_width, "prior widths")->required();
    ens->add_option("--b0", ens_args.b0, "starting nonlinear parameters")->required();
    ens->add_option("--ap", ens_args.ap, "absolute precision target");
    ens->add_option("--rp", ens_args.rp, "relative precision target");
    ens->add_option("--ns", ens_args.ns, "max Newton iterations");
    CLI::Option* ens_dy_opt =
        ens->add_option("--dy", ens_dy, "fix dy = this fraction of |y_true| per point");
    ens->add_option("--out", ens_args.out_dir, "output directory");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        // flag-usage problems follow the same single-line contract as ours
        std::cerr << "varpro: error[config_error]: " << e.what() << "\n";
        return 4;
    }

    try {
        if (*fit) {
            if (*fit_seed_opt) fit_args.seed = fit_seed;
            return cmd_fit(fit_args);
        }
        if (*sim) {
            if (*sim_dy_opt) sim_args.dy_rel = sim_dy;
            return cmd_simulate(sim_args);
        }
        if (*ens) {
            if (*ens_dy_opt) ens_args.dy_rel = ens_dy;
            return cmd_ensemble(ens_args);
        }
    } catch (const varpro::Error& e) {
        std::cerr << "varpro: error[" << varpro::to_string(e.code()) << "]: " << e.what() << "\n";
        return exit_code_for(e);
    } catch (const std::exception& e) {
        std::cerr << "varpro: error[internal]: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
