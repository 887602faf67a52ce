#include "etafit/cli.hpp"
#include "etafit/analysis.hpp"
#include "etafit/dataset.hpp"
#include "etafit/design.hpp"
#include "etafit/errors.hpp"
#include "etafit/estimation.hpp"
#include "etafit/likelihood.hpp"
#include "etafit/profile.hpp"
#include "etafit/report_json.hpp"

#include "CLI11.hpp"

#include <atomic>
#include <chrono>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <mutex>
#include <optional>
#include <sstream>
#include <thread>

namespace etafit {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
    return std::chrono::duration<double>(Clock::now() - start).count();
}

std::vector<std::string> split_list(const std::string& text, char sep) {
    std::vector<std::string> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, sep)) {
        out.push_back(item);
    }
    return out;
}

double parse_double(const std::string& text, const std::string& what) {
    try {
        std::size_t pos = 0;
        const double v = std::stod(text, &pos);
        if (pos != text.size()) throw std::invalid_argument(text);
        return v;
    } catch (const std::exception&) {
        throw InputError("invalid " + what + " '" + text + "'");
    }
}

std::vector<double> parse_double_list(const std::string& text, const std::string& what) {
    std::vector<double> out;
    for (const auto& item : split_list(text, ',')) {
        out.push_back(parse_double(item, what));
    }
    if (out.empty()) throw InputError("empty " + what + " list");
    return out;
}

// Writes to a temporary sibling and renames, so failures leave no partial file.
void write_text_file(const std::string& path, const std::string& content) {
    const std::string tmp = path + ".tmp";
    {
        std::ofstream os(tmp);
        if (!os) throw InputError("cannot write " + path);
        os << content;
        if (!os) throw InputError("cannot write " + path);
    }
    std::filesystem::rename(tmp, path);
}

void emit(const std::string& path, const std::string& content, std::ostream& out) {
    if (path.empty() || path == "-") {
        out << content;
    } else {
        write_text_file(path, content);
    }
}

std::string fmt(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    return format_double(v);
}

struct EstimateArgs {
    std::string data;
    std::string basis = "poly:2";
    std::string basis_table;
    std::string kernel = "exp:0.1";
    double taper = 0.0;
    double eta_tol = 1e-6;
    std::string thresholds = "1e-4,1e4";
    std::string trace_method;
    std::string trace_mode = "auto";
    std::string nodes;
    std::uint64_t seed = 0;
    int hutchinson_vectors = 20;
    int scan_probes = 16;
};

void add_estimate_flags(CLI::App* cmd, EstimateArgs& a, bool with_basis) {
    cmd->add_option("--data", a.data, "dataset CSV")->required();
    if (with_basis) {
        cmd->add_option("--basis", a.basis, "poly:q or trig");
        cmd->add_option("--basis-table", a.basis_table, "CSV of design columns (overrides --basis)");
    }
    cmd->add_option("--kernel", a.kernel, "exp:alpha, matern:alpha:nu or gauss:alpha");
    cmd->add_option("--taper", a.taper, "taper threshold kappa (0 = dense)");
    cmd->add_option("--eta-tol", a.eta_tol, "root tolerance in log10(eta)");
    cmd->add_option("--thresholds", a.thresholds, "c,C classification thresholds");
    cmd->add_option("--trace-method", a.trace_method, "eigen, cholesky or hutchinson");
    cmd->add_option("--trace-mode", a.trace_mode, "auto, interpolated or exact");
    cmd->add_option("--nodes", a.nodes, "interpolant nodes, comma separated");
    cmd->add_option("--seed", a.seed, "seed for stochastic estimators");
    cmd->add_option("--hutchinson-vectors", a.hutchinson_vectors, "probe vectors");
    cmd->add_option("--scan-probes", a.scan_probes, "log-spaced scan probes");
}

EstimationConfig make_config(const EstimateArgs& a) {
    EstimationConfig config;
    const auto th = parse_double_list(a.thresholds, "thresholds");
    if (th.size() != 2) throw InputError("--thresholds expects c,C");
    config.c = th[0];
    config.C = th[1];
    config.x_tol_log10 = a.eta_tol;
    if (!a.trace_method.empty()) config.trace_method = parse_trace_method(a.trace_method);
    if (a.trace_mode == "auto") {
        config.trace_mode = TraceMode::Auto;
    } else if (a.trace_mode == "interpolated") {
        config.trace_mode = TraceMode::Interpolated;
    } else if (a.trace_mode == "exact") {
        config.trace_mode = TraceMode::Exact;
    } else {
        throw InputError("unknown trace mode '" + a.trace_mode + "'");
    }
    if (!a.nodes.empty()) config.nodes = parse_double_list(a.nodes, "nodes");
    config.seed = a.seed;
    config.spectrum.seed = a.seed;
    config.hutchinson_vectors = a.hutchinson_vectors;
    config.scan_probes = a.scan_probes;
    config.validate();
    return config;
}

DesignMatrix make_design(const Dataset& data, const EstimateArgs& a) {
    if (!a.basis_table.empty()) {
        std::vector<std::string> names;
        Eigen::MatrixXd X = read_numeric_csv(a.basis_table, &names);
        if (X.rows() != data.points.rows()) {
            throw InputError("basis table has " + std::to_string(X.rows()) + " rows, dataset has " +
                             std::to_string(data.points.rows()));
        }
        return design_from_table(std::move(X), std::move(names));
    }
    return build_design(data.points, BasisSpec::parse(a.basis));
}

std::string summary_line(const EstimationReport& r) {
    std::ostringstream os;
    os << "sigma=" << fmt(r.hyperparams.sigma()) << " sigma0=" << fmt(r.hyperparams.sigma0())
       << " eta=" << fmt(r.eta_hat());
    if (r.alpha_hat) os << " alpha=" << fmt(*r.alpha_hat);
    if (r.nu_hat) os << " nu=" << fmt(*r.nu_hat);
    os << " outcome=" << to_string(r.outcome) << " evals=" << r.n_ell_evals;
    if (r.n_objective_evals > 0) os << " objective_evals=" << r.n_objective_evals;
    return os.str();
}

// generate

struct GenerateArgs {
    long n = 2500;
    double sigma0 = 0.2;
    std::uint64_t seed = kDefaultDataSeed;
    std::string sampling = "grid";
    std::string out;
};

int cmd_generate(const GenerateArgs& a, std::ostream& out) {
    if (a.out.empty()) throw InputError("--out is required");
    const Dataset data = generate_synthetic(a.n, a.sigma0, a.seed, parse_sampling(a.sampling));
    write_dataset(data, a.out);
    out << "wrote " << data.points.rows() << " points to " << a.out << "\n";
    return 0;
}

// estimate

struct EstimateCmdArgs {
    EstimateArgs common;
    std::string out;
    std::string optimize_kernel;
    std::string priors = "uniform";
    std::string init = "0.1,1";
    double opt_tol = 1e-4;
    int max_evals = 600;
};

int cmd_estimate(const EstimateCmdArgs& a, std::ostream& out) {
    const Dataset data = read_dataset(a.common.data);
    const EstimationConfig config = make_config(a.common);
    DesignMatrix design = make_design(data, a.common);
    EstimationReport report;
    if (!a.optimize_kernel.empty()) {
        if (a.optimize_kernel != "matern") {
            throw InputError("--optimize-kernel supports only 'matern'");
        }
        const auto init = parse_double_list(a.init, "init");
        if (init.size() != 2) throw InputError("--init expects alpha,nu");
        ProfileOptions options;
        options.tol = a.opt_tol;
        options.max_evals = a.max_evals;
        options.inner = config;
        const auto builder = matern_model_builder(data.points, data.z, std::move(design));
        report = profile_optimize(builder, init[0], init[1], PriorSpec::parse(a.priors), options);
    } else {
        const auto K = make_correlation(data.points, parse_kernel(a.common.kernel, a.common.taper));
        const GpModel model(data.z, std::move(design), K);
        report = estimate_variances(model, config);
    }
    const std::string doc = to_json(report).dump(2) + "\n";
    if (!a.out.empty()) write_text_file(a.out, doc);
    out << summary_line(report) << "\n";
    return 0;
}

// table1

struct Table1Args {
    EstimateArgs common;
    std::string out;
    std::string bases = "poly:0,poly:1,poly:2,poly:3,poly:4,poly:5,trig";
};

int cmd_table1(const Table1Args& a, std::ostream& out, std::ostream& err) {
    const Dataset data = read_dataset(a.common.data);
    const EstimationConfig config = make_config(a.common);
    const auto K = make_correlation(data.points, parse_kernel(a.common.kernel, a.common.taper));
    const EstimationContext ctx = prepare_context(K, config);

    std::ostringstream csv;
    csv << "basis,m,sigma0_true,log10_eta,sigma_hat,sigma0_hat,rel_error,outcome,status\n";
    for (const auto& name : split_list(a.bases, ',')) {
        csv << name << ",";
        try {
            const DesignMatrix design = build_design(data.points, BasisSpec::parse(name));
            csv << design.m() << ",";
            const GpModel model(data.z, design, K);
            const EstimationReport r = estimate_variances(model, config, &ctx);
            const double s0 = r.hyperparams.sigma0();
            csv << (data.meta.sigma0_true ? fmt(*data.meta.sigma0_true) : "") << "," << fmt(std::log10(r.eta_hat()))
                << "," << fmt(r.hyperparams.sigma()) << "," << fmt(s0) << ",";
            if (data.meta.sigma0_true && *data.meta.sigma0_true > 0.0) {
                csv << fmt(std::abs(s0 - *data.meta.sigma0_true) / *data.meta.sigma0_true);
            }
            csv << "," << to_string(r.outcome) << ",ok\n";
        } catch (const Error& e) {
            err << "table1: " << name << ": " << e.what() << "\n";
            csv << ",,,,,,,failed\n";
        }
    }
    emit(a.out, csv.str(), out);
    return 0;
}

// benchmark

struct BenchmarkArgs {
    std::string sizes = "256,1024,4096";
    std::string methods = "profiled,direct";
    std::string basis = "poly:2";
    std::string kernel = "exp:0.1";
    double taper = 0.0;
    double sigma0 = 0.2;
    std::uint64_t seed = kDefaultDataSeed;
    int jobs = 1;
    double timeout = 600.0;
    std::string out;
};

struct BenchmarkCell {
    long n = 0;
    std::string method;
    std::string storage;
    std::optional<double> wall_time;
    std::optional<double> precompute;
    std::optional<double> root_find;
    std::optional<int> n_evals;
    std::optional<double> sigma;
    std::optional<double> sigma0;
    std::string status = "ok";
};

void check_deadline(Clock::time_point deadline) {
    if (Clock::now() > deadline) throw TimeoutError("cell timed out");
}

void run_cell(BenchmarkCell& cell, const BenchmarkArgs& a) {
    const auto start = Clock::now();
    const auto deadline = start + std::chrono::duration_cast<Clock::duration>(std::chrono::duration<double>(a.timeout));
    const auto side = static_cast<long>(std::llround(std::sqrt(static_cast<double>(cell.n))));
    const Sampling sampling = side * side == cell.n ? Sampling::Grid : Sampling::UniformRandom;
    const Dataset data = generate_synthetic(cell.n, a.sigma0, a.seed, sampling);
    const auto K = make_correlation(data.points, parse_kernel(a.kernel, a.taper));
    cell.storage = K->is_sparse() ? "sparse" : "dense";
    const GpModel model(data.z, build_design(data.points, BasisSpec::parse(a.basis)), K);
    check_deadline(deadline);
    if (cell.method == "profiled") {
        EstimationConfig config;
        config.seed = a.seed;
        config.observer = [deadline](double) { check_deadline(deadline); };
        const EstimationReport r = estimate_variances(model, config);
        cell.precompute = r.timings.precompute;
        cell.root_find = r.timings.root_find;
        cell.n_evals = r.n_ell_evals;
        cell.sigma = r.hyperparams.sigma();
        cell.sigma0 = r.hyperparams.sigma0();
    } else if (cell.method == "direct") {
        const double v = sigma02_noise_limit(model) / 2.0;
        NelderMeadOptions options;
        options.on_eval = [deadline](int, const Eigen::VectorXd&, double) { check_deadline(deadline); };
        const auto r = direct_variance_search(model, v, v, options);
        cell.n_evals = r.nm.evaluations;
        cell.sigma = r.sigma;
        cell.sigma0 = r.sigma0;
    } else {
        throw InputError("unknown benchmark method '" + cell.method + "'");
    }
    cell.wall_time = seconds_since(start);
}

std::string opt(const std::optional<double>& v) { return v ? fmt(*v) : ""; }

int cmd_benchmark(const BenchmarkArgs& a, std::ostream& out, std::ostream& err) {
    if (a.jobs < 1) throw InputError("--jobs must be at least 1");
    if (!(a.timeout > 0.0)) throw InputError("--timeout must be positive");
    parse_kernel(a.kernel, a.taper).validate();
    BasisSpec::parse(a.basis);
    std::vector<BenchmarkCell> cells;
    for (const auto& size : split_list(a.sizes, ',')) {
        const double n = parse_double(size, "size");
        if (!(n >= 1.0) || n != std::floor(n)) throw InputError("invalid size '" + size + "'");
        for (const auto& method : split_list(a.methods, ',')) {
            if (method != "profiled" && method != "direct") throw InputError("unknown method '" + method + "'");
            BenchmarkCell cell;
            cell.n = static_cast<long>(n);
            cell.method = method;
            cells.push_back(cell);
        }
    }

    std::atomic<std::size_t> next{0};
    std::mutex log_mutex;
    auto worker = [&] {
        for (std::size_t i = next++; i < cells.size(); i = next++) {
            auto& cell = cells[i];
            try {
                run_cell(cell, a);
            } catch (const TimeoutError&) {
                cell.status = "timeout";
            } catch (const Error& e) {
                cell.status = "failed";
                std::lock_guard lock(log_mutex);
                err << "benchmark n=" << cell.n << " " << cell.method << ": " << e.what() << "\n";
            }
            if (cell.status != "ok") {
                cell.wall_time.reset();
                cell.precompute.reset();
                cell.root_find.reset();
                cell.n_evals.reset();
                cell.sigma.reset();
                cell.sigma0.reset();
            }
        }
    };
    std::vector<std::thread> threads;
    const int n_threads = std::min<int>(a.jobs, static_cast<int>(cells.size()));
    for (int t = 0; t < n_threads; ++t) threads.emplace_back(worker);
    for (auto& t : threads) t.join();

    std::ostringstream csv;
    csv << "n,method,storage,wall_time,precompute_time,root_find_time,n_evals,sigma_hat,sigma0_hat,status\n";
    for (const auto& c : cells) {
        csv << c.n << "," << c.method << "," << c.storage << "," << opt(c.wall_time) << "," << opt(c.precompute)
            << "," << opt(c.root_find) << "," << (c.n_evals ? std::to_string(*c.n_evals) : "") << ","
            << opt(c.sigma) << "," << opt(c.sigma0) << "," << c.status << "\n";
    }
    emit(a.out, csv.str(), out);
    return 0;
}

// plotdata

struct PlotArgs {
    EstimateArgs common;
    double eta_min = 1e-3;
    double eta_max = 1e3;
    int points = 121;
    std::string out;
};

int cmd_plotdata(const PlotArgs& a, std::ostream& out) {
    if (a.points < 2 || !(a.eta_min > 0.0) || !(a.eta_max > a.eta_min)) {
        throw InputError("plot grid needs points >= 2 and 0 < eta-min < eta-max");
    }
    const Dataset data = read_dataset(a.common.data);
    EstimationConfig config = make_config(a.common);
    config.trace_mode = TraceMode::Exact;
    config.spectrum.dense_limit = std::max<Eigen::Index>(config.spectrum.dense_limit, 4096);
    const auto K = make_correlation(data.points, parse_kernel(a.common.kernel, a.common.taper));
    const GpModel model(data.z, make_design(data, a.common), K);
    Solver solver(K);
    const EstimationContext ctx = prepare_context(K, config);
    const SpectrumSummary& spec = *ctx.spectrum;
    const Eigen::VectorXd* eig = spec.eigenvalues.size() > 0 ? &spec.eigenvalues : nullptr;
    const TraceSource traces = exact_trace_source(solver, eig, config.hutchinson_vectors, config.seed);
    const AsymptoteCoefficients coeffs = asymptote_coefficients(model);
    const EstimationReport report = estimate_variances(model, solver, config, &ctx);

    std::ostringstream csv;
    csv << "kind,eta,d_ell,bound_lo,bound_hi,asymptote_1,asymptote_2\n";
    auto row = [&](const std::string& kind, double eta) {
        const double d = d_ell_deta(model, eta, solver, traces);
        const double b1 = derivative_bounds(spec, model.n(), model.m(), eta).first;
        csv << kind << "," << fmt(eta) << "," << fmt(d) << "," << fmt(-b1) << "," << fmt(b1) << ","
            << fmt(asymptote_derivative(coeffs, model.dof(), eta, 1)) << ","
            << fmt(asymptote_derivative(coeffs, model.dof(), eta, 2)) << "\n";
    };
    const double l0 = std::log10(a.eta_min);
    const double l1 = std::log10(a.eta_max);
    for (int i = 0; i < a.points; ++i) {
        row("grid", std::pow(10.0, l0 + (l1 - l0) * i / (a.points - 1)));
    }
    for (const auto& c : report.diagnostics.candidates) {
        if (c.kind == "root") row("root_exact", c.eta);
    }
    for (double r : asymptote_roots(coeffs, 1)) row("root_asymptote_1", r);
    for (double r : asymptote_roots(coeffs, 2)) row("root_asymptote_2", r);
    emit(a.out, csv.str(), out);
    return 0;
}

// trace-interp

struct TraceInterpArgs {
    std::string data;
    std::string kernel = "exp:0.1";
    double taper = 0.0;
    std::string nodes;
    std::string trace_method;
    std::uint64_t seed = 0;
    int hutchinson_vectors = 20;
    std::string load;
    std::string eta = "0.001,0.01,0.1,1,10,100,1000";
    std::string out;
};

int cmd_trace_interp(const TraceInterpArgs& a, std::ostream& out) {
    std::optional<TraceInterpolant> interp;
    CorrelationMatrixPtr K;
    if (!a.data.empty()) {
        const Dataset data = read_dataset(a.data);
        K = make_correlation(data.points, parse_kernel(a.kernel, a.taper));
    }
    if (!a.load.empty()) {
        std::ifstream is(a.load);
        if (!is) throw InputError("cannot open " + a.load);
        nlohmann::json doc;
        try {
            is >> doc;
        } catch (const nlohmann::json::exception& e) {
            throw InputError(a.load + ": " + e.what());
        }
        interp = interpolant_from_json(doc);
        if (K && K->size() != interp->n) throw InputError("interpolant size does not match the dataset");
    } else {
        if (!K) throw InputError("trace-interp needs --data to fit or --load to inspect");
        TraceOptions options = default_trace_options(*K);
        if (!a.trace_method.empty()) options.method = parse_trace_method(a.trace_method);
        options.seed = a.seed;
        options.hutchinson_vectors = a.hutchinson_vectors;
        const auto nodes = a.nodes.empty() ? kDefaultInterpolantNodes : parse_double_list(a.nodes, "nodes");
        interp = fit_tau_interpolant(K, nodes, options);
        if (!a.out.empty()) write_text_file(a.out, to_json(*interp).dump(2) + "\n");
    }

    std::optional<Solver> solver;
    if (K && !K->is_sparse()) solver.emplace(K);
    out << "eta,tau,trace" << (solver ? ",trace_exact,rel_error" : "") << "\n";
    for (double eta : parse_double_list(a.eta, "eta")) {
        const double tr = interp->trace(eta);
        out << fmt(eta) << "," << fmt(eval_tau(*interp, eta)) << "," << fmt(tr);
        if (solver) {
            const double exact = solver->trace_inverse_cholesky(eta);
            out << "," << fmt(exact) << "," << fmt(std::abs(tr - exact) / exact);
        }
        out << "\n";
    }
    if (interp->ill_conditioned()) {
        out << "# warning: weight system condition number " << fmt(interp->condition_number) << "\n";
    }
    return 0;
}

} // namespace

CorrelationKernel parse_kernel(const std::string& text, double taper) {
    const auto parts = split_list(text, ':');
    CorrelationKernel kernel;
    if (parts.size() == 2 && (parts[0] == "exp" || parts[0] == "exponential")) {
        kernel = CorrelationKernel::exponential(parse_double(parts[1], "alpha"), taper);
    } else if (parts.size() == 3 && parts[0] == "matern") {
        kernel = CorrelationKernel::matern(parse_double(parts[1], "alpha"), parse_double(parts[2], "nu"), taper);
    } else if (parts.size() == 2 && (parts[0] == "gauss" || parts[0] == "gaussian")) {
        kernel = CorrelationKernel::gaussian(parse_double(parts[1], "alpha"), taper);
    } else {
        throw InputError("invalid kernel '" + text + "' (expected exp:alpha, matern:alpha:nu or gauss:alpha)");
    }
    kernel.validate();
    return kernel;
}

int run_cli(int argc, char** argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Gaussian process variance estimation by profiling the noise-to-signal ratio"};
    app.require_subcommand(1);

    GenerateArgs gen;
    auto* generate = app.add_subcommand("generate", "synthetic dataset on [0,1]^2");
    generate->add_option("--n", gen.n, "number of points");
    generate->add_option("--sigma0", gen.sigma0, "noise standard deviation");
    generate->add_option("--seed", gen.seed, "generator seed");
    generate->add_option("--sampling", gen.sampling, "grid or random");
    generate->add_option("--out", gen.out, "output CSV")->required();

    EstimateCmdArgs est;
    auto* estimate = app.add_subcommand("estimate", "estimate sigma and sigma0");
    add_estimate_flags(estimate, est.common, true);
    estimate->add_option("--out", est.out, "report JSON");
    estimate->add_option("--optimize-kernel", est.optimize_kernel, "optimize (alpha, nu) of a matern kernel");
    estimate->add_option("--priors", est.priors, "uniform, inverse-square or none");
    estimate->add_option("--init", est.init, "initial alpha,nu");
    estimate->add_option("--opt-tol", est.opt_tol, "simplex tolerance");
    estimate->add_option("--max-evals", est.max_evals, "simplex evaluation budget");

    Table1Args t1;
    auto* table1 = app.add_subcommand("table1", "estimates across basis functions");
    add_estimate_flags(table1, t1.common, false);
    table1->add_option("--bases", t1.bases, "comma-separated basis specs");
    table1->add_option("--out", t1.out, "output CSV (stdout if omitted)");

    BenchmarkArgs bench;
    auto* benchmark = app.add_subcommand("benchmark", "timing sweep of profiled and direct estimation");
    benchmark->add_option("--sizes", bench.sizes, "comma-separated n");
    benchmark->add_option("--methods", bench.methods, "profiled,direct");
    benchmark->add_option("--basis", bench.basis, "poly:q or trig");
    benchmark->add_option("--kernel", bench.kernel, "kernel spec");
    benchmark->add_option("--taper", bench.taper, "taper threshold kappa");
    benchmark->add_option("--sigma0", bench.sigma0, "noise standard deviation");
    benchmark->add_option("--seed", bench.seed, "data seed");
    benchmark->add_option("--jobs", bench.jobs, "concurrent cells");
    benchmark->add_option("--timeout", bench.timeout, "per-cell limit in seconds");
    benchmark->add_option("--out", bench.out, "output CSV (stdout if omitted)");

    PlotArgs plot;
    auto* plotdata = app.add_subcommand("plotdata", "derivative, bounds and asymptotes over eta");
    add_estimate_flags(plotdata, plot.common, true);
    plotdata->add_option("--eta-min", plot.eta_min, "grid start");
    plotdata->add_option("--eta-max", plot.eta_max, "grid end");
    plotdata->add_option("--points", plot.points, "grid size");
    plotdata->add_option("--out", plot.out, "output CSV (stdout if omitted)");

    TraceInterpArgs ti;
    auto* trace_interp = app.add_subcommand("trace-interp", "fit or inspect a trace interpolant");
    trace_interp->add_option("--data", ti.data, "dataset CSV");
    trace_interp->add_option("--kernel", ti.kernel, "kernel spec");
    trace_interp->add_option("--taper", ti.taper, "taper threshold kappa");
    trace_interp->add_option("--nodes", ti.nodes, "interpolant nodes");
    trace_interp->add_option("--trace-method", ti.trace_method, "eigen, cholesky or hutchinson");
    trace_interp->add_option("--seed", ti.seed, "Hutchinson seed");
    trace_interp->add_option("--hutchinson-vectors", ti.hutchinson_vectors, "probe vectors");
    trace_interp->add_option("--load", ti.load, "interpolant JSON to inspect");
    trace_interp->add_option("--eta", ti.eta, "evaluation points");
    trace_interp->add_option("--out", ti.out, "interpolant JSON");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? 0 : 2;
    }

    try {
        if (*generate) return cmd_generate(gen, out);
        if (*estimate) return cmd_estimate(est, out);
        if (*table1) return cmd_table1(t1, out, err);
        if (*benchmark) return cmd_benchmark(bench, out, err);
        if (*plotdata) return cmd_plotdata(plot, out);
        if (*trace_interp) return cmd_trace_interp(ti, out);
    } catch (const InputError& e) {
        err << "input error: " << e.what() << "\n";
        return 2;
    } catch (const ModelError& e) {
        err << "model error: " << e.what() << "\n";
        return 2;
    } catch (const BracketError& e) {
        err << "numeric failure: " << e.what() << "\n";
        return 3;
    } catch (const NumericError& e) {
        err << "numeric failure: " << e.what() << "\n";
        return 3;
    } catch (const std::filesystem::filesystem_error& e) {
        err << "input error: " << e.what() << "\n";
        return 2;
    }
    return 1;
}

} // namespace etafit
