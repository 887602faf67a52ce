#include "etafit/report_json.hpp"
#include "etafit/errors.hpp"

#include <cmath>
#include <limits>

namespace etafit {

using nlohmann::json;

json json_number(double value) {
    if (std::isnan(value)) return "nan";
    if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
    return value;
}

double number_from_json(const json& value) {
    if (value.is_number()) return value.get<double>();
    if (value.is_string()) {
        const auto s = value.get<std::string>();
        if (s == "inf") return std::numeric_limits<double>::infinity();
        if (s == "-inf") return -std::numeric_limits<double>::infinity();
        if (s == "nan") return std::numeric_limits<double>::quiet_NaN();
    }
    throw InputError("expected a number, found " + value.dump());
}

namespace {

json optional_number(const std::optional<double>& value) {
    return value ? json_number(*value) : json();
}

json numbers(const std::vector<double>& values) {
    json out = json::array();
    for (double v : values) out.push_back(json_number(v));
    return out;
}

std::vector<double> numbers_from(const json& arr) {
    if (!arr.is_array()) throw InputError("expected an array, found " + arr.dump());
    std::vector<double> out;
    for (const auto& v : arr) out.push_back(number_from_json(v));
    return out;
}

} // namespace

json to_json(const TraceInterpolant& interp) {
    return {
        {"nodes", numbers(interp.nodes)},
        {"tau0", json_number(interp.tau0)},
        {"tau_values", numbers(interp.tau_values)},
        {"weights", numbers(interp.weights)},
        {"n", interp.n},
        {"method", to_string(interp.method)},
        {"seed", interp.seed},
        {"hutchinson_vectors", interp.hutchinson_vectors},
        {"condition_number", json_number(interp.condition_number)},
    };
}

TraceInterpolant interpolant_from_json(const json& doc) {
    TraceInterpolant interp;
    try {
        interp.nodes = numbers_from(doc.at("nodes"));
        interp.tau0 = number_from_json(doc.at("tau0"));
        interp.tau_values = numbers_from(doc.at("tau_values"));
        interp.weights = numbers_from(doc.at("weights"));
        interp.n = doc.at("n").get<Eigen::Index>();
        interp.method = parse_trace_method(doc.at("method").get<std::string>());
        interp.seed = doc.value("seed", std::uint64_t{0});
        interp.hutchinson_vectors = doc.value("hutchinson_vectors", 0);
        interp.condition_number = doc.contains("condition_number") ? number_from_json(doc["condition_number"]) : 1.0;
    } catch (const json::exception& e) {
        throw InputError(std::string("malformed interpolant: ") + e.what());
    }
    if (interp.n < 1 || !(interp.tau0 > 0.0) || interp.tau_values.size() != interp.nodes.size() ||
        interp.weights.size() != interp.nodes.size() + 1 || interp.order() > kMaxInterpolantNodes) {
        throw InputError("inconsistent interpolant document");
    }
    return interp;
}

json to_json(const SpectrumSummary& spec) {
    return {
        {"lambda_min", json_number(spec.lambda_min)},
        {"lambda_max", json_number(spec.lambda_max)},
        {"method", spec.method},
        {"iterations", spec.iterations},
        {"numerically_singular", spec.numerically_singular},
    };
}

json to_json(const EstimationDiagnostics& diag) {
    json out;
    out["spectrum"] = to_json(diag.spectrum);
    if (diag.asymptote) {
        const auto& a = *diag.asymptote;
        out["asymptote"] = {{"a0", json_number(a.a0)},           {"a1", json_number(a.a1)},
                            {"a2", json_number(a.a2)},           {"a3", json_number(a.a3)},
                            {"trace_N", json_number(a.trace_N)}, {"trace_N2", json_number(a.trace_N2)},
                            {"large_n_approx", a.large_n_approx}};
    } else {
        out["asymptote"] = nullptr;
    }
    out["asymptote_roots_1"] = numbers(diag.asymptote_roots_1);
    out["asymptote_roots_2"] = numbers(diag.asymptote_roots_2);
    out["eta_lo"] = json_number(diag.eta_lo);
    out["eta_hi"] = json_number(diag.eta_hi);
    json probes = json::array();
    for (const auto& p : diag.probes) {
        probes.push_back({{"eta", json_number(p.eta)}, {"d_ell", json_number(p.d_ell)}, {"bound", json_number(p.bound)}});
    }
    out["probes"] = probes;
    json brackets = json::array();
    for (const auto& b : diag.brackets) {
        brackets.push_back({{"lo", json_number(b.lo)},
                            {"hi", json_number(b.hi)},
                            {"root", json_number(b.root)},
                            {"iterations", b.iterations},
                            {"converged", b.converged},
                            {"error", b.error}});
    }
    out["brackets"] = brackets;
    json candidates = json::array();
    for (const auto& c : diag.candidates) {
        candidates.push_back({{"kind", c.kind},
                              {"eta", json_number(c.eta)},
                              {"ell", json_number(c.ell)},
                              {"d_ell", optional_number(c.d_ell)},
                              {"d2_ell", optional_number(c.d2_ell)},
                              {"admissible", c.admissible}});
    }
    out["candidates"] = candidates;
    out["trace_source"] = diag.trace_source;
    out["interpolant"] = diag.interpolant ? to_json(*diag.interpolant) : json();
    out["jitter"] = json_number(diag.jitter);
    out["failed_evaluations"] = diag.failed_evaluations;
    out["warnings"] = diag.warnings;
    return out;
}

json to_json(const EstimationReport& report) {
    const auto& h = report.hyperparams;
    json out;
    out["sigma"] = json_number(h.sigma());
    out["sigma0"] = json_number(h.sigma0());
    out["sigma2"] = json_number(h.sigma2);
    out["sigma02"] = json_number(h.sigma02);
    out["eta"] = json_number(h.eta);
    out["log10_eta"] = json_number(std::log10(h.eta));
    out["alpha"] = optional_number(report.alpha_hat);
    out["nu"] = optional_number(report.nu_hat);
    out["ell_max"] = json_number(report.ell_max);
    out["log_posterior"] = optional_number(report.log_posterior);
    out["n_ell_evals"] = report.n_ell_evals;
    out["n_root_iters"] = report.n_root_iters;
    out["n_objective_evals"] = report.n_objective_evals;
    out["converged"] = report.converged;
    out["method"] = to_string(report.method);
    out["outcome"] = to_string(report.outcome);
    out["diagnostics"] = to_json(report.diagnostics);
    out["timings"] = {{"precompute", report.timings.precompute},
                      {"root_find", report.timings.root_find},
                      {"total", report.timings.total}};
    return out;
}

} // namespace etafit
