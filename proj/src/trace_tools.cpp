#include "etafit/trace_tools.hpp"
#include "etafit/errors.hpp"
#include "etafit/random.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/LU>

#include <algorithm>
#include <cmath>

namespace etafit {

namespace {

void check_eta(double eta) {
    if (!(eta >= 0.0) || !std::isfinite(eta)) {
        throw InputError("eta must be finite and non-negative");
    }
}

} // namespace

std::string to_string(TraceMethod method) {
    switch (method) {
    case TraceMethod::Eigen: return "eigen";
    case TraceMethod::Cholesky: return "cholesky";
    case TraceMethod::Hutchinson: return "hutchinson";
    }
    return "unknown";
}

TraceMethod parse_trace_method(const std::string& text) {
    if (text == "eigen") return TraceMethod::Eigen;
    if (text == "cholesky") return TraceMethod::Cholesky;
    if (text == "hutchinson") return TraceMethod::Hutchinson;
    throw InputError("unknown trace method '" + text + "' (expected eigen, cholesky or hutchinson)");
}

TraceMethod default_trace_method(const CorrelationMatrix& K) {
    if (K.is_sparse()) {
        return TraceMethod::Hutchinson;
    }
    if (K.size() <= 1024) {
        return TraceMethod::Eigen;
    }
    return K.size() <= 8192 ? TraceMethod::Cholesky : TraceMethod::Hutchinson;
}

TraceOptions default_trace_options(const CorrelationMatrix& K) {
    TraceOptions options;
    options.method = default_trace_method(K);
    return options;
}

Eigen::VectorXd correlation_eigenvalues(const CorrelationMatrix& K) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(K.to_dense(), Eigen::EigenvaluesOnly);
    if (eig.info() != Eigen::Success) {
        throw NumericError("symmetric eigensolver failed on the correlation matrix");
    }
    return eig.eigenvalues();
}

double trace_inv_eigen(const Eigen::VectorXd& eigenvalues, double eta) {
    check_eta(eta);
    if (eigenvalues.size() == 0) {
        throw InputError("no eigenvalues supplied");
    }
    const double floor = static_cast<double>(eigenvalues.size()) * std::numeric_limits<double>::epsilon() *
                         std::abs(eigenvalues.maxCoeff());
    double total = 0.0;
    for (Eigen::Index i = 0; i < eigenvalues.size(); ++i) {
        total += 1.0 / (std::max(eigenvalues(i), floor) + eta);
    }
    return total;
}

double trace_inv_eigen(const CorrelationMatrix& K, double eta) {
    return trace_inv_eigen(correlation_eigenvalues(K), eta);
}

double trace_inv_cholesky(Solver& solver, double eta) {
    check_eta(eta);
    return solver.trace_inverse_cholesky(eta);
}

double trace_inv_cholesky(const CorrelationMatrixPtr& K, double eta) {
    SolverOptions options;
    options.method = K->is_sparse() ? SolverMethod::SparseCholesky : SolverMethod::DenseCholesky;
    Solver solver(K, options);
    return trace_inv_cholesky(solver, eta);
}

HutchinsonEstimate hutchinson_trace(const std::function<Eigen::MatrixXd(const Eigen::MatrixXd&)>& op,
                                    Eigen::Index n, int n_vectors, std::uint64_t seed) {
    if (n_vectors < 2) {
        throw InputError("Hutchinson estimation needs at least 2 probe vectors");
    }
    Eigen::MatrixXd V(n, n_vectors);
    for (int k = 0; k < n_vectors; ++k) {
        const CounterRng rng(seed, static_cast<std::uint64_t>(k) + 1);
        for (Eigen::Index i = 0; i < n; ++i) {
            V(i, k) = rng.rademacher(static_cast<std::uint64_t>(i));
        }
    }
    const Eigen::MatrixXd AV = op(V);
    Eigen::VectorXd samples(n_vectors);
    for (int k = 0; k < n_vectors; ++k) {
        samples(k) = V.col(k).dot(AV.col(k));
    }
    HutchinsonEstimate result;
    result.n_vectors = n_vectors;
    result.estimate = samples.mean();
    const double var = (samples.array() - result.estimate).square().sum() / (n_vectors - 1);
    result.stderr_ = std::sqrt(var / n_vectors);
    return result;
}

HutchinsonEstimate trace_inv_hutchinson(const CorrelationMatrix& K, double eta, Solver& solver, int n_vectors,
                                        std::uint64_t seed) {
    check_eta(eta);
    if (&solver.matrix() != &K) {
        throw InputError("solver was built for a different correlation matrix");
    }
    return hutchinson_trace([&](const Eigen::MatrixXd& V) { return solver.solve(eta, V); }, K.size(), n_vectors,
                            seed);
}

double TraceInterpolant::trace(double eta) const {
    return static_cast<double>(n) * eval_tau(*this, eta);
}

TraceInterpolant fit_tau_interpolant(const CorrelationMatrixPtr& K, std::vector<double> nodes,
                                     const TraceOptions& options, const Eigen::VectorXd* eigenvalues,
                                     Solver* solver) {
    if (static_cast<int>(nodes.size()) > kMaxInterpolantNodes) {
        throw InputError("at most " + std::to_string(kMaxInterpolantNodes) + " interpolant nodes are supported");
    }
    for (double node : nodes) {
        if (!(node > 0.0) || !std::isfinite(node)) {
            throw InputError("interpolant nodes must be positive and finite");
        }
    }
    std::sort(nodes.begin(), nodes.end());
    if (std::adjacent_find(nodes.begin(), nodes.end()) != nodes.end()) {
        throw InputError("interpolant nodes must be distinct");
    }

    TraceInterpolant interp;
    interp.nodes = nodes;
    interp.n = K->size();
    interp.method = options.method;
    if (options.method == TraceMethod::Hutchinson) {
        interp.seed = options.seed;
        interp.hutchinson_vectors = options.hutchinson_vectors;
    }
    const double n = static_cast<double>(interp.n);

    std::function<double(double)> trace;
    Eigen::VectorXd owned_eigenvalues;
    std::unique_ptr<Solver> owned_solver;
    auto need_solver = [&](SolverMethod method) -> Solver& {
        if (solver && solver->options().method == method) {
            return *solver;
        }
        SolverOptions so;
        so.method = method;
        owned_solver = std::make_unique<Solver>(K, so);
        return *owned_solver;
    };
    switch (options.method) {
    case TraceMethod::Eigen: {
        if (!eigenvalues) {
            owned_eigenvalues = correlation_eigenvalues(*K);
            eigenvalues = &owned_eigenvalues;
        }
        const Eigen::VectorXd* ev = eigenvalues;
        trace = [ev](double eta) { return trace_inv_eigen(*ev, eta); };
        break;
    }
    case TraceMethod::Cholesky: {
        Solver& s = need_solver(K->is_sparse() ? SolverMethod::SparseCholesky : SolverMethod::DenseCholesky);
        trace = [&s](double eta) { return s.trace_inverse_cholesky(eta); };
        break;
    }
    case TraceMethod::Hutchinson: {
        Solver& s = solver ? *solver : need_solver(default_solver_options(*K).method);
        trace = [&s, &K, options](double eta) {
            return trace_inv_hutchinson(*K, eta, s, options.hutchinson_vectors, options.seed).estimate;
        };
        break;
    }
    }

    interp.tau0 = trace(0.0) / n;
    for (double node : nodes) {
        interp.tau_values.push_back(trace(node) / n);
    }

    const int p = static_cast<int>(nodes.size());
    interp.weights.assign(static_cast<std::size_t>(p) + 1, 0.0);
    interp.weights[0] = 1.0;
    if (p > 0) {
        Eigen::MatrixXd A(p, p);
        Eigen::VectorXd rhs(p);
        for (int i = 0; i < p; ++i) {
            const double eta = nodes[static_cast<std::size_t>(i)];
            for (int j = 0; j < p; ++j) {
                A(i, j) = std::pow(eta, 1.0 / (j + 2.0));
            }
            rhs(i) = 1.0 / interp.tau_values[static_cast<std::size_t>(i)] - 1.0 / interp.tau0 - eta;
        }
        Eigen::PartialPivLU<Eigen::MatrixXd> lu(A);
        const Eigen::VectorXd w = lu.solve(rhs);
        if (!w.allFinite()) {
            throw NumericError("interpolant weight system is singular");
        }
        interp.condition_number = 1.0 / lu.rcond();
        for (int j = 0; j < p; ++j) {
            interp.weights[static_cast<std::size_t>(j) + 1] = w(j);
        }
    }
    return interp;
}

double eval_tau(const TraceInterpolant& interp, double eta) {
    check_eta(eta);
    double inv = 1.0 / interp.tau0;
    for (std::size_t i = 0; i < interp.weights.size(); ++i) {
        inv += interp.weights[i] * std::pow(eta, 1.0 / (static_cast<double>(i) + 1.0));
    }
    return 1.0 / inv;
}

TraceProvider eigen_trace_provider(Eigen::VectorXd eigenvalues) {
    return [ev = std::move(eigenvalues)](double eta) { return trace_inv_eigen(ev, eta); };
}

TraceProvider cholesky_trace_provider(Solver& solver) {
    return [&solver](double eta) { return trace_inv_cholesky(solver, eta); };
}

TraceProvider hutchinson_trace_provider(Solver& solver, int n_vectors, std::uint64_t seed) {
    return [&solver, n_vectors, seed](double eta) {
        return trace_inv_hutchinson(solver.matrix(), eta, solver, n_vectors, seed).estimate;
    };
}

TraceProvider interpolant_trace_provider(TraceInterpolant interp) {
    return [ip = std::move(interp)](double eta) { return ip.trace(eta); };
}

} // namespace etafit
