#include "rydecay/master_equation.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

#include <unsupported/Eigen/KroneckerProduct>

namespace rydecay {

DensityDiagnostics diagnose(const DensityMatrix& rho) {
    DensityDiagnostics d;
    d.trace_error = std::abs(rho.trace() - cplx{1.0});
    d.hermiticity_error = (rho - rho.adjoint()).cwiseAbs().maxCoeff();
    d.min_diagonal = rho.diagonal().real().minCoeff();
    return d;
}

void validate_density_matrix(const DensityMatrix& rho, double tol) {
    if (rho.rows() != rho.cols() || rho.rows() == 0) throw std::invalid_argument("density matrix must be square");
    const auto d = diagnose(rho);
    if (d.trace_error > tol || d.hermiticity_error > tol || d.min_diagonal < -tol) {
        std::ostringstream os;
        os << "invalid density matrix: trace error " << d.trace_error << ", hermiticity error "
           << d.hermiticity_error << ", min diagonal " << d.min_diagonal;
        throw std::invalid_argument(os.str());
    }
}

DensityMatrix basis_density(Eigen::Index dim, std::uint64_t state) {
    if (static_cast<Eigen::Index>(state) >= dim) throw std::out_of_range("basis state outside dimension");
    DensityMatrix rho = DensityMatrix::Zero(dim, dim);
    rho(static_cast<Eigen::Index>(state), static_cast<Eigen::Index>(state)) = 1.0;
    return rho;
}

DensityMatrix pure_density(const Eigen::VectorXcd& psi) { return psi * psi.adjoint(); }

DensityMatrix product_density(int n_sites, const Eigen::Matrix2cd& site_rho) {
    // Index 0 of the 2x2 block is |down>, index 1 is |up>, and site 0 is the
    // leftmost Kronecker factor, matching the most-significant-bit convention.
    DensityMatrix rho = site_rho;
    for (int k = 1; k < n_sites; ++k) rho = Eigen::kroneckerProduct(rho, site_rho).eval();
    return rho;
}

OpenSystem build_open_system(const LatticeSpec& lattice, const ModelParams& params, DecayModel model,
                             HamiltonianKind kind) {
    auto table = neighbor_table(lattice);
    auto h = kind == HamiltonianKind::driven ? driven_hamiltonian(lattice, table, params)
                                             : atomic_hamiltonian(lattice, table, params);
    auto jumps = jump_operators(lattice, table, params, model);
    return OpenSystem{lattice, std::move(table), params, model, std::move(h), std::move(jumps)};
}

Lindbladian::Lindbladian(const SparseOperator& hamiltonian, const std::vector<JumpOperator>& jumps)
    : dim_(hamiltonian.dim()) {
    SparseMatrix rate(dim_, dim_);
    for (const auto& j : jumps) {
        if (j.op.dim() != dim_) throw std::invalid_argument("jump operator dimension mismatch");
        const SparseMatrix& m = j.op.matrix();
        rate += SparseMatrix(m.adjoint() * m);

        MonomialChannel ch;
        std::vector<int> col_count(static_cast<std::size_t>(dim_), 0);
        bool monomial = true;
        for (Eigen::Index r = 0; r < m.outerSize() && monomial; ++r) {
            int row_count = 0;
            for (SparseMatrix::InnerIterator it(m, r); it; ++it) {
                if (it.value() == cplx{}) continue;
                if (++row_count > 1 || ++col_count[static_cast<std::size_t>(it.col())] > 1) {
                    monomial = false;
                    break;
                }
                ch.source.push_back(it.col());
                ch.target.push_back(it.row());
                ch.amplitude.push_back(it.value());
            }
        }
        if (monomial)
            monomial_.push_back(std::move(ch));
        else
            general_.push_back(m);
    }
    const SparseMatrix heff = hamiltonian.matrix() - cplx{0.0, 0.5} * rate;
    minus_i_heff_ = cplx{0.0, -1.0} * heff;
    minus_i_heff_.makeCompressed();
}

void Lindbladian::apply(const DensityMatrix& rho, DensityMatrix& out) const {
    if (rho.rows() != dim_ || rho.cols() != dim_) throw std::invalid_argument("density matrix dimension mismatch");
    out.resize(dim_, dim_);
    // -i H_eff rho + (-i H_eff rho)^dagger covers the commutator and the anticommutator.
    out.noalias() = minus_i_heff_ * rho;
    for (Eigen::Index c = 0; c < dim_; ++c) {
        for (Eigen::Index r = 0; r < c; ++r) {
            const cplx v = out(r, c) + std::conj(out(c, r));
            out(r, c) = v;
            out(c, r) = std::conj(v);
        }
        out(c, c) = 2.0 * out(c, c).real();
    }
    for (const auto& ch : monomial_) {
        const std::size_t n = ch.source.size();
        for (std::size_t b = 0; b < n; ++b) {
            const cplx ab = std::conj(ch.amplitude[b]);
            const Eigen::Index sb = ch.source[b], tb = ch.target[b];
            for (std::size_t a = 0; a < n; ++a)
                out(ch.target[a], tb) += ch.amplitude[a] * ab * rho(ch.source[a], sb);
        }
    }
    for (const auto& m : general_) out += m * rho * m.adjoint();
}

DensityMatrix Lindbladian::operator()(const DensityMatrix& rho) const {
    DensityMatrix out;
    apply(rho, out);
    return out;
}

DensityMatrix lindblad_rhs(const DensityMatrix& rho, const SparseOperator& hamiltonian,
                           const std::vector<JumpOperator>& jumps) {
    return Lindbladian(hamiltonian, jumps)(rho);
}

namespace {

class Rk4Stepper {
public:
    explicit Rk4Stepper(const Lindbladian& gen) : gen_(gen) {}

    void step(DensityMatrix& rho, double h) {
        gen_.apply(rho, k1_);
        tmp_ = rho + (0.5 * h) * k1_;
        gen_.apply(tmp_, k2_);
        tmp_ = rho + (0.5 * h) * k2_;
        gen_.apply(tmp_, k3_);
        tmp_ = rho + h * k3_;
        gen_.apply(tmp_, k4_);
        rho += (h / 6.0) * (k1_ + 2.0 * k2_ + 2.0 * k3_ + k4_);
    }

private:
    const Lindbladian& gen_;
    DensityMatrix k1_, k2_, k3_, k4_, tmp_;
};

void advance(Rk4Stepper& stepper, DensityMatrix& rho, double from, double to, double dt) {
    double t = from;
    while (to - t > 1e-14) {
        const double h = std::min(dt, to - t);
        stepper.step(rho, h);
        t += h;
    }
}

}  // namespace

IntegrationReport integrate_exact(const DensityMatrix& rho0, const Lindbladian& generator,
                                  const std::vector<double>& sample_times, const SampleObserver& observer,
                                  const IntegratorOptions& options) {
    if (!(options.dt > 0.0)) throw std::invalid_argument("integrator step dt must be positive");
    if (rho0.rows() != generator.dim()) throw std::invalid_argument("initial state dimension mismatch");
    validate_density_matrix(rho0);
    for (std::size_t i = 0; i < sample_times.size(); ++i) {
        if (sample_times[i] < 0.0) throw std::invalid_argument("sample times must be non-negative");
        if (i > 0 && sample_times[i] < sample_times[i - 1])
            throw std::invalid_argument("sample times must be sorted");
    }

    IntegrationReport report;
    report.dt_used = options.dt;
    Rk4Stepper stepper(generator);
    DensityMatrix accepted = rho0;
    double t_accepted = 0.0;
    DensityMatrix trial;

    for (double target : sample_times) {
        double dt = report.dt_used;
        for (;;) {
            trial = accepted;
            advance(stepper, trial, t_accepted, target, dt);
            const double span = std::max(target - t_accepted, 1e-300);
            const auto diag = diagnose(trial);
            // Drift is judged per unit time so that long gaps between samples are not penalised.
            const double drift = std::max(diag.trace_error, diag.hermiticity_error);
            if (drift <= options.drift_alarm * std::max(1.0, span) && std::isfinite(drift)) {
                report.max_trace_drift = std::max(report.max_trace_drift, diag.trace_error);
                break;
            }
            if (report.halvings >= options.max_halvings) {
                std::ostringstream os;
                os << "integration unstable near t=" << target << ": drift " << drift << " with dt=" << dt
                   << " after " << report.halvings << " halvings";
                throw std::runtime_error(os.str());
            }
            dt *= 0.5;
            ++report.halvings;
            report.dt_used = dt;
        }
        const cplx tr = trial.trace();
        if (std::abs(tr - cplx{1.0}) > options.renormalize_threshold) {
            trial /= tr.real();
            ++report.renormalizations;
        }
        accepted.swap(trial);
        t_accepted = target;
        observer(target, accepted);
    }
    return report;
}

std::vector<Snapshot> integrate_exact(const DensityMatrix& rho0, const Lindbladian& generator,
                                      const std::vector<double>& sample_times, const IntegratorOptions& options) {
    std::vector<Snapshot> out;
    out.reserve(sample_times.size());
    integrate_exact(rho0, generator, sample_times,
                    [&out](double t, const DensityMatrix& rho) { out.push_back({t, rho}); }, options);
    return out;
}

cplx trace_product(const DensityMatrix& rho, const SparseOperator& op) {
    if (rho.rows() != op.dim()) throw std::invalid_argument("dimension mismatch");
    // tr(op rho) = sum_{r,c} op(r,c) rho(c,r)
    cplx acc{};
    const auto& m = op.matrix();
    for (Eigen::Index r = 0; r < m.outerSize(); ++r)
        for (SparseMatrix::InnerIterator it(m, r); it; ++it) acc += it.value() * rho(it.col(), it.row());
    return acc;
}

double expectation(const DensityMatrix& rho, const SparseOperator& op) { return trace_product(rho, op).real(); }

double excitation_density(const DensityMatrix& rho, const LatticeSpec& lattice) {
    const Eigen::Index dim = rho.rows();
    if (dim != (Eigen::Index{1} << lattice.site_count())) throw std::invalid_argument("dimension mismatch");
    double acc = 0.0;
    for (Eigen::Index s = 0; s < dim; ++s) acc += excited_count(static_cast<std::uint64_t>(s)) * rho(s, s).real();
    return acc / lattice.site_count();
}

void ObservableSeries::validate() const {
    if (times.size() != values.size()) throw std::invalid_argument("series times/values length mismatch");
    if (times.empty()) throw std::invalid_argument("empty series");
    for (std::size_t i = 1; i < times.size(); ++i)
        if (!(times[i] > times[i - 1])) throw std::invalid_argument("series times must be strictly increasing");
}

double ObservableSeries::at(double t) const {
    constexpr double eps = 1e-12;
    if (t < times.front() - eps || t > times.back() + eps)
        throw std::out_of_range("time outside series range");
    auto it = std::lower_bound(times.begin(), times.end(), t - eps);
    const auto i = static_cast<std::size_t>(it - times.begin());
    if (std::abs(times[i] - t) <= eps || i == 0) return values[i];
    const double w = (t - times[i - 1]) / (times[i] - times[i - 1]);
    return (1.0 - w) * values[i - 1] + w * values[i];
}

std::vector<double> steady_state_window_times(double gamma) {
    if (!(gamma > 0.0)) throw std::invalid_argument("window needs gamma > 0");
    std::vector<double> t(kWindowSamples);
    for (int i = 0; i < kWindowSamples; ++i)
        t[i] = (kWindowStart + (kWindowEnd - kWindowStart) * i / (kWindowSamples - 1)) / gamma;
    return t;
}

double steady_state_window_average(const ObservableSeries& series, double gamma) {
    series.validate();
    const auto window = steady_state_window_times(gamma);
    constexpr double eps = 1e-12;
    if (series.times.front() > window.front() + eps || series.times.back() < window.back() - eps)
        throw std::invalid_argument("series does not cover the stationary window");
    double acc = 0.0;
    for (double t : window) acc += series.at(t);
    return acc / kWindowSamples;
}

double relative_difference(double n_c, double n_s) {
    if (std::abs(n_s) < 1e-12) throw std::domain_error("relative difference undefined for n_s ~ 0");
    return (n_c - n_s) / n_s;
}

double exact_steady_state_density(const OpenSystem& system, const IntegratorOptions& options) {
    if (system.site_count() > kMaxExactSites)
        throw std::invalid_argument("exact integration supports at most " + std::to_string(kMaxExactSites) +
                                    " sites; use the trajectory ensemble instead");
    const Lindbladian gen(system);
    ObservableSeries series;
    series.label = "n";
    integrate_exact(basis_density(system.dim(), 0), gen, steady_state_window_times(system.params.gamma),
                    [&](double t, const DensityMatrix& rho) {
                        series.times.push_back(t);
                        series.values.push_back(excitation_density(rho, system.lattice));
                    },
                    options);
    return steady_state_window_average(series, system.params.gamma);
}

}  // namespace rydecay
