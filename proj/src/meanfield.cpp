#include "rydecay/meanfield.hpp"

#include <algorithm>
#include <cmath>
#include <queue>
#include <sstream>
#include <stdexcept>

#include "rydecay/master_equation.hpp"
#include "rydecay/parallel.hpp"

namespace rydecay {

const char* to_string(SignConvention c) {
    return c == SignConvention::as_printed ? "as_printed" : "oracle_verified";
}

SignConvention sign_convention_from_string(const std::string& s) {
    if (s == "as_printed") return SignConvention::as_printed;
    if (s == "oracle_verified") return SignConvention::oracle_verified;
    throw std::invalid_argument("unknown sign convention '" + s + "' (expected as_printed|oracle_verified)");
}

bool MeanFieldState::in_bounds(double slack) const {
    return n >= -slack && n <= 1.0 + slack && std::abs(s_x) <= 1.0 + slack && std::abs(s_y) <= 1.0 + slack;
}

namespace {

struct Coefficients {
    double g0, g1;       // G(n) = g0 + g1 n
    double a;            // 2 d V
    double delta_sy;     // coefficient of Delta in the s_y equation
};

Coefficients coefficients(const MeanFieldParams& p) {
    Coefficients c;
    c.g0 = 0.5 * p.gamma;
    c.g1 = p.model == DecayModel::collective ? 2.0 * p.d * p.gamma : 0.0;
    c.a = 2.0 * p.d * p.V;
    c.delta_sy = p.sign == SignConvention::oracle_verified ? p.Delta : -p.Delta;
    return c;
}

}  // namespace

MeanFieldState mf_rhs(const MeanFieldState& s, const MeanFieldParams& p) {
    const auto c = coefficients(p);
    const double g = c.g0 + c.g1 * s.n;
    return {p.Omega * s.s_y - p.gamma * s.n,
            -p.Delta * s.s_y - g * s.s_x - c.a * s.n * s.s_y,
            c.delta_sy * s.s_x - g * s.s_y + c.a * s.n * s.s_x - p.Omega * (4.0 * s.n - 2.0)};
}

Eigen::Matrix3d mf_jacobian(const MeanFieldState& s, const MeanFieldParams& p) {
    const auto c = coefficients(p);
    const double g = c.g0 + c.g1 * s.n;
    Eigen::Matrix3d j;
    j << -p.gamma, 0.0, p.Omega,
        -c.g1 * s.s_x - c.a * s.s_y, -g, -p.Delta - c.a * s.n,
        -c.g1 * s.s_y + c.a * s.s_x - 4.0 * p.Omega, c.delta_sy + c.a * s.n, -g;
    return j;
}

double OracleCheck::max_deviation() const { return *std::max_element(deviation.begin(), deviation.end()); }

OracleCheck mf_oracle_check(int n_sites, const MeanFieldParams& params, const MeanFieldState& state) {
    if (params.d != 1) throw std::invalid_argument("the product-state oracle runs on a chain (d = 1)");
    const double z = 2.0 * state.n - 1.0;
    if (state.s_x * state.s_x + state.s_y * state.s_y + z * z > 1.0 + 1e-12)
        throw std::invalid_argument("product state outside the Bloch ball");

    const auto lattice = periodic_chain(n_sites);
    ModelParams mp;
    mp.V = params.V;
    mp.gamma = params.gamma;
    mp.Omega = params.Omega;
    mp.Delta = params.Delta;
    const auto system = build_open_system(lattice, mp, params.model, HamiltonianKind::driven);

    // (|down>, |up>) ordering: rho_{down,up} = (s_x + i s_y)/2.
    Eigen::Matrix2cd site;
    site << 1.0 - state.n, cplx{state.s_x, state.s_y} / 2.0, cplx{state.s_x, -state.s_y} / 2.0, state.n;
    const DensityMatrix rho = product_density(n_sites, site);
    const DensityMatrix drho = Lindbladian(system)(rho);

    SparseOperator n_avg = SparseOperator::zero(system.dim()), x_avg = n_avg, y_avg = n_avg;
    for (int k = 0; k < n_sites; ++k) {
        n_avg = n_avg + site_operator(lattice, k, SiteOp::number);
        x_avg = x_avg + site_operator(lattice, k, SiteOp::sigma_x);
        y_avg = y_avg + site_operator(lattice, k, SiteOp::sigma_y);
    }
    OracleCheck check;
    check.exact = {expectation(drho, n_avg) / n_sites, expectation(drho, x_avg) / n_sites,
                   expectation(drho, y_avg) / n_sites};
    const auto mf = mf_rhs(state, params);
    check.mean_field = {mf.n, mf.s_x, mf.s_y};
    for (int i = 0; i < 3; ++i) check.deviation[i] = std::abs(check.exact[i] - check.mean_field[i]);
    return check;
}

std::optional<SignConvention> determine_sign_convention(int n_sites, MeanFieldParams params,
                                                        const std::vector<MeanFieldState>& states, double tol) {
    for (auto conv : {SignConvention::oracle_verified, SignConvention::as_printed}) {
        params.sign = conv;
        bool ok = true;
        for (const auto& s : states) ok = ok && mf_oracle_check(n_sites, params, s).max_deviation() < tol;
        if (ok) return conv;
    }
    return std::nullopt;
}

std::array<double, 4> fixed_point_cubic(const MeanFieldParams& p) {
    const auto c = coefficients(p);
    const double sigma = p.sign == SignConvention::oracle_verified ? 1.0 : -1.0;
    const double om2 = p.Omega * p.Omega;
    return {-2.0 * om2 * c.g0,
            p.gamma * (sigma * p.Delta * p.Delta + c.g0 * c.g0) - om2 * (2.0 * c.g1 - 4.0 * c.g0),
            p.gamma * ((1.0 + sigma) * c.a * p.Delta + 2.0 * c.g0 * c.g1) + 4.0 * om2 * c.g1,
            p.gamma * (c.a * c.a + c.g1 * c.g1)};
}

namespace {

std::vector<double> real_roots(std::array<double, 4> coeff) {
    int degree = 3;
    const double scale = std::max({std::abs(coeff[0]), std::abs(coeff[1]), std::abs(coeff[2]), std::abs(coeff[3])});
    if (scale == 0.0) return {};
    while (degree > 0 && std::abs(coeff[static_cast<std::size_t>(degree)]) <= 1e-14 * scale) --degree;
    if (degree == 0) return {};
    Eigen::MatrixXd companion = Eigen::MatrixXd::Zero(degree, degree);
    for (int i = 0; i < degree; ++i) companion(0, i) = -coeff[static_cast<std::size_t>(degree - 1 - i)] / coeff[static_cast<std::size_t>(degree)];
    for (int i = 1; i < degree; ++i) companion(i, i - 1) = 1.0;
    Eigen::EigenSolver<Eigen::MatrixXd> es(companion, false);
    std::vector<double> out;
    for (int i = 0; i < degree; ++i) {
        const auto ev = es.eigenvalues()[i];
        if (std::abs(ev.imag()) <= 1e-7 * std::max(1.0, std::abs(ev.real()))) out.push_back(ev.real());
    }
    return out;
}

bool newton(Eigen::Vector3d& x, const MeanFieldParams& p, const FixedPointOptions& opt, double& residual) {
    for (int it = 0; it < opt.max_iterations; ++it) {
        const auto s = MeanFieldState::from(x);
        const Eigen::Vector3d f = mf_rhs(s, p).vec();
        residual = f.cwiseAbs().maxCoeff();
        if (residual < opt.residual_tol) return true;
        const Eigen::Matrix3d j = mf_jacobian(s, p);
        const double det = j.determinant();
        if (!std::isfinite(det) || std::abs(det) < 1e-300) return false;
        x -= j.inverse() * f;
        if (!x.allFinite() || x.cwiseAbs().maxCoeff() > 1e3) return false;
    }
    residual = mf_rhs(MeanFieldState::from(x), p).vec().cwiseAbs().maxCoeff();
    return residual < opt.residual_tol;
}

FixedPoint classify(const Eigen::Vector3d& x, const MeanFieldParams& p, double residual) {
    FixedPoint fp;
    fp.state = MeanFieldState::from(x);
    fp.residual = residual;
    Eigen::EigenSolver<Eigen::Matrix3d> es(mf_jacobian(fp.state, p), false);
    fp.stable = true;
    for (int i = 0; i < 3; ++i) {
        fp.eigen_real_parts[static_cast<std::size_t>(i)] = es.eigenvalues()[i].real();
        fp.stable = fp.stable && es.eigenvalues()[i].real() < -1e-9;
    }
    return fp;
}

}  // namespace

std::vector<FixedPoint> find_fixed_points(const MeanFieldParams& params, const FixedPointOptions& options) {
    std::vector<Eigen::Vector3d> seeds;
    if (options.polynomial_seeds) {
        const auto c = coefficients(params);
        if (params.Omega == 0.0) {
            seeds.emplace_back(0.0, 0.0, 0.0);
        } else {
            for (double n : real_roots(fixed_point_cubic(params))) {
                if (n < -1e-6 || n > 1.0 + 1e-6) continue;
                const double sy = params.gamma * n / params.Omega;
                const double sx = -(params.Delta + c.a * n) * sy / (c.g0 + c.g1 * n);
                seeds.emplace_back(n, sx, sy);
            }
        }
    }
    const int g = options.seed_grid;
    for (int i = 0; i < g; ++i)
        for (int j = 0; j < g; ++j)
            for (int k = 0; k < g; ++k) {
                const auto frac = [g](int v) { return g == 1 ? 0.5 : static_cast<double>(v) / (g - 1); };
                seeds.emplace_back(frac(i), -1.0 + 2.0 * frac(j), -1.0 + 2.0 * frac(k));
            }

    std::vector<FixedPoint> found;
    for (auto x : seeds) {
        double residual = 0.0;
        if (!newton(x, params, options, residual)) continue;
        const auto state = MeanFieldState::from(x);
        if (!state.in_bounds()) continue;
        const bool duplicate = std::any_of(found.begin(), found.end(), [&](const FixedPoint& f) {
            return (f.state.vec() - x).cwiseAbs().maxCoeff() < options.dedup_tol;
        });
        if (!duplicate) found.push_back(classify(x, params, residual));
    }
    std::sort(found.begin(), found.end(), [](const FixedPoint& a, const FixedPoint& b) { return a.state.n < b.state.n; });
    return found;
}

std::vector<double> PhaseDiagramCell::stable_densities() const {
    std::vector<double> out;
    for (const auto& fp : fixed_points)
        if (fp.stable) out.push_back(fp.state.n);
    std::sort(out.begin(), out.end());
    return out;
}

std::vector<PhaseDiagramCell> scan_phase_diagram(const std::vector<double>& delta_grid,
                                                 const std::vector<double>& omega_grid, const MeanFieldParams& base,
                                                 const FixedPointOptions& options, int threads) {
    if (delta_grid.empty() || omega_grid.empty()) throw std::invalid_argument("phase diagram grids must be non-empty");
    const std::size_t nd = delta_grid.size();
    std::vector<PhaseDiagramCell> cells(nd * omega_grid.size());
    parallel_for(static_cast<int>(cells.size()), threads, [&](int idx) {
        auto& cell = cells[static_cast<std::size_t>(idx)];
        cell.Delta = delta_grid[static_cast<std::size_t>(idx) % nd];
        cell.Omega = omega_grid[static_cast<std::size_t>(idx) / nd];
        try {
            MeanFieldParams p = base;
            p.Delta = cell.Delta;
            p.Omega = cell.Omega;
            cell.fixed_points = find_fixed_points(p, options);
            cell.stable_count = static_cast<int>(
                std::count_if(cell.fixed_points.begin(), cell.fixed_points.end(), [](const FixedPoint& f) { return f.stable; }));
            if (cell.fixed_points.empty()) cell.error = "no converged fixed point";
            else if (cell.stable_count < 1 || cell.stable_count > 2)
                cell.error = "unexpected stable count " + std::to_string(cell.stable_count);
        } catch (const std::exception& e) {
            cell.error = e.what();
        }
    });
    return cells;
}

namespace {

std::vector<std::vector<std::size_t>> components(const std::vector<PhaseDiagramCell>& cells, std::size_t nd,
                                                 std::size_t no) {
    if (cells.size() != nd * no) throw std::invalid_argument("cell count does not match grid shape");
    std::vector<int> label(cells.size(), -1);
    std::vector<std::vector<std::size_t>> out;
    for (std::size_t start = 0; start < cells.size(); ++start) {
        if (cells[start].stable_count != 2 || label[start] >= 0) continue;
        out.emplace_back();
        std::queue<std::size_t> q;
        q.push(start);
        label[start] = static_cast<int>(out.size() - 1);
        while (!q.empty()) {
            const std::size_t cur = q.front();
            q.pop();
            out.back().push_back(cur);
            const auto row = static_cast<long>(cur / nd), col = static_cast<long>(cur % nd);
            for (long dr = -1; dr <= 1; ++dr)
                for (long dc = -1; dc <= 1; ++dc) {
                    const long r = row + dr, c = col + dc;
                    if (r < 0 || c < 0 || r >= static_cast<long>(no) || c >= static_cast<long>(nd)) continue;
                    const auto nb = static_cast<std::size_t>(r) * nd + static_cast<std::size_t>(c);
                    if (cells[nb].stable_count == 2 && label[nb] < 0) {
                        label[nb] = label[start];
                        q.push(nb);
                    }
                }
        }
    }
    return out;
}

}  // namespace

int bistable_components(const std::vector<PhaseDiagramCell>& cells, std::size_t n_delta, std::size_t n_omega) {
    return static_cast<int>(components(cells, n_delta, n_omega).size());
}

std::vector<CriticalPoint> locate_critical_points(const std::vector<PhaseDiagramCell>& cells, std::size_t n_delta,
                                                  std::size_t n_omega, const MeanFieldParams& base) {
    // Residual of the triple-root conditions p = p' = p'' = 0 at (n, Delta, Omega).
    auto triple = [&](const Eigen::Vector3d& x) {
        MeanFieldParams p = base;
        p.Delta = x[1];
        p.Omega = x[2];
        const auto c = fixed_point_cubic(p);
        const double n = x[0];
        return Eigen::Vector3d(c[0] + n * (c[1] + n * (c[2] + n * c[3])), c[1] + n * (2.0 * c[2] + 3.0 * n * c[3]),
                               2.0 * c[2] + 6.0 * n * c[3]);
    };

    std::vector<CriticalPoint> out;
    for (const auto& comp : components(cells, n_delta, n_omega)) {
        auto [lo, hi] = std::minmax_element(comp.begin(), comp.end(),
                                            [&](std::size_t a, std::size_t b) { return cells[a].Omega < cells[b].Omega; });
        for (std::size_t idx : {*lo, *hi}) {
            const auto& cell = cells[idx];
            // The middle fixed point of a bistable cell sits between the two folds.
            double n_seed = 0.0;
            for (const auto& fp : cell.fixed_points)
                if (!fp.stable) n_seed = fp.state.n;
            Eigen::Vector3d x(n_seed, cell.Delta, cell.Omega);
            CriticalPoint cp;
            for (int it = 0; it < 100; ++it) {
                const Eigen::Vector3d f = triple(x);
                Eigen::Matrix3d jac;
                for (int k = 0; k < 3; ++k) {
                    const double h = 1e-6 * std::max(1.0, std::abs(x[k]));
                    Eigen::Vector3d xp = x, xm = x;
                    xp[k] += h;
                    xm[k] -= h;
                    jac.col(k) = (triple(xp) - triple(xm)) / (2.0 * h);
                }
                const Eigen::Vector3d step = jac.fullPivLu().solve(f);
                if (!step.allFinite()) break;
                x -= step;
                if (step.cwiseAbs().maxCoeff() < 1e-12 * std::max(1.0, x.cwiseAbs().maxCoeff())) {
                    cp.converged = true;
                    break;
                }
            }
            if (!cp.converged || x[0] < 0.0 || x[0] > 1.0 || x[2] <= 0.0) continue;
            cp.n = x[0];
            cp.Delta = x[1];
            cp.Omega = x[2];
            const bool duplicate = std::any_of(out.begin(), out.end(), [&](const CriticalPoint& o) {
                return std::abs(o.Delta - cp.Delta) < 1e-3 && std::abs(o.Omega - cp.Omega) < 1e-3;
            });
            if (!duplicate) out.push_back(cp);
        }
    }
    return out;
}

MeanFieldTrajectory integrate_mf(const MeanFieldState& state0, const MeanFieldParams& params, double t_final,
                                 double dt, int record_every) {
    if (!(dt > 0.0)) throw std::invalid_argument("mean-field step dt must be positive");
    if (record_every < 1) throw std::invalid_argument("record_every must be >= 1");
    MeanFieldTrajectory out;
    Eigen::Vector3d x = state0.vec();
    double t = 0.0;
    out.times.push_back(t);
    out.states.push_back(state0);
    auto f = [&](const Eigen::Vector3d& v) { return mf_rhs(MeanFieldState::from(v), params).vec(); };
    long step = 0;
    while (t_final - t > 1e-14) {
        const double h = std::min(dt, t_final - t);
        const Eigen::Vector3d k1 = f(x);
        const Eigen::Vector3d k2 = f(x + 0.5 * h * k1);
        const Eigen::Vector3d k3 = f(x + 0.5 * h * k2);
        const Eigen::Vector3d k4 = f(x + h * k3);
        x += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        t += h;
        ++step;
        if (!x.allFinite() || x.cwiseAbs().maxCoeff() > 10.0) {
            std::ostringstream os;
            os << "mean-field integration diverged at t=" << t << ": (" << x[0] << ", " << x[1] << ", " << x[2] << ")";
            throw std::runtime_error(os.str());
        }
        if (step % record_every == 0 || t_final - t <= 1e-14) {
            out.times.push_back(t);
            out.states.push_back(MeanFieldState::from(x));
        }
    }
    return out;
}

std::vector<double> linspace(double lo, double hi, int count) {
    if (count < 1) throw std::invalid_argument("linspace needs count >= 1");
    if (count == 1) return {lo};
    std::vector<double> v(static_cast<std::size_t>(count));
    for (int i = 0; i < count; ++i) v[static_cast<std::size_t>(i)] = lo + (hi - lo) * i / (count - 1);
    return v;
}

}  // namespace rydecay
