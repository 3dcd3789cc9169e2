#pragma once

#include <cmath>
#include <complex>
#include <random>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <lapacke.h>

#include "mkdvlab/errors.hpp"
#include "mkdvlab/grid.hpp"
#include "mkdvlab/hierarchy.hpp"
#include "mkdvlab/parallel.hpp"
#include "mkdvlab/solitons.hpp"
#include "mkdvlab/spectral.hpp"

namespace mkdv {

using MatrixLd = Eigen::Matrix<long double, Eigen::Dynamic, Eigen::Dynamic>;

/// Dense real matrix acting on sample vectors of one grid.
struct OperatorMatrix {
    Grid grid;
    Eigen::MatrixXd entries;

    Field apply(const Field& f) const {
        f.check_same_grid(Field::zero(grid), "linops.OperatorMatrix.apply");
        Eigen::Map<const Eigen::VectorXd> v(f.samples().data(),
                                            static_cast<Eigen::Index>(f.size()));
        Eigen::VectorXd out = entries * v;
        return Field(grid, std::vector<double>(out.data(), out.data() + out.size()));
    }
};

struct Inertia {
    int negatives = 0;
    int zeros = 0;
    bool operator==(const Inertia& o) const {
        return negatives == o.negatives && zeros == o.zeros;
    }
    bool operator!=(const Inertia& o) const { return !(*this == o); }
};

namespace detail {

/// Real circulant matrix of a Fourier multiplier: column j is the inverse DFT
/// of the symbol rolled by j.
inline MatrixLd multiplier_matrix(const Grid& grid,
                                  const std::vector<std::complex<long double>>& symbol) {
    const int n = grid.count;
    std::vector<std::complex<long double>> v(symbol);
    fft_inplace(v, FFTW_BACKWARD);
    std::vector<long double> col(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) col[static_cast<std::size_t>(i)] = v[static_cast<std::size_t>(i)].real() / n;
    MatrixLd m(n, n);
    for (int j = 0; j < n; ++j)
        for (int i = 0; i < n; ++i)
            m(i, j) = col[static_cast<std::size_t>((i - j + n) % n)];
    return m;
}

inline MatrixLd derivative_matrix_ld(const Grid& grid, int order) {
    const std::size_t n = static_cast<std::size_t>(grid.count);
    std::vector<std::complex<long double>> sym(n, std::complex<long double>(1));
    apply_derivative_symbol(sym, (long double)grid.length, order);
    return multiplier_matrix(grid, sym);
}

/// Matrix of the symmetric antiderivative: mean-zero primitive (circulant)
/// plus the sawtooth mean carrier and the left-edge anchor (both rank one).
inline MatrixLd antiderivative_matrix_ld(const Grid& grid) {
    const std::size_t n = static_cast<std::size_t>(grid.count);
    std::vector<std::complex<long double>> sym(n, std::complex<long double>(1));
    apply_primitive_symbol(sym, (long double)grid.length);
    MatrixLd J = multiplier_matrix(grid, sym);
    MatrixLd P = J;
    P.rowwise() -= J.row(0);
    const long double inv_n = 1.0L / static_cast<long double>(n);
    for (std::size_t i = 0; i < n; ++i) {
        const long double x = grid.coordinate(static_cast<int>(i));
        for (std::size_t j = 0; j < n; ++j) P(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) += x * inv_n;
    }
    return P;
}

inline MatrixLd diag_ld(const Field& f) {
    MatrixLd m = MatrixLd::Zero(f.grid().count, f.grid().count);
    for (int i = 0; i < f.grid().count; ++i) m(i, i) = f[static_cast<std::size_t>(i)];
    return m;
}

/// R(q) = -d2 - 2 diag(q) P diag(q) d1 in long double.
inline MatrixLd recursion_matrix_ld(const Field& q) {
    const Grid& grid = q.grid();
    MatrixLd D1 = derivative_matrix_ld(grid, 1);
    MatrixLd D2 = derivative_matrix_ld(grid, 2);
    MatrixLd P = antiderivative_matrix_ld(grid);
    MatrixLd QD1 = D1;
    for (int j = 0; j < grid.count; ++j) QD1.row(j) *= (long double)q[static_cast<std::size_t>(j)];
    MatrixLd R = -D2 - 2.0L * (diag_ld(q) * (P * QD1));
    return R;
}

inline Eigen::MatrixXd to_double(const MatrixLd& m) { return m.cast<double>(); }

}  // namespace detail

/// sqrt(c) tanh(sqrt(c) x) sampled on the box coordinate.
inline Field tanh_potential(double c, const Grid& grid) {
    const double rc = std::sqrt(c);
    return Field::from_function(grid, [rc](double x) { return rc * std::tanh(rc * x); });
}

/// M_c h = h' + sqrt(c) tanh(sqrt(c) x) h.
inline OperatorMatrix build_M(double c, const Grid& grid) {
    check_profile_decay(c, grid, "linops.build_M");
    Eigen::MatrixXd m = detail::to_double(detail::derivative_matrix_ld(grid, 1));
    const Field phi = tanh_potential(c, grid);
    for (int i = 0; i < grid.count; ++i) m(i, i) += phi[static_cast<std::size_t>(i)];
    return {grid, std::move(m)};
}

/// M_c^t k = -k' + sqrt(c) tanh(sqrt(c) x) k (the rectangle-rule adjoint of M_c).
inline OperatorMatrix build_Mt(double c, const Grid& grid) {
    check_profile_decay(c, grid, "linops.build_Mt");
    Eigen::MatrixXd m = -detail::to_double(detail::derivative_matrix_ld(grid, 1));
    const Field phi = tanh_potential(c, grid);
    for (int i = 0; i < grid.count; ++i) m(i, i) += phi[static_cast<std::size_t>(i)];
    return {grid, std::move(m)};
}

/// Direct (matrix-free) applications used by identity checks.
inline Field apply_M(double c, const Field& h) {
    return spectral_derivative(h, 1) + hadamard(tanh_potential(c, h.grid()), h);
}
inline Field apply_Mt(double c, const Field& k) {
    return hadamard(tanh_potential(c, k.grid()), k) - spectral_derivative(k, 1);
}
/// R(q) z = -z'' - 2 q dx^-1(q z').
inline Field apply_R(const Field& q, const Field& z) {
    const Field inner = symmetric_antiderivative(hadamard(q, spectral_derivative(z, 1)));
    std::vector<double> out(z.size());
    const Field zxx = spectral_derivative(z, 2);
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = -zxx[i] - 2.0 * q[i] * inner[i];
    return Field(z.grid(), std::move(out));
}

/// Smooth decaying probe fields for operator-identity checks: random low-band
/// trigonometric data under a Gaussian envelope (the tanh potential and the
/// box coordinate carry boundary jumps, so probes must vanish at the edges).
inline std::vector<Field> probe_fields(const Grid& grid, int count, unsigned seed) {
    std::mt19937 rng(seed);
    std::normal_distribution<double> gauss(0.0, 1.0);
    const int band = std::max(4, grid.count / 10);
    const double sigma = grid.length / 11.0;
    std::vector<Field> out;
    out.reserve(static_cast<std::size_t>(count));
    for (int f = 0; f < count; ++f) {
        std::vector<double> a(static_cast<std::size_t>(band)), b(static_cast<std::size_t>(band));
        for (int m = 0; m < band; ++m) {
            a[static_cast<std::size_t>(m)] = gauss(rng);
            b[static_cast<std::size_t>(m)] = gauss(rng);
        }
        Field field = Field::from_function(grid, [&](double x) {
            double s = 0.0;
            for (int m = 1; m <= band; ++m)
                s += a[static_cast<std::size_t>(m - 1)] * std::cos(2.0 * M_PI * m * x / grid.length) +
                     b[static_cast<std::size_t>(m - 1)] * std::sin(2.0 * M_PI * m * x / grid.length);
            return s * std::exp(-(x * x) / (2.0 * sigma * sigma));
        });
        const double norm = l2_norm(field);
        if (norm > 0) field *= 1.0 / norm;
        out.push_back(std::move(field));
    }
    return out;
}

struct MAlgebraReport {
    double mmt = 0.0;          // M M^t = -d2 + c
    double mtm = 0.0;          // M^t M = -d2 + c - Q^2
    double intertwine_r = 0.0; // M R(Q) = (-d2 - Q^2) M
    double intertwine_t = 0.0; // (-d2 - Q^2) M^t = M^t (-d2)
    double max() const { return std::max(std::max(mmt, mtm), std::max(intertwine_r, intertwine_t)); }
};

/// Residuals of the M_c / M_c^t operator identities over 20 probe fields,
/// relative to the applied operator's scale on the same probes.
inline MAlgebraReport verify_M_algebra(double c, const Grid& grid, unsigned seed = 20240817) {
    check_profile_decay(c, grid, "linops.verify_M_algebra");
    const Field q = profile_Q(c, grid);
    const Field q2 = hadamard(q, q);
    const auto probes = probe_fields(grid, 20, seed);

    auto rel = [](double num, double den) { return den > 0 ? num / den : 0.0; };
    double n1 = 0, d1 = 0, n2 = 0, d2 = 0, n3 = 0, d3 = 0, n4 = 0, d4 = 0;
    for (const auto& z : probes) {
        {
            Field lhs = apply_M(c, apply_Mt(c, z));
            Field rhs = c * z - spectral_derivative(z, 2);
            n1 = std::max(n1, l2_norm(lhs - rhs));
            d1 = std::max(d1, l2_norm(rhs));
        }
        {
            Field lhs = apply_Mt(c, apply_M(c, z));
            Field rhs = c * z - spectral_derivative(z, 2) - hadamard(q2, z);
            n2 = std::max(n2, l2_norm(lhs - rhs));
            d2 = std::max(d2, l2_norm(rhs));
        }
        {
            Field lhs = apply_M(c, apply_R(q, z));
            Field mz = apply_M(c, z);
            Field rhs = -1.0 * spectral_derivative(mz, 2) - hadamard(q2, mz);
            n3 = std::max(n3, l2_norm(lhs - rhs));
            d3 = std::max(d3, l2_norm(rhs));
        }
        {
            Field mtz = apply_Mt(c, z);
            Field lhs = -1.0 * spectral_derivative(mtz, 2) - hadamard(q2, mtz);
            Field rhs = apply_Mt(c, -1.0 * spectral_derivative(z, 2));
            n4 = std::max(n4, l2_norm(lhs - rhs));
            d4 = std::max(d4, l2_norm(rhs));
        }
    }
    return {rel(n1, d1), rel(n2, d2), rel(n3, d3), rel(n4, d4)};
}

/// L_{1,1} = -d2 + c - 3 Q_c^2.
inline OperatorMatrix build_L1(double c, const Grid& grid) {
    check_profile_decay(c, grid, "linops.build_L1");
    Eigen::MatrixXd m = detail::to_double(-detail::derivative_matrix_ld(grid, 2));
    const Field q = profile_Q(c, grid);
    for (int i = 0; i < grid.count; ++i)
        m(i, i) += c - 3.0 * q[static_cast<std::size_t>(i)] * q[static_cast<std::size_t>(i)];
    return {grid, std::move(m)};
}

/// R(q) = -d2 - 2 q dx^-1(q d/dx .) as a dense matrix (long-double assembly).
inline OperatorMatrix recursion_operator_R(const Field& q) {
    return {q.grid(), detail::to_double(detail::recursion_matrix_ld(q))};
}

struct BuiltOperator {
    OperatorMatrix op;
    double relative_asymmetry = 0.0;
};

/// L_{N,j} = prod_{k != j} (R(Q_{c_j}) + c_k) . (-d2 + c_j - 3 Q_{c_j}^2),
/// symmetrized after assembly. Products are formed in long double: at double
/// precision the GEMM round-off on these k^2-scaled factors exceeds the 1e-6
/// identity budget.
inline BuiltOperator build_L_Nj(const SpeedSet& speeds, int j, const Grid& grid) {
    const int N = speeds.order();
    if (j < 1 || j > N) throw validation_error("linops.build_L_Nj: j must be in 1..N");
    const double cj = speeds[static_cast<std::size_t>(j - 1)];
    check_profile_decay(cj, grid, "linops.build_L_Nj");
    const Field q = profile_Q(cj, grid);

    MatrixLd acc = -detail::derivative_matrix_ld(grid, 2);
    for (int i = 0; i < grid.count; ++i)
        acc(i, i) += (long double)cj - 3.0L * (long double)q[static_cast<std::size_t>(i)] * (long double)q[static_cast<std::size_t>(i)];
    if (N > 1) {
        MatrixLd R = detail::recursion_matrix_ld(q);
        for (int k = 1; k <= N; ++k) {
            if (k == j) continue;
            MatrixLd factor = R;
            for (int i = 0; i < grid.count; ++i)
                factor(i, i) += (long double)speeds[static_cast<std::size_t>(k - 1)];
            acc = (factor * acc).eval();
        }
    }
    Eigen::MatrixXd A = detail::to_double(acc);
    Eigen::MatrixXd S = 0.5 * (A + A.transpose());
    const double scale = A.cwiseAbs().maxCoeff();
    const double asym = scale > 0 ? (A - A.transpose()).cwiseAbs().maxCoeff() / scale : 0.0;
    return {{grid, std::move(S)}, asym};
}

/// S_N''(u) as the symmetrized central-difference Jacobian of action_gradient.
inline BuiltOperator gateaux_hessian(const SpeedSet& speeds, const Field& u, double step = 0.0) {
    const Grid& grid = u.grid();
    const int n = grid.count;
    const double eps = step > 0.0 ? step : 1e-5 * (1.0 + u.sup_norm());
    Eigen::MatrixXd m(n, n);
    parallel_for(static_cast<std::size_t>(n), [&](std::size_t col) {
        std::vector<double> plus = u.samples();
        plus[col] += eps;
        const Field gp = action_gradient(speeds, Field(grid, std::move(plus)));
        std::vector<double> minus = u.samples();
        minus[col] -= eps;
        const Field gm = action_gradient(speeds, Field(grid, std::move(minus)));
        for (int row = 0; row < n; ++row)
            m(row, static_cast<Eigen::Index>(col)) =
                (gp[static_cast<std::size_t>(row)] - gm[static_cast<std::size_t>(row)]) / (2.0 * eps);
    });
    Eigen::MatrixXd S = 0.5 * (m + m.transpose());
    const double scale = m.cwiseAbs().maxCoeff();
    const double asym = scale > 0 ? (m - m.transpose()).cwiseAbs().maxCoeff() / scale : 0.0;
    return {{grid, std::move(S)}, asym};
}

/// Relative residual of M_j L_{N,j} M_j^t = M_j^t prod_k (-d2 + c_k) M_j over
/// 20 probe fields. The L_{N,j} action is evaluated through its factor chain.
inline double factorization_residual(const SpeedSet& speeds, int j, const Grid& grid,
                                     unsigned seed = 20240817) {
    const int N = speeds.order();
    if (j < 1 || j > N) throw validation_error("linops.factorization_residual: j must be in 1..N");
    const double cj = speeds[static_cast<std::size_t>(j - 1)];
    check_profile_decay(cj, grid, "linops.factorization_residual");
    const Field q = profile_Q(cj, grid);

    auto apply_LNj = [&](const Field& z) {
        Field w = -1.0 * spectral_derivative(z, 2) + cj * z - 3.0 * hadamard(hadamard(q, q), z);
        for (int k = 1; k <= N; ++k) {
            if (k == j) continue;
            w = apply_R(q, w) + speeds[static_cast<std::size_t>(k - 1)] * w;
        }
        return w;
    };
    auto apply_const_product = [&](const Field& z) {
        Field w = z;
        for (int k = 1; k <= N; ++k)
            w = speeds[static_cast<std::size_t>(k - 1)] * w - spectral_derivative(w, 2);
        return w;
    };

    const auto probes = probe_fields(grid, 20, seed);
    double worst = 0.0, scale = 0.0;
    for (const auto& z : probes) {
        const Field lhs = apply_M(cj, apply_LNj(apply_Mt(cj, z)));
        const Field rhs = apply_Mt(cj, apply_const_product(apply_M(cj, z)));
        worst = std::max(worst, l2_norm(lhs - rhs));
        scale = std::max(scale, l2_norm(lhs));
    }
    return scale > 0 ? worst / scale : 0.0;
}

/// Full symmetric eigendecomposition (LAPACK dsyevd).
inline Eigen::VectorXd symmetric_eigenvalues(const Eigen::MatrixXd& m) {
    const int n = static_cast<int>(m.rows());
    Eigen::MatrixXd a = m;
    Eigen::VectorXd w(n);
    const int info = LAPACKE_dsyevd(LAPACK_COL_MAJOR, 'N', 'L', n, a.data(), n, w.data());
    if (info != 0)
        throw numerical_error("linops.symmetric_eigenvalues: dsyevd failed with info " +
                              std::to_string(info));
    return w;
}

struct EigenDecomposition {
    Eigen::VectorXd values;   // ascending
    Eigen::MatrixXd vectors;  // columns
};

inline EigenDecomposition symmetric_eigen(const Eigen::MatrixXd& m) {
    const int n = static_cast<int>(m.rows());
    EigenDecomposition out;
    out.vectors = m;
    out.values.resize(n);
    const int info =
        LAPACKE_dsyevd(LAPACK_COL_MAJOR, 'V', 'L', n, out.vectors.data(), n, out.values.data());
    if (info != 0)
        throw numerical_error("linops.symmetric_eigen: dsyevd failed with info " +
                              std::to_string(info));
    return out;
}

struct InertiaReport {
    Inertia inertia;
    double threshold = 0.0;      // |eigenvalue| split point
    double largest_zero = 0.0;   // largest |eigenvalue| classified as zero
    double smallest_nonzero = 0.0;
    double zero_gap() const { return smallest_nonzero - largest_zero; }
};

namespace detail {

inline InertiaReport classify_inertia(const Eigen::VectorXd& eigs, double threshold,
                                      const char* where) {
    InertiaReport rep;
    rep.threshold = threshold;
    rep.smallest_nonzero = std::numeric_limits<double>::infinity();
    for (Eigen::Index i = 0; i < eigs.size(); ++i) {
        const double a = std::abs(eigs[i]);
        if (a > threshold / 10.0 && a < threshold * 10.0)
            throw numerical_error(std::string(where) +
                                  ": ambiguous spectral split, eigenvalue " +
                                  std::to_string(eigs[i]) + " within a factor 10 of threshold " +
                                  std::to_string(threshold) +
                                  "; refine the grid or adjust zero_tol");
        if (a <= threshold) {
            ++rep.inertia.zeros;
            rep.largest_zero = std::max(rep.largest_zero, a);
        } else {
            if (eigs[i] < 0.0) ++rep.inertia.negatives;
            rep.smallest_nonzero = std::min(rep.smallest_nonzero, a);
        }
    }
    return rep;
}

}  // namespace detail

/// Inertia with the zero threshold zero_tol * max|eigenvalue| (plain-matrix
/// semantics; suitable when the spectral radius is a meaningful scale).
inline InertiaReport inertia_of(const OperatorMatrix& m, double zero_tol = 1e-6) {
    const Eigen::VectorXd eigs = symmetric_eigenvalues(m.entries);
    const double radius = eigs.size() ? eigs.cwiseAbs().maxCoeff() : 0.0;
    return detail::classify_inertia(eigs, zero_tol * radius, "linops.inertia_of");
}

/// Inertia with an explicit scale. Discretized differential operators have
/// spectral radius ~ k_max^(2N), so the zero threshold is taken relative to
/// the essential-spectrum floor prod_k c_k instead.
inline InertiaReport inertia_of_scaled(const OperatorMatrix& m, double scale,
                                       double zero_tol = 1e-3) {
    const Eigen::VectorXd eigs = symmetric_eigenvalues(m.entries);
    return detail::classify_inertia(eigs, zero_tol * scale, "linops.inertia_of_scaled");
}

/// prod_k c_k, the essential-spectrum floor of the linearized operators.
inline double essential_floor(const SpeedSet& speeds) {
    double p = 1.0;
    for (double c : speeds.speeds) p *= c;
    return p;
}

/// Scaling derivative Lambda Q_c = (1/2c)(Q_c + x dQ_c/dx), x the box coordinate.
inline Field scaling_derivative(double c, const Grid& grid) {
    check_profile_decay(c, grid, "linops.scaling_derivative");
    const Field q = profile_Q(c, grid);
    const Field qx = profile_Q_prime(c, grid);
    std::vector<double> out(q.size());
    for (int m = 0; m < grid.count; ++m)
        out[static_cast<std::size_t>(m)] =
            (q[static_cast<std::size_t>(m)] + grid.coordinate(m) * qx[static_cast<std::size_t>(m)]) / (2.0 * c);
    return Field(grid, std::move(out));
}

struct InertiaScan {
    std::vector<double> times;
    std::vector<InertiaReport> reports;

    bool all_equal() const {
        for (const auto& r : reports)
            if (r.inertia != reports.front().inertia) return false;
        return true;
    }
};

/// Inertia of S_N''(U^(N)(t)) at each requested time (Gateaux Hessian at the
/// exact N-soliton snapshot, essential-floor threshold).
inline InertiaScan iso_inertia_scan(const SpeedSet& speeds, const PhaseSet& phases,
                                    const std::vector<double>& times, const Grid& grid,
                                    double zero_tol = 1e-3) {
    InertiaScan scan;
    scan.times = times;
    scan.reports.resize(times.size());
    const double floor = essential_floor(speeds);
    for (std::size_t i = 0; i < times.size(); ++i) {
        const Field u = n_soliton(speeds, phases, times[i], grid);
        const BuiltOperator h = gateaux_hessian(speeds, u);
        scan.reports[i] = inertia_of_scaled(h.op, floor, zero_tol);
    }
    return scan;
}

/// Sum over j of inertia(L_{N,j}) (the decoupled large-time limit).
inline Inertia inertia_sum_of_parts(const SpeedSet& speeds, const Grid& grid,
                                    double zero_tol = 1e-3) {
    Inertia total;
    const double floor = essential_floor(speeds);
    for (int j = 1; j <= speeds.order(); ++j) {
        const auto rep = inertia_of_scaled(build_L_Nj(speeds, j, grid).op, floor, zero_tol);
        total.negatives += rep.inertia.negatives;
        total.zeros += rep.inertia.zeros;
    }
    return total;
}

}  // namespace mkdv
