#pragma once

#include <cmath>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "mkdvlab/errors.hpp"
#include "mkdvlab/hierarchy.hpp"
#include "mkdvlab/linops.hpp"
#include "mkdvlab/solitons.hpp"

namespace mkdv {

namespace detail {

inline void check_speed_separation(const SpeedSet& speeds, const char* where) {
    const int N = speeds.order();
    const double cmax = speeds[static_cast<std::size_t>(N - 1)];
    for (int a = 0; a < N; ++a)
        for (int b = a + 1; b < N; ++b)
            if (std::abs(speeds[static_cast<std::size_t>(b)] - speeds[static_cast<std::size_t>(a)]) <
                1e-6 * cmax)
                throw validation_error(std::string(where) +
                                       ": speeds too close (separation < 1e-6 * max c)");
}

/// Elementary symmetric polynomials e_0..e_{N-1} of the speeds with index
/// `skip` removed.
inline std::vector<long double> elementary_without(const SpeedSet& speeds, int skip) {
    const int N = speeds.order();
    std::vector<long double> e(static_cast<std::size_t>(N), 0.0L);
    e[0] = 1.0L;
    int used = 0;
    for (int j = 0; j < N; ++j) {
        if (j == skip) continue;
        ++used;
        for (int k = used; k >= 1; --k)
            e[static_cast<std::size_t>(k)] += (long double)speeds[static_cast<std::size_t>(j)] *
                                              e[static_cast<std::size_t>(k - 1)];
    }
    return e;
}

}  // namespace detail

/// Closed form B_ij = (-1)^j c_i^{(2j-1)/2}; these are the derivatives of the
/// conserved values H_{j+1} at the decoupled soliton sum with respect to the
/// speeds (the finite-difference oracle pairs column j with order j + 1).
inline Eigen::MatrixXd build_B(const SpeedSet& speeds) {
    detail::check_speed_separation(speeds, "hessian.build_B");
    const int N = speeds.order();
    Eigen::MatrixXd B(N, N);
    for (int i = 1; i <= N; ++i)
        for (int j = 1; j <= N; ++j) {
            const double sign = (j % 2 == 0) ? 1.0 : -1.0;
            B(i - 1, j - 1) = sign * std::pow(speeds[static_cast<std::size_t>(i - 1)], (2.0 * j - 1.0) / 2.0);
        }
    return B;
}

/// Row i lists the elementary symmetric polynomials of the speeds without c_i
/// in increasing order (1, e_1, ..., e_{N-1}): the coefficients of the
/// polynomial with roots {-c_k : k != i}.
inline Eigen::MatrixXd build_Ainv(const SpeedSet& speeds) {
    detail::check_speed_separation(speeds, "hessian.build_Ainv");
    const int N = speeds.order();
    Eigen::MatrixXd A(N, N);
    for (int i = 0; i < N; ++i) {
        const auto e = detail::elementary_without(speeds, i);
        for (int j = 0; j < N; ++j) A(i, j) = static_cast<double>(e[static_cast<std::size_t>(j)]);
    }
    return A;
}

struct HessianReport {
    Eigen::MatrixXd D;                 // symmetrized Hessian d2 S_N / dlambda_i dlambda_j
    std::vector<double> diagonal_form; // diagonal of the congruent B Ainv^t
    int p = 0;                         // positive-eigenvalue count of D
    double diagonality_residual = 0.0; // max off-diagonal / max |diagonal|
    double asymmetry = 0.0;            // recorded round-off asymmetry of A B
    double condition = 0.0;            // condition number of the Vieta Jacobian
};

/// Hessian D of S_N in the multipliers, its congruent diagonal form and the
/// positive count p(D) = floor((N+1)/2).
///
/// Internally the congruence uses the index-consistent Jacobian pair
///   Btrue_ij = dH_j/dc_i = (-c_i)^{j-1}/sqrt(c_i),
///   Jinv_ij  = dlambda_j/dc_i = e_{N-j}({c_k : k != i})
/// (build_Ainv's rows reversed), whose product Btrue Jinv^t is exactly
/// diagonal with entries (-1)^{N-1} c_j^{-1/2} prod_{k != j} (c_j - c_k).
inline HessianReport build_report(const SpeedSet& speeds) {
    detail::check_speed_separation(speeds, "hessian.build_report");
    const int N = speeds.order();

    MatrixLd btrue(N, N);
    for (int i = 0; i < N; ++i) {
        const long double ci = speeds[static_cast<std::size_t>(i)];
        long double pw = 1.0L / std::sqrt(ci);
        for (int j = 0; j < N; ++j) {
            btrue(i, j) = pw;
            pw *= -ci;
        }
    }
    MatrixLd jinv(N, N);
    for (int i = 0; i < N; ++i) {
        const auto e = detail::elementary_without(speeds, i);
        for (int j = 0; j < N; ++j) jinv(i, j) = e[static_cast<std::size_t>(N - 1 - j)];
    }

    HessianReport rep;
    MatrixLd diag = btrue * jinv.transpose();
    rep.diagonal_form.resize(static_cast<std::size_t>(N));
    long double max_diag = 0.0L, max_off = 0.0L;
    for (int i = 0; i < N; ++i) {
        rep.diagonal_form[static_cast<std::size_t>(i)] = static_cast<double>(diag(i, i));
        max_diag = std::max(max_diag, std::abs(diag(i, i)));
        for (int j = 0; j < N; ++j)
            if (i != j) max_off = std::max(max_off, std::abs(diag(i, j)));
    }
    rep.diagonality_residual = static_cast<double>(max_off / max_diag);
    if (rep.diagonality_residual > 1e-6)
        throw numerical_error("hessian.build_report: B Ainv^t diagonality residual " +
                              std::to_string(rep.diagonality_residual) +
                              " exceeds 1e-6 (construction bug signal)");

    Eigen::MatrixXd jinv_d = jinv.cast<double>();
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(jinv_d);
    const double cond = svd.singularValues()(0) / svd.singularValues()(N - 1);
    rep.condition = cond;
    if (!(cond < 1e12))
        throw numerical_error("hessian.build_report: Vieta Jacobian condition number " +
                              std::to_string(cond) + " exceeds 1e12");

    MatrixLd a = jinv.inverse();
    MatrixLd d = a * btrue;
    Eigen::MatrixXd D = d.cast<double>();
    rep.asymmetry = (D - Eigen::MatrixXd(D.transpose())).cwiseAbs().maxCoeff() /
                    std::max(1e-300, D.cwiseAbs().maxCoeff());
    rep.D = 0.5 * (D + Eigen::MatrixXd(D.transpose()));

    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(rep.D);
    int p_eig = 0;
    for (int i = 0; i < N; ++i)
        if (eig.eigenvalues()(i) > 0.0) ++p_eig;
    int p_diag = 0;
    for (double v : rep.diagonal_form)
        if (v > 0.0) ++p_diag;
    if (p_eig != p_diag)
        throw numerical_error(
            "hessian.build_report: positive counts of D and of its diagonal form disagree (" +
            std::to_string(p_eig) + " vs " + std::to_string(p_diag) + ")");
    rep.p = p_eig;
    return rep;
}

struct CriterionResult {
    int n = 0;     // negative eigenvalues of S_N''(U^(N)(t))
    int p = 0;     // positive eigenvalues of D
    bool equal = false;
    Inertia inertia;    // full inertia of the linearized operator
    HessianReport hessian;
};

/// The stability criterion n(L_N) = p(D) evaluated at an N-soliton snapshot.
inline CriterionResult criterion_check(const SpeedSet& speeds, const PhaseSet& phases, double t,
                                       const Grid& grid, double zero_tol = 1e-3) {
    CriterionResult out;
    out.hessian = build_report(speeds);
    out.p = out.hessian.p;
    const Field u = n_soliton(speeds, phases, t, grid);
    const BuiltOperator h = gateaux_hessian(speeds, u);
    const InertiaReport rep = inertia_of_scaled(h.op, essential_floor(speeds), zero_tol);
    out.inertia = rep.inertia;
    out.n = rep.inertia.negatives;
    out.equal = (out.n == out.p);
    return out;
}

}  // namespace mkdv
