#pragma once

#include <cmath>
#include <complex>
#include <map>
#include <string>
#include <vector>

#include "mkdvlab/errors.hpp"
#include "mkdvlab/grid.hpp"
#include "mkdvlab/hierarchy.hpp"
#include "mkdvlab/optimize.hpp"
#include "mkdvlab/solitons.hpp"
#include "mkdvlab/spectral.hpp"

namespace mkdv {

enum class Scheme {
    etdrk4,  // fourth-order exponential time differencing (Cox-Matthews)
    ifrk4,   // integrating-factor classical Runge-Kutta
};

struct EvolverConfig {
    double dt = 1e-4;
    double horizon = 1.0;
    double save_interval = 0.1;
    double dealias_fraction = 2.0 / 3.0;
    Scheme scheme = Scheme::etdrk4;

    void validate() const {
        if (!(dt > 0.0)) throw validation_error("evolve.EvolverConfig: dt must be positive");
        if (!(horizon > 0.0)) throw validation_error("evolve.EvolverConfig: horizon must be positive");
        if (!(save_interval > 0.0))
            throw validation_error("evolve.EvolverConfig: save_interval must be positive");
        if (!(dealias_fraction > 0.0) || dealias_fraction > 1.0)
            throw validation_error("evolve.EvolverConfig: dealias_fraction must be in (0, 1]");
    }
};

struct Trajectory {
    std::vector<double> times;
    std::vector<Field> states;
    EvolverConfig config;
};

namespace detail {

using cvec = std::vector<std::complex<double>>;

struct Stepper {
    Grid grid;
    std::size_t n;
    std::vector<std::complex<double>> symbol_L;   // i k^3
    std::vector<std::complex<double>> symbol_d1;  // i k (Nyquist zeroed)
    std::vector<double> mask;                     // dealias mask

    // ETDRK4 coefficient sets per step size.
    struct Coeffs {
        cvec E, E2, Q, f1, f2, f3;
    };
    std::map<double, Coeffs> cache;

    Stepper(const Grid& g, double dealias_fraction) : grid(g), n(static_cast<std::size_t>(g.count)) {
        symbol_L.resize(n);
        symbol_d1.resize(n);
        mask.assign(n, 1.0);
        const std::size_t keep =
            static_cast<std::size_t>(std::floor(dealias_fraction * double(n) / 2.0));
        for (std::size_t i = 0; i < n; ++i) {
            const double k = detail::wavenumber<double>(i, n, grid.length);
            symbol_L[i] = std::complex<double>(0.0, k * k * k);
            symbol_d1[i] = std::complex<double>(0.0, k);
            const std::size_t idx = i < n / 2 ? i : n - i;
            if (idx > keep || i == n / 2) mask[i] = 0.0;
        }
        symbol_d1[n / 2] = 0.0;
    }

    // phi-function coefficients by the contour-average rule (64 points on the
    // unit circle around each dt*L value).
    const Coeffs& coefficients(double dt) {
        auto it = cache.find(dt);
        if (it != cache.end()) return it->second;
        Coeffs c;
        c.E.resize(n);
        c.E2.resize(n);
        c.Q.resize(n);
        c.f1.resize(n);
        c.f2.resize(n);
        c.f3.resize(n);
        const int M = 64;
        for (std::size_t i = 0; i < n; ++i) {
            const std::complex<double> z = dt * symbol_L[i];
            c.E[i] = std::exp(z);
            c.E2[i] = std::exp(0.5 * z);
            std::complex<double> q(0), f1(0), f2(0), f3(0);
            for (int m = 0; m < M; ++m) {
                const double theta = M_PI * (m + 0.5) / M;
                const std::complex<double> r(std::cos(theta), std::sin(theta));
                const std::complex<double> LR = z + r;
                const std::complex<double> eLR = std::exp(LR);
                const std::complex<double> LR2 = LR * LR;
                const std::complex<double> LR3 = LR2 * LR;
                q += (std::exp(0.5 * LR) - 1.0) / LR;
                f1 += (-4.0 - LR + eLR * (4.0 - 3.0 * LR + LR2)) / LR3;
                f2 += (2.0 + LR + eLR * (-2.0 + LR)) / LR3;
                f3 += (-4.0 - 3.0 * LR - LR2 + eLR * (4.0 - LR)) / LR3;
            }
            // The contour points come in conjugate pairs only for real z, so
            // average over the upper semicircle and take the conjugate-mean.
            const double invM = 1.0 / M;
            auto mean = [&](std::complex<double> s) { return dt * s * invM; };
            c.Q[i] = mean(q);
            c.f1[i] = mean(f1);
            c.f2[i] = mean(f2);
            c.f3[i] = mean(f3);
        }
        return cache.emplace(dt, std::move(c)).first->second;
    }

    // N(v) = -i k FFT(u^3) with the 2/3-rule mask applied before cubing and on
    // the product.
    cvec nonlinear(const cvec& v) const {
        cvec w(n);
        for (std::size_t i = 0; i < n; ++i) w[i] = v[i] * mask[i];
        fft_inplace(w, FFTW_BACKWARD);
        const double inv = 1.0 / double(n);
        for (std::size_t i = 0; i < n; ++i) {
            const double u = w[i].real() * inv;
            w[i] = u * u * u;
        }
        fft_inplace(w, FFTW_FORWARD);
        for (std::size_t i = 0; i < n; ++i) w[i] *= -symbol_d1[i] * mask[i];
        return w;
    }

    void step_etdrk4(cvec& v, const Coeffs& c) const {
        const cvec Nv = nonlinear(v);
        cvec a(n), b(n), ccand(n);
        for (std::size_t i = 0; i < n; ++i) a[i] = c.E2[i] * v[i] + c.Q[i] * Nv[i];
        const cvec Na = nonlinear(a);
        for (std::size_t i = 0; i < n; ++i) b[i] = c.E2[i] * v[i] + c.Q[i] * Na[i];
        const cvec Nb = nonlinear(b);
        for (std::size_t i = 0; i < n; ++i)
            ccand[i] = c.E2[i] * a[i] + c.Q[i] * (2.0 * Nb[i] - Nv[i]);
        const cvec Nc = nonlinear(ccand);
        for (std::size_t i = 0; i < n; ++i)
            v[i] = c.E[i] * v[i] + Nv[i] * c.f1[i] + 2.0 * (Na[i] + Nb[i]) * c.f2[i] + Nc[i] * c.f3[i];
    }

    // Integrating factor w = e^{-tL} v, classical RK4 on w' = e^{-tL} N(e^{tL} w).
    void step_ifrk4(cvec& v, double dt) const {
        cvec E(n), E2(n);
        for (std::size_t i = 0; i < n; ++i) {
            E[i] = std::exp(dt * symbol_L[i]);
            E2[i] = std::exp(0.5 * dt * symbol_L[i]);
        }
        const cvec k1 = nonlinear(v);
        cvec tmp(n);
        for (std::size_t i = 0; i < n; ++i) tmp[i] = E2[i] * (v[i] + 0.5 * dt * k1[i]);
        const cvec k2 = nonlinear(tmp);
        for (std::size_t i = 0; i < n; ++i) tmp[i] = E2[i] * v[i] + 0.5 * dt * k2[i];
        const cvec k3 = nonlinear(tmp);
        for (std::size_t i = 0; i < n; ++i) tmp[i] = E[i] * v[i] + dt * E2[i] * k3[i];
        const cvec k4 = nonlinear(tmp);
        for (std::size_t i = 0; i < n; ++i)
            v[i] = E[i] * v[i] +
                   dt / 6.0 * (E[i] * k1[i] + 2.0 * E2[i] * (k2[i] + k3[i]) + k4[i]);
    }
};

}  // namespace detail

/// Integrate u_t = -u_xxx - (u^3)_x pseudo-spectrally from u0 and save
/// snapshots every save_interval (plus the initial state and the horizon).
/// Aborts when sup|u| doubles relative to t = 0 (blow-up guard).
inline Trajectory evolve(const Field& u0, const EvolverConfig& cfg) {
    cfg.validate();
    u0.require_finite("evolve.evolve");
    detail::Stepper stepper(u0.grid(), cfg.dealias_fraction);
    const std::size_t n = stepper.n;

    detail::cvec v(n);
    for (std::size_t i = 0; i < n; ++i) v[i] = u0[i];
    detail::fft_inplace(v, FFTW_FORWARD);

    Trajectory traj;
    traj.config = cfg;
    traj.times.push_back(0.0);
    traj.states.push_back(u0);
    const double guard = 2.0 * (u0.sup_norm() + 1e-12);

    double t = 0.0;
    while (t < cfg.horizon - 1e-12) {
        const double target = std::min(t + cfg.save_interval, cfg.horizon);
        const int steps = std::max(1, static_cast<int>(std::llround((target - t) / cfg.dt)));
        const double dt = (target - t) / steps;
        if (cfg.scheme == Scheme::etdrk4) {
            const auto& coeffs = stepper.coefficients(dt);
            for (int s = 0; s < steps; ++s) stepper.step_etdrk4(v, coeffs);
        } else {
            for (int s = 0; s < steps; ++s) stepper.step_ifrk4(v, dt);
        }
        t = target;

        detail::cvec w = v;
        detail::fft_inplace(w, FFTW_BACKWARD);
        std::vector<double> samples(n);
        const double inv = 1.0 / double(n);
        for (std::size_t i = 0; i < n; ++i) samples[i] = w[i].real() * inv;
        Field state(u0.grid(), std::move(samples));
        if (state.sup_norm() > guard)
            throw numerical_error("evolve.evolve: blow-up guard tripped at t = " +
                                  std::to_string(t) + " (sup-norm doubled)");
        traj.times.push_back(t);
        traj.states.push_back(std::move(state));
    }
    return traj;
}

/// Per-order worst relative drift of H_n along the trajectory:
/// max_t |H_n(u(t)) - H_n(u(0))| / max(1, |H_n(u(0))|).
inline std::vector<double> conservation_audit(const Trajectory& traj, int n_max) {
    if (n_max < 1 || n_max > hierarchy_max_order)
        throw validation_error("evolve.conservation_audit: n_max must be in 1.." +
                               std::to_string(hierarchy_max_order));
    std::vector<double> drift(static_cast<std::size_t>(n_max), 0.0);
    std::vector<double> base(static_cast<std::size_t>(n_max));
    for (int n = 1; n <= n_max; ++n)
        base[static_cast<std::size_t>(n - 1)] = value_H(n, traj.states.front());
    for (std::size_t s = 1; s < traj.states.size(); ++s)
        for (int n = 1; n <= n_max; ++n) {
            const double h = value_H(n, traj.states[s]);
            const double b = base[static_cast<std::size_t>(n - 1)];
            drift[static_cast<std::size_t>(n - 1)] =
                std::max(drift[static_cast<std::size_t>(n - 1)],
                         std::abs(h - b) / std::max(1.0, std::abs(b)));
        }
    return drift;
}

/// ||S_N'(U^(N)(t))||_L2 at exact-solution snapshots (no time stepping).
inline std::vector<double> residual_along_flow(const SpeedSet& speeds, const PhaseSet& phases,
                                               const std::vector<double>& times, const Grid& grid) {
    std::vector<double> out;
    out.reserve(times.size());
    for (double t : times)
        out.push_back(l2_norm(action_gradient(speeds, n_soliton(speeds, phases, t, grid))));
    return out;
}

struct DistanceResult {
    double distance = 0.0;
    PhaseSet phases = PhaseSet({});
    bool certified = false;
    int iterations = 0;
};

/// inf over phases y of ||u - U^(N)(0, .; y)||_{H^k} by multi-start
/// Nelder-Mead. The time parameter of the family is redundant (any snapshot is
/// a phase translate of the t = 0 family), so the search runs over phases
/// only. Initial guesses come from peak fitting when possible, else from the
/// optional hint.
inline DistanceResult distance_to_family(const Field& u, const SpeedSet& speeds, int sobolev_index,
                                         const PhaseSet* hint = nullptr) {
    const int N = speeds.order();
    const Grid& grid = u.grid();

    std::vector<double> y0(static_cast<std::size_t>(N), 0.0);
    bool have_seed = false;
    try {
        const auto fitted = fitted_decomposition(u, speeds);
        for (int j = 0; j < N; ++j)
            y0[static_cast<std::size_t>(j)] =
                -std::sqrt(speeds[static_cast<std::size_t>(j)]) * fitted[static_cast<std::size_t>(j)].center;
        have_seed = true;
    } catch (const numerical_error&) {
        // overlapping peaks; fall back to the hint
    }
    if (!have_seed && hint && hint->size() == static_cast<std::size_t>(N))
        y0.assign(hint->phases.begin(), hint->phases.end());

    auto objective = [&](const std::vector<double>& y) {
        // Out-of-box trial centers are clamped by returning a large penalty so
        // the simplex retreats instead of tripping the safe-region guard.
        for (int j = 0; j < N; ++j) {
            const double c = speeds[static_cast<std::size_t>(j)];
            const double center = -y[static_cast<std::size_t>(j)] / std::sqrt(c);
            if (std::abs(center) > 0.5 * grid.length - 10.0 / std::sqrt(c))
                return 1e6 + std::abs(center);
        }
        const Field model = n_soliton(speeds, PhaseSet(y), 0.0, grid);
        return sobolev_norm(u - model, sobolev_index);
    };

    DistanceResult best;
    best.distance = std::numeric_limits<double>::infinity();
    for (int restart = 0; restart < 3; ++restart) {
        std::vector<double> start = y0;
        for (int j = 0; j < N; ++j)
            start[static_cast<std::size_t>(j)] += 0.05 * restart * (j % 2 == 0 ? 1.0 : -1.0);
        const auto r = nelder_mead(objective, start, 0.1, 2000, 1e-8);
        if (r.value < best.distance) {
            best.distance = r.value;
            best.phases = PhaseSet(r.x);
            best.certified = r.converged;
            best.iterations = r.iterations;
        }
    }
    return best;
}

struct StabilityReport {
    double delta0 = 0.0;            // H^k size of the initial perturbation
    std::vector<double> times;
    std::vector<double> distances;  // distance_to_family at each save time
    double max_distance = 0.0;
    double amplification = 0.0;     // max_distance / delta0 (0 when delta0 = 0)
    bool all_certified = true;
};

/// Theorem-style stability experiment: evolve U^(N)(0) + perturbation and
/// track the H^k distance to the N-soliton family at every save time.
inline StabilityReport stability_experiment(const SpeedSet& speeds, const PhaseSet& phases,
                                            const Field& perturbation, const EvolverConfig& cfg,
                                            int sobolev_index) {
    check_speed_phase_match(speeds, phases, "evolve.stability_experiment");
    const Grid& grid = perturbation.grid();
    StabilityReport report;
    report.delta0 = sobolev_norm(perturbation, sobolev_index);
    if (report.delta0 > 1e-2)
        throw validation_error(
            "evolve.stability_experiment: perturbation H^k size exceeds 1e-2; the experiment "
            "probes the small-data regime");

    const Field u0 = n_soliton(speeds, phases, 0.0, grid) + perturbation;
    const Trajectory traj = evolve(u0, cfg);

    PhaseSet warm = phases;
    for (std::size_t s = 0; s < traj.states.size(); ++s) {
        const DistanceResult d = distance_to_family(traj.states[s], speeds, sobolev_index, &warm);
        report.times.push_back(traj.times[s]);
        report.distances.push_back(d.distance);
        report.max_distance = std::max(report.max_distance, d.distance);
        report.all_certified = report.all_certified && d.certified;
        warm = d.phases;
    }
    report.amplification = report.delta0 > 0.0 ? report.max_distance / report.delta0 : 0.0;
    return report;
}

/// Augmented-Lagrangian Lyapunov candidate
///   S_N(u) + (C/2) sum_j (H_j(u) - H_j(U^(N)))^2.
inline double lyapunov_value(const SpeedSet& speeds, const Field& u,
                             const std::vector<double>& reference_H, double C) {
    const int N = speeds.order();
    if (reference_H.size() != static_cast<std::size_t>(N))
        throw validation_error("evolve.lyapunov_value: reference_H must have length N");
    if (!(C > 0.0)) throw validation_error("evolve.lyapunov_value: C must be positive");
    long double total = action_value(speeds, u);
    for (int j = 1; j <= N; ++j) {
        const long double gap = static_cast<long double>(value_H(j, u)) -
                                static_cast<long double>(reference_H[static_cast<std::size_t>(j - 1)]);
        total += 0.5L * static_cast<long double>(C) * gap * gap;
    }
    return static_cast<double>(total);
}

/// H_1..H_N of the reference N-soliton, the constraint values for the
/// Lyapunov functional.
inline std::vector<double> reference_conserved(const SpeedSet& speeds, const PhaseSet& phases,
                                               const Grid& grid) {
    const Field u = n_soliton(speeds, phases, 0.0, grid);
    std::vector<double> out;
    for (int j = 1; j <= speeds.order(); ++j) out.push_back(value_H(j, u));
    return out;
}

}  // namespace mkdv
