#pragma once

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "mkdvlab/errors.hpp"
#include "mkdvlab/grid.hpp"
#include "mkdvlab/spectral.hpp"

namespace mkdv {

/// Strictly increasing positive speeds c_1 < ... < c_N.
struct SpeedSet {
    std::vector<double> speeds;

    explicit SpeedSet(std::vector<double> c) : speeds(std::move(c)) {
        if (speeds.empty()) throw validation_error("soliton_factory.SpeedSet: N >= 1 required");
        if (speeds.size() > 8)
            throw validation_error("soliton_factory.SpeedSet: N <= 8 (combinatorial sums)");
        double prev = 0.0;
        for (double c : speeds) {
            if (!(c > prev) || !std::isfinite(c))
                throw validation_error(
                    "soliton_factory.SpeedSet: speeds must satisfy 0 < c_1 < ... < c_N");
            prev = c;
        }
    }

    int order() const { return static_cast<int>(speeds.size()); }
    double operator[](std::size_t j) const { return speeds[j]; }
};

struct PhaseSet {
    std::vector<double> phases;

    explicit PhaseSet(std::vector<double> x) : phases(std::move(x)) {
        for (double v : phases)
            if (!std::isfinite(v)) throw validation_error("soliton_factory.PhaseSet: finite phases required");
    }
    static PhaseSet zeros(int n) { return PhaseSet(std::vector<double>(static_cast<std::size_t>(n), 0.0)); }

    double operator[](std::size_t j) const { return phases[j]; }
    std::size_t size() const { return phases.size(); }
};

inline void check_speed_phase_match(const SpeedSet& c, const PhaseSet& x, const char* where) {
    if (static_cast<std::size_t>(c.order()) != x.size())
        throw validation_error(std::string(where) + ": speeds and phases differ in length");
}

/// Q_c(x) = sqrt(2c) sech(sqrt(c) x); positive even solution of
/// -Q'' + c Q - Q^3 = 0.
template <typename Real>
Real profile_value_t(Real c, Real x) {
    return std::sqrt(Real(2) * c) / std::cosh(std::sqrt(c) * x);
}

inline double profile_value(double c, double x) { return profile_value_t<double>(c, x); }

inline void check_profile_decay(double c, const Grid& grid, const char* where) {
    if (profile_value(c, 0.5 * grid.length) >= 1e-12)
        throw validation_error(std::string(where) +
                               ": domain too small for speed c = " + std::to_string(c) +
                               " (|Q_c(L/2)| >= 1e-12)");
}

inline Field profile_Q(double c, const Grid& grid) {
    if (!(c > 0.0)) throw validation_error("soliton_factory.profile_Q: c > 0 required");
    check_profile_decay(c, grid, "soliton_factory.profile_Q");
    return Field::from_function(grid, [c](double x) { return profile_value(c, x); });
}

/// Profile sampled in long double (for the deep recursion levels).
inline LongField profile_Q_long(double c, const Grid& grid) {
    if (!(c > 0.0)) throw validation_error("soliton_factory.profile_Q_long: c > 0 required");
    check_profile_decay(c, grid, "soliton_factory.profile_Q_long");
    const long double cl = c;
    return LongField::from_function(grid,
                                    [cl](long double x) { return profile_value_t<long double>(cl, x); });
}

/// d/dx of the profile, in closed form.
inline Field profile_Q_prime(double c, const Grid& grid) {
    const double rc = std::sqrt(c);
    return Field::from_function(grid, [c, rc](double x) {
        return -rc * profile_value(c, x) * std::tanh(rc * x);
    });
}

namespace detail {

inline void check_safe_center(double c, double center, const Grid& grid, const char* where) {
    const double margin = 10.0 / std::sqrt(c);
    if (std::abs(center) > 0.5 * grid.length - margin)
        throw validation_error(std::string(where) + ": soliton center " + std::to_string(center) +
                               " leaves the safe region of the box");
}

}  // namespace detail

/// Traveling wave U_c(t, x) = 2 sqrt(2) d/dx arctan(e^s), s = sqrt(c)(x - c t) + x0,
/// i.e. Q_c translated to center c t - x0 / sqrt(c). Same phase convention as the
/// N-soliton tau functions, so n_soliton reduces to this at N = 1.
inline Field one_soliton(double c, double x0, double t, const Grid& grid) {
    if (!(c > 0.0)) throw validation_error("soliton_factory.one_soliton: c > 0 required");
    const double center = c * t - x0 / std::sqrt(c);
    detail::check_safe_center(c, center, grid, "soliton_factory.one_soliton");
    return Field::from_function(
        grid, [&](double x) { return profile_value(c, x - center); });
}

namespace detail {

struct TauTerm {
    bool odd = false;       // parity of |sigma|
    double amplitude = 1.0; // a(sigma)
    double speed_sum = 0.0; // sum of sqrt(c_j), j in sigma (d/dx of the exponent)
    std::vector<double> sqrt_c;  // sqrt(c_j) for j in sigma
    std::vector<double> phase;   // x_j for j in sigma
};

/// Enumerate the tau-function terms: all subsets sigma of {1..N} with
/// a(sigma) = prod_{k<l in sigma} atil(k,l), atil(k,l) = -((sqrt(c_l)-sqrt(c_k))/(sqrt(c_l)+sqrt(c_k)))^2.
/// Even-|sigma| subsets feed f, odd ones feed g.
inline std::vector<TauTerm> tau_terms(const SpeedSet& speeds, const PhaseSet& phases) {
    const int N = speeds.order();
    std::vector<double> rc(static_cast<std::size_t>(N));
    for (int j = 0; j < N; ++j) rc[static_cast<std::size_t>(j)] = std::sqrt(speeds[static_cast<std::size_t>(j)]);
    std::vector<std::vector<double>> atil(static_cast<std::size_t>(N),
                                          std::vector<double>(static_cast<std::size_t>(N), 1.0));
    for (int a = 0; a < N; ++a)
        for (int b = 0; b < N; ++b) {
            if (a == b) continue;
            const double r = (rc[static_cast<std::size_t>(b)] - rc[static_cast<std::size_t>(a)]) /
                             (rc[static_cast<std::size_t>(b)] + rc[static_cast<std::size_t>(a)]);
            atil[static_cast<std::size_t>(a)][static_cast<std::size_t>(b)] = -r * r;
        }

    std::vector<TauTerm> terms;
    terms.reserve(std::size_t(1) << N);
    for (unsigned mask = 0; mask < (1u << N); ++mask) {
        TauTerm term;
        std::vector<int> members;
        for (int j = 0; j < N; ++j)
            if (mask & (1u << j)) members.push_back(j);
        term.odd = members.size() % 2 == 1;
        for (std::size_t a = 0; a < members.size(); ++a)
            for (std::size_t b = a + 1; b < members.size(); ++b)
                term.amplitude *= atil[static_cast<std::size_t>(members[a])][static_cast<std::size_t>(members[b])];
        for (int j : members) {
            term.speed_sum += rc[static_cast<std::size_t>(j)];
            term.sqrt_c.push_back(rc[static_cast<std::size_t>(j)]);
            term.phase.push_back(phases[static_cast<std::size_t>(j)]);
        }
        terms.push_back(std::move(term));
    }
    return terms;
}

}  // namespace detail

/// N-soliton U = 2 sqrt(2) (g_x f - g f_x) / (f^2 + g^2) from the tau functions.
/// The common factor exp(max exponent) is divided out pointwise before
/// exponentiation; the expression is homogeneous of degree zero in (f, g), so
/// the rescaling cancels exactly and the evaluation cannot overflow.
inline Field n_soliton(const SpeedSet& speeds, const PhaseSet& phases, double t, const Grid& grid) {
    check_speed_phase_match(speeds, phases, "soliton_factory.n_soliton");
    const int N = speeds.order();
    for (int j = 0; j < N; ++j) {
        const double c = speeds[static_cast<std::size_t>(j)];
        const double center = c * t - phases[static_cast<std::size_t>(j)] / std::sqrt(c);
        detail::check_safe_center(c, center, grid, "soliton_factory.n_soliton");
    }
    const auto terms = detail::tau_terms(speeds, phases);

    std::vector<double> out(static_cast<std::size_t>(grid.count));
    std::vector<double> expo(terms.size());
    for (int m = 0; m < grid.count; ++m) {
        const double x = grid.coordinate(m);
        double emax = 0.0;  // the empty subset contributes exponent 0
        for (std::size_t i = 0; i < terms.size(); ++i) {
            double s = 0.0;
            const auto& term = terms[i];
            for (std::size_t a = 0; a < term.sqrt_c.size(); ++a) {
                const double rc = term.sqrt_c[a];
                s += rc * (x - rc * rc * t) + term.phase[a];
            }
            expo[i] = s;
            emax = std::max(emax, s);
        }
        double f = 0.0, g = 0.0, fx = 0.0, gx = 0.0;
        for (std::size_t i = 0; i < terms.size(); ++i) {
            const auto& term = terms[i];
            const double e = term.amplitude * std::exp(expo[i] - emax);
            if (term.odd) {
                g += e;
                gx += term.speed_sum * e;
            } else {
                f += e;
                fx += term.speed_sum * e;
            }
        }
        out[static_cast<std::size_t>(m)] = 2.0 * std::sqrt(2.0) * (gx * f - g * fx) / (f * f + g * g);
    }
    return Field(grid, std::move(out));
}

/// Closed 2-soliton formula (the N = 2 tau functions written out), evaluated
/// through the same analytic-derivative expression.
inline Field two_soliton(const SpeedSet& speeds, const PhaseSet& phases, double t, const Grid& grid) {
    if (speeds.order() != 2) throw validation_error("soliton_factory.two_soliton: exactly two speeds required");
    check_speed_phase_match(speeds, phases, "soliton_factory.two_soliton");
    const double c1 = speeds[0], c2 = speeds[1];
    const double r1 = std::sqrt(c1), r2 = std::sqrt(c2);
    for (int j = 0; j < 2; ++j) {
        const double c = speeds[static_cast<std::size_t>(j)];
        const double center = c * t - phases[static_cast<std::size_t>(j)] / std::sqrt(c);
        detail::check_safe_center(c, center, grid, "soliton_factory.two_soliton");
    }
    const double rho = (r1 - r2) / (r1 + r2);
    const double rho2 = rho * rho;
    return Field::from_function(grid, [&](double x) {
        const double s1 = r1 * (x - c1 * t) + phases[0];
        const double s2 = r2 * (x - c2 * t) + phases[1];
        const double m = std::max({0.0, s1, s2, s1 + s2});
        const double f = std::exp(-m) - rho2 * std::exp(s1 + s2 - m);
        const double g = std::exp(s1 - m) + std::exp(s2 - m);
        const double fx = -rho2 * (r1 + r2) * std::exp(s1 + s2 - m);
        const double gx = r1 * std::exp(s1 - m) + r2 * std::exp(s2 - m);
        return 2.0 * std::sqrt(2.0) * (gx * f - g * fx) / (f * f + g * g);
    });
}

struct FittedSoliton {
    double speed = 0.0;
    double center = 0.0;
};

/// Locate one peak per composing soliton and refine each center by a 3-point
/// parabolic fit in log u (a sech peak is exactly parabolic there to O(dx^4)).
/// Peaks are matched to speeds by amplitude (~ sqrt(2c)). Fails when the field
/// does not present exactly N sufficiently separated peaks.
inline std::vector<FittedSoliton> fitted_decomposition(const Field& u, const SpeedSet& speeds) {
    const int n = u.grid().count;
    const double threshold = 0.5 * std::sqrt(2.0 * speeds[0]);
    struct Peak {
        double center;
        double amplitude;
        bool used = false;
    };
    std::vector<Peak> peaks;
    for (int m = 0; m < n; ++m) {
        const double prev = u[static_cast<std::size_t>((m + n - 1) % n)];
        const double here = u[static_cast<std::size_t>(m)];
        const double next = u[static_cast<std::size_t>((m + 1) % n)];
        if (here > threshold && here > prev && here >= next) {
            double center = u.grid().coordinate(m);
            if (prev > 0.0 && next > 0.0) {
                const double lm = std::log(prev), l0 = std::log(here), lp = std::log(next);
                const double denom = lp - 2.0 * l0 + lm;
                if (denom < 0.0)
                    center += 0.5 * u.grid().spacing() * (lm - lp) / denom;
            }
            peaks.push_back({center, here});
        }
    }
    if (peaks.size() != static_cast<std::size_t>(speeds.order()))
        throw numerical_error("soliton_factory.fitted_decomposition: found " +
                              std::to_string(peaks.size()) + " peaks, expected " +
                              std::to_string(speeds.order()) +
                              " (insufficient separation or wrong speed set)");

    std::vector<FittedSoliton> out;
    for (int j = 0; j < speeds.order(); ++j) {
        const double amp = std::sqrt(2.0 * speeds[static_cast<std::size_t>(j)]);
        double best = -1.0;
        std::size_t pick = 0;
        for (std::size_t p = 0; p < peaks.size(); ++p) {
            if (peaks[p].used) continue;
            const double score = std::abs(peaks[p].amplitude - amp);
            if (best < 0.0 || score < best) {
                best = score;
                pick = p;
            }
        }
        peaks[pick].used = true;
        out.push_back({speeds[static_cast<std::size_t>(j)], peaks[pick].center});
    }
    return out;
}

}  // namespace mkdv
