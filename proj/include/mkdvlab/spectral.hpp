#pragma once

#include <complex>
#include <map>
#include <mutex>
#include <vector>

#include <fftw3.h>

#include "mkdvlab/errors.hpp"
#include "mkdvlab/grid.hpp"

namespace mkdv {
namespace detail {

template <typename Real>
struct fftw_traits;

template <>
struct fftw_traits<double> {
    using plan_t = fftw_plan;
    using cplx_t = fftw_complex;
    static plan_t plan(int n, cplx_t* in, cplx_t* out, int sign) {
        return fftw_plan_dft_1d(n, in, out, sign, FFTW_ESTIMATE | FFTW_UNALIGNED);
    }
    static void execute(plan_t p, cplx_t* in, cplx_t* out) { fftw_execute_dft(p, in, out); }
};

template <>
struct fftw_traits<long double> {
    using plan_t = fftwl_plan;
    using cplx_t = fftwl_complex;
    static plan_t plan(int n, cplx_t* in, cplx_t* out, int sign) {
        return fftwl_plan_dft_1d(n, in, out, sign, FFTW_ESTIMATE | FFTW_UNALIGNED);
    }
    static void execute(plan_t p, cplx_t* in, cplx_t* out) { fftwl_execute_dft(p, in, out); }
};

// Shared plan cache. Plan creation is not thread-safe in FFTW; execution on
// distinct arrays is. Plans are created once per (precision, n, sign) and kept
// for the process lifetime.
template <typename Real>
class PlanCache {
  public:
    using traits = fftw_traits<Real>;

    static typename traits::plan_t get(int n, int sign) {
        static PlanCache cache;
        std::lock_guard<std::mutex> lock(cache.mutex_);
        auto key = std::make_pair(n, sign);
        auto it = cache.plans_.find(key);
        if (it != cache.plans_.end()) return it->second;
        std::vector<std::complex<Real>> scratch(static_cast<std::size_t>(n));
        auto* raw = reinterpret_cast<typename traits::cplx_t*>(scratch.data());
        auto p = traits::plan(n, raw, raw, sign);
        cache.plans_.emplace(key, p);
        return p;
    }

  private:
    std::mutex mutex_;
    std::map<std::pair<int, int>, typename traits::plan_t> plans_;
};

template <typename Real>
void fft_inplace(std::vector<std::complex<Real>>& v, int sign) {
    using traits = fftw_traits<Real>;
    auto p = PlanCache<Real>::get(static_cast<int>(v.size()), sign);
    auto* raw = reinterpret_cast<typename traits::cplx_t*>(v.data());
    traits::execute(p, raw, raw);
}

/// Unnormalized forward DFT of real samples.
template <typename Real>
std::vector<std::complex<Real>> forward(const std::vector<Real>& f) {
    std::vector<std::complex<Real>> v(f.size());
    for (std::size_t i = 0; i < f.size(); ++i) v[i] = f[i];
    fft_inplace(v, FFTW_FORWARD);
    return v;
}

/// Inverse DFT, real part, including the 1/n normalization.
template <typename Real>
std::vector<Real> backward_real(std::vector<std::complex<Real>> v) {
    fft_inplace(v, FFTW_BACKWARD);
    const Real inv = Real(1) / Real(v.size());
    std::vector<Real> out(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) out[i] = v[i].real() * inv;
    return out;
}

/// Signed wavenumber 2*pi*m/L for DFT bin i (m in [-n/2, n/2)).
template <typename Real>
Real wavenumber(std::size_t i, std::size_t n, Real length) {
    const long m = static_cast<long>(i) < static_cast<long>(n / 2)
                       ? static_cast<long>(i)
                       : static_cast<long>(i) - static_cast<long>(n);
    const Real two_pi = Real(2) * Real(3.14159265358979323846264338327950288L);
    return two_pi * Real(m) / length;
}

/// Multiply spectrum by (i k)^order. Nyquist is zeroed on odd orders (its
/// derivative has no consistent sign on a real grid).
template <typename Real>
void apply_derivative_symbol(std::vector<std::complex<Real>>& v, Real length, int order) {
    const std::size_t n = v.size();
    for (std::size_t i = 0; i < n; ++i) {
        const Real k = wavenumber(i, n, length);
        std::complex<Real> ik(0, k);
        std::complex<Real> s(1);
        for (int p = 0; p < order; ++p) s *= ik;
        v[i] *= s;
    }
    if (order % 2 == 1) v[n / 2] = std::complex<Real>(0);
}

/// Divide spectrum by (i k); the k = 0 mode (mean) and Nyquist are zeroed.
template <typename Real>
void apply_primitive_symbol(std::vector<std::complex<Real>>& v, Real length) {
    const std::size_t n = v.size();
    v[0] = std::complex<Real>(0);
    v[n / 2] = std::complex<Real>(0);
    for (std::size_t i = 1; i < n; ++i) {
        if (i == n / 2) continue;
        const Real k = wavenumber(i, n, length);
        v[i] /= std::complex<Real>(0, k);
    }
}

template <typename Real>
Real vec_mean(const std::vector<Real>& f) {
    Real s = 0;
    for (Real v : f) s += v;
    return s / Real(f.size());
}

template <typename Real>
std::vector<Real> vec_derivative(const std::vector<Real>& f, Real length, int order) {
    auto v = forward(f);
    apply_derivative_symbol(v, length, order);
    return backward_real(std::move(v));
}

/// Mean-zero periodic primitive of (f - mean f).
template <typename Real>
std::vector<Real> vec_primitive_meanzero(const std::vector<Real>& f, Real length) {
    auto v = forward(f);
    apply_primitive_symbol(v, length);
    return backward_real(std::move(v));
}

/// Box realization of the symmetric antiderivative
///   (dx^-1 f)(x) = 1/2 (int_-inf^x f - int_x^inf f):
/// mean-zero primitive plus a sawtooth m*x carrying the mean, anchored so the
/// left-edge value equals -m*L/2. Exact for integrands that decay at the box
/// edges, including ones with nonzero integral.
template <typename Real>
std::vector<Real> vec_antiderivative_symmetric(const std::vector<Real>& f, Real length) {
    const std::size_t n = f.size();
    const Real m = vec_mean(f);
    std::vector<Real> g(n);
    {
        std::vector<Real> f0(f);
        for (Real& v : f0) v -= m;
        g = vec_primitive_meanzero(f0, length);
    }
    const Real anchor = g[0];
    const Real h = length / Real(n);
    for (std::size_t i = 0; i < n; ++i) {
        const Real x = -length / 2 + Real(i) * h;
        g[i] += m * x - anchor;
    }
    return g;
}

/// Zero all spectral modes below rel_threshold * max|coef|. Keeps analytic
/// iterates from accumulating amplified round-off at the top of the band; a
/// flat (non-decaying) spectrum passes through unchanged.
template <typename Real>
void threshold_spectrum(std::vector<std::complex<Real>>& v, Real rel_threshold) {
    Real mx = 0;
    for (const auto& c : v) mx = std::max(mx, std::abs(c));
    const Real thr = rel_threshold * mx;
    for (auto& c : v)
        if (std::abs(c) < thr) c = std::complex<Real>(0);
}

template <typename Real>
std::vector<Real> vec_threshold_filter(const std::vector<Real>& f, Real rel_threshold) {
    auto v = forward(f);
    threshold_spectrum(v, rel_threshold);
    return backward_real(std::move(v));
}

}  // namespace detail

inline constexpr double default_mean_tol = 1e-8;

/// order-th spectral derivative; exact for band-limited data. order <= 6.
inline Field spectral_derivative(const Field& f, int order) {
    if (order < 1 || order > 6)
        throw validation_error("grid_core.spectral_derivative: order must be in 1..6");
    f.require_finite("grid_core.spectral_derivative");
    return Field(f.grid(), detail::vec_derivative(f.samples(), f.grid().length, order));
}

inline double mean(const Field& f) { return detail::vec_mean(f.samples()); }

/// Mean-zero antiderivative: returns g with dx g = f - mean(f) and mean(g) = 0.
/// Rejects inputs whose mean exceeds mean_tol * sup|f| (the Lenard recursion
/// only ever integrates effectively mean-zero data).
inline Field antiderivative(const Field& f, double mean_tol = default_mean_tol) {
    f.require_finite("grid_core.antiderivative");
    const double m = mean(f);
    const double scale = f.sup_norm();
    if (scale > 0.0 && std::abs(m) > mean_tol * scale)
        throw validation_error("grid_core.antiderivative: input mean " + std::to_string(m) +
                               " exceeds mean_tol * sup-norm; integrand is not effectively "
                               "mean-zero");
    return Field(f.grid(), detail::vec_primitive_meanzero(f.samples(), f.grid().length));
}

/// Symmetric antiderivative on the box (see detail::vec_antiderivative_symmetric).
/// Used inside the recursion operator where integrands decay but need not have
/// zero mean.
inline Field symmetric_antiderivative(const Field& f) {
    f.require_finite("grid_core.symmetric_antiderivative");
    return Field(f.grid(), detail::vec_antiderivative_symmetric(f.samples(), f.grid().length));
}

/// Rectangle-rule L2 pairing: spacing * sum f_m g_m.
inline double inner_product(const Field& f, const Field& g) {
    f.check_same_grid(g, "grid_core.inner_product");
    double s = 0.0;
    for (std::size_t i = 0; i < f.size(); ++i) s += f[i] * g[i];
    return f.grid().spacing() * s;
}

inline double l2_norm(const Field& f) { return std::sqrt(inner_product(f, f)); }

/// H^k norm: (sum_{j<=k} ||d^j f||_L2^2)^(1/2), k <= 6, via one transform.
/// The derivative symbols match spectral_derivative (odd orders zero Nyquist).
inline double sobolev_norm(const Field& f, int k) {
    if (k < 0 || k > 6) throw validation_error("grid_core.sobolev_norm: k must be in 0..6");
    f.require_finite("grid_core.sobolev_norm");
    const std::size_t n = f.size();
    auto v = detail::forward(f.samples());
    const double h = f.grid().spacing();
    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double kk = detail::wavenumber<double>(i, n, f.grid().length);
        const double p2 = std::norm(v[i]);
        double weight = 1.0;  // j = 0 term
        double kpow = 1.0;
        for (int j = 1; j <= k; ++j) {
            kpow *= kk * kk;
            const bool nyquist_zeroed = (j % 2 == 1) && (i == n / 2);
            if (!nyquist_zeroed) weight += kpow;
        }
        total += weight * p2;
    }
    // Parseval: h * sum |f|^2 = (h/n) * sum |fhat|^2.
    return std::sqrt(total * h / static_cast<double>(n));
}

/// Spacing-weighted squared-modulus sum of DFT coefficients (Parseval check).
inline double spectral_energy(const Field& f) {
    auto v = detail::forward(f.samples());
    double s = 0.0;
    for (const auto& c : v) s += std::norm(c);
    return s * f.grid().spacing() / static_cast<double>(f.size());
}

}  // namespace mkdv
