#pragma once

#include <cmath>
#include <functional>
#include <string>
#include <vector>

#include "mkdvlab/errors.hpp"

namespace mkdv {

/// Uniform periodic grid on [-L/2, L/2) with samples x_m = -L/2 + m*spacing.
struct Grid {
    double length = 80.0;
    int count = 2048;

    Grid() = default;
    Grid(double length_, int count_) : length(length_), count(count_) {
        if (!(length > 0.0) || !std::isfinite(length))
            throw validation_error("grid_core.Grid: length must be positive and finite");
        if (count < 16 || count % 2 != 0)
            throw validation_error("grid_core.Grid: count must be even and >= 16, got " +
                                   std::to_string(count));
    }

    double spacing() const { return length / count; }
    double coordinate(int m) const { return -0.5 * length + m * spacing(); }

    std::vector<double> coordinates() const {
        std::vector<double> xs(static_cast<std::size_t>(count));
        for (int m = 0; m < count; ++m) xs[static_cast<std::size_t>(m)] = coordinate(m);
        return xs;
    }

    bool operator==(const Grid& o) const { return count == o.count && length == o.length; }
    bool operator!=(const Grid& o) const { return !(*this == o); }
};

/// Real samples of a function on a Grid. Immutable by convention: operations
/// return fresh Fields.
class Field {
  public:
    Field() = default;
    Field(Grid grid, std::vector<double> samples) : grid_(grid), samples_(std::move(samples)) {
        if (samples_.size() != static_cast<std::size_t>(grid_.count))
            throw validation_error("grid_core.Field: sample count does not match grid");
        require_finite("grid_core.Field");
    }

    static Field zero(const Grid& grid) {
        return Field(grid, std::vector<double>(static_cast<std::size_t>(grid.count), 0.0));
    }

    static Field from_function(const Grid& grid, const std::function<double(double)>& f) {
        std::vector<double> v(static_cast<std::size_t>(grid.count));
        for (int m = 0; m < grid.count; ++m) v[static_cast<std::size_t>(m)] = f(grid.coordinate(m));
        return Field(grid, std::move(v));
    }

    const Grid& grid() const { return grid_; }
    const std::vector<double>& samples() const { return samples_; }
    std::vector<double>& mutable_samples() { return samples_; }
    std::size_t size() const { return samples_.size(); }
    double operator[](std::size_t i) const { return samples_[i]; }

    double sup_norm() const {
        double m = 0.0;
        for (double v : samples_) m = std::max(m, std::abs(v));
        return m;
    }

    void require_finite(const std::string& where) const {
        for (double v : samples_)
            if (!std::isfinite(v)) throw validation_error(where + ": non-finite sample");
    }

    Field& operator+=(const Field& o) {
        check_same_grid(o, "Field::operator+=");
        for (std::size_t i = 0; i < samples_.size(); ++i) samples_[i] += o.samples_[i];
        return *this;
    }
    Field& operator-=(const Field& o) {
        check_same_grid(o, "Field::operator-=");
        for (std::size_t i = 0; i < samples_.size(); ++i) samples_[i] -= o.samples_[i];
        return *this;
    }
    Field& operator*=(double a) {
        for (double& v : samples_) v *= a;
        return *this;
    }

    friend Field operator+(Field a, const Field& b) { return a += b; }
    friend Field operator-(Field a, const Field& b) { return a -= b; }
    friend Field operator*(double a, Field f) { return f *= a; }

    void check_same_grid(const Field& o, const std::string& where) const {
        if (grid_ != o.grid_) throw validation_error(std::string(where) + ": grid mismatch");
    }

  private:
    Grid grid_;
    std::vector<double> samples_;
};

/// Pointwise product, same grid.
inline Field hadamard(const Field& a, const Field& b) {
    a.check_same_grid(b, "grid_core.hadamard");
    std::vector<double> v(a.size());
    for (std::size_t i = 0; i < v.size(); ++i) v[i] = a[i] * b[i];
    return Field(a.grid(), std::move(v));
}

/// Extended-precision samples for analytically constructed fields. The Lenard
/// recursion amplifies input round-off by ~(band)^2 per level, so closed-form
/// inputs are sampled in long double to keep deep levels meaningful; general
/// double Fields remain the default carrier.
struct LongField {
    Grid grid;
    std::vector<long double> samples;

    LongField(Grid g, std::vector<long double> s) : grid(g), samples(std::move(s)) {
        if (samples.size() != static_cast<std::size_t>(grid.count))
            throw validation_error("grid_core.LongField: sample count does not match grid");
    }

    static LongField from_function(const Grid& grid,
                                   const std::function<long double(long double)>& f) {
        std::vector<long double> v(static_cast<std::size_t>(grid.count));
        const long double h = static_cast<long double>(grid.length) / grid.count;
        for (int m = 0; m < grid.count; ++m)
            v[static_cast<std::size_t>(m)] = f(-0.5L * grid.length + m * h);
        return LongField(grid, std::move(v));
    }

    Field to_field() const {
        std::vector<double> v(samples.size());
        for (std::size_t i = 0; i < v.size(); ++i) v[i] = static_cast<double>(samples[i]);
        return Field(grid, std::move(v));
    }

    double sup_norm() const {
        long double m = 0;
        for (long double v : samples) m = std::max(m, std::abs(v));
        return static_cast<double>(m);
    }

    double l2_norm() const {
        long double s = 0;
        for (long double v : samples) s += v * v;
        return static_cast<double>(std::sqrt(s * (static_cast<long double>(grid.length) / grid.count)));
    }

    LongField& operator-=(const LongField& o) {
        if (grid != o.grid) throw validation_error("grid_core.LongField: grid mismatch");
        for (std::size_t i = 0; i < samples.size(); ++i) samples[i] -= o.samples[i];
        return *this;
    }
    friend LongField operator-(LongField a, const LongField& b) { return a -= b; }
    LongField& operator*=(long double a) {
        for (auto& v : samples) v *= a;
        return *this;
    }
    friend LongField operator*(long double a, LongField f) { return f *= a; }
};

}
