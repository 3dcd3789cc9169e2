#include <catch2/catch_amalgamated.hpp>

#include "mkdvlab/mkdvlab.hpp"
#include "test_helpers.hpp"

using namespace mkdv;
using Catch::Approx;

namespace {
const Grid kGrid(80.0, 2048);
// Closed-form checks at deep recursion levels need box tails at the round-off
// floor; L = 128 puts even the c = 0.5 profile below 1e-18 at the edges.
const Grid kWide(128.0, 2048);

double closed_H(int j_plus_1, double c) {
    const int j = j_plus_1 - 1;
    return (j % 2 == 0 ? 1.0 : -1.0) * 2.0 / (2.0 * j + 1.0) * std::pow(c, (2.0 * j + 1.0) / 2.0);
}
}  // namespace

TEST_CASE("vieta_multipliers closed cases") {
    auto l1 = vieta_multipliers(SpeedSet({3.7}));
    REQUIRE(l1.size() == 1);
    CHECK(l1[0] == Approx(3.7));

    auto l3 = vieta_multipliers(SpeedSet({1.0, 2.0, 3.0}));
    REQUIRE(l3.size() == 3);
    CHECK(l3[0] == Approx(6.0));
    CHECK(l3[1] == Approx(11.0));
    CHECK(l3[2] == Approx(6.0));

    auto l2 = vieta_multipliers(SpeedSet({1.0, 2.0}));
    CHECK(l2[0] == Approx(2.0));
    CHECK(l2[1] == Approx(3.0));
}

TEST_CASE("vieta polynomial has the speeds as roots") {
    SpeedSet c({0.4, 1.1, 2.6, 5.0});
    CHECK(vieta_residual(c, vieta_multipliers(c)) < 1e-10);
}

TEST_CASE("recursion_apply at zero potential is the third derivative") {
    Field w = testing::random_band_limited(kGrid, 5);
    Field lhs = recursion_apply(Field::zero(kGrid), w);
    Field rhs = -1.0 * spectral_derivative(w, 3);
    CHECK((lhs - rhs).sup_norm() < 1e-12 * rhs.sup_norm());
}

TEST_CASE("recursion_apply reproduces dx H2' at the soliton") {
    Field q = profile_Q(1.0, kGrid);
    Field lhs = recursion_apply(q, q);  // K(Q) H_1'(Q)
    Field h2p = -1.0 * spectral_derivative(q, 2);
    for (std::size_t i = 0; i < h2p.size(); ++i) h2p.mutable_samples()[i] -= q[i] * q[i] * q[i];
    Field rhs = spectral_derivative(h2p, 1);
    CHECK((lhs - rhs).sup_norm() < 1e-9);
}

TEST_CASE("recursion_apply is skew-symmetric") {
    // K(u) is skew for decaying u; random band-limited test directions.
    Field u = testing::random_decaying(kGrid, 31, 12);
    for (unsigned seed : {41u, 42u, 43u}) {
        Field w = testing::random_band_limited(kGrid, seed);
        Field v = testing::random_band_limited(kGrid, seed + 10);
        const double defect =
            inner_product(recursion_apply(u, w), v) + inner_product(w, recursion_apply(u, v));
        CHECK(std::abs(defect) < 1e-9 * l2_norm(w) * l2_norm(v));
    }
}

TEST_CASE("gradient_H base case and soliton identity") {
    Field u = testing::random_decaying(kGrid, 3);
    CHECK((gradient_H(1, u) - u).sup_norm() == 0.0);

    // H_2'(Q_1) = -Q_1'' - Q_1^3 = -Q_1 by the profile ODE.
    Field q = profile_Q(1.0, kGrid);
    Field g2 = gradient_H(2, q);
    CHECK((g2 + q).sup_norm() < 1e-8);
}

TEST_CASE("gradient eigen-relation H_{k+1}'(Q_c) = (-c)^k Q_c") {
    for (double c : {0.5, 1.0, 2.0}) {
        Field q = profile_Q(c, kWide);
        for (int k = 0; k <= 4; ++k) {
            Field g = gradient_H(k + 1, q);
            Field target = std::pow(-c, k) * q;
            const double rel = (g - target).sup_norm() / target.sup_norm();
            INFO("c = " << c << ", k = " << k << ", rel = " << rel);
            CHECK(rel < 1e-7);
        }
    }
}

TEST_CASE("gradient_H flags non-decaying input") {
    // A pure Fourier mode is not in the recursion's domain: u u_x has an
    // O(1)-mean integrand at the second level.
    Field u = Field::from_function(kGrid, [](double x) { return 1.1 + std::sin(2.0 * M_PI * x / 80.0); });
    CHECK_THROWS_AS(gradient_H(3, u), validation_error);
    CHECK_THROWS_AS(gradient_H(8, u), validation_error);
}

TEST_CASE("value_H closed values at solitons") {
    for (double c : {0.5, 1.0, 2.0}) {
        Field q = profile_Q(c, kWide);
        CHECK(value_H(1, q) == Approx(2.0 * std::sqrt(c)).margin(1e-10));
        for (int j = 0; j <= 4; ++j) {
            const double got = value_H(j + 1, q);
            const double want = closed_H(j + 1, c);
            INFO("c = " << c << ", j = " << j);
            CHECK(std::abs(got - want) < 1e-7 * std::abs(want));
        }
    }
    Field q1 = profile_Q(1.0, kWide);
    CHECK(value_H(2, q1) == Approx(-2.0 / 3.0).margin(1e-10));
}

TEST_CASE("action_gradient vanishes on the family") {
    // N = 1: H_2' + c H_1' = 0 at the profile.
    Field q = profile_Q(1.0, kGrid);
    CHECK(l2_norm(action_gradient(SpeedSet({1.0}), q)) < 1e-8);

    // N = 2 on a 2-soliton snapshot.
    SpeedSet c2({1.0, 2.0});
    Field u = two_soliton(c2, PhaseSet::zeros(2), 0.0, kGrid);
    CHECK(l2_norm(action_gradient(c2, u)) < 1e-6);
}

TEST_CASE("action_gradient does not vanish off the family") {
    SpeedSet c2({1.0, 2.0});
    Field q = profile_Q(1.0, kGrid);
    Field bump = Field::from_function(kGrid, [](double x) { return 0.3 * std::exp(-x * x); });
    CHECK(l2_norm(action_gradient(c2, q + bump)) >= 1e-2);
}

TEST_CASE("action_value closed form and conservation") {
    for (double c : {0.7, 1.0, 2.0}) {
        Field q = profile_Q(c, kWide);
        CHECK(action_value(SpeedSet({c}), q) ==
              Approx(4.0 / 3.0 * std::pow(c, 1.5)).epsilon(1e-9));
    }

    SpeedSet c2({1.0, 2.0});
    std::vector<double> values;
    for (double t : {-5.0, 0.0, 5.0})
        values.push_back(action_value(c2, two_soliton(c2, PhaseSet::zeros(2), t, kGrid)));
    for (double v : values) CHECK(std::abs(v - values[0]) < 1e-7 * std::abs(values[0]));

    CHECK(action_value(c2, Field::zero(kGrid)) == 0.0);
}

TEST_CASE("olver orthogonality") {
    // j = k = 1 is plain <u, u_x> = 0 by periodicity.
    Field u = testing::random_decaying(kGrid, 17);
    CHECK(std::abs(olver_orthogonality(u, 1, 1)) < 1e-12);

    Field v = profile_Q(1.0, kGrid) + Field::from_function(kGrid, [](double x) {
                  return 0.2 / std::cosh(x - 3.0);
              });
    {
        const double pairing = olver_orthogonality(v, 1, 2);
        const double scale = l2_norm(gradient_H(1, v)) * l2_norm(gradient_H(2, v));
        CHECK(std::abs(pairing) < 1e-8 * scale);
    }
    {
        SpeedSet c2({1.0, 2.0});
        Field w = two_soliton(c2, PhaseSet::zeros(2), 1.0, kGrid);
        const double pairing = olver_orthogonality(w, 2, 3);
        const double scale = l2_norm(gradient_H(2, w)) * l2_norm(gradient_H(3, w));
        CHECK(std::abs(pairing) < 1e-7 * scale);
    }
}

TEST_CASE("gradient consistency: finite differences of value_H") {
    // (H_n(u + eps v) - H_n(u - eps v)) / (2 eps) = <H_n'(u), v> + O(eps^2);
    // the residual must shrink by ~100x when eps does by 10x.
    Field u = 0.8 * profile_Q(1.0, kWide) +
              Field::from_function(kWide, [](double x) { return 0.3 / std::cosh(x + 2.0); });
    Field v = testing::random_decaying(kWide, 57);
    for (int n = 2; n <= 5; ++n) {
        const double pairing = inner_product(gradient_H(n, u), v);
        std::vector<double> residual;
        for (double eps : {1e-3, 1e-4}) {
            const double plus = value_H(n, u + eps * v);
            const double minus = value_H(n, u - eps * v);
            residual.push_back(std::abs((plus - minus) / (2.0 * eps) - pairing));
        }
        INFO("n = " << n << " residuals " << residual[0] << " " << residual[1]);
        CHECK(residual[0] < 1e-4);
        // second-order convergence with slack for the round-off floor
        CHECK(residual[1] < residual[0] / 20.0 + 1e-10);
    }
}

TEST_CASE("vieta consistency: multipliers annihilate the flow snapshots") {
    SpeedSet c({1.0, 2.0, 3.0});
    PhaseSet x = PhaseSet::zeros(3);
    for (double t : {-1.5, 0.0, 2.0}) {
        Field u = n_soliton(c, x, t, kGrid);
        CHECK(l2_norm(action_gradient(c, u)) < 1e-5);
    }
}

TEST_CASE("hierarchy depth limit") {
    Field q = profile_Q(1.0, kGrid);
    CHECK_THROWS_AS(gradient_H(8, q), validation_error);
    CHECK_THROWS_AS(value_H(8, q), validation_error);
    CHECK_THROWS_AS(action_gradient(SpeedSet({1, 2, 3, 4, 5, 6, 7}), q), validation_error);
}
