#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "ovconv/convolve.hpp"
#include "ovconv/util.hpp"

using namespace ovconv;
using namespace std::complex_literals;

namespace {

Matrix scalar(Complex z) { return Matrix::Constant(1, 1, z); }
AlgElem point1(Complex z) { return AlgElem(1, 1, scalar(z)); }

const Law kBer = Law::bernoulli(CPMap::identity(1));
const Law kGamma = Law::semicircular(CPMap::identity(1));
const Law kDelta0 = Law::point_mass(scalar(0.0));
const Law kDelta1 = Law::point_mass(scalar(1.0));

double agree(const Law& a, const Law& b, int points, std::uint64_t seed, int level = 1) {
    Rng rng(seed);
    double worst = 0.0;
    for (int k = 0; k < points; ++k) {
        const AlgElem p = rng.half_plane_point(a.d(), level);
        worst = std::max(worst, (transform_F(a, p) - transform_F(b, p)).norm());
    }
    return worst;
}

}  // namespace

TEST_CASE("boolean convolution") {
    const Law sum = boolean_conv(Law::point_mass(scalar(1.0)), Law::point_mass(scalar(2.0)));
    CHECK(agree(sum, Law::point_mass(scalar(3.0)), 5, 1) < 1e-13);

    const Law bb = boolean_conv(kBer, kBer);
    CHECK(std::abs(transform_F(bb, point1(1i)).mat(0, 0) - 3i) < 1e-13);

    CHECK(agree(boolean_conv(kBer, kDelta0), kBer, 10, 2) < 1e-13);
}

TEST_CASE("monotone convolution") {
    CHECK(agree(monotone_conv(kDelta1, Law::point_mass(scalar(2.0))),
                Law::point_mass(scalar(3.0)), 5, 3) < 1e-13);
    CHECK(agree(monotone_conv(kBer, kDelta0), kBer, 5, 4) < 1e-13);
    CHECK(std::abs(transform_F(monotone_conv(kBer, kBer), point1(1i)).mat(0, 0) - 2.5i) < 1e-13);
}

TEST_CASE("orthogonal convolution") {
    CHECK(agree(orthogonal_conv(kBer, kDelta0), kBer, 5, 5) < 1e-13);
    CHECK(agree(orthogonal_conv(kDelta0, kGamma), kDelta0, 5, 6) < 1e-11);
    CHECK(agree(orthogonal_conv(kBer, kGamma), kGamma, 20, 7) < 1e-9);  // Ber |- gamma = gamma
}

TEST_CASE("s-free convolution") {
    CHECK(agree(sfree_conv(kDelta0, kBer), kDelta0, 5, 8) < 1e-12);
    CHECK(agree(sfree_conv(kBer, kDelta0), kBer, 5, 9) < 1e-12);
    const double phi = (1.0 + std::sqrt(5.0)) / 2.0;
    CHECK(std::abs(transform_F(sfree_conv(kBer, kBer), point1(1i)).mat(0, 0) - Complex(0, phi)) <
          1e-10);
}

TEST_CASE("free convolution and subordination") {
    CHECK(agree(free_conv(kBer, kDelta0), kBer, 5, 10) < 1e-11);
    CHECK(std::abs(transform_F(free_conv(kBer, kBer), point1(1i)).mat(0, 0) -
                   Complex(0, std::sqrt(5.0))) < 1e-9);
    // gamma_1 boxplus gamma_1 = gamma_2
    CHECK(agree(free_conv(kGamma, kGamma), Law::semicircular(CPMap::scaled_identity(1, 2.0)), 20,
                11) < 1e-8);

    // omega_1 + omega_2 - b = F and the subordination property F = F_mu(omega_1)
    Rng rng(12);
    const Law conv = free_conv(kBer, kGamma);
    for (int k = 0; k < 10; ++k) {
        const AlgElem b = rng.half_plane_point(1, 2);
        const auto [w1, w2] = subordination_pair(kBer, kGamma, b);
        const AlgElem f = transform_F(conv, b);
        CHECK((w1 + w2 - b - f).norm() < 1e-9);
        CHECK((transform_F(kBer, w1) - f).norm() < 1e-9);
        CHECK((transform_F(kGamma, w2) - f).norm() < 1e-9);
    }
}

TEST_CASE("s-free fixed point residual is tiny") {
    Rng rng(13);
    const SolverSettings s;
    for (int k = 0; k < 10; ++k) {
        const AlgElem b = rng.half_plane_point(1, 1);
        const AlgElem w = transform_F(sfree_conv(kBer, kGamma), b, s);
        const AlgElem res = b + transform_h(kBer, b + transform_h(kGamma, w, s), s) - w;
        CHECK(res.norm() <= 1e-11 * (1.0 + w.norm()));
    }
}

TEST_CASE("boolean powers") {
    const double t = 0.6;
    const CPMap ct = CPMap::scaled_identity(1, t);
    CHECK(agree(boolean_power(Law::point_mass(scalar(2.0)), ct),
                Law::point_mass(scalar(t * 2.0)), 5, 14) < 1e-13);
    CHECK(agree(boolean_power(kBer, ct), Law::bernoulli(ct), 10, 15) < 1e-13);
    CHECK(agree(boolean_power(kBer, CPMap::identity(1)), kBer, 5, 16) < 1e-14);
}

TEST_CASE("free powers") {
    CHECK(agree(free_power(kBer, CPMap::identity(1)), kBer, 5, 17) < 1e-12);
    const Law pow2 = free_power(kBer, CPMap::scaled_identity(1, 2.0));
    CHECK(std::abs(transform_F(pow2, point1(1i)).mat(0, 0) - Complex(0, std::sqrt(5.0))) < 1e-10);
    CHECK(agree(pow2, free_conv(kBer, kBer), 20, 18) < 1e-8);
    CHECK(agree(free_power(Law::point_mass(scalar(1.5)), CPMap::scaled_identity(1, 2.0)),
                Law::point_mass(scalar(3.0)), 5, 19) < 1e-11);
    CHECK_THROWS_AS((void)free_power(kBer, CPMap::scaled_identity(1, 0.5)),
                    NotCompletelyPositive);
}

TEST_CASE("free power subordination equals the s-free transform of boolean powers") {
    // omega solves w = b + eta(h_mu(w)) and coincides with
    // F of (mu^{uplus eta}) boxright (mu^{uplus eta}), eta = alpha - 1
    const SolverSettings settings;
    for (int d : {1, 2}) {
        const Law mu = (d == 1) ? kBer : Law::realization_leaf(seeded_realization(2, 2, 5150));
        const CPMap alpha =
            (d == 1) ? CPMap::scaled_identity(1, 2.5)
                     : shift_by_identity(CPMap::ad((Matrix(2, 2) << 1, 0, 0, 0.5).finished()),
                                         1.0);
        const CPMap eta = shift_by_identity(alpha, -1.0);
        const Law powered = boolean_power(mu, eta);
        const Law subord = sfree_conv(powered, powered);
        Rng rng(24 + d);
        for (int k = 0; k < 10; ++k) {
            const AlgElem b = rng.half_plane_point(d, 1 + (k % 2));
            auto step = [&](const AlgElem& w) {
                return b + eta.apply(transform_h(mu, w, settings));
            };
            const AlgElem omega =
                solve_fixed_point(step, b, 0.5 * b.imag_min_eig(), settings);
            CHECK((omega - transform_F(subord, b, settings)).norm() < 1e-9);
        }
    }
}

TEST_CASE("Phi and B transforms") {
    CHECK(agree(phi_transform(kDelta0), kBer, 10, 20) < 1e-13);

    const double phi = (1.0 + std::sqrt(5.0)) / 2.0;
    const Law bp = b_transform(kBer, CPMap::identity(1));
    CHECK(std::abs(transform_F(bp, point1(1i)).mat(0, 0) - Complex(0, phi)) < 1e-8);
    CHECK(agree(bp, kGamma, 10, 21) < 1e-8);  // Bercovici-Pata witness

    // Phi(gamma boxplus mu) = B_1(Phi(mu))
    const Law lhs = phi_transform(free_conv(kGamma, kBer));
    const Law rhs = b_transform(phi_transform(kBer), CPMap::identity(1));
    CHECK(agree(lhs, rhs, 10, 22) < 1e-8);
}

TEST_CASE("commutative convolutions stay commutative, the others do not") {
    Rng rng(23);
    for (int k = 0; k < 5; ++k) {
        const AlgElem b = rng.half_plane_point(1, 2);
        CHECK((transform_F(boolean_conv(kBer, kGamma), b) -
               transform_F(boolean_conv(kGamma, kBer), b))
                  .norm() < 1e-9);
        CHECK((transform_F(free_conv(kBer, kGamma), b) -
               transform_F(free_conv(kGamma, kBer), b))
                  .norm() < 1e-9);
    }
    // witness pair (Ber(1), delta_1)
    const AlgElem b = point1(1i);
    CHECK((transform_F(orthogonal_conv(kBer, kDelta1), b) -
           transform_F(orthogonal_conv(kDelta1, kBer), b))
              .norm() >= 1e-3);
    CHECK((transform_F(sfree_conv(kBer, kDelta1), b) -
           transform_F(sfree_conv(kDelta1, kBer), b))
              .norm() >= 1e-3);
}

TEST_CASE("identity spot checks from the spec") {
    {
        IdentityCase c;
        c.name = IdentityName::OrthDecomp;
        c.d = 1;
        c.laws = {{"mu", kBer}, {"nu", kBer}};
        c.levels = {1};
        c.samples = 20;
        c.seed = 7;
        c.tol = 1e-10;
        const auto report = identity_check(c);
        CHECK(report.pass);
        CHECK(report.max_residual <= 1e-10);
    }
    {
        IdentityCase c;
        c.name = IdentityName::Exchange;
        c.d = 1;
        c.laws = {{"mu", kBer}};
        c.cpmaps = {{"p", CPMap::scaled_identity(1, 2.0)}, {"q", CPMap::scaled_identity(1, 0.75)}};
        c.levels = {1, 2};
        c.samples = 10;
        c.seed = 8;
        c.tol = 1e-8;
        const auto report = identity_check(c);
        CHECK(report.pass);
    }
    {
        IdentityCase c;
        c.name = IdentityName::BerGamma;
        c.d = 2;
        c.cpmaps = {{"s", CPMap::ad((Matrix(2, 2) << 1, 0, 0, 0.5).finished())}};
        c.levels = {1, 2};
        c.samples = 10;
        c.seed = 9;
        c.tol = 1e-8;
        const auto report = identity_check(c);
        CHECK(report.pass);
    }
    {
        // precondition machinery: EXCHANGE with p = 1 (p - 1 not invertible)
        IdentityCase c;
        c.name = IdentityName::Exchange;
        c.d = 1;
        c.laws = {{"mu", kBer}};
        c.cpmaps = {{"p", CPMap::identity(1)}, {"q", CPMap::scaled_identity(1, 0.75)}};
        CHECK_THROWS_AS((void)identity_check(c), PreconditionViolated);
    }
}

TEST_CASE("exchange exponents: scalar values and the d=2 hypotheses") {
    // p = 2, q = 3/4 gives q' = 1 - 2 + 3/2 = 1/2 and p' = (3/2)/(1/2) = 3
    const auto [p1, q1] =
        exchange_exponents(CPMap::scaled_identity(1, 2.0), CPMap::scaled_identity(1, 0.75));
    CHECK(std::abs(q1.apply(Matrix::Ones(1, 1))(0, 0) - 0.5) < 1e-13);
    CHECK(std::abs(p1.apply(Matrix::Ones(1, 1))(0, 0) - 3.0) < 1e-13);

    // the d=2 zoo pair: p = 1 + Ad_K, q the (1/2 + k)/(1 + k) multiplier
    const Matrix k = (Matrix(2, 2) << 1, 0, 0, 0.5).finished();
    Matrix mult(2, 2);
    for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j) {
            const double kk = std::pow(0.5, i + j);
            mult(i, j) = (0.5 + kk) / (1.0 + kk);
        }
    const auto [p2, q2] =
        exchange_exponents(shift_by_identity(CPMap::ad(k), 1.0), CPMap::schur_multiplier(mult));
    // q' = id/2 and p' - 1 = 2 Ad_K
    Rng rng(33);
    const Matrix b = rng.hermitian(2);
    CHECK((q2.apply(b) - 0.5 * b).norm() < 1e-12);
    CHECK((p2.apply(b) - (b + 2.0 * k * b * k.adjoint())).norm() < 1e-12);
    CHECK(p2.verified_cp());
    CHECK(shift_by_identity(p2, -1.0).flag() == CpFlag::Verified);

    CHECK_THROWS_AS((void)exchange_exponents(CPMap::identity(1), CPMap::scaled_identity(1, 0.75)),
                    PreconditionViolated);
}

TEST_CASE("default zoo covers every identity at both dimensions") {
    for (int d : {1, 2}) {
        const auto cases = default_cases(d, {1}, 2, 42, 1e-6);
        CHECK(cases.size() == all_identities().size());
    }
}
