#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "ovconv/convolve.hpp"
#include "ovconv/transforms.hpp"
#include "ovconv/util.hpp"

using namespace ovconv;
using namespace std::complex_literals;

namespace {

Matrix scalar(Complex z) { return Matrix::Constant(1, 1, z); }
AlgElem point1(Complex z) { return AlgElem(1, 1, scalar(z)); }

// scalar semicircle Cauchy transform, branch with G ~ 1/z at infinity
Complex semicircle_G(Complex z) {
    Complex root = std::sqrt(z * z - 4.0);
    if ((z / root).real() < 0.0) root = -root;
    return (z - root) / 2.0;
}

const double kPhi = (1.0 + std::sqrt(5.0)) / 2.0;

}  // namespace

TEST_CASE("F of the basic leaves") {
    const Law zero = Law::point_mass(scalar(0.0));
    CHECK(std::abs(transform_F(zero, point1(1i)).mat(0, 0) - 1i) < 1e-15);

    const Law ber = Law::bernoulli(CPMap::identity(1));
    CHECK(std::abs(transform_F(ber, point1(1i)).mat(0, 0) - 2i) < 1e-14);

    const Law gamma = Law::semicircular(CPMap::identity(1));
    const Complex expect = 1.0 / semicircle_G(1i);  // i(1+sqrt 5)/2
    CHECK(std::abs(expect - Complex(0, kPhi)) < 1e-12);
    CHECK(std::abs(transform_F(gamma, point1(1i)).mat(0, 0) - expect) < 1e-11);
}

TEST_CASE("G and h") {
    Rng rng(3);
    const Matrix p = rng.hermitian(2);
    const Law pm = Law::point_mass(p);
    const AlgElem b = rng.half_plane_point(2, 2);
    const AlgElem g = transform_G(pm, b);
    const Matrix expect = inverse_guarded(b.mat - kron(Matrix::Identity(2, 2), p));
    CHECK((g.mat - expect).norm() < 1e-12);
    CHECK((transform_h(pm, b).mat + kron(Matrix::Identity(2, 2), p)).norm() < 1e-12);

    const Law gamma = Law::semicircular(CPMap::identity(1));
    CHECK(std::abs(transform_G(gamma, point1(1i)).mat(0, 0) - semicircle_G(1i)) < 1e-11);
    CHECK(std::abs(semicircle_G(1i) - Complex(0, -0.6180339887)) < 1e-9);

    // G F = 1
    const AlgElem prod = transform_G(gamma, b.d == 1 ? b : point1(2i)) *
                         transform_F(gamma, b.d == 1 ? b : point1(2i));
    CHECK((prod.mat - Matrix::Identity(prod.dim(), prod.dim())).norm() < 1e-10);
}

TEST_CASE("invert_F on point masses and at critical values") {
    Rng rng(5);
    const Matrix a = rng.hermitian(2);
    const Law pm = Law::point_mass(0.1 * a);
    const AlgElem target = rng.half_plane_point(2, 1) +
                           AlgElem::scaled_identity(2, 1, 25.0i);
    const AlgElem w = invert_F(pm, target);
    CHECK((w.mat - (target.mat + kron(Matrix::Identity(1, 1), Matrix(0.1 * a)))).norm() < 1e-10);

    // F_Ber(i) = 2i is a critical value of F; the left inverse still resolves it
    const Law ber = Law::bernoulli(CPMap::identity(1));
    const AlgElem wber = invert_F(ber, point1(2i));
    CHECK(std::abs(wber.mat(0, 0) - 1i) < 1e-5);

    // F_gamma(i) = i phi is a regular point
    const Law gamma = Law::semicircular(CPMap::identity(1));
    const AlgElem wg = invert_F(gamma, point1(Complex(0, kPhi)));
    CHECK(std::abs(wg.mat(0, 0) - 1i) < 1e-10);
}

TEST_CASE("invert_F refuses bad targets") {
    const Law pm = Law::point_mass(scalar(5.0));
    CHECK_THROWS_AS((void)invert_F(pm, point1(0.5i)), OutsideInversionDomain);
    CHECK_THROWS_AS((void)invert_F(pm, point1(1.2i)), OutsideInversionDomain);
}

TEST_CASE("invert_F o F is the identity on its domain") {
    const Law gamma = Law::semicircular(CPMap::identity(1));
    const Law ber = Law::bernoulli(CPMap::identity(1));
    Rng rng(7);
    for (const Law& law : {gamma, ber, free_conv(ber, gamma)}) {
        for (int k = 0; k < 5; ++k) {
            const AlgElem b =
                rng.half_plane_point(1, 2) + AlgElem::scaled_identity(1, 2, 20.0i);
            const AlgElem w = invert_F(law, transform_F(law, b));
            CHECK((w.mat - b.mat).norm() < 1e-11 * 10);
        }
    }
}

TEST_CASE("voiculescu transform values and additivity") {
    Rng rng(9);
    const Matrix a = rng.hermitian(2);
    const Law pm = Law::point_mass(a);
    const AlgElem b = rng.half_plane_point(2, 2) + AlgElem::scaled_identity(2, 2, 30.0i);
    CHECK((voiculescu_phi(pm, b).mat - kron(Matrix::Identity(2, 2), a)).norm() < 1e-9);

    // phi_gamma(b) = s(b^{-1})
    const CPMap adk = CPMap::ad((Matrix(2, 2) << 1, 0, 0, 0.5).finished());
    const Law gamma = Law::semicircular(adk);
    const AlgElem big = rng.half_plane_point(2, 1) + AlgElem::scaled_identity(2, 1, 20.0i);
    CHECK((voiculescu_phi(gamma, big).mat - adk.apply(big.inverse()).mat).norm() < 1e-9);

    // additivity over free convolution
    const Law ber = Law::bernoulli(CPMap::identity(1));
    const Law gamma1 = Law::semicircular(CPMap::identity(1));
    const Law sum = free_conv(ber, gamma1);
    for (int k = 0; k < 10; ++k) {
        const AlgElem p = rng.half_plane_point(1, 1) + AlgElem::scaled_identity(1, 1, 30.0i);
        const AlgElem lhs = voiculescu_phi(sum, p);
        const AlgElem rhs = voiculescu_phi(ber, p) + voiculescu_phi(gamma1, p);
        CHECK((lhs.mat - rhs.mat).norm() < 1e-8);
    }

    // r_transform is phi at the reciprocal point
    const AlgElem c = point1(Complex(0.001, -0.04));
    CHECK((r_transform(gamma1, c).mat - voiculescu_phi(gamma1, c.inverse()).mat).norm() < 1e-12);
}

TEST_CASE("leaf moments: Bernoulli pairings and Catalan numbers") {
    const CPMap s = CPMap::ad((Matrix(2, 2) << 1, 0.3, 0, 0.7).finished());
    const Law ber = Law::bernoulli(s);
    Rng rng(11);
    const Matrix b = rng.gauss_matrix(2, 2);
    CHECK((leaf_moment(ber, std::vector<Matrix>{b}) - s.apply(b)).norm() < 1e-14);
    CHECK(leaf_moment(ber, std::vector<Matrix>{b, b}).norm() < 1e-14);  // odd moment

    const Law gamma = Law::semicircular(CPMap::identity(1));
    const Matrix one = Matrix::Identity(1, 1);
    const double catalan[] = {1, 0, 1, 0, 2, 0, 5, 0, 14};
    for (int order = 1; order <= 8; ++order) {
        const std::vector<Matrix> args(order - 1, one);
        CHECK(std::abs(leaf_moment(gamma, args)(0, 0) - catalan[order]) < 1e-12);
    }
}

TEST_CASE("density: Poisson kernel, semicircle and arcsine values") {
    const Matrix one = Matrix::Identity(1, 1);
    {
        const Law pm = Law::point_mass(scalar(0.0));
        const auto rho = density(pm, one, -0.05, 0.05, 3, 1e-2);
        CHECK(rho[1].t == doctest::Approx(0.0));
        CHECK(rho[1].rho == doctest::Approx(1.0 / (M_PI * 1e-2)).epsilon(1e-6));
    }
    {
        const Law gamma = Law::semicircular(CPMap::identity(1));
        const auto rho = density(gamma, one, -0.01, 0.01, 3, 1e-4);
        CHECK(std::abs(rho[1].rho - 1.0 / M_PI) < 5e-3);
    }
    {
        const Law arcsine = free_conv(Law::bernoulli(CPMap::identity(1)),
                                      Law::bernoulli(CPMap::identity(1)));
        const auto rho = density(arcsine, one, -0.01, 0.01, 3, 1e-4);
        CHECK(std::abs(rho[1].rho - 1.0 / (2.0 * M_PI)) < 5e-3);
    }
    {
        // the output is a (smoothed) density: nonnegative everywhere
        const Law mixed = boolean_conv(Law::atomic({-1.0, 2.0}, {0.25, 0.75}),
                                       Law::semicircular(CPMap::identity(1)));
        for (const auto& p : density(mixed, one, -4.0, 4.0, 41, 1e-3)) {
            REQUIRE(p.converged);
            CHECK(p.rho >= -1e-8);
        }
    }
}

TEST_CASE("transform evaluation rejects points off the half-plane") {
    const Law ber = Law::bernoulli(CPMap::identity(1));
    CHECK_THROWS_AS((void)transform_F(ber, point1(1.0)), NotInHalfPlane);
    CHECK_THROWS_AS((void)transform_F(ber, point1(-2i)), NotInHalfPlane);
}

TEST_CASE("first moments estimated from asymptotics") {
    const Law atomic = Law::atomic({0.0, 2.0}, {0.5, 0.5});
    CHECK(std::abs(atomic.first_moment()(0, 0) - 1.0) < 1e-3);
    const Law ber = Law::bernoulli(CPMap::identity(1));
    CHECK(atomic.first_moment().norm() > ber.first_moment().norm());
}

TEST_CASE("Im F dominates Im b across node kinds") {
    const Law ber = Law::bernoulli(CPMap::identity(1));
    const Law gamma = Law::semicircular(CPMap::identity(1));
    const std::vector<Law> laws{
        ber,
        gamma,
        boolean_conv(ber, gamma),
        monotone_conv(ber, gamma),
        orthogonal_conv(ber, gamma),
        free_conv(ber, gamma),
        sfree_conv(ber, gamma),
        boolean_power(ber, CPMap::scaled_identity(1, 0.5)),
        free_power(ber, CPMap::scaled_identity(1, 2.0)),
        b_transform(ber, CPMap::identity(1)),
        phi_transform(gamma),
    };
    Rng rng(13);
    for (const auto& law : laws)
        for (int k = 0; k < 5; ++k) {
            const AlgElem b = rng.half_plane_point(1, 2);
            const AlgElem f = transform_F(law, b);
            CHECK(herm_min_eig(f.imag_part() - b.imag_part()) >= -1e-9);
        }
}
