// Acceptance suite: one pass/fail line per criterion, exit code = number of
// failed criteria. Run through ctest or directly.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <iostream>
#include <string>
#include <vector>

#include "ovconv/combinatorics.hpp"
#include "ovconv/convolve.hpp"
#include "ovconv/fock.hpp"
#include "ovconv/transforms.hpp"
#include "ovconv/util.hpp"

using namespace ovconv;
using namespace std::complex_literals;

namespace {

int failures = 0;

void report(int criterion, const std::string& what, bool pass, const std::string& detail) {
    std::printf("[%s] %d. %s (%s)\n", pass ? "PASS" : "FAIL", criterion, what.c_str(),
                detail.c_str());
    if (!pass) ++failures;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::string fmt(double x) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.3g", x);
    return buf;
}

Matrix scalar(Complex z) { return Matrix::Constant(1, 1, z); }
AlgElem point1(Complex z) { return AlgElem(1, 1, scalar(z)); }

const double kPhi = (1.0 + std::sqrt(5.0)) / 2.0;

// criterion 1: the full identity suite at d in {1,2}, levels {1,2,3}
void criterion_identities() {
    const auto t0 = std::chrono::steady_clock::now();
    double worst_closed = 0.0, worst_fixed = 0.0;
    bool pass = true;
    std::string first_fail;
    for (int d : {1, 2}) {
        for (const auto& c : default_cases(d, {1, 2, 3}, 20, 42)) {
            const IdentityReport r = identity_check(c);
            (c.name == IdentityName::OrthDecomp ? worst_closed : worst_fixed) =
                std::max(c.name == IdentityName::OrthDecomp ? worst_closed : worst_fixed,
                         r.max_residual);
            if (!r.pass) {
                pass = false;
                if (first_fail.empty())
                    first_fail = identity_name(c.name) + "@d=" + std::to_string(d);
            }
        }
    }
    const double elapsed = seconds_since(t0);
    const bool in_time = elapsed < 300.0;
    report(1, "identity suites, d=1,2, levels 1-3, 20 samples", pass && in_time,
           "closed-form max " + fmt(worst_closed) + " <= 1e-8, fixed-point max " +
               fmt(worst_fixed) + " <= 1e-7, " + fmt(elapsed) + "s < 300s" +
               (first_fail.empty() ? "" : ", first failure " + first_fail));
}

void criterion_scalar_regressions() {
    const Law ber = Law::bernoulli(CPMap::identity(1));
    const Law gamma = Law::semicircular(CPMap::identity(1));

    const double r1 = std::abs(transform_F(ber, point1(1i)).mat(0, 0) - 2i);
    const double r2 =
        std::abs(transform_F(sfree_conv(ber, ber), point1(1i)).mat(0, 0) - Complex(0, kPhi));
    const double r3 = std::abs(transform_F(free_conv(ber, ber), point1(1i)).mat(0, 0) -
                               Complex(0, std::sqrt(5.0)));

    Rng rng(2042);
    double r4 = 0.0, r5 = 0.0;
    const Law pow2 = free_power(ber, CPMap::scaled_identity(1, 2.0));
    const Law conv2 = free_conv(ber, ber);
    const Law bp = b_transform(ber, CPMap::identity(1));
    for (int k = 0; k < 20; ++k) {
        const AlgElem b = rng.half_plane_point(1, 1 + (k % 2));
        r4 = std::max(r4, (transform_F(pow2, b) - transform_F(conv2, b)).norm());
        r5 = std::max(r5, (transform_F(bp, b) - transform_F(gamma, b)).norm());
    }
    const bool pass = r1 <= 1e-14 && r2 <= 1e-10 && r3 <= 1e-9 && r4 <= 1e-8 && r5 <= 1e-8;
    report(2, "scalar regressions: Ber, Ber sfree Ber, Ber boxplus Ber, powers, B_1", pass,
           "F_Ber(i)-2i " + fmt(r1) + ", sfree " + fmt(r2) + ", free " + fmt(r3) + ", power " +
               fmt(r4) + ", Bercovici-Pata " + fmt(r5));
}

void criterion_semicircular_solver() {
    const Law gamma = Law::semicircular(CPMap::identity(1));
    const Complex g_expect = Complex(0, -(std::sqrt(5.0) - 1.0) / 2.0);
    const double r1 = std::abs(transform_G(gamma, point1(1i)).mat(0, 0) - g_expect);

    const Law sum = free_conv(gamma, gamma);
    const Law gamma2 = Law::semicircular(CPMap::scaled_identity(1, 2.0));
    Rng rng(77);
    double r2 = 0.0;
    for (int level : {1, 2})
        for (int k = 0; k < 20; ++k) {
            const AlgElem b = rng.half_plane_point(1, level);
            r2 = std::max(r2, (transform_F(sum, b) - transform_F(gamma2, b)).norm());
        }
    report(3, "semicircular fixed-point solver", r1 <= 1e-10 && r2 <= 1e-8,
           "G(i) error " + fmt(r1) + " <= 1e-10, gamma+gamma vs gamma_2 " + fmt(r2) + " <= 1e-8");
}

void criterion_boolean_power_triangle() {
    const CPMap alpha = CPMap::ad((Matrix(2, 2) << 1, 0, 0, 0.5).finished());
    const Realization base = seeded_realization(2, 2, 90210);
    const Law closed = boolean_power(Law::realization_leaf(base), alpha);
    const Realization powered = boolean_power_realization(base, alpha);

    Rng rng(90211);
    double r_f = 0.0;
    for (int k = 0; k < 20; ++k) {
        const AlgElem b = rng.half_plane_point(2, 1 + (k % 3));
        r_f = std::max(r_f, (transform_F(closed, b) - powered.f_eval(b)).norm());
    }

    const BSeries cums = boolean_power_cumulants(
        moments_to_bcumulants(moment_series_of(base), 6, 2), alpha);
    const auto real_moments = moment_series_of(powered);
    double r_m = 0.0;
    for (int order = 1; order <= 6; ++order) {
        std::vector<Matrix> args;
        for (int s = 0; s < order - 1; ++s) args.push_back(rng.gauss_matrix(2, 2));
        r_m = std::max(
            r_m, (bcumulants_to_moments(cums, order, args) - real_moments(order, args)).norm());
    }
    report(4, "boolean-power consistency triangle at d=2", r_f <= 1e-10 && r_m <= 1e-10,
           "F routes " + fmt(r_f) + " <= 1e-10, moment routes " + fmt(r_m) + " <= 1e-10");
}

void criterion_fock_oracle() {
    bool pass = true;
    std::string detail;

    // arcsine moments from the FREE spec
    const Realization ber = Realization::bernoulli_scalar();
    const std::vector<JSpec> free_pair{JSpec::builtin(JSpec::Kind::Free),
                                       JSpec::builtin(JSpec::Kind::Free)};
    const std::vector<JSpec> bool_pair{JSpec::builtin(JSpec::Kind::Boolean),
                                       JSpec::builtin(JSpec::Kind::Boolean)};
    const FockSpace f1 = FockSpace::from_realizations({ber, ber}, 6);
    const double arcsine[] = {0, 2, 0, 6, 0, 20};
    double r_arc = 0.0;
    for (int k = 1; k <= 6; ++k) {
        const std::vector<Matrix> word(k + 1, Matrix::Identity(1, 1));
        r_arc = std::max(r_arc,
                         std::abs(f1.j_moment(free_pair, word)(0, 0) - arcsine[k - 1]));
    }
    pass = pass && r_arc <= 1e-12;
    detail += "arcsine " + fmt(r_arc);

    // Boolean spec vs cumulant reconstruction on random d=2 realizations
    const Realization a = seeded_realization(2, 2, 31337);
    const Realization b = seeded_realization(2, 2, 31338);
    const FockSpace f2 = FockSpace::from_realizations({a, b}, 6);
    BSeries sum(2, 6);
    {
        const BSeries ca = moments_to_bcumulants(moment_series_of(a), 6, 2);
        const BSeries cb = moments_to_bcumulants(moment_series_of(b), 6, 2);
        for (int order = 1; order <= 6; ++order) {
            std::vector<int> idx(order - 1, 0);
            while (true) {
                sum.entry(order, idx) = ca.entry(order, idx) + cb.entry(order, idx);
                int s = order - 2;
                for (; s >= 0; --s) {
                    if (++idx[s] < 4) break;
                    idx[s] = 0;
                }
                if (s < 0) break;
            }
        }
    }
    Rng rng(31339);
    double r_bool = 0.0;
    for (int order = 1; order <= 6; ++order) {
        std::vector<Matrix> args;
        for (int s = 0; s < order - 1; ++s) args.push_back(rng.gauss_matrix(2, 2));
        std::vector<Matrix> word;
        word.push_back(Matrix::Identity(2, 2));
        for (const auto& m : args) word.push_back(m);
        word.push_back(Matrix::Identity(2, 2));
        r_bool = std::max(r_bool, (f2.j_moment(bool_pair, word) -
                                   bcumulants_to_moments(sum, order, args))
                                      .norm());
    }
    pass = pass && r_bool <= 1e-10;
    detail += ", boolean " + fmt(r_bool);

    // truncation exactness L vs L+2
    const FockSpace f3 = FockSpace::from_realizations({a, b}, 8);
    double r_trunc = 0.0;
    for (int k = 1; k <= 6; ++k) {
        const std::vector<Matrix> word(k + 1, Matrix::Identity(2, 2));
        for (const auto& specs : {free_pair, bool_pair})
            r_trunc = std::max(
                r_trunc, (f2.j_moment(specs, word) - f3.j_moment(specs, word)).norm());
    }
    pass = pass && r_trunc <= 1e-12;
    detail += ", truncation " + fmt(r_trunc);

    // matricial extension for k=2 tuples
    Rng mrng(414243);
    auto herm = [&](int n) { return mrng.hermitian(n); };
    const JointRealization ja(1, 2, {herm(3), herm(3)});
    const JointRealization jb(1, 2, {herm(3), herm(3)});
    const FockSpace joint({ja, jb}, 4);
    const FockSpace embedded =
        FockSpace::from_realizations({diag_embed(ja), diag_embed(jb)}, 4);
    double r_mat = 0.0;
    for (const auto& specs : {free_pair, bool_pair}) {
        for (int order = 1; order <= 4; ++order) {
            std::vector<Matrix> w0(order + 1), w1(order + 1), big(order + 1);
            for (int t = 0; t <= order; ++t) {
                w0[t] = mrng.gauss_matrix(1, 1);
                w1[t] = mrng.gauss_matrix(1, 1);
                Matrix blk = Matrix::Zero(2, 2);
                blk(0, 0) = w0[t](0, 0);
                blk(1, 1) = w1[t](0, 0);
                big[t] = blk;
            }
            const std::vector<int> use0(order, 0), use1(order, 1);
            Matrix expect = Matrix::Zero(2, 2);
            expect(0, 0) = joint.j_moment(specs, w0, use0)(0, 0);
            expect(1, 1) = joint.j_moment(specs, w1, use1)(0, 0);
            r_mat = std::max(r_mat, (embedded.j_moment(specs, big) - expect).norm());
        }
    }
    pass = pass && r_mat <= 1e-12;
    detail += ", matricial " + fmt(r_mat);

    report(5, "Fock oracle: arcsine, boolean cumulants, truncation, matricial extension", pass,
           detail);
}

void criterion_fock_bridge() {
    double worst = 0.0;
    for (int d : {1, 2}) {
        const auto [r1, r2] =
            (d == 1) ? std::pair{Realization::bernoulli_scalar(),
                                 Realization::atomic_scalar({-1.0, 0.5, 1.0}, {0.3, 0.4, 0.3})}
                     : std::pair{seeded_realization(2, 1, 616), seeded_realization(2, 1, 617)};
        const Law l1 = Law::realization_leaf(r1), l2 = Law::realization_leaf(r2);
        const FockSpace fock = FockSpace::from_realizations({r1, r2}, 8);
        const AlgElem b = AlgElem::scaled_identity(d, 1, 20.0i);
        using K = JSpec::Kind;
        const std::vector<std::pair<std::vector<JSpec>, Law>> table{
            {{JSpec::builtin(K::MonotoneLow), JSpec::builtin(K::MonotoneHigh)},
             monotone_conv(l1, l2)},
            {{JSpec::builtin(K::Ortho1), JSpec::builtin(K::Ortho2)}, orthogonal_conv(l1, l2)},
            {{JSpec::builtin(K::SFree1), JSpec::builtin(K::SFree2)}, sfree_conv(l1, l2)},
            {{JSpec::builtin(K::Free), JSpec::builtin(K::Free)}, free_conv(l1, l2)},
        };
        for (const auto& [specs, law] : table) {
            const Realization compressed =
                fock.compress_to_realization(fock.convolution_operator(specs));
            worst = std::max(worst,
                             (compressed.f_eval(b).mat - transform_F(law, b).mat).norm());
        }
    }
    report(6, "Fock-transform bridge at L=8, b=20i", worst <= 1e-7,
           "max residual " + fmt(worst) + " <= 1e-7");
}

void criterion_density() {
    const Matrix one = Matrix::Identity(1, 1);
    SolverSettings settings;

    const auto t0 = std::chrono::steady_clock::now();
    const Law arcsine = free_conv(Law::bernoulli(CPMap::identity(1)),
                                  Law::bernoulli(CPMap::identity(1)));
    const auto rho_a = density(arcsine, one, -1.5, 1.5, 600, 1e-4, settings);
    const double t_arcsine = seconds_since(t0);
    double sup_a = 0.0;
    for (const auto& p : rho_a) {
        if (!p.converged) {
            sup_a = 1e9;
            break;
        }
        sup_a = std::max(sup_a, std::abs(p.rho - 1.0 / (M_PI * std::sqrt(4.0 - p.t * p.t))));
    }

    const auto t1 = std::chrono::steady_clock::now();
    const Law gamma = Law::semicircular(CPMap::identity(1));
    const auto rho_s = density(gamma, one, -1.5, 1.5, 600, 1e-4, settings);
    const double t_semi = seconds_since(t1);
    double sup_s = 0.0;
    for (const auto& p : rho_s) {
        if (!p.converged) {
            sup_s = 1e9;
            break;
        }
        sup_s = std::max(sup_s, std::abs(p.rho - std::sqrt(4.0 - p.t * p.t) / (2.0 * M_PI)));
    }
    const bool pass = sup_a <= 1e-2 && sup_s <= 1e-2 && t_arcsine < 30.0 && t_semi < 30.0;
    report(7, "densities on [-1.5,1.5], eps=1e-4, 600 points", pass,
           "arcsine sup " + fmt(sup_a) + " in " + fmt(t_arcsine) + "s, semicircle sup " +
               fmt(sup_s) + " in " + fmt(t_semi) + "s");
}

void criterion_compatibility() {
    using K = JSpec::Kind;
    const std::vector<std::vector<JSpec>> families{
        {JSpec::builtin(K::Free), JSpec::builtin(K::Free)},
        {JSpec::builtin(K::Boolean), JSpec::builtin(K::Boolean)},
        {JSpec::builtin(K::MonotoneLow), JSpec::builtin(K::MonotoneHigh)},
        {JSpec::builtin(K::Ortho1), JSpec::builtin(K::Ortho2)},
        {JSpec::builtin(K::SFree1), JSpec::builtin(K::SFree2)},
    };
    bool compat = true;
    for (const auto& fam : families) compat = compat && jspec_compatible(fam, 8);

    const Realization ber = Realization::bernoulli_scalar();
    const Realization atom = Realization::atomic_scalar({-1.0, 0.5, 1.0}, {0.3, 0.4, 0.3});
    const FockSpace fock = FockSpace::from_realizations({ber, atom}, 6);
    double worst = 0.0;
    for (const auto& fam : families)
        for (int i = 1; i <= 2; ++i) {
            const Matrix p = fock.projection(fam[i - 1], i);
            worst = std::max(worst, (p * fock.lambda(i) - fock.lambda(i) * p).norm());
        }

    const std::vector<JSpec> bad{JSpec::custom({Word{}}), JSpec::builtin(K::Free)};
    bool rejected = !jspec_compatible(bad, 6);
    try {
        (void)fock.j_operator(bad, 1);
        rejected = false;
    } catch (const IncompatibleSpec&) {
    }
    report(8, "builtin compatibility, commutators, incompatible rejection",
           compat && worst <= 1e-12 && rejected,
           "commutator max " + fmt(worst) + " <= 1e-12, custom spec rejected: " +
               (rejected ? "yes" : "no"));
}

void criterion_matricial_axioms() {
    double worst = 0.0;
    std::string worst_node;
    const SolverSettings settings;
    for (int d : {1, 2}) {
        const CPMap id = CPMap::identity(d);
        const Law ber = Law::bernoulli(id);
        const Law gamma = Law::semicircular(id);
        const Law leaf = (d == 1)
                             ? Law::realization_leaf(Realization::atomic_scalar(
                                   {-1.0, 1.0}, {0.5, 0.5}))
                             : Law::realization_leaf(seeded_realization(2, 2, 515));
        const CPMap grow =
            (d == 1) ? CPMap::scaled_identity(1, 2.0)
                     : shift_by_identity(CPMap::ad((Matrix(2, 2) << 1, 0, 0, 0.5).finished()),
                                         1.0);
        Matrix pm = Matrix::Zero(d, d);
        pm(0, 0) = 0.7;
        std::vector<std::pair<std::string, Law>> zoo{
            {"point_mass", Law::point_mass(pm)},
            {"realization", leaf},
            {"bernoulli", ber},
            {"semicircular", gamma},
            {"boolean", boolean_conv(ber, gamma)},
            {"monotone", monotone_conv(ber, leaf)},
            {"orthogonal", orthogonal_conv(ber, gamma)},
            {"free", free_conv(ber, gamma)},
            {"sfree", sfree_conv(ber, leaf)},
            {"boolean_power", boolean_power(ber, CPMap::scaled_identity(d, 0.5))},
            {"free_power", free_power(ber, grow)},
            {"b_transform", b_transform(ber, id)},
            {"phi", phi_transform(gamma)},
        };
        if (d == 1) zoo.emplace_back("atomic", Law::atomic({0.0, 2.0}, {0.5, 0.5}));

        // 50 samples across the node zoo: ~4 per node, direct sum + conjugation
        const int per_node = 4;
        for (const auto& [name, law] : zoo) {
            Rng rng(mix_seed(2026, std::hash<std::string>{}(name) + d));
            for (int k = 0; k < per_node; ++k) {
                const AlgElem b1 = rng.half_plane_point(d, 1);
                const AlgElem b2 = rng.half_plane_point(d, 2);
                const AlgElem whole = transform_F(law, b1.direct_sum(b2), settings);
                const AlgElem split = transform_F(law, b1, settings)
                                          .direct_sum(transform_F(law, b2, settings));
                double r = (whole - split).norm();

                const AlgElem b = rng.half_plane_point(d, 2);
                const Matrix g = rng.gauss_matrix(2, 2);
                for (double scale = 0.2; scale > 1e-3; scale *= 0.5) {
                    const Matrix s = Matrix::Identity(2, 2) + scale * g;
                    const AlgElem conj = b.conjugate_outer(s);
                    if (conj.imag_min_eig() < 1e-4) continue;
                    const AlgElem lhs = transform_F(law, conj, settings);
                    const AlgElem rhs = transform_F(law, b, settings).conjugate_outer(s);
                    r = std::max(r, (lhs - rhs).norm());
                    break;
                }
                if (r > worst) {
                    worst = r;
                    worst_node = name + "@d=" + std::to_string(d);
                }
            }
        }
    }
    report(9, "fully matricial axioms across all node kinds", worst <= 1e-9,
           "max residual " + fmt(worst) + " <= 1e-9, worst node " + worst_node);
}

}  // namespace

int main() {
    const auto t0 = std::chrono::steady_clock::now();
    criterion_identities();
    criterion_scalar_regressions();
    criterion_semicircular_solver();
    criterion_boolean_power_triangle();
    criterion_fock_oracle();
    criterion_fock_bridge();
    criterion_density();
    criterion_compatibility();
    criterion_matricial_axioms();
    std::printf("acceptance: %d of 9 criteria failed, total %.1fs\n", failures,
                seconds_since(t0));
    return failures;
}
