#include "ovconv/convolve.hpp"

#include <algorithm>
#include <cmath>

#include "ovconv/util.hpp"

namespace ovconv {

namespace {

void require_same_d(const Law& a, const Law& b, const char* who) {
    if (a.d() != b.d()) throw DimensionMismatch(std::string(who) + ": base dimension mismatch");
}

}  // namespace

Law boolean_conv(const Law& mu, const Law& nu) { return boolean_conv(std::vector<Law>{mu, nu}); }

Law boolean_conv(std::vector<Law> parts) {
    if (parts.size() < 2) throw DimensionMismatch("boolean_conv: need at least two laws");
    const int d = parts[0].d();
    for (const auto& p : parts)
        if (p.d() != d) throw DimensionMismatch("boolean_conv: base dimension mismatch");
    return Law::make(LawKind::Boolean, d, std::move(parts), {}, {}, {});
}

Law monotone_conv(const Law& mu, const Law& nu) {
    require_same_d(mu, nu, "monotone_conv");
    return Law::make(LawKind::Monotone, mu.d(), {mu, nu}, {}, {}, {});
}

Law orthogonal_conv(const Law& mu, const Law& nu) {
    require_same_d(mu, nu, "orthogonal_conv");
    return Law::make(LawKind::Orthogonal, mu.d(), {mu, nu}, {}, {}, {});
}

Law sfree_conv(const Law& mu, const Law& nu) {
    require_same_d(mu, nu, "sfree_conv");
    return Law::make(LawKind::SFree, mu.d(), {mu, nu}, {}, {}, {});
}

Law free_conv(const Law& mu, const Law& nu) {
    require_same_d(mu, nu, "free_conv");
    return Law::make(LawKind::Free, mu.d(), {mu, nu}, {}, {}, {});
}

std::pair<AlgElem, AlgElem> subordination_pair(const Law& mu, const Law& nu, const AlgElem& b,
                                               const SolverSettings& s) {
    const AlgElem omega2 = transform_F(sfree_conv(mu, nu), b, s);
    const AlgElem omega1 = b + transform_h(nu, omega2, s);
    return {omega1, omega2};
}

Law boolean_power(const Law& mu, const CPMap& alpha) {
    if (alpha.dim() != mu.d()) throw DimensionMismatch("boolean_power: base dimension mismatch");
    std::string warn;
    if (!alpha.verified_cp())
        warn = "boolean_power: exponent failed the CP check; applied as a formal linear map";
    return Law::make(LawKind::BooleanPower, mu.d(), {mu}, {}, alpha, {}, std::move(warn));
}

CPMap shift_by_identity(const CPMap& alpha, double shift) {
    const Matrix choi_id = CPMap::identity(alpha.dim()).choi();
    return CPMap::from_choi(alpha.dim(), alpha.choi() + shift * choi_id);
}

Law free_power(const Law& mu, const CPMap& alpha) {
    if (alpha.dim() != mu.d()) throw DimensionMismatch("free_power: base dimension mismatch");
    CPMap eta = shift_by_identity(alpha, -1.0);
    if (!eta.verified_cp())
        throw NotCompletelyPositive("free_power: alpha - 1 must be completely positive");
    return Law::make(LawKind::FreePower, mu.d(), {mu}, {}, alpha, std::move(eta));
}

Law b_transform(const Law& mu, const CPMap& s) {
    if (s.dim() != mu.d()) throw DimensionMismatch("b_transform: base dimension mismatch");
    if (!s.verified_cp()) throw NotCompletelyPositive("b_transform: s must be completely positive");
    CPMap inv = shift_by_identity(s, 1.0).inverse();  // throws SingularExponent
    std::string warn;
    if (inv.verify() != CpFlag::Verified)
        warn = "b_transform: (1+s)^{-1} failed the CP check; applied as a formal linear map";
    return Law::make(LawKind::BTrans, mu.d(), {mu}, {}, s, std::move(inv), std::move(warn));
}

Law phi_transform(const Law& mu) {
    return Law::make(LawKind::Phi, mu.d(), {mu}, {}, {}, {});
}

std::pair<CPMap, CPMap> exchange_exponents(const CPMap& p, const CPMap& q) {
    if (p.dim() != q.dim()) throw DimensionMismatch("exchange_exponents: dimension mismatch");
    const int d = p.dim();
    const auto invertible = [](const CPMap& m) {
        try {
            (void)m.inverse();
            return true;
        } catch (const SingularExponent&) {
            return false;
        }
    };
    const CPMap p_minus_1 = shift_by_identity(p, -1.0);
    if (p_minus_1.flag() != CpFlag::Verified || !invertible(p_minus_1))
        throw PreconditionViolated(
            "exchange_exponents: p - 1 must be invertible and completely positive");
    const CPMap qp = p.then(q);
    CPMap q_prime = CPMap::from_choi(d, CPMap::identity(d).choi() - p.choi() + qp.choi());
    if (q_prime.flag() != CpFlag::Verified || !invertible(q_prime))
        throw PreconditionViolated(
            "exchange_exponents: 1 - p + qp must be invertible and completely positive");
    CPMap p_prime = q_prime.inverse().then(qp);
    p_prime.verify();
    return {std::move(p_prime), std::move(q_prime)};
}

// ---- identity harness ----

namespace {

struct NameEntry {
    IdentityName id;
    const char* name;
};

constexpr NameEntry kNames[] = {
    {IdentityName::OrthSfree, "ORTH_SFREE"},
    {IdentityName::BerGamma, "BER_GAMMA"},
    {IdentityName::PhiGamma, "PHI_GAMMA"},
    {IdentityName::BbSemigroup, "BB_SEMIGROUP"},
    {IdentityName::Exchange, "EXCHANGE"},
    {IdentityName::SfreeSelf, "SFREE_SELF"},
    {IdentityName::FreeDistrib, "FREE_DISTRIB"},
    {IdentityName::PowerDistrib, "POWER_DISTRIB"},
    {IdentityName::Evolution, "EVOLUTION"},
    {IdentityName::DecompMonotone, "DECOMP_MONOTONE"},
    {IdentityName::DecompBoolean, "DECOMP_BOOLEAN"},
    {IdentityName::OrthDecomp, "ORTH_DECOMP"},
    {IdentityName::FinvPower, "FINV_POWER"},
    {IdentityName::RSubord, "R_SUBORD"},
};

}  // namespace

std::string identity_name(IdentityName n) {
    for (const auto& e : kNames)
        if (e.id == n) return e.name;
    return "?";
}

std::optional<IdentityName> identity_from_string(std::string_view s) {
    for (const auto& e : kNames)
        if (s == e.name) return e.id;
    return std::nullopt;
}

const std::vector<IdentityName>& all_identities() {
    static const std::vector<IdentityName> all = [] {
        std::vector<IdentityName> v;
        for (const auto& e : kNames) v.push_back(e.id);
        return v;
    }();
    return all;
}

namespace {

const Law& named_law(const IdentityCase& c, const std::string& key) {
    auto it = c.laws.find(key);
    if (it == c.laws.end())
        throw PreconditionViolated(identity_name(c.name) + ": missing law '" + key + "'");
    return it->second;
}

const CPMap& named_cp(const IdentityCase& c, const std::string& key) {
    auto it = c.cpmaps.find(key);
    if (it == c.cpmaps.end())
        throw PreconditionViolated(identity_name(c.name) + ": missing cp map '" + key + "'");
    return it->second;
}

void require_cp(const IdentityCase& c, const CPMap& m, const std::string& what) {
    CPMap copy = m;
    if (copy.verify() != CpFlag::Verified)
        throw PreconditionViolated(identity_name(c.name) + ": " + what +
                                   " must be completely positive");
}

// Both sides of a relation as functions of the sample point.
struct CheckPlan {
    std::function<AlgElem(const AlgElem&, const SolverSettings&)> lhs, rhs;
    double imaginary_shift = 0.0;  // inversion-based relations live near infinity
    std::vector<std::string> warnings;
};

CheckPlan law_pair(const Law& lhs, const Law& rhs) {
    CheckPlan plan;
    plan.lhs = [lhs](const AlgElem& b, const SolverSettings& s) { return transform_F(lhs, b, s); };
    plan.rhs = [rhs](const AlgElem& b, const SolverSettings& s) { return transform_F(rhs, b, s); };
    for (auto& w : lhs.warnings()) plan.warnings.push_back(w);
    for (auto& w : rhs.warnings()) plan.warnings.push_back(w);
    return plan;
}

CheckPlan build_plan(const IdentityCase& c) {
    switch (c.name) {
        case IdentityName::OrthSfree: {
            const Law &mu = named_law(c, "mu"), &nu = named_law(c, "nu");
            return law_pair(orthogonal_conv(mu, sfree_conv(nu, mu)), sfree_conv(mu, nu));
        }
        case IdentityName::BerGamma: {
            const CPMap& s = named_cp(c, "s");
            require_cp(c, s, "variance s");
            const Law ber = Law::bernoulli(s), gam = Law::semicircular(s);
            return law_pair(orthogonal_conv(ber, gam), gam);
        }
        case IdentityName::PhiGamma: {
            const Law& mu = named_law(c, "mu");
            const Law gamma = Law::semicircular(CPMap::identity(c.d));
            return law_pair(sfree_conv(gamma, mu), phi_transform(free_conv(gamma, mu)));
        }
        case IdentityName::BbSemigroup: {
            const Law& mu = named_law(c, "mu");
            const CPMap &s = named_cp(c, "s"), &t = named_cp(c, "t");
            require_cp(c, s, "s");
            require_cp(c, t, "t");
            return law_pair(b_transform(b_transform(mu, t), s), b_transform(mu, s + t));
        }
        case IdentityName::Exchange: {
            const Law& mu = named_law(c, "mu");
            const CPMap &p = named_cp(c, "p"), &q = named_cp(c, "q");
            require_cp(c, p, "p");
            require_cp(c, q, "q");
            const auto [p_prime, q_prime] = exchange_exponents(p, q);
            return law_pair(boolean_power(free_power(mu, p), q),
                            free_power(boolean_power(mu, q_prime), p_prime));
        }
        case IdentityName::SfreeSelf: {
            const Law& mu = named_law(c, "mu");
            const CPMap& s = named_cp(c, "s");
            require_cp(c, s, "s");
            const Law up = boolean_power(mu, s);
            const Law bp = b_transform(mu, CPMap::identity(c.d));  // the Bercovici-Pata map
            return law_pair(sfree_conv(up, up), free_power(bp, s));
        }
        case IdentityName::FreeDistrib: {
            const Law &mu1 = named_law(c, "mu1"), &mu2 = named_law(c, "mu2");
            const Law& nu = named_law(c, "nu");
            return law_pair(sfree_conv(free_conv(mu1, mu2), nu),
                            free_conv(sfree_conv(mu1, nu), sfree_conv(mu2, nu)));
        }
        case IdentityName::PowerDistrib: {
            const Law &mu = named_law(c, "mu"), &nu = named_law(c, "nu");
            const CPMap& alpha = named_cp(c, "alpha");
            return law_pair(free_power(sfree_conv(mu, nu), alpha),
                            sfree_conv(free_power(mu, alpha), nu));
        }
        case IdentityName::Evolution: {
            const Law &mu = named_law(c, "mu"), &nu = named_law(c, "nu");
            const CPMap& s = named_cp(c, "s");
            require_cp(c, s, "s");
            return law_pair(b_transform(sfree_conv(mu, nu), s),
                            sfree_conv(mu, free_conv(free_power(mu, s), nu)));
        }
        case IdentityName::DecompMonotone: {
            const Law &mu1 = named_law(c, "mu1"), &mu2 = named_law(c, "mu2");
            return law_pair(monotone_conv(mu2, sfree_conv(mu1, mu2)), free_conv(mu1, mu2));
        }
        case IdentityName::DecompBoolean: {
            const Law &mu1 = named_law(c, "mu1"), &mu2 = named_law(c, "mu2");
            return law_pair(boolean_conv(sfree_conv(mu1, mu2), sfree_conv(mu2, mu1)),
                            free_conv(mu1, mu2));
        }
        case IdentityName::OrthDecomp: {
            const Law &mu = named_law(c, "mu"), &nu = named_law(c, "nu");
            return law_pair(monotone_conv(mu, nu), boolean_conv(nu, orthogonal_conv(mu, nu)));
        }
        case IdentityName::FinvPower: {
            const Law& mu = named_law(c, "mu");
            const CPMap& s = named_cp(c, "s");
            require_cp(c, s, "s");
            const Law power = free_power(mu, s);
            CheckPlan plan;
            plan.imaginary_shift = 24.0;
            plan.lhs = [power](const AlgElem& b, const SolverSettings& set) {
                return invert_F(power, b, set);
            };
            plan.rhs = [mu, s](const AlgElem& b, const SolverSettings& set) {
                return s.apply(invert_F(mu, b, set)) + b - s.apply(b);
            };
            return plan;
        }
        case IdentityName::RSubord: {
            const Law &mu = named_law(c, "mu"), &nu = named_law(c, "nu");
            const Law sub = sfree_conv(mu, nu);
            CheckPlan plan;
            plan.imaginary_shift = 24.0;
            plan.lhs = [sub](const AlgElem& b, const SolverSettings& set) {
                return voiculescu_phi(sub, b, set);
            };
            plan.rhs = [mu, nu](const AlgElem& b, const SolverSettings& set) {
                const AlgElem fn = transform_F(nu, b, set);
                return invert_F(mu, fn, set) - fn;
            };
            return plan;
        }
    }
    throw PreconditionViolated("identity_check: unknown case");
}

}  // namespace

IdentityReport identity_check(const IdentityCase& c, const SolverSettings& s) {
    const CheckPlan plan = build_plan(c);
    IdentityReport report;
    report.name = c.name;
    report.d = c.d;
    report.tol = c.tol;
    report.warnings = plan.warnings;

    for (std::size_t li = 0; li < c.levels.size(); ++li) {
        const int level = c.levels[li];
        Rng rng(mix_seed(c.seed, 977 * std::uint64_t(level) + 131 * li));
        std::vector<AlgElem> points;
        for (double y : {1.0, 5.0, 20.0})
            points.push_back(AlgElem::scaled_identity(c.d, level, Complex(0, y)));
        for (int k = 0; k < c.samples; ++k) points.push_back(rng.half_plane_point(c.d, level));
        if (plan.imaginary_shift > 0.0)
            for (auto& b : points)
                b = b + AlgElem::scaled_identity(c.d, level, Complex(0, plan.imaginary_shift));

        std::vector<double> residuals(points.size(), 0.0);
        parallel_for(points.size(), [&](std::size_t i) {
            residuals[i] = (plan.lhs(points[i], s) - plan.rhs(points[i], s)).norm();
        });
        LevelResidual lr;
        lr.level = level;
        lr.max_residual = *std::max_element(residuals.begin(), residuals.end());
        report.residuals.push_back(lr);
    }
    report.max_residual = 0.0;
    for (const auto& lr : report.residuals)
        report.max_residual = std::max(report.max_residual, lr.max_residual);
    report.pass = report.max_residual <= c.tol;
    return report;
}

Realization seeded_realization(int d, int m, std::uint64_t seed, double norm_cap) {
    Rng rng(mix_seed(seed, 0x5eedULL));
    const Matrix p = rng.hermitian(d);
    const Matrix alpha = rng.gauss_matrix(Index(m) * d, d);
    const Matrix t = rng.hermitian(Index(m) * d);
    Realization raw(d, m, p, alpha, t);
    const double nrm = raw.operator_norm_bound();
    const double c = (nrm > 0.0) ? 0.95 * norm_cap / nrm : 1.0;
    return Realization(d, m, c * p, c * alpha, c * t);
}

std::vector<IdentityCase> default_cases(int d, std::vector<int> levels, int samples,
                                        std::uint64_t seed, std::optional<double> tol) {
    if (d != 1 && d != 2)
        throw InputError("default_cases: the built-in zoo covers d = 1 and d = 2");

    const CPMap id = CPMap::identity(d);
    Law ber = Law::bernoulli(id);
    Law gamma = Law::semicircular(id);
    Law small_law = (d == 1) ? Law::atomic({0.0, 2.0}, {0.5, 0.5})
                             : Law::realization_leaf(seeded_realization(d, 2, seed));
    Law delta = (d == 1) ? Law::point_mass(Matrix::Ones(1, 1))
                         : Law::point_mass((Matrix(2, 2) << 0.8, 0, 0, -0.4).finished());

    CPMap s_case = id, t_case = id, p_case = id, q_case = id, alpha_case = id;
    if (d == 1) {
        s_case = CPMap::scaled_identity(1, 1.0);
        t_case = CPMap::scaled_identity(1, 0.5);
        p_case = CPMap::scaled_identity(1, 2.0);
        q_case = CPMap::scaled_identity(1, 0.75);
        alpha_case = CPMap::scaled_identity(1, 2.0);
    } else {
        const CPMap adk = CPMap::ad((Matrix(2, 2) << 1.0, 0, 0, 0.5).finished());
        s_case = adk;
        t_case = CPMap::trace_mix(2);
        p_case = shift_by_identity(adk, 1.0);
        // entrywise (1/2 + k_i k_j)/(1 + k_i k_j): CP, and q p = 1/2 + Ad_K, so
        // q' = 1/2 and p' - 1 = 2 Ad_K satisfy the exchange hypotheses
        Matrix mult(2, 2);
        for (int i = 0; i < 2; ++i)
            for (int j = 0; j < 2; ++j) {
                const double k = std::pow(0.5, i + j);  // k_i k_j for K = diag(1, 1/2)
                mult(i, j) = (0.5 + k) / (1.0 + k);
            }
        q_case = CPMap::schur_multiplier(mult);
        alpha_case = shift_by_identity(adk, 1.0);
    }
    // exponents of the power relations must satisfy s - 1 completely positive
    const CPMap s_power = (d == 1) ? CPMap::scaled_identity(1, 2.0) : alpha_case;
    const CPMap s_evolution = (d == 1) ? CPMap::scaled_identity(1, 1.5) : alpha_case;

    auto base = [&](IdentityName name) {
        IdentityCase c;
        c.name = name;
        c.d = d;
        c.levels = levels;
        c.samples = samples;
        c.seed = mix_seed(seed, static_cast<std::uint64_t>(name));
        c.tol = tol.value_or(name == IdentityName::OrthDecomp ? 1e-8 : 1e-7);
        return c;
    };

    std::vector<IdentityCase> cases;
    {
        auto c = base(IdentityName::OrthSfree);
        c.laws = {{"mu", ber}, {"nu", gamma}};
        cases.push_back(std::move(c));
    }
    {
        auto c = base(IdentityName::BerGamma);
        c.cpmaps = {{"s", s_case}};
        cases.push_back(std::move(c));
    }
    {
        auto c = base(IdentityName::PhiGamma);
        c.laws = {{"mu", small_law}};
        cases.push_back(std::move(c));
    }
    {
        auto c = base(IdentityName::BbSemigroup);
        c.laws = {{"mu", ber}};
        c.cpmaps = {{"s", s_case}, {"t", t_case}};
        cases.push_back(std::move(c));
    }
    {
        auto c = base(IdentityName::Exchange);
        c.laws = {{"mu", ber}};
        c.cpmaps = {{"p", p_case}, {"q", q_case}};
        cases.push_back(std::move(c));
    }
    {
        auto c = base(IdentityName::SfreeSelf);
        c.laws = {{"mu", ber}};
        c.cpmaps = {{"s", s_power}};
        cases.push_back(std::move(c));
    }
    {
        auto c = base(IdentityName::FreeDistrib);
        c.laws = {{"mu1", ber}, {"mu2", small_law}, {"nu", gamma}};
        cases.push_back(std::move(c));
    }
    {
        auto c = base(IdentityName::PowerDistrib);
        c.laws = {{"mu", ber}, {"nu", gamma}};
        c.cpmaps = {{"alpha", alpha_case}};
        cases.push_back(std::move(c));
    }
    {
        auto c = base(IdentityName::Evolution);
        c.laws = {{"mu", ber}, {"nu", small_law}};
        c.cpmaps = {{"s", s_evolution}};
        cases.push_back(std::move(c));
    }
    {
        auto c = base(IdentityName::DecompMonotone);
        c.laws = {{"mu1", ber}, {"mu2", gamma}};
        cases.push_back(std::move(c));
    }
    {
        auto c = base(IdentityName::DecompBoolean);
        c.laws = {{"mu1", ber}, {"mu2", small_law}};
        cases.push_back(std::move(c));
    }
    {
        auto c = base(IdentityName::OrthDecomp);
        c.laws = {{"mu", ber}, {"nu", delta}};
        cases.push_back(std::move(c));
    }
    {
        auto c = base(IdentityName::FinvPower);
        c.laws = {{"mu", ber}};
        c.cpmaps = {{"s", s_power}};
        cases.push_back(std::move(c));
    }
    {
        auto c = base(IdentityName::RSubord);
        c.laws = {{"mu", ber}, {"nu", small_law}};
        cases.push_back(std::move(c));
    }
    return cases;
}

}  // namespace ovconv
