#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>

#include "ovconv/transforms.hpp"

namespace ovconv {

// ---- convolution and transform constructors ----

// F = F_mu + F_nu - id
Law boolean_conv(const Law& mu, const Law& nu);
Law boolean_conv(std::vector<Law> parts);
// F = F_mu o F_nu
Law monotone_conv(const Law& mu, const Law& nu);
// F = F_mu o F_nu - F_nu + id
Law orthogonal_conv(const Law& mu, const Law& nu);
// s-free additive convolution mu boxright nu; F is the fixed point of
// w = b + h_mu(b + h_nu(w))
Law sfree_conv(const Law& mu, const Law& nu);
// free additive convolution, evaluated through subordination:
// F_{mu boxplus nu}(b) = F_mu(F_{nu boxright mu}(b))
Law free_conv(const Law& mu, const Law& nu);
// (omega1, omega2) with F_{mu boxplus nu} = F_mu(omega1) = F_nu(omega2)
//                                         = omega1 + omega2 - b
std::pair<AlgElem, AlgElem> subordination_pair(const Law& mu, const Law& nu, const AlgElem& b,
                                               const SolverSettings& s = {});
// mu^{uplus alpha}: F = alpha_n o F_mu + (1 - alpha_n). The formula is affine
// in alpha, so a non-CP exponent only records a warning on the node.
Law boolean_power(const Law& mu, const CPMap& alpha);
// mu^{boxplus alpha} through the subordination equation w = b + (alpha-1) h_mu(w);
// requires alpha - 1 verified-CP
Law free_power(const Law& mu, const CPMap& alpha);
// B_s(mu) = (mu^{boxplus(1+s)})^{uplus(1+s)^{-1}}; the inverse exponent is
// applied as a formal linear map and flagged when it fails the CP check
Law b_transform(const Law& mu, const CPMap& s);
// Phi(mu) = Ber |- mu, with the closed form F = b - G_mu(b)
Law phi_transform(const Law& mu);

// eta = alpha - 1 as a linear map with its CP flag
CPMap shift_by_identity(const CPMap& alpha, double shift);

// The exponents of the free/Boolean exchange relation:
//   q' = 1 - p + qp,   p' = qp (1 - p + qp)^{-1}   (qp applies p first).
// Requires p - 1 and q' invertible and completely positive; p' is returned
// with its CP flag computed.
std::pair<CPMap, CPMap> exchange_exponents(const CPMap& p, const CPMap& q);

// ---- identity-check harness over the named transform relations ----

enum class IdentityName {
    OrthSfree,      // mu |- (nu boxright mu) = mu boxright nu
    BerGamma,       // Ber_s |- gamma_s = gamma_s
    PhiGamma,       // gamma boxright mu = Phi(gamma boxplus mu)
    BbSemigroup,    // B_s(B_t(mu)) = B_{s+t}(mu)
    Exchange,       // (mu^{#p})^{u q} = (mu^{u q'})^{#p'}
    SfreeSelf,      // mu^{u s} boxright mu^{u s} = (B(mu))^{#s}
    FreeDistrib,    // (mu1 # mu2) boxright nu = (mu1 boxright nu) # (mu2 boxright nu)
    PowerDistrib,   // (mu boxright nu)^{#alpha} = mu^{#alpha} boxright nu
    Evolution,      // B_s(mu boxright nu) = mu boxright (mu^{#s} # nu)
    DecompMonotone, // mu2 |> (mu1 boxright mu2) = mu1 # mu2
    DecompBoolean,  // (mu1 boxright mu2) u (mu2 boxright mu1) = mu1 # mu2
    OrthDecomp,     // mu |> nu = nu u (mu |- nu)
    FinvPower,      // F^{<-1>}_{mu^{#s}} = s o F^{<-1>}_mu + (1-s)
    RSubord,        // R_{mu boxright nu}(b^{-1}) = R_mu(G_nu(b))
};

std::string identity_name(IdentityName n);
std::optional<IdentityName> identity_from_string(std::string_view s);
const std::vector<IdentityName>& all_identities();

struct IdentityCase {
    IdentityName name;
    int d = 1;
    std::map<std::string, Law> laws;
    std::map<std::string, CPMap> cpmaps;
    std::vector<int> levels{1, 2};
    int samples = 20;
    std::uint64_t seed = 42;
    double tol = 1e-7;
};

struct LevelResidual {
    int level = 1;
    double max_residual = 0.0;
};

struct IdentityReport {
    IdentityName name;
    int d = 1;
    std::vector<LevelResidual> residuals;
    double max_residual = 0.0;
    double tol = 0.0;
    bool pass = false;
    std::vector<std::string> warnings;
};

// Evaluates both sides of the named relation at seeded half-plane samples
// (Im >= 1, plus iy.1 for y in {1,5,20} per level; the two inversion-based
// relations are sampled in a neighborhood of infinity). Throws
// PreconditionViolated when the case's hypotheses fail.
IdentityReport identity_check(const IdentityCase& c, const SolverSettings& s = {});

// The built-in model zoo: one ready-to-run case per relation for d in {1, 2}.
std::vector<IdentityCase> default_cases(int d, std::vector<int> levels, int samples,
                                        std::uint64_t seed, std::optional<double> tol = {});

// Fixed seeded d x d realization with operator norm <= 2, used by the zoo and
// the oracle suites.
Realization seeded_realization(int d, int m, std::uint64_t seed, double norm_cap = 2.0);

}  // namespace ovconv
