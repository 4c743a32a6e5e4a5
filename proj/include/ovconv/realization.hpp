#pragma once

#include <span>
#include <vector>

#include "ovconv/algebra.hpp"

namespace ovconv {

// Finite-dimensional model of a B-valued random variable on B.xi (+) M°.
// M° is realized as (m*d) x d complex matrices with right action by right
// multiplication and left action of b by kron(I_m, b); the inner product is
// <u, v> = u* v. The variable is the block operator
//     x = [ p      alpha* ]
//         [ alpha  T      ]
// acting by left multiplication on the (1+m)*d row module, and
//     F(b) = b - p - alpha* (b - T)^{-1} alpha
// by Schur complement.
class Realization {
public:
    Realization(int d, int m, Matrix p, Matrix alpha, Matrix t);

    // m = 0 model of delta_p; p must be Hermitian
    static Realization point_mass(const Matrix& p);
    // d = 1 model of a finite atomic measure, built by the Stieltjes/Lanczos
    // procedure on exact moments; atoms closer than 1e-12 are merged
    static Realization atomic_scalar(std::vector<double> atoms, std::vector<double> weights);
    // the +/-1 symmetric Bernoulli at d = 1 (variance 1)
    static Realization bernoulli_scalar() { return atomic_scalar({-1.0, 1.0}, {0.5, 0.5}); }
    // B-valued Bernoulli law of variance s (Kraus form required)
    static Realization bernoulli(const CPMap& s);

    int d() const { return d_; }
    int m() const { return m_; }
    const Matrix& p() const { return p_; }
    const Matrix& alpha_vec() const { return alpha_; }
    const Matrix& t() const { return t_; }
    // assembled (1+m)d square operator
    Matrix full_operator() const;
    double operator_norm_bound() const;

    // F_{mu,n}(b) for b at any matricial level n; throws NotInHalfPlane
    AlgElem f_eval(const AlgElem& b, double eps = 1e-12) const;

    // E[b0 x b1 x ... x b_{k-1} x b_k] with k factors of x (word.size() = k+1);
    // all b_i are d x d
    Matrix moment(std::span<const Matrix> word) const;
    // E[x^k]
    Matrix plain_moment(int k) const;

private:
    int d_, m_;
    Matrix p_, alpha_, t_;
};

// A k-tuple of selfadjoint variables sharing one module B.xi (+) M°.
class JointRealization {
public:
    JointRealization(int d, int m, std::vector<Matrix> ops);
    static JointRealization from_components(const std::vector<Realization>& comps);

    int d() const { return d_; }
    int m() const { return m_; }
    int k() const { return static_cast<int>(ops_.size()); }
    const Matrix& op(int l) const { return ops_.at(l); }
    // the l-th variable as a standalone realization (same module)
    Realization component(int l) const;

    // E[b0 x_{l_1} b1 x_{l_2} ... x_{l_k} b_k]; word.size() = k+1, factors.size() = k
    Matrix moment(std::span<const Matrix> word, std::span<const int> factors) const;

private:
    int d_, m_;
    std::vector<Matrix> ops_;
};

// Realization of X = sum_l x_l (x) e(l,l) over the enlarged base B (x) M_k,
// stored with outer index k, inner index d (base dimension d*k).
Realization diag_embed(const JointRealization& joint);

// The Boolean convolution power mu^{(+) alpha} of the modeled law: the module
// becomes B.xi (+) M° (x) H with H the Stinespring bimodule of alpha, so the
// multiplicity is m * rank(alpha). Requires alpha verified-CP with Kraus form.
Realization boolean_power_realization(const Realization& r, const CPMap& alpha);

}  // namespace ovconv
