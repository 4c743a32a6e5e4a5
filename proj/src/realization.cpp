#include "ovconv/realization.hpp"

#include <algorithm>
#include <cmath>
#include <map>

namespace ovconv {

Realization::Realization(int d, int m, Matrix p, Matrix alpha, Matrix t)
    : d_(d), m_(m), p_(std::move(p)), alpha_(std::move(alpha)), t_(std::move(t)) {
    if (d_ < 1 || m_ < 0) throw DimensionMismatch("Realization: bad dimensions");
    if (p_.rows() != d_ || p_.cols() != d_)
        throw DimensionMismatch("Realization: p must be d x d");
    if (m_ == 0) {
        if (alpha_.size() != 0 || t_.size() != 0)
            throw DimensionMismatch("Realization: m = 0 forces empty alpha and T");
    } else {
        if (alpha_.rows() != Index(m_) * d_ || alpha_.cols() != d_)
            throw DimensionMismatch("Realization: alpha must be (m d) x d");
        if (t_.rows() != Index(m_) * d_ || t_.cols() != Index(m_) * d_)
            throw DimensionMismatch("Realization: T must be (m d) x (m d)");
    }
    if (!is_hermitian(p_)) throw NotHermitian("Realization: p not Hermitian");
    if (m_ > 0 && !is_hermitian(t_)) throw NotHermitian("Realization: T not Hermitian");
    if (!p_.allFinite() || !alpha_.allFinite() || !t_.allFinite())
        throw InputError("Realization: entries must be finite");
}

Realization Realization::point_mass(const Matrix& p) {
    if (p.rows() != p.cols()) throw DimensionMismatch("point_mass: square matrix required");
    if (!is_hermitian(p)) throw NotHermitian("point_mass: p not Hermitian");
    const int d = static_cast<int>(p.rows());
    return Realization(d, 0, p, Matrix(0, 0), Matrix(0, 0));
}

Realization Realization::atomic_scalar(std::vector<double> atoms, std::vector<double> weights) {
    if (atoms.empty() || atoms.size() != weights.size())
        throw WeightsInvalid("atomic_scalar: atoms/weights size mismatch");
    // merge duplicate atoms, then validate the weights
    std::map<double, double> merged;
    for (std::size_t i = 0; i < atoms.size(); ++i) {
        if (weights[i] <= 0.0) throw WeightsInvalid("atomic_scalar: weights must be positive");
        bool found = false;
        for (auto& [t, w] : merged)
            if (std::abs(t - atoms[i]) < 1e-12) {
                w += weights[i];
                found = true;
                break;
            }
        if (!found) merged[atoms[i]] = weights[i];
    }
    double total = 0.0;
    for (auto& [t, w] : merged) total += w;
    if (std::abs(total - 1.0) > 1e-12)
        throw WeightsInvalid("atomic_scalar: weights must sum to 1");

    std::vector<double> ts, ws;
    for (auto& [t, w] : merged) {
        ts.push_back(t);
        ws.push_back(w);
    }
    const int k = static_cast<int>(ts.size());

    // Lanczos with full reorthogonalization on functions over the atoms,
    // inner product <f,g> = sum_j w_j conj(f_j) g_j, starting from 1.
    Eigen::MatrixXd q(k, k);                   // orthonormal basis vectors in columns
    Eigen::VectorXd diag(k), off(std::max(k - 1, 0));
    Eigen::VectorXd cur = Eigen::VectorXd::Ones(k);
    auto dot = [&](const Eigen::VectorXd& f, const Eigen::VectorXd& g) {
        double s = 0.0;
        for (int j = 0; j < k; ++j) s += ws[j] * f(j) * g(j);
        return s;
    };
    q.col(0) = cur / std::sqrt(dot(cur, cur));
    for (int j = 0; j < k; ++j) {
        Eigen::VectorXd v = q.col(j);
        for (int a = 0; a < k; ++a) v(a) *= ts[a];  // multiply by the variable
        diag(j) = dot(q.col(j), v);
        for (int it = 0; it < 2; ++it)  // full reorthogonalization, twice
            for (int p = 0; p <= j; ++p) v -= dot(q.col(p), v) * q.col(p);
        if (j + 1 < k) {
            const double nrm = std::sqrt(std::max(dot(v, v), 0.0));
            off(j) = nrm;
            q.col(j + 1) = v / nrm;
        }
    }

    Matrix p = Matrix::Zero(1, 1);
    p(0, 0) = diag(0);
    const int m = k - 1;
    Matrix alpha = Matrix::Zero(m, m == 0 ? 0 : 1);
    Matrix t = Matrix::Zero(m, m);
    if (m > 0) {
        alpha(0, 0) = off(0);
        for (int j = 0; j < m; ++j) {
            t(j, j) = diag(j + 1);
            if (j + 1 < m) {
                t(j, j + 1) = off(j + 1);
                t(j + 1, j) = off(j + 1);
            }
        }
    }
    return Realization(1, m, std::move(p), std::move(alpha), std::move(t));
}

Realization Realization::bernoulli(const CPMap& s) {
    if (!s.verified_cp() || !s.has_kraus())
        throw NotCompletelyPositive("bernoulli: variance must be verified-CP with Kraus form");
    const int d = s.dim();
    const int m = static_cast<int>(s.kraus().size());
    Matrix alpha(Index(m) * d, d);
    for (int j = 0; j < m; ++j) alpha.block(Index(j) * d, 0, d, d) = s.kraus()[j].adjoint();
    return Realization(d, m, Matrix::Zero(d, d), std::move(alpha),
                       Matrix::Zero(Index(m) * d, Index(m) * d));
}

Matrix Realization::full_operator() const {
    const Index nd = Index(1 + m_) * d_;
    Matrix x = Matrix::Zero(nd, nd);
    x.topLeftCorner(d_, d_) = p_;
    if (m_ > 0) {
        x.block(d_, 0, Index(m_) * d_, d_) = alpha_;
        x.block(0, d_, d_, Index(m_) * d_) = alpha_.adjoint();
        x.bottomRightCorner(Index(m_) * d_, Index(m_) * d_) = t_;
    }
    return x;
}

double Realization::operator_norm_bound() const { return operator_norm(full_operator()); }

AlgElem Realization::f_eval(const AlgElem& b, double eps) const {
    if (b.d != d_) throw DimensionMismatch("f_eval: base dimension mismatch");
    if (b.imag_min_eig() < eps) throw NotInHalfPlane("f_eval: point not in the upper half-plane");
    const int n = b.n;
    AlgElem out = b - AlgElem::amplified(p_, n);
    if (m_ == 0) return out;
    // (I_m (x) b  -  T amplified) on the level-n module, index order (leg, outer, inner)
    const Matrix lhs = kron(Matrix::Identity(m_, m_), b.mat) - amplify_blocks(t_, n, d_);
    const Matrix av = amplify_blocks(alpha_, n, d_);
    out.mat -= av.adjoint() * inverse_guarded(lhs) * av;
    return out;
}

Matrix Realization::moment(std::span<const Matrix> word) const {
    if (word.empty()) throw DimensionMismatch("moment: word must contain at least b0");
    const Index nd = Index(1 + m_) * d_;
    const Matrix x = full_operator();
    Matrix v = Matrix::Zero(nd, d_);
    v.topLeftCorner(d_, d_) = Matrix::Identity(d_, d_);  // xi
    for (std::size_t idx = word.size(); idx-- > 0;) {
        const Matrix& b = word[idx];
        if (b.rows() != d_ || b.cols() != d_) throw DimensionMismatch("moment: b must be d x d");
        v = kron(Matrix::Identity(1 + m_, 1 + m_), b) * v;
        if (idx > 0) v = x * v;
    }
    return v.topLeftCorner(d_, d_);
}

Matrix Realization::plain_moment(int k) const {
    std::vector<Matrix> word(k + 1, Matrix::Identity(d_, d_));
    return moment(word);
}

JointRealization::JointRealization(int d, int m, std::vector<Matrix> ops)
    : d_(d), m_(m), ops_(std::move(ops)) {
    if (ops_.empty()) throw DimensionMismatch("JointRealization: need at least one variable");
    const Index nd = Index(1 + m_) * d_;
    for (const auto& x : ops_) {
        if (x.rows() != nd || x.cols() != nd)
            throw DimensionMismatch("JointRealization: operator shape mismatch");
        if (!is_hermitian(x)) throw NotHermitian("JointRealization: operator not selfadjoint");
    }
}

JointRealization JointRealization::from_components(const std::vector<Realization>& comps) {
    if (comps.empty()) throw DimensionMismatch("JointRealization: empty component list");
    const int d = comps[0].d(), m = comps[0].m();
    std::vector<Matrix> ops;
    for (const auto& r : comps) {
        if (r.d() != d || r.m() != m)
            throw DimensionMismatch("JointRealization: components must share the module");
        ops.push_back(r.full_operator());
    }
    return JointRealization(d, m, std::move(ops));
}

Realization JointRealization::component(int l) const {
    const Matrix& x = ops_.at(l);
    return Realization(d_, m_, x.topLeftCorner(d_, d_), x.block(d_, 0, Index(m_) * d_, d_),
                       x.bottomRightCorner(Index(m_) * d_, Index(m_) * d_));
}

Matrix JointRealization::moment(std::span<const Matrix> word, std::span<const int> factors) const {
    if (word.size() != factors.size() + 1)
        throw DimensionMismatch("moment: word must have one more entry than factors");
    const Index nd = Index(1 + m_) * d_;
    Matrix v = Matrix::Zero(nd, d_);
    v.topLeftCorner(d_, d_) = Matrix::Identity(d_, d_);
    for (std::size_t idx = word.size(); idx-- > 0;) {
        const Matrix& b = word[idx];
        if (b.rows() != d_ || b.cols() != d_) throw DimensionMismatch("moment: b must be d x d");
        v = kron(Matrix::Identity(1 + m_, 1 + m_), b) * v;
        if (idx > 0) v = ops_.at(factors[idx - 1]) * v;
    }
    return v.topLeftCorner(d_, d_);
}

Realization diag_embed(const JointRealization& joint) {
    const int d = joint.d(), m = joint.m(), k = joint.k();
    const int dk = d * k;
    Matrix p = Matrix::Zero(dk, dk);
    Matrix alpha = Matrix::Zero(Index(m) * dk, m == 0 ? 0 : dk);
    Matrix t = Matrix::Zero(Index(m) * dk, Index(m) * dk);
    for (int l = 0; l < k; ++l) {
        const Realization c = joint.component(l);
        p.block(Index(l) * d, Index(l) * d, d, d) = c.p();
        for (int a = 0; a < m; ++a) {
            alpha.block((Index(a) * k + l) * d, Index(l) * d, d, d) =
                c.alpha_vec().block(Index(a) * d, 0, d, d);
            for (int b = 0; b < m; ++b)
                t.block((Index(a) * k + l) * d, (Index(b) * k + l) * d, d, d) =
                    c.t().block(Index(a) * d, Index(b) * d, d, d);
        }
    }
    return Realization(dk, m, std::move(p), std::move(alpha), std::move(t));
}

Realization boolean_power_realization(const Realization& r, const CPMap& alpha) {
    if (alpha.dim() != r.d())
        throw DimensionMismatch("boolean_power_realization: base dimension mismatch");
    if (!alpha.verified_cp() || !alpha.has_kraus())
        throw NotCompletelyPositive("boolean_power_realization: exponent must be verified-CP");
    const int d = r.d(), m = r.m();
    const int rank = static_cast<int>(alpha.kraus().size());
    const Matrix p_new = alpha.apply(r.p());
    if (m == 0) return Realization::point_mass(p_new);

    // Stinespring vector zeta = [K_1*; ...; K_r*]; the new module is
    // M° (x)_B H with leg order (M° leg, H leg), multiplicity m * rank.
    const int m_new = m * rank;
    Matrix a_new(Index(m_new) * d, d);
    for (int a = 0; a < m; ++a)
        for (int j = 0; j < rank; ++j)
            a_new.block((Index(a) * rank + j) * d, 0, d, d) =
                r.alpha_vec().block(Index(a) * d, 0, d, d) * alpha.kraus()[j].adjoint();
    // T acts on the M° leg only
    const Matrix t_new = amplify_blocks(r.t(), rank, d);
    return Realization(d, m_new, p_new, std::move(a_new), t_new);
}

}  // namespace ovconv
