#include "ovconv/algebra.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/LU>
#include <Eigen/SVD>

#include <cmath>
#include <limits>

namespace ovconv {

AlgElem::AlgElem(int d_, int n_, Matrix m) : d(d_), n(n_), mat(std::move(m)) {
    if (d < 1 || n < 1) throw DimensionMismatch("AlgElem: d and n must be positive");
    if (mat.rows() != dim() || mat.cols() != dim())
        throw DimensionMismatch("AlgElem: matrix shape does not match n*d");
    if (!mat.allFinite()) throw InputError("AlgElem: entries must be finite");
}

AlgElem AlgElem::zero(int d, int n) {
    return AlgElem(d, n, Matrix::Zero(Index(d) * n, Index(d) * n));
}

AlgElem AlgElem::identity(int d, int n) {
    return AlgElem(d, n, Matrix::Identity(Index(d) * n, Index(d) * n));
}

AlgElem AlgElem::scaled_identity(int d, int n, Complex z) {
    return AlgElem(d, n, z * Matrix::Identity(Index(d) * n, Index(d) * n));
}

AlgElem AlgElem::amplified(const Matrix& x, int n) {
    if (x.rows() != x.cols()) throw DimensionMismatch("amplified: square matrix required");
    const int d = static_cast<int>(x.rows());
    return AlgElem(d, n, kron(Matrix::Identity(n, n), x));
}

AlgElem AlgElem::inverse() const { return AlgElem(d, n, inverse_guarded(mat)); }

Matrix AlgElem::imag_part() const { return (mat - mat.adjoint()) / Complex(0.0, 2.0); }

double AlgElem::imag_min_eig() const { return herm_min_eig(imag_part()); }

AlgElem AlgElem::operator+(const AlgElem& o) const {
    if (d != o.d || n != o.n) throw DimensionMismatch("AlgElem: mismatched operands");
    return AlgElem(d, n, mat + o.mat);
}

AlgElem AlgElem::operator-(const AlgElem& o) const {
    if (d != o.d || n != o.n) throw DimensionMismatch("AlgElem: mismatched operands");
    return AlgElem(d, n, mat - o.mat);
}

AlgElem AlgElem::operator*(const AlgElem& o) const {
    if (d != o.d || n != o.n) throw DimensionMismatch("AlgElem: mismatched operands");
    return AlgElem(d, n, mat * o.mat);
}

AlgElem AlgElem::direct_sum(const AlgElem& o) const {
    if (d != o.d) throw DimensionMismatch("direct_sum: base dimensions differ");
    AlgElem out = AlgElem::zero(d, n + o.n);
    out.mat.topLeftCorner(dim(), dim()) = mat;
    out.mat.bottomRightCorner(o.dim(), o.dim()) = o.mat;
    return out;
}

AlgElem AlgElem::conjugate_outer(const Matrix& s) const {
    if (s.rows() != n || s.cols() != n) throw DimensionMismatch("conjugate_outer: s must be n x n");
    const Matrix sd = kron(s, Matrix::Identity(d, d));
    return AlgElem(d, n, sd * mat * inverse_guarded(sd));
}

bool uhp_member(const AlgElem& b, double eps) {
    if (eps <= 0.0) throw InputError("uhp_member: eps must be positive");
    return b.imag_min_eig() >= eps;
}

Matrix kron(const Matrix& a, const Matrix& b) {
    Matrix out(a.rows() * b.rows(), a.cols() * b.cols());
    for (Index i = 0; i < a.rows(); ++i)
        for (Index j = 0; j < a.cols(); ++j)
            out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
    return out;
}

Matrix amplify_blocks(const Matrix& x, int n, int d) {
    if (x.rows() % d != 0 || x.cols() % d != 0)
        throw DimensionMismatch("amplify_blocks: shape not a multiple of d");
    const Index am = x.rows() / d, bm = x.cols() / d;
    Matrix out = Matrix::Zero(x.rows() * n, x.cols() * n);
    for (Index k = 0; k < am; ++k)
        for (Index kp = 0; kp < bm; ++kp) {
            const auto blk = x.block(k * d, kp * d, d, d);
            for (Index i = 0; i < n; ++i)
                out.block((k * n + i) * d, (kp * n + i) * d, d, d) = blk;
        }
    return out;
}

Matrix inverse_guarded(const Matrix& a, double rcond_floor) {
    if (a.rows() != a.cols()) throw DimensionMismatch("inverse_guarded: square matrix required");
    if (a.rows() == 0) return a;
    Eigen::PartialPivLU<Matrix> lu(a);
    // PartialPivLU::rcond() is unreliable for exactly singular input; the
    // pivot ratio is a sound cheap proxy for the reciprocal condition
    double dmin = std::numeric_limits<double>::infinity(), dmax = 0.0;
    for (Index i = 0; i < a.rows(); ++i) {
        const double u = std::abs(lu.matrixLU()(i, i));
        dmin = std::min(dmin, u);
        dmax = std::max(dmax, u);
    }
    if (!(dmax > 0.0) || !std::isfinite(dmax) || dmin / dmax <= rcond_floor)
        throw IllConditioned("matrix inverse: pivot ratio " + std::to_string(dmin / dmax));
    Matrix inv = lu.inverse();
    if (!inv.allFinite()) throw IllConditioned("matrix inverse: non-finite result");
    return inv;
}

Eigen::VectorXd herm_eigenvalues(const Matrix& h) {
    // symmetrize first so tiny asymmetries cannot leak into complex eigenvalues
    const Matrix hs = 0.5 * (h + h.adjoint());
    Eigen::SelfAdjointEigenSolver<Matrix> es(hs, Eigen::EigenvaluesOnly);
    return es.eigenvalues();
}

double herm_min_eig(const Matrix& h) {
    if (h.rows() == 0) return 0.0;
    return herm_eigenvalues(h).minCoeff();
}

Matrix herm_abs(const Matrix& h) {
    const Matrix hs = 0.5 * (h + h.adjoint());
    Eigen::SelfAdjointEigenSolver<Matrix> es(hs);
    return es.eigenvectors() * es.eigenvalues().cwiseAbs().asDiagonal() *
           es.eigenvectors().adjoint();
}

double operator_norm(const Matrix& a) {
    if (a.rows() == 0 || a.cols() == 0) return 0.0;
    Eigen::JacobiSVD<Matrix> svd(a);
    return svd.singularValues()(0);
}

bool is_hermitian(const Matrix& a, double tol) {
    return a.rows() == a.cols() && (a - a.adjoint()).cwiseAbs().maxCoeff() <= tol;
}

// ---- CPMap ----

CPMap::CPMap(int d, std::vector<Matrix> kraus, Matrix choi, CpFlag flag)
    : d_(d), kraus_(std::move(kraus)), choi_(std::move(choi)), flag_(flag) {}

CPMap CPMap::from_kraus(int d, std::vector<Matrix> kraus) {
    if (d < 1) throw DimensionMismatch("CPMap: d must be positive");
    if (kraus.empty()) throw InputError("CPMap: empty Kraus family");
    const Index n = d;
    Matrix choi = Matrix::Zero(n * n, n * n);
    for (const auto& k : kraus) {
        if (k.rows() != n || k.cols() != n)
            throw DimensionMismatch("CPMap: Kraus operator shape mismatch");
        // v[(i,k)] = K[k,i]; choi += v v*
        Eigen::VectorXcd v(n * n);
        for (Index i = 0; i < n; ++i)
            for (Index r = 0; r < n; ++r) v(i * n + r) = k(r, i);
        choi += v * v.adjoint();
    }
    CPMap out(d, std::move(kraus), std::move(choi), CpFlag::Verified);
    return out;
}

CPMap CPMap::from_choi(int d, const Matrix& choi) {
    if (d < 1) throw DimensionMismatch("CPMap: d must be positive");
    if (choi.rows() != Index(d) * d || choi.cols() != Index(d) * d)
        throw DimensionMismatch("CPMap: Choi matrix must be d^2 x d^2");
    if (!is_hermitian(choi))
        throw NotHermitian("CPMap: Choi matrix not Hermitian within 1e-12");
    CPMap out(d, {}, 0.5 * (choi + choi.adjoint()), CpFlag::Unverified);
    out.verify();
    if (out.flag_ == CpFlag::Verified) out.extract_kraus();
    return out;
}

CPMap CPMap::scaled_identity(int d, double t) {
    if (t < 0.0) throw NegativeScale("CPMap: negative identity multiple");
    Matrix k = std::sqrt(t) * Matrix::Identity(d, d);
    return from_kraus(d, {std::move(k)});
}

CPMap CPMap::ad(const Matrix& k) {
    if (k.rows() != k.cols()) throw DimensionMismatch("CPMap::ad: square matrix required");
    return from_kraus(static_cast<int>(k.rows()), {k});
}

CPMap CPMap::trace_mix(int d) {
    std::vector<Matrix> kraus;
    const double c = 1.0 / std::sqrt(double(d));
    for (Index i = 0; i < d; ++i)
        for (Index j = 0; j < d; ++j) {
            Matrix k = Matrix::Zero(d, d);
            k(i, j) = c;
            kraus.push_back(std::move(k));
        }
    return from_kraus(d, std::move(kraus));
}

CPMap CPMap::schur_multiplier(const Matrix& a) {
    if (a.rows() != a.cols()) throw DimensionMismatch("schur_multiplier: square matrix required");
    if (!is_hermitian(a)) throw NotHermitian("schur_multiplier: multiplier not Hermitian");
    const Index n = a.rows();
    Matrix choi = Matrix::Zero(n * n, n * n);
    for (Index i = 0; i < n; ++i)
        for (Index j = 0; j < n; ++j) choi(i * n + i, j * n + j) = a(i, j);
    return from_choi(static_cast<int>(n), choi);
}

CpFlag CPMap::verify() {
    const double lo = herm_min_eig(choi_);
    flag_ = (lo >= kPsdTol) ? CpFlag::Verified : CpFlag::NotCp;
    return flag_;
}

void CPMap::extract_kraus() {
    Eigen::SelfAdjointEigenSolver<Matrix> es(choi_);
    kraus_.clear();
    const Index n = d_;
    for (Index j = 0; j < es.eigenvalues().size(); ++j) {
        const double lam = es.eigenvalues()(j);
        if (lam <= 1e-14) continue;
        Matrix k(n, n);
        const auto v = es.eigenvectors().col(j);
        for (Index i = 0; i < n; ++i)
            for (Index r = 0; r < n; ++r) k(r, i) = std::sqrt(lam) * v(i * n + r);
        kraus_.push_back(std::move(k));
    }
    if (kraus_.empty()) kraus_.push_back(Matrix::Zero(n, n));  // zero map
}

Matrix CPMap::apply(const Matrix& b) const {
    if (b.rows() != d_ || b.cols() != d_) throw DimensionMismatch("CPMap::apply: shape mismatch");
    const Index n = d_;
    Matrix out = Matrix::Zero(n, n);
    if (!kraus_.empty()) {
        for (const auto& k : kraus_) out += k * b * k.adjoint();
        return out;
    }
    // generic linear action through the Choi matrix
    for (Index i = 0; i < n; ++i)
        for (Index j = 0; j < n; ++j)
            out += b(i, j) * choi_.block(i * n, j * n, n, n);
    return out;
}

AlgElem CPMap::apply(const AlgElem& b) const {
    if (b.d != d_) throw DimensionMismatch("CPMap::apply: base dimension mismatch");
    Matrix out(b.dim(), b.dim());
    for (Index i = 0; i < b.n; ++i)
        for (Index j = 0; j < b.n; ++j)
            out.block(i * d_, j * d_, d_, d_) = apply(b.mat.block(i * d_, j * d_, d_, d_));
    return AlgElem(b.d, b.n, std::move(out));
}

Matrix CPMap::transfer() const {
    const Index n = d_;
    Matrix m(n * n, n * n);
    for (Index i = 0; i < n; ++i)
        for (Index j = 0; j < n; ++j) {
            Matrix e = Matrix::Zero(n, n);
            e(i, j) = 1.0;
            const Matrix img = apply(e);
            for (Index r = 0; r < n; ++r)
                for (Index c = 0; c < n; ++c) m(r + c * n, i + j * n) = img(r, c);
        }
    return m;
}

CPMap CPMap::from_transfer(int d, const Matrix& m) {
    const Index n = d;
    Matrix choi(n * n, n * n);
    // choi[(i,k),(j,l)] = alpha(E_ij)[k,l] = m[(k + l n), (i + j n)]
    for (Index i = 0; i < n; ++i)
        for (Index j = 0; j < n; ++j)
            for (Index k = 0; k < n; ++k)
                for (Index l = 0; l < n; ++l)
                    choi(i * n + k, j * n + l) = m(k + l * n, i + j * n);
    if (!is_hermitian(choi, 1e-9))
        throw InputError("CPMap: transfer matrix is not Hermiticity-preserving");
    choi = 0.5 * (choi + choi.adjoint());
    CPMap out(d, {}, std::move(choi), CpFlag::Unverified);
    return out;
}

CPMap CPMap::inverse() const {
    const Matrix m = transfer();
    Eigen::JacobiSVD<Matrix> svd(m, Eigen::ComputeFullU | Eigen::ComputeFullV);
    const auto& sv = svd.singularValues();
    if (!(sv(0) > 0.0) || sv(sv.size() - 1) / sv(0) <= 1e-12)
        throw SingularExponent("CPMap::inverse: exponent condition number above 1e12");
    const Matrix inv =
        svd.matrixV() * sv.cwiseInverse().asDiagonal() * svd.matrixU().adjoint();
    return from_transfer(d_, inv);
}

CPMap CPMap::operator+(const CPMap& o) const {
    if (d_ != o.d_) throw DimensionMismatch("CPMap: base dimension mismatch");
    CPMap out(d_, {}, choi_ + o.choi_, CpFlag::Unverified);
    out.verify();
    if (out.flag_ == CpFlag::Verified) out.extract_kraus();
    return out;
}

CPMap CPMap::scaled(double t) const {
    if (t < 0.0) throw NegativeScale("CPMap::scaled: negative factor");
    CPMap out(d_, {}, t * choi_, CpFlag::Unverified);
    out.verify();
    if (out.flag_ == CpFlag::Verified) out.extract_kraus();
    return out;
}

CPMap CPMap::then(const CPMap& o) const {
    if (d_ != o.d_) throw DimensionMismatch("CPMap: base dimension mismatch");
    CPMap out = from_transfer(d_, o.transfer() * transfer());
    out.verify();
    if (out.flag_ == CpFlag::Verified) out.extract_kraus();
    return out;
}

CPMap cp_combine(CpCombine op, const CPMap& lhs, const CPMap& rhs) {
    switch (op) {
        case CpCombine::Add:
            return lhs + rhs;
        case CpCombine::Compose:
            return lhs.then(rhs);
        case CpCombine::Scale:
            throw InputError("cp_combine: Scale expects a real factor");
    }
    throw InputError("cp_combine: unknown op");
}

CPMap cp_combine(CpCombine op, const CPMap& lhs, double scale) {
    if (op != CpCombine::Scale) throw InputError("cp_combine: real factor only valid for Scale");
    return lhs.scaled(scale);
}

}  // namespace ovconv
