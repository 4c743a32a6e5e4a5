#pragma once

#include <complex>
#include <optional>
#include <vector>

#include <Eigen/Dense>

#include "ovconv/errors.hpp"

namespace ovconv {

using Complex = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using Eigen::Index;

constexpr double kHermTol = 1e-12;     // Hermiticity slack for stored data
constexpr double kPsdTol = -1e-10;     // eigenvalue floor for CP verification
constexpr double kRcondFloor = 1e-14;  // reciprocal-condition guard for inversion

// An element of B (x) M_n(C) with B = M_d(C), stored as an (n*d)x(n*d) matrix
// of n x n outer blocks, each block d x d. The level-n amplification of a fixed
// d x d operator X is kron(I_n, X) in this layout.
struct AlgElem {
    int d = 1;
    int n = 1;
    Matrix mat;

    AlgElem() = default;
    AlgElem(int d_, int n_, Matrix m);

    Index dim() const { return static_cast<Index>(d) * n; }

    static AlgElem zero(int d, int n);
    static AlgElem identity(int d, int n);
    // z * 1_n
    static AlgElem scaled_identity(int d, int n, Complex z);
    // level-n amplification kron(I_n, x) of a d x d matrix
    static AlgElem amplified(const Matrix& x, int n);

    AlgElem adjoint() const { return AlgElem(d, n, mat.adjoint()); }
    // guarded matrix inverse; throws IllConditioned
    AlgElem inverse() const;
    // Hermitian part of (mat - mat*)/(2i)
    Matrix imag_part() const;
    // smallest eigenvalue of imag_part()
    double imag_min_eig() const;
    double norm() const { return mat.norm(); }

    AlgElem operator+(const AlgElem& o) const;
    AlgElem operator-(const AlgElem& o) const;
    AlgElem operator*(const AlgElem& o) const;
    AlgElem operator*(Complex z) const { return AlgElem(d, n, mat * z); }
    friend AlgElem operator*(Complex z, const AlgElem& a) { return a * z; }

    // direct sum along the outer (level) index
    AlgElem direct_sum(const AlgElem& o) const;
    // conjugation by s (x) 1_d for s in GL_n
    AlgElem conjugate_outer(const Matrix& s) const;
};

// true iff (b - b*)/(2i) >= eps * 1
bool uhp_member(const AlgElem& b, double eps);

// ---- dense helpers shared across modules ----

Matrix kron(const Matrix& a, const Matrix& b);

// Reindexed amplification for blocked operators. X maps a module with row index
// (k in [a_mult], r in [d]) to one with (k' in [b_mult], r'); the result acts on
// the level-n layout (k, i in [n], r) and is diagonal in i:
//   Y[(k,i,r), (k',j,c)] = delta_{ij} X[(k,r), (k',c)].
// With a_mult = b_mult = 1 this is kron(I_n, X).
Matrix amplify_blocks(const Matrix& x, int n, int d);

// inverse with reciprocal-condition guard (PartialPivLU)
Matrix inverse_guarded(const Matrix& a, double rcond_floor = kRcondFloor);

// eigenvalues of a (numerically) Hermitian matrix, ascending
Eigen::VectorXd herm_eigenvalues(const Matrix& h);
double herm_min_eig(const Matrix& h);
// |H| = sqrt(H^2) through the eigendecomposition
Matrix herm_abs(const Matrix& h);
// largest singular value
double operator_norm(const Matrix& a);
bool is_hermitian(const Matrix& a, double tol = kHermTol);

// ---- completely positive maps ----

enum class CpFlag { Verified, NotCp, Unverified };

// A linear, Hermiticity-preserving map on M_d(C), held jointly as a Choi matrix
// (and Kraus family when one exists). Houses the exponents alpha, eta, s, p, q
// of the convolution powers.
class CPMap {
public:
    // Choi convention: C[(i,k),(j,l)] = alpha(E_ij)[k,l]; alpha is CP iff C is PSD.
    static CPMap from_kraus(int d, std::vector<Matrix> kraus);
    static CPMap from_choi(int d, const Matrix& choi);
    // multiple of the identity map (t >= 0 gives a CP map)
    static CPMap scaled_identity(int d, double t);
    static CPMap identity(int d) { return scaled_identity(d, 1.0); }
    // b -> k b k*
    static CPMap ad(const Matrix& k);
    // b -> tr(b)/d * 1
    static CPMap trace_mix(int d);
    // entrywise multiplier b -> a (hadamard) b; CP iff a is PSD
    static CPMap schur_multiplier(const Matrix& a);

    int dim() const { return d_; }
    const Matrix& choi() const { return choi_; }
    const std::vector<Matrix>& kraus() const { return kraus_; }
    bool has_kraus() const { return !kraus_.empty(); }
    CpFlag flag() const { return flag_; }
    bool verified_cp() const { return flag_ == CpFlag::Verified; }
    // check the Choi spectrum now (idempotent); returns the updated flag
    CpFlag verify();

    // action on a d x d matrix
    Matrix apply(const Matrix& b) const;
    // amplification alpha_n = alpha (x) I_n, applied blockwise
    AlgElem apply(const AlgElem& b) const;

    // d^2 x d^2 transfer matrix: vec(alpha(b)) = transfer() * vec(b), column-major vec
    Matrix transfer() const;
    // linear inverse; flag left Unverified. Throws SingularExponent.
    CPMap inverse() const;

    CPMap operator+(const CPMap& o) const;
    // nonnegative real scaling; throws NegativeScale
    CPMap scaled(double t) const;
    // this map applied first, o second: b -> o(this(b))
    CPMap then(const CPMap& o) const;

private:
    CPMap(int d, std::vector<Matrix> kraus, Matrix choi, CpFlag flag);
    static CPMap from_transfer(int d, const Matrix& m);
    void extract_kraus();

    int d_ = 1;
    std::vector<Matrix> kraus_;
    Matrix choi_;
    CpFlag flag_ = CpFlag::Unverified;
};

enum class CpCombine { Add, Compose, Scale };

// Spec-facing combiner. Compose applies lhs first, then rhs, so
// cp_combine(Compose, Ad_K, Ad_K') acts as b -> K'K b (K'K)*.
CPMap cp_combine(CpCombine op, const CPMap& lhs, const CPMap& rhs);
CPMap cp_combine(CpCombine op, const CPMap& lhs, double scale);

}  // namespace ovconv
