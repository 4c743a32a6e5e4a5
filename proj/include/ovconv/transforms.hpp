#pragma once

#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <vector>

#include "ovconv/algebra.hpp"
#include "ovconv/realization.hpp"

namespace ovconv {

// Fixed-point and inversion controls. Damping kicks in whenever a raw iterate
// leaves the half-plane; Anderson extrapolation is used on top of the plain
// iteration and falls back to damped steps when its candidate is inadmissible.
struct SolverSettings {
    double tol = 1e-12;           // relative fixed-point tolerance
    int max_iter = 10000;
    int max_iter_low_im = 100000; // when min eig of Im b < low_im_threshold
    double low_im_threshold = 1e-2;
    double damping = 0.5;
    double eps_min = 1e-6;        // half-plane slack required of inputs
    bool anderson = true;
    int anderson_depth = 3;
    // inversion admits targets with ||target^{-1}|| (1 + ||E[x]||) <= this cap;
    // 0.7 keeps the critical values F(i) of the variance-1 laws inside
    double inv_radius_scale = 0.7;
};

enum class LawKind {
    PointMass,
    Atomic,
    RealizationLeaf,
    Bernoulli,
    Semicircular,
    Boolean,
    Monotone,
    Orthogonal,
    Free,
    SFree,
    BooleanPower,
    FreePower,
    BTrans,
    Phi,
};

const char* law_kind_name(LawKind k);

// A composition tree of B-valued distributions with a well-defined matricial
// reciprocal Cauchy transform at every level. Immutable and cheap to copy.
class Law {
public:
    // leaves
    static Law point_mass(const Matrix& p);
    static Law atomic(std::vector<double> atoms, std::vector<double> weights);
    static Law realization_leaf(Realization r);
    static Law bernoulli(CPMap s);
    static Law semicircular(CPMap s);

    // internal factory used by the convolution constructors in convolve.hpp
    static Law make(LawKind kind, int d, std::vector<Law> children,
                    std::optional<Realization> real, std::optional<CPMap> cp,
                    std::optional<CPMap> cp_aux, std::string warning = {});

    LawKind kind() const;
    int d() const;
    std::size_t child_count() const;
    const Law& child(std::size_t i) const;
    bool has_realization() const;
    const Realization& realization() const;
    const CPMap& cp() const;      // variance / exponent attached to the node
    const CPMap& cp_aux() const;  // FreePower: eta = alpha - 1; BTrans: (1+s)^{-1}
    const std::string& warning() const;

    // E[x], estimated once from the large-y asymptotics of F and cached
    const Matrix& first_moment() const;
    // warnings collected over the whole tree
    std::vector<std::string> warnings() const;

private:
    struct Node;
    explicit Law(std::shared_ptr<const Node> n) : node_(std::move(n)) {}
    std::shared_ptr<const Node> node_;
};

// ---- evaluators ----

// matricial reciprocal Cauchy transform F_{law,n}(b)
AlgElem transform_F(const Law& law, const AlgElem& b, const SolverSettings& s = {});
// G = F^{-1} (matrix inverse of the value)
AlgElem transform_G(const Law& law, const AlgElem& b, const SolverSettings& s = {});
// h = F - id
AlgElem transform_h(const Law& law, const AlgElem& b, const SolverSettings& s = {});

// left inverse of F: returns w with F(w) = target, by the iteration
// w <- target - h(w). Requires Im target >= 1 and ||target^{-1}|| within the
// inversion radius; see SolverSettings::inv_radius_scale.
AlgElem invert_F(const Law& law, const AlgElem& target, const SolverSettings& s = {});
// phi(b) = F^{<-1>}(b) - b
AlgElem voiculescu_phi(const Law& law, const AlgElem& b, const SolverSettings& s = {});
// R(c) = phi(c^{-1})
AlgElem r_transform(const Law& law, const AlgElem& c, const SolverSettings& s = {});

// Exact B-valued moment E[x b1 x b2 ... b_{k-1} x] of a Bernoulli or
// semicircular leaf; args holds b1..b_{k-1}, so the order k is args.size()+1.
Matrix leaf_moment(const Law& leaf, std::span<const Matrix> args);

// Exact finite-dimensional model of a leaf, when one exists (realization-backed
// leaves and Bernoulli laws; semicircular laws have none).
std::optional<Realization> leaf_realization(const Law& law);

struct DensityPoint {
    double t = 0.0;
    double rho = 0.0;
    bool converged = true;
};

// rho(t) = -(1/pi) Im tr(state G(t + i eps)) on a uniform grid. Per-point
// solver failures are reported in the output, not thrown.
std::vector<DensityPoint> density(const Law& law, const Matrix& state, double t_min, double t_max,
                                  int steps, double epsilon, const SolverSettings& s = {});

// ---- solver building blocks (shared with convolve) ----

// Damped/accelerated fixed point for holomorphic self-maps of the half-plane.
// im_floor is the smallest admissible eigenvalue of Im w for safeguarding.
AlgElem solve_fixed_point(const std::function<AlgElem(const AlgElem&)>& map, AlgElem w0,
                          double im_floor, const SolverSettings& s);

}  // namespace ovconv
