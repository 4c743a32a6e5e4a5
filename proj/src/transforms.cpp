#include "ovconv/transforms.hpp"

#include <cmath>
#include <deque>
#include <mutex>

#include "ovconv/util.hpp"

namespace ovconv {

struct Law::Node {
    LawKind kind;
    int d = 1;
    std::vector<Law> children;
    std::optional<Realization> real;
    std::optional<CPMap> cp;
    std::optional<CPMap> cp_aux;
    std::string warning;

    mutable std::once_flag moment_once;
    mutable Matrix first_moment;
};

const char* law_kind_name(LawKind k) {
    switch (k) {
        case LawKind::PointMass: return "point_mass";
        case LawKind::Atomic: return "atomic";
        case LawKind::RealizationLeaf: return "realization";
        case LawKind::Bernoulli: return "bernoulli";
        case LawKind::Semicircular: return "semicircular";
        case LawKind::Boolean: return "boolean";
        case LawKind::Monotone: return "monotone";
        case LawKind::Orthogonal: return "orthogonal";
        case LawKind::Free: return "free";
        case LawKind::SFree: return "sfree";
        case LawKind::BooleanPower: return "boolean_power";
        case LawKind::FreePower: return "free_power";
        case LawKind::BTrans: return "b_transform";
        case LawKind::Phi: return "phi";
    }
    return "?";
}

Law Law::make(LawKind kind, int d, std::vector<Law> children, std::optional<Realization> real,
              std::optional<CPMap> cp, std::optional<CPMap> cp_aux, std::string warning) {
    auto node = std::make_shared<Node>();
    node->kind = kind;
    node->d = d;
    node->children = std::move(children);
    node->real = std::move(real);
    node->cp = std::move(cp);
    node->cp_aux = std::move(cp_aux);
    node->warning = std::move(warning);
    for (const auto& c : node->children)
        if (c.d() != d) throw DimensionMismatch("Law: subtrees must share the base dimension");
    return Law(std::move(node));
}

Law Law::point_mass(const Matrix& p) {
    Realization r = Realization::point_mass(p);
    const int d = r.d();
    return make(LawKind::PointMass, d, {}, std::move(r), {}, {});
}

Law Law::atomic(std::vector<double> atoms, std::vector<double> weights) {
    Realization r = Realization::atomic_scalar(std::move(atoms), std::move(weights));
    return make(LawKind::Atomic, 1, {}, std::move(r), {}, {});
}

Law Law::realization_leaf(Realization r) {
    const int d = r.d();
    return make(LawKind::RealizationLeaf, d, {}, std::move(r), {}, {});
}

Law Law::bernoulli(CPMap s) {
    if (!s.verified_cp())
        throw NotCompletelyPositive("bernoulli: variance must be completely positive");
    const int d = s.dim();
    return make(LawKind::Bernoulli, d, {}, {}, std::move(s), {});
}

Law Law::semicircular(CPMap s) {
    if (!s.verified_cp())
        throw NotCompletelyPositive("semicircular: variance must be completely positive");
    const int d = s.dim();
    return make(LawKind::Semicircular, d, {}, {}, std::move(s), {});
}

LawKind Law::kind() const { return node_->kind; }
int Law::d() const { return node_->d; }
std::size_t Law::child_count() const { return node_->children.size(); }
const Law& Law::child(std::size_t i) const { return node_->children.at(i); }
bool Law::has_realization() const { return node_->real.has_value(); }
const Realization& Law::realization() const { return node_->real.value(); }
const CPMap& Law::cp() const { return node_->cp.value(); }
const CPMap& Law::cp_aux() const { return node_->cp_aux.value(); }
const std::string& Law::warning() const { return node_->warning; }

std::vector<std::string> Law::warnings() const {
    std::vector<std::string> out;
    if (!node_->warning.empty()) out.push_back(node_->warning);
    for (const auto& c : node_->children)
        for (auto& w : c.warnings()) out.push_back(std::move(w));
    return out;
}

// ---- fixed point machinery ----

namespace {

Eigen::VectorXcd flatten(const AlgElem& a) {
    return Eigen::Map<const Eigen::VectorXcd>(a.mat.data(), a.mat.size());
}

AlgElem unflatten(const Eigen::VectorXcd& v, const AlgElem& like) {
    AlgElem out = like;
    Eigen::Map<Eigen::VectorXcd>(out.mat.data(), out.mat.size()) = v;
    return out;
}

bool admissible(const AlgElem& w, double im_floor) {
    return w.mat.allFinite() && w.imag_min_eig() >= im_floor;
}

}  // namespace

AlgElem solve_fixed_point(const std::function<AlgElem(const AlgElem&)>& map, AlgElem w0,
                          double im_floor, const SolverSettings& s) {
    const int max_iter = (w0.imag_min_eig() < s.low_im_threshold) ? s.max_iter_low_im : s.max_iter;
    AlgElem w = std::move(w0);
    AlgElem g = map(w);

    // Anderson history of iterates and their images, most recent last
    std::deque<Eigen::VectorXcd> ws, gs;

    for (int it = 0; it < max_iter; ++it) {
        const double res = (g - w).norm();
        if (res <= s.tol * std::max(1.0, g.norm())) return g;

        AlgElem next = g;  // plain Picard step by default
        if (s.anderson) {
            ws.push_back(flatten(w));
            gs.push_back(flatten(g));
            while (static_cast<int>(ws.size()) > s.anderson_depth + 1) {
                ws.pop_front();
                gs.pop_front();
            }
            const int m = static_cast<int>(ws.size()) - 1;
            if (m >= 1) {
                // type-II Anderson: minimize || r_k - dR gamma ||
                Eigen::VectorXcd rk = gs.back() - ws.back();
                Eigen::MatrixXcd dR(rk.size(), m), dG(rk.size(), m);
                for (int j = 0; j < m; ++j) {
                    dR.col(j) = (gs[j + 1] - ws[j + 1]) - (gs[j] - ws[j]);
                    dG.col(j) = gs[j + 1] - gs[j];
                }
                Eigen::VectorXcd gamma = dR.colPivHouseholderQr().solve(rk);
                if (gamma.allFinite()) {
                    AlgElem cand = unflatten(gs.back() - dG * gamma, w);
                    if (admissible(cand, im_floor)) next = cand;
                }
            }
        }
        if (!admissible(next, im_floor)) {
            // damp back toward the previous admissible iterate
            double lam = s.damping;
            AlgElem damped = w;
            bool ok = false;
            for (int k = 0; k < 40; ++k) {
                damped = unflatten((1.0 - lam) * flatten(w) + lam * flatten(g), w);
                if (admissible(damped, im_floor)) {
                    ok = true;
                    break;
                }
                lam *= s.damping;
            }
            if (!ok) throw NonConvergence("fixed point: iterate left the half-plane");
            next = damped;
            ws.clear();
            gs.clear();
        }
        w = std::move(next);
        g = map(w);
    }
    throw NonConvergence("fixed point: no convergence within iteration budget");
}

// ---- F evaluation ----

namespace {

AlgElem eval_F(const Law& law, const AlgElem& b, const SolverSettings& s);

AlgElem eval_h(const Law& law, const AlgElem& b, const SolverSettings& s) {
    return eval_F(law, b, s) - b;
}

// F of mu s-free nu: the fixed point of w = b + h_mu(b + h_nu(w))
AlgElem sfree_F(const Law& mu, const Law& nu, const AlgElem& b, const SolverSettings& s) {
    const double floor = 0.5 * b.imag_min_eig();
    auto step = [&](const AlgElem& w) { return b + eval_h(mu, b + eval_h(nu, w, s), s); };
    return solve_fixed_point(step, b, floor, s);
}

// subordination fixed point w = b + eta(h_mu(w)) of the free power with eta = alpha - 1
AlgElem power_subordination(const Law& mu, const CPMap& eta, const AlgElem& b,
                            const SolverSettings& s) {
    const double floor = 0.5 * b.imag_min_eig();
    auto step = [&](const AlgElem& w) { return b + eta.apply(eval_h(mu, w, s)); };
    return solve_fixed_point(step, b, floor, s);
}

AlgElem eval_F(const Law& law, const AlgElem& b, const SolverSettings& s) {
    switch (law.kind()) {
        case LawKind::PointMass:
        case LawKind::Atomic:
        case LawKind::RealizationLeaf:
            // inner compositions may sit barely above the entry slack; only
            // guard against actually leaving the half-plane
            return law.realization().f_eval(b, 1e-14);
        case LawKind::Bernoulli:
            return b - law.cp().apply(b.inverse());
        case LawKind::Semicircular: {
            const double floor = 0.5 * b.imag_min_eig();
            const CPMap& var = law.cp();
            auto step = [&](const AlgElem& w) { return b - var.apply(w.inverse()); };
            return solve_fixed_point(step, b, floor, s);
        }
        case LawKind::Boolean: {
            AlgElem acc = eval_F(law.child(0), b, s);
            for (std::size_t i = 1; i < law.child_count(); ++i)
                acc = acc + eval_F(law.child(i), b, s) - b;
            return acc;
        }
        case LawKind::Monotone:
            return eval_F(law.child(0), eval_F(law.child(1), b, s), s);
        case LawKind::Orthogonal: {
            const AlgElem inner = eval_F(law.child(1), b, s);
            return eval_F(law.child(0), inner, s) - inner + b;
        }
        case LawKind::SFree:
            return sfree_F(law.child(0), law.child(1), b, s);
        case LawKind::Free: {
            // F_{mu (+) nu}(b) = F_mu(F_{nu sfree mu}(b))
            const AlgElem omega1 = sfree_F(law.child(1), law.child(0), b, s);
            return eval_F(law.child(0), omega1, s);
        }
        case LawKind::BooleanPower: {
            const AlgElem f = eval_F(law.child(0), b, s);
            return law.cp().apply(f) + b - law.cp().apply(b);
        }
        case LawKind::FreePower: {
            const AlgElem omega = power_subordination(law.child(0), law.cp_aux(), b, s);
            return eval_F(law.child(0), omega, s);
        }
        case LawKind::BTrans: {
            // (mu^{boxplus(1+s)})^{uplus(1+s)^{-1}}: inner free power with eta = s,
            // then the affine Boolean power with the formal inverse of 1+s
            const AlgElem omega = power_subordination(law.child(0), law.cp(), b, s);
            const AlgElem inner = eval_F(law.child(0), omega, s);
            const CPMap& inv = law.cp_aux();
            return inv.apply(inner) + b - inv.apply(b);
        }
        case LawKind::Phi:
            return b - eval_F(law.child(0), b, s).inverse();
    }
    throw Error("eval_F: unknown node kind");
}

}  // namespace

AlgElem transform_F(const Law& law, const AlgElem& b, const SolverSettings& s) {
    if (b.d != law.d()) throw DimensionMismatch("transform_F: base dimension mismatch");
    if (!uhp_member(b, s.eps_min))
        throw NotInHalfPlane("transform_F: point not in the matricial upper half-plane");
    return eval_F(law, b, s);
}

AlgElem transform_G(const Law& law, const AlgElem& b, const SolverSettings& s) {
    return transform_F(law, b, s).inverse();
}

AlgElem transform_h(const Law& law, const AlgElem& b, const SolverSettings& s) {
    return transform_F(law, b, s) - b;
}

const Matrix& Law::first_moment() const {
    std::call_once(node_->moment_once, [this] {
        const double y = 1e4;
        const AlgElem b = AlgElem::scaled_identity(node_->d, 1, Complex(0, y));
        const AlgElem f = transform_F(*this, b, SolverSettings{});
        node_->first_moment = (b - f).mat;
    });
    return node_->first_moment;
}

AlgElem invert_F(const Law& law, const AlgElem& target, const SolverSettings& s) {
    if (target.d != law.d()) throw DimensionMismatch("invert_F: base dimension mismatch");
    if (target.imag_min_eig() < 1.0 - 1e-9)
        throw OutsideInversionDomain("invert_F: Im target must dominate 1");
    const double r_inv = s.inv_radius_scale / (1.0 + operator_norm(law.first_moment()));
    if (operator_norm(inverse_guarded(target.mat)) > r_inv)
        throw OutsideInversionDomain("invert_F: target too close to the origin");

    auto step = [&](const AlgElem& w) { return target - eval_F(law, w, s) + w; };
    AlgElem w = solve_fixed_point(step, target, s.eps_min, s);
    const double res = (eval_F(law, w, s) - target).norm();
    if (res > 10.0 * s.tol * std::max(1.0, target.norm()))
        throw NonConvergence("invert_F: left inverse residual " + std::to_string(res));
    return w;
}

AlgElem voiculescu_phi(const Law& law, const AlgElem& b, const SolverSettings& s) {
    return invert_F(law, b, s) - b;
}

AlgElem r_transform(const Law& law, const AlgElem& c, const SolverSettings& s) {
    return voiculescu_phi(law, c.inverse(), s);
}

// ---- exact leaf moments ----

namespace {

// semicircular E[x b1 x ... b_{k-1} x] by the first-partner recursion over
// noncrossing pairings; args are the k-1 separators
Matrix semicircular_moment(const CPMap& s, std::span<const Matrix> args) {
    const int d = s.dim();
    const std::size_t k = args.size() + 1;
    if (k == 0) return Matrix::Identity(d, d);
    if (k % 2 == 1) return Matrix::Zero(d, d);
    if (k == 2) return s.apply(args[0]);
    Matrix out = Matrix::Zero(d, d);
    // first x pairs with the j-th x (1-based), enclosing j-2 factors
    for (std::size_t j = 2; j <= k; ++j) {
        if ((j - 2) % 2 == 1) continue;
        const Matrix inner = (j == 2)
                                 ? Matrix(args[0])
                                 : Matrix(args[0] *
                                          semicircular_moment(s, args.subspan(1, j - 3)) *
                                          args[j - 2]);
        const Matrix head = s.apply(inner);
        if (j == k) {
            out += head;
        } else {
            out += head * args[j - 1] * semicircular_moment(s, args.subspan(j));
        }
    }
    return out;
}

Matrix bernoulli_moment(const CPMap& s, std::span<const Matrix> args) {
    const int d = s.dim();
    const std::size_t k = args.size() + 1;
    if (k % 2 == 1) return Matrix::Zero(d, d);
    // only the adjacent-pair interval partition survives
    Matrix out = s.apply(args[0]);
    for (std::size_t j = 2; j < k; j += 2) out = out * args[j - 1] * s.apply(args[j]);
    return out;
}

}  // namespace

std::optional<Realization> leaf_realization(const Law& law) {
    if (law.has_realization()) return law.realization();
    if (law.kind() == LawKind::Bernoulli && law.cp().has_kraus())
        return Realization::bernoulli(law.cp());
    return std::nullopt;
}

Matrix leaf_moment(const Law& leaf, std::span<const Matrix> args) {
    for (const auto& a : args)
        if (a.rows() != leaf.d() || a.cols() != leaf.d())
            throw DimensionMismatch("leaf_moment: arguments must be d x d");
    if (leaf.kind() == LawKind::Bernoulli) return bernoulli_moment(leaf.cp(), args);
    if (leaf.kind() == LawKind::Semicircular) return semicircular_moment(leaf.cp(), args);
    throw InputError("leaf_moment: only Bernoulli and semicircular leaves have closed moments");
}

std::vector<DensityPoint> density(const Law& law, const Matrix& state, double t_min, double t_max,
                                  int steps, double epsilon, const SolverSettings& s) {
    if (steps < 2) throw InputError("density: need at least 2 grid points");
    if (t_min >= t_max) throw InputError("density: empty interval");
    if (epsilon < 1e-6) throw InputError("density: epsilon below 1e-6");
    const int d = law.d();
    if (state.rows() != d || state.cols() != d)
        throw DimensionMismatch("density: state must be d x d");

    std::vector<DensityPoint> out(steps);
    parallel_for(static_cast<std::size_t>(steps), [&](std::size_t i) {
        const double t = t_min + (t_max - t_min) * double(i) / double(steps - 1);
        out[i].t = t;
        try {
            const AlgElem b = AlgElem(d, 1, Complex(t, epsilon) * Matrix::Identity(d, d));
            const AlgElem g = transform_F(law, b, s).inverse();
            out[i].rho = -(state * g.mat).trace().imag() / M_PI;
        } catch (const NumericError&) {
            out[i].converged = false;
        }
    });
    return out;
}

}  // namespace ovconv
