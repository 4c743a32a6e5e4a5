// ovconv: batch front end for operator-valued convolution transforms.
//
// Exit codes: 0 success, 1 check failure, 2 input/config error,
// 3 numerical non-convergence.

#include <CLI11.hpp>

#include <cstdlib>
#include <fstream>
#include <iostream>

#include "ovconv/combinatorics.hpp"
#include "ovconv/convolve.hpp"
#include "ovconv/fock.hpp"
#include "ovconv/model_io.hpp"
#include "ovconv/util.hpp"

using namespace ovconv;
using namespace std::complex_literals;

namespace {

Index fock_row_cap() {
    if (const char* env = std::getenv("OVCONV_MAX_DIM")) {
        const long v = std::atol(env);
        if (v > 0) return static_cast<Index>(v);
    }
    return FockSpace::kDefaultRowCap;
}

Json load_json(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open file: " + path);
    Json j;
    try {
        in >> j;
    } catch (const std::exception& e) {
        throw ParseError(std::string("JSON parse: ") + e.what());
    }
    return j;
}

std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> out;
    std::size_t start = 0;
    while (start <= s.size()) {
        const std::size_t end = s.find(sep, start);
        if (end == std::string::npos) {
            out.push_back(s.substr(start));
            break;
        }
        out.push_back(s.substr(start, end - start));
        start = end + 1;
    }
    return out;
}

// ---- eval ----

int run_eval(const std::string& model_path, const std::string& law_name,
             const std::string& point_path, double point_iy, int level) {
    const ModelFile model = load_model(model_path);
    const Law& law = model.law(law_name);
    AlgElem b;
    if (!point_path.empty()) {
        const Json pj = load_json(point_path);
        const Matrix m = parse_matrix(pj.is_object() ? pj.at("matrix") : pj);
        if (m.rows() % model.d != 0)
            throw ParseError("point: matrix size must be a multiple of d");
        b = AlgElem(model.d, static_cast<int>(m.rows()) / model.d, m);
    } else {
        b = AlgElem::scaled_identity(model.d, level, Complex(0, point_iy));
    }
    const AlgElem f = transform_F(law, b);
    Json out;
    out["law"] = law_name;
    out["d"] = model.d;
    out["level"] = b.n;
    out["F"] = matrix_to_json(f.mat);
    out["G"] = matrix_to_json(f.inverse().mat);
    out["h"] = matrix_to_json((f - b).mat);
    std::cout << out.dump(2) << "\n";
    return 0;
}

// ---- density ----

int run_density(const std::string& model_path, const std::string& law_name, double from, double to,
                int steps, double epsilon, const std::string& state_spec) {
    const ModelFile model = load_model(model_path);
    const Law& law = model.law(law_name);
    Matrix state;
    if (state_spec == "trace") {
        state = Matrix::Identity(model.d, model.d) / double(model.d);
    } else {
        state = parse_matrix(load_json(state_spec));
        if (state.rows() != model.d || state.cols() != model.d)
            throw ParseError("state: must be d x d");
    }
    const auto points = density(law, state, from, to, steps, epsilon);
    std::cout << "t,rho\n";
    int failures = 0;
    for (const auto& p : points) {
        if (p.converged) {
            std::cout << p.t << "," << p.rho << "\n";
        } else {
            std::cout << p.t << ",\n";
            ++failures;
        }
    }
    if (failures > 0)
        std::cerr << "warning: " << failures << " grid points did not converge\n";
    return 0;
}

// ---- moments ----

Realization realization_of(const Law& law, const std::string& name) {
    if (auto r = leaf_realization(law)) return *r;
    throw InputError("law '" + name + "' has no finite realization; only realization-backed "
                     "leaves and Bernoulli laws feed the Fock oracle");
}

int run_moments(const std::string& model_path, const std::string& laws_csv,
                const std::string& jspec_csv, int order, int truncation) {
    const ModelFile model = load_model(model_path);
    const std::vector<std::string> names = split(laws_csv, ',');
    Json out;
    out["d"] = model.d;
    out["order"] = order;
    Json values = Json::array();

    if (jspec_csv.empty()) {
        if (names.size() != 1)
            throw InputError("moments: exactly one law expected without --jspec");
        const Law& law = model.law(names[0]);
        const Matrix one = Matrix::Identity(model.d, model.d);
        for (int k = 1; k <= order; ++k) {
            Matrix mk;
            if (auto r = leaf_realization(law)) {
                mk = r->plain_moment(k);
            } else if (law.kind() == LawKind::Semicircular) {
                mk = leaf_moment(law, std::vector<Matrix>(k - 1, one));
            } else {
                throw InputError("moments: law '" + names[0] +
                                 "' is not a moment-oracle leaf; use --jspec");
            }
            values.push_back(matrix_to_json(mk));
        }
    } else {
        const std::vector<std::string> spec_names = split(jspec_csv, ',');
        if (spec_names.size() != names.size())
            throw InputError("moments: need one jspec per law");
        std::vector<Realization> reals;
        std::vector<JSpec> specs;
        for (std::size_t i = 0; i < names.size(); ++i) {
            reals.push_back(realization_of(model.law(names[i]), names[i]));
            const auto kind = jspec_kind_from_string(spec_names[i]);
            if (!kind || *kind == JSpec::Kind::Custom)
                throw InputError("moments: unknown jspec '" + spec_names[i] + "'");
            specs.push_back(JSpec::builtin(*kind));
        }
        const int L = truncation > 0 ? truncation : order;
        if (order > L) throw InputError("moments: order exceeds truncation");
        const FockSpace fock = FockSpace::from_realizations(reals, L, fock_row_cap());
        for (int k = 1; k <= order; ++k) {
            const std::vector<Matrix> word(k + 1, Matrix::Identity(model.d, model.d));
            values.push_back(matrix_to_json(fock.j_moment(specs, word)));
        }
    }
    out["moments"] = std::move(values);
    std::cout << out.dump(2) << "\n";
    return 0;
}

// ---- check ----

struct SuiteResult {
    std::string name;
    int d = 1;
    bool pass = false;
    double max_residual = 0.0;
    double tol = 0.0;
    std::vector<std::string> notes;
};

void print_result(const SuiteResult& r) {
    std::cout << (r.pass ? "[PASS] " : "[FAIL] ") << r.name << " (d=" << r.d
              << "): max residual " << r.max_residual << " vs tol " << r.tol << "\n";
    for (const auto& n : r.notes) std::cout << "       " << n << "\n";
}

Json result_to_json(const SuiteResult& r) {
    Json j;
    j["name"] = r.name;
    j["d"] = r.d;
    j["pass"] = r.pass;
    j["max_residual"] = r.max_residual;
    j["tol"] = r.tol;
    if (!r.notes.empty()) j["notes"] = r.notes;
    return j;
}

// two laws with exact finite realizations and operator norm <= 2
std::pair<Realization, Realization> oracle_inputs(int d, std::uint64_t seed) {
    if (d == 1)
        return {Realization::bernoulli_scalar(),
                Realization::atomic_scalar({-1.0, 0.5, 1.0}, {0.3, 0.4, 0.3})};
    return {seeded_realization(d, 1, mix_seed(seed, 1)),
            seeded_realization(d, 1, mix_seed(seed, 2))};
}

BSeries summed_cumulants(const BSeries& a, const BSeries& b) {
    BSeries sum(a.d(), a.max_order());
    const int d2 = a.d() * a.d();
    for (int order = 1; order <= a.max_order(); ++order) {
        std::vector<int> idx(order - 1, 0);
        while (true) {
            sum.entry(order, idx) = a.entry(order, idx) + b.entry(order, idx);
            int s = order - 2;
            for (; s >= 0; --s) {
                if (++idx[s] < d2) break;
                idx[s] = 0;
            }
            if (s < 0) break;
        }
    }
    return sum;
}

SuiteResult run_boolean_oracle(int d, std::uint64_t seed, double tol) {
    SuiteResult res;
    res.name = "ORACLE_BOOLEAN";
    res.d = d;
    res.tol = tol;
    const auto [a, b] = (d == 1)
                            ? std::pair{Realization::bernoulli_scalar(),
                                        Realization::atomic_scalar({0.0, 2.0}, {0.5, 0.5})}
                            : std::pair{seeded_realization(d, 2, mix_seed(seed, 11)),
                                        seeded_realization(d, 2, mix_seed(seed, 12))};
    const int order = 6;
    const FockSpace fock = FockSpace::from_realizations({a, b}, order, fock_row_cap());
    const std::vector<JSpec> specs{JSpec::builtin(JSpec::Kind::Boolean),
                                   JSpec::builtin(JSpec::Kind::Boolean)};

    const BSeries sum = summed_cumulants(moments_to_bcumulants(moment_series_of(a), order, d),
                                         moments_to_bcumulants(moment_series_of(b), order, d));
    Rng rng(mix_seed(seed, 13));
    double worst = 0.0;
    for (int k = 1; k <= order; ++k) {
        std::vector<Matrix> args;
        for (int s = 0; s < k - 1; ++s) args.push_back(rng.gauss_matrix(d, d));
        std::vector<Matrix> word;
        word.push_back(Matrix::Identity(d, d));
        for (const auto& m : args) word.push_back(m);
        word.push_back(Matrix::Identity(d, d));
        const Matrix oracle = fock.j_moment(specs, word);
        const Matrix rebuilt = bcumulants_to_moments(sum, k, args);
        worst = std::max(worst, (oracle - rebuilt).norm());
    }
    res.max_residual = worst;
    res.pass = worst <= tol;
    return res;
}

SuiteResult run_fock_bridge(int d, std::uint64_t seed, double tol) {
    SuiteResult res;
    res.name = "ORACLE_FOCK_BRIDGE";
    res.d = d;
    res.tol = tol;
    const auto [r1, r2] = oracle_inputs(d, seed);
    const Law l1 = Law::realization_leaf(r1), l2 = Law::realization_leaf(r2);
    const FockSpace fock = FockSpace::from_realizations({r1, r2}, 8, fock_row_cap());
    const AlgElem b = AlgElem::scaled_identity(d, 1, 20.0i);
    using K = JSpec::Kind;
    const std::vector<std::pair<std::vector<JSpec>, Law>> table{
        {{JSpec::builtin(K::MonotoneLow), JSpec::builtin(K::MonotoneHigh)},
         monotone_conv(l1, l2)},
        {{JSpec::builtin(K::Ortho1), JSpec::builtin(K::Ortho2)}, orthogonal_conv(l1, l2)},
        {{JSpec::builtin(K::SFree1), JSpec::builtin(K::SFree2)}, sfree_conv(l1, l2)},
        {{JSpec::builtin(K::Free), JSpec::builtin(K::Free)}, free_conv(l1, l2)},
    };
    double worst = 0.0;
    for (const auto& [specs, law] : table) {
        const Realization compressed =
            fock.compress_to_realization(fock.convolution_operator(specs));
        worst =
            std::max(worst, (compressed.f_eval(b).mat - transform_F(law, b).mat).norm());
    }
    res.max_residual = worst;
    res.pass = worst <= tol;
    return res;
}

SuiteResult run_commutation(int d, std::uint64_t seed, double tol) {
    SuiteResult res;
    res.name = "ORACLE_COMMUTATION";
    res.d = d;
    res.tol = tol;
    using K = JSpec::Kind;
    const std::vector<std::vector<JSpec>> families{
        {JSpec::builtin(K::Free), JSpec::builtin(K::Free)},
        {JSpec::builtin(K::Boolean), JSpec::builtin(K::Boolean)},
        {JSpec::builtin(K::MonotoneLow), JSpec::builtin(K::MonotoneHigh)},
        {JSpec::builtin(K::Ortho1), JSpec::builtin(K::Ortho2)},
        {JSpec::builtin(K::SFree1), JSpec::builtin(K::SFree2)},
    };
    bool ok = true;
    for (const auto& fam : families) ok = ok && jspec_compatible(fam, 6);

    const auto [r1, r2] = oracle_inputs(d, seed);
    const FockSpace fock = FockSpace::from_realizations({r1, r2}, 5, fock_row_cap());
    double worst = 0.0;
    for (const auto& fam : families)
        for (int i = 1; i <= 2; ++i) {
            const Matrix p = fock.projection(fam[i - 1], i);
            worst = std::max(worst, (p * fock.lambda(i) - fock.lambda(i) * p).norm());
        }

    // a deliberately incompatible family must be rejected
    const std::vector<JSpec> bad{JSpec::custom({Word{}}), JSpec::builtin(K::Free)};
    bool rejected = false;
    try {
        (void)fock.j_operator(bad, 1);
    } catch (const IncompatibleSpec&) {
        rejected = true;
    }
    if (!rejected) {
        ok = false;
        res.notes.push_back("incompatible CUSTOM spec was not rejected");
    }
    res.max_residual = worst;
    res.pass = ok && worst <= tol;
    return res;
}

std::vector<std::pair<std::string, Law>> node_zoo(int d, std::uint64_t seed) {
    const CPMap id = CPMap::identity(d);
    const Law ber = Law::bernoulli(id);
    const Law gamma = Law::semicircular(id);
    const Law leaf = (d == 1)
                         ? Law::realization_leaf(Realization::atomic_scalar({-1, 1}, {0.5, 0.5}))
                         : Law::realization_leaf(seeded_realization(d, 2, mix_seed(seed, 3)));
    const CPMap grow = (d == 1) ? CPMap::scaled_identity(1, 2.0)
                                : shift_by_identity(
                                      CPMap::ad((Matrix(2, 2) << 1, 0, 0, 0.5).finished()), 1.0);
    std::vector<std::pair<std::string, Law>> zoo;
    Matrix p = Matrix::Zero(d, d);
    p(0, 0) = 1.0;
    if (d > 1) p(1, 1) = -1.0;
    zoo.emplace_back("point_mass", Law::point_mass(p));
    if (d == 1) zoo.emplace_back("atomic", Law::atomic({0.0, 2.0}, {0.5, 0.5}));
    zoo.emplace_back("realization", leaf);
    zoo.emplace_back("bernoulli", ber);
    zoo.emplace_back("semicircular", gamma);
    zoo.emplace_back("boolean", boolean_conv(ber, gamma));
    zoo.emplace_back("monotone", monotone_conv(ber, leaf));
    zoo.emplace_back("orthogonal", orthogonal_conv(ber, gamma));
    zoo.emplace_back("free", free_conv(ber, gamma));
    zoo.emplace_back("sfree", sfree_conv(ber, leaf));
    zoo.emplace_back("boolean_power", boolean_power(ber, CPMap::scaled_identity(d, 0.5)));
    zoo.emplace_back("free_power", free_power(ber, grow));
    zoo.emplace_back("b_transform", b_transform(ber, id));
    zoo.emplace_back("phi", phi_transform(gamma));
    return zoo;
}

SuiteResult run_matricial(int d, int samples, std::uint64_t seed, double tol) {
    SuiteResult res;
    res.name = "ORACLE_MATRICIAL";
    res.d = d;
    res.tol = tol;
    const auto zoo = node_zoo(d, seed);
    const SolverSettings settings;
    double worst = 0.0;
    std::string worst_node;
    for (const auto& [name, law] : zoo) {
        Rng rng(mix_seed(seed, std::hash<std::string>{}(name)));
        for (int k = 0; k < samples; ++k) {
            // direct sums split
            const AlgElem b1 = rng.half_plane_point(d, 1);
            const AlgElem b2 = rng.half_plane_point(d, 2);
            const AlgElem whole = transform_F(law, b1.direct_sum(b2), settings);
            const AlgElem split =
                transform_F(law, b1, settings).direct_sum(transform_F(law, b2, settings));
            double r = (whole - split).norm();

            // GL_n (x) 1 equivariance at level 2
            const AlgElem b = rng.half_plane_point(d, 2);
            Matrix g = rng.gauss_matrix(2, 2);
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
                worst_node = name;
            }
        }
    }
    res.max_residual = worst;
    res.pass = worst <= tol;
    if (!worst_node.empty()) res.notes.push_back("largest residual on node " + worst_node);
    return res;
}

int run_check(const std::vector<std::string>& suites, const std::vector<int>& dims,
              std::vector<int> levels, int samples, std::uint64_t seed, double tol_opt,
              const std::string& json_path, const std::string& case_path) {
    if (!case_path.empty()) {
        const IdentityCase c = parse_identity_case(load_json(case_path));
        const IdentityReport r = identity_check(c);
        SuiteResult res;
        res.name = identity_name(r.name);
        res.d = r.d;
        res.pass = r.pass;
        res.max_residual = r.max_residual;
        res.tol = r.tol;
        res.notes = r.warnings;
        print_result(res);
        Json doc;
        doc["suites"] = Json::array({identity_report_to_json(r)});
        doc["pass"] = r.pass;
        if (!json_path.empty()) {
            std::ofstream out(json_path);
            out << doc.dump(2) << "\n";
        } else {
            std::cout << doc.dump() << "\n";
        }
        return r.pass ? 0 : 1;
    }
    const bool all = suites.size() == 1 && suites[0] == "all";
    std::vector<std::string> wanted = suites;
    if (all) {
        wanted.clear();
        for (auto id : all_identities()) wanted.push_back(identity_name(id));
        wanted.insert(wanted.end(), {"ORACLE_BOOLEAN", "ORACLE_FOCK_BRIDGE",
                                     "ORACLE_COMMUTATION", "ORACLE_MATRICIAL"});
    }
    const std::optional<double> tol =
        tol_opt > 0 ? std::optional<double>(tol_opt) : std::nullopt;

    Json report = Json::array();
    bool ok = true;
    for (int d : dims) {
        std::map<std::string, IdentityCase> zoo;
        for (auto& c : default_cases(d, levels, samples, seed, tol))
            zoo.emplace(identity_name(c.name), std::move(c));
        for (const auto& name : wanted) {
            SuiteResult res;
            if (auto id = identity_from_string(name)) {
                const IdentityReport r = identity_check(zoo.at(name));
                res.name = name;
                res.d = d;
                res.pass = r.pass;
                res.max_residual = r.max_residual;
                res.tol = r.tol;
                res.notes = r.warnings;
            } else if (name == "ORACLE_BOOLEAN") {
                res = run_boolean_oracle(d, seed, tol.value_or(1e-10));
            } else if (name == "ORACLE_FOCK_BRIDGE") {
                res = run_fock_bridge(d, seed, tol.value_or(1e-7));
            } else if (name == "ORACLE_COMMUTATION") {
                res = run_commutation(d, seed, tol.value_or(1e-12));
            } else if (name == "ORACLE_MATRICIAL") {
                res = run_matricial(d, samples, seed, tol.value_or(1e-9));
            } else {
                throw InputError("check: unknown suite '" + name + "'");
            }
            print_result(res);
            report.push_back(result_to_json(res));
            ok = ok && res.pass;
        }
    }
    Json doc;
    doc["suites"] = std::move(report);
    doc["pass"] = ok;
    if (!json_path.empty()) {
        std::ofstream out(json_path);
        out << doc.dump(2) << "\n";
    } else {
        std::cout << doc.dump() << "\n";
    }
    return ok ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"operator-valued convolution transforms"};
    app.require_subcommand(1);

    std::string model_path, law_name, point_path, state_spec = "trace", jspec_csv, json_path;
    double point_iy = 1.0, from = -2.0, to = 2.0, epsilon = 1e-3, tol = 0.0;
    int level = 1, steps = 200, order = 4, truncation = 0, samples = 20;
    std::uint64_t seed = 42;
    std::string dims_csv = "1", levels_csv = "1,2";
    std::vector<std::string> suites{"all"};

    auto* eval = app.add_subcommand("eval", "evaluate F, G and h of a law at a point");
    eval->add_option("model", model_path, "model JSON file")->required();
    eval->add_option("law", law_name, "law name in the model")->required();
    eval->add_option("--point-file", point_path, "JSON matrix for the evaluation point");
    eval->add_option("--point-iy", point_iy, "evaluate at iy * 1 (default 1)");
    eval->add_option("--level", level, "matricial level n for --point-iy");

    auto* dens = app.add_subcommand("density", "spectral density by Stieltjes inversion");
    dens->add_option("model", model_path)->required();
    dens->add_option("law", law_name)->required();
    dens->add_option("--from", from)->required();
    dens->add_option("--to", to)->required();
    dens->add_option("--steps", steps)->required();
    dens->add_option("--epsilon", epsilon)->required();
    dens->add_option("--state", state_spec, "'trace' or a JSON matrix file");

    auto* mom = app.add_subcommand("moments", "B-valued moments of laws or J-convolutions");
    mom->add_option("model", model_path)->required();
    mom->add_option("--law,--laws", law_name, "law name, or comma list with --jspec")->required();
    mom->add_option("--order", order, "highest moment order");
    mom->add_option("--jspec", jspec_csv, "comma list of builtin word-pattern specs");
    mom->add_option("--truncation", truncation, "Fock truncation length (default: order)");

    auto* chk = app.add_subcommand("check", "run identity and oracle suites");
    chk->add_option("--suite", suites, "'all' or suite names");
    chk->add_option("--d", dims_csv, "comma list of base dimensions (1 and/or 2)");
    chk->add_option("--levels", levels_csv, "comma list of matricial levels");
    chk->add_option("--samples", samples, "random sample points per level");
    chk->add_option("--seed", seed, "seed for the sample generator");
    chk->add_option("--tol", tol, "override the per-suite tolerance");
    chk->add_option("--json", json_path, "write the JSON report to this file");
    std::string case_path;
    chk->add_option("--case", case_path, "run a single identity case from a JSON file");

    try {
        app.parse(argc, argv);
        if (eval->parsed())
            return run_eval(model_path, law_name, point_path, point_iy, level);
        if (dens->parsed())
            return run_density(model_path, law_name, from, to, steps, epsilon, state_spec);
        if (mom->parsed())
            return run_moments(model_path, law_name, jspec_csv, order, truncation);
        if (chk->parsed()) {
            std::vector<int> dims, levels;
            for (const auto& s : split(dims_csv, ',')) dims.push_back(std::stoi(s));
            for (const auto& s : split(levels_csv, ',')) levels.push_back(std::stoi(s));
            return run_check(suites, dims, levels, samples, seed, tol, json_path, case_path);
        }
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? 0 : 2;
    } catch (const NumericError& e) {
        std::cerr << "numerical failure: " << e.what() << "\n";
        return 3;
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 2;
}
