#include "ovconv/model_io.hpp"

#include <fstream>

namespace ovconv {

namespace {

void require_keys(const Json& j, std::initializer_list<const char*> required,
                  std::initializer_list<const char*> optional, const std::string& what) {
    if (!j.is_object()) throw ParseError(what + ": expected an object");
    for (const char* k : required)
        if (!j.contains(k)) throw ParseError(what + ": missing key '" + k + "'");
    for (auto it = j.begin(); it != j.end(); ++it) {
        bool known = false;
        for (const char* k : required) known = known || it.key() == k;
        for (const char* k : optional) known = known || it.key() == k;
        if (!known) throw ParseError(what + ": unknown key '" + it.key() + "'");
    }
}

std::vector<double> parse_real_vector(const Json& j, const std::string& what) {
    if (!j.is_array()) throw ParseError(what + ": expected an array of reals");
    std::vector<double> out;
    for (const auto& v : j) {
        if (!v.is_number()) throw ParseError(what + ": expected a real number");
        out.push_back(v.get<double>());
    }
    return out;
}

}  // namespace

Json complex_to_json(Complex z) { return Json::array({z.real(), z.imag()}); }

Complex parse_complex(const Json& j) {
    if (j.is_number()) return Complex(j.get<double>(), 0.0);
    if (!j.is_array() || j.size() != 2 || !j[0].is_number() || !j[1].is_number())
        throw ParseError("complex scalar: expected [re, im]");
    return Complex(j[0].get<double>(), j[1].get<double>());
}

Json matrix_to_json(const Matrix& m) {
    Json rows = Json::array();
    for (Index i = 0; i < m.rows(); ++i) {
        Json row = Json::array();
        for (Index j = 0; j < m.cols(); ++j) row.push_back(complex_to_json(m(i, j)));
        rows.push_back(std::move(row));
    }
    return rows;
}

Matrix parse_matrix(const Json& j) {
    if (!j.is_array() || j.empty()) throw ParseError("matrix: expected nested arrays");
    const Index rows = static_cast<Index>(j.size());
    const Index cols = static_cast<Index>(j[0].size());
    Matrix m(rows, cols);
    for (Index r = 0; r < rows; ++r) {
        if (!j[r].is_array() || static_cast<Index>(j[r].size()) != cols)
            throw ParseError("matrix: ragged rows");
        for (Index c = 0; c < cols; ++c) m(r, c) = parse_complex(j[r][c]);
    }
    return m;
}

Json cpmap_to_json(const CPMap& m) {
    Json out = Json::object();
    if (m.has_kraus()) {
        Json ks = Json::array();
        for (const auto& k : m.kraus()) ks.push_back(matrix_to_json(k));
        out["kraus"] = std::move(ks);
    } else {
        out["choi"] = matrix_to_json(m.choi());
    }
    return out;
}

CPMap parse_cpmap(const Json& j, int d) {
    require_keys(j, {}, {"kraus", "choi"}, "cpmap");
    if (j.contains("kraus") == j.contains("choi"))
        throw ParseError("cpmap: exactly one of 'kraus' or 'choi' required");
    if (j.contains("kraus")) {
        std::vector<Matrix> kraus;
        if (!j["kraus"].is_array() || j["kraus"].empty())
            throw ParseError("cpmap: 'kraus' must be a non-empty array of matrices");
        for (const auto& k : j["kraus"]) kraus.push_back(parse_matrix(k));
        for (const auto& k : kraus)
            if (k.rows() != d || k.cols() != d)
                throw ParseError("cpmap: Kraus operators must be d x d");
        return CPMap::from_kraus(d, std::move(kraus));
    }
    const Matrix choi = parse_matrix(j["choi"]);
    if (choi.rows() != Index(d) * d || choi.cols() != Index(d) * d)
        throw ParseError("cpmap: Choi matrix must be d^2 x d^2");
    return CPMap::from_choi(d, choi);
}

namespace {

CPMap resolve_cpmap(const Json& j, int d, const std::map<std::string, CPMap>& cpmaps) {
    if (j.is_string()) {
        const auto it = cpmaps.find(j.get<std::string>());
        if (it == cpmaps.end())
            throw ParseError("cpmap reference '" + j.get<std::string>() + "' not found");
        return it->second;
    }
    return parse_cpmap(j, d);
}

}  // namespace

Law parse_law(const Json& j, int d, const std::map<std::string, CPMap>& cpmaps,
              const std::map<std::string, Law>& laws) {
    if (j.is_string()) {
        const auto it = laws.find(j.get<std::string>());
        if (it == laws.end()) throw ParseError("law reference '" + j.get<std::string>() + "' not found");
        return it->second;
    }
    if (!j.is_object() || !j.contains("type")) throw ParseError("law: missing 'type'");
    const std::string type = j["type"].get<std::string>();

    auto child = [&](const Json& cj) { return parse_law(cj, d, cpmaps, laws); };
    auto two_args = [&](const char* what) {
        require_keys(j, {"type", "args"}, {}, what);
        if (!j["args"].is_array() || j["args"].size() != 2)
            throw ParseError(std::string(what) + ": 'args' must hold two laws");
        return std::pair<Law, Law>(child(j["args"][0]), child(j["args"][1]));
    };

    if (type == "point_mass") {
        require_keys(j, {"type", "p"}, {}, "point_mass");
        const Matrix p = parse_matrix(j["p"]);
        if (p.rows() != d) throw ParseError("point_mass: p must be d x d");
        return Law::point_mass(p);
    }
    if (type == "atomic") {
        require_keys(j, {"type", "atoms", "weights"}, {}, "atomic");
        if (d != 1) throw ParseError("atomic: only defined for d = 1");
        return Law::atomic(parse_real_vector(j["atoms"], "atoms"),
                           parse_real_vector(j["weights"], "weights"));
    }
    if (type == "realization") {
        require_keys(j, {"type", "d", "m", "p", "alpha", "T"}, {}, "realization");
        const int rd = j["d"].get<int>(), rm = j["m"].get<int>();
        if (rd != d) throw ParseError("realization: 'd' must match the model dimension");
        Matrix p = parse_matrix(j["p"]);
        Matrix alpha = rm > 0 ? parse_matrix(j["alpha"]) : Matrix(0, 0);
        Matrix t = rm > 0 ? parse_matrix(j["T"]) : Matrix(0, 0);
        return Law::realization_leaf(Realization(rd, rm, std::move(p), std::move(alpha), std::move(t)));
    }
    if (type == "bernoulli") {
        require_keys(j, {"type", "s"}, {}, "bernoulli");
        return Law::bernoulli(resolve_cpmap(j["s"], d, cpmaps));
    }
    if (type == "semicircular") {
        require_keys(j, {"type", "s"}, {}, "semicircular");
        return Law::semicircular(resolve_cpmap(j["s"], d, cpmaps));
    }
    if (type == "boolean") {
        require_keys(j, {"type", "args"}, {}, "boolean");
        std::vector<Law> parts;
        for (const auto& a : j["args"]) parts.push_back(child(a));
        return boolean_conv(std::move(parts));
    }
    if (type == "monotone") {
        auto [a, b] = two_args("monotone");
        return monotone_conv(a, b);
    }
    if (type == "orthogonal") {
        auto [a, b] = two_args("orthogonal");
        return orthogonal_conv(a, b);
    }
    if (type == "free") {
        auto [a, b] = two_args("free");
        return free_conv(a, b);
    }
    if (type == "sfree") {
        auto [a, b] = two_args("sfree");
        return sfree_conv(a, b);
    }
    if (type == "boolean_power") {
        require_keys(j, {"type", "arg", "alpha"}, {}, "boolean_power");
        return boolean_power(child(j["arg"]), resolve_cpmap(j["alpha"], d, cpmaps));
    }
    if (type == "free_power") {
        require_keys(j, {"type", "arg", "alpha"}, {}, "free_power");
        return free_power(child(j["arg"]), resolve_cpmap(j["alpha"], d, cpmaps));
    }
    if (type == "b_transform") {
        require_keys(j, {"type", "arg", "s"}, {}, "b_transform");
        return b_transform(child(j["arg"]), resolve_cpmap(j["s"], d, cpmaps));
    }
    if (type == "phi") {
        require_keys(j, {"type", "arg"}, {}, "phi");
        return phi_transform(child(j["arg"]));
    }
    throw ParseError("law: unknown type '" + type + "'");
}

Json law_to_json(const Law& law) {
    Json j = Json::object();
    j["type"] = law_kind_name(law.kind());
    switch (law.kind()) {
        case LawKind::PointMass:
            j["p"] = matrix_to_json(law.realization().p());
            break;
        case LawKind::Atomic:
        case LawKind::RealizationLeaf: {
            const Realization& r = law.realization();
            j["type"] = "realization";
            j["d"] = r.d();
            j["m"] = r.m();
            j["p"] = matrix_to_json(r.p());
            j["alpha"] = matrix_to_json(r.alpha_vec());
            j["T"] = matrix_to_json(r.t());
            break;
        }
        case LawKind::Bernoulli:
        case LawKind::Semicircular:
            j["s"] = cpmap_to_json(law.cp());
            break;
        case LawKind::Boolean:
        case LawKind::Monotone:
        case LawKind::Orthogonal:
        case LawKind::Free:
        case LawKind::SFree: {
            Json args = Json::array();
            for (std::size_t i = 0; i < law.child_count(); ++i)
                args.push_back(law_to_json(law.child(i)));
            j["args"] = std::move(args);
            break;
        }
        case LawKind::BooleanPower:
        case LawKind::FreePower:
            j["arg"] = law_to_json(law.child(0));
            j["alpha"] = cpmap_to_json(law.cp());
            break;
        case LawKind::BTrans:
            j["arg"] = law_to_json(law.child(0));
            j["s"] = cpmap_to_json(law.cp());
            break;
        case LawKind::Phi:
            j["arg"] = law_to_json(law.child(0));
            break;
    }
    return j;
}

const Law& ModelFile::law(const std::string& name) const {
    const auto it = laws.find(name);
    if (it == laws.end()) throw ParseError("model: law '" + name + "' not found");
    return it->second;
}

ModelFile parse_model(const Json& j) {
    require_keys(j, {"d"}, {"schema", "cpmaps", "laws"}, "model");
    if (j.contains("schema") && j["schema"].get<std::string>() != "ovconv/1")
        throw ParseError("model: unsupported schema (expected 'ovconv/1')");
    ModelFile model;
    model.d = j["d"].get<int>();
    if (model.d < 1) throw ParseError("model: d must be positive");
    if (j.contains("cpmaps")) {
        if (!j["cpmaps"].is_object()) throw ParseError("model: 'cpmaps' must be an object");
        for (auto it = j["cpmaps"].begin(); it != j["cpmaps"].end(); ++it)
            model.cpmaps.emplace(it.key(), parse_cpmap(it.value(), model.d));
    }
    if (j.contains("laws")) {
        if (!j["laws"].is_object()) throw ParseError("model: 'laws' must be an object");
        // two passes so laws may reference earlier names in any order
        std::map<std::string, Json> pending;
        for (auto it = j["laws"].begin(); it != j["laws"].end(); ++it)
            pending.emplace(it.key(), it.value());
        std::size_t remaining = pending.size();
        while (remaining > 0) {
            std::size_t progressed = 0;
            for (auto& [name, body] : pending) {
                if (model.laws.count(name)) continue;
                try {
                    model.laws.emplace(name, parse_law(body, model.d, model.cpmaps, model.laws));
                    ++progressed;
                } catch (const ParseError& e) {
                    if (std::string(e.what()).find("not found") == std::string::npos) throw;
                }
            }
            if (progressed == 0) throw ParseError("model: unresolved law references");
            remaining -= progressed;
        }
    }
    return model;
}

ModelFile load_model(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open model file: " + path);
    Json j;
    try {
        in >> j;
    } catch (const std::exception& e) {
        throw ParseError(std::string("model JSON: ") + e.what());
    }
    return parse_model(j);
}

Json jspec_to_json(const JSpec& spec) {
    Json j = Json::object();
    j["kind"] = jspec_kind_name(spec.kind());
    if (spec.kind() == JSpec::Kind::Custom) {
        Json words = Json::array();
        for (const auto& w : spec.words()) words.push_back(w.letters);
        j["words"] = std::move(words);
        if (spec.suffix_last()) j["suffix_rule"] = "last=" + std::to_string(*spec.suffix_last());
    }
    return j;
}

JSpec parse_jspec(const Json& j) {
    if (j.is_string()) {
        const auto kind = jspec_kind_from_string(j.get<std::string>());
        if (!kind || *kind == JSpec::Kind::Custom)
            throw ParseError("jspec: unknown builtin '" + j.get<std::string>() + "'");
        return JSpec::builtin(*kind);
    }
    require_keys(j, {"kind"}, {"words", "suffix_rule"}, "jspec");
    const auto kind = jspec_kind_from_string(j["kind"].get<std::string>());
    if (!kind) throw ParseError("jspec: unknown kind");
    if (*kind != JSpec::Kind::Custom) return JSpec::builtin(*kind);
    std::vector<Word> words;
    if (j.contains("words"))
        for (const auto& wj : j["words"]) {
            std::vector<int> letters;
            for (const auto& l : wj) letters.push_back(l.get<int>());
            words.emplace_back(std::move(letters));
        }
    std::optional<int> suffix;
    if (j.contains("suffix_rule")) {
        const std::string rule = j["suffix_rule"].get<std::string>();
        if (rule.rfind("last=", 0) != 0) throw ParseError("jspec: suffix_rule must be 'last=<i>'");
        suffix = std::stoi(rule.substr(5));
    }
    return JSpec::custom(std::move(words), suffix);
}

Json identity_case_to_json(const IdentityCase& c) {
    Json j;
    j["name"] = identity_name(c.name);
    j["d"] = c.d;
    Json laws = Json::object();
    for (const auto& [key, law] : c.laws) laws[key] = law_to_json(law);
    j["laws"] = std::move(laws);
    Json maps = Json::object();
    for (const auto& [key, m] : c.cpmaps) maps[key] = cpmap_to_json(m);
    j["cpmaps"] = std::move(maps);
    j["levels"] = c.levels;
    j["samples"] = c.samples;
    j["seed"] = c.seed;
    j["tol"] = c.tol;
    return j;
}

IdentityCase parse_identity_case(const Json& j) {
    require_keys(j, {"name", "d"}, {"laws", "cpmaps", "levels", "samples", "seed", "tol"},
                 "identity case");
    IdentityCase c;
    const auto name = identity_from_string(j["name"].get<std::string>());
    if (!name) throw ParseError("identity case: unknown name '" +
                                j["name"].get<std::string>() + "'");
    c.name = *name;
    c.d = j["d"].get<int>();
    if (j.contains("cpmaps"))
        for (auto it = j["cpmaps"].begin(); it != j["cpmaps"].end(); ++it)
            c.cpmaps.emplace(it.key(), parse_cpmap(it.value(), c.d));
    if (j.contains("laws"))
        for (auto it = j["laws"].begin(); it != j["laws"].end(); ++it)
            c.laws.emplace(it.key(), parse_law(it.value(), c.d, c.cpmaps, {}));
    if (j.contains("levels")) c.levels = j["levels"].get<std::vector<int>>();
    if (j.contains("samples")) c.samples = j["samples"].get<int>();
    if (j.contains("seed")) c.seed = j["seed"].get<std::uint64_t>();
    if (j.contains("tol")) c.tol = j["tol"].get<double>();
    return c;
}

Json identity_report_to_json(const IdentityReport& r) {
    Json j = Json::object();
    j["name"] = identity_name(r.name);
    j["d"] = r.d;
    j["tol"] = r.tol;
    j["max_residual"] = r.max_residual;
    j["pass"] = r.pass;
    Json levels = Json::array();
    for (const auto& lr : r.residuals) {
        Json e = Json::object();
        e["level"] = lr.level;
        e["max_residual"] = lr.max_residual;
        levels.push_back(std::move(e));
    }
    j["levels"] = std::move(levels);
    if (!r.warnings.empty()) j["warnings"] = r.warnings;
    return j;
}

}  // namespace ovconv
