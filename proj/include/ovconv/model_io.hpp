#pragma once

#include <map>
#include <string>

#include <json.hpp>

#include "ovconv/convolve.hpp"
#include "ovconv/fock.hpp"
#include "ovconv/transforms.hpp"

namespace ovconv {

using Json = nlohmann::json;

// Named laws and CP maps sharing one base dimension. Parsing is strict:
// unknown keys and dangling references are rejected.
struct ModelFile {
    int d = 1;
    std::map<std::string, CPMap> cpmaps;
    std::map<std::string, Law> laws;

    const Law& law(const std::string& name) const;
};

ModelFile parse_model(const Json& j);
ModelFile load_model(const std::string& path);

// complex scalars as [re, im]; matrices as row-major nested arrays
Json complex_to_json(Complex z);
Complex parse_complex(const Json& j);
Json matrix_to_json(const Matrix& m);
Matrix parse_matrix(const Json& j);

Json cpmap_to_json(const CPMap& m);
CPMap parse_cpmap(const Json& j, int d);

Json law_to_json(const Law& law);
// cpmaps may be referenced by name from the given table
Law parse_law(const Json& j, int d, const std::map<std::string, CPMap>& cpmaps,
              const std::map<std::string, Law>& laws);

Json jspec_to_json(const JSpec& spec);
JSpec parse_jspec(const Json& j);

Json identity_case_to_json(const IdentityCase& c);
IdentityCase parse_identity_case(const Json& j);

Json identity_report_to_json(const IdentityReport& r);

}  // namespace ovconv
