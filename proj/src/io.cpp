#include "isopara/io.hpp"

#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include "isopara/error.hpp"

namespace isopara {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

[[noreturn]] void fail(const std::string& msg) { throw Error(ErrorCode::ParseError, msg); }

const Json& require(const Json& j, const char* key) {
    if (!j.is_object() || !j.contains(key)) fail(std::string("missing key '") + key + "'");
    return j.at(key);
}

double number(const Json& j, const std::string& what) {
    if (j.is_number()) return j.get<double>();
    if (j.is_string()) {
        const std::string s = j.get<std::string>();
        if (s == "inf" || s == "+inf") return kInf;
        if (s == "-inf") return -kInf;
    }
    fail(what + " must be a number");
}

int integer(const Json& j, const std::string& what) {
    if (!j.is_number_integer()) fail(what + " must be an integer");
    return j.get<int>();
}

Json endpoint(double v) {
    if (std::isinf(v)) return v > 0 ? Json("inf") : Json("-inf");
    return v;
}

std::vector<double> numbers(const Json& j, const std::string& what) {
    if (!j.is_array()) fail(what + " must be an array");
    std::vector<double> out;
    for (const Json& e : j) out.push_back(number(e, what));
    return out;
}

Vector vec(const Json& j, const std::string& what) {
    const std::vector<double> v = numbers(j, what);
    return Eigen::Map<const Vector>(v.data(), static_cast<Eigen::Index>(v.size()));
}

Matrix mat(const Json& j, const std::string& what) {
    if (!j.is_array()) fail(what + " must be an array of rows");
    const Eigen::Index rows = static_cast<Eigen::Index>(j.size());
    Matrix m(rows, rows);
    for (Eigen::Index i = 0; i < rows; ++i) {
        const Vector r = vec(j[i], what);
        if (r.size() != rows) fail(what + " must be square");
        m.row(i) = r.transpose();
    }
    return m;
}

Json to_json(const Vector& v) {
    Json a = Json::array();
    for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v(i));
    return a;
}

Json to_json(const Matrix& m) {
    Json a = Json::array();
    for (Eigen::Index i = 0; i < m.rows(); ++i) a.push_back(to_json(Vector(m.row(i).transpose())));
    return a;
}

Json to_json(const ResidualStats& s) { return Json{{"max", s.max}, {"rms", s.rms}}; }

// Non-finite values are not representable in JSON.
Json finite_or_null(double v) { return std::isfinite(v) ? Json(v) : Json(nullptr); }

}  // namespace

Json to_json(const Profile& p) {
    Json j;
    Json params;
    switch (p.family()) {
        case ProfileFamily::Constant:
            j["family"] = "constant";
            params["a"] = p.param_a();
            break;
        case ProfileFamily::Affine:
            j["family"] = "affine";
            params["a"] = p.param_a();
            params["b"] = p.param_b();
            break;
        case ProfileFamily::Power:
            j["family"] = "power";
            params["a"] = p.param_a();
            params["p"] = p.param_b();
            break;
        case ProfileFamily::Tabulated:
            j["family"] = "tabulated";
            params["t"] = p.nodes();
            params["f"] = p.values();
            if (p.slopes_supplied()) params["df"] = p.slopes();
            break;
    }
    j["params"] = params;
    j["interval"] = Json::array({endpoint(p.interval().lo), endpoint(p.interval().hi)});
    j["C0"] = p.C0();
    return j;
}

Profile profile_from_json(const Json& j) {
    if (!j.is_object()) fail("profile must be an object");
    const Json& fam = require(j, "family");
    if (!fam.is_string()) fail("profile family must be a string");
    const std::string family = fam.get<std::string>();
    const Json params = j.contains("params") ? j.at("params") : Json::object();
    if (!params.is_object()) fail("profile params must be an object");
    const double c0 = number(require(j, "C0"), "C0");

    Interval iv;
    if (family == "power") iv.lo = 0.0;
    if (j.contains("interval")) {
        const std::vector<double> e = numbers(j.at("interval"), "interval");
        if (e.size() != 2) fail("interval must have two entries");
        iv = {e[0], e[1]};
    }
    if (family == "constant") return Profile::constant(number(require(params, "a"), "a"), iv, c0);
    if (family == "affine")
        return Profile::affine(number(require(params, "a"), "a"), number(require(params, "b"), "b"), iv, c0);
    if (family == "power")
        return Profile::power(number(require(params, "a"), "a"), number(require(params, "p"), "p"), iv, c0);
    if (family == "tabulated") {
        const std::vector<double> t = numbers(require(params, "t"), "t");
        const std::vector<double> f = numbers(require(params, "f"), "f");
        std::optional<std::vector<double>> df;
        if (params.contains("df")) df = numbers(params.at("df"), "df");
        if (!j.contains("interval") && !t.empty()) iv = {t.front(), t.back()};
        return Profile::tabulated(t, f, iv, c0, df);
    }
    fail("unknown profile family '" + family + "'");
}

Json to_json(const CanonicalField& field) {
    Json j;
    j["kind"] = field.is_plane() ? "plane" : "cylinder";
    j["n"] = field.n();
    if (field.is_plane()) {
        j["q"] = to_json(field.q());
        j["x0"] = to_json(field.x0());
    } else {
        j["R0"] = to_json(field.R0().matrix().matrix());
        j["x_star"] = to_json(field.x_star());
        j["k"] = field.k();
        j["C1"] = field.C1();
        j["eps_axis"] = field.eps_axis();
    }
    j["profile"] = to_json(field.profile());
    return j;
}

FieldSpec field_spec_from_json(const Json& j, std::uint64_t seed) {
    if (!j.is_object()) fail("field must be an object");
    FieldSpec spec;
    const Json& kind = require(j, "kind");
    if (!kind.is_string()) fail("kind must be a string");
    const std::string k = kind.get<std::string>();
    if (k == "plane")
        spec.kind = FieldKind::Plane;
    else if (k == "cylinder")
        spec.kind = FieldKind::Cylinder;
    else
        fail("unknown field kind '" + k + "'");
    spec.n = integer(require(j, "n"), "n");
    if (spec.n < 1) fail("n must be >= 1");
    spec.profile = profile_from_json(require(j, "profile"));
    if (spec.kind == FieldKind::Plane) {
        spec.q = j.contains("q") ? vec(j.at("q"), "q") : random_unit_vector(spec.n, seed);
        spec.x0 = j.contains("x0") ? vec(j.at("x0"), "x0") : Vector(Vector::Zero(spec.n));
        return spec;
    }
    spec.C1 = number(require(j, "C1"), "C1");
    if (j.contains("eps_axis")) spec.eps_axis = number(j.at("eps_axis"), "eps_axis");
    spec.x_star = j.contains("x_star") ? vec(j.at("x_star"), "x_star") : Vector(Vector::Zero(spec.n));
    if (j.contains("R0")) {
        spec.R0 = mat(j.at("R0"), "R0");
        spec.k = j.contains("k") ? integer(j.at("k"), "k")
                                 : static_cast<int>(std::lround(spec.R0.trace()));
    } else {
        spec.k = integer(require(j, "k"), "k");
        if (spec.k < 0 || spec.k > spec.n) throw Error(ErrorCode::InvalidSpec, "cylinder needs 2 <= k <= n");
        spec.R0 = random_projection(spec.n, spec.k, seed).matrix().matrix();
    }
    return spec;
}

CanonicalField field_from_json(const Json& j, std::uint64_t seed) { return make_field(field_spec_from_json(j, seed)); }

Json to_json(const ClassificationReport& rep) {
    Json j;
    j["case"] = to_string(rep.kind);
    if (rep.kind == CaseKind::Reject) j["reason"] = rep.reason;
    j["negated"] = rep.negated;
    j["k"] = rep.k;
    j["C1"] = rep.C1;

    Json params = Json::object();
    if (rep.kind == CaseKind::Plane) {
        params["q"] = to_json(rep.q);
        params["x0"] = to_json(rep.probe);
    } else if (rep.kind == CaseKind::Cylinder) {
        params["R0"] = to_json(rep.R0);
        params["x_star"] = to_json(rep.x_star);
        params["c1"] = rep.c1;
        params["C1"] = rep.C1;
        params["k"] = rep.k;
    }
    j["params"] = params;

    if (rep.residuals) {
        const ReconstructionResiduals& r = *rep.residuals;
        j["residuals"] = Json{{"samples", r.samples},
                              {"reconstruction", to_json(r.reconstruction)},
                              {"semiexp", to_json(r.semiexp)},
                              {"gradnorm", to_json(r.gradnorm)},
                              {"laplacian", to_json(r.laplacian)}};
    } else {
        j["residuals"] = nullptr;
    }
    if (!rep.residual_note.empty()) j["residual_note"] = rep.residual_note;

    j["tolerances"] = Json{{"mode", to_string(rep.mode)}, {"h", rep.h},
                           {"group_tol", rep.group_tol}, {"tol_zero", rep.tol_zero},
                           {"eps_grad", rep.eps_grad}, {"eps_axis", rep.eps_axis}};
    Json diag;
    diag["probe"] = to_json(rep.probe);
    diag["onelap"] = finite_or_null(rep.onelap);
    diag["eigenvalues"] = rep.eigenvalues;
    diag["gaps"] = rep.gaps;
    diag["kappas"] = rep.kappas;
    diag["mults"] = rep.mults;
    if (!rep.cartan.empty()) diag["cartan"] = rep.cartan;
    diag["normal_residual"] = rep.normal_residual;
    diag["assumption"] = rep.assumption;
    j["diagnostics"] = diag;
    if (rep.profile) j["profile"] = to_json(*rep.profile);
    return j;
}

Json to_json(const SuiteResult& res) {
    Json j;
    j["suite"] = to_string(res.suite);
    j["passed"] = res.passed;
    j["checks"] = res.checks;
    Json metrics = Json::object();
    for (const auto& [k, v] : res.metrics) metrics[k] = finite_or_null(v);
    j["metrics"] = metrics;
    Json tols = Json::object();
    for (const auto& [k, v] : res.tolerances) tols[k] = v;
    j["tolerances"] = tols;
    if (!res.note.empty()) j["note"] = res.note;
    return j;
}

Json read_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) fail("cannot open '" + path + "'");
    try {
        return Json::parse(in);
    } catch (const nlohmann::json::exception& e) {
        fail("'" + path + "': " + e.what());
    }
}

void write_text_file(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error(ErrorCode::InvalidArgument, "cannot write '" + path + "'");
    out << text;
    if (!out) throw Error(ErrorCode::InvalidArgument, "failed writing '" + path + "'");
}

std::string dump(const Json& j) { return j.dump(2) + "\n"; }

}  // namespace isopara
