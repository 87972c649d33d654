#include "isopara/cli.hpp"

#include <charconv>
#include <cmath>
#include <optional>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "CLI11.hpp"

#include "isopara/classify.hpp"
#include "isopara/error.hpp"
#include "isopara/fields.hpp"
#include "isopara/grid.hpp"
#include "isopara/io.hpp"
#include "isopara/moments.hpp"
#include "isopara/profile.hpp"
#include "isopara/verify.hpp"

namespace isopara::cli {

namespace {

// Thrown for malformed input; mapped to exit code 2.
struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

std::string shortest(double v) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

std::vector<double> parse_list(const std::string& text, const std::string& what) {
    std::vector<double> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        std::size_t used = 0;
        double v = 0.0;
        try {
            v = std::stod(item, &used);
        } catch (const std::exception&) {
            throw UsageError(what + ": cannot parse '" + item + "'");
        }
        if (used != item.size() || !std::isfinite(v)) throw UsageError(what + ": cannot parse '" + item + "'");
        out.push_back(v);
    }
    if (out.empty()) throw UsageError(what + " is empty");
    return out;
}

std::vector<int> parse_ints(const std::string& text, const std::string& what) {
    std::vector<int> out;
    for (double v : parse_list(text, what)) {
        if (v != std::floor(v) || v < 1) throw UsageError(what + " must be positive integers");
        out.push_back(static_cast<int>(v));
    }
    return out;
}

Vector to_vector(const std::vector<double>& v) {
    return Eigen::Map<const Vector>(v.data(), static_cast<Eigen::Index>(v.size()));
}

std::uint64_t default_seed() {
    if (const char* env = std::getenv("ISOPARA_SEED")) {
        char* end = nullptr;
        const unsigned long long v = std::strtoull(env, &end, 10);
        if (end != env && *end == '\0') return v;
    }
    return 0;
}

bool is_csv(const std::string& path) {
    return path.size() >= 4 && path.compare(path.size() - 4, 4, ".csv") == 0;
}

// Load-time failures are schema errors.
template <class F>
auto load(F&& f) -> decltype(f()) {
    try {
        return f();
    } catch (const Error& e) {
        throw UsageError(e.what());
    }
}

void emit(const std::string& path, const std::string& text, std::ostream& out) {
    if (path.empty())
        out << text;
    else
        write_text_file(path, text);
}

struct SynthesizeArgs {
    std::string spec, out, csv;
    int samples = 0;
};

int synthesize(const SynthesizeArgs& a, std::uint64_t seed, std::ostream& out) {
    const CanonicalField field = load([&] { return field_from_json(read_json_file(a.spec), seed); });
    emit(a.out, dump(to_json(field)), out);
    if (a.samples > 0) {
        const Probe u = analytic_probe(field);
        std::ostringstream csv;
        for (int i = 0; i < field.n(); ++i) csv << "x" << i + 1 << ",";
        csv << "u,gradnorm,laplacian,onelap\n";
        for (const Vector& x : sample_admissible(field, a.samples, seed + 1)) {
            const Operators ops = operators(u.jet(x));
            for (int i = 0; i < x.size(); ++i) csv << shortest(x(i)) << ",";
            csv << shortest(u.value(x)) << "," << shortest(ops.gradnorm) << "," << shortest(ops.laplacian) << ","
                << shortest(ops.onelap) << "\n";
        }
        if (a.csv.empty())
            throw UsageError("--samples needs --csv");
        write_text_file(a.csv, csv.str());
    }
    return 0;
}

struct ClassifyArgs {
    std::string field, at, mode, report;
    double h = 0.0;
    double tol = 0.0;
};

int classify_cmd(const ClassifyArgs& a, std::uint64_t seed, std::ostream& out) {
    const Vector x0 = to_vector(parse_list(a.at, "--at"));
    Probe probe;
    if (is_csv(a.field)) {
        if (a.mode == "analytic") throw UsageError("grid fields only support --mode fd");
        const GridField grid = load([&] { return GridField::read_csv_file(a.field); });
        probe = fd_probe(grid.as_blackbox(), grid.n(), a.h);
    } else {
        const CanonicalField field = load([&] { return field_from_json(read_json_file(a.field), seed); });
        if (a.mode == "fd")
            probe = fd_probe(analytic_probe(field).value, field.n(), a.h);
        else
            probe = analytic_probe(field);
    }
    if (x0.size() != probe.n) throw UsageError("--at has the wrong dimension");

    ClassifyOptions opts;
    opts.seed = seed;
    if (a.tol > 0.0) {
        opts.group_tol = a.tol;
        opts.tol_zero = 0.1 * a.tol;
    }
    ClassificationReport rep;
    try {
        rep = classify(probe, x0, opts);
    } catch (const Error& e) {
        if (e.code() != ErrorCode::CriticalPoint) throw;
        rep.kind = CaseKind::Reject;
        rep.reason = "CriticalPoint";
        rep.probe = x0;
        rep.mode = probe.mode;
        rep.group_tol = opts.group_tol;
        rep.tol_zero = opts.tol_zero;
        rep.eps_grad = opts.eps_grad;
        rep.eps_axis = opts.eps_axis;
    }
    emit(a.report, dump(to_json(rep)), out);
    return 0;
}

struct VerifyArgs {
    std::string field, suite, report;
    int samples = 100;
    double h = 1e-3;
};

int verify_cmd(const VerifyArgs& a, std::uint64_t seed, std::ostream& out) {
    if (is_csv(a.field)) throw UsageError("verify needs a canonical field description");
    const CanonicalField field = load([&] { return field_from_json(read_json_file(a.field), seed); });
    const Suite suite = load([&] { return parse_suite(a.suite); });
    SuiteOptions opts;
    opts.samples = a.samples;
    opts.seed = seed;
    opts.h = a.h;
    const SuiteResult res = run_suite(field, suite, opts);
    emit(a.report, dump(to_json(res)), out);
    return res.passed ? 0 : 1;
}

struct MomentArgs {
    std::string C, d, guess, out;
    double tol = 1e-12;
};

int moments_cmd(const MomentArgs& a, std::ostream& out) {
    MomentSystem sys;
    sys.C = parse_list(a.C, "--C");
    sys.d = parse_ints(a.d, "--d");
    load([&] {
        sys.validate();
        return 0;
    });
    std::vector<double> guess = a.guess.empty() ? heuristic_guess(sys) : parse_list(a.guess, "--guess");
    if (guess.size() != sys.d.size()) throw UsageError("--guess must have one entry per multiplicity");
    const std::vector<double> kappas = invert_moments(sys, guess, a.tol);
    std::string text = "{\"kappas\":[";
    for (std::size_t i = 0; i < kappas.size(); ++i) text += (i ? "," : "") + shortest(kappas[i]);
    text += "]}\n";
    emit(a.out, text, out);
    return 0;
}

struct ProfileArgs {
    std::string spec, op;
    int k = 0;
    double C1 = 0.0;
    double at = 0.0;
    std::optional<double> c0, c1;
};

int profile_cmd(const ProfileArgs& a, std::ostream& out) {
    const Profile p = load([&] { return profile_from_json(read_json_file(a.spec)); });
    const bool cyl_op = a.op == "Fk" || a.op == "Uk";
    if (cyl_op && a.k == 0) throw UsageError("--op " + a.op + " needs --k and --C1");
    const TransformParams params = load([&] {
        return a.k != 0 ? TransformParams::cylinder(a.k, a.C1) : TransformParams::plane();
    });
    const TransformParams plane = TransformParams::plane();
    double value = 0.0;
    if (a.op == "F")
        value = forward_map(p, plane, a.at);
    else if (a.op == "Fk")
        value = forward_map(p, params, a.at);
    else if (a.op == "U")
        value = inverse_map(p, plane, a.at);
    else if (a.op == "Uk")
        value = inverse_map(p, params, a.at);
    else if (a.op == "g")
        value = synth_g(p, params, a.at);
    else if (a.op == "G")
        value = visc_transform(p, [&](double t) { return synth_g(p, params, t); }, a.c0.value_or(p.C0()),
                               a.c1.value_or(p.C0()), a.at);
    else
        throw UsageError("unknown --op '" + a.op + "'");
    out << shortest(value) << "\n";
    return 0;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Synthesis, verification and classification of isoparametric fields", "isopara"};
    // -h is taken by the finite-difference step.
    app.set_help_flag("--help", "Print this help message and exit");
    app.require_subcommand(1);
    std::uint64_t seed = default_seed();

    SynthesizeArgs sa;
    auto* syn = app.add_subcommand("synthesize", "Write a canonical field and optional sample table");
    syn->add_option("--spec", sa.spec, "Field JSON")->required();
    syn->add_option("--out", sa.out, "Canonical field JSON output");
    syn->add_option("--samples", sa.samples, "Number of sample points")->check(CLI::NonNegativeNumber);
    syn->add_option("--csv", sa.csv, "Sample table output");
    syn->add_option("--seed", seed, "Random seed");

    ClassifyArgs ca;
    auto* cls = app.add_subcommand("classify", "Classify a field at a probe point");
    cls->add_option("--field", ca.field, "Field JSON or grid CSV")->required();
    cls->add_option("--at", ca.at, "Probe point x1,...,xn")->required();
    cls->add_option("--mode", ca.mode, "Jet mode")->check(CLI::IsMember({"analytic", "fd"}));
    cls->add_option("--h", ca.h, "Finite-difference step")->check(CLI::PositiveNumber);
    cls->add_option("--tol", ca.tol, "Eigenvalue grouping tolerance")->check(CLI::PositiveNumber);
    cls->add_option("--report", ca.report, "Report JSON output");
    cls->add_option("--seed", seed, "Random seed");

    VerifyArgs va;
    auto* ver = app.add_subcommand("verify", "Run a verification suite on a canonical field");
    ver->add_option("--field", va.field, "Field JSON")->required();
    ver->add_option("--suite", va.suite, "flow|hessian-evolution|harmonic|isoparametric|cartan")->required();
    ver->add_option("--report", va.report, "Report JSON output");
    ver->add_option("--samples", va.samples, "Sample points")->check(CLI::PositiveNumber);
    ver->add_option("--h", va.h, "Stencil step for the harmonic suite")->check(CLI::PositiveNumber);
    ver->add_option("--seed", seed, "Random seed");

    MomentArgs ma;
    auto* inv = app.add_subcommand("invert-moments", "Recover distinct eigenvalues from power sums");
    inv->add_option("--C", ma.C, "Moments C1,...,Cm")->required();
    inv->add_option("--d", ma.d, "Multiplicities d1,...,dm")->required();
    inv->add_option("--guess", ma.guess, "Initial guess y1,...,ym");
    inv->add_option("--tol", ma.tol, "Residual tolerance")->check(CLI::PositiveNumber);
    inv->add_option("--out", ma.out, "JSON output");

    ProfileArgs pa;
    auto* prof = app.add_subcommand("profile", "Evaluate a profile transform");
    prof->add_option("--spec", pa.spec, "Profile JSON")->required();
    prof->add_option("--op", pa.op, "F|Fk|U|Uk|g|G")->required()->check(CLI::IsMember({"F", "Fk", "U", "Uk", "g", "G"}));
    prof->add_option("--k", pa.k, "Cylinder dimension k");
    prof->add_option("--C1", pa.C1, "1-Laplacian at the base value");
    prof->add_option("--at", pa.at, "Argument")->required();
    prof->add_option("--c0", pa.c0, "Inner base point of G (default C0)");
    prof->add_option("--c1", pa.c1, "Outer base point of G (default C0)");

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return 0;
    } catch (const CLI::CallForAllHelp&) {
        out << app.help("", CLI::AppFormatMode::All);
        return 0;
    } catch (const CLI::ParseError& e) {
        err << "isopara: " << e.what() << "\n";
        return 2;
    }

    try {
        if (syn->parsed()) return synthesize(sa, seed, out);
        if (cls->parsed()) return classify_cmd(ca, seed, out);
        if (ver->parsed()) return verify_cmd(va, seed, out);
        if (inv->parsed()) return moments_cmd(ma, out);
        if (prof->parsed()) return profile_cmd(pa, out);
    } catch (const UsageError& e) {
        err << "isopara: " << e.what() << "\n";
        return 2;
    } catch (const Error& e) {
        err << "isopara: " << e.what() << "\n";
        return 1;
    }
    return 2;
}

}  // namespace isopara::cli
