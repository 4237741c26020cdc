#include "qfk/suite.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <sstream>

#include "qfk/models.hpp"

namespace qfk
{

namespace
{

// ------------------------------------------------------------ spec parsing

void require_keys(const json &j, const std::string &path, std::initializer_list<const char *> allowed)
{
    if (!j.is_object()) {
        throw spec_error(path, "expected an object");
    }
    for (const auto &[key, value] : j.items()) {
        bool ok = false;
        for (const char *a : allowed) {
            ok = ok || key == a;
        }
        if (!ok) {
            throw spec_error(path + "/" + key, "unknown field");
        }
    }
}

double number(const json &j, const std::string &path)
{
    if (!j.is_number()) {
        throw spec_error(path, "expected a number");
    }
    const double v = j.get<double>();
    if (!std::isfinite(v)) {
        throw spec_error(path, "must be finite");
    }
    return v;
}

double positive(const json &j, const std::string &path)
{
    const double v = number(j, path);
    if (!(v > 0.0)) {
        throw spec_error(path, "must be positive");
    }
    return v;
}

long long integer(const json &j, const std::string &path, long long lo, long long hi)
{
    if (!j.is_number_integer()) {
        throw spec_error(path, "expected an integer");
    }
    const auto v = j.get<long long>();
    if (v < lo || v > hi) {
        throw spec_error(path, "must lie in [" + std::to_string(lo) + ", " + std::to_string(hi) + "]");
    }
    return v;
}

std::vector<int> powers(const json &j, const std::string &path, int n)
{
    if (!j.is_array() || static_cast<int>(j.size()) != n) {
        throw spec_error(path, "expected " + std::to_string(n) + " exponents");
    }
    std::vector<int> out;
    for (std::size_t i = 0; i < j.size(); ++i) {
        out.push_back(static_cast<int>(integer(j[i], path + "/" + std::to_string(i), 0, 15)));
    }
    return out;
}

cplx complex_pair(const json &j, const std::string &path)
{
    if (!j.is_array() || j.size() != 2) {
        throw spec_error(path, "expected [re, im]");
    }
    return {number(j[0], path + "/0"), number(j[1], path + "/1")};
}

// ------------------------------------------------------------ suite pieces

struct CheckDef {
    const char *id;
    const char *anchor;
    const char *tolerance_class; // series, sampled or identity
    bool lower_bound = false;
};

const std::vector<CheckDef> &check_table()
{
    static const std::vector<CheckDef> table = {
        {"input_validation", "potential is real, Hessian at the base point Hermitian positive definite", "identity"},
        {"curvature_identity", "d(d eta restricted to dz) = c omega", "identity"},
        {"affine_identity", "d_j d_k p_i = Gamma^l_jk d_l p_i", "identity"},
        {"build_halves", "contact form downstairs has no negative powers of u0", "series"},
        {"mirror_symmetry", "antiholomorphic half equals the holomorphic half of the swapped potential", "series"},
        {"darboux", "theta = du0 + 2c sum u_i dq_i", "series"},
        {"contact_nondegeneracy", "theta ^ (d theta)^n = +-(2c)^n n! du0 ^ du ^ dq", "series"},
        {"cstar_invariance", "L_X theta = theta for the Euler field X", "series"},
        {"moment_section", "theta(X) = u0", "series"},
        {"divisor", "zero set of theta(X) is {u0 = 0} with unit factor 1", "series"},
        {"legendrian", "theta vanishes on the hyperplanes {q = q0, u0 = a}", "series"},
        {"transition_roundtrip", "transition composed with its reverse is the identity", "series"},
        {"overlap_scaling", "transition pulls theta' back to -(e^eta u0)^-2 theta", "sampled"},
        {"kernel_agreement", "transition maps ker theta into ker theta'", "sampled"},
        {"sigma_involution", "sigma o sigma = id", "series"},
        {"sigma_fixed_point_free", "|sigma(x) - x| stays bounded away from 0", "sampled", true},
        {"sigma_antiholomorphic", "holomorphic Wirtinger derivative of sigma vanishes", "sampled"},
        {"sigma_kernel_conjugation", "d sigma maps ker phi to ker phi on the real slice", "sampled"},
        {"fixed_point_metric", "metric on TS + J TS is two copies of g and positive definite", "identity"},
        {"cross_check_example1", "transition agrees with CP^{2n+1} after 1-jet identification", "sampled"},
        {"cross_check_example2", "transition agrees with the flag manifold after 1-jet identification", "sampled"},
    };
    return table;
}

const CheckDef &check_def(const std::string &id)
{
    for (const auto &d : check_table()) {
        if (id == d.id) {
            return d;
        }
    }
    throw std::invalid_argument("unknown check id " + id);
}

double tolerance_for(const GeometrySpec &spec, const CheckDef &def)
{
    const auto it = spec.tolerances.checks.find(def.id);
    if (it != spec.tolerances.checks.end()) {
        return it->second;
    }
    const std::string cls = def.tolerance_class;
    if (cls == "identity") {
        return spec.tolerances.identity;
    }
    return cls == "series" ? spec.tolerances.series : spec.tolerances.sampled;
}

struct Outcome {
    Outcome(double r = 0.0, int n = 0, std::string msg = {}, bool deg = false, bool fail = false)
        : residual(r), samples(n), message(std::move(msg)), degenerate(deg), force_fail(fail)
    {
    }
    double residual;
    int samples;
    std::string message;
    bool degenerate;
    bool force_fail;
};

std::string status_name(Status s)
{
    switch (s) {
    case Status::pass:
        return "pass";
    case Status::degenerate:
        return "degenerate";
    default:
        return "fail";
    }
}

std::string format_double(double v)
{
    if (std::isnan(v)) {
        return "\"nan\"";
    }
    if (std::isinf(v)) {
        return v > 0 ? "\"inf\"" : "\"-inf\"";
    }
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.12e", v);
    return buf;
}

void write_json(std::ostringstream &os, const json &j, int indent)
{
    const std::string pad(static_cast<std::size_t>(indent + 2), ' ');
    const std::string close(static_cast<std::size_t>(indent), ' ');
    if (j.is_object()) {
        if (j.empty()) {
            os << "{}";
            return;
        }
        os << "{\n";
        bool first = true;
        for (const auto &[k, v] : j.items()) {
            os << (first ? "" : ",\n") << pad << json(k).dump() << ": ";
            write_json(os, v, indent + 2);
            first = false;
        }
        os << "\n" << close << "}";
    } else if (j.is_array()) {
        if (j.empty()) {
            os << "[]";
            return;
        }
        os << "[\n";
        for (std::size_t i = 0; i < j.size(); ++i) {
            os << (i ? ",\n" : "") << pad;
            write_json(os, j[i], indent + 2);
        }
        os << "\n" << close << "]";
    } else if (j.is_number_float()) {
        os << format_double(j.get<double>());
    } else {
        os << j.dump();
    }
}

json series_json(const Series &s)
{
    json terms = json::array();
    for (const auto &t : s.terms()) {
        std::string mono;
        for (std::size_t i = 0; i < s.vars().size(); ++i) {
            const int k = t.exp[i];
            if (k > 0) {
                mono += (mono.empty() ? "" : "*") + s.vars()[i].name + (k > 1 ? "^" + std::to_string(k) : "");
            }
        }
        terms.push_back({{"monomial", mono.empty() ? "1" : mono}, {"re", t.coeff.real()}, {"im", t.coeff.imag()}});
    }
    return terms;
}

json form_json(const Form &a)
{
    json out = json::object();
    for (const auto &[I, f] : a.terms()) {
        std::string key;
        for (const auto &name : index_names(a.chart(), I)) {
            key += (key.empty() ? "d" : "^d") + name;
        }
        out[key.empty() ? "1" : key] = series_json(f);
    }
    return out;
}

json chart_map_json(const ChartMap &m)
{
    json out = json::object();
    for (std::size_t i = 0; i < m.components.size(); ++i) {
        out[m.target[i].name] = series_json(m.components[i]);
    }
    return out;
}

json complex_json(cplx v)
{
    return json::array({v.real(), v.imag()});
}

} // namespace

// ------------------------------------------------------------------- specs

GeometrySpec parse_spec(const json &j)
{
    require_keys(j, "", {"name", "potential", "n", "c", "order", "base_point", "samples", "radii", "tolerances",
                         "seed", "cross_check"});
    GeometrySpec spec;
    auto &p = spec.potential;
    if (!j.contains("n")) {
        throw spec_error("/n", "required field missing");
    }
    p.n = static_cast<int>(integer(j["n"], "/n", 1, 6));
    if (!j.contains("c")) {
        throw spec_error("/c", "required field missing");
    }
    p.c = number(j["c"], "/c");
    if (j.contains("order")) {
        p.order = static_cast<int>(integer(j["order"], "/order", 4, 12));
    }
    if (j.contains("name") == j.contains("potential")) {
        throw spec_error("", "exactly one of name and potential is required");
    }
    if (j.contains("name")) {
        if (!j["name"].is_string()) {
            throw spec_error("/name", "expected a string");
        }
        p.name = j["name"].get<std::string>();
        if (p.name != "flat" && p.name != "fubini_study") {
            throw spec_error("/name", "unknown built-in '" + p.name + "'");
        }
    } else {
        require_keys(j["potential"], "/potential", {"terms"});
        const json &terms = j["potential"].value("terms", json());
        if (!terms.is_array() || terms.empty()) {
            throw spec_error("/potential/terms", "expected a non-empty array");
        }
        for (std::size_t i = 0; i < terms.size(); ++i) {
            const std::string path = "/potential/terms/" + std::to_string(i);
            require_keys(terms[i], path, {"z", "zb", "re", "im"});
            if (!terms[i].contains("z") || !terms[i].contains("zb") || !terms[i].contains("re")) {
                throw spec_error(path, "terms need z, zb and re");
            }
            p.terms.push_back({powers(terms[i]["z"], path + "/z", p.n), powers(terms[i]["zb"], path + "/zb", p.n),
                               cplx(number(terms[i]["re"], path + "/re"),
                                    terms[i].contains("im") ? number(terms[i]["im"], path + "/im") : 0.0)});
        }
    }
    if (j.contains("base_point")) {
        const json &bp = j["base_point"];
        if (!bp.is_array() || static_cast<int>(bp.size()) != p.n) {
            throw spec_error("/base_point", "expected n [re, im] pairs");
        }
        for (std::size_t i = 0; i < bp.size(); ++i) {
            p.base_point.push_back(complex_pair(bp[i], "/base_point/" + std::to_string(i)));
        }
    }
    if (j.contains("samples")) {
        const json &s = j["samples"];
        require_keys(s, "/samples", {"overlap", "real_slice", "legendrian", "cross_check"});
        if (s.contains("overlap")) {
            spec.overlap_samples = static_cast<int>(integer(s["overlap"], "/samples/overlap", 1, 100000));
        }
        if (s.contains("real_slice")) {
            spec.real_slice_samples = static_cast<int>(integer(s["real_slice"], "/samples/real_slice", 1, 100000));
        }
        if (s.contains("legendrian")) {
            spec.legendrian_leaves = static_cast<int>(integer(s["legendrian"], "/samples/legendrian", 1, 100000));
        }
        if (s.contains("cross_check")) {
            spec.cross_check_samples =
                static_cast<int>(integer(s["cross_check"], "/samples/cross_check", 1, 100000));
        }
    }
    if (j.contains("radii")) {
        const json &r = j["radii"];
        require_keys(r, "/radii", {"base", "fibre_min", "fibre_max", "cross_check"});
        if (r.contains("base")) {
            spec.box.radius = positive(r["base"], "/radii/base");
        }
        if (r.contains("fibre_min")) {
            spec.box.fibre_min = positive(r["fibre_min"], "/radii/fibre_min");
        }
        if (r.contains("fibre_max")) {
            spec.box.fibre_max = positive(r["fibre_max"], "/radii/fibre_max");
        }
        if (r.contains("cross_check")) {
            spec.cross_check_radius = positive(r["cross_check"], "/radii/cross_check");
        }
    }
    if (spec.box.radius > 0.5 || spec.cross_check_radius > 0.5) {
        throw spec_error("/radii", "base radii must not exceed the evaluation radius 0.5");
    }
    if (!(spec.box.fibre_min < spec.box.fibre_max)) {
        throw spec_error("/radii", "fibre_min must be below fibre_max");
    }
    if (j.contains("tolerances")) {
        const json &t = j["tolerances"];
        require_keys(t, "/tolerances", {"series", "sampled", "identity", "checks"});
        if (t.contains("series")) {
            spec.tolerances.series = positive(t["series"], "/tolerances/series");
        }
        if (t.contains("sampled")) {
            spec.tolerances.sampled = positive(t["sampled"], "/tolerances/sampled");
        }
        if (t.contains("identity")) {
            spec.tolerances.identity = positive(t["identity"], "/tolerances/identity");
        }
        if (t.contains("checks")) {
            if (!t["checks"].is_object()) {
                throw spec_error("/tolerances/checks", "expected an object");
            }
            for (const auto &[id, v] : t["checks"].items()) {
                const std::string path = "/tolerances/checks/" + id;
                try {
                    check_def(id);
                } catch (const std::invalid_argument &) {
                    throw spec_error(path, "unknown check id");
                }
                spec.tolerances.checks[id] = positive(v, path);
            }
        }
    }
    if (j.contains("seed")) {
        spec.seed = static_cast<std::uint64_t>(integer(j["seed"], "/seed", 0, (1LL << 53)));
    }
    if (j.contains("cross_check")) {
        if (!j["cross_check"].is_string()) {
            throw spec_error("/cross_check", "expected a string");
        }
        spec.cross_check = j["cross_check"].get<std::string>();
        if (spec.cross_check != "example1" && spec.cross_check != "example2") {
            throw spec_error("/cross_check", "expected example1 or example2");
        }
        if (p.name != "fubini_study" || !p.base_point.empty()) {
            throw spec_error("/cross_check", "model cross-checks need the fubini_study potential at the origin");
        }
    }
    try {
        load_potential(p);
    } catch (const kahler_error &e) {
        throw spec_error(j.contains("name") ? "/name" : "/potential", e.what());
    } catch (const series_error &e) {
        throw spec_error(j.contains("name") ? "/name" : "/potential", e.what());
    }
    return spec;
}

GeometrySpec load_spec(const std::string &path)
{
    std::ifstream in(path);
    if (!in) {
        throw spec_error("", "cannot open " + path);
    }
    json j;
    try {
        j = json::parse(in);
    } catch (const json::parse_error &e) {
        throw spec_error("", std::string("parse error: ") + e.what());
    }
    return parse_spec(j);
}

json spec_to_json(const GeometrySpec &spec)
{
    const auto &p = spec.potential;
    json j;
    if (!p.name.empty()) {
        j["name"] = p.name;
    } else {
        json terms = json::array();
        for (const auto &t : p.terms) {
            terms.push_back({{"z", t.z_powers}, {"zb", t.zb_powers}, {"re", t.coeff.real()}, {"im", t.coeff.imag()}});
        }
        j["potential"] = {{"terms", terms}};
    }
    j["n"] = p.n;
    j["c"] = p.c;
    j["order"] = p.order;
    json bp = json::array();
    for (auto v : p.base_point) {
        bp.push_back(complex_json(v));
    }
    if (!bp.empty()) {
        j["base_point"] = bp;
    }
    j["samples"] = {{"overlap", spec.overlap_samples},
                    {"real_slice", spec.real_slice_samples},
                    {"legendrian", spec.legendrian_leaves},
                    {"cross_check", spec.cross_check_samples}};
    j["radii"] = {{"base", spec.box.radius},
                  {"fibre_min", spec.box.fibre_min},
                  {"fibre_max", spec.box.fibre_max},
                  {"cross_check", spec.cross_check_radius}};
    json checks = json::object();
    for (const auto &[id, v] : spec.tolerances.checks) {
        checks[id] = v;
    }
    j["tolerances"] = {{"series", spec.tolerances.series},
                       {"sampled", spec.tolerances.sampled},
                       {"identity", spec.tolerances.identity},
                       {"checks", checks}};
    j["seed"] = spec.seed;
    if (!spec.cross_check.empty()) {
        j["cross_check"] = spec.cross_check;
    }
    return j;
}

// ------------------------------------------------------------------- suite

bool Report::pass() const
{
    for (const auto &c : checks) {
        if (c.status == Status::fail) {
            return false;
        }
    }
    return true;
}

std::vector<std::string> suite_ids(const GeometrySpec &spec)
{
    std::vector<std::string> ids;
    for (const auto &d : check_table()) {
        const std::string id = d.id;
        if (id.rfind("cross_check_", 0) == 0 && id != "cross_check_" + spec.cross_check) {
            continue;
        }
        ids.push_back(id);
    }
    return ids;
}

Report run_suite(const GeometrySpec &spec, const SuiteOptions &opts)
{
    using clock = std::chrono::steady_clock;
    Report report;
    report.config = spec_to_json(spec);

    std::vector<std::string> ids;
    for (const auto &id : suite_ids(spec)) {
        if (!opts.only || opts.only->count(id)) {
            ids.push_back(id);
        }
    }

    const KahlerData k = load_potential(spec.potential);
    const std::uint64_t seed = spec.seed;

    // Assembly is built once, serially; a failure here fails every check
    // that depends on it with the construction diagnostic.
    std::optional<TwistorAssembly> assembly;
    std::string build_error;
    const auto t_build = clock::now();
    try {
        assembly = assemble(k);
    } catch (const std::exception &e) {
        build_error = e.what();
    }
    const double build_time = std::chrono::duration<double>(clock::now() - t_build).count();

    std::vector<Vec> overlap, real_slice;
    if (assembly) {
        overlap = sample_upstairs(k.n, spec.overlap_samples, seed, spec.box, false);
        real_slice = sample_upstairs(k.n, spec.real_slice_samples, seed + 1, spec.box, true);
    }

    auto run_one = [&](const std::string &id) -> Outcome {
        if (id == "input_validation") {
            return {residual(bar_swap(k.kappa), k.kappa), 0, "", false, false};
        }
        if (id == "curvature_identity") {
            return {curvature_check(k), 0};
        }
        if (id == "affine_identity") {
            return {affine_check(k), 0};
        }
        if (!assembly) {
            return {std::numeric_limits<double>::infinity(), 0, "construction failed: " + build_error, false, true};
        }
        const TwistorAssembly &A = *assembly;
        if (id == "build_halves") {
            return {std::max(A.hol.laurent_remainder, A.antihol.laurent_remainder), 2};
        }
        if (id == "mirror_symmetry") {
            return {mirror_residual(k, A.antihol), 0};
        }
        if (id == "darboux") {
            return {std::max(darboux_residual(A.hol), darboux_residual(A.antihol)), 2};
        }
        if (id == "contact_nondegeneracy") {
            const auto r1 = contact_check(A.hol), r2 = contact_check(A.antihol);
            if (r1.degenerate) {
                return {std::max(std::abs(r1.top), std::abs(r2.top)), 2, "degenerate (hyperkähler limit)", true};
            }
            std::ostringstream msg;
            msg.precision(12);
            msg << "top coefficient " << r1.top.real() << ", expected magnitude " << r1.expected;
            return {std::max(r1.residual, r2.residual), 2, msg.str()};
        }
        if (id == "cstar_invariance") {
            return {std::max(cstar_residual(A.hol), cstar_residual(A.antihol)), 2};
        }
        if (id == "moment_section") {
            return {std::max(moment_residual(A.hol), moment_residual(A.antihol)), 2};
        }
        if (id == "divisor") {
            const auto a = divisor_D10(A.hol), b = divisor_D10(A.antihol);
            return {std::max({a.restricted, a.unit, b.restricted, b.unit}), 2};
        }
        if (id == "legendrian") {
            const auto a = legendrian_check(A.hol, spec.legendrian_leaves, seed + 2, spec.box.radius);
            const auto b = legendrian_check(A.antihol, spec.legendrian_leaves, seed + 2, spec.box.radius);
            return {std::max(a.residual, b.residual), a.leaves + b.leaves};
        }
        if (id == "transition_roundtrip") {
            const auto r = transition_roundtrip(A, overlap);
            return {r.residual, r.samples};
        }
        if (id == "overlap_scaling") {
            const auto r = overlap_scaling(A, overlap);
            return {r.residual, r.samples};
        }
        if (id == "kernel_agreement") {
            const auto r = kernel_agreement(A, overlap, seed + 3);
            return {r.residual, r.samples};
        }
        if (id == "sigma_involution") {
            const auto r = sigma_involution(A, overlap);
            return {r.residual, r.samples};
        }
        if (id == "sigma_fixed_point_free") {
            const auto r = sigma_min_displacement(A, overlap);
            return {r.residual, r.samples};
        }
        if (id == "sigma_antiholomorphic") {
            const auto r = sigma_antiholomorphic(A, overlap);
            return {r.residual, r.samples};
        }
        if (id == "sigma_kernel_conjugation") {
            const auto r = sigma_kernel_conjugation(A, real_slice, seed + 4);
            return {r.residual, r.samples};
        }
        if (id == "fixed_point_metric") {
            double worst = 0.0, lowest = std::numeric_limits<double>::infinity();
            std::vector<Vec> pts{Vec::Zero(2 * k.n + 1)};
            pts.insert(pts.end(), real_slice.begin(), real_slice.end());
            for (const auto &x : pts) {
                const auto m = fixed_point_metric(k, x.head(k.n));
                worst = std::max(worst, m.copy_residual);
                lowest = std::min(lowest, m.min_eigenvalue);
            }
            std::ostringstream msg;
            msg.precision(12);
            msg << "lowest eigenvalue " << lowest;
            return {worst, static_cast<int>(pts.size()), msg.str(), false, !(lowest > 0.0)};
        }
        if (id == "cross_check_example1" || id == "cross_check_example2") {
            const auto model = make_model(spec.cross_check, k.n);
            SampleBox box = spec.box;
            box.radius = spec.cross_check_radius;
            const auto r = cross_check(A, *model, spec.cross_check_samples, seed + 5, box);
            std::ostringstream msg;
            msg.precision(12);
            msg << "fibre scalar " << r.mu_b.real() << (r.mu_b.imag() < 0 ? "-" : "+") << std::abs(r.mu_b.imag())
                << "i";
            return {r.residual, r.samples, msg.str()};
        }
        throw std::invalid_argument("unknown check id " + id);
    };

    report.checks.resize(ids.size());
    const auto count = static_cast<long>(ids.size());
#pragma omp parallel for schedule(dynamic, 1)
    for (long i = 0; i < count; ++i) {
        const auto &id = ids[static_cast<std::size_t>(i)];
        const CheckDef &def = check_def(id);
        CheckRecord rec;
        rec.id = id;
        rec.anchor = def.anchor;
        rec.tolerance = tolerance_for(spec, def);
        rec.lower_bound = def.lower_bound;
        const auto t0 = clock::now();
        Outcome out;
        try {
            out = run_one(id);
        } catch (const std::exception &e) {
            out = {std::numeric_limits<double>::infinity(), 0, std::string("error: ") + e.what(), false, true};
        }
        rec.wall_time = std::chrono::duration<double>(clock::now() - t0).count();
        if (id == "build_halves") {
            rec.wall_time += build_time;
        }
        rec.residual = out.residual;
        rec.samples = out.samples;
        rec.message = out.message;
        const bool within = def.lower_bound ? out.residual > rec.tolerance : out.residual <= rec.tolerance;
        if (out.force_fail || !within) {
            rec.status = Status::fail;
        } else {
            rec.status = out.degenerate ? Status::degenerate : Status::pass;
        }
        report.checks[static_cast<std::size_t>(i)] = std::move(rec);
    }
    return report;
}

// ------------------------------------------------------------------ output

std::string dump_json(const json &j)
{
    std::ostringstream os;
    write_json(os, j, 0);
    os << "\n";
    return os.str();
}

std::string emit(const Report &report, const std::string &format, bool timings)
{
    if (format == "json") {
        json checks = json::array();
        for (const auto &c : report.checks) {
            json r = {{"id", c.id},
                      {"anchor", c.anchor},
                      {"status", status_name(c.status)},
                      {"residual", c.residual},
                      {"tolerance", c.tolerance},
                      {"bound", c.lower_bound ? "lower" : "upper"},
                      {"samples", c.samples}};
            if (!c.message.empty()) {
                r["message"] = c.message;
            }
            if (timings) {
                r["wall_time"] = c.wall_time;
            }
            checks.push_back(r);
        }
        json j = {{"schema_version", 1},
                  {"checks", checks},
                  {"config", report.config},
                  {"overall", report.pass() ? "pass" : "fail"}};
        return dump_json(j);
    }
    if (format == "text") {
        std::ostringstream os;
        char line[256];
        std::snprintf(line, sizeof line, "%-26s %-10s %-19s %-6s %-19s %7s\n", "check", "status", "residual", "",
                      "tolerance", "samples");
        os << line;
        for (const auto &c : report.checks) {
            std::snprintf(line, sizeof line, "%-26s %-10s %-19.12e %-6s %-19.12e %7d", c.id.c_str(),
                          status_name(c.status).c_str(), c.residual, c.lower_bound ? ">" : "<=", c.tolerance,
                          c.samples);
            os << line;
            if (timings) {
                std::snprintf(line, sizeof line, "  %8.3fs", c.wall_time);
                os << line;
            }
            if (!c.message.empty()) {
                os << "  " << c.message;
            }
            os << "\n";
        }
        os << "overall: " << (report.pass() ? "pass" : "fail") << "\n";
        return os.str();
    }
    throw std::invalid_argument("unknown format '" + format + "'");
}

json dump_forms(const GeometrySpec &spec)
{
    const KahlerData k = load_potential(spec.potential);
    const HalfChart h = build_half(k, Half::hol);
    const HalfChart a = build_half(k, Half::antihol);
    return {{"omega", form_json(kahler_form(k))},
            {"connection", form_json(connection_form(k))},
            {"phi_hol", form_json(h.phi)},
            {"phi_antihol", form_json(a.phi)},
            {"theta_up_hol", form_json(h.theta_up)},
            {"theta_up_antihol", form_json(a.theta_up)},
            {"theta_hol", form_json(h.theta)},
            {"theta_antihol", form_json(a.theta)},
            {"config", spec_to_json(spec)}};
}

json dump_charts(const GeometrySpec &spec)
{
    const KahlerData k = load_potential(spec.potential);
    const TwistorAssembly A = assemble(k);
    json out;
    out["config"] = spec_to_json(spec);
    for (Half w : {Half::hol, Half::antihol}) {
        const HalfChart &h = A.half(w);
        json inv = json::object();
        for (std::size_t i = 0; i < h.base_inverse.size(); ++i) {
            inv[k.chart[i].name] = series_json(h.base_inverse[i]);
        }
        // Transition jet at the base point (zero base coordinates, unit fibre).
        Vec x0 = Vec::Zero(2 * k.n + 1);
        x0(0) = 1.0;
        const auto tr = transition(A, w, x0);
        json image = json::array(), jac = json::array();
        for (Eigen::Index i = 0; i < tr.image.size(); ++i) {
            image.push_back(complex_json(tr.image(i)));
            json row = json::array();
            for (Eigen::Index j = 0; j < tr.jacobian.cols(); ++j) {
                row.push_back(complex_json(tr.jacobian(i, j)));
            }
            jac.push_back(row);
        }
        out[half_name(w)] = {{"psi", chart_map_json(h.psi)},
                             {"base_inverse", inv},
                             {"transition_at_base_point", {{"image", image}, {"jacobian", jac},
                                                           {"lambda", complex_json(tr.lambda)}}}};
    }
    return out;
}

} // namespace qfk
