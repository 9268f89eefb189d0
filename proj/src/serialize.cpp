#include "foldcert/serialize.hpp"

#include <chrono>
#include <cinttypes>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>

#include "foldcert/version.hpp"

namespace foldcert {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
constexpr double kInf = std::numeric_limits<double>::infinity();

std::string hex_u64(std::uint64_t v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "0x%016" PRIx64, v);
    return buf;
}

std::string iso_timestamp() {
    const auto now = std::chrono::system_clock::now();
    const std::time_t tt = std::chrono::system_clock::to_time_t(now);
    std::tm tm{};
    gmtime_r(&tt, &tm);
    char buf[40];
    std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

[[noreturn]] void schema_error(const std::string& path, const std::string& what) {
    raise(ErrorKind::SchemaViolation, "field '" + path + "': " + what);
}

const Json& require(const Json& j, const char* key) {
    if (!j.is_object()) schema_error(key, "parent is not an object");
    auto it = j.find(key);
    if (it == j.end()) schema_error(key, "missing");
    return *it;
}

double num(const Json& j, const char* key) {
    const Json& v = require(j, key);
    if (!v.is_number()) schema_error(key, "expected a number");
    return v.get<double>();
}

/// Number-or-null field; `null_value` encodes the non-finite convention
/// (NaN for absent margins, +inf for undefined separations).
double num_or(const Json& j, const char* key, double null_value) {
    const Json& v = require(j, key);
    if (v.is_null()) return null_value;
    if (!v.is_number()) schema_error(key, "expected a number or null");
    return v.get<double>();
}

Json json_num(double v) {
    if (std::isfinite(v)) return v;
    return nullptr;  // non-finite values are encoded as null
}

std::int64_t integer(const Json& j, const char* key) {
    const Json& v = require(j, key);
    if (!v.is_number_integer() && !v.is_number_unsigned())
        schema_error(key, "expected an integer");
    return v.get<std::int64_t>();
}

std::uint64_t uinteger(const Json& j, const char* key) {
    const Json& v = require(j, key);
    if (!v.is_number_unsigned() && !v.is_number_integer())
        schema_error(key, "expected an unsigned integer");
    return v.get<std::uint64_t>();
}

bool boolean(const Json& j, const char* key) {
    const Json& v = require(j, key);
    if (!v.is_boolean()) schema_error(key, "expected a boolean");
    return v.get<bool>();
}

std::string str(const Json& j, const char* key) {
    const Json& v = require(j, key);
    if (!v.is_string()) schema_error(key, "expected a string");
    return v.get<std::string>();
}

Json vec_json(const Vec& v) {
    Json a = Json::array();
    for (int i = 0; i < v.size(); ++i) a.push_back(v(i));
    return a;
}

Vec vec_from(const Json& j, const char* key) {
    const Json& v = require(j, key);
    if (!v.is_array()) schema_error(key, "expected an array");
    Vec out(static_cast<int>(v.size()));
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (!v[i].is_number()) schema_error(key, "expected numeric entries");
        out(static_cast<int>(i)) = v[i].get<double>();
    }
    return out;
}

Json mat_json(const Mat& m) {
    Json rows = Json::array();
    for (int i = 0; i < m.rows(); ++i) {
        Json row = Json::array();
        for (int j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
        rows.push_back(std::move(row));
    }
    return rows;
}

Mat mat_from(const Json& j, const char* key) {
    const Json& v = require(j, key);
    if (!v.is_array() || v.empty()) schema_error(key, "expected a non-empty array");
    const std::size_t rows = v.size();
    const std::size_t cols = v[0].is_array() ? v[0].size() : 0;
    Mat out(static_cast<int>(rows), static_cast<int>(cols));
    for (std::size_t i = 0; i < rows; ++i) {
        if (!v[i].is_array() || v[i].size() != cols)
            schema_error(key, "ragged matrix rows");
        for (std::size_t c = 0; c < cols; ++c)
            out(static_cast<int>(i), static_cast<int>(c)) = v[i][c].get<double>();
    }
    return out;
}

Classification classification_from(const std::string& s, const char* key) {
    if (s == "Regular") return Classification::Regular;
    if (s == "TransversalSingular") return Classification::TransversalSingular;
    if (s == "NonTransversal") return Classification::NonTransversal;
    schema_error(key, "unknown classification '" + s + "'");
}

Cond cond_from(const std::string& s, const char* key) {
    if (s == "T1") return Cond::T1;
    if (s == "T2") return Cond::T2;
    if (s == "T3") return Cond::T3;
    if (s == "E1") return Cond::E1;
    if (s == "E2") return Cond::E2;
    if (s == "E3") return Cond::E3;
    schema_error(key, "unknown condition '" + s + "'");
}

SampleOutcome outcome_from(const std::string& s, const char* key) {
    if (s == "AllFoldsTransversal") return SampleOutcome::AllFoldsTransversal;
    if (s == "SomeNonTransversal") return SampleOutcome::SomeNonTransversal;
    if (s == "InconclusiveNumerics") return SampleOutcome::InconclusiveNumerics;
    schema_error(key, "unknown outcome '" + s + "'");
}

}  // namespace

Json meta_json(const Meta& meta) {
    Json j;
    j["tool"] = kToolName;
    j["version"] = kVersion;
    j["problem"] = meta.problem;
    j["problem_hash"] = hex_u64(meta.problem_hash);
    j["seed"] = meta.seed;
    j["tolerances"] = to_json(meta.tols);
    j["conventions"] = {
        {"tangent_norm", "product norm |(dx,dt)|^2 = |dx|^2 + dt^2"},
        {"tddot", "second arclength derivative of t at the fold"},
        {"jump_window", "w(eps) = 5 * eps * log10(1/eps)"},
        {"kernel_sign", "first component over 1e-12 is positive"},
    };
    if (meta.with_timestamp) j["timestamp"] = iso_timestamp();
    return j;
}

std::string meta_csv_header(const Meta& meta) {
    std::ostringstream os;
    os << "# tool: " << kToolName << " " << kVersion << "\n";
    os << "# problem: " << meta.problem << "\n";
    os << "# problem_hash: " << hex_u64(meta.problem_hash) << "\n";
    os << "# seed: " << meta.seed << "\n";
    os << "# tolerances: rank_tol=" << format_double(meta.tols.rank_tol)
       << " kernel_gap_min=" << format_double(meta.tols.kernel_gap_min)
       << " margin_tol=" << format_double(meta.tols.margin_tol)
       << " zero_tol_base=" << format_double(meta.tols.zero_tol_base) << "\n";
    if (meta.with_timestamp) os << "# timestamp: " << iso_timestamp() << "\n";
    return os.str();
}

Json to_json(const Point& p) {
    Json j;
    j["x"] = vec_json(p.x);
    j["t"] = p.t;
    return j;
}

Point point_from_json(const Json& j) {
    Point p;
    p.x = vec_from(j, "x");
    p.t = num(j, "t");
    return p;
}

Json to_json(const KernelPair& k) {
    Json j;
    j["v"] = vec_json(k.v);
    j["w_star"] = vec_json(k.w_star);
    j["sigma_min"] = k.sigma_min;
    j["sigma_next"] = k.sigma_next;
    j["gap_ratio"] = k.gap_ratio;
    return j;
}

KernelPair kernel_from_json(const Json& j) {
    KernelPair k;
    k.v = vec_from(j, "v");
    k.w_star = vec_from(j, "w_star");
    k.sigma_min = num(j, "sigma_min");
    k.sigma_next = num(j, "sigma_next");
    k.gap_ratio = num(j, "gap_ratio");
    return k;
}

Json to_json(const TolPolicy& t) {
    Json j;
    j["rank_tol"] = t.rank_tol;
    j["kernel_gap_min"] = t.kernel_gap_min;
    j["margin_tol"] = t.margin_tol;
    j["zero_tol_base"] = t.zero_tol_base;
    return j;
}

TolPolicy tols_from_json(const Json& j) {
    TolPolicy t;
    t.rank_tol = num(j, "rank_tol");
    t.kernel_gap_min = num(j, "kernel_gap_min");
    t.margin_tol = num(j, "margin_tol");
    t.zero_tol_base = num(j, "zero_tol_base");
    return t;
}

Json to_json(const RankReport& r) {
    Json j;
    j["rows"] = r.rows;
    j["cols"] = r.cols;
    j["numerical_rank"] = r.numerical_rank;
    j["singular_values"] = r.singular_values;
    j["surjective"] = r.surjective;
    j["rank_tolerance_used"] = r.rank_tolerance_used;
    return j;
}

RankReport rank_report_from_json(const Json& j) {
    RankReport r;
    r.rows = static_cast<int>(integer(j, "rows"));
    r.cols = static_cast<int>(integer(j, "cols"));
    r.numerical_rank = static_cast<int>(integer(j, "numerical_rank"));
    const Json& sv = require(j, "singular_values");
    if (!sv.is_array()) schema_error("singular_values", "expected an array");
    for (const auto& s : sv) r.singular_values.push_back(s.get<double>());
    r.surjective = boolean(j, "surjective");
    r.rank_tolerance_used = num(j, "rank_tolerance_used");
    return r;
}

namespace {

template <typename CertT>
Json certificate_common_json(const CertT& c) {
    Json j;
    j["point"] = to_json(c.point);
    j["classification"] = to_string(c.classification);
    j["sigma_min"] = c.kernel.sigma_min;
    j["sigma_next"] = c.kernel.sigma_next;
    j["gap_ratio"] = c.kernel.gap_ratio;
    Json fails = Json::array();
    for (Cond f : c.failures) fails.push_back(to_string(f));
    j["failures"] = std::move(fails);
    j["residual_norm"] = c.residual_norm;
    j["tolerances"] = to_json(c.tolerances_used);
    j["ambiguous_kernel"] = c.ambiguous_kernel;
    j["kernel"] = to_json(c.kernel);
    return j;
}

template <typename CertT>
void certificate_common_from(const Json& j, CertT& c) {
    c.point = point_from_json(require(j, "point"));
    c.classification = classification_from(str(j, "classification"), "classification");
    c.kernel = kernel_from_json(require(j, "kernel"));
    const Json& fails = require(j, "failures");
    if (!fails.is_array()) schema_error("failures", "expected an array");
    for (const auto& f : fails)
        c.failures.push_back(cond_from(f.get<std::string>(), "failures"));
    c.residual_norm = num(j, "residual_norm");
    c.tolerances_used = tols_from_json(require(j, "tolerances"));
    c.ambiguous_kernel = boolean(j, "ambiguous_kernel");
}

}  // namespace

Json to_json(const TransversalityCertificate& c) {
    Json j = certificate_common_json(c);
    j["flavor"] = "general";
    j["t2_margin"] = json_num(c.t2_margin);
    j["t3_margin"] = json_num(c.t3_margin);
    j["condition_estimate"] = c.condition_estimate;
    return j;
}

TransversalityCertificate certificate_from_json(const Json& j) {
    TransversalityCertificate c;
    certificate_common_from(j, c);
    c.t2_margin = num_or(j, "t2_margin", kNaN);
    c.t3_margin = num_or(j, "t3_margin", kNaN);
    c.condition_estimate = num(j, "condition_estimate");
    return c;
}

Json to_json(const EnergyCertificate& c) {
    Json j = certificate_common_json(c);
    j["flavor"] = "energy";
    j["e2_margin"] = json_num(c.e2_margin);
    j["e3_margin"] = json_num(c.e3_margin);
    j["self_duality_gap"] = c.self_duality_gap;
    return j;
}

EnergyCertificate energy_certificate_from_json(const Json& j) {
    EnergyCertificate c;
    certificate_common_from(j, c);
    c.e2_margin = num_or(j, "e2_margin", kNaN);
    c.e3_margin = num_or(j, "e3_margin", kNaN);
    c.self_duality_gap = num(j, "self_duality_gap");
    return c;
}

Json to_json(const FoldRecord& f) {
    Json j;
    j["point"] = to_json(f.point);
    j["certificate"] = to_json(f.certificate);
    j["tdot"] = f.tdot;
    j["tddot_estimate"] = json_num(f.tddot_estimate);
    j["side"] = f.side;
    j["bordered_converged"] = f.bordered_converged;
    return j;
}

FoldRecord fold_from_json(const Json& j) {
    FoldRecord f;
    f.point = point_from_json(require(j, "point"));
    f.certificate = certificate_from_json(require(j, "certificate"));
    f.tdot = num(j, "tdot");
    f.tddot_estimate = num_or(j, "tddot_estimate", kNaN);
    f.side = static_cast<int>(integer(j, "side"));
    f.bordered_converged = boolean(j, "bordered_converged");
    return f;
}

Json to_json(const PerturbationSample& s) {
    Json j;
    j["y"] = vec_json(s.y);
    j["K"] = mat_json(s.K);
    j["radius"] = s.radius;
    j["seed"] = s.seed;
    return j;
}

PerturbationSample sample_from_json(const Json& j) {
    PerturbationSample s;
    s.y = vec_from(j, "y");
    s.K = mat_from(j, "K");
    s.radius = num(j, "radius");
    s.seed = uinteger(j, "seed");
    return s;
}

Json to_json(const GenericityReport& r) {
    Json j;
    j["n_samples"] = r.n_samples;
    j["radius"] = r.radius;
    j["master_seed"] = r.master_seed;
    Json outs = Json::array();
    for (SampleOutcome o : r.outcomes) outs.push_back(to_string(o));
    j["outcomes"] = std::move(outs);
    j["failure_fraction"] = r.failure_fraction;
    j["n_inconclusive"] = r.n_inconclusive;
    j["unperturbed_outcome"] = to_string(r.unperturbed_outcome);
    j["total_folds_certified"] = r.total_folds_certified;
    Json box = Json::array();
    for (const auto& [lo, hi] : r.scan.box.axes) box.push_back({lo, hi});
    j["scan"] = {{"box", std::move(box)},
                 {"t_lo", r.scan.t_lo},
                 {"t_hi", r.scan.t_hi},
                 {"grid_density", r.scan.grid_density}};
    j["distribution"] = r.distribution;
    return j;
}

GenericityReport report_from_json(const Json& j) {
    GenericityReport r;
    r.n_samples = static_cast<int>(integer(j, "n_samples"));
    r.radius = num(j, "radius");
    r.master_seed = uinteger(j, "master_seed");
    const Json& outs = require(j, "outcomes");
    if (!outs.is_array()) schema_error("outcomes", "expected an array");
    for (const auto& o : outs)
        r.outcomes.push_back(outcome_from(o.get<std::string>(), "outcomes"));
    r.failure_fraction = num(j, "failure_fraction");
    r.n_inconclusive = static_cast<int>(integer(j, "n_inconclusive"));
    r.unperturbed_outcome =
        outcome_from(str(j, "unperturbed_outcome"), "unperturbed_outcome");
    r.total_folds_certified = static_cast<int>(integer(j, "total_folds_certified"));
    const Json& scan = require(j, "scan");
    const Json& box = require(scan, "box");
    for (const auto& axis : box)
        r.scan.box.axes.emplace_back(axis[0].get<double>(), axis[1].get<double>());
    r.scan.t_lo = num(scan, "t_lo");
    r.scan.t_hi = num(scan, "t_hi");
    r.scan.grid_density = static_cast<int>(integer(scan, "grid_density"));
    r.distribution = str(j, "distribution");
    return r;
}

Json to_json(const BranchCurve& c) {
    Json j;
    Json nodes = Json::array(), tangents = Json::array(), classes = Json::array();
    for (const auto& n : c.nodes) nodes.push_back(to_json(n));
    for (const auto& t : c.tangents) tangents.push_back(vec_json(t));
    for (NodeClass k : c.classifications)
        classes.push_back(k == NodeClass::Regular ? "Regular" : "NearSingular");
    j["nodes"] = std::move(nodes);
    j["tangents"] = std::move(tangents);
    j["classifications"] = std::move(classes);
    j["arclength"] = c.arclength;
    Json folds = Json::array();
    for (const auto& f : c.folds) folds.push_back(to_json(f));
    j["folds"] = std::move(folds);
    j["termination"] = c.termination;
    return j;
}

BranchCurve curve_from_json(const Json& j) {
    BranchCurve c;
    for (const auto& n : require(j, "nodes")) c.nodes.push_back(point_from_json(n));
    for (const auto& t : require(j, "tangents")) {
        Vec v(static_cast<int>(t.size()));
        for (std::size_t i = 0; i < t.size(); ++i)
            v(static_cast<int>(i)) = t[i].get<double>();
        c.tangents.push_back(std::move(v));
    }
    for (const auto& k : require(j, "classifications")) {
        const std::string s = k.get<std::string>();
        if (s != "Regular" && s != "NearSingular")
            schema_error("classifications", "unknown node class '" + s + "'");
        c.classifications.push_back(s == "Regular" ? NodeClass::Regular
                                                   : NodeClass::NearSingular);
    }
    for (const auto& a : require(j, "arclength")) c.arclength.push_back(a.get<double>());
    for (const auto& f : require(j, "folds")) c.folds.push_back(fold_from_json(f));
    c.termination = str(j, "termination");
    return c;
}

Json to_json(const ZeroSetSection& s) {
    Json j;
    j["t"] = s.t;
    Json zeros = Json::array();
    for (const auto& z : s.zeros) zeros.push_back(vec_json(z));
    j["zeros"] = std::move(zeros);
    j["residuals"] = s.residuals;
    j["min_pairwise_separation"] = json_num(s.min_pairwise_separation);
    j["multistart_count"] = s.multistart_count;
    j["failed_starts"] = s.failed_starts;
    return j;
}

ZeroSetSection section_from_json(const Json& j) {
    ZeroSetSection s;
    s.t = num(j, "t");
    for (const auto& z : require(j, "zeros")) {
        Vec v(static_cast<int>(z.size()));
        for (std::size_t i = 0; i < z.size(); ++i)
            v(static_cast<int>(i)) = z[i].get<double>();
        s.zeros.push_back(std::move(v));
    }
    for (const auto& r : require(j, "residuals")) s.residuals.push_back(r.get<double>());
    s.min_pairwise_separation = num_or(j, "min_pairwise_separation", kInf);
    s.multistart_count = static_cast<int>(integer(j, "multistart_count"));
    s.failed_starts = static_cast<int>(integer(j, "failed_starts"));
    return s;
}

Json to_json(const FlowTrace& t) {
    Json j;
    j["epsilon"] = t.epsilon;
    j["inner_flow"] = t.inner_flow;
    j["times"] = t.times;
    Json states = Json::array();
    for (const auto& s : t.states) states.push_back(vec_json(s));
    j["states"] = std::move(states);
    j["accepted"] = t.accepted;
    j["rejected"] = t.rejected;
    j["newton_iters"] = t.newton_iters;
    return j;
}

FlowTrace trace_from_json(const Json& j) {
    FlowTrace t;
    t.epsilon = num(j, "epsilon");
    t.inner_flow = boolean(j, "inner_flow");
    for (const auto& v : require(j, "times")) t.times.push_back(v.get<double>());
    for (const auto& s : require(j, "states")) {
        Vec v(static_cast<int>(s.size()));
        for (std::size_t i = 0; i < s.size(); ++i)
            v(static_cast<int>(i)) = s[i].get<double>();
        t.states.push_back(std::move(v));
    }
    t.accepted = static_cast<int>(integer(j, "accepted"));
    t.rejected = static_cast<int>(integer(j, "rejected"));
    t.newton_iters = integer(j, "newton_iters");
    return t;
}

std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

void write_curve_csv(std::ostream& os, const BranchCurve& c, const Meta& meta) {
    os << meta_csv_header(meta);
    os << "# termination: " << c.termination << "\n";
    const int n = c.nodes.empty() ? 0 : static_cast<int>(c.nodes.front().x.size());
    os << "arclength,t";
    for (int i = 1; i <= n; ++i) os << ",x" << i;
    os << ",tangent_t,classification\n";
    for (int k = 0; k < c.size(); ++k) {
        os << format_double(c.arclength[k]) << ',' << format_double(c.nodes[k].t);
        for (int i = 0; i < n; ++i) os << ',' << format_double(c.nodes[k].x(i));
        os << ',' << format_double(c.tangent_t(k)) << ','
           << (c.classifications[k] == NodeClass::Regular ? "Regular" : "NearSingular")
           << "\n";
    }
}

void write_section_csv(std::ostream& os, const ZeroSetSection& s, const Meta& meta) {
    os << meta_csv_header(meta);
    os << "# multistart_count: " << s.multistart_count << "\n";
    os << "# failed_starts: " << s.failed_starts << "\n";
    os << "# min_pairwise_separation: " << format_double(s.min_pairwise_separation)
       << "\n";
    const int n = s.zeros.empty() ? 0 : static_cast<int>(s.zeros.front().size());
    os << "t,root_index";
    for (int i = 1; i <= n; ++i) os << ",x" << i;
    os << ",residual\n";
    for (std::size_t k = 0; k < s.zeros.size(); ++k) {
        os << format_double(s.t) << ',' << k;
        for (int i = 0; i < n; ++i) os << ',' << format_double(s.zeros[k](i));
        os << ',' << format_double(s.residuals[k]) << "\n";
    }
}

void write_trace_csv(std::ostream& os, const FlowTrace& t, const Meta& meta) {
    os << meta_csv_header(meta);
    os << "# epsilon: " << format_double(t.epsilon) << "\n";
    os << "# inner_flow: " << (t.inner_flow ? 1 : 0) << "\n";
    os << "# accepted: " << t.accepted << "\n";
    os << "# rejected: " << t.rejected << "\n";
    const int n = t.states.empty() ? 0 : static_cast<int>(t.states.front().size());
    os << "t";
    for (int i = 1; i <= n; ++i) os << ",x" << i;
    os << "\n";
    for (std::size_t k = 0; k < t.times.size(); ++k) {
        os << format_double(t.times[k]);
        for (int i = 0; i < n; ++i) os << ',' << format_double(t.states[k](i));
        os << "\n";
    }
}

void write_convergence_csv(std::ostream& os, const std::vector<ConvergenceRow>& rows,
                           const Meta& meta) {
    os << meta_csv_header(meta);
    os << "eps,sup_distance,observed_jump_time\n";
    for (const auto& r : rows)
        os << format_double(r.eps) << ',' << format_double(r.sup_distance) << ','
           << format_double(r.observed_jump_time) << "\n";
}

namespace {

std::vector<double> split_csv_line(const std::string& line) {
    std::vector<double> out;
    std::size_t pos = 0;
    while (pos <= line.size()) {
        std::size_t comma = line.find(',', pos);
        if (comma == std::string::npos) comma = line.size();
        const std::string cell = line.substr(pos, comma - pos);
        try {
            out.push_back(std::stod(cell));
        } catch (...) {
            raise(ErrorKind::SchemaViolation, "bad CSV cell '" + cell + "'");
        }
        pos = comma + 1;
        if (comma == line.size()) break;
    }
    return out;
}

}  // namespace

FlowTrace read_trace_csv(std::istream& is) {
    FlowTrace t;
    std::string line;
    bool header_seen = false;
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        if (line[0] == '#') {
            if (line.rfind("# epsilon: ", 0) == 0)
                t.epsilon = std::stod(line.substr(11));
            if (line.rfind("# inner_flow: ", 0) == 0)
                t.inner_flow = (std::stoi(line.substr(14)) != 0);
            if (line.rfind("# accepted: ", 0) == 0) t.accepted = std::stoi(line.substr(12));
            if (line.rfind("# rejected: ", 0) == 0) t.rejected = std::stoi(line.substr(12));
            continue;
        }
        if (!header_seen) {
            header_seen = true;  // column header line
            continue;
        }
        const std::vector<double> cells = split_csv_line(line);
        if (cells.size() < 2) raise(ErrorKind::SchemaViolation, "trace row too short");
        t.times.push_back(cells[0]);
        Vec x(static_cast<int>(cells.size()) - 1);
        for (std::size_t i = 1; i < cells.size(); ++i)
            x(static_cast<int>(i - 1)) = cells[i];
        t.states.push_back(std::move(x));
    }
    return t;
}

ZeroSetSection read_section_csv(std::istream& is) {
    ZeroSetSection s;
    s.min_pairwise_separation = kInf;
    std::string line;
    bool header_seen = false;
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        if (line[0] == '#') {
            if (line.rfind("# multistart_count: ", 0) == 0)
                s.multistart_count = std::stoi(line.substr(20));
            if (line.rfind("# failed_starts: ", 0) == 0)
                s.failed_starts = std::stoi(line.substr(17));
            if (line.rfind("# min_pairwise_separation: ", 0) == 0)
                s.min_pairwise_separation = std::stod(line.substr(27));
            continue;
        }
        if (!header_seen) {
            header_seen = true;
            continue;
        }
        const std::vector<double> cells = split_csv_line(line);
        if (cells.size() < 3) raise(ErrorKind::SchemaViolation, "section row too short");
        s.t = cells[0];
        Vec x(static_cast<int>(cells.size()) - 3);
        for (std::size_t i = 2; i + 1 < cells.size(); ++i)
            x(static_cast<int>(i - 2)) = cells[i];
        s.zeros.push_back(std::move(x));
        s.residuals.push_back(cells.back());
    }
    return s;
}

std::string schema_text() {
    return R"(foldcert JSON document shapes
=============================

All documents carry "meta": {tool, version, problem, problem_hash, seed,
tolerances{rank_tol, kernel_gap_min, margin_tol, zero_tol_base},
conventions{...}, timestamp?}. The timestamp is excluded from determinism
comparisons. Non-finite numbers are encoded as null (absent margins: NaN;
undefined separations: +infinity).

certificate (general):
  {point{x[], t}, classification: Regular|TransversalSingular|NonTransversal,
   sigma_min, sigma_next, gap_ratio, t2_margin, t3_margin, failures[ T1|T2|T3 ],
   residual_norm, tolerances{...}, ambiguous_kernel, condition_estimate,
   kernel{v[], w_star[], sigma_min, sigma_next, gap_ratio}, flavor: "general"}

certificate (energy): as above with e2_margin, e3_margin,
   failures[ E1|E2|E3 ], self_duality_gap, flavor: "energy".

fold record:
  {point, certificate, tdot, tddot_estimate, side: -1|0|1, bordered_converged}

genericity report:
  {n_samples, radius, master_seed, outcomes[...], failure_fraction,
   n_inconclusive, unperturbed_outcome, total_folds_certified,
   scan{box[[lo,hi]...], t_lo, t_hi, grid_density}, distribution}

perturbation sample: {y[], K[[...]], radius, seed}

branch curve (JSON): {nodes[{x,t}], tangents[[...]], classifications[],
   arclength[], folds[], termination}
branch curve (CSV): arclength,t,x1..xn,tangent_t,classification
section (CSV):      t,root_index,x1..xn,residual
flow trace (CSV):   t,x1..xn
convergence (CSV):  eps,sup_distance,observed_jump_time

limit curve manifest: {segments: [{file, t_begin, t_end, stability}],
   jumps: [{t_jump, x_minus[], x_plus[], trace_file}]}
)";
}

}  // namespace foldcert
