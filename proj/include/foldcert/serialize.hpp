#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>

#include <json.hpp>

#include "foldcert/continuation.hpp"
#include "foldcert/genericity.hpp"
#include "foldcert/singular_limit.hpp"
#include "foldcert/transversality.hpp"

namespace foldcert {

using Json = nlohmann::json;

/// Output metadata attached to every document: tool, version, seed,
/// tolerances, problem identity/hash, timestamp, and the conventions that
/// the formats depend on. The timestamp is the only field excluded from
/// byte-determinism comparisons.
struct Meta {
    std::string problem;
    std::uint64_t problem_hash = 0;
    std::uint64_t seed = kDefaultSeed;
    TolPolicy tols;
    bool with_timestamp = true;
};

Json meta_json(const Meta& meta);
std::string meta_csv_header(const Meta& meta);

// --- JSON (structured records) ---------------------------------------------
Json to_json(const Point& p);
Point point_from_json(const Json& j);

Json to_json(const KernelPair& k);
KernelPair kernel_from_json(const Json& j);

Json to_json(const TolPolicy& t);
TolPolicy tols_from_json(const Json& j);

Json to_json(const RankReport& r);
RankReport rank_report_from_json(const Json& j);

Json to_json(const TransversalityCertificate& c);
TransversalityCertificate certificate_from_json(const Json& j);

Json to_json(const EnergyCertificate& c);
EnergyCertificate energy_certificate_from_json(const Json& j);

Json to_json(const FoldRecord& f);
FoldRecord fold_from_json(const Json& j);

Json to_json(const PerturbationSample& s);
PerturbationSample sample_from_json(const Json& j);

Json to_json(const GenericityReport& r);
GenericityReport report_from_json(const Json& j);

Json to_json(const BranchCurve& c);
BranchCurve curve_from_json(const Json& j);

Json to_json(const ZeroSetSection& s);
ZeroSetSection section_from_json(const Json& j);

Json to_json(const FlowTrace& t);
FlowTrace trace_from_json(const Json& j);

// --- CSV (bulk numeric arrays, plot-ready) ----------------------------------
// curve:   arclength,t,x1..xn,tangent_t,classification
// section: t,root_index,x1..xn,residual
// trace:   t,x1..xn
void write_curve_csv(std::ostream& os, const BranchCurve& c, const Meta& meta);
void write_section_csv(std::ostream& os, const ZeroSetSection& s, const Meta& meta);
void write_trace_csv(std::ostream& os, const FlowTrace& t, const Meta& meta);
void write_convergence_csv(std::ostream& os, const std::vector<ConvergenceRow>& rows,
                           const Meta& meta);

/// Reads back the numeric content of a trace CSV (metadata lines ignored).
FlowTrace read_trace_csv(std::istream& is);
/// Reads back the numeric content of a section CSV.
ZeroSetSection read_section_csv(std::istream& is);

/// Exact round-trip double formatting for CSV cells.
std::string format_double(double v);

/// Documented JSON shapes for --schema.
std::string schema_text();

}  // namespace foldcert
