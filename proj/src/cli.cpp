#include "foldcert/cli.hpp"

#include <CLI11.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "foldcert/allen_cahn.hpp"
#include "foldcert/expression.hpp"
#include "foldcert/serialize.hpp"
#include "foldcert/singular_limit.hpp"
#include "foldcert/version.hpp"

namespace foldcert {

namespace {

namespace fs = std::filesystem;

std::vector<double> parse_doubles(const std::string& text, const char* what) {
    std::vector<double> out;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        std::size_t comma = text.find(',', pos);
        if (comma == std::string::npos) comma = text.size();
        const std::string cell = text.substr(pos, comma - pos);
        if (!cell.empty()) {
            try {
                std::size_t used = 0;
                const double v = std::stod(cell, &used);
                if (used != cell.size()) throw std::invalid_argument(cell);
                out.push_back(v);
            } catch (...) {
                raise(ErrorKind::Usage,
                      std::string(what) + ": bad number '" + cell + "'");
            }
        }
        pos = comma + 1;
        if (comma == text.size()) break;
    }
    return out;
}

std::pair<double, double> parse_range(const std::string& text, const char* what) {
    const std::vector<double> v = parse_doubles(text, what);
    if (v.size() != 2)
        raise(ErrorKind::Usage, std::string(what) + ": expected 'lo,hi'");
    return {v[0], v[1]};
}

/// User problem config: strict keys {name, dim, t_range, F, smoothness_order}.
ProblemSpec load_problem_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) raise(ErrorKind::NotFound, "cannot open problem config '" + path + "'");
    Json j;
    try {
        in >> j;
    } catch (const std::exception& e) {
        raise(ErrorKind::SchemaViolation, std::string("bad JSON: ") + e.what());
    }
    if (!j.is_object()) raise(ErrorKind::SchemaViolation, "config root must be an object");
    for (const auto& [key, value] : j.items()) {
        (void)value;
        if (key != "name" && key != "dim" && key != "t_range" && key != "F" &&
            key != "smoothness_order")
            raise(ErrorKind::SchemaViolation, "unknown config key '" + key + "'");
    }
    const std::string name = j.contains("name") ? j["name"].get<std::string>()
                                                : fs::path(path).stem().string();
    if (!j.contains("dim") || !j["dim"].is_number_integer())
        raise(ErrorKind::SchemaViolation, "field 'dim': missing integer");
    const int dim = j["dim"].get<int>();
    if (!j.contains("t_range") || !j["t_range"].is_array() || j["t_range"].size() != 2)
        raise(ErrorKind::SchemaViolation, "field 't_range': expected [lo, hi]");
    const double t_lo = j["t_range"][0].get<double>();
    const double t_hi = j["t_range"][1].get<double>();
    if (!j.contains("F") || !j["F"].is_array())
        raise(ErrorKind::SchemaViolation, "field 'F': expected an array of expressions");
    std::vector<std::string> exprs;
    for (const auto& e : j["F"]) exprs.push_back(e.get<std::string>());
    const int order = j.contains("smoothness_order") ? j["smoothness_order"].get<int>() : 2;
    return problem_from_expressions(name, dim, t_lo, t_hi, exprs, order);
}

ProblemSpec resolve_problem(const std::string& name) {
    for (const auto& n : catalog_names())
        if (n == name) return builtin_catalog(name);
    if (fs::exists(name)) return load_problem_config(name);
    raise(ErrorKind::NotFound, "unknown problem '" + name + "'");
}

bool is_energy_problem(const std::string& name) {
    for (const auto& n : energy_catalog_names())
        if (n == name) return true;
    return false;
}

Meta make_meta(const RunConfig& cfg, const ProblemSpec& p) {
    Meta m;
    m.problem = p.name;
    m.problem_hash = problem_hash(p);
    m.seed = cfg.seed;
    m.tols = cfg.tols;
    m.with_timestamp = cfg.with_timestamp;
    return m;
}

void write_text(const fs::path& path, const std::string& text) {
    std::ofstream out(path);
    if (!out) raise(ErrorKind::Usage, "cannot write '" + path.string() + "'");
    out << text;
}

void emit(const RunConfig& cfg, const Json& doc) {
    if (!cfg.quiet) std::cout << doc.dump(2) << std::endl;
}

Vec to_vec(const std::vector<double>& v, std::size_t offset, std::size_t count) {
    Vec out(static_cast<int>(count));
    for (std::size_t i = 0; i < count; ++i) out(static_cast<int>(i)) = v[offset + i];
    return out;
}

Point parse_point(const std::vector<double>& values, int dim) {
    if (static_cast<int>(values.size()) != dim + 1)
        raise(ErrorKind::Usage, "--point needs " + std::to_string(dim + 1) +
                                    " comma-separated values (x1..xn,t)");
    Point pt;
    pt.x = to_vec(values, 0, static_cast<std::size_t>(dim));
    pt.t = values.back();
    return pt;
}

ScanConfig make_scan(const RunConfig& cfg, const ProblemSpec& p,
                     std::pair<double, double> t_range) {
    ScanConfig scan;
    scan.box = Box::cube(p.dim, cfg.box.first, cfg.box.second);
    scan.t_lo = t_range.first;
    scan.t_hi = t_range.second;
    scan.grid_density = cfg.grid_density;
    scan.step.tols = cfg.tols;
    return scan;
}

int run_certify(const RunConfig& cfg, const fs::path& outdir) {
    if (is_energy_problem(cfg.problem)) {
        EnergyProblem ep = energy_catalog(cfg.problem);
        const Point pt = parse_point(cfg.point, ep.problem.dim);
        EnergyCertificate cert = certify_energy(ep, pt, cfg.tols);
        Json doc = to_json(cert);
        doc["meta"] = meta_json(make_meta(cfg, ep.problem));
        write_text(outdir / "certificate.json", doc.dump(2) + "\n");
        emit(cfg, doc);
        return 0;
    }
    ProblemSpec p = resolve_problem(cfg.problem);
    const Point pt = parse_point(cfg.point, p.dim);
    TransversalityCertificate cert = certify(p, pt, cfg.tols);
    Json doc = to_json(cert);
    doc["meta"] = meta_json(make_meta(cfg, p));
    write_text(outdir / "certificate.json", doc.dump(2) + "\n");
    emit(cfg, doc);
    return 0;
}

int run_trace(const RunConfig& cfg, const fs::path& outdir) {
    ProblemSpec p = resolve_problem(cfg.problem);
    const Point start = parse_point(cfg.start, p.dim);
    StepConfig step;
    step.tols = cfg.tols;
    step.initial_step = cfg.initial_step;
    step.max_nodes = cfg.max_nodes;
    if (cfg.t_range) {
        step.t_stop_min = cfg.t_range->first;
        step.t_stop_max = cfg.t_range->second;
    }
    BranchCurve curve = trace_branch(p, start, cfg.direction, step);
    curve.folds = refine_all_folds(p, curve, step);

    const Meta meta = make_meta(cfg, p);
    std::ostringstream csv;
    write_curve_csv(csv, curve, meta);
    write_text(outdir / "curve.csv", csv.str());
    Json doc = to_json(curve);
    doc["meta"] = meta_json(meta);
    write_text(outdir / "curve.json", doc.dump(2) + "\n");

    Json summary;
    summary["nodes"] = curve.size();
    summary["termination"] = curve.termination;
    summary["folds"] = static_cast<int>(curve.folds.size());
    summary["files"] = {(outdir / "curve.csv").string(), (outdir / "curve.json").string()};
    summary["meta"] = meta_json(meta);
    emit(cfg, summary);
    return 0;
}

int run_folds(const RunConfig& cfg, const fs::path& outdir) {
    ProblemSpec p = resolve_problem(cfg.problem);
    if (!cfg.t_range) raise(ErrorKind::Usage, "folds: --t-range is required");
    const ScanConfig scan = make_scan(cfg, p, *cfg.t_range);
    const std::vector<FoldRecord> folds = scan_folds(p, scan);

    const Meta meta = make_meta(cfg, p);
    Json doc;
    doc["meta"] = meta_json(meta);
    Json arr = Json::array();
    for (const auto& f : folds) arr.push_back(to_json(f));
    doc["folds"] = std::move(arr);
    write_text(outdir / "folds.json", doc.dump(2) + "\n");
    emit(cfg, doc);
    return 0;
}

int run_section(const RunConfig& cfg, const fs::path& outdir) {
    ProblemSpec p = resolve_problem(cfg.problem);
    const Box box = Box::cube(p.dim, cfg.box.first, cfg.box.second);
    NewtonConfig ncfg;
    ZeroSetSection sec = enumerate_section(p, cfg.t_section, box, cfg.grid_density, ncfg);

    const Meta meta = make_meta(cfg, p);
    std::ostringstream csv;
    write_section_csv(csv, sec, meta);
    write_text(outdir / "section.csv", csv.str());
    Json doc = to_json(sec);
    doc["meta"] = meta_json(meta);
    if (cfg.format == "json") write_text(outdir / "section.json", doc.dump(2) + "\n");
    emit(cfg, doc);
    return 0;
}

int run_generic(const RunConfig& cfg, const fs::path& outdir) {
    ProblemSpec p = resolve_problem(cfg.problem);
    const std::pair<double, double> t_range =
        cfg.t_range ? *cfg.t_range
                    : std::pair<double, double>{p.t_lo + 0.1 * (p.t_hi - p.t_lo),
                                                p.t_hi - 0.1 * (p.t_hi - p.t_lo)};
    const ScanConfig scan = make_scan(cfg, p, t_range);
    GenericityReport report =
        genericity_experiment(p, cfg.samples, cfg.radius, scan, cfg.seed);

    const Meta meta = make_meta(cfg, p);
    Json doc = to_json(report);
    doc["meta"] = meta_json(meta);
    write_text(outdir / "report.json", doc.dump(2) + "\n");
    emit(cfg, doc);
    return 0;
}

int run_limit(const RunConfig& cfg, const fs::path& outdir) {
    ProblemSpec p = resolve_problem(cfg.problem);
    if (!cfg.t_span) raise(ErrorKind::Usage, "limit: --t-span is required");
    if (cfg.x_init.empty()) raise(ErrorKind::Usage, "limit: --x-init is required");
    if (static_cast<int>(cfg.x_init.size()) != p.dim)
        raise(ErrorKind::Usage, "limit: --x-init needs dim values");

    OdeConfig ode;
    ode.step.tols = cfg.tols;
    const Vec x0 = to_vec(cfg.x_init, 0, cfg.x_init.size());
    const LimitCurve limit = build_limit_curve(p, x0, *cfg.t_span, ode);

    const Meta meta = make_meta(cfg, p);
    Json manifest;
    manifest["meta"] = meta_json(meta);
    Json segs = Json::array();
    for (std::size_t i = 0; i < limit.segments.size(); ++i) {
        const auto& seg = limit.segments[i];
        const std::string fname = "segment" + std::to_string(i) + ".csv";
        std::ostringstream csv;
        write_curve_csv(csv, seg.branch, meta);
        write_text(outdir / fname, csv.str());
        segs.push_back({{"file", fname},
                        {"t_begin", seg.t_begin},
                        {"t_end", seg.t_end},
                        {"stability", to_string(seg.stability)}});
    }
    manifest["segments"] = std::move(segs);
    Json jumps = Json::array();
    for (std::size_t i = 0; i < limit.jumps.size(); ++i) {
        const auto& jump = limit.jumps[i];
        const std::string fname = "jump" + std::to_string(i) + ".csv";
        std::ostringstream csv;
        write_trace_csv(csv, jump.inner_trace, meta);
        write_text(outdir / fname, csv.str());
        Json jj;
        jj["t_jump"] = jump.t_jump;
        jj["x_minus"] = Json::array();
        jj["x_plus"] = Json::array();
        for (int k = 0; k < jump.x_minus.size(); ++k) {
            jj["x_minus"].push_back(jump.x_minus(k));
            jj["x_plus"].push_back(jump.x_plus(k));
        }
        jj["trace_file"] = fname;
        jumps.push_back(std::move(jj));
    }
    manifest["jumps"] = std::move(jumps);

    if (!cfg.eps_list.empty()) {
        const std::vector<ConvergenceRow> rows =
            convergence_study(p, x0, *cfg.t_span, cfg.eps_list, ode);
        std::ostringstream csv;
        write_convergence_csv(csv, rows, meta);
        write_text(outdir / "convergence.csv", csv.str());
        Json table = Json::array();
        for (std::size_t i = 0; i < rows.size(); ++i) {
            const FlowTrace trace = integrate_eps_flow(p, x0, rows[i].eps, *cfg.t_span, ode);
            const std::string fname = "trace_eps" + std::to_string(i) + ".csv";
            std::ostringstream tcsv;
            write_trace_csv(tcsv, trace, meta);
            write_text(outdir / fname, tcsv.str());
            table.push_back({{"eps", rows[i].eps},
                             {"sup_distance", rows[i].sup_distance},
                             {"observed_jump_time", rows[i].observed_jump_time},
                             {"trace_file", fname}});
        }
        manifest["convergence"] = std::move(table);
    }

    write_text(outdir / "limit_manifest.json", manifest.dump(2) + "\n");
    emit(cfg, manifest);
    return 0;
}

int run_pde(const RunConfig& cfg, const fs::path& outdir) {
    AllenCahnConfig ac;
    ac.m = cfg.pde_m;
    ac.load_expr = cfg.pde_load;
    ac.domain_length = cfg.pde_length;
    if (!cfg.pde_y.empty() || !cfg.pde_z.empty()) {
        const double h = ac.domain_length / (ac.m + 1);
        auto eval_profile = [&](const std::string& text) {
            Expression e = Expression::parse(text, {"x"});
            Vec out(ac.m);
            for (int i = 0; i < ac.m; ++i) out(i) = e.eval({(i + 1) * h});
            return out;
        };
        if (!cfg.pde_y.empty()) ac.y = eval_profile(cfg.pde_y);
        if (!cfg.pde_z.empty()) ac.z = eval_profile(cfg.pde_z);
    }
    EnergyProblem ep = build_allen_cahn(ac);

    const std::pair<double, double> amp =
        cfg.amp_range ? *cfg.amp_range : std::pair<double, double>{-1.0, 1.0};
    StepConfig step;
    step.tols = cfg.tols;
    SweepResult sweep = sweep_and_certify(ep, amp.first, amp.second, step);

    const Meta meta = make_meta(cfg, ep.problem);
    Json doc;
    doc["meta"] = meta_json(meta);
    Json folds = Json::array();
    for (std::size_t i = 0; i < sweep.folds.size(); ++i) {
        Json f = to_json(sweep.folds[i]);
        f["energy_certificate"] = to_json(sweep.energy_certificates[i]);
        folds.push_back(std::move(f));
    }
    doc["folds"] = std::move(folds);
    write_text(outdir / "pde_folds.json", doc.dump(2) + "\n");

    std::ostringstream csv;
    write_curve_csv(csv, sweep.branch, meta);
    write_text(outdir / "branch.csv", csv.str());
    emit(cfg, doc);
    return 0;
}

}  // namespace

int run_command(const RunConfig& cfg) {
    try {
        fs::path outdir(cfg.output_dir);
        fs::create_directories(outdir);
        if (cfg.command == "certify") return run_certify(cfg, outdir);
        if (cfg.command == "trace") return run_trace(cfg, outdir);
        if (cfg.command == "folds") return run_folds(cfg, outdir);
        if (cfg.command == "section") return run_section(cfg, outdir);
        if (cfg.command == "generic") return run_generic(cfg, outdir);
        if (cfg.command == "limit") return run_limit(cfg, outdir);
        if (cfg.command == "pde") return run_pde(cfg, outdir);
        raise(ErrorKind::Usage, "unknown command '" + cfg.command + "'");
    } catch (const Error& e) {
        std::cerr << to_string(e.kind()) << ": " << e.what() << std::endl;
        return e.exit_code();
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << std::endl;
        return 1;
    }
}

int cli_main(int argc, const char* const* argv) {
    CLI::App app{"foldcert: branch tracing, fold certification and genericity "
                 "experiments for parameterized nonlinear systems"};
    app.set_version_flag("--version", std::string(kToolName) + " " + kVersion);

    RunConfig cfg;
    if (const char* env = std::getenv("FOLDCERT_OUT")) cfg.output_dir = env;

    bool schema = false;
    app.add_flag("--schema", schema, "print the JSON document shapes and exit");

    std::string point_str, start_str, t_range_str, box_str, t_span_str, x_init_str,
        eps_str, amp_str;

    auto add_common = [&](CLI::App* sub) {
        sub->add_option("--problem", cfg.problem, "catalog name or problem config path");
        sub->add_option("--seed", cfg.seed, "RNG seed (default 24301)");
        sub->add_option("--output-dir", cfg.output_dir, "artifact directory");
        sub->add_option("--format", cfg.format, "csv|json bulk format")
            ->check(CLI::IsMember({"csv", "json"}));
        sub->add_option("--rank-tol", cfg.tols.rank_tol, "relative rank tolerance");
        sub->add_option("--margin-tol", cfg.tols.margin_tol, "margin threshold");
        sub->add_option("--zero-tol", cfg.tols.zero_tol_base, "zero-set tolerance base");
        sub->add_option("--kernel-gap-min", cfg.tols.kernel_gap_min,
                        "minimal sigma_next/sigma_min gap");
        sub->add_flag("--quiet", cfg.quiet, "suppress stdout document");
        sub->add_flag("!--no-timestamp", cfg.with_timestamp,
                      "omit timestamps from outputs");
    };

    CLI::App* certify_cmd = app.add_subcommand("certify", "certify a zero-set point");
    add_common(certify_cmd);
    certify_cmd->add_option("--point", point_str, "x1..xn,t")->required();

    CLI::App* trace_cmd = app.add_subcommand("trace", "trace one branch");
    add_common(trace_cmd);
    trace_cmd->add_option("--start", start_str, "x1..xn,t")->required();
    trace_cmd->add_option("--direction", cfg.direction, "+1 or -1");
    trace_cmd->add_option("--step", cfg.initial_step, "initial arclength step");
    trace_cmd->add_option("--max-nodes", cfg.max_nodes, "node budget");
    trace_cmd->add_option("--t-range", t_range_str, "stop bounds lo,hi");

    CLI::App* folds_cmd = app.add_subcommand("folds", "scan and certify folds");
    add_common(folds_cmd);
    folds_cmd->add_option("--t-range", t_range_str, "scan window lo,hi")->required();
    folds_cmd->add_option("--box", box_str, "per-axis start box lo,hi");
    folds_cmd->add_option("--grid-density", cfg.grid_density, "starts per axis");

    CLI::App* section_cmd = app.add_subcommand("section", "enumerate zeros at fixed t");
    add_common(section_cmd);
    section_cmd->add_option("--t", cfg.t_section, "section parameter")->required();
    section_cmd->add_option("--box", box_str, "per-axis start box lo,hi");
    section_cmd->add_option("--grid-density", cfg.grid_density, "starts per axis");

    CLI::App* generic_cmd =
        app.add_subcommand("generic", "Monte-Carlo genericity experiment");
    add_common(generic_cmd);
    generic_cmd->add_option("--samples", cfg.samples, "number of (y,K) samples");
    generic_cmd->add_option("--radius", cfg.radius, "sampling radius");
    generic_cmd->add_option("--t-range", t_range_str, "fold scan window lo,hi");
    generic_cmd->add_option("--box", box_str, "per-axis start box lo,hi");
    generic_cmd->add_option("--grid-density", cfg.grid_density, "starts per axis");

    CLI::App* limit_cmd = app.add_subcommand("limit", "singular-limit construction");
    add_common(limit_cmd);
    limit_cmd->add_option("--t-span", t_span_str, "lo,hi")->required();
    limit_cmd->add_option("--x-init", x_init_str, "initial state x1..xn")->required();
    limit_cmd->add_option("--eps-list", eps_str, "epsilons for the convergence study");

    CLI::App* pde_cmd = app.add_subcommand("pde", "Allen-Cahn sweep and certificates");
    add_common(pde_cmd);
    pde_cmd->add_option("--m", cfg.pde_m, "interior nodes");
    pde_cmd->add_option("--load", cfg.pde_load, "amplitude path l(t)");
    pde_cmd->add_option("--length", cfg.pde_length, "domain length");
    pde_cmd->add_option("--y", cfg.pde_y, "additive perturbation expression in x");
    pde_cmd->add_option("--z", cfg.pde_z, "multiplicative perturbation expression in x");
    pde_cmd->add_option("--amp-range", amp_str, "amplitude sweep lo,hi");

    app.require_subcommand(0, 1);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e);  // CLI11 prints help/version; usage errors exit nonzero
    }

    if (schema) {
        std::cout << schema_text();
        return 0;
    }
    if (app.get_subcommands().empty()) {
        std::cout << app.help();
        return 0;
    }

    try {
        CLI::App* sub = app.get_subcommands().front();
        cfg.command = sub->get_name();
        if (!point_str.empty())
            cfg.point = parse_doubles(point_str, "--point");
        if (!start_str.empty()) cfg.start = parse_doubles(start_str, "--start");
        if (!t_range_str.empty()) cfg.t_range = parse_range(t_range_str, "--t-range");
        if (!box_str.empty()) cfg.box = parse_range(box_str, "--box");
        if (!t_span_str.empty()) cfg.t_span = parse_range(t_span_str, "--t-span");
        if (!x_init_str.empty()) cfg.x_init = parse_doubles(x_init_str, "--x-init");
        if (!eps_str.empty()) cfg.eps_list = parse_doubles(eps_str, "--eps-list");
        if (!amp_str.empty()) cfg.amp_range = parse_range(amp_str, "--amp-range");
        if (cfg.problem.empty() && cfg.command != "pde")
            raise(ErrorKind::Usage, cfg.command + ": --problem is required");
    } catch (const Error& e) {
        std::cerr << to_string(e.kind()) << ": " << e.what() << std::endl;
        return e.exit_code();
    }

    return run_command(cfg);
}

}  // namespace foldcert
