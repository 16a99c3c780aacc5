#include "isp/driver.hpp"

#include <omp.h>

#include <cmath>
#include <random>

#include "isp/errors.hpp"
#include "isp/example_e1.hpp"
#include "isp/forward.hpp"
#include "isp/rh.hpp"

namespace isp {

namespace fs = std::filesystem;

const std::vector<std::string>& command_names() {
    static const std::vector<std::string> names{"validate", "forward",         "split",      "rh-solve",
                                                "recover-blocks", "e1-forward", "e1-roundtrip", "report"};
    return names;
}

Json random_problem(const Json& desc, std::uint64_t seed) {
    const int n = desc.value("n", 1);
    const int terms = desc.value("terms", 1);
    const double amp = desc.value("amplitude", 0.3);
    if (n < 1 || n > 8) throw ValidationError("random.n must lie in 1..8");
    if (terms < 1) throw ValidationError("random.terms must be positive");
    if (!(amp > 0.0)) throw ValidationError("random.amplitude must be positive");
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> g(0.0, 1.0);
    std::uniform_real_distribution<double> rate(1.0, 2.0), speed(0.5, 1.5);

    std::vector<double> xi(std::size_t(2 * n));
    double acc = 0.0;
    for (int k = n - 1; k >= 0; --k) xi[std::size_t(k)] = -(acc += speed(rng));
    acc = 0.0;
    for (int k = n; k < 2 * n; ++k) xi[std::size_t(k)] = (acc += speed(rng));

    Json entries = Json::array();
    for (Block b : kAllBlocks)
        for (int k = 0; k < n; ++k)
            for (int j = 0; j < n; ++j) {
                if (!potential_entry_allowed(b, n, k, j)) continue;
                Json sum = Json::array();
                for (int t = 0; t < terms; ++t)
                    sum.push_back({{"gamma", {amp * g(rng) / terms, amp * g(rng) / terms}}, {"a", rate(rng)}});
                entries.push_back({{"block", potential_block_name(b)}, {"k", k + 1}, {"j", j + 1}, {"exp_sum", sum}});
            }
    auto boundary = [&] {
        for (;;) {
            Mat h(n, n);
            for (int r = 0; r < n; ++r)
                for (int c = 0; c < n; ++c) h(r, c) = cplx(g(rng), g(rng));
            if (std::abs(h.determinant()) > 0.1) return h;
        }
    };
    const Mat h1 = boundary();
    Mat h2 = boundary();
    while (std::abs((h1 - h2).determinant()) < 0.1) h2 = boundary();
    return {{"dispersion", xi},
            {"potential", {{"n", n}, {"entries", entries}}},
            {"boundary", to_json(h1)},
            {"boundary2", to_json(h2)}};
}

namespace {

struct Problem {
    Json json;
    fs::path base;

    bool has(const char* key) const { return json.contains(key); }
    const Json& at(const char* key) const {
        if (!json.contains(key)) throw ParseError(std::string("problem.") + key + ": missing");
        return json[key];
    }
    Dispersion dispersion() const { return dispersion_from_json(at("dispersion")); }
    MCanonicalPotential potential() const { return potential_from_json(at("potential")); }
    BoundaryMatrix boundary(const char* key, double tol) const {
        return BoundaryMatrix(matrix_from_json(at(key), std::string("problem.") + key), tol);
    }
    fs::path path(const Json& j, const std::string& field) const {
        if (!j.is_string()) throw ParseError(field + ": expected a path");
        fs::path p = j.get<std::string>();
        return p.is_relative() ? base / p : p;
    }
};

Problem resolve_problem(const RunConfig& cfg, const RunContext& ctx, Json& report) {
    Problem p{cfg.problem, cfg.base_dir};
    if (p.json.contains("random")) {
        const std::uint64_t seed = ctx.seed.value_or(p.json["random"].value("seed", std::uint64_t(0)));
        Json gen = random_problem(p.json["random"], seed);
        report["seed"] = seed;
        report["generated_problem"] = gen;
        for (auto it = p.json.begin(); it != p.json.end(); ++it)
            if (it.key() != "random") gen[it.key()] = it.value();
        p.json = std::move(gen);
    }
    return p;
}

KernelOptions kernel_options(const RunConfig& cfg) {
    KernelOptions o;
    o.step = cfg.x_step;
    o.tail_tol = cfg.tail_tol;
    o.snapshot_stride = cfg.snapshot_stride;
    o.max_local_iter = cfg.max_local_iter;
    o.local_tol = cfg.local_tol;
    o.exec = cfg.exec;
    o.x_max = cfg.x_max;
    o.t_max = cfg.t_max;
    return o;
}

RHOptions rh_options(const RunConfig& cfg) {
    RHOptions o;
    o.gmres_tol = cfg.gmres_tol;
    o.restart = cfg.gmres_restart;
    o.max_iter = cfg.gmres_max_iter;
    o.singular_tol = cfg.singular_tol;
    o.edge_tol = cfg.split_edge_tol;
    return o;
}

Json theta_json(const Dispersion& disp) {
    const auto t = theta_families(disp);
    auto opt = [](const std::optional<double>& v) { return v ? Json(*v) : Json(nullptr); };
    return {{"theta1", opt(t.theta1)},
            {"theta2", opt(t.theta2)},
            {"theta3", opt(t.theta3)},
            {"theta4", opt(t.theta4)},
            {"theta", theta_exponent(disp)}};
}

Json line_json(const LineDeterminants& d) {
    return {{"delta", d.delta},
            {"min_abs_det_I_plus_AH_plus", d.min_det_plus},
            {"min_abs_det_I_plus_AH_minus", d.min_det_minus},
            {"argmin_lambda_plus", d.argmin_plus},
            {"argmin_lambda_minus", d.argmin_minus}};
}

Json solvability_json(const SolvabilityReport& s) {
    return {{"min_abs_det", s.min_abs_det},
            {"argmin_lambda", s.argmin_lambda},
            {"nonsingular", s.nonsingular},
            {"real_part_definite", s.real_part_definite},
            {"imag_part_definite", s.imag_part_definite},
            {"edge_residual", s.edge_residual}};
}

Json kernels_json(const TOKernels& k) {
    return {{"step", k.step()},         {"x_max", k.x_max()},   {"t_extent", k.t_extent()},
            {"theta", k.theta()},       {"eps", k.eps()},       {"c_tilde", k.c_tilde()},
            {"n_x", k.n_x()},           {"n_tau", k.n_tau()},   {"snapshot_stride", k.snapshot_stride()}};
}

void write_lines(ArtifactWriter& w, const std::string& stem,
                 const std::vector<std::pair<std::string, const LineMatrixFunction*>>& fs, Json extra = Json::object()) {
    w.write(stem + ".csv", line_functions_csv(fs));
    Json side = line_functions_sidecar(fs);
    for (auto it = extra.begin(); it != extra.end(); ++it) side[it.key()] = it.value();
    w.write(stem + ".json", dump_json(side));
}

void reject_violations(const MCanonicalPotential& pot, double tail_tol) {
    ValidationOptions vo;
    vo.tail_tol = tail_tol;
    const auto v = validate_potential(pot, vo);
    if (!v.empty()) throw ValidationError("potential violates its structure or envelope: " + v.front().message);
}

struct ForwardData {
    TOKernels kernels;
    BlockTransforms blocks;
};

ForwardData forward_blocks(const RunConfig& cfg, const Dispersion& disp, const MCanonicalPotential& pot,
                           const LambdaGrid& grid) {
    if (pot.n() != disp.n()) throw InvalidArgument("potential and dispersion disagree on n");
    reject_violations(pot, cfg.tail_tol);
    TOKernels k = solve_to_kernels(pot, disp, kernel_options(cfg));
    BlockTransforms b = kernel_transforms(k, disp, grid);
    return {std::move(k), std::move(b)};
}

// --- commands --------------------------------------------------------------

void cmd_validate(const RunConfig& cfg, const Problem& p, Json& res, ArtifactWriter&) {
    const auto pot = p.potential();
    ValidationOptions vo;
    vo.tail_tol = cfg.tail_tol;
    const auto v = validate_potential(pot, vo);
    const Envelope env = pot.envelope();
    res["violations"] = to_json(v);
    res["valid"] = v.empty();
    res["envelope"] = {{"C", env.C}, {"eps", env.eps}, {"declared", pot.has_declared_envelope()}};
    res["truncation_length"] = truncation_length(env, cfg.tail_tol);
    if (p.has("dispersion")) res["theta"] = theta_json(p.dispersion());
    if (!v.empty())
        throw ValidationError(std::to_string(v.size()) + " violation(s); first: " + v.front().message,
                              {{"violations", double(v.size())}});
}

void cmd_forward(const RunConfig& cfg, const Problem& p, Json& res, ArtifactWriter& w) {
    const auto disp = p.dispersion();
    const auto pot = p.potential();
    const auto H = p.boundary("boundary", cfg.singular_tol);
    const auto grid = cfg.make_grid();
    auto fd = forward_blocks(cfg, disp, pot, grid);
    res["kernels"] = kernels_json(fd.kernels);
    res["theta"] = theta_json(disp);
    w.write("kernels.csv", kernels_csv(fd.kernels));

    const auto ah = assemble_AH(fd.blocks, H);
    std::vector<ShiftedLine> shifted;
    for (double d : cfg.shift_deltas) shifted.push_back(shifted_AH(fd.kernels, disp, H, grid, d));
    const auto strip = strip_diagnostics(ah.plus, ah.minus, shifted);
    res["min_abs_det_I_plus_AH_plus"] = strip.real_axis.min_det_plus;
    res["min_abs_det_I_plus_AH_minus"] = strip.real_axis.min_det_minus;
    res["strip_estimate"] = strip_estimate(fd.kernels.theta(), fd.kernels.eps(), disp);

    const auto S = scattering_matrix(ah.plus, ah.minus, cfg.singular_tol);
    const auto tr = transmission_matrix(fd.blocks, cfg.singular_tol);
    res["edge_residual_S"] = solvability_report(S, cfg.singular_tol).edge_residual;
    write_lines(w, "scattering", {{"S_H", &S}, {"AH_plus", &ah.plus}, {"AH_minus", &ah.minus}, {"Pi", &tr.Pi}},
                {{"kernels", res["kernels"]}});
    write_lines(w, "transforms",
                {{"A11_minus", &fd.blocks.A11_minus},
                 {"A21_minus", &fd.blocks.A21_minus},
                 {"A12_plus", &fd.blocks.A12_plus},
                 {"A22_plus", &fd.blocks.A22_plus}});
}

LineMatrixFunction input_function(const RunConfig& cfg, const Problem& p, const char* default_block, bool add_identity,
                                  std::optional<RationalMatrix>* rational) {
    const Json& in = p.at("input");
    if (in.contains("rational")) {
        RationalMatrix r = rational_from_json(in["rational"]);
        auto f = r.sample(cfg.make_grid());
        if (add_identity)
            for (std::size_t i = 0; i < f.size(); ++i) f[i] += Mat::Identity(r.m(), r.m());
        if (rational) *rational = std::move(r);
        return f;
    }
    if (in.contains("csv")) {
        const fs::path csv = p.path(in["csv"], "problem.input.csv");
        fs::path side = csv;
        side.replace_extension(".json");
        if (in.contains("sidecar")) side = p.path(in["sidecar"], "problem.input.sidecar");
        return read_line_function(csv, side, in.value("block", std::string(default_block)));
    }
    throw ParseError("problem.input: expected 'rational' or 'csv'");
}

void cmd_split(const RunConfig& cfg, const Problem& p, Json& res, ArtifactWriter& w) {
    std::optional<RationalMatrix> rational;
    const auto f = input_function(cfg, p, "f", false, &rational);
    const auto split = plemelj_split(f, cfg.split_edge_tol);
    res["wrong_side_plus"] = wrong_side_content(split.plus, HalfPlane::Plus);
    res["wrong_side_minus"] = wrong_side_content(split.minus, HalfPlane::Minus);
    res["reconstruction_error"] = (split.plus + split.minus).max_abs_diff(f);
    if (rational) {
        const auto [rp, rm] = plemelj_split(*rational);
        const auto ep = rp.sample(f.grid(), {HalfPlane::Plus, 0.0});
        const auto em = rm.sample(f.grid(), {HalfPlane::Minus, 0.0});
        res["exact_vs_numeric_plus"] = split.plus.max_abs_diff(ep);
        res["exact_vs_numeric_minus"] = split.minus.max_abs_diff(em);
        write_lines(w, "split",
                    {{"f", &f}, {"plus", &split.plus}, {"minus", &split.minus}, {"plus_exact", &ep}, {"minus_exact", &em}});
    } else {
        write_lines(w, "split", {{"f", &f}, {"plus", &split.plus}, {"minus", &split.minus}});
    }
}

LineMatrixFunction scattering_from_problem(const RunConfig& cfg, const Problem& p, const char* boundary_key,
                                           Json& res) {
    const auto disp = p.dispersion();
    const auto H = p.boundary(boundary_key, cfg.singular_tol);
    const auto grid = cfg.make_grid();
    auto fd = forward_blocks(cfg, disp, p.potential(), grid);
    res["kernels"] = kernels_json(fd.kernels);
    const auto ah = assemble_AH(fd.blocks, H);
    return scattering_matrix(ah.plus, ah.minus, cfg.singular_tol);
}

Json rh_json(const RHResult& r) {
    return {{"iterations", r.iterations},
            {"gmres_residual", r.gmres_residual},
            {"factorization_residual", r.factorization_residual},
            {"probe_sigma_min", r.probe_sigma_min}};
}

void cmd_rh_solve(const RunConfig& cfg, const Problem& p, Json& res, ArtifactWriter& w) {
    const auto S = p.has("input") ? input_function(cfg, p, "S_H", true, nullptr)
                                  : scattering_from_problem(cfg, p, "boundary", res);
    res["solvability"] = solvability_json(solvability_report(S, cfg.singular_tol));
    const auto r = solve_regular_rh(S, rh_options(cfg));
    res["rh"] = rh_json(r);
    write_lines(w, "factors", {{"S_H", &S}, {"AH_plus", &r.AH_plus}, {"AH_minus", &r.AH_minus}});
}

void cmd_recover_blocks(const RunConfig& cfg, const Problem& p, Json& res, ArtifactWriter& w) {
    const auto H1 = p.boundary("boundary", cfg.singular_tol);
    const auto H2 = p.boundary("boundary2", cfg.singular_tol);
    if (H1.n() != H2.n()) throw InvalidArgument("boundary matrices differ in size");
    {
        const double det = std::abs((H1.matrix() - H2.matrix()).determinant());
        if (!(det > cfg.singular_tol)) throw DegenerateBoundaryPair("det(H1 - H2) vanishes", {{"abs_det", det}});
    }
    std::vector<LineMatrixFunction> plus, minus;
    std::optional<BlockTransforms> truth;
    if (p.has("factorizations")) {
        const Json& fsj = p.at("factorizations");
        if (!fsj.is_array() || fsj.size() != 2) throw ParseError("problem.factorizations: expected two entries");
        for (std::size_t i = 0; i < 2; ++i) {
            const fs::path csv = p.path(fsj[i].value("csv", Json()), "problem.factorizations.csv");
            fs::path side = csv;
            side.replace_extension(".json");
            plus.push_back(read_line_function(csv, side, "AH_plus"));
            minus.push_back(read_line_function(csv, side, "AH_minus"));
        }
    } else {
        const auto disp = p.dispersion();
        const auto grid = cfg.make_grid();
        auto fd = forward_blocks(cfg, disp, p.potential(), grid);
        res["kernels"] = kernels_json(fd.kernels);
        Json rh = Json::array();
        for (const auto* H : {&H1, &H2}) {
            const auto ah = assemble_AH(fd.blocks, *H);
            const auto S = scattering_matrix(ah.plus, ah.minus, cfg.singular_tol);
            auto r = solve_regular_rh(S, rh_options(cfg));
            rh.push_back(rh_json(r));
            plus.push_back(std::move(r.AH_plus));
            minus.push_back(std::move(r.AH_minus));
        }
        res["rh"] = rh;
        truth = std::move(fd.blocks);
    }
    RecoveryOptions ro;
    ro.singular_tol = cfg.singular_tol;
    ro.consistency_tol = cfg.consistency_tol;
    const auto rec = recover_blocks(plus[0], minus[0], plus[1], minus[1], H1, H2, ro);
    res["a22_disagreement"] = rec.a22_disagreement;
    res["a21_disagreement"] = rec.a21_disagreement;
    if (truth) {
        res["block_error"] = {{"A11_minus", rec.blocks.A11_minus.max_abs_diff(truth->A11_minus)},
                              {"A21_minus", rec.blocks.A21_minus.max_abs_diff(truth->A21_minus)},
                              {"A12_plus", rec.blocks.A12_plus.max_abs_diff(truth->A12_plus)},
                              {"A22_plus", rec.blocks.A22_plus.max_abs_diff(truth->A22_plus)}};
    }
    write_lines(w, "blocks",
                {{"A11_minus", &rec.blocks.A11_minus},
                 {"A21_minus", &rec.blocks.A21_minus},
                 {"A12_plus", &rec.blocks.A12_plus},
                 {"A22_plus", &rec.blocks.A22_plus}});
}

struct E1Inputs {
    E1System sys;
    E1Boundary bnd;
    std::optional<E1Boundary> bnd_tilde;
};

E1Inputs e1_inputs(const RunConfig& cfg, const Problem& p) {
    const Json& e = p.at("e1");
    E1System sys = e1_system_from_json(e);
    if (!e.contains("h1")) throw ParseError("problem.e1.h1: missing");
    E1Boundary b(matrix_from_json(e["h1"], "problem.e1.h1"), cfg.singular_tol);
    std::optional<E1Boundary> bt;
    if (e.contains("h1_tilde")) bt.emplace(matrix_from_json(e["h1_tilde"], "problem.e1.h1_tilde"), cfg.singular_tol);
    return {std::move(sys), std::move(b), std::move(bt)};
}

double e1_s_max(const RunConfig& cfg, const E1System& sys) {
    if (cfg.s_max > 0.0) return cfg.s_max;
    const double spread = sys.disp().last() - sys.disp().first();
    return spread * std::max(truncation_length(sys.embed().envelope(), cfg.tail_tol), cfg.x_check);
}

void cmd_e1_forward(const RunConfig& cfg, const Problem& p, Json& res, ArtifactWriter& w) {
    const auto in = e1_inputs(cfg, p);
    const auto grid = cfg.make_grid();
    const auto S = e1_scattering(in.sys, in.bnd, grid);
    res["solvability"] = solvability_json(solvability_report(S, cfg.singular_tol));
    if (in.sys.is_exp_sum()) {
        const auto R = e1_scattering_rational(in.sys, in.bnd).sample(grid);
        double err = 0.0;
        for (std::size_t i = 0; i < grid.size(); ++i)
            err = std::max(err, (S[i] - Mat::Identity(S.m(), S.m()) - R[i]).cwiseAbs().maxCoeff());
        res["rational_check_error"] = err;
    }
    write_lines(w, "e1_scattering", {{"S_H", &S}});
    const double s_max = e1_s_max(cfg, in.sys);
    std::vector<double> s;
    for (std::size_t i = 0; double(i) * cfg.s_step <= s_max + 1e-12; ++i) s.push_back(double(i) * cfg.s_step);
    const auto prof = e1_true_profiles(in.sys, in.bnd, s);
    res["s_max"] = s_max;
    w.write("e1_profiles.csv", e1_profiles_csv({{"", &prof}}));
}

void cmd_e1_roundtrip(const RunConfig& cfg, const Problem& p, Json& res, ArtifactWriter& w) {
    const auto in = e1_inputs(cfg, p);
    if (!in.bnd_tilde) throw ParseError("problem.e1.h1_tilde: missing");
    E1RoundtripOptions o;
    o.edge_tol = cfg.split_edge_tol;
    o.ds = cfg.s_step;
    o.s_max = e1_s_max(cfg, in.sys);
    o.x_check = cfg.x_check;
    o.tail_tol = cfg.tail_tol;
    res["s_max"] = o.s_max;
    const auto rep = e1_roundtrip(in.sys, in.bnd, *in.bnd_tilde, cfg.make_grid(), o);
    res["max_rel_error"] = rep.max_rel_error;
    res["err_first"] = rep.err_first;
    res["err_last"] = rep.err_last;
    res["scattering_error"] = rep.scattering_error;
    res["min_singular_minus"] = rep.min_singular_minus;
    res["min_singular_plus"] = rep.min_singular_plus;
    res["rank"] = rep.recovery.rank;
    res["unknowns"] = rep.recovery.unknowns;
    w.write("e1_recovered.csv", e1_recovery_csv(rep.recovery, cfg.s_step, cfg.x_check));
}

void cmd_report(const RunConfig& cfg, const Problem& p, Json& res, ArtifactWriter&) {
    const auto grid = cfg.make_grid();
    if (p.has("e1")) {
        const auto in = e1_inputs(cfg, p);
        res["e1_solvability"] = solvability_json(solvability_report(e1_scattering(in.sys, in.bnd, grid), cfg.singular_tol));
        res["theta"] = theta_json(in.sys.disp());
    }
    if (p.has("potential")) {
        const auto disp = p.dispersion();
        const auto pot = p.potential();
        const Envelope env = pot.envelope();
        res["envelope"] = {{"C", env.C}, {"eps", env.eps}};
        res["theta"] = theta_json(disp);
        ValidationOptions vo;
        vo.tail_tol = cfg.tail_tol;
        res["violations"] = to_json(validate_potential(pot, vo));
        auto fd = forward_blocks(cfg, disp, pot, grid);
        res["kernels"] = kernels_json(fd.kernels);
        res["strip_estimate"] = strip_estimate(fd.kernels.theta(), fd.kernels.eps(), disp);
        if (p.has("boundary")) {
            const auto H = p.boundary("boundary", cfg.singular_tol);
            const auto ah = assemble_AH(fd.blocks, H);
            std::vector<ShiftedLine> shifted;
            for (double d : cfg.shift_deltas) shifted.push_back(shifted_AH(fd.kernels, disp, H, grid, d));
            const auto strip = strip_diagnostics(ah.plus, ah.minus, shifted);
            Json lines = Json::array();
            for (const auto& l : strip.shifted) lines.push_back(line_json(l));
            res["strip"] = {{"real_axis", line_json(strip.real_axis)},
                            {"shifted", lines},
                            {"edge_residual_plus", strip.edge_residual_plus},
                            {"edge_residual_minus", strip.edge_residual_minus}};
            res["min_abs_det_I_plus_AH_plus"] = strip.real_axis.min_det_plus;
            const auto S = scattering_matrix(ah.plus, ah.minus, cfg.singular_tol);
            res["solvability"] = solvability_json(solvability_report(S, cfg.singular_tol));
        }
    }
}

using Handler = void (*)(const RunConfig&, const Problem&, Json&, ArtifactWriter&);

Handler handler_for(const std::string& cmd) {
    if (cmd == "validate") return cmd_validate;
    if (cmd == "forward") return cmd_forward;
    if (cmd == "split") return cmd_split;
    if (cmd == "rh-solve") return cmd_rh_solve;
    if (cmd == "recover-blocks") return cmd_recover_blocks;
    if (cmd == "e1-forward") return cmd_e1_forward;
    if (cmd == "e1-roundtrip") return cmd_e1_roundtrip;
    if (cmd == "report") return cmd_report;
    return nullptr;
}

Json error_json(const std::string& name, const std::string& message, const std::map<std::string, double>& ctx) {
    Json c = Json::object();
    for (const auto& [k, v] : ctx) c[k] = v;
    return {{"name", name}, {"message", message}, {"context", c}};
}

RunOutcome finish(const fs::path& out_dir, Json report, ArtifactWriter* w, int code) {
    report["exit_code"] = code;
    report["status"] = code == kExitOk ? "ok" : "failed";
    report["manifest"] = w ? w->manifest() : Json::array();
    try {
        atomic_write(out_dir / "report.json", dump_json(report));
    } catch (const Error& e) {
        report["report_write_error"] = e.what();
        if (code == kExitOk) code = kExitInput;
        report["exit_code"] = code;
    }
    return {code, std::move(report)};
}

}  // namespace

RunOutcome run_command(const std::string& command, const RunConfig& cfg, const RunContext& ctx) {
    if (ctx.threads > 0) omp_set_num_threads(ctx.threads);
    Json report{{"command", command}, {"config", cfg.summary()}};
    ArtifactWriter w(ctx.out_dir);
    Json results = Json::object();
    int code = kExitOk;
    try {
        const Handler h = handler_for(command);
        if (!h) throw InvalidArgument("unknown command '" + command + "'");
        const Problem p = resolve_problem(cfg, ctx, report);
        h(cfg, p, results, w);
    } catch (const Error& e) {
        code = e.is_input_error() ? kExitInput : kExitNumerical;
        report["error"] = error_json(e.name(), e.what(), e.context());
    } catch (const Json::exception& e) {
        code = kExitInput;
        report["error"] = error_json("ParseError", e.what(), {});
    } catch (const std::exception& e) {
        code = kExitNumerical;
        report["error"] = error_json("InternalError", e.what(), {});
    }
    report["results"] = results;
    return finish(ctx.out_dir, std::move(report), &w, code);
}

RunOutcome run_cli(const std::string& command, const fs::path& config_path, const RunContext& ctx) {
    RunConfig cfg;
    try {
        cfg = load_config(config_path);
    } catch (const Error& e) {
        Json report{{"command", command}, {"error", error_json(e.name(), e.what(), e.context())}};
        return finish(ctx.out_dir, std::move(report), nullptr, kExitInput);
    }
    return run_command(command, cfg, ctx);
}

}  // namespace isp
