#include "isp/config.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

#include "isp/errors.hpp"

namespace isp {

namespace fs = std::filesystem;

namespace {

const std::set<std::string> kKnownKeys{
    "lambda_max",     "n_lambda",       "grid",       "x_step",        "s_step",      "x_max",
    "t_max",          "s_max",          "snapshot_stride", "x_check",  "tail_tol",    "sweep_tol",
    "local_tol",      "split_edge_tol", "singular_tol", "gmres_tol",   "consistency_tol",
    "max_local_iter", "gmres_restart",  "gmres_max_iter", "exec",      "shift_deltas", "problem"};

double get_number(const Json& j, const char* key, double fallback) {
    if (!j.contains(key)) return fallback;
    if (!j[key].is_number()) throw ParseError(std::string(key) + ": expected a number");
    return j[key].get<double>();
}

long long get_integer(const Json& j, const char* key, long long fallback) {
    if (!j.contains(key)) return fallback;
    if (!j[key].is_number_integer()) throw ParseError(std::string(key) + ": expected an integer");
    return j[key].get<long long>();
}

void require_positive(double v, const char* key) {
    if (!(v > 0.0)) throw ValidationError(std::string(key) + " must be positive");
}

void require_nonnegative(double v, const char* key) {
    if (!(v >= 0.0)) throw ValidationError(std::string(key) + " must be non-negative");
}

void require_unit_open(double v, const char* key) {
    if (!(v > 0.0 && v < 1.0)) throw ValidationError(std::string(key) + " must lie in (0, 1)");
}

Json read_json_file(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    try {
        return Json::parse(ss.str());
    } catch (const Json::parse_error& e) {
        // e.byte is the offset; report a line number as well
        const std::string text = ss.str();
        const std::size_t upto = std::min<std::size_t>(e.byte, text.size());
        const auto line = 1 + std::count(text.begin(), text.begin() + std::ptrdiff_t(upto), '\n');
        throw ParseError(path.string() + ":" + std::to_string(line) + ": " + e.what(), {{"line", double(line)}});
    }
}

}  // namespace

LambdaGrid RunConfig::make_grid() const {
    switch (grid) {
        case GridKind::Cayley: return LambdaGrid::cayley(lambda_max, n_lambda);
        case GridKind::Uniform: return LambdaGrid::uniform(lambda_max, n_lambda);
        case GridKind::Custom: break;
    }
    throw InvalidArgument("custom grids are not configurable");
}

Json RunConfig::summary() const {
    return {{"lambda_max", lambda_max},
            {"n_lambda", n_lambda},
            {"grid", grid_kind_name(grid)},
            {"x_step", x_step},
            {"s_step", s_step},
            {"x_max", x_max},
            {"t_max", t_max},
            {"s_max", s_max},
            {"x_check", x_check},
            {"tolerances",
             {{"tail_tol", tail_tol},
              {"sweep_tol", sweep_tol},
              {"local_tol", local_tol},
              {"split_edge_tol", split_edge_tol},
              {"singular_tol", singular_tol},
              {"gmres_tol", gmres_tol},
              {"consistency_tol", consistency_tol}}},
            {"exec", exec == Exec::Serial ? "serial" : "parallel"}};
}

RunConfig config_from_json(const Json& j, const fs::path& base_dir) {
    if (!j.is_object()) throw ParseError("config: expected a JSON object");
    for (auto it = j.begin(); it != j.end(); ++it)
        if (!kKnownKeys.count(it.key())) throw ParseError("config: unknown field '" + it.key() + "'");

    RunConfig c;
    c.base_dir = base_dir;
    c.lambda_max = get_number(j, "lambda_max", c.lambda_max);
    const long long nl = get_integer(j, "n_lambda", (long long)c.n_lambda);
    if (j.contains("grid")) {
        if (!j["grid"].is_string()) throw ParseError("grid: expected a string");
        const std::string g = j["grid"].get<std::string>();
        if (g == "cayley") c.grid = GridKind::Cayley;
        else if (g == "uniform") c.grid = GridKind::Uniform;
        else throw ValidationError("grid must be 'cayley' or 'uniform'");
    }
    c.x_step = get_number(j, "x_step", c.x_step);
    c.s_step = get_number(j, "s_step", c.s_step);
    c.x_max = get_number(j, "x_max", c.x_max);
    c.t_max = get_number(j, "t_max", c.t_max);
    c.s_max = get_number(j, "s_max", c.s_max);
    c.x_check = get_number(j, "x_check", c.x_check);
    c.snapshot_stride = int(get_integer(j, "snapshot_stride", c.snapshot_stride));
    c.tail_tol = get_number(j, "tail_tol", c.tail_tol);
    c.sweep_tol = get_number(j, "sweep_tol", c.sweep_tol);
    c.local_tol = get_number(j, "local_tol", c.local_tol);
    c.split_edge_tol = get_number(j, "split_edge_tol", c.split_edge_tol);
    c.singular_tol = get_number(j, "singular_tol", c.singular_tol);
    c.gmres_tol = get_number(j, "gmres_tol", c.gmres_tol);
    c.consistency_tol = get_number(j, "consistency_tol", c.consistency_tol);
    c.max_local_iter = int(get_integer(j, "max_local_iter", c.max_local_iter));
    c.gmres_restart = int(get_integer(j, "gmres_restart", c.gmres_restart));
    c.gmres_max_iter = int(get_integer(j, "gmres_max_iter", c.gmres_max_iter));
    if (j.contains("exec")) {
        const std::string e = j["exec"].is_string() ? j["exec"].get<std::string>() : "";
        if (e == "serial") c.exec = Exec::Serial;
        else if (e == "parallel") c.exec = Exec::Parallel;
        else throw ValidationError("exec must be 'serial' or 'parallel'");
    }
    if (j.contains("shift_deltas")) {
        if (!j["shift_deltas"].is_array()) throw ParseError("shift_deltas: expected an array");
        for (const auto& d : j["shift_deltas"]) {
            if (!d.is_number()) throw ParseError("shift_deltas: expected numbers");
            c.shift_deltas.push_back(d.get<double>());
        }
    }
    if (j.contains("problem")) {
        const Json& p = j["problem"];
        if (p.is_string()) {
            fs::path path = p.get<std::string>();
            if (path.is_relative()) path = base_dir / path;
            c.problem = read_json_file(path);
            c.base_dir = path.parent_path();
        } else if (p.is_object()) {
            c.problem = p;
        } else {
            throw ParseError("problem: expected a path or an object");
        }
    }

    require_positive(c.lambda_max, "lambda_max");
    if (nl < 4 || (nl & (nl - 1)) != 0) throw ValidationError("n_lambda must be a power of two >= 4", {{"n_lambda", double(nl)}});
    c.n_lambda = std::size_t(nl);
    require_positive(c.x_step, "x_step");
    require_positive(c.s_step, "s_step");
    require_positive(c.x_check, "x_check");
    require_nonnegative(c.x_max, "x_max");
    require_nonnegative(c.t_max, "t_max");
    require_nonnegative(c.s_max, "s_max");
    if (c.snapshot_stride < 1) throw ValidationError("snapshot_stride must be at least 1");
    for (auto [v, k] : {std::pair{c.tail_tol, "tail_tol"}, {c.sweep_tol, "sweep_tol"}, {c.local_tol, "local_tol"},
                        {c.split_edge_tol, "split_edge_tol"}, {c.singular_tol, "singular_tol"},
                        {c.gmres_tol, "gmres_tol"}, {c.consistency_tol, "consistency_tol"}})
        require_unit_open(v, k);
    if (c.max_local_iter < 1 || c.gmres_restart < 1 || c.gmres_max_iter < 1)
        throw ValidationError("iteration limits must be positive");
    return c;
}

RunConfig load_config(const fs::path& path) {
    const Json j = read_json_file(path);
    return config_from_json(j, path.parent_path());
}

}  // namespace isp
