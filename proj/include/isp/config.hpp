#pragma once

#include <filesystem>
#include <vector>

#include "isp/io.hpp"
#include "isp/types.hpp"

namespace isp {

/// Run parameters. Zero truncations mean "derive from the envelope".
struct RunConfig {
    // spectral grid
    double lambda_max = 1000.0;
    std::size_t n_lambda = 4096;
    GridKind grid = GridKind::Cayley;

    // discretization
    double x_step = 0.01;
    double s_step = 0.02;
    double x_max = 0.0;
    double t_max = 0.0;
    double s_max = 0.0;
    int snapshot_stride = 50;
    double x_check = 10.0;  // comparison window for recovered profiles

    // tolerances
    double tail_tol = 1e-12;
    double sweep_tol = 1e-12;
    double local_tol = 1e-15;
    double split_edge_tol = 1e-3;
    double singular_tol = 1e-10;
    double gmres_tol = 1e-13;
    double consistency_tol = 1e-8;

    int max_local_iter = 200;
    int gmres_restart = 80;
    int gmres_max_iter = 3000;

    Exec exec = Exec::Parallel;
    std::vector<double> shift_deltas;  // Im lambda of extra lines for strip diagnostics

    Json problem = Json::object();  // inline or loaded from "problem": "<path>"
    std::filesystem::path base_dir;  // for resolving relative paths in the problem

    LambdaGrid make_grid() const;
    /// Tolerances and grid as written to run reports.
    Json summary() const;
};

/// Parses and validates a config file. ParseError carries the line or field,
/// ValidationError names the violated invariant.
RunConfig load_config(const std::filesystem::path& path);

/// Same from an already parsed object.
RunConfig config_from_json(const Json& j, const std::filesystem::path& base_dir = {});

}  // namespace isp
