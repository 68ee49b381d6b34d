#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "screenbem/quadrature.hpp"

namespace screenbem {

enum class Method { Conforming, Nitsche };
enum class ScreenKind { Model3, Square };

/// Validated, fully deterministic run configuration.
struct RunConfig {
    Method method = Method::Nitsche;
    ScreenKind screen = ScreenKind::Model3;
    double k = 5.0;
    std::vector<double> nus; // one run per value; empty for conforming
    double epsilon = 0;      // nu = nu0 * h^{-epsilon} when positive
    int level_begin = 1;
    int level_end = 4;
    QuadOrders orders;
    std::string out_dir = "out";
    int threads = 0;
    bool dump_mesh = false;
    bool dump_matrix = false;
};

struct ConfigIssue {
    std::string field;
    std::string message;
};

struct ValidationResult {
    std::optional<RunConfig> config;
    std::vector<ConfigIssue> issues;

    bool ok() const { return issues.empty(); }
};

/// Builds a RunConfig from raw key=value settings, collecting all violations
/// instead of stopping at the first. Recognized keys: method, screen, k, nu,
/// nu0, epsilon, levels, quad-orders, out, threads, dump-mesh, dump-matrix.
ValidationResult validate_config(const std::map<std::string, std::string>& raw);

/// key=value file, one setting per line, '#' comments.
std::map<std::string, std::string> read_config_file(const std::string& path);

} // namespace screenbem
