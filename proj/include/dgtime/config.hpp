#pragma once

// Run configuration for the experiment driver. Configs are JSON documents
// with a fixed schema; unknown keys are rejected with a ConfigError naming
// the field path.

#include "dgtime/timefun.hpp"

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace dgt {

enum class ProblemKind { heat1d, nonnormal, scalar, nonautonomous_heat1d, matrix_file };
enum class SolutionShape { sin_exp, exp };
enum class ForcingKind { manufactured, random_trig, zero };
enum class PathChoice { galerkin, radau_averaged, both };

struct ProblemConfig {
    ProblemKind kind = ProblemKind::heat1d;
    std::size_t dimension = 50;
    double diffusion = 1.0;
    double skew = 0.0;
    double lambda = 1.0;             // scalar kind: A = [lambda]
    double modulation_offset = 1.0;  // nonautonomous: a(t) = offset + slope t
    double modulation_slope = 0.5;
    double horizon = 1.0;
    std::string matrix_file;
    SolutionShape solution = SolutionShape::sin_exp;
    ForcingKind forcing = ForcingKind::manufactured;
    int trig_terms = 4;
};

struct SolverConfig {
    std::vector<int> q_list{1, 2, 3};
    std::vector<std::size_t> n_list{8, 16, 32, 64, 128};
    PathChoice path = PathChoice::galerkin;
};

struct NormConfig {
    std::vector<double> p_list{2.0, 4.0};
    StateNorm x_norm;
};

struct QuadratureConfig {
    int panels = 16;
    int points = 10;
    int quad_a_points = 0;  // 0: 2q
    int forcing_points = 0; // 0: q+3
};

struct OutputConfig {
    std::string csv_path = "results.csv";
    std::string plotdata_path = "plotdata";
    std::uint64_t seed = 20240601;
};

struct OracleConfig {
    int trials = 50;
    std::size_t max_dimension = 6;
};

struct InterpConfig {
    int reproduction_trials = 100;
    int norm_samples = 200;
};

struct RunConfig {
    ProblemConfig problem;
    SolverConfig solver;
    NormConfig norm;
    QuadratureConfig quadrature;
    OutputConfig output;
    OracleConfig oracle;
    InterpConfig interp;

    /// Field-level checks; throws ConfigError. solver_facing demands 1 < p < inf.
    void validate(bool solver_facing = true) const;
};

/// Parses a JSON document. Missing keys keep their defaults.
RunConfig parse_config(const std::string& text);
RunConfig load_config(const std::filesystem::path& path);

const char* to_string(ProblemKind kind);

} // namespace dgt
