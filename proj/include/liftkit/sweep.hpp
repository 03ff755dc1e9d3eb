#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "liftkit/mat.hpp"

namespace liftkit {

// Epsilon-delta sweep: for each (dim, delta) cell, `trials` seeded
// instances are generated, corrected, and measured. Rows are ordered by
// (dim, delta, trial) regardless of execution schedule; with timing off
// (the default) the CSV is byte-identical across runs.
struct SweepConfig {
    std::string corrector;     // projection, unitary, partial_isometry,
                               // resolution, commuting_normals, haar, matrix_units
    std::string ensemble_kind; // empty = the corrector's default kind
    std::vector<double> deltas;
    std::vector<int> dims;
    int trials = 1;
    std::vector<double> ps;    // extra p-norm distance columns
    uint64_t master_seed = 0;
    bool timing = false;

    void validate() const;
};

struct SweepRow {
    int dim = 0;
    double delta = 0.0;
    int trial = 0;
    double defect_in_op = 0.0;
    double defect_in_2 = 0.0;
    double defect_out_op = 0.0;
    double dist_op = 0.0;
    double dist_2 = 0.0;
    std::vector<double> dist_ps;
    double runtime_ms = 0.0;
    std::string error; // error-code name, empty on success
};

struct SweepResult {
    std::vector<SweepRow> rows;
    nlohmann::json summary;
    std::string csv;
};

// Per-trial seed: splitmix64 chaining of master, dim, delta index, trial.
uint64_t trial_seed(uint64_t master, int dim, size_t delta_index, int trial);

SweepResult run_sweep(const SweepConfig& config);

// The sweep's corrector table, also used by the CLI `correct` subcommand.
bool corrector_registered(const std::string& name);
std::vector<std::string> registered_correctors();
std::string default_ensemble_kind(const std::string& corrector);
std::vector<Mat> run_corrector(const std::string& name, const std::vector<Mat>& in);
// Linear exactness residual of a corrected tuple, recomputed from scratch.
double corrector_output_defect(const std::string& name, const std::vector<Mat>& out);

SweepConfig sweep_config_from_json(const nlohmann::json& j);
nlohmann::json sweep_config_to_json(const SweepConfig& c);

} // namespace liftkit
