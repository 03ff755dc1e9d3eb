#include "liftkit/sweep.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <omp.h>

#include "liftkit/block_algebra.hpp"
#include "liftkit/correct.hpp"
#include "liftkit/ensembles.hpp"
#include "liftkit/json_io.hpp"
#include "liftkit/parallel.hpp"
#include "liftkit/spectral.hpp"

namespace liftkit {

using nlohmann::json;

namespace {

uint64_t splitmix64(uint64_t x) {
    x += 0x9E3779B97F4A7C15ull;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
    return x ^ (x >> 31);
}

struct CorrectorBinding {
    std::string default_kind;
    // Returns corrected tuple; `out_defect` is the linear exactness
    // residual of the output, recomputed by the harness.
    std::vector<Mat> (*run)(const std::vector<Mat>& in);
    double (*output_defect)(const std::vector<Mat>& out);
    // Distance is measured between these components of input and output.
    bool compare_all;
};

double max_projection_defect(const std::vector<Mat>& out) {
    double d = 0.0;
    for (const Mat& p : out) d = std::max(d, projection_defect(p));
    return d;
}

std::vector<Mat> run_projection(const std::vector<Mat>& in) {
    return {correct_projection(in.at(0))};
}

std::vector<Mat> run_unitary(const std::vector<Mat>& in) { return {correct_unitary(in.at(0))}; }

double unitary_defect(const std::vector<Mat>& out) {
    const Mat& u = out.at(0);
    const Mat id = Mat::identity(u.dim());
    return std::max(op_norm(mul(adjoint(u), u) - id), op_norm(mul(u, adjoint(u)) - id));
}

std::vector<Mat> run_partial_isometry(const std::vector<Mat>& in) {
    // Tuple layout (P, Q, A); P and Q pass through so the residuals can be
    // recomputed downstream.
    const Mat v = correct_partial_isometry(in.at(0), in.at(1), in.at(2));
    return {in.at(0), in.at(1), v};
}

double partial_isometry_defect(const std::vector<Mat>& out) {
    const Mat& p = out.at(0);
    const Mat& q = out.at(1);
    const Mat& v = out.at(2);
    return std::max(op_norm(mul(adjoint(v), v) - p), op_norm(mul(v, adjoint(v)) - q));
}

std::vector<Mat> run_resolution(const std::vector<Mat>& in) { return correct_resolution(in); }

double resolution_defect(const std::vector<Mat>& out) {
    double d = max_projection_defect(out);
    Mat sum = Mat::zeros(out.at(0).dim());
    for (const Mat& p : out) sum = sum + p;
    return std::max(d, op_norm(sum - Mat::identity(sum.dim())));
}

std::vector<Mat> run_commuting_normals(const std::vector<Mat>& in) {
    return correct_commuting_normals(in, 2.0).bs;
}

double commuting_normals_defect(const std::vector<Mat>& out) {
    double d = 0.0;
    for (size_t j = 0; j < out.size(); ++j) {
        d = std::max(d, op_norm(commutator(out[j], adjoint(out[j]))));
        for (size_t k = j + 1; k < out.size(); ++k)
            d = std::max(d, op_norm(commutator(out[j], out[k])));
    }
    return d;
}

std::vector<Mat> run_haar(const std::vector<Mat>& in) {
    return {correct_haar(in.at(0), BlockAlgebra::full(in.at(0).dim()))};
}

double haar_defect(const std::vector<Mat>& out) {
    const Mat& v = out.at(0);
    const int n = v.dim();
    double d = unitary_defect(out);
    Mat power = Mat::identity(n);
    for (int k = 1; k < n; ++k) {
        power = mul(power, v);
        d = std::max(d, std::abs(trace_raw(power)) / n);
    }
    return d;
}

std::vector<Mat> run_matrix_units(const std::vector<Mat>& in) {
    // Flat tuple of a structure-[2] candidate system.
    if (in.size() != 4) fail(ErrorCode::ShapeMismatch, "matrix_units corrector expects 4 units");
    MatrixUnitSystem cand = MatrixUnitSystem::empty({2}, in.at(0).dim());
    for (int s = 0; s < 2; ++s)
        for (int t = 0; t < 2; ++t) cand.unit(0, s, t) = in.at(static_cast<size_t>(s * 2 + t));
    const MatrixUnitSystem fixed = correct_matrix_units(cand);
    std::vector<Mat> out;
    for (int s = 0; s < 2; ++s)
        for (int t = 0; t < 2; ++t) out.push_back(fixed.unit(0, s, t));
    return out;
}

double matrix_units_defect(const std::vector<Mat>& out) {
    MatrixUnitSystem sys = MatrixUnitSystem::empty({2}, out.at(0).dim());
    for (int s = 0; s < 2; ++s)
        for (int t = 0; t < 2; ++t) sys.unit(0, s, t) = out.at(static_cast<size_t>(s * 2 + t));
    return sys.generator_defect();
}

const CorrectorBinding* binding_for(const std::string& name) {
    static const std::pair<std::string, CorrectorBinding> table[] = {
        {"projection", {"near_projection", run_projection, max_projection_defect, true}},
        {"unitary", {"near_unitary", run_unitary, unitary_defect, true}},
        {"partial_isometry",
         {"near_partial_isometry", run_partial_isometry, partial_isometry_defect, false}},
        {"resolution", {"near_resolution", run_resolution, resolution_defect, true}},
        {"commuting_normals",
         {"almost_commuting_pair", run_commuting_normals, commuting_normals_defect, true}},
        {"haar", {"near_unitary", run_haar, haar_defect, true}},
        {"matrix_units", {"near_matrix_units", run_matrix_units, matrix_units_defect, true}},
    };
    for (const auto& [key, value] : table)
        if (key == name) return &value;
    return nullptr;
}

std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

double median(std::vector<double> v) {
    if (v.empty()) return 0.0;
    std::sort(v.begin(), v.end());
    const size_t n = v.size();
    return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

} // namespace

bool corrector_registered(const std::string& name) { return binding_for(name) != nullptr; }

std::vector<std::string> registered_correctors() {
    return {"projection",  "unitary", "partial_isometry", "resolution",
            "commuting_normals", "haar",    "matrix_units"};
}

std::string default_ensemble_kind(const std::string& corrector) {
    const CorrectorBinding* b = binding_for(corrector);
    if (!b) fail(ErrorCode::InvalidParameter, "unknown corrector '" + corrector + "'");
    return b->default_kind;
}

std::vector<Mat> run_corrector(const std::string& name, const std::vector<Mat>& in) {
    const CorrectorBinding* b = binding_for(name);
    if (!b) fail(ErrorCode::InvalidParameter, "unknown corrector '" + name + "'");
    return b->run(in);
}

double corrector_output_defect(const std::string& name, const std::vector<Mat>& out) {
    const CorrectorBinding* b = binding_for(name);
    if (!b) fail(ErrorCode::InvalidParameter, "unknown corrector '" + name + "'");
    return b->output_defect(out);
}

void SweepConfig::validate() const {
    if (!binding_for(corrector))
        fail(ErrorCode::InvalidParameter, "run_sweep: unknown corrector '" + corrector + "'");
    if (deltas.empty()) fail(ErrorCode::InvalidParameter, "run_sweep: empty delta grid");
    for (size_t i = 0; i < deltas.size(); ++i) {
        if (deltas[i] <= 0.0)
            fail(ErrorCode::InvalidParameter, "run_sweep: deltas must be positive");
        if (i > 0 && deltas[i] <= deltas[i - 1])
            fail(ErrorCode::InvalidParameter, "run_sweep: deltas must be increasing");
    }
    if (dims.empty()) fail(ErrorCode::InvalidParameter, "run_sweep: empty dim list");
    if (trials < 1) fail(ErrorCode::InvalidParameter, "run_sweep: trials must be at least 1");
}

uint64_t trial_seed(uint64_t master, int dim, size_t delta_index, int trial) {
    uint64_t h = splitmix64(master);
    h = splitmix64(h ^ static_cast<uint64_t>(dim));
    h = splitmix64(h ^ static_cast<uint64_t>(delta_index));
    h = splitmix64(h ^ static_cast<uint64_t>(trial));
    return h;
}

SweepResult run_sweep(const SweepConfig& config) {
    config.validate();
    const CorrectorBinding& binding = *binding_for(config.corrector);
    const std::string kind =
        config.ensemble_kind.empty() ? binding.default_kind : config.ensemble_kind;

    struct Cell {
        int dim;
        size_t delta_index;
        int trial;
    };
    std::vector<Cell> cells;
    for (int dim : config.dims)
        for (size_t di = 0; di < config.deltas.size(); ++di)
            for (int t = 0; t < config.trials; ++t) cells.push_back({dim, di, t});

    SweepResult result;
    result.rows.assign(cells.size(), SweepRow{});

#pragma omp parallel for schedule(dynamic) num_threads(thread_cap())
    for (long long ci = 0; ci < static_cast<long long>(cells.size()); ++ci) {
        const Cell& cell = cells[static_cast<size_t>(ci)];
        SweepRow& row = result.rows[static_cast<size_t>(ci)];
        row.dim = cell.dim;
        row.delta = config.deltas[cell.delta_index];
        row.trial = cell.trial;
        row.dist_ps.assign(config.ps.size(), 0.0);
        const auto start = std::chrono::steady_clock::now();
        try {
            EnsembleSpec spec;
            spec.kind = kind;
            spec.dim = cell.dim;
            spec.delta = row.delta;
            spec.seed = trial_seed(config.master_seed, cell.dim, cell.delta_index, cell.trial);
            GeneratedInstance inst = generate(spec);
            row.defect_in_op = inst.report.op_defect;
            const auto it2 = inst.report.p_defects.find(2.0);
            row.defect_in_2 = it2 == inst.report.p_defects.end() ? 0.0 : it2->second;

            const std::vector<Mat> out = binding.run(inst.mats);
            row.defect_out_op = binding.output_defect(out);

            const BlockAlgebra alg = BlockAlgebra::full(cell.dim);
            const size_t lo = binding.compare_all ? 0 : out.size() - 1;
            for (size_t j = lo; j < out.size(); ++j) {
                const Mat diff = out[j] - inst.mats[j];
                row.dist_op = std::max(row.dist_op, op_norm(diff));
                row.dist_2 = std::max(row.dist_2, alg.norm2(diff));
                for (size_t pi = 0; pi < config.ps.size(); ++pi)
                    row.dist_ps[pi] = std::max(row.dist_ps[pi], alg.p_norm(diff, config.ps[pi]));
            }
        } catch (const Error& e) {
            row.error = error_code_name(e.code());
        }
        const auto stop = std::chrono::steady_clock::now();
        row.runtime_ms =
            std::chrono::duration_cast<std::chrono::duration<double, std::milli>>(stop - start)
                .count();
    }

    // CSV (LF line endings, fixed column order).
    std::string csv = "dim,delta,trial,defect_in_op,defect_in_2,defect_out_op,dist_op,dist_2";
    for (double p : config.ps) csv += ",dist_p" + format_double(p);
    csv += ",runtime_ms,error\n";
    for (const SweepRow& row : result.rows) {
        csv += std::to_string(row.dim) + "," + format_double(row.delta) + "," +
               std::to_string(row.trial) + "," + format_double(row.defect_in_op) + "," +
               format_double(row.defect_in_2) + "," + format_double(row.defect_out_op) + "," +
               format_double(row.dist_op) + "," + format_double(row.dist_2);
        for (double d : row.dist_ps) csv += "," + format_double(d);
        csv += ",";
        if (config.timing) csv += format_double(row.runtime_ms);
        csv += "," + row.error + "\n";
    }
    result.csv = std::move(csv);

    // Summary: per-cell medians and the epsilon(delta) monotonicity verdict.
    json cells_json = json::array();
    bool monotone = true;
    for (int dim : config.dims) {
        double prev_median = -1.0;
        for (size_t di = 0; di < config.deltas.size(); ++di) {
            std::vector<double> d2;
            int errors = 0;
            double worst_out = 0.0;
            for (const SweepRow& row : result.rows) {
                if (row.dim != dim || row.delta != config.deltas[di]) continue;
                if (!row.error.empty()) {
                    ++errors;
                    continue;
                }
                d2.push_back(row.dist_2);
                worst_out = std::max(worst_out, row.defect_out_op);
            }
            const double med = median(d2);
            if (!d2.empty()) {
                if (prev_median >= 0.0 && med < prev_median - 1e-12) monotone = false;
                prev_median = med;
            }
            cells_json.push_back(json{{"dim", dim},
                                      {"delta", config.deltas[di]},
                                      {"median_dist_2", med},
                                      {"errors", errors},
                                      {"max_defect_out_op", worst_out},
                                      {"contract_ok", worst_out <= contract_tol(dim)}});
        }
    }
    result.summary = json{{"corrector", config.corrector},
                          {"ensemble", kind},
                          {"cells", std::move(cells_json)},
                          {"epsilon_delta_monotone", monotone}};
    return result;
}

SweepConfig sweep_config_from_json(const json& j) {
    SweepConfig c;
    if (!j.is_object()) throw SchemaError("sweep config must be an object");
    if (!j.contains("corrector")) throw SchemaError("missing field 'corrector'");
    c.corrector = j.at("corrector").get<std::string>();
    c.ensemble_kind = j.value("ensemble", std::string());
    if (!j.contains("deltas")) throw SchemaError("missing field 'deltas'");
    c.deltas = j.at("deltas").get<std::vector<double>>();
    if (!j.contains("dims")) throw SchemaError("missing field 'dims'");
    c.dims = j.at("dims").get<std::vector<int>>();
    c.trials = j.value("trials", 1);
    c.ps = j.value("ps", std::vector<double>{});
    c.master_seed = j.value("seed", 0ull);
    c.timing = j.value("timing", false);
    return c;
}

json sweep_config_to_json(const SweepConfig& c) {
    return json{{"corrector", c.corrector}, {"ensemble", c.ensemble_kind},
                {"deltas", c.deltas},       {"dims", c.dims},
                {"trials", c.trials},       {"ps", c.ps},
                {"seed", c.master_seed},    {"timing", c.timing}};
}

} // namespace liftkit
