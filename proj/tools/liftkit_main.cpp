// liftkit: correction and lifting experiments on tuples of complex matrices.
//
// Subcommands:
//   gen      generate a seeded approximate-solution instance
//   defect   evaluate a named relation on a tuple and report its norms
//   correct  run a corrector on a tuple, write outputs + before/after reports
//   sweep    run an epsilon-delta sweep from a JSON config (CSV + summary)
//   ultra    lifting procedures on representative sequences
//
// Exit codes: 0 success, 1 usage/schema failure, 2 mathematical
// precondition failure (details in the report/stderr).

#include <CLI11.hpp>
#include <fstream>
#include <iostream>

#include "liftkit/ensembles.hpp"
#include "liftkit/json_io.hpp"
#include "liftkit/ncexpr.hpp"
#include "liftkit/spectral.hpp"
#include "liftkit/sweep.hpp"
#include "liftkit/ultra.hpp"

using namespace liftkit;
using nlohmann::json;

namespace {

BlockAlgebra algebra_for(const std::string& alg_path, int dim) {
    if (alg_path.empty()) return BlockAlgebra::full(dim);
    return alg_from_json(load_json_file(alg_path));
}

void write_text(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw SchemaError("cannot write '" + path + "'");
    out << text;
}

int run(int argc, char** argv) {
    CLI::App app{"liftkit: exact correction of approximately-satisfied matrix relations"};
    app.require_subcommand(1);

    // gen
    auto* gen = app.add_subcommand("gen", "generate a seeded instance");
    std::string gen_kind = "near_projection", gen_out = "instance.json";
    int gen_dim = 8;
    double gen_delta = 0.01;
    uint64_t gen_seed = 0;
    gen->add_option("--kind", gen_kind, "ensemble kind");
    gen->add_option("--dim", gen_dim, "matrix dimension");
    gen->add_option("--delta", gen_delta, "defect target");
    gen->add_option("--seed", gen_seed, "64-bit seed");
    gen->add_option("--out", gen_out, "output tuple file");

    // defect
    auto* def = app.add_subcommand("defect", "evaluate a relation on a tuple");
    std::string def_rel = "projection", def_in, def_alg, def_out;
    int def_n = 1;
    double def_c = 0.5, def_theta = -1.0;
    std::vector<double> def_ps;
    def->add_option("--rel", def_rel, "relation name");
    def->add_option("--n", def_n, "relation arity parameter");
    def->add_option("--c", def_c, "angle parameter for two_projections");
    def->add_option("--in", def_in, "input tuple file")->required();
    def->add_option("--alg", def_alg, "block algebra file (default: full matrix algebra)");
    def->add_option("--p", def_ps, "p-norms to report");
    def->add_option("--theta", def_theta, "report a vanishing verdict at this tolerance");
    def->add_option("--out", def_out, "report file (default: stdout)");

    // correct
    auto* cor = app.add_subcommand("correct", "run a corrector on a tuple");
    std::string cor_op = "projection", cor_in, cor_out = "corrected.json";
    std::vector<double> cor_ps;
    cor->add_option("--op", cor_op, "corrector name");
    cor->add_option("--in", cor_in, "input tuple file")->required();
    cor->add_option("--out", cor_out, "output file");
    cor->add_option("--p", cor_ps, "p-norm distances to report");

    // sweep
    auto* swp = app.add_subcommand("sweep", "run an epsilon-delta sweep");
    std::string swp_config, swp_out = "sweep";
    swp->add_option("--config", swp_config, "sweep config JSON")->required();
    swp->add_option("--out", swp_out, "output prefix (<prefix>.csv, <prefix>.summary.json)");

    // ultra
    auto* ult = app.add_subcommand("ultra", "lifting procedures on representative sequences");
    ult->require_subcommand(1);

    auto* dc = ult->add_subcommand("diagonal-completion", "telescoping diagonal completion");
    std::string dc_in, dc_out = "completed.json";
    dc->add_option("--in", dc_in, "array file {algebras, rows, filter?}")->required();
    dc->add_option("--out", dc_out, "output file");

    auto* lpt = ult->add_subcommand("lift-projection-trace", "trace-matched comparable projections");
    std::string lpt_in, lpt_out = "lifted.json";
    double lpt_t = 0.5;
    lpt->add_option("--in", lpt_in, "projection sequence file")->required();
    lpt->add_option("--t", lpt_t, "target trace");
    lpt->add_option("--out", lpt_out, "output file");

    auto* lc = ult->add_subcommand("lift-chain", "trace-matched spectral chains");
    std::string lc_in, lc_out = "chains.json";
    std::vector<double> lc_grid;
    lc->add_option("--in", lc_in, "Hermitian contraction sequence file")->required();
    lc->add_option("--grid", lc_grid, "grid points (default: dyadic at resolution 1/64)");
    lc->add_option("--out", lc_out, "output file");

    auto* lpi = ult->add_subcommand("lift-partial-isometry", "per-index polar lifting");
    std::string lpi_e, lpi_f, lpi_w, lpi_out = "lifted.json";
    lpi->add_option("--e", lpi_e, "source projection sequence")->required();
    lpi->add_option("--f", lpi_f, "range projection sequence")->required();
    lpi->add_option("--w", lpi_w, "candidate sequence")->required();
    lpi->add_option("--out", lpi_out, "output file");

    auto* ext = ult->add_subcommand("extend-units", "extend matrix-unit representations");
    std::string ext_inc, ext_pi, ext_targets, ext_out = "extended.json";
    ext->add_option("--inclusion", ext_inc, "inclusion data file")->required();
    ext->add_option("--pi", ext_pi, "per-index unit systems {systems: [...]}")->required();
    ext->add_option("--targets", ext_targets, "per-index connector candidates (optional)");
    ext->add_option("--out", ext_out, "output file");

    auto* brt = ult->add_subcommand("bratteli", "iterated extension along an inclusion chain");
    std::string brt_chain, brt_out = "tower.json";
    int brt_depth = 1;
    std::vector<int> brt_ambient;
    brt->add_option("--chain", brt_chain, "chain file {steps: [inclusion...]}")->required();
    brt->add_option("--depth", brt_depth, "levels to lift");
    brt->add_option("--ambient", brt_ambient, "ambient dimension per index")->required();
    brt->add_option("--out", brt_out, "output file");

    CLI11_PARSE(app, argc, argv);

    if (gen->parsed()) {
        EnsembleSpec spec{gen_kind, gen_dim, gen_delta, gen_seed};
        GeneratedInstance inst = generate(spec);
        json out = tuple_to_json(inst.mats);
        out["spec"] = ensemble_to_json(spec);
        out["report"] = report_to_json(inst.report);
        if (inst.units) out["units"] = units_to_json(*inst.units);
        save_json_file(gen_out, out);
        std::cout << "measured defect " << inst.measured_defect << " -> " << gen_out << "\n";
        return 0;
    }

    if (def->parsed()) {
        const std::vector<Mat> mats = tuple_from_json(load_json_file(def_in));
        if (mats.empty()) throw SchemaError("empty tuple");
        const NcExpr rel = relation_by_name(def_rel, def_n, def_c);
        const BlockAlgebra alg = algebra_for(def_alg, mats[0].dim());
        std::vector<double> ps = def_ps.empty() ? std::vector<double>{2.0} : def_ps;
        DefectReport rep = defect(rel, mats, alg, ps, def_rel);
        json out = report_to_json(rep);
        if (def_theta >= 0.0) out["vanishes_at_theta"] = rep.op_defect < def_theta;
        if (def_out.empty())
            std::cout << out.dump(2) << "\n";
        else
            save_json_file(def_out, out);
        return 0;
    }

    if (cor->parsed()) {
        if (!corrector_registered(cor_op)) {
            std::string names;
            for (const auto& n : registered_correctors()) names += " " + n;
            std::cerr << "unknown corrector '" << cor_op << "'; registered:" << names << "\n";
            return 1;
        }
        const json in_json = load_json_file(cor_in);
        std::vector<Mat> in = tuple_from_json(in_json);
        json out;
        try {
            const double defect_in = corrector_output_defect(cor_op, in);
            const std::vector<Mat> fixed = run_corrector(cor_op, in);
            const double defect_out = corrector_output_defect(cor_op, fixed);
            const BlockAlgebra alg = BlockAlgebra::full(in.at(0).dim());
            json dists = json::array();
            for (size_t j = 0; j < fixed.size(); ++j) {
                const Mat diff = fixed[j] - in[j];
                json d{{"op", op_norm(diff)}, {"2", alg.norm2(diff)}};
                for (double p : cor_ps) d[std::to_string(p)] = alg.p_norm(diff, p);
                dists.push_back(std::move(d));
            }
            out = tuple_to_json(fixed);
            out["before"] = json{{"defect_op", defect_in}};
            out["after"] = json{{"defect_op", defect_out}};
            out["distances"] = std::move(dists);
            save_json_file(cor_out, out);
            std::cout << "defect " << defect_in << " -> " << defect_out << ", wrote " << cor_out
                      << "\n";
        } catch (const Error& e) {
            json rep{{"error", error_code_name(e.code())}, {"detail", e.what()}};
            save_json_file(cor_out, rep);
            std::cerr << "corrector error: " << e.what() << "\n";
            return 2;
        }
        return 0;
    }

    if (swp->parsed()) {
        const SweepConfig config = sweep_config_from_json(load_json_file(swp_config));
        const SweepResult result = run_sweep(config);
        write_text(swp_out + ".csv", result.csv);
        save_json_file(swp_out + ".summary.json", result.summary);
        std::cout << result.rows.size() << " rows -> " << swp_out << ".csv\n";
        return 0;
    }

    if (dc->parsed()) {
        const json j = load_json_file(dc_in);
        std::vector<BlockAlgebra> algebras;
        for (const json& aj : j.at("algebras")) algebras.push_back(alg_from_json(aj));
        std::vector<std::vector<Mat>> rows;
        for (const json& rj : j.at("rows")) {
            std::vector<Mat> row;
            for (const json& mj : rj) row.push_back(mat_from_json(mj));
            rows.push_back(std::move(row));
        }
        const TailFilter filter = j.contains("filter")
                                      ? filter_from_json(j.at("filter"))
                                      : TailFilter::full(static_cast<int>(algebras.size()),
                                                         static_cast<int>(rows.size()));
        DiagonalCompletionResult res = diagonal_completion(rows, algebras, filter);
        json out{{"completed", repseq_to_json(res.completed)},
                 {"f_sets", res.f_sets},
                 {"chosen_row", res.chosen_row}};
        save_json_file(dc_out, out);
        return 0;
    }

    if (lpt->parsed()) {
        RepSequence seq = repseq_from_json(load_json_file(lpt_in));
        RepSequence lifted = lift_projection_trace(seq, lpt_t);
        save_json_file(lpt_out, repseq_to_json(lifted));
        return 0;
    }

    if (lc->parsed()) {
        RepSequence seq = repseq_from_json(load_json_file(lc_in));
        std::vector<double> grid = lc_grid;
        if (grid.empty())
            for (int k = 1; k < 64; ++k) grid.push_back(k / 64.0);
        const std::vector<SpectralChain> chains = lift_chain(seq, grid);
        json arr = json::array();
        for (const SpectralChain& c : chains) arr.push_back(chain_to_json(c));
        save_json_file(lc_out, json{{"chains", std::move(arr)}});
        return 0;
    }

    if (lpi->parsed()) {
        RepSequence e = repseq_from_json(load_json_file(lpi_e));
        RepSequence f = repseq_from_json(load_json_file(lpi_f));
        RepSequence w = repseq_from_json(load_json_file(lpi_w));
        PartialIsometryLift res = lift_partial_isometry(e, f, w);
        json out{{"lifted", repseq_to_json(res.lifted)}, {"profile", res.distance_profile}};
        save_json_file(lpi_out, out);
        return 0;
    }

    if (ext->parsed()) {
        const InclusionData inc = inclusion_from_json(load_json_file(ext_inc));
        std::vector<MatrixUnitSystem> pi;
        for (const json& sj : load_json_file(ext_pi).at("systems"))
            pi.push_back(units_from_json(sj));
        std::vector<std::vector<Mat>> targets;
        const bool has_targets = !ext_targets.empty();
        if (has_targets) {
            for (const json& tj : load_json_file(ext_targets).at("targets")) {
                std::vector<Mat> per_index;
                for (const json& mj : tj) per_index.push_back(mat_from_json(mj));
                targets.push_back(std::move(per_index));
            }
        }
        const std::vector<MatrixUnitSystem> extended =
            extend_matrix_units(inc, pi, has_targets ? &targets : nullptr);
        json arr = json::array();
        for (const MatrixUnitSystem& s : extended) arr.push_back(units_to_json(s));
        save_json_file(ext_out, json{{"systems", std::move(arr)}, {"restriction_ok", true}});
        return 0;
    }

    if (brt->parsed()) {
        std::vector<InclusionData> chain;
        for (const json& sj : load_json_file(brt_chain).at("steps"))
            chain.push_back(inclusion_from_json(sj));
        const auto tower = bratteli_lift(chain, brt_depth, brt_ambient);
        json levels = json::array();
        for (const auto& level : tower) {
            json idx = json::array();
            for (const MatrixUnitSystem& s : level) idx.push_back(units_to_json(s));
            levels.push_back(std::move(idx));
        }
        save_json_file(brt_out, json{{"levels", std::move(levels)}});
        return 0;
    }

    return 0;
}

} // namespace

int main(int argc, char** argv) {
    try {
        return run(argc, argv);
    } catch (const Error& e) {
        std::cerr << "error (" << error_code_name(e.code()) << "): " << e.what() << "\n";
        return 2;
    } catch (const SchemaError& e) {
        std::cerr << "schema error: " << e.what() << "\n";
        return 1;
    } catch (const json::exception& e) {
        std::cerr << "json error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
