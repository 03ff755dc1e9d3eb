#include "liftkit/ultra.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <omp.h>

#include "liftkit/parallel.hpp"
#include "liftkit/spectral.hpp"

namespace liftkit {

namespace {

// Runs fn(i) for each index, possibly in parallel; the first error wins and
// is rethrown after the join, so results are schedule-independent.
template <typename F>
void for_each_index(size_t count, F&& fn) {
    std::exception_ptr first_error = nullptr;
#pragma omp parallel for schedule(dynamic) num_threads(thread_cap())
    for (long long i = 0; i < static_cast<long long>(count); ++i) {
        try {
            fn(static_cast<size_t>(i));
        } catch (...) {
#pragma omp critical
            if (!first_error) first_error = std::current_exception();
        }
    }
    if (first_error) std::rethrow_exception(first_error);
}

} // namespace

void RepSequence::validate(const char* who) const {
    if (algebras.size() != reps.size())
        fail(ErrorCode::ShapeMismatch, std::string(who) + ": algebra/rep count mismatch");
    for (size_t i = 0; i < reps.size(); ++i) {
        algebras[i].require_compatible(reps[i], who);
        reps[i].require_finite(who);
        const double nrm = op_norm(reps[i]);
        if (nrm > bound + 1e-9)
            fail(ErrorCode::InvalidInput, std::string(who) + ": index " + std::to_string(i) +
                                              " exceeds the norm bound (" + std::to_string(nrm) +
                                              " > " + std::to_string(bound) + ")");
    }
}

TailFilter TailFilter::full(int n_indices, int levels) {
    TailFilter f;
    std::vector<int> all(static_cast<size_t>(n_indices));
    std::iota(all.begin(), all.end(), 0);
    f.sets.assign(static_cast<size_t>(levels), all);
    return f;
}

void TailFilter::validate(int n_indices, const char* who) const {
    if (sets.empty()) fail(ErrorCode::InvalidInput, std::string(who) + ": empty tail filter");
    if (static_cast<int>(sets[0].size()) != n_indices)
        fail(ErrorCode::InvalidInput, std::string(who) + ": E_1 must be the full index set");
    for (size_t l = 0; l < sets.size(); ++l) {
        if (!std::is_sorted(sets[l].begin(), sets[l].end()))
            fail(ErrorCode::InvalidInput, std::string(who) + ": filter sets must be sorted");
        for (int idx : sets[l])
            if (idx < 0 || idx >= n_indices)
                fail(ErrorCode::InvalidInput, std::string(who) + ": filter index out of range");
        if (l > 0 && !std::includes(sets[l - 1].begin(), sets[l - 1].end(), sets[l].begin(),
                                    sets[l].end()))
            fail(ErrorCode::InvalidInput,
                 std::string(who) + ": filter sets must be decreasing");
    }
}

bool TailFilter::contains(size_t level, int index) const {
    const auto& s = sets[level];
    return std::binary_search(s.begin(), s.end(), index);
}

TailProfile tail_p_norm(const RepSequence& x, double p) {
    x.validate("tail_p_norm");
    TailProfile out;
    out.profile.resize(x.size());
    for_each_index(x.size(), [&](size_t i) { out.profile[i] = x.algebras[i].p_norm(x.reps[i], p); });
    out.limit_estimate = out.profile.empty() ? 0.0 : out.profile.back();
    return out;
}

DiagonalCompletionResult diagonal_completion(const std::vector<std::vector<Mat>>& rows,
                                             const std::vector<BlockAlgebra>& algebras,
                                             const TailFilter& filter) {
    if (rows.empty()) fail(ErrorCode::InvalidInput, "diagonal_completion: no rows");
    const size_t n_rows = rows.size();
    const size_t n_idx = rows[0].size();
    if (algebras.size() != n_idx)
        fail(ErrorCode::ShapeMismatch, "diagonal_completion: algebra count mismatch");
    for (const auto& row : rows)
        if (row.size() != n_idx)
            fail(ErrorCode::ShapeMismatch, "diagonal_completion: ragged row");
    if (filter.sets.size() < n_rows)
        fail(ErrorCode::InvalidInput, "diagonal_completion: filter has fewer levels than rows");
    filter.validate(static_cast<int>(n_idx), "diagonal_completion");

    const auto pow4 = [](size_t one_based) { return std::pow(0.25, static_cast<double>(one_based)); };

    // Cauchy validation on the filter sets (rows are 1-based in messages).
    for (size_t n = 0; n < n_rows; ++n)
        for (size_t m = n + 1; m < n_rows; ++m)
            for (int i : filter.sets[m]) {
                const double d =
                    algebras[static_cast<size_t>(i)].norm2(rows[n][static_cast<size_t>(i)] -
                                                           rows[m][static_cast<size_t>(i)]);
                const double bound = pow4(n + 1) + pow4(m + 1);
                if (d > bound + 1e-12)
                    fail(ErrorCode::NonCauchy,
                         "diagonal_completion: rows (" + std::to_string(n + 1) + ", " +
                             std::to_string(m + 1) + ") at index " + std::to_string(i) +
                             " differ by " + std::to_string(d) + " > " + std::to_string(bound));
            }

    DiagonalCompletionResult out;
    out.f_sets.resize(n_rows);
    for (size_t n = 0; n < n_rows; ++n) {
        for (int i : filter.sets[n]) {
            bool ok = true;
            for (size_t k = 0; k <= n && ok; ++k) {
                const double d =
                    algebras[static_cast<size_t>(i)].norm2(rows[k][static_cast<size_t>(i)] -
                                                           rows[n][static_cast<size_t>(i)]);
                ok = d < pow4(n + 1) + pow4(k + 1);
            }
            if (ok) out.f_sets[n].push_back(i);
        }
    }

    out.chosen_row.assign(n_idx, 0);
    for (size_t i = 0; i < n_idx; ++i)
        for (size_t n = 0; n < n_rows; ++n)
            if (std::binary_search(out.f_sets[n].begin(), out.f_sets[n].end(), static_cast<int>(i)))
                out.chosen_row[i] = static_cast<int>(n);

    out.completed.algebras = algebras;
    out.completed.reps.reserve(n_idx);
    double bound = 0.0;
    for (size_t i = 0; i < n_idx; ++i) {
        out.completed.reps.push_back(rows[static_cast<size_t>(out.chosen_row[i])][i]);
        bound = std::max(bound, op_norm(out.completed.reps.back()));
    }
    out.completed.bound = bound;

    // The telescoping estimate the selection guarantees.
    for (size_t n = 0; n < n_rows; ++n)
        for (int i : out.f_sets[n]) {
            const double d = algebras[static_cast<size_t>(i)].norm2(
                rows[n][static_cast<size_t>(i)] - out.completed.reps[static_cast<size_t>(i)]);
            if (d > 2.0 * pow4(n + 1) + 1e-12)
                fail(ErrorCode::DeltaTooLarge,
                     "diagonal_completion: telescoping bound violated at row " +
                         std::to_string(n + 1) + ", index " + std::to_string(i));
        }
    return out;
}

namespace {

struct BlockEig {
    std::vector<EigH> eigs; // one per block of the algebra
};

BlockEig per_block_eig(const BlockAlgebra& alg, const Mat& a) {
    BlockEig out;
    for (size_t b = 0; b < alg.block_count(); ++b)
        out.eigs.push_back(
            herm_eig(extract_block(a, alg.block_offset(b), alg.block_offset(b), alg.block_dims()[b])));
    return out;
}

// Rank-one sum of selected eigenvectors, re-embedded at the block offset.
void add_eigvec_projector(Mat& target, const BlockAlgebra& alg, size_t b, const EigH& e, int col) {
    const int off = alg.block_offset(b);
    const int d = alg.block_dims()[b];
    for (int r = 0; r < d; ++r)
        for (int c = 0; c < d; ++c)
            target.at(off + r, off + c) += e.vectors.at(r, col) * std::conj(e.vectors.at(c, col));
}

} // namespace

RepSequence lift_projection_trace(const RepSequence& a, double t) {
    a.validate("lift_projection_trace");
    if (t < 0.0 || t > 1.0)
        fail(ErrorCode::InvalidParameter, "lift_projection_trace: t must lie in [0, 1]");
    RepSequence out;
    out.algebras = a.algebras;
    out.reps.assign(a.size(), Mat());
    out.bound = 1.0;

    for_each_index(a.size(), [&](size_t i) {
        const BlockAlgebra& alg = a.algebras[i];
        const Mat& proj = a.reps[i];
        if (!is_contract_projection(proj))
            fail(ErrorCode::ProjectionError,
                 "lift_projection_trace: index " + std::to_string(i) + " is not a projection");
        const BlockEig be = per_block_eig(alg, proj);
        const size_t nb = alg.block_count();
        std::vector<int> rank(nb), full(nb);
        double tau = 0.0;
        for (size_t b = 0; b < nb; ++b) {
            full[b] = alg.block_dims()[b];
            for (double lam : be.eigs[b].values)
                if (lam > 0.5) ++rank[b];
            tau += alg.weights()[b] * rank[b] / full[b];
        }
        // Greedy atom adjustment toward t; only adds or only removes, so
        // the result stays comparable to the input.
        std::vector<int> delta(nb, 0);
        const bool grow = t >= tau;
        double cur = tau;
        while (true) {
            double best_gain = 0.0;
            int best_b = -1;
            for (size_t b = 0; b < nb; ++b) {
                const double atom = alg.weights()[b] / full[b];
                if (grow && rank[b] + delta[b] >= full[b]) continue;
                if (!grow && rank[b] + delta[b] <= 0) continue;
                const double cand = grow ? cur + atom : cur - atom;
                const double gain = std::abs(cur - t) - std::abs(cand - t);
                if (gain > best_gain + 1e-15) {
                    best_gain = gain;
                    best_b = static_cast<int>(b);
                }
            }
            if (best_b < 0) break;
            delta[static_cast<size_t>(best_b)] += 1;
            const double atom = alg.weights()[static_cast<size_t>(best_b)] / full[static_cast<size_t>(best_b)];
            cur = grow ? cur + atom : cur - atom;
        }

        Mat lifted = Mat::zeros(alg.total_dim());
        for (size_t b = 0; b < nb; ++b) {
            const int d = full[b];
            const int keep = rank[b] + (grow ? delta[b] : -delta[b]);
            // Eigenvalues ascend: kernel first, range last. Keep the top
            // `rank` range vectors minus removals, then pad from the kernel.
            const int from_range = std::min(keep, rank[b]);
            for (int k = 0; k < from_range; ++k)
                add_eigvec_projector(lifted, alg, b, be.eigs[b], d - 1 - k);
            for (int k = 0; k < keep - from_range; ++k)
                add_eigvec_projector(lifted, alg, b, be.eigs[b], k);
        }
        out.reps[i] = std::move(lifted);
    });
    return out;
}

std::vector<SpectralChain> lift_chain(const RepSequence& t_seq, const std::vector<double>& grid) {
    t_seq.validate("lift_chain");
    if (grid.empty()) fail(ErrorCode::InvalidParameter, "lift_chain: empty grid");
    for (size_t g = 0; g < grid.size(); ++g) {
        if (grid[g] < 0.0 || grid[g] > 1.0)
            fail(ErrorCode::InvalidParameter, "lift_chain: grid point outside [0, 1]");
        if (g > 0 && grid[g] <= grid[g - 1])
            fail(ErrorCode::InvalidParameter, "lift_chain: grid must be strictly increasing");
    }

    std::vector<SpectralChain> out(t_seq.size());
    for_each_index(t_seq.size(), [&](size_t i) {
        const BlockAlgebra& alg = t_seq.algebras[i];
        const BlockEig be = per_block_eig(alg, t_seq.reps[i]);
        for (size_t b = 0; b < alg.block_count(); ++b)
            for (double lam : be.eigs[b].values)
                if (lam < -1e-8 || lam > 1.0 + 1e-8)
                    fail(ErrorCode::DomainError, "lift_chain: index " + std::to_string(i) +
                                                     " has spectrum outside [0, 1] (eigenvalue " +
                                                     std::to_string(lam) + ")");
        // Global ascending eigenvalue order across blocks; the chain grows
        // along this order one eigenvector at a time.
        struct Slot {
            double lam;
            size_t b;
            int col;
        };
        std::vector<Slot> slots;
        for (size_t b = 0; b < alg.block_count(); ++b)
            for (int c = 0; c < alg.block_dims()[b]; ++c)
                slots.push_back({be.eigs[b].values[static_cast<size_t>(c)], b, c});
        std::stable_sort(slots.begin(), slots.end(),
                         [](const Slot& x, const Slot& y) { return x.lam < y.lam; });

        std::vector<double> prefix_tau(slots.size() + 1, 0.0);
        for (size_t k = 0; k < slots.size(); ++k)
            prefix_tau[k + 1] = prefix_tau[k] + alg.weights()[slots[k].b] / alg.block_dims()[slots[k].b];

        SpectralChain chain;
        Mat acc = Mat::zeros(alg.total_dim());
        size_t used = 0;
        for (double tg : grid) {
            size_t best = used;
            for (size_t k = used; k <= slots.size(); ++k)
                if (std::abs(prefix_tau[k] - tg) < std::abs(prefix_tau[best] - tg) - 1e-15) best = k;
            while (used < best) {
                add_eigvec_projector(acc, alg, slots[used].b, be.eigs[slots[used].b], slots[used].col);
                ++used;
            }
            chain.params.push_back(tg);
            chain.projections.push_back(acc);
            chain.traces.push_back(prefix_tau[used]);
        }
        out[i] = std::move(chain);
    });
    return out;
}

PartialIsometryLift lift_partial_isometry(const RepSequence& e, const RepSequence& f,
                                          const RepSequence& w) {
    e.validate("lift_partial_isometry (sources)");
    f.validate("lift_partial_isometry (ranges)");
    w.validate("lift_partial_isometry (candidates)");
    if (e.size() != f.size() || e.size() != w.size())
        fail(ErrorCode::ShapeMismatch, "lift_partial_isometry: sequence lengths differ");

    PartialIsometryLift out;
    out.lifted.algebras = w.algebras;
    out.lifted.reps.assign(w.size(), Mat());
    out.lifted.bound = 1.0;
    out.distance_profile.assign(w.size(), 0.0);

    constexpr double kSigmaCutoff = 1e-8;
    for_each_index(w.size(), [&](size_t i) {
        const Mat& src = e.reps[i];
        const Mat& rng = f.reps[i];
        const Mat& cand = w.reps[i];
        require_same_dim(src, cand, "lift_partial_isometry");
        require_same_dim(rng, cand, "lift_partial_isometry");
        if (!is_contract_projection(src) || !is_contract_projection(rng))
            fail(ErrorCode::ProjectionError,
                 "lift_partial_isometry: index " + std::to_string(i) + " has a non-projection end");
        const int re = projection_rank(src);
        const int rf = projection_rank(rng);
        if (re != rf)
            fail(ErrorCode::RankMismatch, "lift_partial_isometry: index " + std::to_string(i) +
                                              " has ranks " + std::to_string(re) + " vs " +
                                              std::to_string(rf));
        const int n = cand.dim();
        const Mat b = mul(mul(rng, cand), src);
        Svd s = svd(b);
        int surviving = 0;
        for (double sig : s.sigma)
            if (sig > kSigmaCutoff) ++surviving;
        if (surviving != re)
            fail(ErrorCode::DegenerateCompression,
                 "lift_partial_isometry: index " + std::to_string(i) + " compression has rank " +
                     std::to_string(surviving) + ", expected " + std::to_string(re));
        Mat v(n);
        for (int r = 0; r < n; ++r)
            for (int c = 0; c < n; ++c) {
                cplx acc = 0.0;
                for (int k = 0; k < re; ++k) acc += s.u.at(r, k) * s.vh.at(k, c);
                v.at(r, c) = acc;
            }
        const double d_src = op_norm(mul(adjoint(v), v) - src);
        const double d_rng = op_norm(mul(v, adjoint(v)) - rng);
        if (d_src > contract_tol(n) || d_rng > contract_tol(n))
            fail(ErrorCode::DeltaTooLarge,
                 "lift_partial_isometry: index " + std::to_string(i) +
                     " output misses its projections");
        out.distance_profile[i] = w.algebras[i].norm2(v - cand);
        out.lifted.reps[i] = std::move(v);
    });
    return out;
}

// --- matrix-unit extension -------------------------------------------------

void InclusionData::validate(const char* who) const {
    if (a_blocks.empty() || b_blocks.empty())
        fail(ErrorCode::BratteliError, std::string(who) + ": empty block lists");
    if (mult.size() != b_blocks.size())
        fail(ErrorCode::BratteliError, std::string(who) + ": multiplicity row count mismatch");
    for (size_t l = 0; l < mult.size(); ++l) {
        if (mult[l].size() != a_blocks.size())
            fail(ErrorCode::BratteliError, std::string(who) + ": multiplicity column count mismatch");
        int total = 0;
        for (size_t j = 0; j < a_blocks.size(); ++j) {
            if (mult[l][j] < 0)
                fail(ErrorCode::BratteliError, std::string(who) + ": negative multiplicity");
            total += mult[l][j] * a_blocks[j];
        }
        if (total != b_blocks[l])
            fail(ErrorCode::BratteliError,
                 std::string(who) + ": block " + std::to_string(l) + " needs " +
                     std::to_string(b_blocks[l]) + " dimensions, multiplicities give " +
                     std::to_string(total));
    }
}

namespace {

// Least-squares solve of mult^T * rho = ranks plus the unitality row, then
// integer verification. Returns the per-block minimal-unit ranks of B.
std::vector<int> solve_block_ranks(const InclusionData& inc, const std::vector<int>& a_ranks,
                                   int ambient) {
    const size_t ka = inc.a_blocks.size();
    const size_t kb = inc.b_blocks.size();
    const size_t rows = ka + 1;
    std::vector<std::vector<double>> m(rows, std::vector<double>(kb, 0.0));
    std::vector<double> rhs(rows, 0.0);
    for (size_t j = 0; j < ka; ++j) {
        for (size_t l = 0; l < kb; ++l) m[j][l] = inc.mult[l][j];
        rhs[j] = a_ranks[j];
    }
    for (size_t l = 0; l < kb; ++l) m[ka][l] = inc.b_blocks[l];
    rhs[ka] = ambient;

    // Normal equations, Gaussian elimination with partial pivoting.
    std::vector<std::vector<double>> g(kb, std::vector<double>(kb + 1, 0.0));
    for (size_t r = 0; r < kb; ++r) {
        for (size_t c = 0; c < kb; ++c)
            for (size_t q = 0; q < rows; ++q) g[r][c] += m[q][r] * m[q][c];
        for (size_t q = 0; q < rows; ++q) g[r][kb] += m[q][r] * rhs[q];
    }
    for (size_t col = 0; col < kb; ++col) {
        size_t piv = col;
        for (size_t r = col + 1; r < kb; ++r)
            if (std::abs(g[r][col]) > std::abs(g[piv][col])) piv = r;
        if (std::abs(g[piv][col]) < 1e-9)
            fail(ErrorCode::BratteliError,
                 "extend_matrix_units: trace data does not determine the block ranks");
        std::swap(g[piv], g[col]);
        for (size_t r = 0; r < kb; ++r) {
            if (r == col) continue;
            const double fct = g[r][col] / g[col][col];
            for (size_t c = col; c <= kb; ++c) g[r][c] -= fct * g[col][c];
        }
    }
    std::vector<int> rho(kb);
    for (size_t l = 0; l < kb; ++l) {
        const double v = g[l][kb] / g[l][l];
        const long long r = std::llround(v);
        if (std::abs(v - static_cast<double>(r)) > 1e-6 || r < 1)
            fail(ErrorCode::ResolutionError,
                 "extend_matrix_units: block " + std::to_string(l) +
                     " needs trace atom rank " + std::to_string(v) +
                     "; use a larger ambient dimension");
        rho[l] = static_cast<int>(r);
    }
    // Exact integer verification of every equation.
    for (size_t j = 0; j < ka; ++j) {
        long long acc = 0;
        for (size_t l = 0; l < kb; ++l) acc += static_cast<long long>(inc.mult[l][j]) * rho[l];
        if (acc != a_ranks[j])
            fail(ErrorCode::ResolutionError,
                 "extend_matrix_units: rank equation for small block " + std::to_string(j) +
                     " has no integer solution at this ambient dimension");
    }
    long long total = 0;
    for (size_t l = 0; l < kb; ++l) total += static_cast<long long>(inc.b_blocks[l]) * rho[l];
    if (total != ambient)
        fail(ErrorCode::ResolutionError,
             "extend_matrix_units: block ranks do not fill the ambient dimension");
    return rho;
}

struct CopyRef {
    size_t a_block;
    int copy;     // which copy of that block inside the large block
    int first_slot;
};

// Slot layout of a large block: copies ordered by (a_block, copy), each
// spanning that small block's size.
std::vector<CopyRef> block_layout(const InclusionData& inc, size_t l) {
    std::vector<CopyRef> copies;
    int slot = 0;
    for (size_t j = 0; j < inc.a_blocks.size(); ++j)
        for (int c = 0; c < inc.mult[l][j]; ++c) {
            copies.push_back({j, c, slot});
            slot += inc.a_blocks[j];
        }
    return copies;
}

} // namespace

std::vector<MatrixUnitSystem> extend_matrix_units(const InclusionData& inc,
                                                  const std::vector<MatrixUnitSystem>& pi,
                                                  const std::vector<std::vector<Mat>>* targets) {
    inc.validate("extend_matrix_units");
    if (pi.empty()) fail(ErrorCode::InvalidInput, "extend_matrix_units: no indices");
    if (targets && targets->size() != pi.size())
        fail(ErrorCode::ShapeMismatch, "extend_matrix_units: targets per index mismatch");

    std::vector<MatrixUnitSystem> out(pi.size());
    for_each_index(pi.size(), [&](size_t idx) {
        const MatrixUnitSystem& rep = pi[idx];
        if (rep.structure != inc.a_blocks)
            fail(ErrorCode::ShapeMismatch, "extend_matrix_units: index " + std::to_string(idx) +
                                               " does not represent the small algebra");
        rep.require_contract_exact("extend_matrix_units (input representation)");
        const int d = rep.ambient_dim;

        std::vector<int> a_ranks(inc.a_blocks.size());
        for (size_t j = 0; j < inc.a_blocks.size(); ++j)
            a_ranks[j] = projection_rank(rep.unit(j, 0, 0));
        const std::vector<int> rho = solve_block_ranks(inc, a_ranks, d);

        // Refinement of each small-diagonal image into chunks of rank
        // rho_l, one chunk per (large block, copy), in layout order.
        // chunk_vecs[j][l][c] = orthonormal columns spanning the piece.
        std::vector<std::vector<std::vector<std::vector<std::vector<cplx>>>>> chunk_vecs(
            inc.a_blocks.size());
        for (size_t j = 0; j < inc.a_blocks.size(); ++j) {
            EigH e = herm_eig(rep.unit(j, 0, 0));
            std::vector<std::vector<cplx>> range_cols;
            for (int k = 0; k < d; ++k) {
                if (e.values[static_cast<size_t>(k)] <= 0.5) continue;
                std::vector<cplx> col(static_cast<size_t>(d));
                for (int r = 0; r < d; ++r) col[static_cast<size_t>(r)] = e.vectors.at(r, k);
                range_cols.push_back(std::move(col));
            }
            size_t cursor = 0;
            chunk_vecs[j].resize(inc.b_blocks.size());
            for (size_t l = 0; l < inc.b_blocks.size(); ++l) {
                chunk_vecs[j][l].resize(static_cast<size_t>(inc.mult[l][j]));
                for (int c = 0; c < inc.mult[l][j]; ++c) {
                    for (int k = 0; k < rho[l]; ++k) {
                        if (cursor >= range_cols.size())
                            fail(ErrorCode::ResolutionError,
                                 "extend_matrix_units: refinement ran out of range vectors");
                        chunk_vecs[j][l][static_cast<size_t>(c)].push_back(range_cols[cursor++]);
                    }
                }
            }
            if (cursor != range_cols.size())
                fail(ErrorCode::ResolutionError,
                     "extend_matrix_units: refinement left unused range vectors");
        }

        auto chunk_projection = [&](size_t j, size_t l, int c) {
            Mat p(d);
            for (const auto& v : chunk_vecs[j][l][static_cast<size_t>(c)])
                for (int r = 0; r < d; ++r)
                    for (int cc = 0; cc < d; ++cc)
                        p.at(r, cc) += v[static_cast<size_t>(r)] * std::conj(v[static_cast<size_t>(cc)]);
            return p;
        };

        MatrixUnitSystem big = MatrixUnitSystem::empty(inc.b_blocks, d);
        size_t connector_cursor = 0;
        for (size_t l = 0; l < inc.b_blocks.size(); ++l) {
            const std::vector<CopyRef> copies = block_layout(inc, l);
            if (copies.empty())
                fail(ErrorCode::BratteliError,
                     "extend_matrix_units: large block " + std::to_string(l) + " receives nothing");
            const CopyRef& anchor = copies[0];
            const Mat q_anchor = chunk_projection(anchor.a_block, l, anchor.copy);

            // First-row units of the large block: connector from the copy's
            // chunk to the anchor chunk, then the within-copy transport.
            std::vector<Mat> first_row;
            for (const CopyRef& cp : copies) {
                const Mat q_cp = chunk_projection(cp.a_block, l, cp.copy);
                Mat connector(d);
                const bool is_anchor = (cp.a_block == anchor.a_block && cp.copy == anchor.copy);
                if (is_anchor) {
                    connector = q_anchor;
                } else if (targets) {
                    const auto& cand_list = (*targets)[idx];
                    if (connector_cursor >= cand_list.size())
                        fail(ErrorCode::ShapeMismatch,
                             "extend_matrix_units: not enough connector targets");
                    const Mat& cand = cand_list[connector_cursor++];
                    const Mat b = mul(mul(q_anchor, cand), q_cp);
                    Svd s = svd(b);
                    int surviving = 0;
                    for (double sig : s.sigma)
                        if (sig > 1e-8) ++surviving;
                    if (surviving != rho[l])
                        fail(ErrorCode::DegenerateCompression,
                             "extend_matrix_units: connector target at index " +
                                 std::to_string(idx) + " lost rank");
                    for (int r = 0; r < d; ++r)
                        for (int c = 0; c < d; ++c) {
                            cplx acc = 0.0;
                            for (int k = 0; k < rho[l]; ++k) acc += s.u.at(r, k) * s.vh.at(k, c);
                            connector.at(r, c) = acc;
                        }
                } else {
                    // Canonical connector: match the refinement bases.
                    const auto& from = chunk_vecs[cp.a_block][l][static_cast<size_t>(cp.copy)];
                    const auto& to = chunk_vecs[anchor.a_block][l][static_cast<size_t>(anchor.copy)];
                    for (int k = 0; k < rho[l]; ++k)
                        for (int r = 0; r < d; ++r)
                            for (int c = 0; c < d; ++c)
                                connector.at(r, c) += to[static_cast<size_t>(k)][static_cast<size_t>(r)] *
                                                      std::conj(from[static_cast<size_t>(k)][static_cast<size_t>(c)]);
                }
                for (int s = 0; s < inc.a_blocks[cp.a_block]; ++s) {
                    // q_cp * g_{0s} transports slot s onto the chunk; the
                    // connector carries it to the anchor.
                    const Mat u = mul(q_cp, rep.unit(cp.a_block, 0, s));
                    first_row.push_back(mul(connector, u));
                }
            }

            const int nb = inc.b_blocks[l];
            if (static_cast<int>(first_row.size()) != nb)
                fail(ErrorCode::BratteliError, "extend_matrix_units: slot layout mismatch");
            for (int s = 0; s < nb; ++s)
                for (int t = 0; t < nb; ++t)
                    big.unit(l, s, t) = (s == 0 && t == 0) ? q_anchor
                                        : (s == 0)         ? first_row[static_cast<size_t>(t)]
                                        : (t == 0)
                                            ? adjoint(first_row[static_cast<size_t>(s)])
                                            : mul(adjoint(first_row[static_cast<size_t>(s)]),
                                                  first_row[static_cast<size_t>(t)]);
        }
        big.require_contract_exact("extend_matrix_units (output)");

        // Restriction: reassembling the small units from the large system
        // must reproduce the input representation.
        for (size_t j = 0; j < inc.a_blocks.size(); ++j)
            for (int s = 0; s < inc.a_blocks[j]; ++s)
                for (int t = 0; t < inc.a_blocks[j]; ++t) {
                    Mat acc(d);
                    for (size_t l = 0; l < inc.b_blocks.size(); ++l)
                        for (const CopyRef& cp : block_layout(inc, l))
                            if (cp.a_block == j)
                                acc = acc + big.unit(l, cp.first_slot + s, cp.first_slot + t);
                    if (fro_norm(acc - rep.unit(j, s, t)) > 1e-10 * d)
                        fail(ErrorCode::DeltaTooLarge,
                             "extend_matrix_units: restriction check failed at unit (" +
                                 std::to_string(j) + ", " + std::to_string(s) + ", " +
                                 std::to_string(t) + ")");
                }
        out[idx] = std::move(big);
    });
    return out;
}

std::vector<std::vector<MatrixUnitSystem>> bratteli_lift(const std::vector<InclusionData>& chain,
                                                         int depth,
                                                         const std::vector<int>& ambient_dims) {
    if (depth < 1 || depth > static_cast<int>(chain.size()))
        fail(ErrorCode::InvalidParameter, "bratteli_lift: depth out of range");
    if (ambient_dims.empty()) fail(ErrorCode::InvalidInput, "bratteli_lift: no indices");
    if (chain[0].a_blocks != std::vector<int>{1})
        fail(ErrorCode::BratteliError, "bratteli_lift: chain must start at the scalars");
    for (size_t r = 1; r < chain.size(); ++r)
        if (chain[r].a_blocks != chain[r - 1].b_blocks)
            fail(ErrorCode::BratteliError,
                 "bratteli_lift: chain steps " + std::to_string(r - 1) + " -> " +
                     std::to_string(r) + " do not compose");

    std::vector<std::vector<MatrixUnitSystem>> tower;
    std::vector<MatrixUnitSystem> level;
    for (int dim : ambient_dims) {
        MatrixUnitSystem scalars = MatrixUnitSystem::empty({1}, dim);
        scalars.unit(0, 0, 0) = Mat::identity(dim);
        level.push_back(std::move(scalars));
    }
    tower.push_back(level);
    for (int r = 0; r < depth; ++r)
        tower.push_back(extend_matrix_units(chain[static_cast<size_t>(r)], tower.back()));
    return tower;
}

} // namespace liftkit
