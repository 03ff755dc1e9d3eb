#pragma once

#include <vector>

#include "liftkit/mat.hpp"

namespace liftkit {

// Finite direct sum of matrix blocks carrying a tracial state
//   tau(a) = sum_j alpha_j * (normalized trace of block j),
// with alpha_j > 0 summing to 1. Elements are block-diagonal matrices of
// the total dimension.
class BlockAlgebra {
public:
    BlockAlgebra(std::vector<int> block_dims, std::vector<double> weights);

    // Dimension-proportional weights alpha_j = n_j / sum(n); the default
    // normalization used everywhere a weighting is not explicitly given.
    static BlockAlgebra proportional(std::vector<int> block_dims);
    static BlockAlgebra full(int dim) { return proportional({dim}); }

    int total_dim() const { return total_; }
    const std::vector<int>& block_dims() const { return dims_; }
    const std::vector<double>& weights() const { return weights_; }
    int block_offset(size_t j) const { return offsets_[j]; }
    size_t block_count() const { return dims_.size(); }

    // Largest trace of a single minimal projection; the quantization atom.
    double max_atom() const;

    void require_compatible(const Mat& a, const char* who) const;

    cplx trace(const Mat& a) const;
    // (tau((a*a)^{p/2}))^{1/p} via per-block eigenvalues of a*a; p >= 1.
    double p_norm(const Mat& a, double p) const;
    // GNS 2-norm tau(a*a)^{1/2}, computed directly from entry sums.
    double norm2(const Mat& a) const;

private:
    std::vector<int> dims_;
    std::vector<double> weights_;
    std::vector<int> offsets_;
    int total_ = 0;
};

} // namespace liftkit
