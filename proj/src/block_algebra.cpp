#include "liftkit/block_algebra.hpp"

#include <cmath>

#include "liftkit/spectral.hpp"

namespace liftkit {

BlockAlgebra::BlockAlgebra(std::vector<int> block_dims, std::vector<double> weights)
    : dims_(std::move(block_dims)), weights_(std::move(weights)) {
    if (dims_.empty() || dims_.size() != weights_.size())
        fail(ErrorCode::InvalidInput, "BlockAlgebra: empty or mismatched block/weight lists");
    double sum = 0.0;
    for (size_t j = 0; j < dims_.size(); ++j) {
        if (dims_[j] <= 0) fail(ErrorCode::InvalidInput, "BlockAlgebra: nonpositive block dim");
        if (!(weights_[j] > 0.0)) fail(ErrorCode::InvalidInput, "BlockAlgebra: weight must be positive");
        offsets_.push_back(total_);
        total_ += dims_[j];
        sum += weights_[j];
    }
    if (std::abs(sum - 1.0) > 1e-12)
        fail(ErrorCode::InvalidInput, "BlockAlgebra: weights sum to " + std::to_string(sum));
}

BlockAlgebra BlockAlgebra::proportional(std::vector<int> block_dims) {
    int total = 0;
    for (int d : block_dims) total += d;
    std::vector<double> w;
    w.reserve(block_dims.size());
    for (int d : block_dims) w.push_back(static_cast<double>(d) / total);
    return BlockAlgebra(std::move(block_dims), std::move(w));
}

double BlockAlgebra::max_atom() const {
    double m = 0.0;
    for (size_t j = 0; j < dims_.size(); ++j) m = std::max(m, weights_[j] / dims_[j]);
    return m;
}

void BlockAlgebra::require_compatible(const Mat& a, const char* who) const {
    if (a.dim() != total_)
        fail(ErrorCode::ShapeMismatch, std::string(who) + ": matrix dim " +
                                           std::to_string(a.dim()) + " vs algebra dim " +
                                           std::to_string(total_));
    if (dims_.size() == 1) return;
    // Multi-block algebras only contain block-diagonal elements.
    double off = 0.0;
    for (size_t j = 0; j < dims_.size(); ++j) {
        const int o = offsets_[j];
        const int d = dims_[j];
        for (int r = o; r < o + d; ++r)
            for (int c = 0; c < total_; ++c)
                if (c < o || c >= o + d) off = std::max(off, std::abs(a.at(r, c)));
    }
    if (off > 1e-10)
        fail(ErrorCode::ShapeMismatch,
             std::string(who) + ": element is not block-diagonal (off-block entry " +
                 std::to_string(off) + ")");
}

cplx BlockAlgebra::trace(const Mat& a) const {
    require_compatible(a, "trace");
    cplx t = 0.0;
    for (size_t j = 0; j < dims_.size(); ++j) {
        cplx blk = 0.0;
        for (int i = 0; i < dims_[j]; ++i) blk += a.at(offsets_[j] + i, offsets_[j] + i);
        t += weights_[j] / static_cast<double>(dims_[j]) * blk;
    }
    return t;
}

double BlockAlgebra::p_norm(const Mat& a, double p) const {
    if (!(p >= 1.0) || !std::isfinite(p))
        fail(ErrorCode::InvalidParameter, "p_norm: p must lie in [1, inf), got " + std::to_string(p));
    require_compatible(a, "p_norm");
    a.require_finite("p_norm");
    double acc = 0.0;
    for (size_t j = 0; j < dims_.size(); ++j) {
        const Mat blk = extract_block(a, offsets_[j], offsets_[j], dims_[j]);
        const Mat gram = mul(adjoint(blk), blk);
        EigH e = herm_eig(gram);
        double s = 0.0;
        for (double lam : e.values) s += std::pow(std::max(lam, 0.0), p / 2.0);
        acc += weights_[j] / static_cast<double>(dims_[j]) * s;
    }
    return std::pow(acc, 1.0 / p);
}

double BlockAlgebra::norm2(const Mat& a) const {
    require_compatible(a, "norm2");
    double acc = 0.0;
    for (size_t j = 0; j < dims_.size(); ++j) {
        double s = 0.0;
        const int o = offsets_[j];
        for (int r = 0; r < dims_[j]; ++r)
            for (int c = 0; c < dims_[j]; ++c) s += std::norm(a.at(o + r, o + c));
        acc += weights_[j] / static_cast<double>(dims_[j]) * s;
    }
    return std::sqrt(acc);
}

} // namespace liftkit
