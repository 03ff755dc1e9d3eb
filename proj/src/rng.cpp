#include "liftkit/rng.hpp"

#include <cmath>

namespace liftkit {

namespace {

constexpr uint32_t kPhiloxM0 = 0xD2511F53u;
constexpr uint32_t kPhiloxM1 = 0xCD9E8D57u;
constexpr uint32_t kPhiloxW0 = 0x9E3779B9u;
constexpr uint32_t kPhiloxW1 = 0xBB67AE85u;

inline void mulhilo(uint32_t a, uint32_t b, uint32_t& hi, uint32_t& lo) {
    const uint64_t p = static_cast<uint64_t>(a) * b;
    hi = static_cast<uint32_t>(p >> 32);
    lo = static_cast<uint32_t>(p);
}

inline std::array<uint32_t, 4> philox_round(const std::array<uint32_t, 4>& c,
                                            const std::array<uint32_t, 2>& k) {
    uint32_t hi0, lo0, hi1, lo1;
    mulhilo(kPhiloxM0, c[0], hi0, lo0);
    mulhilo(kPhiloxM1, c[2], hi1, lo1);
    return {hi1 ^ c[1] ^ k[0], lo1, hi0 ^ c[3] ^ k[1], lo0};
}

} // namespace

std::array<uint32_t, 4> Rng::block(const std::array<uint32_t, 2>& key,
                                   const std::array<uint32_t, 4>& counter) {
    std::array<uint32_t, 4> c = counter;
    std::array<uint32_t, 2> k = key;
    for (int round = 0; round < 10; ++round) {
        if (round > 0) {
            k[0] += kPhiloxW0;
            k[1] += kPhiloxW1;
        }
        c = philox_round(c, k);
    }
    return c;
}

void Rng::refill() {
    const std::array<uint32_t, 4> counter = {
        static_cast<uint32_t>(block_index_), static_cast<uint32_t>(block_index_ >> 32),
        static_cast<uint32_t>(stream_), static_cast<uint32_t>(stream_ >> 32)};
    buf_ = block(key_, counter);
    ++block_index_;
    pos_ = 0;
}

uint32_t Rng::next_u32() {
    if (pos_ >= 4) refill();
    return buf_[static_cast<size_t>(pos_++)];
}

uint64_t Rng::next_u64() {
    const uint64_t lo = next_u32();
    const uint64_t hi = next_u32();
    return (hi << 32) | lo;
}

double Rng::next_double() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

uint64_t Rng::next_below(uint64_t n) {
    return static_cast<uint64_t>((static_cast<unsigned __int128>(next_u64()) * n) >> 64);
}

double Rng::next_gauss() {
    if (has_spare_) {
        has_spare_ = false;
        return gauss_spare_;
    }
    const double u1 = next_double();
    const double u2 = next_double();
    const double r = std::sqrt(-2.0 * std::log1p(-u1)); // log(1-u1), never log(0)
    const double a = 2.0 * M_PI * u2;
    gauss_spare_ = r * std::sin(a);
    has_spare_ = true;
    return r * std::cos(a);
}

cplx Rng::next_cgauss() {
    const double re = next_gauss();
    const double im = next_gauss();
    return cplx(re, im) * M_SQRT1_2;
}

Mat random_ginibre(Rng& rng, int dim) {
    Mat g(dim);
    for (int r = 0; r < dim; ++r)
        for (int c = 0; c < dim; ++c)
            g.at(r, c) = rng.next_cgauss();
    return g;
}

Mat random_hermitian(Rng& rng, int dim) {
    Mat h(dim);
    for (int r = 0; r < dim; ++r) {
        h.at(r, r) = rng.next_gauss();
        for (int c = r + 1; c < dim; ++c) {
            const cplx z = rng.next_cgauss();
            h.at(r, c) = z;
            h.at(c, r) = std::conj(z);
        }
    }
    return h;
}

Mat random_haar_unitary(Rng& rng, int dim) {
    const Mat g = random_ginibre(rng, dim);
    // Modified Gram-Schmidt on columns, repeated once for orthogonality at
    // working precision; R's diagonal phases are folded back into Q so the
    // distribution is exactly Haar.
    std::vector<std::vector<cplx>> q(static_cast<size_t>(dim),
                                     std::vector<cplx>(static_cast<size_t>(dim)));
    for (int c = 0; c < dim; ++c)
        for (int r = 0; r < dim; ++r) q[static_cast<size_t>(c)][static_cast<size_t>(r)] = g.at(r, c);

    std::vector<cplx> rdiag(static_cast<size_t>(dim));
    for (int c = 0; c < dim; ++c) {
        auto& col = q[static_cast<size_t>(c)];
        for (int pass = 0; pass < 2; ++pass) {
            for (int k = 0; k < c; ++k) {
                const auto& prev = q[static_cast<size_t>(k)];
                cplx proj = 0.0;
                for (int r = 0; r < dim; ++r) proj += std::conj(prev[static_cast<size_t>(r)]) * col[static_cast<size_t>(r)];
                for (int r = 0; r < dim; ++r) col[static_cast<size_t>(r)] -= proj * prev[static_cast<size_t>(r)];
            }
        }
        double nrm2 = 0.0;
        for (int r = 0; r < dim; ++r) nrm2 += std::norm(col[static_cast<size_t>(r)]);
        const double nrm = std::sqrt(nrm2);
        if (nrm == 0.0) fail(ErrorCode::RankDeficient, "haar sampler: degenerate column");
        for (int r = 0; r < dim; ++r) col[static_cast<size_t>(r)] /= nrm;
        // Phase of the R diagonal entry: <q_c, g_c>.
        cplx rc = 0.0;
        for (int r = 0; r < dim; ++r) rc += std::conj(col[static_cast<size_t>(r)]) * g.at(r, c);
        rdiag[static_cast<size_t>(c)] = rc / std::abs(rc);
    }

    Mat u(dim);
    for (int c = 0; c < dim; ++c)
        for (int r = 0; r < dim; ++r)
            u.at(r, c) = q[static_cast<size_t>(c)][static_cast<size_t>(r)] * rdiag[static_cast<size_t>(c)];
    return u;
}

Mat random_projection(Rng& rng, int dim, int rank) {
    if (rank < 0 || rank > dim)
        fail(ErrorCode::InvalidParameter, "random_projection: rank out of range");
    const Mat u = random_haar_unitary(rng, dim);
    Mat p(dim);
    for (int r = 0; r < dim; ++r)
        for (int c = 0; c < dim; ++c) {
            cplx acc = 0.0;
            for (int k = 0; k < rank; ++k) acc += u.at(r, k) * std::conj(u.at(c, k));
            p.at(r, c) = acc;
        }
    return p;
}

} // namespace liftkit
