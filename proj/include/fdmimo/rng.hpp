#ifndef FDMIMO_RNG_HPP
#define FDMIMO_RNG_HPP

#include <cstdint>
#include <random>

#include "fdmimo/types.hpp"

namespace fdmimo {

// SplitMix64 step; used to derive independent per-trial stream seeds from a
// master seed without coordination between workers.
inline std::uint64_t splitmix64(std::uint64_t& state) {
    std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

/// Mix a master seed with up to two stream indices (trial, substream).
inline std::uint64_t mix_seed(std::uint64_t master, std::uint64_t a, std::uint64_t b = 0) {
    std::uint64_t s = master;
    std::uint64_t z = splitmix64(s);
    s = z ^ (a * 0xd1342543de82ef95ULL + 0x2545f4914f6cdd1dULL);
    z = splitmix64(s);
    s = z ^ (b * 0x9e3779b97f4a7c15ULL + 1);
    return splitmix64(s);
}

/// One deterministic random stream. Trials must each own their stream; the
/// draw order inside a trial is part of the reproducibility contract.
class RngStream {
public:
    explicit RngStream(std::uint64_t seed) : gen_(seed) {}

    double gauss() { return normal_(gen_); }

    /// CN(0,1): independent real/imag parts with variance 1/2 each.
    cx_double cgauss() {
        const double re = normal_(gen_);
        const double im = normal_(gen_);
        return {re * kInvSqrt2, im * kInvSqrt2};
    }

    double uniform() { return unif_(gen_); }

    /// Matrix of i.i.d. CN(0,1) entries, filled column-major.
    cx_mat cgauss_mat(arma::uword rows, arma::uword cols) {
        cx_mat m(rows, cols);
        for (arma::uword j = 0; j < cols; ++j)
            for (arma::uword i = 0; i < rows; ++i) m(i, j) = cgauss();
        return m;
    }

    std::uint64_t raw() { return gen_(); }

private:
    static constexpr double kInvSqrt2 = 0.70710678118654752440;
    std::mt19937_64 gen_;
    std::normal_distribution<double> normal_{0.0, 1.0};
    std::uniform_real_distribution<double> unif_{0.0, 1.0};
};

}  // namespace fdmimo

#endif
