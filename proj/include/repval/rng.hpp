#pragma once

#include <complex>
#include <cstdint>
#include <random>
#include <vector>

#include <Eigen/Dense>

namespace repval {

// SplitMix64 step; used both as a tiny PRNG and to derive child seeds.
inline std::uint64_t splitmix64(std::uint64_t& state) {
    std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

// Hierarchical seed derivation: one command seed fans out to per-module and
// per-sample seeds so parallel workers reproduce bit-identically.
inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) {
    std::uint64_t s = seed ^ (0x9e3779b97f4a7c15ULL * (stream + 1));
    splitmix64(s);
    return splitmix64(s);
}

class Rng {
  public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    std::uint64_t integer(std::uint64_t bound) {  // uniform in [0, bound)
        std::uniform_int_distribution<std::uint64_t> d(0, bound - 1);
        return d(engine_);
    }
    double uniform() {
        std::uniform_real_distribution<double> d(0.0, 1.0);
        return d(engine_);
    }
    double normal() {
        std::normal_distribution<double> d(0.0, 1.0);
        return d(engine_);
    }
    std::complex<double> cnormal() { return {normal(), normal()}; }

    Rng child(std::uint64_t stream) {
        return Rng(derive_seed(base_, stream));
    }

    static Rng seeded(std::uint64_t seed) {
        Rng r(derive_seed(seed, 0));
        r.base_ = seed;
        return r;
    }

    std::mt19937_64& engine() { return engine_; }

  private:
    std::mt19937_64 engine_;
    std::uint64_t base_ = 0;
};

Eigen::VectorXcd random_pure_state(std::size_t dim, Rng& rng);
Eigen::MatrixXcd random_density(std::size_t dim, std::size_t rank, Rng& rng);
Eigen::MatrixXcd random_unitary(std::size_t dim, Rng& rng);
Eigen::MatrixXcd random_hermitian(std::size_t dim, Rng& rng);
// Haar-random isometry from dim(in) to dim(in)*env; columns orthonormal.
Eigen::MatrixXcd random_isometry(std::size_t in_dim, std::size_t env_dim, Rng& rng);
std::vector<double> random_distribution(std::size_t n, Rng& rng);

}  // namespace repval
