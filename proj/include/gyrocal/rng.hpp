// Seedable random number utilities. All stochastic stages in gyrocal draw
// from these so that a fixed seed reproduces results bit-for-bit across runs
// and platforms (no reliance on implementation-defined distributions).
#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <vector>

namespace gyrocal {

// splitmix64; used both as a generator stage and to derive independent
// child seeds from a master seed.
inline std::uint64_t splitmix64(std::uint64_t& state) {
    std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream_id) {
    std::uint64_t s = master ^ (0xa0761d6478bd642fULL * (stream_id + 1));
    std::uint64_t a = splitmix64(s);
    std::uint64_t b = splitmix64(s);
    return a ^ (b << 1);
}

// xoshiro256++ with Box-Muller normals.
class Rng {
public:
    explicit Rng(std::uint64_t seed) {
        std::uint64_t sm = seed;
        for (auto& word : state_) word = splitmix64(sm);
    }

    std::uint64_t next_u64() {
        const std::uint64_t result = rotl(state_[0] + state_[3], 23) + state_[0];
        const std::uint64_t t = state_[1] << 17;
        state_[2] ^= state_[0];
        state_[3] ^= state_[1];
        state_[1] ^= state_[2];
        state_[0] ^= state_[3];
        state_[2] ^= t;
        state_[3] = rotl(state_[3], 45);
        return result;
    }

    // uniform in [0, 1)
    double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    // standard normal via Box-Muller (cached second value)
    double normal() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        double u1 = 0.0;
        do {
            u1 = uniform();
        } while (u1 <= 0.0);
        const double u2 = uniform();
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double theta = 2.0 * std::numbers::pi * u2;
        spare_ = r * std::sin(theta);
        have_spare_ = true;
        return r * std::cos(theta);
    }

    double normal(double mean, double stddev) { return mean + stddev * normal(); }

    // index in [0, n)
    std::size_t index(std::size_t n) { return static_cast<std::size_t>(uniform() * static_cast<double>(n)) % n; }

    template <typename T>
    void shuffle(std::vector<T>& v) {
        for (std::size_t i = v.size(); i > 1; --i) {
            std::size_t j = index(i);
            std::swap(v[i - 1], v[j]);
        }
    }

private:
    static std::uint64_t rotl(std::uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }

    std::uint64_t state_[4] = {};
    bool have_spare_ = false;
    double spare_ = 0.0;
};

// First-order Gauss-Markov process with exact discrete update
//   x[k+1] = phi * x[k] + sqrt(1 - phi^2) * sigma * eps,  phi = exp(-dt/tau).
// Started from the stationary distribution.
class GaussMarkov {
public:
    GaussMarkov(double sigma, double tau, double dt, Rng& rng)
        : sigma_(sigma), phi_(std::exp(-dt / tau)), drive_(sigma * std::sqrt(1.0 - phi_ * phi_)) {
        value_ = sigma_ * rng.normal();
    }

    double step(Rng& rng) {
        const double out = value_;
        value_ = phi_ * value_ + drive_ * rng.normal();
        return out;
    }

private:
    double sigma_;
    double phi_;
    double drive_;
    double value_ = 0.0;
};

}  // namespace gyrocal
