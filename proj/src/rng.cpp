#include "tggm/rng.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace tggm {

namespace {

std::uint64_t splitmix64(std::uint64_t& x) {
    x += 0x9e3779b97f4a7c15ULL;
    std::uint64_t z = x;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

std::uint64_t rotl(std::uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }

}  // namespace

RngStream::RngStream(std::uint64_t seed) : base_seed_(seed) { seed_from(seed); }

RngStream::RngStream(std::uint64_t seed, std::uint64_t chain_id, std::uint64_t obs_id)
    : base_seed_(seed) {
    // Mix the triple through splitmix64 so nearby ids give unrelated streams.
    std::uint64_t x = seed;
    std::uint64_t h = splitmix64(x);
    x ^= 0x517cc1b727220a95ULL * (chain_id + 1);
    h ^= splitmix64(x);
    x ^= 0x2545f4914f6cdd1dULL * (obs_id + 1);
    h ^= splitmix64(x);
    seed_from(h);
}

RngStream RngStream::derive(std::uint64_t chain_id, std::uint64_t obs_id) const {
    return RngStream(base_seed_, chain_id, obs_id);
}

void RngStream::seed_from(std::uint64_t s) {
    std::uint64_t x = s;
    a_ = splitmix64(x);
    b_ = splitmix64(x);
    c_ = splitmix64(x);
    counter_ = 1;
    for (int i = 0; i < 12; ++i) next_u64();
}

std::uint64_t RngStream::next_u64() {
    // sfc64: chaotic core plus a counter, 256-bit state, passes PractRand.
    std::uint64_t tmp = a_ + b_ + counter_++;
    a_ = b_ ^ (b_ >> 11);
    b_ = c_ + (c_ << 3);
    c_ = rotl(c_, 24) + tmp;
    return tmp;
}

double RngStream::uniform01() {
    // 53 random bits into (0,1); offset keeps 0 out of the support.
    return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
}

double RngStream::normal() {
    double u1 = uniform01();
    double u2 = uniform01();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

double RngStream::gamma(double shape, double rate) {
    if (!(shape > 0.0) || !(rate > 0.0))
        throw std::invalid_argument("gamma: shape and rate must be positive");
    // Marsaglia-Tsang squeeze; shape < 1 boosted through Gamma(shape+1).
    double boost = 1.0;
    double a = shape;
    if (a < 1.0) {
        boost = std::pow(uniform01(), 1.0 / a);
        a += 1.0;
    }
    const double d = a - 1.0 / 3.0;
    const double c = 1.0 / std::sqrt(9.0 * d);
    for (;;) {
        double x, v;
        do {
            x = normal();
            v = 1.0 + c * x;
        } while (v <= 0.0);
        v = v * v * v;
        const double u = uniform01();
        if (u < 1.0 - 0.0331 * x * x * x * x) return boost * d * v / rate;
        if (std::log(u) < 0.5 * x * x + d * (1.0 - v + std::log(v))) return boost * d * v / rate;
    }
}

double RngStream::beta(double a, double b) {
    const double x = gamma(a, 1.0);
    const double y = gamma(b, 1.0);
    return x / (x + y);
}

std::uint64_t RngStream::uniform_below(std::uint64_t n) {
    if (n == 0) throw std::invalid_argument("uniform_below: n must be positive");
    // Rejection to kill modulo bias; at most one retry in expectation.
    const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
    std::uint64_t v;
    do {
        v = next_u64();
    } while (v >= limit);
    return v % n;
}

std::uint64_t RngStream::poisson(double mean) {
    if (!(mean >= 0.0)) throw std::invalid_argument("poisson: mean must be nonnegative");
    const double limit = std::exp(-mean);
    std::uint64_t k = 0;
    double prod = uniform01();
    while (prod > limit) {
        ++k;
        prod *= uniform01();
    }
    return k;
}

std::array<std::uint64_t, 5> RngStream::serialize() const {
    return {base_seed_, a_, b_, c_, counter_};
}

RngStream RngStream::deserialize(const std::array<std::uint64_t, 5>& state) {
    RngStream r;
    r.base_seed_ = state[0];
    r.a_ = state[1];
    r.b_ = state[2];
    r.c_ = state[3];
    r.counter_ = state[4];
    return r;
}

}  // namespace tggm
