#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>

namespace tggm {

// Small self-contained generator (sfc64 core) so that streams are
// reproducible across platforms and compilers; the <random> engines are
// portable but the distributions are not. Streams for (chain, observation)
// pairs are derived by hashing, never by jumping, so any worker can
// reconstruct its stream from the base seed alone.
class RngStream {
  public:
    explicit RngStream(std::uint64_t seed);
    RngStream(std::uint64_t seed, std::uint64_t chain_id, std::uint64_t obs_id);

    // Child stream for (chain_id, obs_id); independent of draws made so far.
    RngStream derive(std::uint64_t chain_id, std::uint64_t obs_id) const;

    std::uint64_t next_u64();
    double uniform01();  // open interval (0,1)
    double normal();     // standard normal, two uniforms per call (no cached spare)
    double gamma(double shape, double rate);
    double chisq(double df) { return gamma(0.5 * df, 0.5); }
    double beta(double a, double b);
    double expo() { return gamma(1.0, 1.0); }

    // Uniform integer in [0, n).
    std::uint64_t uniform_below(std::uint64_t n);

    // Poisson count by the product method; meant for small means.
    std::uint64_t poisson(double mean);

    std::uint64_t base_seed() const { return base_seed_; }

    // Checkpoint support: raw engine state plus the identifying seed.
    std::array<std::uint64_t, 5> serialize() const;
    static RngStream deserialize(const std::array<std::uint64_t, 5>& state);

    bool operator==(const RngStream& other) const = default;

  private:
    RngStream() = default;
    void seed_from(std::uint64_t s);

    std::uint64_t base_seed_ = 0;
    std::uint64_t a_ = 0, b_ = 0, c_ = 0, counter_ = 0;
};

}  // namespace tggm
