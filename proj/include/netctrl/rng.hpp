#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace netctrl {

// Deterministic random source. The uniform/gaussian mappings are implemented
// here rather than with std distributions so that a (seed, stream) pair yields
// the same values on every standard library.
class Rng {
  public:
    explicit Rng(std::uint64_t seed, std::uint64_t stream = 0)
        : engine_(seed ^ (0x9e3779b97f4a7c15ULL * (stream + 1))) {}

    std::uint64_t next_u64() { return engine_(); }

    // uniform in [0, 1)
    double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    bool bernoulli(double p) { return uniform() < p; }

    // standard normal via Box-Muller; one value per call, cached partner
    double gaussian() {
        if (has_spare_) {
            has_spare_ = false;
            return spare_;
        }
        double u1 = uniform();
        double u2 = uniform();
        while (u1 <= 1e-300) u1 = uniform();
        double radius = std::sqrt(-2.0 * std::log(u1));
        double angle = 6.283185307179586476925286766559 * u2;
        spare_ = radius * std::sin(angle);
        has_spare_ = true;
        return radius * std::cos(angle);
    }

  private:
    std::mt19937_64 engine_;
    double spare_ = 0.0;
    bool has_spare_ = false;
};

// Hands out independent, reproducible sub-streams of a root seed so that
// adding a consumer never perturbs the draws of another.
class SeedSplitter {
  public:
    explicit SeedSplitter(std::uint64_t seed) : seed_(seed) {}
    Rng stream(std::uint64_t id) const { return Rng(seed_, id); }
    std::uint64_t seed() const { return seed_; }

  private:
    std::uint64_t seed_;
};

}  // namespace netctrl
