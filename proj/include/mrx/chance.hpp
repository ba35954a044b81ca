#pragma once

#include <cstdint>
#include <functional>
#include <random>
#include <vector>

namespace mrx {

using Rng = std::mt19937_64;

/// SplitMix64 finalizer; used to derive independent stream seeds.
constexpr std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

/// Seed for substream `stream` of episode `episode` under `base`.
constexpr std::uint64_t derive_seed(std::uint64_t base, std::uint64_t episode, std::uint64_t stream) {
    return splitmix64(splitmix64(splitmix64(base) ^ episode) ^ (stream * 0xD1B54A32D192ED03ULL));
}

inline double uniform01(Rng& rng) {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

/// Source of every stochastic decision inside a transition. Each draw is a binary event,
/// which lets the same transition code be either sampled or exhaustively enumerated.
class Chance {
public:
    virtual ~Chance() = default;
    /// Returns true with probability p. Certain events (p <= 0 or p >= 1) never branch.
    virtual bool bernoulli(double p) = 0;
};

class RandomChance final : public Chance {
public:
    explicit RandomChance(Rng& rng) : rng_(rng) {}
    bool bernoulli(double p) override {
        if (p <= 0.0) return false;
        if (p >= 1.0) return true;
        return uniform01(rng_) < p;
    }

private:
    Rng& rng_;
};

/// Replays a fixed prefix of decisions, then takes `true` for every later uncertain draw,
/// recording the branch taken and its probability.
class ScriptedChance final : public Chance {
public:
    struct Draw {
        bool value;
        double p;  // probability of `true`
    };

    explicit ScriptedChance(std::vector<bool> prefix) : prefix_(std::move(prefix)) {}

    bool bernoulli(double p) override {
        if (p <= 0.0) return false;
        if (p >= 1.0) return true;
        bool v = draws_.size() < prefix_.size() ? prefix_[draws_.size()] : true;
        draws_.push_back({v, p});
        return v;
    }

    const std::vector<Draw>& draws() const { return draws_; }

    double probability() const {
        double q = 1.0;
        for (const auto& d : draws_) q *= d.value ? d.p : 1.0 - d.p;
        return q;
    }

private:
    std::vector<bool> prefix_;
    std::vector<Draw> draws_;
};

/// Runs `body` once per distinct path through its uncertain draws, passing the chance
/// source; `sink` receives the path probability after each run.
template <typename Body, typename Sink>
void enumerate_paths(Body&& body, Sink&& sink) {
    std::vector<bool> prefix;
    for (;;) {
        ScriptedChance chance(prefix);
        body(static_cast<Chance&>(chance));
        sink(chance.probability());

        const auto& draws = chance.draws();
        std::size_t n = draws.size();
        while (n > 0 && !draws[n - 1].value) --n;
        if (n == 0) return;
        prefix.assign(n, true);
        for (std::size_t i = 0; i + 1 < n; ++i) prefix[i] = draws[i].value;
        prefix[n - 1] = false;
    }
}

}  // namespace mrx
