#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace recsim {

enum class StreamPurpose : std::uint8_t { PopulationInit, Arrivals, Effort };

using Engine = std::mt19937_64;

/// SplitMix64 finaliser; used to decorrelate (seed, purpose) pairs.
constexpr std::uint64_t mix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

/// Independent engines per purpose, each seeded from (seed, purpose tag), so
/// adding draws to one purpose never perturbs another.
class RngStreams {
public:
    explicit RngStreams(std::uint64_t seed)
        : seed_(seed),
          population_init_(derive(seed, StreamPurpose::PopulationInit)),
          arrivals_(derive(seed, StreamPurpose::Arrivals)),
          effort_(derive(seed, StreamPurpose::Effort)) {}

    Engine& stream(StreamPurpose p) {
        switch (p) {
            case StreamPurpose::PopulationInit: return population_init_;
            case StreamPurpose::Arrivals: return arrivals_;
            case StreamPurpose::Effort: return effort_;
        }
        return effort_;
    }

    std::uint64_t seed() const { return seed_; }

    static std::uint64_t derive(std::uint64_t seed, StreamPurpose p) {
        return mix64(mix64(seed) ^ (0xa0761d6478bd642fULL * (static_cast<std::uint64_t>(p) + 1)));
    }

private:
    std::uint64_t seed_;
    Engine population_init_;
    Engine arrivals_;
    Engine effort_;
};

}  // namespace recsim
