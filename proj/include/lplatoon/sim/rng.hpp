#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <string_view>

#include "lplatoon/types.hpp"

namespace lplatoon::sim {

class UnknownStreamError : public Error {
public:
    explicit UnknownStreamError(std::string_view name)
        : Error("unknown random stream '" + std::string(name) + "'") {}
};

std::uint64_t splitmix64(std::uint64_t x);
std::uint64_t hash_name(std::string_view name);

/// Counter-based value: the draw is a pure function of (key, index), so two
/// streams with different keys never share state.
double counter_uniform(std::uint64_t key, std::uint64_t index);

/// Derives a stream key from the run seed, a family name and up to two
/// integer labels (e.g. sender and receiver of a radio link).
std::uint64_t derive_key(std::uint64_t seed, std::string_view family,
                         std::uint64_t a = 0, std::uint64_t b = 0);

class RngStream {
public:
    RngStream() = default;
    explicit RngStream(std::uint64_t key) : key_(key) {}

    /// Next value in [0, 1).
    double uniform() { return counter_uniform(key_, counter_++); }
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    std::uint64_t key() const { return key_; }
    std::uint64_t draws() const { return counter_; }

private:
    std::uint64_t key_ = 0;
    std::uint64_t counter_ = 0;
};

/// Named sub-streams of one seed. Consumers must be registered before use.
class RngRegistry {
public:
    explicit RngRegistry(std::uint64_t seed) : seed_(seed) {}

    std::uint64_t seed() const { return seed_; }

    RngStream& add_stream(std::string_view name);
    bool has_stream(std::string_view name) const;
    /// Throws UnknownStreamError if `name` was never added.
    RngStream& stream(std::string_view name);

    /// Unregistered stream for an indexed family (per-link, per-vehicle).
    RngStream substream(std::string_view family, std::uint64_t a, std::uint64_t b = 0) const {
        return RngStream(derive_key(seed_, family, a, b));
    }

private:
    std::uint64_t seed_;
    std::map<std::string, RngStream, std::less<>> streams_;
};

double draw_uniform(RngRegistry& rng, std::string_view stream_name);

} // namespace lplatoon::sim
