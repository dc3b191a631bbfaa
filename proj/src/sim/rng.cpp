#include "lplatoon/sim/rng.hpp"

namespace lplatoon::sim {

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

std::uint64_t hash_name(std::string_view name) {
    // FNV-1a
    std::uint64_t h = 0xCBF29CE484222325ULL;
    for (unsigned char c : name) {
        h ^= c;
        h *= 0x100000001B3ULL;
    }
    return h;
}

double counter_uniform(std::uint64_t key, std::uint64_t index) {
    std::uint64_t bits = splitmix64(key ^ splitmix64(index));
    return static_cast<double>(bits >> 11) * 0x1.0p-53;
}

std::uint64_t derive_key(std::uint64_t seed, std::string_view family, std::uint64_t a,
                         std::uint64_t b) {
    std::uint64_t k = splitmix64(seed);
    k = splitmix64(k ^ hash_name(family));
    k = splitmix64(k ^ a);
    k = splitmix64(k ^ (b * 0xD1342543DE82EF95ULL));
    return k;
}

RngStream& RngRegistry::add_stream(std::string_view name) {
    auto it = streams_.find(name);
    if (it != streams_.end()) return it->second;
    auto [ins, _] = streams_.emplace(std::string(name), RngStream(derive_key(seed_, name)));
    return ins->second;
}

bool RngRegistry::has_stream(std::string_view name) const {
    return streams_.find(name) != streams_.end();
}

RngStream& RngRegistry::stream(std::string_view name) {
    auto it = streams_.find(name);
    if (it == streams_.end()) throw UnknownStreamError(name);
    return it->second;
}

double draw_uniform(RngRegistry& rng, std::string_view stream_name) {
    return rng.stream(stream_name).uniform();
}

} // namespace lplatoon::sim
