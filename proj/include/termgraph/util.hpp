#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace termgraph {

// Deterministic RNG used everywhere seeds matter. mt19937_64 has a
// standard-specified output sequence; the uniform/normal transforms below are
// explicit so results do not depend on libstdc++ distribution internals.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : state_(seed ? seed : 0x9e3779b97f4a7c15ull) {}

    std::uint64_t next_u64() {
        // xorshift* variant; fast and reproducible
        std::uint64_t x = state_;
        x ^= x >> 12;
        x ^= x << 25;
        x ^= x >> 27;
        state_ = x;
        return x * 0x2545f4914f6cdd1dull;
    }

    // uniform in [0, 1)
    double next_double() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    // uniform in [0, n)
    std::uint64_t next_below(std::uint64_t n) { return next_u64() % n; }

    // standard normal via Box-Muller, spare cached
    double next_normal();

private:
    std::uint64_t state_;
    bool have_spare_ = false;
    double spare_ = 0.0;
};

std::uint64_t fnv1a64(std::string_view s);

// Order-independent derivation of per-item seeds from a global seed.
std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t a, std::uint64_t b = 0);

// SHA-256 of a string / file, lowercase hex. Used for artifact manifests and
// the response cache.
std::string sha256_hex(std::string_view data);
std::string sha256_file(const std::filesystem::path& path);

// Shortest round-tripping decimal representation (std::to_chars), locale-free.
std::string format_double(double v);
double parse_double(std::string_view s);

std::string to_lower(std::string_view s);
std::string trim(std::string_view s);
std::vector<std::string> split(std::string_view s, char sep);

// Case- and whitespace-insensitive key for matching user text against
// lexicon ids/names ("Reversal Learning" == "reversallearning").
std::string fold_key(std::string_view s);

std::size_t edit_distance(std::string_view a, std::string_view b);

std::string read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, std::string_view data);

} // namespace termgraph
