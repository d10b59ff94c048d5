#pragma once

#include <cstdint>
#include <vector>

namespace prp {

// Small deterministic generator (splitmix64 core).  Results are identical
// across platforms and standard-library versions for a given seed, which the
// reproducibility guarantees rely on; std::mt19937 plus distribution adapters
// would not give that.
class Rng {
  public:
    explicit Rng(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next_u64() {
        std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ull);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
        return z ^ (z >> 31);
    }

    // Uniform in [0, 1).
    double uniform() {
        return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    }

    // Uniform in [lo, hi).
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    // Uniform integer in [lo, hi] inclusive; lo <= hi required.
    int uniform_int(int lo, int hi) {
        const std::uint64_t span = static_cast<std::uint64_t>(hi - lo) + 1;
        return lo + static_cast<int>(next_u64() % span);
    }

    template <typename T>
    void shuffle(std::vector<T>& v) {
        for (std::size_t i = v.size(); i > 1; --i) {
            const std::size_t j =
                static_cast<std::size_t>(next_u64() % static_cast<std::uint64_t>(i));
            std::swap(v[i - 1], v[j]);
        }
    }

    // Independent child stream, e.g. one per restart.
    Rng fork() { return Rng(next_u64() ^ 0xd1b54a32d192ed03ull); }

  private:
    std::uint64_t state_;
};

}  // namespace prp
