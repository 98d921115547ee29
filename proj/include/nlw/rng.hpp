#ifndef NLW_RNG_HPP
#define NLW_RNG_HPP

#include <array>
#include <cstdint>

namespace nlw {

// Philox4x32-10 counter-based generator.  Streams are independent for
// distinct (seed, stream) pairs and the output for a given counter value
// is identical across platforms.
class Philox {
  public:
    explicit Philox(std::uint64_t seed, std::uint64_t stream = 0)
        : key_{static_cast<std::uint32_t>(seed),
               static_cast<std::uint32_t>(seed >> 32)},
          counter_{0, 0, static_cast<std::uint32_t>(stream),
                   static_cast<std::uint32_t>(stream >> 32)} {}

    std::uint32_t next_u32();
    double uniform();       // (0, 1)
    double normal();        // standard Gaussian, Box-Muller

    // one keyed permutation of a counter block (10 rounds)
    static std::array<std::uint32_t, 4> block(std::array<std::uint32_t, 2> key,
                                              std::array<std::uint32_t, 4> ctr);

  private:
    void refill();

    std::array<std::uint32_t, 2> key_;
    std::array<std::uint32_t, 4> counter_;
    std::array<std::uint32_t, 4> buffer_{};
    int avail_ = 0;
    double cached_normal_ = 0.0;
    bool have_normal_ = false;
};

} // namespace nlw

#endif
