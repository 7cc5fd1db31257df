#pragma once

#include <array>
#include <cstdint>

namespace polymag {

/// Philox4x32-10 counter-based generator (Salmon et al., SC'11).
/// The output block is a pure function of (key, counter), which gives
/// independent streams per path without any shared state.
class Philox4x32 {
public:
    using Block = std::array<std::uint32_t, 4>;
    using Key = std::array<std::uint32_t, 2>;

    static Block generate(Block counter, Key key);
};

/// Random stream for one simulation path: key = seed, counter = (stream id,
/// draw index). Two streams with different ids never overlap.
class RandomStream {
public:
    RandomStream(std::uint64_t seed, std::uint64_t stream_id);

    /// Uniform on the open interval (0, 1), 53-bit resolution.
    double uniform();
    /// Standard normal via Box-Muller; draws come in cached pairs.
    double normal();
    /// Poisson(mean) by inversion; intended for small means.
    unsigned poisson(double mean);

private:
    void refill();

    Philox4x32::Key key_;
    std::uint64_t stream_id_;
    std::uint64_t counter_ = 0;
    Philox4x32::Block block_{};
    int used_ = 4;
    double spare_normal_ = 0.0;
    bool has_spare_ = false;
};

}  // namespace polymag
