#include "pcsisac/rng.hpp"

#include <array>

namespace pcsisac {

Generator make_stream(Seed seed, StreamTag tag, std::uint64_t index) {
    const auto lo = [](std::uint64_t v) { return static_cast<std::uint32_t>(v & 0xffffffffu); };
    const auto hi = [](std::uint64_t v) { return static_cast<std::uint32_t>(v >> 32); };
    const auto t = static_cast<std::uint64_t>(tag);
    std::seed_seq seq{lo(seed), hi(seed), lo(t), hi(t), lo(index), hi(index)};
    return Generator(seq);
}

}  // namespace pcsisac
