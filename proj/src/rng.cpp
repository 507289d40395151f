#include "episim/rng.hpp"

namespace episim {

std::uint64_t splitmix64(std::uint64_t x) noexcept
{
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index) noexcept
{
    return splitmix64(master + (index + 1) * 0x9E3779B97F4A7C15ULL);
}

std::uint64_t Rng::geometric_skip(double p, std::uint64_t cap)
{
    if (p >= 1.0)
        return 0;
    if (p <= 0.0)
        return cap;
    const double u = uniform();
    const double skip = std::floor(std::log1p(-u) / std::log1p(-p));
    if (!(skip < static_cast<double>(cap)))
        return cap;
    return static_cast<std::uint64_t>(skip);
}

} // namespace episim
