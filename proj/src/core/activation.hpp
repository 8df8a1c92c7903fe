#pragma once

#include "core/error.hpp"

#include <bit>
#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

namespace rrnum {

/// Binary subset of active channels, stored as a bitmask (bit n = channel n).
class ActivationVector {
public:
    static constexpr std::size_t kMaxChannels = 64;

    ActivationVector() = default;
    ActivationVector(std::size_t size, std::uint64_t mask) : size_(size), mask_(mask)
    {
        require(size <= kMaxChannels, "at most 64 channels are supported");
        require(size == kMaxChannels || (mask >> size) == 0, "activation mask has bits beyond the channel count");
    }

    static ActivationVector zero(std::size_t size) { return {size, 0}; }
    static ActivationVector all(std::size_t size)
    {
        return {size, size == kMaxChannels ? ~std::uint64_t{0} : (std::uint64_t{1} << size) - 1};
    }
    static ActivationVector single(std::size_t size, std::size_t channel)
    {
        require(channel < size, "channel index out of range");
        return {size, std::uint64_t{1} << channel};
    }

    std::size_t size() const noexcept { return size_; }
    std::uint64_t mask() const noexcept { return mask_; }
    bool active(std::size_t n) const noexcept { return (mask_ >> n) & 1u; }
    std::size_t count() const noexcept { return static_cast<std::size_t>(std::popcount(mask_)); }
    bool is_zero() const noexcept { return mask_ == 0; }

    std::vector<std::size_t> channels() const
    {
        std::vector<std::size_t> out;
        out.reserve(count());
        for (std::size_t n = 0; n < size_; ++n)
            if (active(n)) out.push_back(n);
        return out;
    }

    /// "1,0,1"-style rendering, channel 1 first.
    std::string to_string() const
    {
        std::string s;
        for (std::size_t n = 0; n < size_; ++n) {
            if (n) s += ',';
            s += active(n) ? '1' : '0';
        }
        return s;
    }

    friend bool operator==(const ActivationVector&, const ActivationVector&) = default;

private:
    std::size_t size_ = 0;
    std::uint64_t mask_ = 0;
};

}  // namespace rrnum
