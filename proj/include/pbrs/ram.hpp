#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "pbrs/common.hpp"

namespace pbrs {

// The 128-byte Atari RAM snapshot that the RAM-based aggregations read.
class RamVector {
public:
    static constexpr std::size_t kSize = 128;

    RamVector() { bytes_.fill(0); }

    // Accepts integer components; each must lie in [0, 255].
    static RamVector from_ints(const std::vector<long long>& values) {
        if (values.size() != kSize)
            throw UsageError("RAM vector must have exactly 128 components, got " + std::to_string(values.size()));
        RamVector r;
        for (std::size_t i = 0; i < kSize; ++i) {
            if (values[i] < 0 || values[i] > 255)
                throw UsageError("RAM component " + std::to_string(i) + " outside [0,255]");
            r.bytes_[i] = static_cast<std::uint8_t>(values[i]);
        }
        return r;
    }

    static RamVector from_bytes(const std::string& raw) {
        if (raw.size() != kSize) throw UsageError("binary RAM vector must be 128 bytes");
        RamVector r;
        for (std::size_t i = 0; i < kSize; ++i) r.bytes_[i] = static_cast<std::uint8_t>(raw[i]);
        return r;
    }

    int operator[](std::size_t i) const { return bytes_.at(i); }

    RamVector& set(std::size_t i, int value) {
        if (value < 0 || value > 255) throw UsageError("RAM component value outside [0,255]");
        bytes_.at(i) = static_cast<std::uint8_t>(value);
        return *this;
    }

    bool operator==(const RamVector& o) const { return bytes_ == o.bytes_; }

private:
    std::array<std::uint8_t, kSize> bytes_;
};

}  // namespace pbrs
