#pragma once

#include <cstdint>
#include <stdexcept>
#include <vector>

namespace motifstore {

// Packed bit string with MSB-first value packing.
class BitVec {
public:
    BitVec() = default;

    static BitVec from_bytes(const std::vector<uint8_t>& bytes) {
        BitVec v;
        v.data_ = bytes;
        v.n_bits_ = bytes.size() * 8;
        return v;
    }

    // Trailing partial byte is zero-padded.
    std::vector<uint8_t> to_bytes() const { return data_; }

    size_t size() const { return n_bits_; }
    bool empty() const { return n_bits_ == 0; }

    void push_back(bool bit) {
        if (n_bits_ % 8 == 0) data_.push_back(0);
        if (bit) data_.back() |= static_cast<uint8_t>(0x80u >> (n_bits_ % 8));
        ++n_bits_;
    }

    bool bit(size_t i) const {
        if (i >= n_bits_) throw std::out_of_range("BitVec::bit");
        return (data_[i / 8] >> (7 - i % 8)) & 1u;
    }

    // Append `n_bits` of `value`, most significant first. n_bits <= 64.
    void append_value(uint64_t value, int n_bits) {
        if (n_bits < 0 || n_bits > 64) throw std::invalid_argument("BitVec::append_value: n_bits");
        for (int i = n_bits - 1; i >= 0; --i) push_back((value >> i) & 1u);
    }

    // Read up to 64 bits starting at pos, MSB-first; bits past the end read as 0.
    uint64_t read_value_padded(size_t pos, int n_bits) const {
        if (n_bits < 0 || n_bits > 64) throw std::invalid_argument("BitVec::read_value_padded: n_bits");
        uint64_t v = 0;
        for (int i = 0; i < n_bits; ++i) {
            const size_t p = pos + static_cast<size_t>(i);
            v = (v << 1) | (p < n_bits_ && bit(p) ? 1u : 0u);
        }
        return v;
    }

    BitVec prefix(size_t n) const {
        if (n > n_bits_) throw std::out_of_range("BitVec::prefix");
        BitVec out;
        for (size_t i = 0; i < n; ++i) out.push_back(bit(i));
        return out;
    }

    bool operator==(const BitVec& o) const {
        if (n_bits_ != o.n_bits_) return false;
        for (size_t i = 0; i < n_bits_; ++i)
            if (bit(i) != o.bit(i)) return false;
        return true;
    }

private:
    std::vector<uint8_t> data_;
    size_t n_bits_ = 0;
};

}  // namespace motifstore
