#pragma once

#include <cstdint>
#include <cstring>
#include <span>
#include <vector>

namespace flowgate {

// Big-endian byte-sequence writer. All multi-byte wire fields in this
// project are network byte order.
class ByteWriter {
public:
    void u8(uint8_t v) { buf_.push_back(v); }

    void u16(uint16_t v) {
        buf_.push_back(static_cast<uint8_t>(v >> 8));
        buf_.push_back(static_cast<uint8_t>(v));
    }

    void u32(uint32_t v) {
        for (int shift = 24; shift >= 0; shift -= 8)
            buf_.push_back(static_cast<uint8_t>(v >> shift));
    }

    void u64(uint64_t v) {
        for (int shift = 56; shift >= 0; shift -= 8)
            buf_.push_back(static_cast<uint8_t>(v >> shift));
    }

    void bytes(std::span<const uint8_t> b) { buf_.insert(buf_.end(), b.begin(), b.end()); }

    void zeros(std::size_t n) { buf_.insert(buf_.end(), n, 0); }

    // Patches a previously written big-endian u16 in place.
    void patch_u16(std::size_t offset, uint16_t v) {
        buf_[offset] = static_cast<uint8_t>(v >> 8);
        buf_[offset + 1] = static_cast<uint8_t>(v);
    }

    std::size_t size() const { return buf_.size(); }
    std::vector<uint8_t> take() { return std::move(buf_); }
    const std::vector<uint8_t>& data() const { return buf_; }

private:
    std::vector<uint8_t> buf_;
};

// Bounds-checked big-endian reader over a borrowed byte span.
class ByteReader {
public:
    explicit ByteReader(std::span<const uint8_t> data) : data_(data) {}

    std::size_t remaining() const { return data_.size() - pos_; }
    std::size_t position() const { return pos_; }
    bool can_read(std::size_t n) const { return remaining() >= n; }

    uint8_t u8() { return data_[pos_++]; }

    uint16_t u16() {
        uint16_t v = static_cast<uint16_t>(data_[pos_] << 8 | data_[pos_ + 1]);
        pos_ += 2;
        return v;
    }

    uint32_t u32() {
        uint32_t v = 0;
        for (int i = 0; i < 4; ++i) v = v << 8 | data_[pos_ + i];
        pos_ += 4;
        return v;
    }

    uint64_t u64() {
        uint64_t v = 0;
        for (int i = 0; i < 8; ++i) v = v << 8 | data_[pos_ + i];
        pos_ += 8;
        return v;
    }

    std::vector<uint8_t> bytes(std::size_t n) {
        std::vector<uint8_t> out(data_.begin() + pos_, data_.begin() + pos_ + n);
        pos_ += n;
        return out;
    }

    void skip(std::size_t n) { pos_ += n; }

private:
    std::span<const uint8_t> data_;
    std::size_t pos_ = 0;
};

}  // namespace flowgate
