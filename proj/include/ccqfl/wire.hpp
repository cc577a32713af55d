// Copyright 2026 The ccqfl developers

// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at

//     http://www.apache.org/licenses/LICENSE-2.0

// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

/**
 * @file
 * Little-endian message framing shared by the shadow-set and local-gradient
 * wire formats. Every message starts with magic "CCQF", a version byte, and
 * a message-type byte; truncation and corruption are reported with the byte
 * offset at which decoding failed.
 */

#pragma once

#include <array>
#include <bit>
#include <cstdint>
#include <cstring>
#include <span>
#include <string>
#include <vector>

#include "ccqfl/errors.hpp"

namespace ccqfl::wire {

inline constexpr std::array<std::uint8_t, 4> kMagic = {'C', 'C', 'Q', 'F'};
inline constexpr std::uint8_t kVersion = 1;

enum class MsgType : std::uint8_t { ShadowSet = 1, LocalGradient = 2 };

class ByteWriter {
  public:
    void u8(std::uint8_t v) { buf_.push_back(v); }
    void u16(std::uint16_t v) { put_le(v); }
    void u32(std::uint32_t v) { put_le(v); }
    void u64(std::uint64_t v) { put_le(v); }
    void f64(double v) { put_le(std::bit_cast<std::uint64_t>(v)); }
    void bytes(std::span<const std::uint8_t> data) {
        buf_.insert(buf_.end(), data.begin(), data.end());
    }

    std::vector<std::uint8_t> take() { return std::move(buf_); }
    std::size_t size() const { return buf_.size(); }

  private:
    template <typename T> void put_le(T v) {
        for (std::size_t i = 0; i < sizeof(T); ++i) {
            buf_.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
        }
    }

    std::vector<std::uint8_t> buf_;
};

class ByteReader {
  public:
    explicit ByteReader(std::span<const std::uint8_t> data) : data_(data) {}

    std::uint8_t u8() { return read_le<std::uint8_t>(); }
    std::uint16_t u16() { return read_le<std::uint16_t>(); }
    std::uint32_t u32() { return read_le<std::uint32_t>(); }
    std::uint64_t u64() { return read_le<std::uint64_t>(); }
    double f64() { return std::bit_cast<double>(read_le<std::uint64_t>()); }

    std::span<const std::uint8_t> bytes(std::size_t count) {
        require(count);
        auto view = data_.subspan(offset_, count);
        offset_ += count;
        return view;
    }

    /// Checks magic, version, and the expected message type in order.
    void expect_header(MsgType expected) {
        for (std::size_t i = 0; i < kMagic.size(); ++i) {
            if (u8() != kMagic[i]) {
                throw ProtocolError("bad magic at offset " + std::to_string(offset_ - 1));
            }
        }
        const std::uint8_t version = u8();
        if (version != kVersion) {
            throw ProtocolError("unsupported version " + std::to_string(version) +
                                " at offset " + std::to_string(offset_ - 1));
        }
        const std::uint8_t type = u8();
        if (type != static_cast<std::uint8_t>(expected)) {
            throw ProtocolError("unexpected message type " + std::to_string(type) +
                                " at offset " + std::to_string(offset_ - 1));
        }
    }

    std::size_t offset() const { return offset_; }
    std::size_t remaining() const { return data_.size() - offset_; }

    void expect_end() const {
        if (offset_ != data_.size()) {
            throw ProtocolError("trailing bytes after message at offset " +
                                std::to_string(offset_));
        }
    }

  private:
    void require(std::size_t count) const {
        if (data_.size() - offset_ < count) {
            throw ProtocolError("message truncated at offset " + std::to_string(offset_) +
                                " (need " + std::to_string(count) + " more bytes, have " +
                                std::to_string(data_.size() - offset_) + ")");
        }
    }

    template <typename T> T read_le() {
        require(sizeof(T));
        T v = 0;
        for (std::size_t i = 0; i < sizeof(T); ++i) {
            v |= static_cast<T>(static_cast<T>(data_[offset_ + i]) << (8 * i));
        }
        offset_ += sizeof(T);
        return v;
    }

    std::span<const std::uint8_t> data_;
    std::size_t offset_ = 0;
};

inline void write_header(ByteWriter &writer, MsgType type) {
    writer.bytes(kMagic);
    writer.u8(kVersion);
    writer.u8(static_cast<std::uint8_t>(type));
}

} // namespace ccqfl::wire
