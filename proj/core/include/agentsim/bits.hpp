#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace agentsim {

// Growable packed bit string. Used for agent memory snapshots.
class BitString {
public:
    BitString() = default;
    explicit BitString(std::size_t bits) : words_((bits + 63) / 64, 0), size_(bits) {}

    std::size_t size() const noexcept { return size_; }
    bool empty() const noexcept { return size_ == 0; }

    bool get(std::size_t i) const noexcept { return (words_[i >> 6] >> (i & 63)) & 1u; }
    void set(std::size_t i, bool v) noexcept
    {
        const std::uint64_t m = std::uint64_t{1} << (i & 63);
        if (v)
            words_[i >> 6] |= m;
        else
            words_[i >> 6] &= ~m;
    }

    // Reads/writes an unsigned field of up to 64 bits starting at bit `pos`.
    std::uint64_t read(std::size_t pos, unsigned width) const noexcept;
    void write(std::size_t pos, unsigned width, std::uint64_t value) noexcept;

    void resize(std::size_t bits);
    void clear() noexcept
    {
        words_.clear();
        size_ = 0;
    }

    std::span<std::uint64_t> words() noexcept { return words_; }
    std::span<const std::uint64_t> words() const noexcept { return words_; }

    // Lowercase hex, least significant nibble first; empty string for zero-width.
    std::string to_hex() const;

    friend bool operator==(const BitString &a, const BitString &b) noexcept
    {
        return a.size_ == b.size_ && a.words_ == b.words_;
    }

private:
    std::vector<std::uint64_t> words_;
    std::size_t size_ = 0;
};

std::uint64_t read_bits(std::span<const std::uint64_t> words, std::size_t pos, unsigned width) noexcept;
void write_bits(std::span<std::uint64_t> words, std::size_t pos, unsigned width, std::uint64_t value) noexcept;

// Number of bits needed to represent values in [0, count).
constexpr unsigned bits_for(std::uint64_t count) noexcept
{
    unsigned b = 0;
    while (b < 64 && (std::uint64_t{1} << b) < count)
        ++b;
    return b;
}

struct FieldDesc {
    std::string name;
    unsigned offset = 0;
    unsigned width = 0;
};

// Fixed layout of named bit fields shared by every node's storage record.
class StorageSchema {
public:
    // Appends a field and returns its index. Names must be unique.
    std::size_t add(std::string name, unsigned width);

    std::size_t field_count() const noexcept { return fields_.size(); }
    const FieldDesc &field(std::size_t i) const { return fields_[i]; }
    const std::vector<FieldDesc> &fields() const noexcept { return fields_; }
    // Throws std::out_of_range when missing.
    const FieldDesc &field(std::string_view name) const;
    bool has(std::string_view name) const noexcept;

    unsigned total_bits() const noexcept { return total_; }
    unsigned words_per_record() const noexcept { return (total_ + 63) / 64; }

    friend bool operator==(const StorageSchema &, const StorageSchema &) = default;

private:
    std::vector<FieldDesc> fields_;
    unsigned total_ = 0;
};

// Mutable view of one record (or of a bit range nested inside one).
class StorageView {
public:
    StorageView(std::uint64_t *words, unsigned base = 0) noexcept : words_(words), base_(base) {}

    std::uint64_t get(unsigned offset, unsigned width) const noexcept
    {
        return read_bits({words_, (base_ + offset + width + 63) / 64}, base_ + offset, width);
    }
    void set(unsigned offset, unsigned width, std::uint64_t v) noexcept
    {
        write_bits({words_, (base_ + offset + width + 63) / 64}, base_ + offset, width, v);
    }
    bool bit(unsigned offset) const noexcept { return (words_[(base_ + offset) >> 6] >> ((base_ + offset) & 63)) & 1u; }
    void set_bit(unsigned offset, bool v) noexcept
    {
        const unsigned p = base_ + offset;
        const std::uint64_t m = std::uint64_t{1} << (p & 63);
        if (v)
            words_[p >> 6] |= m;
        else
            words_[p >> 6] &= ~m;
    }

    StorageView sub(unsigned offset) const noexcept { return {words_, base_ + offset}; }

    std::uint64_t *raw() const noexcept { return words_; }
    unsigned base() const noexcept { return base_; }

private:
    std::uint64_t *words_;
    unsigned base_;
};

// All node records for one run, zero-initialised.
class StorageArray {
public:
    StorageArray() = default;
    StorageArray(std::size_t nodes, unsigned bits_per_record)
        : stride_(bits_per_record ? (bits_per_record + 63) / 64 : 1), bits_(bits_per_record), data_(nodes * stride_, 0)
    {
    }

    StorageView at(std::size_t node) noexcept { return {data_.data() + node * stride_}; }
    std::uint64_t get(std::size_t node, unsigned offset, unsigned width) const noexcept
    {
        return read_bits({data_.data() + node * stride_, stride_}, offset, width);
    }
    std::span<const std::uint64_t> record(std::size_t node) const noexcept { return {data_.data() + node * stride_, stride_}; }

    std::size_t node_count() const noexcept { return stride_ ? data_.size() / stride_ : 0; }
    void clear() noexcept { std::fill(data_.begin(), data_.end(), 0); }
    unsigned bits_per_record() const noexcept { return bits_; }

    friend bool operator==(const StorageArray &, const StorageArray &) = default;

private:
    unsigned stride_ = 0;
    unsigned bits_ = 0;
    std::vector<std::uint64_t> data_;
};

} // namespace agentsim
