#include "agentsim/bits.hpp"

#include <stdexcept>

namespace agentsim {

std::uint64_t read_bits(std::span<const std::uint64_t> words, std::size_t pos, unsigned width) noexcept
{
    if (width == 0)
        return 0;
    const std::size_t w = pos >> 6;
    const unsigned sh = pos & 63;
    std::uint64_t v = words[w] >> sh;
    if (sh + width > 64)
        v |= words[w + 1] << (64 - sh);
    if (width < 64)
        v &= (std::uint64_t{1} << width) - 1;
    return v;
}

void write_bits(std::span<std::uint64_t> words, std::size_t pos, unsigned width, std::uint64_t value) noexcept
{
    if (width == 0)
        return;
    const std::uint64_t mask = width < 64 ? (std::uint64_t{1} << width) - 1 : ~std::uint64_t{0};
    value &= mask;
    const std::size_t w = pos >> 6;
    const unsigned sh = pos & 63;
    words[w] = (words[w] & ~(mask << sh)) | (value << sh);
    if (sh + width > 64) {
        const unsigned spill = sh + width - 64;
        const std::uint64_t hi = (std::uint64_t{1} << spill) - 1;
        words[w + 1] = (words[w + 1] & ~hi) | (value >> (64 - sh));
    }
}

std::uint64_t BitString::read(std::size_t pos, unsigned width) const noexcept { return read_bits(words_, pos, width); }

void BitString::write(std::size_t pos, unsigned width, std::uint64_t value) noexcept { write_bits(words_, pos, width, value); }

void BitString::resize(std::size_t bits)
{
    words_.resize((bits + 63) / 64, 0);
    if (bits < size_ && (bits & 63))
        words_.back() &= (std::uint64_t{1} << (bits & 63)) - 1;
    size_ = bits;
}

std::string BitString::to_hex() const
{
    static constexpr char digits[] = "0123456789abcdef";
    std::string out;
    out.reserve((size_ + 3) / 4);
    for (std::size_t pos = 0; pos < size_; pos += 4) {
        const unsigned w = static_cast<unsigned>(std::min<std::size_t>(4, size_ - pos));
        out.push_back(digits[read(pos, w)]);
    }
    return out;
}

std::size_t StorageSchema::add(std::string name, unsigned width)
{
    if (has(name))
        throw std::invalid_argument("duplicate storage field: " + name);
    fields_.push_back({std::move(name), total_, width});
    total_ += width;
    return fields_.size() - 1;
}

const FieldDesc &StorageSchema::field(std::string_view name) const
{
    for (const auto &f : fields_)
        if (f.name == name)
            return f;
    throw std::out_of_range("no storage field named " + std::string(name));
}

bool StorageSchema::has(std::string_view name) const noexcept
{
    for (const auto &f : fields_)
        if (f.name == name)
            return true;
    return false;
}

} // namespace agentsim
