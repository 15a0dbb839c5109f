#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace dynsub {

// ceil(log2 x) for x >= 1; 0 for x <= 1.
int ceil_log2(std::uint64_t x);
// Bits for an ID in [1, n]: ceil(log2 n), at least 1.
inline int id_width(int n) { return n <= 2 ? 1 : ceil_log2(static_cast<std::uint64_t>(n)); }

class BitString {
 public:
  BitString() = default;

  std::size_t size() const { return bits_.size(); }
  bool empty() const { return bits_.empty(); }
  bool operator[](std::size_t i) const { return bits_[i]; }

  void push(bool b) { bits_.push_back(b); }
  // Low `width` bits of value, most significant first.
  void append(std::uint64_t value, int width);
  void append(const BitString& o) { bits_.insert(bits_.end(), o.bits_.begin(), o.bits_.end()); }

  BitString prefix(std::size_t k) const;
  BitString slice(std::size_t from, std::size_t len) const;  // zero-padded past the end

  std::string hex() const;  // MSB-first, zero-padded to a nibble
  static BitString from_hex(const std::string& hex, std::size_t len);
  std::string str() const;  // "0101..."

  bool operator==(const BitString& o) const = default;
  auto operator<=>(const BitString& o) const = default;

 private:
  std::vector<bool> bits_;
};

// Reads past the end yield zeros, so decoders survive clipped messages.
class BitReader {
 public:
  explicit BitReader(const BitString& s) : s_(s) {}
  bool bit() { return pos_ < s_.size() ? s_[pos_++] : (++pos_, false); }
  std::uint64_t read(int width);
  std::size_t pos() const { return pos_; }
  bool done() const { return pos_ >= s_.size(); }

 private:
  const BitString& s_;
  std::size_t pos_ = 0;
};

}  // namespace dynsub
