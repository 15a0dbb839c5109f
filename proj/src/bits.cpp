#include "dynsub/bits.hpp"

#include <algorithm>
#include <stdexcept>

namespace dynsub {

int ceil_log2(std::uint64_t x) {
  int k = 0;
  while (k < 64 && (std::uint64_t{1} << k) < x) ++k;
  return k;
}

void BitString::append(std::uint64_t value, int width) {
  for (int i = width - 1; i >= 0; --i) bits_.push_back(i < 64 && ((value >> i) & 1u));
}

BitString BitString::prefix(std::size_t k) const {
  BitString out;
  out.bits_.assign(bits_.begin(), bits_.begin() + std::min(k, bits_.size()));
  return out;
}

BitString BitString::slice(std::size_t from, std::size_t len) const {
  BitString out;
  for (std::size_t i = from; i < from + len; ++i) out.push(i < bits_.size() && bits_[i]);
  return out;
}

std::string BitString::hex() const {
  static const char* digits = "0123456789abcdef";
  std::string out;
  for (std::size_t i = 0; i < bits_.size(); i += 4) {
    int nib = 0;
    for (std::size_t j = i; j < i + 4; ++j) nib = nib * 2 + (j < bits_.size() && bits_[j]);
    out.push_back(digits[nib]);
  }
  return out;
}

BitString BitString::from_hex(const std::string& hex, std::size_t len) {
  BitString out;
  for (char c : hex) {
    int nib;
    if (c >= '0' && c <= '9') nib = c - '0';
    else if (c >= 'a' && c <= 'f') nib = c - 'a' + 10;
    else if (c >= 'A' && c <= 'F') nib = c - 'A' + 10;
    else throw std::invalid_argument("bad hex digit");
    out.append(static_cast<std::uint64_t>(nib), 4);
  }
  if (out.size() < len) throw std::invalid_argument("hex shorter than bit length");
  return out.prefix(len);
}

std::string BitString::str() const {
  std::string out;
  for (bool b : bits_) out.push_back(b ? '1' : '0');
  return out;
}

std::uint64_t BitReader::read(int width) {
  std::uint64_t v = 0;
  for (int i = 0; i < width; ++i) v = (v << 1) | static_cast<std::uint64_t>(bit());
  return v;
}

}  // namespace dynsub
