#pragma once

#include <bit>
#include <cstddef>
#include <cstdint>
#include <vector>

namespace qpan {

/// Fixed-size bit vector backed by 64-bit words. Node subsets and adjacency
/// rows use this; popcount over word pairs is the workhorse behind e(X,Y).
class DynBitset {
 public:
  DynBitset() = default;
  explicit DynBitset(std::size_t nbits)
      : nbits_(nbits), words_((nbits + 63) / 64, 0) {}

  /// Builds a subset of [0, nbits) from the low bits of `mask`.
  static DynBitset from_mask(std::uint64_t mask, std::size_t nbits) {
    DynBitset b(nbits);
    if (!b.words_.empty()) {
      b.words_[0] = (nbits >= 64) ? mask : (mask & ((1ULL << nbits) - 1));
    }
    return b;
  }

  std::size_t size() const { return nbits_; }

  bool test(std::size_t i) const {
    return (words_[i >> 6] >> (i & 63)) & 1ULL;
  }

  void set(std::size_t i, bool v = true) {
    if (v) {
      words_[i >> 6] |= (1ULL << (i & 63));
    } else {
      words_[i >> 6] &= ~(1ULL << (i & 63));
    }
  }

  std::size_t count() const {
    std::size_t c = 0;
    for (std::uint64_t w : words_) c += std::popcount(w);
    return c;
  }

  bool any() const {
    for (std::uint64_t w : words_) {
      if (w) return true;
    }
    return false;
  }

  bool none() const { return !any(); }

  const std::vector<std::uint64_t>& words() const { return words_; }
  std::vector<std::uint64_t>& words() { return words_; }

  std::vector<std::size_t> to_indices() const {
    std::vector<std::size_t> idx;
    idx.reserve(count());
    for (std::size_t wi = 0; wi < words_.size(); ++wi) {
      std::uint64_t w = words_[wi];
      while (w) {
        idx.push_back(wi * 64 + std::countr_zero(w));
        w &= w - 1;
      }
    }
    return idx;
  }

  bool operator==(const DynBitset& other) const {
    return nbits_ == other.nbits_ && words_ == other.words_;
  }

 private:
  std::size_t nbits_ = 0;
  std::vector<std::uint64_t> words_;
};

/// popcount of (a & b) over equally sized word arrays.
inline std::size_t and_count(const std::vector<std::uint64_t>& a,
                             const std::vector<std::uint64_t>& b) {
  std::size_t c = 0;
  for (std::size_t i = 0; i < a.size(); ++i) c += std::popcount(a[i] & b[i]);
  return c;
}

}  // namespace qpan
