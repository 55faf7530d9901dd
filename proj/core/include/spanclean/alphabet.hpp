#pragma once

#include <bitset>
#include <cstdint>
#include <string>
#include <string_view>

namespace spanclean {

/// A finite set of byte characters. Used both for the working alphabet and
/// for character classes on automaton edges.
class CharSet {
 public:
  CharSet() = default;

  static CharSet none() { return CharSet(); }
  static CharSet single(unsigned char c) {
    CharSet s;
    s.bits_.set(c);
    return s;
  }
  static CharSet range(unsigned char lo, unsigned char hi) {
    CharSet s;
    for (unsigned c = lo; c <= hi; ++c) s.bits_.set(c);
    return s;
  }
  static CharSet of(std::string_view chars) {
    CharSet s;
    for (unsigned char c : chars) s.bits_.set(c);
    return s;
  }

  bool contains(unsigned char c) const { return bits_.test(c); }
  bool empty() const { return bits_.none(); }
  std::size_t size() const { return bits_.count(); }

  CharSet& add(unsigned char c) {
    bits_.set(c);
    return *this;
  }
  CharSet& remove(unsigned char c) {
    bits_.reset(c);
    return *this;
  }
  CharSet& unite(const CharSet& o) {
    bits_ |= o.bits_;
    return *this;
  }
  CharSet& intersect(const CharSet& o) {
    bits_ &= o.bits_;
    return *this;
  }
  CharSet& subtract(const CharSet& o) {
    bits_ &= ~o.bits_;
    return *this;
  }

  friend CharSet operator|(CharSet a, const CharSet& b) { return a.unite(b); }
  friend CharSet operator&(CharSet a, const CharSet& b) {
    return a.intersect(b);
  }
  friend CharSet operator-(CharSet a, const CharSet& b) {
    return a.subtract(b);
  }
  friend bool operator==(const CharSet& a, const CharSet& b) {
    return a.bits_ == b.bits_;
  }

  /// Members in ascending byte order.
  std::string chars() const;

 private:
  std::bitset<256> bits_;
};

/// The working alphabet Sigma. Documents, regex literals and update values
/// must stay inside it. Immutable.
class Alphabet {
 public:
  /// Printable ASCII (0x20..0x7E) plus newline. The default.
  static Alphabet printable_ascii_newline();
  /// An explicit character set.
  static Alphabet from_chars(std::string_view chars);

  bool contains(unsigned char c) const { return set_.contains(c); }
  const CharSet& set() const { return set_; }
  const std::string& chars() const { return chars_; }
  std::size_t size() const { return chars_.size(); }

  /// 0 when every character of `text` is a member, else the 1-based offset
  /// of the first violation.
  std::size_t first_violation(std::string_view text) const;

  friend bool operator==(const Alphabet& a, const Alphabet& b) {
    return a.set_ == b.set_;
  }

 private:
  explicit Alphabet(CharSet s);
  CharSet set_;
  std::string chars_;  // ascending
};

}  // namespace spanclean
