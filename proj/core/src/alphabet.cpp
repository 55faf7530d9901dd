#include "spanclean/alphabet.hpp"

namespace spanclean {

std::string CharSet::chars() const {
  std::string out;
  for (unsigned c = 0; c < 256; ++c)
    if (bits_.test(c)) out.push_back(static_cast<char>(c));
  return out;
}

Alphabet::Alphabet(CharSet s) : set_(s), chars_(s.chars()) {}

Alphabet Alphabet::printable_ascii_newline() {
  CharSet s = CharSet::range(0x20, 0x7E);
  s.add('\n');
  return Alphabet(s);
}

Alphabet Alphabet::from_chars(std::string_view chars) {
  return Alphabet(CharSet::of(chars));
}

std::size_t Alphabet::first_violation(std::string_view text) const {
  for (std::size_t i = 0; i < text.size(); ++i)
    if (!contains(static_cast<unsigned char>(text[i]))) return i + 1;
  return 0;
}

}  // namespace spanclean
