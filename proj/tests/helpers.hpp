#pragma once

#include <functional>
#include <map>
#include <string>
#include <string_view>

#include "spanclean/automaton.hpp"
#include "spanclean/regex.hpp"

namespace spanclean::testing {

inline RegexCV parse(std::string_view src,
                     const Alphabet& sigma = Alphabet::printable_ascii_newline()) {
  return parse_regex_cv(src, sigma);
}

inline SpanRelation run(std::string_view src, const std::string& doc,
                        const Alphabet& sigma = Alphabet::printable_ascii_newline()) {
  return match_all(compile(parse_regex_cv(src, sigma)), Document{"d", doc});
}

/// Calls f on every document over `chars` of length <= maxlen (including
/// the empty document).
template <typename F>
void for_each_doc(std::string_view chars, int maxlen, F&& f) {
  std::string doc;
  std::function<void(int)> go = [&](int remaining) {
    f(doc);
    if (remaining == 0) return;
    for (char c : chars) {
      doc.push_back(c);
      go(remaining - 1);
      doc.pop_back();
    }
  };
  go(maxlen);
}

inline Span sp(uint32_t s, uint32_t e) { return Span{s, e}; }

// The running formulas used throughout the suites.
namespace fixtures {

// movie-name extractor of the walkthrough document
inline std::string gamma_mv() {
  return "Σ* \\s A{(\"watched\" ∨ \"saw\")} (\\s ∨ ,) (Σ−?−.)* ` "
         "M{([A-Z] ∨ [a-z]) ([A-Z] ∨ [a-z] ∨ \\s)*} ' ((\\s ∨ ,) ∨ ? ∨ .) Σ*";
}

// date attribute with nested year/month/day captures
inline std::string gamma_date() {
  return "Σ* \"mdate=\\\"\" F{ Y{[0-9][0-9][0-9][0-9]} - M{[0-9][0-9]} - "
         "D{[0-9][0-9]} } \\\" Σ*";
}

// drug abbreviations: overlapping same-variable spans
inline std::string gamma_abbr() {
  return "Σ* (\\s ∨ ,) A{ [A-Z][A-Z]* (\\s [A-Z][A-Z]*)* [0-9]* } (\\s ∨ ,) Σ*";
}

// medication/dosage pairs: one medication span, many dosage rows
inline std::string gamma_med_dose() {
  return "Σ* \\s M{ [A-Z][A-Z]* (\\s [A-Z][A-Z]*)* [0-9]* } (\\s ∨ ,) (Σ−?−.)* "
         "D{ [0-9][0-9]* } \\s (\"ml\" ∨ \"mg\") \\s Σ*";
}

// medication/dose/strength/frequency: strength may be empty and collide
// with the frequency of another row
inline std::string gamma_med_strength() {
  return "Σ* \\s M{ [A-Z][A-Z]* (\\s [A-Z][A-Z]*)* [0-9]* } (\\s ∨ ,)* "
         "D{ [0-9][0-9]* } \\s (\"ml\" ∨ \"mg\") (\\s ∨ ,)* "
         "S{ ([A-Z][A-Z] ∨ \"diluted\" ∨ \"half-strength\" ∨ ε) } (\\s ∨ ,) "
         "F{ [A-Z][A-Z] (\\s ([A-Z][A-Z] ∨ \"with food\" ∨ \"bedtime\"))* } Σ*";
}

}  // namespace fixtures

}  // namespace spanclean::testing
