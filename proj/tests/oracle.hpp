#pragma once

#include <map>
#include <set>
#include <string_view>

#include "spanclean/regex.hpp"
#include "spanclean/text.hpp"

namespace spanclean::testing {

/// Brute-force relational matcher working directly on the regex tree by
/// interval dynamic programming. Independent of the automaton machinery:
/// used as the oracle that match_all is checked against.
std::set<std::map<std::string, Span>> oracle_relation(const RegexCV& r,
                                                      std::string_view doc);

/// The oracle result as a SpanRelation for direct comparison.
SpanRelation oracle_span_relation(const RegexCV& r, std::string_view doc);

/// Language membership decided by the same tree matcher (captures ignored).
bool oracle_accepts(const RegexCV& r, std::string_view doc);

}  // namespace spanclean::testing
