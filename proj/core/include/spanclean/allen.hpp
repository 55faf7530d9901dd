#pragma once

#include <string>

#include "spanclean/automaton.hpp"
#include "spanclean/text.hpp"

namespace spanclean {

/// The 13 basic span relationships plus the three named disjunctions used
/// by the verifier constructions.
enum class AllenRelation {
  Precedes,     // x.end < y.start
  PrecededBy,   // y.end < x.start
  Meets,        // x.end == y.start, both non-empty
  MetBy,        // y.end == x.start, both non-empty
  Overhangs,    // x.start < y.start < x.end < y.end
  OverhungBy,   // y.start < x.start < y.end < x.end
  During,       // y.start < x.start and x.end < y.end
  Contains,     // x.start < y.start and y.end < x.end
  Starts,       // x.start == y.start and x.end < y.end
  StartedBy,    // x.start == y.start and y.end < x.end
  Finishes,     // x.end == y.end and y.start < x.start
  FinishedBy,   // x.end == y.end and x.start < y.start
  Equals,       // identical spans
  Overlap,         // disjunction of the last nine basics
  OverlapNotEqual, // disjunction of the fifth through twelfth basics
  NotEqual         // disjunction of the first twelve basics
};

/// The arithmetic predicate for a relation. The 13 basics partition all
/// span pairs, including empty spans: an empty span at the boundary or
/// inside a non-empty one classifies as starts/finishes/during, and two
/// empty spans at one offset are equal.
bool allen_holds(AllenRelation rel, Span x, Span y);

/// A universal two-variable spanner: on any document it relates exactly the
/// span pairs (x, y) satisfying the relation.
VSetAutomaton relation_spanner(AllenRelation rel, const std::string& x,
                               const std::string& y,
                               const Alphabet& alphabet);

}  // namespace spanclean
