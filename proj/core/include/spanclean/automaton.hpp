#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "spanclean/alphabet.hpp"
#include "spanclean/regex.hpp"
#include "spanclean/text.hpp"

namespace spanclean {

/// NFA over the alphabet extended with variable operations. A run reads the
/// document left to right; character edges consume one character, open/close
/// edges mark the current offset as the start/end of the variable's span and
/// consume nothing. A run is valid when it opens and closes every variable
/// exactly once; the span relation of the automaton on a document collects
/// the variable assignments of all valid accepting runs.
class VSetAutomaton {
 public:
  enum class EdgeKind : uint8_t { Chars, Open, Close, Eps };

  struct Edge {
    EdgeKind kind;
    uint16_t var = 0;  // Open/Close
    CharSet cls;       // Chars
    uint32_t to = 0;
  };

  struct State {
    bool final_state = false;
    uint64_t status = 0;  // 2 bits per variable when status-annotated
    std::vector<Edge> edges;
  };

  std::vector<std::string> vars;  // sorted, unique; <= 32 variables
  uint32_t initial = 0;
  std::vector<State> states;
  Alphabet alphabet = Alphabet::printable_ascii_newline();

  // Normal-form flags, maintained by every constructor in this module.
  bool functional = false;    // every accepting run is a valid run
  bool well_behaved = false;  // per-state variable statuses are consistent
  bool pruned = false;        // every state lies on some accepting path
  bool op_closed = false;     // boundary operations in canonical order

  int var_index(std::string_view name) const {
    for (std::size_t i = 0; i < vars.size(); ++i)
      if (vars[i] == name) return static_cast<int>(i);
    return -1;
  }

  std::string to_dot() const;  // debug dump
};

/// Compiles a regex with capture variables. The result evaluates to the
/// same span relation on every document and is in normal form; the
/// functional flag reflects whether every accepting run of the source
/// expression marks each variable exactly once.
VSetAutomaton compile(const RegexCV& r);

/// Brings an automaton into normal form: states annotated with consistent
/// variable statuses (restricting runs to valid ones), eps edges removed,
/// dead states pruned, boundary operations in canonical order. Preserves
/// the span relation of every functional automaton.
VSetAutomaton normalize(const VSetAutomaton& a);

bool is_functional(const VSetAutomaton& a);

/// All-matches evaluation. Rejects non-functional automata.
SpanRelation match_all(const VSetAutomaton& a, const Document& d);

struct EmptinessWitness {
  std::string doc;
  std::map<std::string, Span> row;
};

/// Nonempty result carries the shortest witness document (ties broken by
/// smallest character choice) and one valid accepting row on it.
std::optional<EmptinessWitness> emptiness(const VSetAutomaton& a);

VSetAutomaton union_a(const VSetAutomaton& a, const VSetAutomaton& b);
VSetAutomaton project_a(const VSetAutomaton& a,
                        const std::set<std::string>& keep);
VSetAutomaton join_a(const VSetAutomaton& a, const VSetAutomaton& b);
VSetAutomaton rename_a(const VSetAutomaton& a,
                       const std::map<std::string, std::string>& mapping);

// --- plain regular-language utilities (captures erased) -------------------

/// Language emptiness of L(a) \ L(b) over the automaton's alphabet, with a
/// shortest witness string when nonempty. Variables are erased first.
std::optional<std::string> language_difference_witness(const VSetAutomaton& a,
                                                       const VSetAutomaton& b);

/// Membership of a string in the variable-erased language.
bool language_member(const VSetAutomaton& a, std::string_view s);

}  // namespace spanclean
