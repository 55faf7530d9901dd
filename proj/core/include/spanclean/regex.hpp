#pragma once

#include <map>
#include <memory>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "spanclean/alphabet.hpp"
#include "spanclean/error.hpp"

namespace spanclean {

enum class RegexKind {
  EmptyLang,  // matches nothing
  Epsilon,    // the empty string
  Literal,    // one character
  Range,      // [lo,hi]
  Any,        // the whole alphabet
  Subtract,   // alphabet expression minus one character
  Alt,        // disjunction
  Concat,     // juxtaposition
  Star,       // Kleene star
  Capture     // var{ body }
};

struct RegexNode;
using RegexPtr = std::shared_ptr<const RegexNode>;

struct RegexNode {
  RegexKind kind;
  char lit = 0;                    // Literal, and the removed char of Subtract
  char lo = 0, hi = 0;             // Range
  std::string var;                 // Capture
  std::vector<RegexPtr> children;  // Alt (>=2), Concat (>=2), Star (1),
                                   // Capture (1), Subtract (1)
};

namespace rx {
RegexPtr empty_lang();
RegexPtr epsilon();
RegexPtr lit(char c);
RegexPtr range(char lo, char hi);
RegexPtr any();
RegexPtr subtract(RegexPtr base, char c);
RegexPtr alt(std::vector<RegexPtr> parts);
RegexPtr concat(std::vector<RegexPtr> parts);
RegexPtr star(RegexPtr body);
RegexPtr capture(std::string var, RegexPtr body);
bool equal(const RegexPtr& a, const RegexPtr& b);
}  // namespace rx

/// A regex with capture variables together with the alphabet it is
/// interpreted over. Immutable.
class RegexCV {
 public:
  RegexCV() = default;
  RegexCV(RegexPtr root, Alphabet alphabet)
      : root_(std::move(root)), alphabet_(std::move(alphabet)) {}

  const RegexPtr& root() const { return root_; }
  const Alphabet& alphabet() const { return alphabet_; }

  std::string to_string() const;

 private:
  RegexPtr root_;
  Alphabet alphabet_ = Alphabet::printable_ascii_newline();
};

/// Parses the surface syntax. `definitions` resolves @name references by
/// splicing in previously parsed trees.
///
/// Tokens: bare characters are literals; `name{...}` is a capture; `∨` or
/// `|` is disjunction; `[a-z]`/`[a,z]` are ranges; `Σ` the whole alphabet;
/// `-`/`−` after an alphabet expression is subtraction; `*` star; `ε`
/// epsilon; `∅` the empty language; `␣` or `\s` a space; `\n` newline;
/// `"..."` a literal string; `@name` a reference; `#` starts a comment;
/// other whitespace separates tokens. `⟦ ... ⟧` may bracket the whole
/// expression.
RegexCV parse_regex_cv(std::string_view source,
                       const Alphabet& alphabet = Alphabet::printable_ascii_newline(),
                       const std::map<std::string, RegexCV>* definitions = nullptr);

struct VariableInfo {
  std::string name;
  bool exposed = false;
  std::vector<std::vector<int>> occurrence_paths;  // child indices from root
};

std::set<std::string> svars(const RegexCV& r);
std::map<std::string, VariableInfo> classify_variables(const RegexCV& r);

/// Pulls every disjunction that has `v` in a disjunct up over
/// concatenations, yielding top-level disjuncts whose union is equivalent
/// to `r`. Requires `v` exposed in `r` and not under a star.
std::vector<RegexCV> disjunctive_form(const RegexCV& r, const std::string& v);

/// The regex enclosed by the unique capture of `v` in `r` (used on
/// disjunctive_form output, where each disjunct captures `v` exactly once).
RegexCV enclosed_regex(const RegexCV& r, const std::string& v);

struct Contextualized {
  RegexCV formula;
  std::vector<std::string> context_vars;  // fresh variables, in order
};

/// Wraps every maximal region that is not a capture, not a unigram star
/// and not epsilon-only in a fresh context variable. Requires `v` exposed.
/// Throws when a disjunction or star outside all captures contains a
/// capture (no faithful functional contextualization exists then).
Contextualized contextualize(const RegexCV& r, const std::string& v);

struct UnigramStar {
  std::vector<int> path;  // child indices from root
  CharSet chars;
};

/// Star subexpressions outside all captures whose body matches only
/// length-1 strings.
std::vector<UnigramStar> uncovered_unigrams(const RegexCV& r);

/// Characters occurring in some member of L(r) (captures erased).
CharSet char_set(const RegexCV& r);

}  // namespace spanclean
