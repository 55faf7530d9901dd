#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "spanclean/allen.hpp"
#include "spanclean/automaton.hpp"
#include "spanclean/program.hpp"

namespace spanclean {

/// Per-update-variable description of how values may change: the domain is
/// the regex enclosed by the variable in the program, updates are either a
/// finite replacement mapping or an opaque function with a declared output
/// character set. Replacements must stay inside the domain language.
struct UpdateModel {
  struct Entry {
    std::string variable;
    RegexCV domain;
    std::map<std::string, std::string> replacements;  // optional
    CharSet output_chars;                             // declared outputs
  };
  std::vector<Entry> entries;

  /// Derives the model from the program's declared update variables; every
  /// replacement value allowed later is a member of the variable's domain.
  static UpdateModel from_program(const SpannerProgram& p);
};

struct Witness {
  std::string doc;
  std::map<std::string, Span> row;
};

struct CheckResult {
  enum class Status { Pass, Fail, Skipped };
  Status status = Status::Pass;
  std::string id;      // e.g. "CaseII(E11, U, M)"
  std::string detail;  // human-readable explanation
  std::optional<Witness> witness;

  bool passed() const { return status == Status::Pass; }
};

struct ConditionReport {
  std::string name;
  CheckResult::Status status = CheckResult::Status::Pass;
  std::vector<CheckResult> checks;
};

struct VerificationReport {
  ConditionReport domain_consistent;
  ConditionReport conflict_free;          // CaseI..IV and InterOverlap checks
  ConditionReport respects_characters;    // includes the restricted set
  ConditionReport non_expanding;
  ConditionReport restricted_selection;
  CharSet restricted_chars;
  bool stable = false;

  std::string to_text() const;
  std::string to_json() const;
};

// Individual condition checks. All of them are pure; each failing check
// carries a witness document where the construction admits a row.
CheckResult check_domain_consistency(const SpannerProgram& p);
CheckResult check_case1(const SpannerProgram& p, const std::string& formula,
                        const std::string& v);
CheckResult check_case2(const SpannerProgram& p, const std::string& formula,
                        const std::string& v);
CheckResult check_case3(const SpannerProgram& p, const std::string& formula,
                        const std::string& v);
CheckResult check_case4(const SpannerProgram& p, const std::string& formula,
                        const std::string& v);
CheckResult check_inter_overlap(const SpannerProgram& p,
                                const std::string& formula,
                                const std::string& other,
                                const std::string& v);
CheckResult check_respects_characters(const SpannerProgram& p,
                                      const UpdateModel& u,
                                      CharSet* restricted_out = nullptr);
CheckResult check_non_expanding(const SpannerProgram& p);
CheckResult check_restricted_selection(const SpannerProgram& p);

/// Runs all five sufficient conditions in dependency order; the program is
/// reported stable only when every condition passes. A failed conflict
/// check skips the respects-characters test (its construction assumes a
/// conflict-free program).
VerificationReport verify_stability(const SpannerProgram& p,
                                    const UpdateModel& u);

}  // namespace spanclean
