#pragma once

#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "spanclean/automaton.hpp"
#include "spanclean/regex.hpp"
#include "spanclean/text.hpp"

namespace spanclean {

struct FunctionalDependency {
  std::string scope;  // name of the program node the FD is asserted on
  std::set<std::string> determinant;
  std::set<std::string> dependents;
};

struct ProgramNode;
using NodePtr = std::shared_ptr<const ProgramNode>;

struct ProgramNode {
  enum class Kind { Leaf, Union, Project, Join, StringEq, Rename };
  Kind kind = Kind::Leaf;
  std::string name;                 // leaf formula name or let-bound name
  std::vector<NodePtr> children;
  std::vector<std::string> keep;    // Project
  std::map<std::string, std::string> renames;  // Rename
  std::string sel_x, sel_y;         // StringEq
  std::vector<std::string> schema;  // sorted, computed bottom-up
};

struct ProvenanceSet {
  std::string variable;
  std::set<std::string> formulas;
  // The capture name inside each formula that feeds the output variable
  // (differs from `variable` when renames intervene).
  std::map<std::string, std::string> leaf_variable;
};

/// A spanner program: named extraction formulas, an operator tree over
/// them, declared update variables and functional dependencies. Immutable
/// after build; leaf formulas are compiled eagerly.
class SpannerProgram {
 public:
  const std::string& name() const { return output_name_; }
  const Alphabet& alphabet() const { return alphabet_; }
  const NodePtr& output() const { return output_; }
  const std::vector<std::string>& output_schema() const {
    return output_->schema;
  }

  /// Names of extraction formulas that actually occur as leaves, in
  /// declaration order.
  const std::vector<std::string>& leaf_formulas() const { return leaves_; }
  const RegexCV& formula(const std::string& name) const;
  const VSetAutomaton& compiled(const std::string& name) const;

  const std::vector<FunctionalDependency>& fds() const { return fds_; }
  const std::vector<std::string>& declared_update_vars() const {
    return update_vars_;
  }

  ProvenanceSet prov(const std::string& v) const;
  std::set<std::string> updatable_variables() const;

  SpanRelation evaluate(const Document& d) const;

  /// Domain of an update variable: the regex enclosed by its capture in one
  /// provenance formula (domain consistency makes the choice immaterial).
  RegexCV domain_of(const std::string& v) const;

  friend class ProgramParser;

 private:
  std::string output_name_;
  Alphabet alphabet_ = Alphabet::printable_ascii_newline();
  std::map<std::string, RegexCV> formulas_;  // every let-bound regex
  std::vector<std::string> leaves_;
  std::map<std::string, VSetAutomaton> compiled_;
  std::map<std::string, NodePtr> named_nodes_;
  NodePtr output_;
  std::vector<FunctionalDependency> fds_;
  std::vector<std::string> update_vars_;
  bool alphabet_declared_ = false;

 public:
  bool alphabet_declared() const { return alphabet_declared_; }
};

/// Parses and validates a program file. When `alphabet` is given it must
/// agree with any alphabet declared in the program header.
SpannerProgram build_program(
    std::string_view source,
    const std::optional<Alphabet>& alphabet = std::nullopt);

}  // namespace spanclean
