#include "spanclean/verifier.hpp"

#include <algorithm>
#include <functional>
#include <sstream>

#include <json.hpp>

namespace spanclean {

namespace {

// Fresh variable names for the two sides of a relation construction.
std::pair<std::string, std::string> fresh_pair(const std::set<std::string>& used) {
  std::string x = "X", y = "Y";
  int i = 0;
  while (used.count(x) || used.count(y)) {
    ++i;
    x = "X" + std::to_string(i);
    y = "Y" + std::to_string(i);
  }
  return {x, y};
}

// Capture variables in first-appearance order.
void appearance_walk(const RegexPtr& n, std::vector<std::string>& out) {
  if (n->kind == RegexKind::Capture) {
    if (std::find(out.begin(), out.end(), n->var) == out.end())
      out.push_back(n->var);
  }
  for (const auto& c : n->children) appearance_walk(c, out);
}
std::vector<std::string> appearance_order(const RegexCV& r) {
  std::vector<std::string> out;
  if (r.root()) appearance_walk(r.root(), out);
  return out;
}

std::string first_exposed(const RegexCV& r) {
  auto info = classify_variables(r);
  for (const auto& v : appearance_order(r))
    if (info.at(v).exposed) return v;
  throw Error("formula has no exposed variable");
}

std::optional<Witness> to_witness(const std::optional<EmptinessWitness>& w) {
  if (!w) return std::nullopt;
  Witness out;
  out.doc = w->doc;
  out.row = w->row;
  return out;
}

CheckResult from_emptiness(std::string id,
                           const std::optional<EmptinessWitness>& w,
                           const std::string& fail_detail) {
  CheckResult r;
  r.id = std::move(id);
  if (w) {
    r.status = CheckResult::Status::Fail;
    r.detail = fail_detail;
    r.witness = to_witness(w);
  }
  return r;
}

VSetAutomaton project_rename(const VSetAutomaton& a,
                             const std::map<std::string, std::string>& renames,
                             const std::set<std::string>& keep) {
  return project_a(rename_a(a, renames), keep);
}

}  // namespace

UpdateModel UpdateModel::from_program(const SpannerProgram& p) {
  UpdateModel u;
  for (const auto& v : p.updatable_variables()) {
    UpdateModel::Entry e;
    e.variable = v;
    e.domain = p.domain_of(v);
    e.output_chars = char_set(e.domain);
    u.entries.push_back(std::move(e));
  }
  return u;
}

// ---------------------------------------------------------------------------
// domain consistency
// ---------------------------------------------------------------------------

CheckResult check_domain_consistency(const SpannerProgram& p) {
  CheckResult r;
  r.id = "DomainConsistency";
  for (const auto& v : p.updatable_variables()) {
    ProvenanceSet ps = p.prov(v);
    // every enclosed regex of v, across all disjuncts of all provenance
    // formulas
    std::vector<std::pair<std::string, RegexCV>> domains;
    for (const auto& e : ps.formulas) {
      const std::string& leafvar = ps.leaf_variable.at(e);
      std::vector<RegexCV> disjuncts;
      try {
        disjuncts = disjunctive_form(p.formula(e), leafvar);
      } catch (const Error& err) {
        r.status = CheckResult::Status::Fail;
        r.detail = "cannot build the disjunctive form of " + e + " for " +
                   leafvar + ": " + err.what();
        return r;
      }
      for (std::size_t i = 0; i < disjuncts.size(); ++i)
        domains.push_back({e + "#" + std::to_string(i + 1),
                           enclosed_regex(disjuncts[i], leafvar)});
    }
    for (std::size_t i = 0; i + 1 < domains.size(); ++i) {
      for (std::size_t j = i + 1; j < domains.size(); ++j) {
        VSetAutomaton a = compile(domains[i].second);
        VSetAutomaton b = compile(domains[j].second);
        auto d1 = language_difference_witness(a, b);
        auto d2 = language_difference_witness(b, a);
        if (d1 || d2) {
          r.status = CheckResult::Status::Fail;
          r.detail = "domains of " + v + " differ between " + domains[i].first +
                     " and " + domains[j].first;
          Witness w;
          w.doc = d1 ? *d1 : *d2;
          r.witness = w;
          return r;
        }
      }
    }
  }
  return r;
}

// ---------------------------------------------------------------------------
// conflict constructions
// ---------------------------------------------------------------------------

CheckResult check_case1(const SpannerProgram& p, const std::string& formula,
                        const std::string& v) {
  const VSetAutomaton& e = p.compiled(formula);
  auto [X, Y] = fresh_pair(svars(p.formula(formula)));
  VSetAutomaton left = project_rename(e, {{v, X}}, {X});
  VSetAutomaton right = project_rename(e, {{v, Y}}, {Y});
  VSetAutomaton rel =
      relation_spanner(AllenRelation::OverlapNotEqual, X, Y, e.alphabet);
  auto w = emptiness(join_a(join_a(left, rel), right));
  return from_emptiness(
      "CaseI(" + formula + ", " + v + ")", w,
      "two distinct overlapping spans can be extracted as " + v);
}

CheckResult check_case2(const SpannerProgram& p, const std::string& formula,
                        const std::string& v) {
  CheckResult agg;
  agg.id = "CaseII(" + formula + ", " + v + ")";
  const VSetAutomaton& e = p.compiled(formula);
  std::set<std::string> vars = svars(p.formula(formula));
  auto [X, Y] = fresh_pair(vars);
  for (const auto& z : vars) {
    if (z == v) continue;
    VSetAutomaton left = project_rename(e, {{z, X}}, {X, v});
    VSetAutomaton right = project_rename(e, {{z, Y}}, {Y, v});
    VSetAutomaton rel =
        relation_spanner(AllenRelation::NotEqual, X, Y, e.alphabet);
    auto w = emptiness(join_a(join_a(left, rel), right));
    if (w) {
      agg.status = CheckResult::Status::Fail;
      agg.id = "CaseII(" + formula + ", " + v + ", " + z + ")";
      agg.detail = "one span extracted as " + v +
                   " can appear in two rows that differ on " + z;
      agg.witness = to_witness(w);
      return agg;
    }
  }
  return agg;
}

CheckResult check_case3(const SpannerProgram& p, const std::string& formula,
                        const std::string& v) {
  CheckResult agg;
  agg.id = "CaseIII(" + formula + ", " + v + ")";
  const VSetAutomaton& e = p.compiled(formula);
  std::set<std::string> vars = svars(p.formula(formula));
  auto [X, Y] = fresh_pair(vars);
  for (const auto& z : vars) {
    if (z == v) continue;
    VSetAutomaton left = project_rename(e, {{v, X}}, {X});
    VSetAutomaton right = rename_a(e, {{z, Y}});
    VSetAutomaton rel = relation_spanner(AllenRelation::Overlap, X, Y, e.alphabet);
    auto w = emptiness(join_a(join_a(left, rel), right));
    if (w) {
      agg.status = CheckResult::Status::Fail;
      agg.id = "CaseIII(" + formula + ", " + v + ", " + z + ")";
      agg.detail = "a span extracted as " + v +
                   " can overlap a span extracted as " + z;
      agg.witness = to_witness(w);
      return agg;
    }
  }
  return agg;
}

CheckResult check_case4(const SpannerProgram& p, const std::string& formula,
                        const std::string& v) {
  CheckResult agg;
  agg.id = "CaseIV(" + formula + ", " + v + ")";
  const VSetAutomaton& e = p.compiled(formula);
  Contextualized ctx;
  try {
    ctx = contextualize(p.formula(formula), v);
  } catch (const Error& err) {
    agg.status = CheckResult::Status::Fail;
    agg.detail = std::string("cannot contextualize: ") + err.what();
    return agg;
  }
  VSetAutomaton c = compile(ctx.formula);
  std::set<std::string> cvars = svars(ctx.formula);
  std::set<std::string> used = cvars;
  used.insert(svars(p.formula(formula)).begin(),
              svars(p.formula(formula)).end());
  auto [X, Y] = fresh_pair(used);
  for (const auto& z : cvars) {
    if (z == v) continue;
    VSetAutomaton left = project_rename(e, {{v, X}}, {X});
    VSetAutomaton right = rename_a(c, {{z, Y}});
    VSetAutomaton rel = relation_spanner(AllenRelation::Overlap, X, Y, e.alphabet);
    auto w = emptiness(join_a(join_a(left, rel), right));
    if (w) {
      agg.status = CheckResult::Status::Fail;
      agg.id = "CaseIV(" + formula + ", " + v + ", " + z + ")";
      agg.detail = "a span extracted as " + v +
                   " can overlap a region the formula consumes as " + z;
      agg.witness = to_witness(w);
      return agg;
    }
  }
  return agg;
}

CheckResult check_inter_overlap(const SpannerProgram& p,
                                const std::string& formula,
                                const std::string& other,
                                const std::string& v) {
  CheckResult agg;
  agg.id = "InterOverlap(" + formula + ", " + other + ", " + v + ")";
  if (formula == other) throw Error("inter-formula check needs distinct formulas");
  const VSetAutomaton& e = p.compiled(formula);

  std::string vprime;
  Contextualized ctx;
  try {
    vprime = first_exposed(p.formula(other));
    ctx = contextualize(p.formula(other), vprime);
  } catch (const Error& err) {
    agg.status = CheckResult::Status::Fail;
    agg.detail = std::string("cannot contextualize ") + other + ": " + err.what();
    return agg;
  }
  VSetAutomaton s = compile(ctx.formula);
  std::set<std::string> svars_s = svars(ctx.formula);
  std::set<std::string> used = svars_s;
  used.insert(svars(p.formula(formula)).begin(),
              svars(p.formula(formula)).end());
  auto [X, Y] = fresh_pair(used);

  for (const auto& vpp : svars_s) {
    VSetAutomaton left = project_rename(e, {{v, X}}, {X});
    VSetAutomaton right = project_rename(s, {{vpp, Y}}, {Y});
    VSetAutomaton rel = relation_spanner(AllenRelation::Overlap, X, Y, e.alphabet);
    auto w = emptiness(join_a(join_a(left, rel), right));
    if (w) {
      agg.status = CheckResult::Status::Fail;
      agg.id = "InterOverlap(" + formula + ", " + other + ", " + v + ", " + vpp + ")";
      agg.detail = "a span extracted as " + v + " in " + formula +
                   " can overlap the region " + other + " consumes as " + vpp +
                   " (contextualized by " + vprime + ")";
      agg.witness = to_witness(w);
      return agg;
    }
  }
  agg.detail = "contextualized " + other + " by " + vprime;
  return agg;
}

// ---------------------------------------------------------------------------
// characters, joins, selection
// ---------------------------------------------------------------------------

CheckResult check_respects_characters(const SpannerProgram& p,
                                      const UpdateModel& u,
                                      CharSet* restricted_out) {
  CheckResult r;
  r.id = "RespectsCharacters";
  const Alphabet& sigma = p.alphabet();
  CharSet restricted;
  for (const auto& name : p.leaf_formulas()) {
    const RegexCV& e = p.formula(name);
    Contextualized ctx;
    try {
      ctx = contextualize(e, first_exposed(e));
    } catch (const Error& err) {
      r.status = CheckResult::Status::Fail;
      r.detail = "cannot contextualize " + name + ": " + err.what();
      return r;
    }
    for (const auto& uni : uncovered_unigrams(ctx.formula)) {
      CharSet excluded = sigma.set();
      excluded.subtract(uni.chars);
      restricted.unite(excluded);
    }
  }
  if (restricted_out) *restricted_out = restricted;

  for (const auto& entry : u.entries) {
    ProvenanceSet ps = p.prov(entry.variable);
    for (const auto& e : ps.formulas) {
      const std::string& leafvar = ps.leaf_variable.at(e);
      std::vector<RegexCV> disjuncts = disjunctive_form(p.formula(e), leafvar);
      for (const auto& d : disjuncts) {
        CharSet good = char_set(enclosed_regex(d, leafvar));
        CharSet bad = good & restricted;
        if (!bad.empty()) {
          r.status = CheckResult::Status::Fail;
          r.detail = "updates to " + entry.variable +
                     " may insert or delete restricted characters {" +
                     escape_value(bad.chars()) + "} (domain in " + e + ")";
          return r;
        }
      }
    }
  }
  return r;
}

CheckResult check_non_expanding(const SpannerProgram& p) {
  CheckResult r;
  r.id = "NonExpanding";

  // attribute closure under the FDs declared for one node
  auto closure = [&](const std::string& scope,
                     std::set<std::string> attrs) {
    bool changed = true;
    while (changed) {
      changed = false;
      for (const auto& fd : p.fds()) {
        if (fd.scope != scope) continue;
        bool applies = true;
        for (const auto& a : fd.determinant)
          if (!attrs.count(a)) {
            applies = false;
            break;
          }
        if (!applies) continue;
        for (const auto& d : fd.dependents)
          if (attrs.insert(d).second) changed = true;
      }
    }
    return attrs;
  };

  std::function<bool(const NodePtr&)> walk = [&](const NodePtr& node) -> bool {
    for (const auto& c : node->children)
      if (!walk(c)) return false;
    if (node->kind != ProgramNode::Kind::Join) return true;
    const NodePtr& left = node->children[0];
    const NodePtr& right = node->children[1];
    std::set<std::string> keys;
    for (const auto& v : left->schema)
      if (std::find(right->schema.begin(), right->schema.end(), v) !=
          right->schema.end())
        keys.insert(v);
    if (keys.empty()) {
      r.status = CheckResult::Status::Fail;
      r.detail = "join has an empty key set (cartesian product)";
      return false;
    }
    for (const NodePtr& side : {left, right}) {
      std::string scope = side->name;
      std::set<std::string> cl = closure(scope, keys);
      std::vector<std::string> missing;
      for (const auto& v : side->schema)
        if (!cl.count(v)) missing.push_back(v);
      if (!missing.empty()) {
        r.status = CheckResult::Status::Fail;
        std::string side_name = scope.empty() ? "an unnamed operand" : scope;
        r.detail = "join over {";
        bool first = true;
        for (const auto& k : keys) {
          if (!first) r.detail += ",";
          r.detail += k;
          first = false;
        }
        r.detail += "} is not one-to-one: the dependency of {";
        for (std::size_t i = 0; i < missing.size(); ++i) {
          if (i) r.detail += ",";
          r.detail += missing[i];
        }
        r.detail += "} on the keys is not declared functional in " + side_name;
        return false;
      }
    }
    return true;
  };
  walk(p.output());
  return r;
}

CheckResult check_restricted_selection(const SpannerProgram& p) {
  CheckResult r;
  r.id = "RestrictedStringSelection";
  std::set<std::string> upd = p.updatable_variables();
  std::function<bool(const NodePtr&)> walk = [&](const NodePtr& node) -> bool {
    for (const auto& c : node->children)
      if (!walk(c)) return false;
    if (node->kind != ProgramNode::Kind::StringEq) return true;
    for (const auto& v : {node->sel_x, node->sel_y}) {
      if (upd.count(v)) {
        r.status = CheckResult::Status::Fail;
        r.detail = "string selection over update variable " + v;
        return false;
      }
    }
    return true;
  };
  walk(p.output());
  return r;
}

// ---------------------------------------------------------------------------
// orchestration
// ---------------------------------------------------------------------------

namespace {

CheckResult::Status aggregate(const std::vector<CheckResult>& checks) {
  for (const auto& c : checks)
    if (c.status == CheckResult::Status::Fail) return CheckResult::Status::Fail;
  for (const auto& c : checks)
    if (c.status == CheckResult::Status::Skipped)
      return CheckResult::Status::Skipped;
  return CheckResult::Status::Pass;
}

}  // namespace

VerificationReport verify_stability(const SpannerProgram& p,
                                    const UpdateModel& u) {
  VerificationReport report;

  report.domain_consistent.name = "domain-consistent";
  report.domain_consistent.checks.push_back(check_domain_consistency(p));
  report.domain_consistent.status = aggregate(report.domain_consistent.checks);

  report.conflict_free.name = "conflict-free";
  std::set<std::string> upd = p.updatable_variables();
  for (const auto& v : upd) {
    ProvenanceSet ps = p.prov(v);
    for (const auto& e : ps.formulas) {
      const std::string& lv = ps.leaf_variable.at(e);
      report.conflict_free.checks.push_back(check_case1(p, e, lv));
      report.conflict_free.checks.push_back(check_case2(p, e, lv));
      report.conflict_free.checks.push_back(check_case3(p, e, lv));
      report.conflict_free.checks.push_back(check_case4(p, e, lv));
      for (const auto& other : p.leaf_formulas()) {
        if (other == e) continue;
        report.conflict_free.checks.push_back(
            check_inter_overlap(p, e, other, lv));
      }
    }
  }
  report.conflict_free.status = aggregate(report.conflict_free.checks);

  report.respects_characters.name = "respects-characters";
  if (report.conflict_free.status == CheckResult::Status::Pass) {
    report.respects_characters.checks.push_back(
        check_respects_characters(p, u, &report.restricted_chars));
  } else {
    CheckResult skipped;
    skipped.id = "RespectsCharacters";
    skipped.status = CheckResult::Status::Skipped;
    skipped.detail = "not evaluated: requires a conflict-free program";
    report.respects_characters.checks.push_back(std::move(skipped));
  }
  report.respects_characters.status =
      aggregate(report.respects_characters.checks);

  report.non_expanding.name = "non-expanding";
  report.non_expanding.checks.push_back(check_non_expanding(p));
  report.non_expanding.status = aggregate(report.non_expanding.checks);

  report.restricted_selection.name = "restricted-string-selection";
  report.restricted_selection.checks.push_back(check_restricted_selection(p));
  report.restricted_selection.status =
      aggregate(report.restricted_selection.checks);

  report.stable =
      report.domain_consistent.status == CheckResult::Status::Pass &&
      report.conflict_free.status == CheckResult::Status::Pass &&
      report.respects_characters.status == CheckResult::Status::Pass &&
      report.non_expanding.status == CheckResult::Status::Pass &&
      report.restricted_selection.status == CheckResult::Status::Pass;
  return report;
}

// ---------------------------------------------------------------------------
// report serialization
// ---------------------------------------------------------------------------

namespace {

const char* status_str(CheckResult::Status s) {
  switch (s) {
    case CheckResult::Status::Pass:
      return "pass";
    case CheckResult::Status::Fail:
      return "fail";
    case CheckResult::Status::Skipped:
      return "skipped";
  }
  return "?";
}

void append_condition(std::ostringstream& os, const ConditionReport& c) {
  os << c.name << ": " << status_str(c.status) << "\n";
  for (const auto& chk : c.checks) {
    if (chk.status == CheckResult::Status::Pass && c.checks.size() > 1) continue;
    os << "  " << chk.id << ": " << status_str(chk.status);
    if (!chk.detail.empty()) os << " - " << chk.detail;
    os << "\n";
    if (chk.witness) {
      os << "    witness document: \"" << escape_value(chk.witness->doc)
         << "\"\n";
      for (const auto& [var, sp] : chk.witness->row)
        os << "    " << var << " = " << to_string(sp) << "\n";
    }
  }
}

}  // namespace

std::string VerificationReport::to_text() const {
  std::ostringstream os;
  os << "verdict: " << (stable ? "stable" : "not verified") << "\n";
  append_condition(os, domain_consistent);
  append_condition(os, conflict_free);
  append_condition(os, respects_characters);
  if (!restricted_chars.empty())
    os << "  restricted characters: {" << escape_value(restricted_chars.chars())
       << "}\n";
  append_condition(os, non_expanding);
  append_condition(os, restricted_selection);
  return os.str();
}

std::string VerificationReport::to_json() const {
  nlohmann::json j;
  j["stable"] = stable;
  auto cond = [&](const ConditionReport& c) {
    nlohmann::json jc;
    jc["status"] = status_str(c.status);
    jc["checks"] = nlohmann::json::array();
    for (const auto& chk : c.checks) {
      nlohmann::json jk;
      jk["id"] = chk.id;
      jk["status"] = status_str(chk.status);
      if (!chk.detail.empty()) jk["detail"] = chk.detail;
      if (chk.witness) {
        jk["witness"]["doc"] = chk.witness->doc;
        for (const auto& [var, sp] : chk.witness->row)
          jk["witness"]["row"][var] = {sp.start, sp.end};
      }
      jc["checks"].push_back(jk);
    }
    return jc;
  };
  j["conditions"]["domain-consistent"] = cond(domain_consistent);
  j["conditions"]["conflict-free"] = cond(conflict_free);
  j["conditions"]["respects-characters"] = cond(respects_characters);
  j["conditions"]["non-expanding"] = cond(non_expanding);
  j["conditions"]["restricted-string-selection"] = cond(restricted_selection);
  j["restricted-characters"] = restricted_chars.chars();
  return j.dump(2);
}

}  // namespace spanclean
