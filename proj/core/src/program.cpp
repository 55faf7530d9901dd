#include "spanclean/program.hpp"

#include <algorithm>
#include <functional>

namespace spanclean {

namespace {

constexpr std::string_view kUnion = "∪";     // ∪
constexpr std::string_view kJoin = "⋈";      // ⋈
constexpr std::string_view kPi = "π";        // π
constexpr std::string_view kRho = "ρ";       // ρ
constexpr std::string_view kZeta = "ζ";      // ζ
constexpr std::string_view kArrow = "→";     // →
constexpr std::string_view kLBracket = "⟦";  // ⟦
constexpr std::string_view kRBracket = "⟧";  // ⟧

bool ident_start(char c) {
  return (c >= 'A' && c <= 'Z') || (c >= 'a' && c <= 'z') || c == '_';
}
bool ident_char(char c) { return ident_start(c) || (c >= '0' && c <= '9'); }

}  // namespace

class ProgramParser {
 public:
  ProgramParser(std::string_view src, const std::optional<Alphabet>& alpha_opt)
      : src_(src), cli_alphabet_(alpha_opt) {}

  SpannerProgram run() {
    if (cli_alphabet_) prog_.alphabet_ = *cli_alphabet_;
    while (true) {
      skip_ws();
      if (pos_ >= src_.size()) break;
      statement();
    }
    finish();
    return std::move(prog_);
  }

 private:
  std::string_view src_;
  std::optional<Alphabet> cli_alphabet_;
  std::size_t pos_ = 0;
  SpannerProgram prog_;
  bool saw_let_ = false;
  bool saw_output_ = false;
  std::map<std::string, NodePtr> algebra_lets_;
  std::map<std::string, NodePtr> leaf_cache_;
  std::vector<std::pair<std::string, std::string>> pending_output_;  // unused

  [[noreturn]] void fail(const std::string& msg) {
    std::size_t off = std::min(pos_ + 1, std::max<std::size_t>(src_.size(), 1));
    throw ParseError(msg, off);
  }

  void skip_ws() {
    while (pos_ < src_.size()) {
      char c = src_[pos_];
      if (c == ' ' || c == '\t' || c == '\r' || c == '\n') {
        ++pos_;
      } else if (c == '#') {
        while (pos_ < src_.size() && src_[pos_] != '\n') ++pos_;
      } else {
        break;
      }
    }
  }

  bool at(std::string_view tok) const {
    return src_.substr(pos_, tok.size()) == tok;
  }
  bool eat(std::string_view tok) {
    skip_ws();
    if (!at(tok)) return false;
    pos_ += tok.size();
    return true;
  }
  void expect(std::string_view tok, const std::string& what) {
    if (!eat(tok)) fail("expected " + what);
  }

  std::string ident() {
    skip_ws();
    if (pos_ >= src_.size() || !ident_start(src_[pos_])) fail("expected a name");
    std::size_t start = pos_;
    while (pos_ < src_.size() && ident_char(src_[pos_])) ++pos_;
    return std::string(src_.substr(start, pos_ - start));
  }

  std::vector<std::string> ident_list_braced() {
    expect("{", "'{'");
    std::vector<std::string> out;
    skip_ws();
    if (!at("}")) {
      out.push_back(ident());
      while (eat(",")) out.push_back(ident());
    }
    expect("}", "'}'");
    return out;
  }

  void statement() {
    std::size_t save = pos_;
    std::string kw = ident();
    if (kw == "alphabet") {
      if (saw_let_) fail("alphabet must be declared before any formula");
      skip_ws();
      Alphabet declared = Alphabet::printable_ascii_newline();
      if (at("\"")) {
        ++pos_;
        std::string chars;
        while (pos_ < src_.size() && src_[pos_] != '"') {
          char c = src_[pos_++];
          if (c == '\\' && pos_ < src_.size()) {
            char d = src_[pos_++];
            c = d == 'n' ? '\n' : d == 't' ? '\t' : d == 's' ? ' ' : d;
          }
          chars.push_back(c);
        }
        expect("\"", "closing quote");
        declared = Alphabet::from_chars(chars);
      } else {
        std::string name = ident();
        if (name != "ascii")
          fail("unknown alphabet preset '" + name + "' (expected ascii)");
      }
      expect(";", "';'");
      if (cli_alphabet_ && !(*cli_alphabet_ == declared))
        throw ProgramError("alphabet-conflict",
                           "program declares a different alphabet than the "
                           "one selected externally");
      prog_.alphabet_ = declared;
      prog_.alphabet_declared_ = true;
      return;
    }
    if (kw == "let") {
      saw_let_ = true;
      std::string name = ident();
      if (prog_.formulas_.count(name) || algebra_lets_.count(name))
        fail("duplicate definition of " + name);
      expect("=", "'='");
      skip_ws();
      if (at(kLBracket)) {
        pos_ += kLBracket.size();
        std::size_t start = pos_;
        std::size_t close = src_.find(kRBracket, pos_);
        if (close == std::string_view::npos) fail("unbalanced formula brackets");
        std::string_view body = src_.substr(start, close - start);
        pos_ = close + kRBracket.size();
        expect(";", "';'");
        try {
          prog_.formulas_.emplace(
              name, parse_regex_cv(body, prog_.alphabet_, &prog_.formulas_));
        } catch (const ParseError& e) {
          throw ParseError("in formula " + name + ": " + e.what(),
                           start + e.offset());
        }
        return;
      }
      NodePtr node = parse_algexpr();
      expect(";", "';'");
      auto named = std::make_shared<ProgramNode>(*node);
      named->name = name;
      algebra_lets_[name] = named;
      prog_.named_nodes_[name] = named;
      return;
    }
    if (kw == "update" && at("-")) {
      ++pos_;
      if (ident() != "vars") fail("expected update-vars");
      auto vars = ident_list_braced();
      expect(";", "';'");
      for (auto& v : vars) prog_.update_vars_.push_back(std::move(v));
      return;
    }
    if (kw == "fd") {
      FunctionalDependency fd;
      fd.scope = ident();
      expect(":", "':'");
      auto det = ident_list_braced();
      skip_ws();
      if (!eat("->") && !eat(kArrow)) fail("expected '->'");
      auto dep = ident_list_braced();
      expect(";", "';'");
      fd.determinant.insert(det.begin(), det.end());
      fd.dependents.insert(dep.begin(), dep.end());
      prog_.fds_.push_back(std::move(fd));
      return;
    }
    if (kw == "output") {
      if (saw_output_) fail("duplicate output");
      saw_output_ = true;
      skip_ws();
      // optional "name ="
      std::size_t mark = pos_;
      std::string maybe_name;
      if (pos_ < src_.size() && ident_start(src_[pos_])) {
        maybe_name = ident();
        skip_ws();
        if (at("=") && !at("==")) {
          ++pos_;
        } else {
          pos_ = mark;
          maybe_name.clear();
        }
      }
      prog_.output_name_ = maybe_name.empty() ? "output" : maybe_name;
      prog_.output_ = parse_algexpr();
      expect(";", "';'");
      return;
    }
    pos_ = save;
    fail("unknown statement '" + kw + "'");
  }

  // --- algebra expressions -------------------------------------------------

  NodePtr parse_algexpr() {
    NodePtr left = parse_join();
    std::vector<NodePtr> parts{left};
    while (true) {
      skip_ws();
      if (eat(kUnion) || eat_keyword("union")) {
        parts.push_back(parse_join());
      } else {
        break;
      }
    }
    if (parts.size() == 1) return parts[0];
    return make_union(parts);
  }

  NodePtr parse_join() {
    NodePtr left = parse_unary();
    while (true) {
      skip_ws();
      if (eat(kJoin) || eat_keyword("join")) {
        NodePtr right = parse_unary();
        left = make_join(left, right);
      } else {
        break;
      }
    }
    return left;
  }

  bool eat_keyword(std::string_view kw) {
    skip_ws();
    if (!at(kw)) return false;
    std::size_t end = pos_ + kw.size();
    if (end < src_.size() && ident_char(src_[end])) return false;
    pos_ = end;
    return true;
  }

  NodePtr parse_unary() {
    skip_ws();
    if (eat(kPi) || eat_keyword("proj")) {
      auto keep = ident_list_braced();
      expect("(", "'('");
      NodePtr child = parse_algexpr();
      expect(")", "')'");
      return make_project(child, keep);
    }
    if (eat(kRho) || eat_keyword("rename")) {
      expect("{", "'{'");
      std::map<std::string, std::string> mapping;
      do {
        std::string from = ident();
        skip_ws();
        if (!eat("->") && !eat(kArrow)) fail("expected '->'");
        std::string to = ident();
        if (!mapping.emplace(from, to).second) fail("duplicate rename of " + from);
      } while (eat(","));
      expect("}", "'}'");
      expect("(", "'('");
      NodePtr child = parse_algexpr();
      expect(")", "')'");
      return make_rename(child, mapping);
    }
    if (at(kZeta) || at("streq")) {
      if (!eat(kZeta)) eat_keyword("streq");
      eat("=");  // optional ζ=
      expect("{", "'{'");
      std::string x = ident();
      expect(",", "','");
      std::string y = ident();
      expect("}", "'}'");
      expect("(", "'('");
      NodePtr child = parse_algexpr();
      expect(")", "')'");
      return make_streq(child, x, y);
    }
    if (eat("(")) {
      NodePtr e = parse_algexpr();
      expect(")", "')'");
      return e;
    }
    std::string name = ident();
    return resolve(name);
  }

  // --- node constructors with schema checks --------------------------------

  NodePtr resolve(const std::string& name) {
    auto it = algebra_lets_.find(name);
    if (it != algebra_lets_.end()) return it->second;
    auto lc = leaf_cache_.find(name);
    if (lc != leaf_cache_.end()) return lc->second;
    auto f = prog_.formulas_.find(name);
    if (f == prog_.formulas_.end())
      throw ProgramError("unknown-formula", "unknown formula or node " + name);

    auto vars = classify_variables(f->second);
    if (vars.empty())
      throw ProgramError("schema-mismatch",
                         "formula " + name + " has no capture variables");
    bool any_exposed = false;
    for (const auto& [v, info] : vars) any_exposed |= info.exposed;
    if (!any_exposed)
      throw ProgramError("schema-mismatch",
                         "formula " + name + " has no exposed variable");

    VSetAutomaton aut = spanclean::compile(f->second);
    if (!aut.functional)
      throw ProgramError("non-functional-formula",
                         "formula " + name + " is not functional");
    prog_.compiled_.emplace(name, std::move(aut));
    prog_.leaves_.push_back(name);

    auto node = std::make_shared<ProgramNode>();
    node->kind = ProgramNode::Kind::Leaf;
    node->name = name;
    for (const auto& [v, info] : vars) node->schema.push_back(v);
    std::sort(node->schema.begin(), node->schema.end());
    leaf_cache_[name] = node;
    prog_.named_nodes_[name] = node;
    return node;
  }

  NodePtr make_union(const std::vector<NodePtr>& parts) {
    for (std::size_t i = 1; i < parts.size(); ++i)
      if (parts[i]->schema != parts[0]->schema)
        throw ProgramError("schema-mismatch",
                           "union children have different schemas");
    auto node = std::make_shared<ProgramNode>();
    node->kind = ProgramNode::Kind::Union;
    node->children = parts;
    node->schema = parts[0]->schema;
    return node;
  }

  NodePtr make_join(NodePtr a, NodePtr b) {
    auto node = std::make_shared<ProgramNode>();
    node->kind = ProgramNode::Kind::Join;
    node->children = {a, b};
    std::set<std::string> s(a->schema.begin(), a->schema.end());
    s.insert(b->schema.begin(), b->schema.end());
    node->schema.assign(s.begin(), s.end());
    return node;
  }

  NodePtr make_project(NodePtr child, const std::vector<std::string>& keep) {
    auto node = std::make_shared<ProgramNode>();
    node->kind = ProgramNode::Kind::Project;
    node->children = {child};
    for (const auto& k : keep)
      if (std::find(child->schema.begin(), child->schema.end(), k) ==
          child->schema.end())
        throw ProgramError("schema-mismatch",
                           "projection on missing variable " + k);
    node->keep = keep;
    std::set<std::string> s(keep.begin(), keep.end());
    node->schema.assign(s.begin(), s.end());
    return node;
  }

  NodePtr make_rename(NodePtr child,
                      const std::map<std::string, std::string>& mapping) {
    auto node = std::make_shared<ProgramNode>();
    node->kind = ProgramNode::Kind::Rename;
    node->children = {child};
    node->renames = mapping;
    std::set<std::string> s;
    for (const auto& v : child->schema) {
      auto it = mapping.find(v);
      std::string out = it == mapping.end() ? v : it->second;
      if (!s.insert(out).second)
        throw ProgramError("schema-mismatch",
                           "rename produces duplicate variable " + out);
    }
    for (const auto& [from, to] : mapping)
      if (std::find(child->schema.begin(), child->schema.end(), from) ==
          child->schema.end())
        throw ProgramError("schema-mismatch",
                           "rename of missing variable " + from);
    node->schema.assign(s.begin(), s.end());
    return node;
  }

  NodePtr make_streq(NodePtr child, const std::string& x,
                     const std::string& y) {
    auto node = std::make_shared<ProgramNode>();
    node->kind = ProgramNode::Kind::StringEq;
    node->children = {child};
    for (const auto& v : {x, y})
      if (std::find(child->schema.begin(), child->schema.end(), v) ==
          child->schema.end())
        throw ProgramError("schema-mismatch",
                           "string selection on missing variable " + v);
    node->sel_x = x;
    node->sel_y = y;
    node->schema = child->schema;
    return node;
  }

  void finish() {
    if (!saw_output_)
      throw ProgramError("schema-mismatch", "program has no output statement");
    for (const auto& v : prog_.update_vars_)
      if (std::find(prog_.output_->schema.begin(), prog_.output_->schema.end(),
                    v) == prog_.output_->schema.end())
        throw ProgramError("schema-mismatch",
                           "update variable " + v + " is not in the output schema");
    for (const auto& fd : prog_.fds_) {
      auto it = prog_.named_nodes_.find(fd.scope);
      if (it == prog_.named_nodes_.end())
        throw ProgramError("unknown-formula",
                           "fd declared on unknown node " + fd.scope);
      for (const auto& v : fd.determinant)
        if (std::find(it->second->schema.begin(), it->second->schema.end(), v) ==
            it->second->schema.end())
          throw ProgramError("schema-mismatch",
                             "fd variable " + v + " not in schema of " + fd.scope);
      for (const auto& v : fd.dependents)
        if (std::find(it->second->schema.begin(), it->second->schema.end(), v) ==
            it->second->schema.end())
          throw ProgramError("schema-mismatch",
                             "fd variable " + v + " not in schema of " + fd.scope);
    }
  }
};

SpannerProgram build_program(std::string_view source,
                             const std::optional<Alphabet>& alphabet) {
  ProgramParser p(source, alphabet);
  return p.run();
}

const RegexCV& SpannerProgram::formula(const std::string& name) const {
  auto it = formulas_.find(name);
  if (it == formulas_.end())
    throw ProgramError("unknown-formula", "unknown formula " + name);
  return it->second;
}

const VSetAutomaton& SpannerProgram::compiled(const std::string& name) const {
  auto it = compiled_.find(name);
  if (it == compiled_.end())
    throw ProgramError("unknown-formula", "formula " + name + " is not a leaf");
  return it->second;
}

namespace {

// For every output variable of `node`, the set of (leaf name, capture name)
// pairs that survive to its output.
using ProvMap = std::map<std::string, std::set<std::pair<std::string, std::string>>>;

ProvMap collect_prov(const NodePtr& node,
                     std::map<const ProgramNode*, ProvMap>& memo) {
  auto it = memo.find(node.get());
  if (it != memo.end()) return it->second;
  ProvMap out;
  switch (node->kind) {
    case ProgramNode::Kind::Leaf:
      for (const auto& v : node->schema) out[v].insert({node->name, v});
      break;
    case ProgramNode::Kind::Union:
    case ProgramNode::Kind::Join:
      for (const auto& c : node->children) {
        ProvMap sub = collect_prov(c, memo);
        for (auto& [v, s] : sub) out[v].insert(s.begin(), s.end());
      }
      break;
    case ProgramNode::Kind::Project: {
      ProvMap sub = collect_prov(node->children[0], memo);
      for (const auto& v : node->schema)
        if (sub.count(v)) out[v] = sub[v];
      break;
    }
    case ProgramNode::Kind::Rename: {
      ProvMap sub = collect_prov(node->children[0], memo);
      for (auto& [v, s] : sub) {
        auto r = node->renames.find(v);
        out[r == node->renames.end() ? v : r->second] = s;
      }
      break;
    }
    case ProgramNode::Kind::StringEq:
      out = collect_prov(node->children[0], memo);
      break;
  }
  memo[node.get()] = out;
  return out;
}

}  // namespace

ProvenanceSet SpannerProgram::prov(const std::string& v) const {
  if (std::find(output_->schema.begin(), output_->schema.end(), v) ==
      output_->schema.end())
    throw ProgramError("schema-mismatch",
                       "variable " + v + " is not in the output schema");
  std::map<const ProgramNode*, ProvMap> memo;
  ProvMap all = collect_prov(output_, memo);
  ProvenanceSet out;
  out.variable = v;
  for (const auto& [leaf, leafvar] : all[v]) {
    out.formulas.insert(leaf);
    auto ins = out.leaf_variable.emplace(leaf, leafvar);
    if (!ins.second && ins.first->second != leafvar)
      throw ProgramError("schema-mismatch",
                         "ambiguous provenance of " + v + " in " + leaf);
  }
  return out;
}

std::set<std::string> SpannerProgram::updatable_variables() const {
  std::set<std::string> out;
  auto nonempty_prov = [&](const std::string& v) {
    return !prov(v).formulas.empty();
  };
  if (!update_vars_.empty()) {
    for (const auto& v : update_vars_)
      if (nonempty_prov(v)) out.insert(v);
  } else {
    for (const auto& v : output_->schema)
      if (nonempty_prov(v)) out.insert(v);
  }
  return out;
}

namespace {

SpanRelation eval_node(const SpannerProgram& p, const NodePtr& node,
                       const Document& d,
                       std::map<const ProgramNode*, SpanRelation>& memo) {
  auto it = memo.find(node.get());
  if (it != memo.end()) return it->second;
  SpanRelation out;
  switch (node->kind) {
    case ProgramNode::Kind::Leaf:
      out = match_all(p.compiled(node->name), d);
      break;
    case ProgramNode::Kind::Union: {
      out = eval_node(p, node->children[0], d, memo);
      for (std::size_t i = 1; i < node->children.size(); ++i)
        out = out.unioned(eval_node(p, node->children[i], d, memo));
      break;
    }
    case ProgramNode::Kind::Join:
      out = eval_node(p, node->children[0], d, memo)
                .joined(eval_node(p, node->children[1], d, memo));
      break;
    case ProgramNode::Kind::Project:
      out = eval_node(p, node->children[0], d, memo).projected(node->schema);
      break;
    case ProgramNode::Kind::Rename:
      out = eval_node(p, node->children[0], d, memo).renamed(node->renames);
      break;
    case ProgramNode::Kind::StringEq: {
      SpanRelation child = eval_node(p, node->children[0], d, memo);
      out = SpanRelation(child.columns());
      int xi = child.column_index(node->sel_x);
      int yi = child.column_index(node->sel_y);
      for (const auto& row : child.rows()) {
        Span sx = row[static_cast<std::size_t>(xi)];
        Span sy = row[static_cast<std::size_t>(yi)];
        if (sx.slice(d.text) == sy.slice(d.text)) out.add_row(row);
      }
      break;
    }
  }
  memo[node.get()] = out;
  return out;
}

}  // namespace

SpanRelation SpannerProgram::evaluate(const Document& d) const {
  std::map<const ProgramNode*, SpanRelation> memo;
  return eval_node(*this, output_, d, memo);
}

RegexCV SpannerProgram::domain_of(const std::string& v) const {
  ProvenanceSet ps = prov(v);
  if (ps.formulas.empty())
    throw ProgramError("schema-mismatch", "variable " + v + " has no provenance");
  const std::string& leaf = *ps.formulas.begin();
  const std::string& leafvar = ps.leaf_variable.at(leaf);
  auto disjuncts = disjunctive_form(formula(leaf), leafvar);
  return enclosed_regex(disjuncts.at(0), leafvar);
}

}  // namespace spanclean
