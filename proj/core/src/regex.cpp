#include "spanclean/regex.hpp"

#include <algorithm>
#include <cassert>
#include <functional>

namespace spanclean {

namespace rx {

static RegexPtr node(RegexKind k) {
  auto n = std::make_shared<RegexNode>();
  n->kind = k;
  return n;
}

RegexPtr empty_lang() { return node(RegexKind::EmptyLang); }
RegexPtr epsilon() { return node(RegexKind::Epsilon); }

RegexPtr lit(char c) {
  auto n = std::make_shared<RegexNode>();
  n->kind = RegexKind::Literal;
  n->lit = c;
  return n;
}

RegexPtr range(char lo, char hi) {
  auto n = std::make_shared<RegexNode>();
  n->kind = RegexKind::Range;
  n->lo = lo;
  n->hi = hi;
  return n;
}

RegexPtr any() { return node(RegexKind::Any); }

RegexPtr subtract(RegexPtr base, char c) {
  assert(base->kind == RegexKind::Any || base->kind == RegexKind::Subtract);
  auto n = std::make_shared<RegexNode>();
  n->kind = RegexKind::Subtract;
  n->lit = c;
  n->children = {std::move(base)};
  return n;
}

RegexPtr alt(std::vector<RegexPtr> parts) {
  assert(parts.size() >= 1);
  if (parts.size() == 1) return parts[0];
  auto n = std::make_shared<RegexNode>();
  n->kind = RegexKind::Alt;
  n->children = std::move(parts);
  return n;
}

RegexPtr concat(std::vector<RegexPtr> parts) {
  assert(parts.size() >= 1);
  if (parts.size() == 1) return parts[0];
  auto n = std::make_shared<RegexNode>();
  n->kind = RegexKind::Concat;
  n->children = std::move(parts);
  return n;
}

RegexPtr star(RegexPtr body) {
  auto n = std::make_shared<RegexNode>();
  n->kind = RegexKind::Star;
  n->children = {std::move(body)};
  return n;
}

RegexPtr capture(std::string var, RegexPtr body) {
  auto n = std::make_shared<RegexNode>();
  n->kind = RegexKind::Capture;
  n->var = std::move(var);
  n->children = {std::move(body)};
  return n;
}

bool equal(const RegexPtr& a, const RegexPtr& b) {
  if (a.get() == b.get()) return true;
  if (!a || !b || a->kind != b->kind) return false;
  if (a->lit != b->lit || a->lo != b->lo || a->hi != b->hi || a->var != b->var)
    return false;
  if (a->children.size() != b->children.size()) return false;
  for (std::size_t i = 0; i < a->children.size(); ++i)
    if (!equal(a->children[i], b->children[i])) return false;
  return true;
}

}  // namespace rx

// ---------------------------------------------------------------------------
// Parser
// ---------------------------------------------------------------------------

namespace {

// Multibyte tokens of the surface syntax.
constexpr std::string_view kOr = "∨";        // ∨
constexpr std::string_view kMinus = "−";     // −
constexpr std::string_view kSigma = "Σ";     // Σ
constexpr std::string_view kEpsilon = "ε";   // ε
constexpr std::string_view kEmpty = "∅";     // ∅
constexpr std::string_view kSpace = "␣";     // ␣
constexpr std::string_view kBullet = "•";    // •
constexpr std::string_view kLBracket = "⟦";  // ⟦
constexpr std::string_view kRBracket = "⟧";  // ⟧

bool ident_start(char c) {
  return (c >= 'A' && c <= 'Z') || (c >= 'a' && c <= 'z') || c == '_';
}
bool ident_char(char c) { return ident_start(c) || (c >= '0' && c <= '9'); }

class RegexParser {
 public:
  RegexParser(std::string_view src, const Alphabet& alphabet,
              const std::map<std::string, RegexCV>* defs)
      : src_(src), alphabet_(alphabet), defs_(defs) {}

  RegexPtr parse() {
    skip_ws();
    bool bracketed = eat(kLBracket);
    RegexPtr e = parse_alt();
    skip_ws();
    if (bracketed && !eat(kRBracket)) fail("unbalanced formula brackets");
    skip_ws();
    if (pos_ < src_.size()) fail("unexpected trailing input");
    return e;
  }

 private:
  std::string_view src_;
  const Alphabet& alphabet_;
  const std::map<std::string, RegexCV>* defs_;
  std::size_t pos_ = 0;

  [[noreturn]] void fail(const std::string& msg) const {
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
    if (!at(tok)) return false;
    pos_ += tok.size();
    return true;
  }

  bool at_end_of_expr() {
    skip_ws();
    if (pos_ >= src_.size()) return true;
    char c = src_[pos_];
    return c == ')' || c == '}' || c == '|' || at(kOr) || at(kRBracket);
  }

  RegexPtr parse_alt() {
    std::vector<RegexPtr> parts;
    parts.push_back(parse_concat());
    for (;;) {
      skip_ws();
      if (eat("|") || eat(kOr)) {
        parts.push_back(parse_concat());
      } else {
        break;
      }
    }
    return rx::alt(std::move(parts));
  }

  RegexPtr parse_concat() {
    std::vector<RegexPtr> items;
    for (;;) {
      if (at_end_of_expr()) break;
      items.push_back(parse_postfix());
    }
    if (items.empty()) fail("empty expression");
    return rx::concat(std::move(items));
  }

  static bool is_delta_form(const RegexPtr& n) {
    return n->kind == RegexKind::Any || n->kind == RegexKind::Subtract;
  }

  RegexPtr parse_postfix() {
    RegexPtr a = parse_atom();
    for (;;) {
      skip_ws();
      if ((src_.substr(pos_, 1) == "-" || at(kMinus)) && is_delta_form(a)) {
        if (!eat("-")) eat(kMinus);
        skip_ws();
        a = rx::subtract(std::move(a), parse_single_char());
      } else if (eat("*")) {
        a = rx::star(std::move(a));
      } else {
        break;
      }
    }
    return a;
  }

  char parse_escape() {
    // caller consumed the backslash
    if (pos_ >= src_.size()) fail("dangling escape");
    char c = src_[pos_++];
    switch (c) {
      case 'n':
        return '\n';
      case 't':
        return '\t';
      case 's':
        return ' ';
      case '\\':
        return '\\';
      default:
        if (ident_char(c)) fail(std::string("unknown escape \\") + c);
        return c;
    }
  }

  char check_alphabet(char c) {
    if (!alphabet_.contains(static_cast<unsigned char>(c)))
      fail("character not in the alphabet");
    return c;
  }

  // One character operand: a bare character, an escape, or ␣.
  char parse_single_char() {
    if (pos_ >= src_.size()) fail("expected a character");
    if (eat(kSpace)) return ' ';
    char c = src_[pos_++];
    if (c == '\\') return check_alphabet(parse_escape());
    if (static_cast<unsigned char>(c) >= 0x80)
      fail("unexpected multibyte character");
    return check_alphabet(c);
  }

  RegexPtr parse_atom() {
    skip_ws();
    if (pos_ >= src_.size()) fail("unexpected end of input");

    if (eat(kSigma)) return rx::any();
    if (eat(kEpsilon)) return rx::epsilon();
    if (eat(kEmpty)) return rx::empty_lang();
    if (eat(kSpace)) return rx::lit(' ');
    if (eat(kBullet)) return parse_atom();  // explicit concatenation mark

    char c = src_[pos_];
    if (c == '(') {
      ++pos_;
      RegexPtr e = parse_alt();
      skip_ws();
      if (!eat(")")) fail("unbalanced '('");
      return e;
    }
    if (c == '"' || c == '\'') {
      char quote = c;
      ++pos_;
      std::vector<RegexPtr> chars;
      while (pos_ < src_.size() && src_[pos_] != quote) {
        char d = src_[pos_++];
        if (d == '\\') d = parse_escape();
        chars.push_back(rx::lit(check_alphabet(d)));
      }
      if (!eat(std::string_view(&quote, 1))) fail("unterminated string");
      if (chars.empty()) return rx::epsilon();
      return rx::concat(std::move(chars));
    }
    if (c == '[') {
      ++pos_;
      char lo = parse_single_char();
      skip_ws();
      if (!eat("-") && !eat(",") && !eat(kMinus)) fail("expected '-' in range");
      skip_ws();
      char hi = parse_single_char();
      skip_ws();
      if (!eat("]")) fail("unbalanced '['");
      return rx::range(lo, hi);
    }
    if (c == '@') {
      ++pos_;
      std::size_t start = pos_;
      while (pos_ < src_.size() && ident_char(src_[pos_])) ++pos_;
      std::string name(src_.substr(start, pos_ - start));
      if (name.empty()) fail("expected a name after '@'");
      if (!defs_ || !defs_->count(name)) fail("unknown formula reference @" + name);
      return defs_->at(name).root();
    }
    if (c == '{' || c == ')' || c == '}' || c == ']' || c == '*')
      fail(std::string("unexpected '") + c + "'");
    if (c == '\\') {
      ++pos_;
      return rx::lit(check_alphabet(parse_escape()));
    }
    if (ident_start(c)) {
      // Maximal identifier run followed by '{' is a capture; otherwise the
      // leading character is a plain literal.
      std::size_t end = pos_;
      while (end < src_.size() && ident_char(src_[end])) ++end;
      if (end < src_.size() && src_[end] == '{') {
        std::string var(src_.substr(pos_, end - pos_));
        pos_ = end + 1;
        RegexPtr body = parse_alt();
        skip_ws();
        if (!eat("}")) fail("unbalanced '{' in capture " + var);
        return rx::capture(std::move(var), std::move(body));
      }
      ++pos_;
      return rx::lit(check_alphabet(c));
    }
    if (static_cast<unsigned char>(c) >= 0x80)
      fail("unexpected multibyte character");
    ++pos_;
    return rx::lit(check_alphabet(c));
  }
};

}  // namespace

RegexCV parse_regex_cv(std::string_view source, const Alphabet& alphabet,
                       const std::map<std::string, RegexCV>* definitions) {
  RegexParser p(source, alphabet, definitions);
  return RegexCV(p.parse(), alphabet);
}

// ---------------------------------------------------------------------------
// Printer
// ---------------------------------------------------------------------------

namespace {

std::string esc_char(char c) {
  if (ident_char(c)) return std::string(1, c);
  switch (c) {
    case ' ':
      return "\\s";
    case '\n':
      return "\\n";
    case '\t':
      return "\\t";
    default:
      return std::string("\\") + c;
  }
}

bool is_atom_like(const RegexPtr& n) {
  switch (n->kind) {
    case RegexKind::EmptyLang:
    case RegexKind::Epsilon:
    case RegexKind::Literal:
    case RegexKind::Range:
    case RegexKind::Any:
    case RegexKind::Capture:
      return true;
    default:
      return false;
  }
}

void print_node(const RegexPtr& n, bool alt_needs_parens, std::string& out) {
  switch (n->kind) {
    case RegexKind::EmptyLang:
      out += "∅";
      return;
    case RegexKind::Epsilon:
      out += "ε";
      return;
    case RegexKind::Any:
      out += "Σ";
      return;
    case RegexKind::Literal:
      out += esc_char(n->lit);
      return;
    case RegexKind::Range:
      out += "[" + esc_char(n->lo) + "-" + esc_char(n->hi) + "]";
      return;
    case RegexKind::Subtract:
      print_node(n->children[0], true, out);
      out += "−" + esc_char(n->lit);
      return;
    case RegexKind::Star:
      if (is_atom_like(n->children[0])) {
        print_node(n->children[0], true, out);
      } else {
        out += "(";
        print_node(n->children[0], false, out);
        out += ")";
      }
      out += "*";
      return;
    case RegexKind::Capture:
      out += n->var + "{";
      print_node(n->children[0], false, out);
      out += "}";
      return;
    case RegexKind::Concat:
      for (std::size_t i = 0; i < n->children.size(); ++i) {
        if (i) out += " ";
        print_node(n->children[i], true, out);
      }
      return;
    case RegexKind::Alt: {
      if (alt_needs_parens) out += "(";
      for (std::size_t i = 0; i < n->children.size(); ++i) {
        if (i) out += " ∨ ";
        print_node(n->children[i], true, out);
      }
      if (alt_needs_parens) out += ")";
      return;
    }
  }
}

}  // namespace

std::string RegexCV::to_string() const {
  std::string out;
  if (root_) print_node(root_, false, out);
  return out;
}

// ---------------------------------------------------------------------------
// Variable analyses
// ---------------------------------------------------------------------------

namespace {

void walk_vars(const RegexPtr& n, std::vector<int>& path, int capture_depth,
               std::map<std::string, VariableInfo>& out) {
  if (n->kind == RegexKind::Capture) {
    auto& info = out[n->var];
    info.name = n->var;
    info.occurrence_paths.push_back(path);
    if (info.occurrence_paths.size() == 1) info.exposed = true;
    if (capture_depth > 0) info.exposed = false;
    path.push_back(0);
    walk_vars(n->children[0], path, capture_depth + 1, out);
    path.pop_back();
    return;
  }
  for (std::size_t i = 0; i < n->children.size(); ++i) {
    path.push_back(static_cast<int>(i));
    walk_vars(n->children[i], path, capture_depth, out);
    path.pop_back();
  }
}

}  // namespace

std::map<std::string, VariableInfo> classify_variables(const RegexCV& r) {
  std::map<std::string, VariableInfo> out;
  if (r.root()) {
    std::vector<int> path;
    walk_vars(r.root(), path, 0, out);
  }
  return out;
}

std::set<std::string> svars(const RegexCV& r) {
  std::set<std::string> out;
  for (const auto& [name, info] : classify_variables(r)) out.insert(name);
  return out;
}

// ---------------------------------------------------------------------------
// Disjunctive form
// ---------------------------------------------------------------------------

namespace {

bool contains_capture_of(const RegexPtr& n, const std::string& v) {
  if (n->kind == RegexKind::Capture && n->var == v) return true;
  for (const auto& c : n->children)
    if (contains_capture_of(c, v)) return true;
  return false;
}

bool contains_any_capture(const RegexPtr& n) {
  if (n->kind == RegexKind::Capture) return true;
  for (const auto& c : n->children)
    if (contains_any_capture(c)) return true;
  return false;
}

std::vector<RegexPtr> pull_up(const RegexPtr& n, const std::string& v) {
  if (!contains_capture_of(n, v)) return {n};
  switch (n->kind) {
    case RegexKind::Capture:
      // v itself (an exposed v cannot sit under another capture).
      return {n};
    case RegexKind::Alt: {
      std::vector<RegexPtr> out;
      for (const auto& c : n->children) {
        auto sub = pull_up(c, v);
        out.insert(out.end(), sub.begin(), sub.end());
      }
      return out;
    }
    case RegexKind::Concat: {
      std::vector<std::vector<RegexPtr>> partial = {{}};
      for (const auto& c : n->children) {
        auto sub = pull_up(c, v);
        std::vector<std::vector<RegexPtr>> next;
        next.reserve(partial.size() * sub.size());
        for (const auto& pre : partial)
          for (const auto& s : sub) {
            auto seq = pre;
            seq.push_back(s);
            next.push_back(std::move(seq));
          }
        partial = std::move(next);
      }
      std::vector<RegexPtr> out;
      out.reserve(partial.size());
      for (auto& seq : partial) out.push_back(rx::concat(std::move(seq)));
      return out;
    }
    case RegexKind::Star:
      throw Error("disjunctive form: variable " + v + " occurs under a star");
    default:
      throw Error("disjunctive form: unexpected node containing " + v);
  }
}

}  // namespace

std::vector<RegexCV> disjunctive_form(const RegexCV& r, const std::string& v) {
  auto vars = classify_variables(r);
  auto it = vars.find(v);
  if (it == vars.end())
    throw Error("disjunctive form: unknown variable " + v);
  if (!it->second.exposed)
    throw Error("disjunctive form: variable " + v + " is nested");
  std::vector<RegexCV> out;
  for (auto& d : pull_up(r.root(), v)) out.emplace_back(d, r.alphabet());
  return out;
}

namespace {

void find_captures(const RegexPtr& n, const std::string& v,
                   std::vector<RegexPtr>& hits) {
  if (n->kind == RegexKind::Capture && n->var == v) hits.push_back(n);
  for (const auto& c : n->children) find_captures(c, v, hits);
}

}  // namespace

RegexCV enclosed_regex(const RegexCV& r, const std::string& v) {
  std::vector<RegexPtr> hits;
  find_captures(r.root(), v, hits);
  if (hits.size() != 1)
    throw Error("expected exactly one capture of " + v + ", found " +
                std::to_string(hits.size()));
  return RegexCV(hits[0]->children[0], r.alphabet());
}

// ---------------------------------------------------------------------------
// Unigrams, contextualization, character sets
// ---------------------------------------------------------------------------

namespace {

bool unigram_body(const RegexPtr& n) {
  switch (n->kind) {
    case RegexKind::Literal:
    case RegexKind::Range:
    case RegexKind::Any:
    case RegexKind::Subtract:
      return true;
    case RegexKind::Alt:
      for (const auto& c : n->children)
        if (!unigram_body(c)) return false;
      return true;
    default:
      return false;
  }
}

bool is_unigram_star(const RegexPtr& n) {
  return n->kind == RegexKind::Star && unigram_body(n->children[0]);
}

// True when L(n) = {epsilon}.
bool eps_only(const RegexPtr& n) {
  switch (n->kind) {
    case RegexKind::Epsilon:
      return true;
    case RegexKind::Star:
      return eps_only(n->children[0]) ||
             n->children[0]->kind == RegexKind::EmptyLang;
    case RegexKind::Alt:
    case RegexKind::Concat:
      for (const auto& c : n->children)
        if (!eps_only(c)) return false;
      return true;
    default:
      return false;
  }
}

CharSet class_of(const RegexPtr& n, const Alphabet& sigma);

// L(n) empty?
bool lang_empty(const RegexPtr& n, const Alphabet& sigma) {
  switch (n->kind) {
    case RegexKind::EmptyLang:
      return true;
    case RegexKind::Epsilon:
    case RegexKind::Star:
      return false;
    case RegexKind::Literal:
    case RegexKind::Any:
    case RegexKind::Range:
    case RegexKind::Subtract:
      return class_of(n, sigma).empty();
    case RegexKind::Alt:
      for (const auto& ch : n->children)
        if (!lang_empty(ch, sigma)) return false;
      return true;
    case RegexKind::Concat:
      for (const auto& ch : n->children)
        if (lang_empty(ch, sigma)) return true;
      return false;
    case RegexKind::Capture:
      return lang_empty(n->children[0], sigma);
  }
  return false;
}

CharSet class_of(const RegexPtr& n, const Alphabet& sigma) {
  switch (n->kind) {
    case RegexKind::Literal:
      return CharSet::single(static_cast<unsigned char>(n->lit)) & sigma.set();
    case RegexKind::Range:
      return CharSet::range(static_cast<unsigned char>(n->lo),
                            static_cast<unsigned char>(n->hi)) &
             sigma.set();
    case RegexKind::Any:
      return sigma.set();
    case RegexKind::Subtract: {
      CharSet c = class_of(n->children[0], sigma);
      c.remove(static_cast<unsigned char>(n->lit));
      return c;
    }
    case RegexKind::Alt: {
      CharSet c;
      for (const auto& ch : n->children) c.unite(class_of(ch, sigma));
      return c;
    }
    default:
      throw Error("not a character-class expression");
  }
}

void collect_unigrams(const RegexPtr& n, const Alphabet& sigma,
                      std::vector<int>& path, std::vector<UnigramStar>& out) {
  if (n->kind == RegexKind::Capture) return;  // covered region
  if (is_unigram_star(n)) {
    out.push_back({path, class_of(n->children[0], sigma)});
    return;
  }
  for (std::size_t i = 0; i < n->children.size(); ++i) {
    path.push_back(static_cast<int>(i));
    collect_unigrams(n->children[i], sigma, path, out);
    path.pop_back();
  }
}

CharSet chars_of(const RegexPtr& n, const Alphabet& sigma) {
  if (lang_empty(n, sigma)) return CharSet::none();
  switch (n->kind) {
    case RegexKind::EmptyLang:
    case RegexKind::Epsilon:
      return CharSet::none();
    case RegexKind::Literal:
    case RegexKind::Range:
    case RegexKind::Any:
    case RegexKind::Subtract:
      return class_of(n, sigma);
    case RegexKind::Alt: {
      CharSet c;
      for (const auto& ch : n->children)
        if (!lang_empty(ch, sigma)) c.unite(chars_of(ch, sigma));
      return c;
    }
    case RegexKind::Concat: {
      CharSet c;
      for (const auto& ch : n->children) c.unite(chars_of(ch, sigma));
      return c;
    }
    case RegexKind::Star:
      return lang_empty(n->children[0], sigma) ? CharSet::none()
                                               : chars_of(n->children[0], sigma);
    case RegexKind::Capture:
      return chars_of(n->children[0], sigma);
  }
  return CharSet::none();
}

void flatten_concat(const RegexPtr& n, std::vector<RegexPtr>& items) {
  if (n->kind == RegexKind::Concat) {
    for (const auto& c : n->children) flatten_concat(c, items);
  } else {
    items.push_back(n);
  }
}

}  // namespace

std::vector<UnigramStar> uncovered_unigrams(const RegexCV& r) {
  std::vector<UnigramStar> out;
  if (r.root()) {
    std::vector<int> path;
    collect_unigrams(r.root(), r.alphabet(), path, out);
  }
  return out;
}

CharSet char_set(const RegexCV& r) {
  if (!r.root()) return CharSet::none();
  return chars_of(r.root(), r.alphabet());
}

Contextualized contextualize(const RegexCV& r, const std::string& v) {
  auto vars = classify_variables(r);
  auto it = vars.find(v);
  if (it == vars.end()) throw Error("contextualize: unknown variable " + v);
  if (!it->second.exposed) throw Error("contextualize: variable " + v + " is nested");

  int next_ctx = 1;
  auto fresh = [&]() {
    std::string name;
    do {
      name = "c" + std::to_string(next_ctx++);
    } while (vars.count(name));
    return name;
  };

  std::vector<RegexPtr> items;
  flatten_concat(r.root(), items);

  Contextualized result;
  std::vector<RegexPtr> out_items;
  std::vector<RegexPtr> pending;

  auto flush = [&]() {
    if (pending.empty()) return;
    bool all_eps = true;
    for (const auto& p : pending)
      if (!eps_only(p)) all_eps = false;
    if (all_eps) {
      out_items.insert(out_items.end(), pending.begin(), pending.end());
    } else {
      std::string name = fresh();
      result.context_vars.push_back(name);
      out_items.push_back(rx::capture(name, rx::concat(std::move(pending))));
    }
    pending.clear();
  };

  for (const auto& item : items) {
    if (item->kind == RegexKind::Capture) {
      flush();
      out_items.push_back(item);
    } else if (is_unigram_star(item)) {
      flush();
      out_items.push_back(item);
    } else if (contains_any_capture(item)) {
      throw Error(
          "contextualize: a disjunction or star outside all captures "
          "contains a capture variable");
    } else {
      pending.push_back(item);
    }
  }
  flush();

  result.formula = RegexCV(rx::concat(std::move(out_items)), r.alphabet());
  return result;
}

}  // namespace spanclean
