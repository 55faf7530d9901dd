#include <doctest.h>

#include "helpers.hpp"
#include "oracle.hpp"
#include "spanclean/regex.hpp"

using namespace spanclean;
using namespace spanclean::testing;

TEST_CASE("parse: nested date captures") {
  RegexCV r = parse("F{Y{[0-9][0-9][0-9][0-9]}-M{[0-9][0-9]}-D{[0-9][0-9]}}");
  CHECK(svars(r) == std::set<std::string>{"F", "Y", "M", "D"});
  REQUIRE(r.root()->kind == RegexKind::Capture);
  CHECK(r.root()->var == "F");
}

TEST_CASE("parse: epsilon and error positions") {
  RegexCV eps = parse("ε");
  CHECK(eps.root()->kind == RegexKind::Epsilon);

  CHECK_THROWS_AS(parse("x{(a"), ParseError);
  try {
    parse("x{(a");
  } catch (const ParseError& e) {
    CHECK(e.offset() == 4);
  }
  CHECK_THROWS_AS(parse("x{}"), ParseError);
  CHECK_THROWS_AS(parse("a\\q"), ParseError);  // unknown escape
}

TEST_CASE("parse: subtraction binds to alphabet expressions only") {
  RegexCV r = parse("(Σ−?−.)*");
  REQUIRE(r.root()->kind == RegexKind::Star);
  CHECK(r.root()->children[0]->kind == RegexKind::Subtract);
  // '-' after a literal is itself a literal
  RegexCV lit = parse("a-b");
  REQUIRE(lit.root()->kind == RegexKind::Concat);
  CHECK(lit.root()->children[1]->kind == RegexKind::Literal);
  CHECK(lit.root()->children[1]->lit == '-');
}

TEST_CASE("parse/print round trip is structurally identical") {
  for (const char* src :
       {"F{Y{[0-9][0-9][0-9][0-9]}-M{[0-9][0-9]}-D{[0-9][0-9]}}", "ε",
        "(a ∨ bc)* x{Σ−a−b} \\n \\s", "Σ* a{b{c}} Σ*", "∅ ∨ ε ∨ [a-z]*"}) {
    RegexCV r = parse(src);
    RegexCV again = parse(r.to_string());
    CHECK(rx::equal(r.root(), again.root()));
  }
  RegexCV mv = parse(fixtures::gamma_mv());
  CHECK(rx::equal(mv.root(), parse(mv.to_string()).root()));
}

TEST_CASE("svars") {
  CHECK(svars(parse(fixtures::gamma_date())) ==
        std::set<std::string>{"F", "Y", "M", "D"});
  CHECK(svars(parse("abc")).empty());
  CHECK(svars(parse(fixtures::gamma_mv())) == std::set<std::string>{"A", "M"});
}

TEST_CASE("classify_variables: exposure") {
  auto date = classify_variables(parse(fixtures::gamma_date()));
  CHECK(date.at("F").exposed);
  CHECK(!date.at("Y").exposed);
  CHECK(!date.at("M").exposed);
  CHECK(!date.at("D").exposed);

  auto mv = classify_variables(parse(fixtures::gamma_mv()));
  CHECK(mv.at("A").exposed);
  CHECK(mv.at("M").exposed);

  auto nested = classify_variables(parse("x{y{a}}"));
  CHECK(nested.at("x").exposed);
  CHECK(!nested.at("y").exposed);
}

TEST_CASE("classify_variables agrees with a direct enclosing-capture walk") {
  for (const std::string& src :
       {fixtures::gamma_date(), fixtures::gamma_mv(),
        std::string("x{a} ∨ y{x{b}}"), std::string("u{v{w{a}}}")}) {
    RegexCV r = parse(src);
    auto info = classify_variables(r);
    // direct walk: count capture ancestors of every occurrence
    std::map<std::string, bool> exposed;
    std::function<void(const RegexPtr&, int)> walk = [&](const RegexPtr& n,
                                                         int depth) {
      if (n->kind == RegexKind::Capture) {
        if (!exposed.count(n->var)) exposed[n->var] = true;
        if (depth > 0) exposed[n->var] = false;
        walk(n->children[0], depth + 1);
        return;
      }
      for (const auto& c : n->children) walk(c, depth);
    };
    walk(r.root(), 0);
    for (const auto& [v, e] : exposed) CHECK(info.at(v).exposed == e);
  }
}

TEST_CASE("disjunctive_form") {
  SUBCASE("already disjunctive at top") {
    auto ds = disjunctive_form(parse("(a v{x} ∨ b v{y})"), "v");
    REQUIRE(ds.size() == 2);
    CHECK(rx::equal(ds[0].root(), parse("a v{x}").root()));
    CHECK(rx::equal(ds[1].root(), parse("b v{y}").root()));
  }
  SUBCASE("pulled over concatenation") {
    auto ds = disjunctive_form(parse("c (a v{x} ∨ b v{y}) d"), "v");
    REQUIRE(ds.size() == 2);
    CHECK(rx::equal(ds[0].root(), parse("c a v{x} d").root()));
    CHECK(rx::equal(ds[1].root(), parse("c b v{y} d").root()));
  }
  SUBCASE("no disjunction") {
    auto ds = disjunctive_form(parse("a v{x}"), "v");
    REQUIRE(ds.size() == 1);
    CHECK(rx::equal(ds[0].root(), parse("a v{x}").root()));
  }
  SUBCASE("rejects nested and absent variables") {
    CHECK_THROWS_AS(disjunctive_form(parse("x{v{a}}"), "v"), Error);
    CHECK_THROWS_AS(disjunctive_form(parse("a"), "v"), Error);
    CHECK_THROWS_AS(disjunctive_form(parse("(v{a})*b v{c}"), "v"), Error);
  }
}

TEST_CASE("disjunctive_form is span-equivalent to the original") {
  // union of the disjuncts against the original, on every doc over a small
  // alphabet
  for (const char* src : {"c (a v{x} ∨ b v{y}) d", "(a ∨ b) v{a ∨ bb} (c v{x} ∨ d)x",
                          "v{a} (b ∨ c)"}) {
    Alphabet sigma = Alphabet::from_chars("abcdxy");
    RegexCV r = parse_regex_cv(src, sigma);
    auto ds = disjunctive_form(r, "v");
    for_each_doc("abcd", 6, [&](const std::string& doc) {
      auto expect = oracle_relation(r, doc);
      std::set<std::map<std::string, Span>> got;
      for (const auto& d : ds)
        for (const auto& row : oracle_relation(d, doc)) got.insert(row);
      CHECK(expect == got);
    });
  }
}

TEST_CASE("contextualize: worked medication example") {
  // contexts wrap the space before M, the unit phrase, and the separator
  // before F; the unigram stars and the capture bodies stay uncovered
  Alphabet sigma = Alphabet::printable_ascii_newline();
  std::string med =
      "Σ* \\s M{[A-Z][A-Z]*} (\\s ∨ ,)* D{[0-9][0-9]*} \\s (\"ml\" ∨ \"mg\") "
      "(\\s ∨ ,)* S{([A-Z][A-Z] ∨ ε)} (\\s ∨ ,) F{[A-Z][A-Z]} Σ*";
  auto ctx = contextualize(parse_regex_cv(med, sigma), "M");
  CHECK(ctx.context_vars == std::vector<std::string>{"c1", "c2", "c3"});
  std::string expect =
      "Σ* c1{\\s} M{[A-Z][A-Z]*} (\\s ∨ ,)* D{[0-9][0-9]*} "
      "c2{\\s (\"ml\" ∨ \"mg\")} (\\s ∨ ,)* S{([A-Z][A-Z] ∨ ε)} c3{(\\s ∨ ,)} "
      "F{[A-Z][A-Z]} Σ*";
  CHECK(rx::equal(ctx.formula.root(), parse_regex_cv(expect, sigma).root()));
}

TEST_CASE("contextualize: trivial and error cases") {
  auto same = contextualize(parse("v{a}"), "v");
  CHECK(rx::equal(same.formula.root(), parse("v{a}").root()));
  CHECK(same.context_vars.empty());

  auto one = contextualize(parse("Σ* x v{a} Σ*"), "v");
  CHECK(rx::equal(one.formula.root(), parse("Σ* c1{x} v{a} Σ*").root()));

  CHECK_THROWS_AS(contextualize(parse("x{a}"), "y"), Error);
  CHECK_THROWS_AS(contextualize(parse("w{v{a}} b"), "v"), Error);
  // a capture inside a disjunction outside all captures is not supported
  CHECK_THROWS_AS(contextualize(parse("(a v{x} ∨ b v{y})"), "v"), Error);
}

TEST_CASE("contextualization-projection identity") {
  for (const char* src : {"Σ* x v{a} Σ*", "x y v{a ∨ bb} (a ∨ b) w{b} y*"}) {
    Alphabet sigma = Alphabet::from_chars("abxyw");
    RegexCV r = parse_regex_cv(src, sigma);
    auto ctx = contextualize(r, "v");
    std::set<std::string> original = svars(r);
    for_each_doc("abxy", 5, [&](const std::string& doc) {
      auto expect = oracle_relation(r, doc);
      std::set<std::map<std::string, Span>> got;
      for (const auto& row : oracle_relation(ctx.formula, doc)) {
        std::map<std::string, Span> projected;
        for (const auto& [v, s] : row)
          if (original.count(v)) projected[v] = s;
        got.insert(std::move(projected));
      }
      CHECK(expect == got);
    });
  }
}

TEST_CASE("uncovered_unigrams") {
  SUBCASE("medication formula: separator star and any-star only") {
    RegexCV med = parse(fixtures::gamma_med_strength());
    auto unis = uncovered_unigrams(med);
    // two any-stars and two separator stars outside captures
    int any = 0, sep = 0;
    for (const auto& u : unis) {
      if (u.chars.size() == Alphabet::printable_ascii_newline().size())
        ++any;
      else if (u.chars == CharSet::of(" ,"))
        ++sep;
    }
    CHECK(any == 2);
    CHECK(sep == 2);
    CHECK(unis.size() == 4);
  }
  SUBCASE("two-character body is not a unigram") {
    CHECK(uncovered_unigrams(parse("(ab)*")).empty());
  }
  SUBCASE("subtraction body") {
    auto unis = uncovered_unigrams(parse("(Σ−?−.)*"));
    REQUIRE(unis.size() == 1);
    CharSet expect = Alphabet::printable_ascii_newline().set();
    expect.remove('?');
    expect.remove('.');
    CHECK(unis[0].chars == expect);
    // no length-2 members: the star body admits only single characters
    Alphabet sigma = Alphabet::from_chars("?.ab");
    RegexCV body = parse_regex_cv("Σ−?−.", sigma);
    for_each_doc("?.ab", 2, [&](const std::string& doc) {
      if (doc.size() == 2) CHECK(!oracle_accepts(body, doc));
    });
  }
  SUBCASE("stars inside captures are covered") {
    CHECK(uncovered_unigrams(parse("x{[0-9]*}")).empty());
  }
}

TEST_CASE("char_set") {
  CHECK(char_set(parse("[0-9]")) == CharSet::of("0123456789"));
  CHECK(char_set(parse("(\"ml\" ∨ \"mg\")")) == CharSet::of("mlg"));
  CHECK(char_set(parse("∅")).empty());
  CHECK(char_set(parse("a ∅ b")).empty());
  CHECK(char_set(parse("x{ab} ∨ ∅ c")) == CharSet::of("ab"));
}

TEST_CASE("char_set equals the automaton-membership characterization") {
  // c occurs in some member of L(r) iff L(r) \ L((Σ-c)*) is nonempty
  Alphabet sigma = Alphabet::from_chars("abcde");
  for (const char* src : {"a(b ∨ cd)*", "x{a}(Σ−a)*", "∅a ∨ be", "(Σ−a−b)c"}) {
    RegexCV r = parse_regex_cv(src, sigma);
    CharSet got = char_set(r);
    VSetAutomaton probe = compile(r);
    for (unsigned char c : sigma.chars()) {
      std::string avoid = std::string("(Σ−") + static_cast<char>(c) + ")*";
      VSetAutomaton avoider = compile(parse_regex_cv(avoid, sigma));
      bool occurs = language_difference_witness(probe, avoider).has_value();
      CHECK(occurs == got.contains(c));
    }
  }
}

TEST_CASE("enclosed_regex") {
  RegexCV r = parse("a v{x ∨ y} b");
  CHECK(rx::equal(enclosed_regex(r, "v").root(), parse("x ∨ y").root()));
  CHECK_THROWS_AS(enclosed_regex(parse("a"), "v"), Error);
}
