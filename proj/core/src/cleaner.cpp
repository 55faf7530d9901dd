#include "spanclean/cleaner.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <sstream>

#include <json.hpp>

namespace spanclean {

int ExtractedTable::column_index(const std::string& name) const {
  for (std::size_t i = 0; i < columns.size(); ++i)
    if (columns[i] == name) return static_cast<int>(i);
  return -1;
}

// ---------------------------------------------------------------------------
// rules
// ---------------------------------------------------------------------------

namespace {

std::string unescape(const std::string& s) {
  std::string out;
  for (std::size_t i = 0; i < s.size(); ++i) {
    char c = s[i];
    if (c == '\\' && i + 1 < s.size()) {
      char d = s[++i];
      switch (d) {
        case 'n':
          out.push_back('\n');
          break;
        case 't':
          out.push_back('\t');
          break;
        case 's':
          out.push_back(' ');
          break;
        case '\\':
          out.push_back('\\');
          break;
        default:
          out.push_back(d);
      }
    } else {
      out.push_back(c);
    }
  }
  return out;
}

std::string strip(const std::string& s) {
  std::size_t a = s.find_first_not_of(" \t\r");
  std::size_t b = s.find_last_not_of(" \t\r");
  if (a == std::string::npos) return "";
  return s.substr(a, b - a + 1);
}

// Normalizes recognized date shapes to yyyy-mm-dd; unrecognized values are
// left unchanged.
std::string date_iso(const std::string& v) {
  auto all_digits = [](std::string_view s) {
    for (char c : s)
      if (!std::isdigit(static_cast<unsigned char>(c))) return false;
    return !s.empty();
  };
  if (v.size() == 8 && all_digits(v))  // yyyymmdd
    return v.substr(0, 4) + "-" + v.substr(4, 2) + "-" + v.substr(6, 2);
  auto delim = [](char c) { return c == '/' || c == '-'; };
  if (v.size() == 10 && delim(v[2]) && delim(v[5]) && all_digits(v.substr(0, 2)) &&
      all_digits(v.substr(3, 2)) && all_digits(v.substr(6, 4)))
    return v.substr(6, 4) + "-" + v.substr(0, 2) + "-" + v.substr(3, 2);
  if (v.size() == 10 && delim(v[4]) && delim(v[7]) && all_digits(v.substr(0, 4)) &&
      all_digits(v.substr(5, 2)) && all_digits(v.substr(8, 2)))
    return v.substr(0, 4) + "-" + v.substr(5, 2) + "-" + v.substr(8, 2);
  return v;  // five-digit years and other oddities pass through
}

}  // namespace

CleaningRule load_rule_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot read rule file " + path);
  CleaningRule rule;
  rule.source_path = path;
  std::string line;
  while (std::getline(in, line)) {
    if (line.rfind("#!", 0) == 0) {
      std::string body = strip(line.substr(2));
      std::size_t colon = body.find(':');
      if (colon == std::string::npos)
        throw Error(path + ": malformed directive: " + line);
      std::string key = strip(body.substr(0, colon));
      std::string val = strip(body.substr(colon + 1));
      if (key == "name") {
        rule.name = val;
      } else if (key == "target") {
        std::istringstream vs(val);
        std::string t;
        while (vs >> t) rule.targets.push_back(t);
      } else if (key == "normalizer") {
        if (val != "date_iso")
          throw Error(path + ": unknown normalizer " + val);
        rule.normalizer = val;
      } else if (key == "output-chars") {
        rule.output_chars = CharSet::of(unescape(val));
      } else {
        throw Error(path + ": unknown directive key " + key);
      }
      continue;
    }
    if (line.empty() || line[0] == '#') continue;
    std::size_t tab = line.find('\t');
    if (tab == std::string::npos)
      throw Error(path + ": mapping row without a tab separator: " + line);
    std::string from = unescape(line.substr(0, tab));
    std::string to = unescape(line.substr(tab + 1));
    if (!rule.mapping.emplace(from, to).second)
      throw Error(path + ": duplicate mapping key");
  }
  if (rule.name.empty()) rule.name = path;
  if (rule.targets.empty()) throw Error(path + ": missing '#! target:' directive");
  if (rule.normalizer.empty() && rule.mapping.empty())
    throw Error(path + ": rule has neither mapping rows nor a normalizer");
  return rule;
}

std::optional<std::string> rule_value(const CleaningRule& rule,
                                      const std::string& old_value) {
  std::string candidate;
  if (!rule.normalizer.empty()) {
    candidate = date_iso(old_value);
  } else {
    auto it = rule.mapping.find(old_value);
    if (it == rule.mapping.end()) return std::nullopt;
    candidate = it->second;
  }
  if (candidate == old_value) return std::nullopt;
  return candidate;
}

// ---------------------------------------------------------------------------
// extraction
// ---------------------------------------------------------------------------

ExtractedTable extract_table(const SpannerProgram& p, const DocumentStore& s) {
  ExtractedTable t;
  t.program = p.name();
  t.columns = p.output_schema();
  for (const auto& [id, doc] : s.documents) {
    SpanRelation rel = p.evaluate(doc);
    for (const auto& row : rel.rows()) {
      ExtractedTable::Row r;
      r.doc_id = id;
      r.spans = row;
      for (const Span& sp : row) r.values.emplace_back(sp.slice(doc.text));
      t.rows.push_back(std::move(r));
    }
  }
  return t;
}

std::vector<CellUpdate> apply_rule(const SpannerProgram& p,
                                   const ExtractedTable& t,
                                   const CleaningRule& rule) {
  std::vector<CellUpdate> updates;
  for (const auto& target : rule.targets) {
    int col = t.column_index(target);
    if (col < 0)
      throw Error("rule " + rule.name + ": target " + target +
                  " is not a column of " + t.program);
    VSetAutomaton domain = compile(p.domain_of(target));
    for (const auto& row : t.rows) {
      const std::string& old_value = row.values[static_cast<std::size_t>(col)];
      auto proposal = rule_value(rule, old_value);
      if (!proposal) continue;
      if (!language_member(domain, *proposal))
        throw Error("rule " + rule.name + " is not domain-preserving: '" +
                    escape_value(*proposal) + "' is outside the domain of " +
                    target);
      CellUpdate u;
      u.doc_id = row.doc_id;
      u.row_spans = row.spans;
      u.row_values = row.values;
      u.column = target;
      u.cell_span = row.spans[static_cast<std::size_t>(col)];
      u.old_value = old_value;
      u.new_value = *proposal;
      updates.push_back(std::move(u));
    }
  }
  return updates;
}

// ---------------------------------------------------------------------------
// update translation
// ---------------------------------------------------------------------------

Document dsyn(const Document& d, Span span, std::string_view new_value) {
  if (!span.valid_for(d.text))
    throw Error("dsyn: span " + to_string(span) + " is out of bounds for " +
                d.id);
  Document out;
  out.id = d.id;
  out.text = d.text.substr(0, span.start - 1);
  out.text += new_value;
  out.text += d.text.substr(span.end - 1);
  return out;
}

DocumentStore translate_updates(const DocumentStore& s,
                                const ExtractedTable& t,
                                const std::vector<CellUpdate>& updates) {
  // (span, new value) per document, deduplicated
  std::map<std::string, std::map<Span, std::string>> per_doc;
  for (const auto& u : updates) {
    auto doc_it = s.documents.find(u.doc_id);
    if (doc_it == s.documents.end())
      throw Error("update references unknown document " + u.doc_id);
    int col = t.column_index(u.column);
    if (col < 0) throw Error("update references unknown column " + u.column);
    bool live = false;
    for (const auto& row : t.rows)
      if (row.doc_id == u.doc_id && row.spans == u.row_spans &&
          row.values == u.row_values) {
        live = true;
        break;
      }
    if (!live)
      throw Error("update references a row not present in the table for " +
                  u.doc_id);
    Span span = u.row_spans[static_cast<std::size_t>(col)];
    if (span.slice(doc_it->second.text) != u.old_value)
      throw Error("stale update: document " + u.doc_id + " no longer holds '" +
                  escape_value(u.old_value) + "' at " + to_string(span));
    auto [it, fresh] = per_doc[u.doc_id].emplace(span, u.new_value);
    if (!fresh && it->second != u.new_value)
      throw Error("conflicting updates for " + u.doc_id + " at " +
                  to_string(span));
  }
  for (const auto& [id, spans] : per_doc) {
    for (auto a = spans.begin(); a != spans.end(); ++a) {
      auto b = std::next(a);
      if (b != spans.end() && spans_overlap(a->first, b->first))
        throw Error("overlapping update spans in document " + id + ": " +
                    to_string(a->first) + " and " + to_string(b->first));
    }
  }

  DocumentStore out;
  out.origin = s.origin;
  out.version = s.version + 1;
  for (const auto& [id, doc] : s.documents) {
    auto it = per_doc.find(id);
    if (it == per_doc.end()) {
      out.documents.emplace(id, doc);
      continue;
    }
    Document cur = doc;
    for (auto rit = it->second.rbegin(); rit != it->second.rend(); ++rit)
      cur = dsyn(cur, rit->first, rit->second);
    out.documents.emplace(id, std::move(cur));
  }
  return out;
}

// ---------------------------------------------------------------------------
// round trip
// ---------------------------------------------------------------------------

RoundTripReport round_trip_check(const SpannerProgram& p,
                                 const ExtractedTable& before,
                                 const DocumentStore& after_store,
                                 const std::vector<CellUpdate>& updates) {
  using StringRow = std::vector<std::string>;
  std::map<std::string, std::set<StringRow>> expected;
  for (const auto& row : before.rows) {
    StringRow values = row.values;
    for (const auto& u : updates) {
      if (u.doc_id != row.doc_id || u.row_spans != row.spans ||
          u.row_values != row.values)
        continue;
      int col = before.column_index(u.column);
      if (col >= 0) values[static_cast<std::size_t>(col)] = u.new_value;
    }
    expected[row.doc_id].insert(std::move(values));
  }

  std::map<std::string, std::set<StringRow>> actual;
  for (const auto& [id, doc] : after_store.documents) {
    SpanRelation rel = p.evaluate(doc);
    for (const auto& row : rel.rows()) {
      StringRow values;
      for (const Span& sp : row) values.emplace_back(sp.slice(doc.text));
      actual[id].insert(std::move(values));
    }
  }

  RoundTripReport report;
  std::set<std::string> all_docs;
  for (const auto& [id, _] : expected) all_docs.insert(id);
  for (const auto& [id, _] : actual) all_docs.insert(id);
  for (const auto& id : all_docs) {
    const auto& exp = expected[id];
    const auto& act = actual[id];
    RoundTripReport::DocDiff diff;
    diff.doc_id = id;
    for (const auto& r : act)
      if (!exp.count(r)) diff.gained.push_back(r);
    for (const auto& r : exp)
      if (!act.count(r)) diff.lost.push_back(r);
    if (!diff.gained.empty() || !diff.lost.empty()) {
      report.exact = false;
      report.diffs.push_back(std::move(diff));
    }
  }
  return report;
}

// ---------------------------------------------------------------------------
// serialization
// ---------------------------------------------------------------------------

std::string table_to_tsv(const ExtractedTable& t) {
  std::ostringstream os;
  os << "doc_id";
  for (const auto& c : t.columns) os << "\t" << c;
  os << "\n";
  for (const auto& row : t.rows) {
    os << row.doc_id;
    for (std::size_t i = 0; i < row.spans.size(); ++i)
      os << "\t" << row.spans[i].start << "," << row.spans[i].end << ",\""
         << escape_value(row.values[i]) << "\"";
    os << "\n";
  }
  return os.str();
}

std::string table_to_strings_tsv(const ExtractedTable& t) {
  std::ostringstream os;
  os << "doc_id";
  for (const auto& c : t.columns) os << "\t" << c;
  os << "\n";
  for (const auto& row : t.rows) {
    os << row.doc_id;
    for (const auto& v : row.values) os << "\t\"" << escape_value(v) << "\"";
    os << "\n";
  }
  return os.str();
}

std::string updates_to_tsv(const std::vector<CellUpdate>& updates) {
  std::ostringstream os;
  os << "doc_id\tcolumn\tstart\tend\told\tnew\n";
  for (const auto& u : updates) {
    os << u.doc_id << "\t" << u.column << "\t" << u.cell_span.start << "\t"
       << u.cell_span.end << "\t\"" << escape_value(u.old_value) << "\"\t\""
       << escape_value(u.new_value) << "\"\n";
  }
  return os.str();
}

std::string RoundTripReport::to_text() const {
  std::ostringstream os;
  os << (exact ? "round trip: exact match\n" : "round trip: MISMATCH\n");
  for (const auto& d : diffs) {
    os << "document " << d.doc_id << ":\n";
    for (const auto& r : d.gained) {
      os << "  gained:";
      for (const auto& v : r) os << " \"" << escape_value(v) << "\"";
      os << "\n";
    }
    for (const auto& r : d.lost) {
      os << "  lost:";
      for (const auto& v : r) os << " \"" << escape_value(v) << "\"";
      os << "\n";
    }
  }
  return os.str();
}

std::string RoundTripReport::to_json() const {
  nlohmann::json j;
  j["exact"] = exact;
  j["diffs"] = nlohmann::json::array();
  for (const auto& d : diffs) {
    nlohmann::json jd;
    jd["doc_id"] = d.doc_id;
    jd["gained"] = d.gained;
    jd["lost"] = d.lost;
    j["diffs"].push_back(jd);
  }
  return j.dump(2);
}

}  // namespace spanclean
