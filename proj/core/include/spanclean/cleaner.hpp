#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "spanclean/corpus.hpp"
#include "spanclean/program.hpp"

namespace spanclean {

/// The materialized view: one row per extracted tuple, holding both spans
/// and the string values at those spans.
struct ExtractedTable {
  std::string program;
  std::vector<std::string> columns;  // output schema, sorted
  struct Row {
    std::string doc_id;
    std::vector<Span> spans;
    std::vector<std::string> values;
  };
  std::vector<Row> rows;  // sorted by (doc_id, spans)

  int column_index(const std::string& name) const;
};

/// A single-cell update: the row is identified by its full old content.
struct CellUpdate {
  std::string doc_id;
  std::vector<Span> row_spans;
  std::vector<std::string> row_values;
  std::string column;
  Span cell_span;
  std::string old_value;
  std::string new_value;
};

/// A cleaning rule: either a finite old->new mapping or a named built-in
/// normalizer, applied to one or more target columns. Outputs must stay in
/// the target variable's domain language.
struct CleaningRule {
  std::string name;
  std::vector<std::string> targets;
  std::map<std::string, std::string> mapping;
  std::string normalizer;  // "date_iso" or empty
  CharSet output_chars;    // declared output character set (diagnostic)
  std::string source_path;
};

/// Mapping-file format: directive lines `#! key: value` (name, target,
/// normalizer, output-chars), `#` comments, and two-column tab-separated
/// old/new rows with C-style escapes.
CleaningRule load_rule_file(const std::string& path);

/// The rule's proposal for one value; nullopt when the rule leaves it
/// unchanged.
std::optional<std::string> rule_value(const CleaningRule& rule,
                                      const std::string& old_value);

ExtractedTable extract_table(const SpannerProgram& p, const DocumentStore& s);

/// Proposes updates for every row whose target-column value the rule
/// changes. Every proposed value is checked against the variable's domain
/// language; a violating rule output raises an error.
std::vector<CellUpdate> apply_rule(const SpannerProgram& p,
                                   const ExtractedTable& t,
                                   const CleaningRule& rule);

/// Splices a new value over the span: the prefix before the span and the
/// suffix after it are unchanged.
Document dsyn(const Document& d, Span span, std::string_view new_value);

/// Applies the updates document-at-a-time in descending start-offset order.
/// Updates must reference live table rows, match the current document text,
/// and be pairwise non-overlapping within a document; violations reject the
/// whole batch. Returns a new store version.
DocumentStore translate_updates(const DocumentStore& s,
                                const ExtractedTable& t,
                                const std::vector<CellUpdate>& updates);

struct RoundTripReport {
  bool exact = true;
  struct DocDiff {
    std::string doc_id;
    std::vector<std::vector<std::string>> gained;   // rows extracted but not expected
    std::vector<std::vector<std::string>> lost;     // rows expected but not extracted
  };
  std::vector<DocDiff> diffs;
  std::string to_text() const;
  std::string to_json() const;
};

/// Re-extracts from the updated store and compares, per document and as
/// string relations, against the before-table with the updates applied.
RoundTripReport round_trip_check(const SpannerProgram& p,
                                 const ExtractedTable& before,
                                 const DocumentStore& after_store,
                                 const std::vector<CellUpdate>& updates);

// --- serialization ---------------------------------------------------------

/// Header line with column names; one row per line: doc_id, then per
/// variable `start,end,"value"`, tab-separated.
std::string table_to_tsv(const ExtractedTable& t);
/// The spans-hidden string-relation view.
std::string table_to_strings_tsv(const ExtractedTable& t);
std::string updates_to_tsv(const std::vector<CellUpdate>& updates);

}  // namespace spanclean
