#pragma once

#include <algorithm>
#include <compare>
#include <cstdint>
#include <map>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "spanclean/error.hpp"

namespace spanclean {

/// Half-open interval [start, end> of 1-based character offsets into one
/// document. start == end is the empty span at that offset.
struct Span {
  uint32_t start = 0;
  uint32_t end = 0;

  auto operator<=>(const Span&) const = default;

  uint32_t length() const { return end - start; }
  bool empty() const { return start == end; }

  bool valid_for(std::string_view text) const {
    return start >= 1 && start <= end && end <= text.size() + 1;
  }
  std::string_view slice(std::string_view text) const {
    return text.substr(start - 1, end - start);
  }
};

/// Symmetric span overlap: the two spans share a position, or one is an
/// empty span sitting inside or on the boundary of the other. Two empty
/// spans overlap only when they coincide.
inline bool spans_overlap(Span a, Span b) {
  if (a.empty() && b.empty()) return a.start == b.start;
  if (a.empty()) return b.start <= a.start && a.start <= b.end;
  if (b.empty()) return a.start <= b.start && b.start <= a.end;
  return std::max(a.start, b.start) < std::min(a.end, b.end);
}

inline std::string to_string(Span s) {
  return "[" + std::to_string(s.start) + "," + std::to_string(s.end) + ">";
}

/// C-style escaping for values embedded in reports and table files.
inline std::string escape_value(const std::string& v) {
  std::string out;
  for (char c : v) {
    switch (c) {
      case '\n':
        out += "\\n";
        break;
      case '\t':
        out += "\\t";
        break;
      case '"':
        out += "\\\"";
        break;
      case '\\':
        out += "\\\\";
        break;
      default:
        out.push_back(c);
    }
  }
  return out;
}

struct Document {
  std::string id;
  std::string text;
};

/// A set of tuples of spans over named columns. Columns are kept in sorted
/// order; rows are a set (no duplicates), each aligned to the columns.
class SpanRelation {
 public:
  using Row = std::vector<Span>;

  SpanRelation() = default;
  explicit SpanRelation(std::vector<std::string> columns)
      : columns_(std::move(columns)) {
    std::sort(columns_.begin(), columns_.end());
  }

  const std::vector<std::string>& columns() const { return columns_; }
  const std::set<Row>& rows() const { return rows_; }
  bool empty() const { return rows_.empty(); }
  std::size_t size() const { return rows_.size(); }

  int column_index(std::string_view name) const {
    for (std::size_t i = 0; i < columns_.size(); ++i)
      if (columns_[i] == name) return static_cast<int>(i);
    return -1;
  }

  void add_row(Row row) {
    if (row.size() != columns_.size())
      throw Error("row arity does not match relation schema");
    rows_.insert(std::move(row));
  }

  void add_row(const std::map<std::string, Span>& cells) {
    Row row(columns_.size());
    if (cells.size() != columns_.size())
      throw Error("row does not cover relation schema");
    for (const auto& [name, span] : cells) {
      int idx = column_index(name);
      if (idx < 0) throw Error("unknown column: " + name);
      row[static_cast<std::size_t>(idx)] = span;
    }
    rows_.insert(std::move(row));
  }

  SpanRelation unioned(const SpanRelation& other) const {
    if (columns_ != other.columns_)
      throw ProgramError("schema-mismatch",
                         "union of relations with different schemas");
    SpanRelation out(columns_);
    out.rows_ = rows_;
    out.rows_.insert(other.rows_.begin(), other.rows_.end());
    return out;
  }

  SpanRelation projected(const std::vector<std::string>& keep) const {
    SpanRelation out(keep);
    std::vector<int> idx;
    for (const auto& c : out.columns_) {
      int i = column_index(c);
      if (i < 0)
        throw ProgramError("schema-mismatch", "projection on missing column " + c);
      idx.push_back(i);
    }
    for (const auto& row : rows_) {
      Row r;
      r.reserve(idx.size());
      for (int i : idx) r.push_back(row[static_cast<std::size_t>(i)]);
      out.rows_.insert(std::move(r));
    }
    return out;
  }

  SpanRelation renamed(
      const std::map<std::string, std::string>& mapping) const {
    std::vector<std::string> cols;
    cols.reserve(columns_.size());
    for (const auto& c : columns_) {
      auto it = mapping.find(c);
      cols.push_back(it == mapping.end() ? c : it->second);
    }
    {
      auto sorted = cols;
      std::sort(sorted.begin(), sorted.end());
      if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end())
        throw ProgramError("schema-mismatch", "rename produces duplicate column");
    }
    SpanRelation out(cols);
    for (const auto& row : rows_) {
      std::map<std::string, Span> cells;
      for (std::size_t i = 0; i < cols.size(); ++i) cells[cols[i]] = row[i];
      out.add_row(cells);
    }
    return out;
  }

  /// Natural join: rows agreeing on the spans of all shared columns.
  SpanRelation joined(const SpanRelation& other) const {
    std::vector<std::string> all = columns_;
    for (const auto& c : other.columns_)
      if (column_index(c) < 0) all.push_back(c);
    SpanRelation out(all);

    std::vector<std::pair<int, int>> shared;  // (this idx, other idx)
    for (std::size_t i = 0; i < columns_.size(); ++i) {
      int j = other.column_index(columns_[i]);
      if (j >= 0) shared.push_back({static_cast<int>(i), j});
    }
    for (const auto& a : rows_) {
      for (const auto& b : other.rows_) {
        bool ok = true;
        for (auto [i, j] : shared)
          if (a[static_cast<std::size_t>(i)] != b[static_cast<std::size_t>(j)]) {
            ok = false;
            break;
          }
        if (!ok) continue;
        std::map<std::string, Span> cells;
        for (std::size_t i = 0; i < columns_.size(); ++i)
          cells[columns_[i]] = a[i];
        for (std::size_t j = 0; j < other.columns_.size(); ++j)
          cells[other.columns_[j]] = b[j];
        out.add_row(cells);
      }
    }
    return out;
  }

  friend bool operator==(const SpanRelation& a, const SpanRelation& b) {
    return a.columns_ == b.columns_ && a.rows_ == b.rows_;
  }

 private:
  std::vector<std::string> columns_;
  std::set<Row> rows_;
};

}  // namespace spanclean
