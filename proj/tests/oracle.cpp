#include "oracle.hpp"

#include <algorithm>
#include <functional>
#include <unordered_map>
#include <vector>

namespace spanclean::testing {

namespace {

// (variable index, span), sorted by variable index
using Binding = std::vector<std::pair<uint16_t, Span>>;
using BindingSet = std::vector<Binding>;

// nullopt when the two bindings assign the same variable (an invalid run)
bool merge_bindings(const Binding& a, const Binding& b, Binding& out) {
  out.clear();
  std::size_t i = 0, j = 0;
  while (i < a.size() && j < b.size()) {
    if (a[i].first == b[j].first) return false;
    if (a[i].first < b[j].first)
      out.push_back(a[i++]);
    else
      out.push_back(b[j++]);
  }
  while (i < a.size()) out.push_back(a[i++]);
  while (j < b.size()) out.push_back(b[j++]);
  return true;
}

void dedupe(BindingSet& s) {
  std::sort(s.begin(), s.end());
  s.erase(std::unique(s.begin(), s.end()), s.end());
}

// binary form of the tree, with a stable node numbering for memoization
struct ONode {
  RegexKind kind;
  char lit = 0, lo = 0, hi = 0;
  uint16_t var = 0;
  int left = -1, right = -1;
  std::vector<char> removed;  // Subtract chain
};

struct Oracle {
  std::vector<ONode> nodes;
  std::vector<std::string> vars;
  const Alphabet* sigma = nullptr;
  std::string_view doc;
  std::unordered_map<uint64_t, BindingSet> memo;

  int build(const RegexPtr& n) {
    ONode o;
    o.kind = n->kind;
    switch (n->kind) {
      case RegexKind::Literal:
        o.lit = n->lit;
        break;
      case RegexKind::Range:
        o.lo = n->lo;
        o.hi = n->hi;
        break;
      case RegexKind::Subtract: {
        const RegexNode* cur = n.get();
        while (cur->kind == RegexKind::Subtract) {
          o.removed.push_back(cur->lit);
          cur = cur->children[0].get();
        }
        break;
      }
      case RegexKind::Capture: {
        auto it = std::find(vars.begin(), vars.end(), n->var);
        o.var = static_cast<uint16_t>(it - vars.begin());
        o.left = build(n->children[0]);
        break;
      }
      case RegexKind::Star:
        o.left = build(n->children[0]);
        break;
      case RegexKind::Alt:
      case RegexKind::Concat: {
        // right-fold into binary nodes
        int right = build(n->children.back());
        for (std::size_t i = n->children.size() - 1; i-- > 1;) {
          ONode mid;
          mid.kind = n->kind;
          mid.left = build(n->children[i]);
          mid.right = right;
          nodes.push_back(mid);
          right = static_cast<int>(nodes.size() - 1);
        }
        o.left = build(n->children[0]);
        o.right = right;
        break;
      }
      default:
        break;
    }
    nodes.push_back(o);
    return static_cast<int>(nodes.size() - 1);
  }

  bool char_matches(const ONode& o, unsigned char c) const {
    if (!sigma->contains(c)) return false;
    switch (o.kind) {
      case RegexKind::Literal:
        return c == static_cast<unsigned char>(o.lit);
      case RegexKind::Range:
        return static_cast<unsigned char>(o.lo) <= c &&
               c <= static_cast<unsigned char>(o.hi);
      case RegexKind::Any:
        return true;
      case RegexKind::Subtract:
        for (char r : o.removed)
          if (c == static_cast<unsigned char>(r)) return false;
        return true;
      default:
        return false;
    }
  }

  const BindingSet& rel(int id, int i, int j) {
    uint64_t key = (static_cast<uint64_t>(id) << 40) |
                   (static_cast<uint64_t>(i) << 20) | static_cast<uint64_t>(j);
    auto it = memo.find(key);
    if (it != memo.end()) return it->second;
    BindingSet out;
    const ONode& o = nodes[static_cast<std::size_t>(id)];
    switch (o.kind) {
      case RegexKind::EmptyLang:
        break;
      case RegexKind::Epsilon:
        if (i == j) out.push_back({});
        break;
      case RegexKind::Literal:
      case RegexKind::Range:
      case RegexKind::Any:
      case RegexKind::Subtract:
        if (j == i + 1 &&
            char_matches(o, static_cast<unsigned char>(doc[static_cast<std::size_t>(i)])))
          out.push_back({});
        break;
      case RegexKind::Alt: {
        out = rel(o.left, i, j);
        const BindingSet& r = rel(o.right, i, j);
        out.insert(out.end(), r.begin(), r.end());
        dedupe(out);
        break;
      }
      case RegexKind::Concat: {
        Binding merged;
        for (int k = i; k <= j; ++k) {
          const BindingSet& l = rel(o.left, i, k);
          if (l.empty()) continue;
          const BindingSet& r = rel(o.right, k, j);
          for (const Binding& a : l)
            for (const Binding& b : r)
              if (merge_bindings(a, b, merged)) out.push_back(merged);
        }
        dedupe(out);
        break;
      }
      case RegexKind::Star: {
        if (i == j) out.push_back({});
        Binding merged;
        for (int k = i + 1; k <= j; ++k) {
          const BindingSet& l = rel(o.left, i, k);
          if (l.empty()) continue;
          const BindingSet& r = rel(id, k, j);
          for (const Binding& a : l)
            for (const Binding& b : r)
              if (merge_bindings(a, b, merged)) out.push_back(merged);
        }
        dedupe(out);
        break;
      }
      case RegexKind::Capture: {
        Span sp{static_cast<uint32_t>(i + 1), static_cast<uint32_t>(j + 1)};
        Binding self{{o.var, sp}};
        Binding merged;
        for (const Binding& a : rel(o.left, i, j))
          if (merge_bindings(a, self, merged)) out.push_back(merged);
        dedupe(out);
        break;
      }
    }
    return memo.emplace(key, std::move(out)).first->second;
  }
};

}  // namespace

std::set<std::map<std::string, Span>> oracle_relation(const RegexCV& r,
                                                      std::string_view doc) {
  Oracle o;
  std::set<std::string> vs = svars(r);
  o.vars.assign(vs.begin(), vs.end());
  o.sigma = &r.alphabet();
  o.doc = doc;
  int root = o.build(r.root());
  const BindingSet& res = o.rel(root, 0, static_cast<int>(doc.size()));
  std::set<std::map<std::string, Span>> out;
  for (const Binding& b : res) {
    if (b.size() != o.vars.size()) continue;  // partial runs are invalid
    std::map<std::string, Span> row;
    for (const auto& [vi, sp] : b) row[o.vars[vi]] = sp;
    out.insert(std::move(row));
  }
  return out;
}

SpanRelation oracle_span_relation(const RegexCV& r, std::string_view doc) {
  SpanRelation rel(std::vector<std::string>(svars(r).begin(), svars(r).end()));
  for (const auto& row : oracle_relation(r, doc)) rel.add_row(row);
  return rel;
}

bool oracle_accepts(const RegexCV& r, std::string_view doc) {
  Oracle o;
  std::set<std::string> vs = svars(r);
  o.vars.assign(vs.begin(), vs.end());
  o.sigma = &r.alphabet();
  o.doc = doc;
  int root = o.build(r.root());
  // a parse exists iff some binding set entry exists, partial or not, once
  // captures are ignored; treat captures as transparent by accepting any
  // binding (runs that double-bind are still runs of the erased language)
  // -- handled by a separate transparent walk:
  std::function<bool(int, int, int)> ok = [&](int id, int i, int j) -> bool {
    const ONode& n = o.nodes[static_cast<std::size_t>(id)];
    switch (n.kind) {
      case RegexKind::EmptyLang:
        return false;
      case RegexKind::Epsilon:
        return i == j;
      case RegexKind::Literal:
      case RegexKind::Range:
      case RegexKind::Any:
      case RegexKind::Subtract:
        return j == i + 1 &&
               o.char_matches(n, static_cast<unsigned char>(doc[static_cast<std::size_t>(i)]));
      case RegexKind::Alt:
        return ok(n.left, i, j) || ok(n.right, i, j);
      case RegexKind::Concat:
        for (int k = i; k <= j; ++k)
          if (ok(n.left, i, k) && ok(n.right, k, j)) return true;
        return false;
      case RegexKind::Star: {
        if (i == j) return true;
        for (int k = i + 1; k <= j; ++k)
          if (ok(n.left, i, k) && ok(id, k, j)) return true;
        return false;
      }
      case RegexKind::Capture:
        return ok(n.left, i, j);
    }
    return false;
  };
  return ok(root, 0, static_cast<int>(doc.size()));
}

}  // namespace spanclean::testing
