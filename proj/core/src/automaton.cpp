#include "spanclean/automaton.hpp"

#include <algorithm>
#include <array>
#include <cassert>
#include <deque>
#include <functional>
#include <queue>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

namespace spanclean {

namespace {

using EdgeKind = VSetAutomaton::EdgeKind;
using Edge = VSetAutomaton::Edge;
using State = VSetAutomaton::State;

constexpr std::size_t kMaxConfigs = 4'000'000;  // loud failure over a hang

inline unsigned status_get(uint64_t st, unsigned var) {
  return (st >> (2 * var)) & 3u;
}
inline uint64_t status_set(uint64_t st, unsigned var, unsigned val) {
  return (st & ~(uint64_t(3) << (2 * var))) | (uint64_t(val) << (2 * var));
}
// 0 = waiting, 1 = open, 2 = closed
constexpr unsigned kWaiting = 0, kOpen = 1, kClosed = 2;

uint64_t all_closed(std::size_t nvars) {
  uint64_t st = 0;
  for (std::size_t i = 0; i < nvars; ++i) st = status_set(st, i, kClosed);
  return st;
}

struct PairHash {
  std::size_t operator()(const std::pair<uint64_t, uint64_t>& p) const {
    return std::hash<uint64_t>()(p.first * 0x9E3779B97F4A7C15ull ^ p.second);
  }
};

// ---------------------------------------------------------------------------
// Thompson construction
// ---------------------------------------------------------------------------

struct Builder {
  std::vector<State> states;
  uint32_t add_state() {
    states.emplace_back();
    return static_cast<uint32_t>(states.size() - 1);
  }
  void edge(uint32_t from, Edge e) { states[from].edges.push_back(std::move(e)); }
  void eps(uint32_t from, uint32_t to) {
    edge(from, Edge{EdgeKind::Eps, 0, CharSet(), to});
  }
};

struct Frag {
  uint32_t in, out;
};

Frag thompson(Builder& b, const RegexPtr& n, const Alphabet& sigma,
              const std::map<std::string, uint16_t>& varidx) {
  switch (n->kind) {
    case RegexKind::EmptyLang: {
      Frag f{b.add_state(), b.add_state()};
      return f;
    }
    case RegexKind::Epsilon: {
      Frag f{b.add_state(), b.add_state()};
      b.eps(f.in, f.out);
      return f;
    }
    case RegexKind::Literal:
    case RegexKind::Range:
    case RegexKind::Any:
    case RegexKind::Subtract: {
      CharSet cls;
      switch (n->kind) {
        case RegexKind::Literal:
          cls = CharSet::single(static_cast<unsigned char>(n->lit));
          break;
        case RegexKind::Range:
          cls = CharSet::range(static_cast<unsigned char>(n->lo),
                               static_cast<unsigned char>(n->hi));
          break;
        case RegexKind::Any:
          cls = sigma.set();
          break;
        case RegexKind::Subtract: {
          std::vector<char> removed;
          const RegexNode* cur = n.get();
          while (cur->kind == RegexKind::Subtract) {
            removed.push_back(cur->lit);
            cur = cur->children[0].get();
          }
          cls = sigma.set();
          for (char c : removed) cls.remove(static_cast<unsigned char>(c));
          break;
        }
        default:
          break;
      }
      cls.intersect(sigma.set());
      Frag f{b.add_state(), b.add_state()};
      b.edge(f.in, Edge{EdgeKind::Chars, 0, cls, f.out});
      return f;
    }
    case RegexKind::Alt: {
      Frag f{b.add_state(), b.add_state()};
      for (const auto& c : n->children) {
        Frag g = thompson(b, c, sigma, varidx);
        b.eps(f.in, g.in);
        b.eps(g.out, f.out);
      }
      return f;
    }
    case RegexKind::Concat: {
      Frag first = thompson(b, n->children[0], sigma, varidx);
      uint32_t cur = first.out;
      for (std::size_t i = 1; i < n->children.size(); ++i) {
        Frag g = thompson(b, n->children[i], sigma, varidx);
        b.eps(cur, g.in);
        cur = g.out;
      }
      return Frag{first.in, cur};
    }
    case RegexKind::Star: {
      Frag body = thompson(b, n->children[0], sigma, varidx);
      Frag f{b.add_state(), b.add_state()};
      b.eps(f.in, f.out);
      b.eps(f.in, body.in);
      b.eps(body.out, body.in);
      b.eps(body.out, f.out);
      return f;
    }
    case RegexKind::Capture: {
      Frag body = thompson(b, n->children[0], sigma, varidx);
      Frag f{b.add_state(), b.add_state()};
      uint16_t v = varidx.at(n->var);
      b.edge(f.in, Edge{EdgeKind::Open, v, CharSet(), body.in});
      b.edge(body.out, Edge{EdgeKind::Close, v, CharSet(), f.out});
      return f;
    }
  }
  throw Error("unreachable regex kind");
}

// ---------------------------------------------------------------------------
// Functionality analysis (on the raw automaton, invalid runs included)
// ---------------------------------------------------------------------------

bool analyze_functional(const VSetAutomaton& a) {
  const std::size_t nvars = a.vars.size();
  const uint64_t done = all_closed(nvars);
  std::unordered_set<std::pair<uint64_t, uint64_t>, PairHash> seen;
  std::vector<bool> bad(a.states.size(), false);
  std::deque<std::pair<uint32_t, uint64_t>> work;
  std::deque<uint32_t> bad_work;

  auto push = [&](uint32_t s, uint64_t st) {
    if (seen.insert({s, st}).second) {
      if (seen.size() > kMaxConfigs)
        throw Error("functionality analysis exceeded the configuration budget");
      work.push_back({s, st});
    }
  };
  auto mark_bad = [&](uint32_t s) {
    if (!bad[s]) {
      bad[s] = true;
      bad_work.push_back(s);
    }
  };

  push(a.initial, 0);
  while (!work.empty()) {
    auto [s, st] = work.front();
    work.pop_front();
    for (const auto& e : a.states[s].edges) {
      switch (e.kind) {
        case EdgeKind::Chars:
          if (!e.cls.empty()) push(e.to, st);
          break;
        case EdgeKind::Eps:
          push(e.to, st);
          break;
        case EdgeKind::Open:
          if (status_get(st, e.var) == kWaiting)
            push(e.to, status_set(st, e.var, kOpen));
          else
            mark_bad(e.to);
          break;
        case EdgeKind::Close:
          if (status_get(st, e.var) == kOpen)
            push(e.to, status_set(st, e.var, kClosed));
          else
            mark_bad(e.to);
          break;
      }
    }
  }
  while (!bad_work.empty()) {
    uint32_t s = bad_work.front();
    bad_work.pop_front();
    for (const auto& e : a.states[s].edges)
      if (e.kind != EdgeKind::Chars || !e.cls.empty()) mark_bad(e.to);
  }
  for (const auto& [s, st] : seen)
    if (a.states[s].final_state && st != done) return false;
  for (std::size_t s = 0; s < a.states.size(); ++s)
    if (bad[s] && a.states[s].final_state) return false;
  return true;
}

// ---------------------------------------------------------------------------
// Normalization: status annotation, eps elimination, pruning, op sorting
// ---------------------------------------------------------------------------

VSetAutomaton canonical_empty(const VSetAutomaton& proto) {
  VSetAutomaton out;
  out.vars = proto.vars;
  out.alphabet = proto.alphabet;
  out.initial = 0;
  out.states.resize(1);
  out.functional = proto.functional;
  out.well_behaved = out.pruned = out.op_closed = true;
  return out;
}

// Restricts to valid runs by pairing each state with its variable statuses.
VSetAutomaton annotate_status(const VSetAutomaton& a) {
  VSetAutomaton out;
  out.vars = a.vars;
  out.alphabet = a.alphabet;
  out.functional = a.functional;
  const uint64_t done = all_closed(a.vars.size());

  std::unordered_map<std::pair<uint64_t, uint64_t>, uint32_t, PairHash> ids;
  std::deque<std::pair<uint32_t, uint64_t>> work;
  auto intern = [&](uint32_t s, uint64_t st) {
    auto [it, fresh] = ids.insert({{s, st}, static_cast<uint32_t>(out.states.size())});
    if (fresh) {
      if (out.states.size() > kMaxConfigs)
        throw Error("status annotation exceeded the configuration budget");
      out.states.emplace_back();
      out.states.back().status = st;
      out.states.back().final_state = a.states[s].final_state && st == done;
      work.push_back({s, st});
    }
    return it->second;
  };

  out.initial = intern(a.initial, 0);
  while (!work.empty()) {
    auto [s, st] = work.front();
    work.pop_front();
    uint32_t id = ids.at({s, st});
    for (const auto& e : a.states[s].edges) {
      switch (e.kind) {
        case EdgeKind::Chars:
          if (!e.cls.empty())
            out.states[id].edges.push_back(
                Edge{EdgeKind::Chars, 0, e.cls, intern(e.to, st)});
          break;
        case EdgeKind::Eps:
          out.states[id].edges.push_back(
              Edge{EdgeKind::Eps, 0, CharSet(), intern(e.to, st)});
          break;
        case EdgeKind::Open:
          if (status_get(st, e.var) == kWaiting)
            out.states[id].edges.push_back(
                Edge{EdgeKind::Open, e.var, CharSet(),
                     intern(e.to, status_set(st, e.var, kOpen))});
          break;
        case EdgeKind::Close:
          if (status_get(st, e.var) == kOpen)
            out.states[id].edges.push_back(
                Edge{EdgeKind::Close, e.var, CharSet(),
                     intern(e.to, status_set(st, e.var, kClosed))});
          break;
      }
    }
  }
  out.well_behaved = true;
  return out;
}

VSetAutomaton eliminate_eps(const VSetAutomaton& a) {
  VSetAutomaton out;
  out.vars = a.vars;
  out.alphabet = a.alphabet;
  out.functional = a.functional;
  out.well_behaved = a.well_behaved;
  out.initial = a.initial;
  out.states.resize(a.states.size());

  for (std::size_t s = 0; s < a.states.size(); ++s) {
    out.states[s].status = a.states[s].status;
    // epsilon closure
    std::vector<uint32_t> closure;
    std::vector<bool> seen(a.states.size(), false);
    std::deque<uint32_t> work{static_cast<uint32_t>(s)};
    seen[s] = true;
    while (!work.empty()) {
      uint32_t t = work.front();
      work.pop_front();
      closure.push_back(t);
      for (const auto& e : a.states[t].edges)
        if (e.kind == EdgeKind::Eps && !seen[e.to]) {
          seen[e.to] = true;
          work.push_back(e.to);
        }
    }
    bool fin = false;
    for (uint32_t t : closure) {
      if (a.states[t].final_state) fin = true;
      for (const auto& e : a.states[t].edges)
        if (e.kind != EdgeKind::Eps) out.states[s].edges.push_back(e);
    }
    out.states[s].final_state = fin;
  }
  return out;
}

VSetAutomaton prune(const VSetAutomaton& a) {
  const std::size_t n = a.states.size();
  std::vector<bool> fwd(n, false), bwd(n, false);
  {
    std::deque<uint32_t> work{a.initial};
    fwd[a.initial] = true;
    while (!work.empty()) {
      uint32_t s = work.front();
      work.pop_front();
      for (const auto& e : a.states[s].edges) {
        if (e.kind == EdgeKind::Chars && e.cls.empty()) continue;
        if (!fwd[e.to]) {
          fwd[e.to] = true;
          work.push_back(e.to);
        }
      }
    }
  }
  {
    std::vector<std::vector<uint32_t>> rev(n);
    for (std::size_t s = 0; s < n; ++s)
      for (const auto& e : a.states[s].edges) {
        if (e.kind == EdgeKind::Chars && e.cls.empty()) continue;
        rev[e.to].push_back(static_cast<uint32_t>(s));
      }
    std::deque<uint32_t> work;
    for (std::size_t s = 0; s < n; ++s)
      if (a.states[s].final_state) {
        bwd[s] = true;
        work.push_back(static_cast<uint32_t>(s));
      }
    while (!work.empty()) {
      uint32_t s = work.front();
      work.pop_front();
      for (uint32_t p : rev[s])
        if (!bwd[p]) {
          bwd[p] = true;
          work.push_back(p);
        }
    }
  }
  if (!fwd[a.initial] || !bwd[a.initial]) return canonical_empty(a);

  std::vector<int> remap(n, -1);
  VSetAutomaton out;
  out.vars = a.vars;
  out.alphabet = a.alphabet;
  out.functional = a.functional;
  out.well_behaved = a.well_behaved;
  for (std::size_t s = 0; s < n; ++s)
    if (fwd[s] && bwd[s]) {
      remap[s] = static_cast<int>(out.states.size());
      out.states.emplace_back();
      out.states.back().final_state = a.states[s].final_state;
      out.states.back().status = a.states[s].status;
    }
  for (std::size_t s = 0; s < n; ++s) {
    if (remap[s] < 0) continue;
    for (const auto& e : a.states[s].edges) {
      if (e.kind == EdgeKind::Chars && e.cls.empty()) continue;
      if (remap[e.to] < 0) continue;
      Edge copy = e;
      copy.to = static_cast<uint32_t>(remap[e.to]);
      out.states[remap[s]].edges.push_back(std::move(copy));
    }
  }
  out.initial = static_cast<uint32_t>(remap[a.initial]);
  out.pruned = true;
  return out;
}

// Rebuilds runs of operation edges between character edges in a canonical
// order: variables ascending, open before close. Requires a well-behaved,
// eps-free automaton. Afterwards two automata over a shared variable order
// present shared operations in the same sequence, which keeps the pairwise
// product construction complete.
VSetAutomaton sort_operations(const VSetAutomaton& a) {
  if (a.states.empty()) return a;
  VSetAutomaton out;
  out.vars = a.vars;
  out.alphabet = a.alphabet;
  out.functional = a.functional;

  const std::size_t n = a.states.size();
  std::vector<bool> is_anchor(n, false);
  is_anchor[a.initial] = true;
  for (std::size_t s = 0; s < n; ++s)
    for (const auto& e : a.states[s].edges)
      if (e.kind == EdgeKind::Chars) is_anchor[e.to] = true;

  std::vector<int> anchor_id(n, -1);
  for (std::size_t s = 0; s < n; ++s)
    if (is_anchor[s]) {
      anchor_id[s] = static_cast<int>(out.states.size());
      out.states.emplace_back();
      out.states.back().status = a.states[s].status;
    }
  out.initial = static_cast<uint32_t>(anchor_id[a.initial]);

  struct ChainOut {
    bool final_state = false;
    std::map<uint32_t, CharSet> char_edges;  // target anchor -> class union
  };

  for (std::size_t s = 0; s < n; ++s) {
    if (!is_anchor[s]) continue;
    // operation reachability from the anchor
    std::map<uint64_t, ChainOut> by_delta;  // keyed by resulting status
    std::vector<bool> seen(n, false);
    std::deque<uint32_t> work{static_cast<uint32_t>(s)};
    seen[s] = true;
    while (!work.empty()) {
      uint32_t t = work.front();
      work.pop_front();
      uint64_t st = a.states[t].status;
      ChainOut& co = by_delta[st];
      if (a.states[t].final_state) co.final_state = true;
      for (const auto& e : a.states[t].edges) {
        if (e.kind == EdgeKind::Chars) {
          auto [it, fresh] = co.char_edges.insert({e.to, e.cls});
          if (!fresh) it->second.unite(e.cls);
        } else if (e.kind == EdgeKind::Open || e.kind == EdgeKind::Close) {
          if (!seen[e.to]) {
            seen[e.to] = true;
            work.push_back(e.to);
          }
        } else {
          throw Error("sort_operations requires an eps-free automaton");
        }
      }
    }

    uint64_t base = a.states[s].status;
    for (auto& [st, co] : by_delta) {
      if (co.char_edges.empty() && !co.final_state) continue;
      // build the canonical op chain from `base` to `st`
      uint32_t cur = static_cast<uint32_t>(anchor_id[s]);
      uint64_t cur_st = base;
      auto emit = [&](EdgeKind kind, uint16_t var, unsigned newval) {
        uint32_t nxt = static_cast<uint32_t>(out.states.size());
        out.states.emplace_back();
        cur_st = status_set(cur_st, var, newval);
        out.states.back().status = cur_st;
        out.states[cur].edges.push_back(Edge{kind, var, CharSet(), nxt});
        cur = nxt;
      };
      for (std::size_t v = 0; v < a.vars.size(); ++v) {
        unsigned from = status_get(base, v), to = status_get(st, v);
        if (from == to) continue;
        if (from == kWaiting && to == kOpen) {
          emit(EdgeKind::Open, static_cast<uint16_t>(v), kOpen);
        } else if (from == kOpen && to == kClosed) {
          emit(EdgeKind::Close, static_cast<uint16_t>(v), kClosed);
        } else if (from == kWaiting && to == kClosed) {
          emit(EdgeKind::Open, static_cast<uint16_t>(v), kOpen);
          emit(EdgeKind::Close, static_cast<uint16_t>(v), kClosed);
        } else {
          throw Error("inconsistent status delta");
        }
      }
      if (co.final_state) out.states[cur].final_state = true;
      for (const auto& [target, cls] : co.char_edges)
        out.states[cur].edges.push_back(
            Edge{EdgeKind::Chars, 0, cls,
                 static_cast<uint32_t>(anchor_id[target])});
    }
  }
  out.well_behaved = true;
  out.op_closed = true;
  return out;
}

}  // namespace

VSetAutomaton normalize(const VSetAutomaton& a) {
  VSetAutomaton r = prune(sort_operations(prune(eliminate_eps(annotate_status(a)))));
  r.op_closed = true;
  r.well_behaved = true;
  return r;
}

// ---------------------------------------------------------------------------
// compile / is_functional
// ---------------------------------------------------------------------------

VSetAutomaton compile(const RegexCV& r) {
  std::set<std::string> vs = svars(r);
  VSetAutomaton raw;
  raw.vars.assign(vs.begin(), vs.end());
  if (raw.vars.size() > 32) throw Error("more than 32 capture variables");
  raw.alphabet = r.alphabet();

  std::map<std::string, uint16_t> varidx;
  for (std::size_t i = 0; i < raw.vars.size(); ++i)
    varidx[raw.vars[i]] = static_cast<uint16_t>(i);

  Builder b;
  Frag f = r.root() ? thompson(b, r.root(), r.alphabet(), varidx)
                    : Frag{b.add_state(), b.add_state()};
  raw.states = std::move(b.states);
  raw.initial = f.in;
  raw.states[f.out].final_state = true;

  raw.functional = analyze_functional(raw);
  return normalize(raw);
}

bool is_functional(const VSetAutomaton& a) { return a.functional; }

// ---------------------------------------------------------------------------
// match_all
// ---------------------------------------------------------------------------

SpanRelation match_all(const VSetAutomaton& a, const Document& d) {
  if (!a.functional)
    throw Error("match_all requires a functional automaton");

  const std::size_t nvars = a.vars.size();
  using Assign = std::vector<Span>;

  std::vector<Assign> assigns;
  std::map<Assign, uint32_t> assign_ids;
  auto intern = [&](const Assign& as) {
    auto [it, fresh] = assign_ids.insert({as, static_cast<uint32_t>(assigns.size())});
    if (fresh) assigns.push_back(as);
    return it->second;
  };

  std::unordered_set<uint64_t> seen;
  std::vector<std::pair<uint32_t, uint32_t>> frontier;  // (state, assign id)
  auto add = [&](uint32_t s, uint32_t aid,
                 std::vector<std::pair<uint32_t, uint32_t>>& outv) {
    uint64_t key = (uint64_t(s) << 32) | aid;
    if (seen.insert(key).second) {
      if (seen.size() > kMaxConfigs)
        throw Error("match_all exceeded the configuration budget");
      outv.push_back({s, aid});
    }
  };

  Assign init(nvars, Span{0, 0});
  add(a.initial, intern(init), frontier);

  const std::string& text = d.text;
  for (std::size_t b = 0; b <= text.size(); ++b) {
    // closure over operation (and eps) edges at boundary b
    for (std::size_t i = 0; i < frontier.size(); ++i) {
      auto [s, aid] = frontier[i];
      for (const auto& e : a.states[s].edges) {
        if (e.kind == EdgeKind::Chars) continue;
        if (e.kind == EdgeKind::Eps) {
          add(e.to, aid, frontier);
          continue;
        }
        Assign as = assigns[aid];
        Span& sp = as[e.var];
        if (e.kind == EdgeKind::Open) {
          if (sp.start != 0) continue;  // invalid reopen
          sp.start = static_cast<uint32_t>(b + 1);
        } else {
          if (sp.start == 0 || sp.end != 0) continue;
          sp.end = static_cast<uint32_t>(b + 1);
        }
        add(e.to, intern(as), frontier);
      }
    }
    if (b == text.size()) break;
    unsigned char c = static_cast<unsigned char>(text[b]);
    std::vector<std::pair<uint32_t, uint32_t>> next;
    seen.clear();
    for (const auto& [s, aid] : frontier)
      for (const auto& e : a.states[s].edges)
        if (e.kind == EdgeKind::Chars && e.cls.contains(c)) add(e.to, aid, next);
    frontier = std::move(next);
    if (frontier.empty()) break;
  }

  SpanRelation rel(a.vars);
  for (const auto& [s, aid] : frontier) {
    if (!a.states[s].final_state) continue;
    const Assign& as = assigns[aid];
    bool complete = true;
    for (const Span& sp : as)
      if (sp.start == 0 || sp.end == 0) {
        complete = false;
        break;
      }
    if (complete) rel.add_row(as);
  }
  return rel;
}

// ---------------------------------------------------------------------------
// emptiness with witness
// ---------------------------------------------------------------------------

std::optional<EmptinessWitness> emptiness(const VSetAutomaton& a) {
  const uint64_t done = all_closed(a.vars.size());

  // Dijkstra over (doc length, doc content)
  using Key = std::pair<uint32_t, uint64_t>;
  std::map<Key, std::string> best;  // visited configs -> best doc (for dedupe)
  struct QItem {
    std::string doc;
    uint32_t state;
    uint64_t status;
    std::vector<std::pair<uint16_t, std::pair<bool, uint32_t>>> ops;
    bool operator>(const QItem& o) const {
      if (doc.size() != o.doc.size()) return doc.size() > o.doc.size();
      if (doc != o.doc) return doc > o.doc;
      if (state != o.state) return state > o.state;
      return status > o.status;
    }
  };
  std::priority_queue<QItem, std::vector<QItem>, std::greater<QItem>> pq;
  pq.push(QItem{"", a.initial, 0, {}});

  std::size_t popped = 0;
  while (!pq.empty()) {
    QItem cur = pq.top();
    pq.pop();
    Key key{cur.state, cur.status};
    auto it = best.find(key);
    if (it != best.end()) continue;  // first pop is optimal
    best[key] = cur.doc;
    if (++popped > kMaxConfigs)
      throw Error("emptiness search exceeded the configuration budget");

    if (a.states[cur.state].final_state && cur.status == done) {
      EmptinessWitness w;
      w.doc = cur.doc;
      std::vector<Span> spans(a.vars.size(), Span{0, 0});
      for (const auto& [var, ev] : cur.ops) {
        if (ev.first)
          spans[var].start = ev.second + 1;
        else
          spans[var].end = ev.second + 1;
      }
      for (std::size_t i = 0; i < a.vars.size(); ++i) w.row[a.vars[i]] = spans[i];
      return w;
    }

    for (const auto& e : a.states[cur.state].edges) {
      switch (e.kind) {
        case EdgeKind::Eps:
          if (!best.count({e.to, cur.status}))
            pq.push(QItem{cur.doc, e.to, cur.status, cur.ops});
          break;
        case EdgeKind::Open:
          if (status_get(cur.status, e.var) == kWaiting) {
            uint64_t st = status_set(cur.status, e.var, kOpen);
            if (!best.count({e.to, st})) {
              auto ops = cur.ops;
              ops.push_back({e.var, {true, static_cast<uint32_t>(cur.doc.size())}});
              pq.push(QItem{cur.doc, e.to, st, std::move(ops)});
            }
          }
          break;
        case EdgeKind::Close:
          if (status_get(cur.status, e.var) == kOpen) {
            uint64_t st = status_set(cur.status, e.var, kClosed);
            if (!best.count({e.to, st})) {
              auto ops = cur.ops;
              ops.push_back({e.var, {false, static_cast<uint32_t>(cur.doc.size())}});
              pq.push(QItem{cur.doc, e.to, st, std::move(ops)});
            }
          }
          break;
        case EdgeKind::Chars: {
          if (e.cls.empty()) break;
          // smallest member suffices for a shortest lex-minimal witness
          unsigned char c = 0;
          for (unsigned x = 0; x < 256; ++x)
            if (e.cls.contains(static_cast<unsigned char>(x))) {
              c = static_cast<unsigned char>(x);
              break;
            }
          if (!best.count({e.to, cur.status}))
            pq.push(QItem{cur.doc + static_cast<char>(c), e.to, cur.status,
                          cur.ops});
          break;
        }
      }
    }
  }
  return std::nullopt;
}

// ---------------------------------------------------------------------------
// algebra constructions
// ---------------------------------------------------------------------------

namespace {

VSetAutomaton ensure_normal(const VSetAutomaton& a) {
  if (a.well_behaved && a.pruned && a.op_closed) return a;
  return normalize(a);
}

}  // namespace

VSetAutomaton union_a(const VSetAutomaton& a, const VSetAutomaton& b) {
  if (a.vars != b.vars)
    throw ProgramError("schema-mismatch",
                       "union of non-union-compatible automata");
  if (!(a.alphabet == b.alphabet))
    throw Error("union of automata over different alphabets");

  VSetAutomaton merged;
  merged.vars = a.vars;
  merged.alphabet = a.alphabet;
  merged.functional = a.functional && b.functional;
  uint32_t init = 0;
  merged.states.emplace_back();
  uint32_t offa = 1;
  for (const auto& s : a.states) merged.states.push_back(s);
  uint32_t offb = static_cast<uint32_t>(merged.states.size());
  for (const auto& s : b.states) merged.states.push_back(s);
  for (std::size_t s = offa; s < offb; ++s)
    for (auto& e : merged.states[s].edges) e.to += offa;
  for (std::size_t s = offb; s < merged.states.size(); ++s)
    for (auto& e : merged.states[s].edges) e.to += offb;
  merged.states[init].edges.push_back(
      Edge{EdgeKind::Eps, 0, CharSet(), a.initial + offa});
  merged.states[init].edges.push_back(
      Edge{EdgeKind::Eps, 0, CharSet(), b.initial + offb});
  merged.initial = init;
  return normalize(merged);
}

VSetAutomaton project_a(const VSetAutomaton& a,
                        const std::set<std::string>& keep) {
  if (!a.functional)
    throw Error("projection requires a functional automaton");
  for (const auto& k : keep)
    if (a.var_index(k) < 0)
      throw ProgramError("schema-mismatch", "projection on missing variable " + k);

  VSetAutomaton out;
  out.vars.assign(keep.begin(), keep.end());
  out.alphabet = a.alphabet;
  out.functional = true;
  out.initial = a.initial;
  std::vector<int> remap(a.vars.size(), -1);
  for (std::size_t i = 0; i < a.vars.size(); ++i) {
    auto it = std::find(out.vars.begin(), out.vars.end(), a.vars[i]);
    if (it != out.vars.end())
      remap[i] = static_cast<int>(it - out.vars.begin());
  }
  out.states.resize(a.states.size());
  for (std::size_t s = 0; s < a.states.size(); ++s) {
    out.states[s].final_state = a.states[s].final_state;
    for (const auto& e : a.states[s].edges) {
      Edge copy = e;
      if (e.kind == EdgeKind::Open || e.kind == EdgeKind::Close) {
        if (remap[e.var] < 0) {
          copy.kind = EdgeKind::Eps;
          copy.var = 0;
        } else {
          copy.var = static_cast<uint16_t>(remap[e.var]);
        }
      }
      out.states[s].edges.push_back(std::move(copy));
    }
  }
  return normalize(out);
}

VSetAutomaton rename_a(const VSetAutomaton& a,
                       const std::map<std::string, std::string>& mapping) {
  std::vector<std::string> newvars = a.vars;
  for (const auto& [from, to] : mapping) {
    int idx = a.var_index(from);
    if (idx < 0)
      throw ProgramError("schema-mismatch", "rename of missing variable " + from);
    newvars[static_cast<std::size_t>(idx)] = to;
  }
  {
    auto sorted = newvars;
    std::sort(sorted.begin(), sorted.end());
    if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end())
      throw ProgramError("schema-mismatch", "rename produces duplicate variable");
  }
  std::vector<std::string> sortedvars = newvars;
  std::sort(sortedvars.begin(), sortedvars.end());
  std::vector<int> remap(a.vars.size());
  for (std::size_t i = 0; i < newvars.size(); ++i) {
    auto it = std::find(sortedvars.begin(), sortedvars.end(), newvars[i]);
    remap[i] = static_cast<int>(it - sortedvars.begin());
  }
  VSetAutomaton out;
  out.vars = sortedvars;
  out.alphabet = a.alphabet;
  out.functional = a.functional;
  out.initial = a.initial;
  out.states.resize(a.states.size());
  for (std::size_t s = 0; s < a.states.size(); ++s) {
    out.states[s].final_state = a.states[s].final_state;
    for (const auto& e : a.states[s].edges) {
      Edge copy = e;
      if (e.kind == EdgeKind::Open || e.kind == EdgeKind::Close)
        copy.var = static_cast<uint16_t>(remap[e.var]);
      out.states[s].edges.push_back(std::move(copy));
    }
  }
  return normalize(out);
}

VSetAutomaton join_a(const VSetAutomaton& a_in, const VSetAutomaton& b_in) {
  if (!a_in.functional || !b_in.functional)
    throw Error("join requires functional automata");
  if (!(a_in.alphabet == b_in.alphabet))
    throw Error("join of automata over different alphabets");
  VSetAutomaton a = ensure_normal(a_in);
  VSetAutomaton b = ensure_normal(b_in);

  std::vector<std::string> vars = a.vars;
  for (const auto& v : b.vars)
    if (std::find(vars.begin(), vars.end(), v) == vars.end()) vars.push_back(v);
  std::sort(vars.begin(), vars.end());

  auto index_of = [&](const std::string& v) {
    return static_cast<uint16_t>(
        std::find(vars.begin(), vars.end(), v) - vars.begin());
  };
  std::vector<uint16_t> amap(a.vars.size()), bmap(b.vars.size());
  std::vector<bool> shared_b(b.vars.size(), false);
  for (std::size_t i = 0; i < a.vars.size(); ++i) amap[i] = index_of(a.vars[i]);
  for (std::size_t i = 0; i < b.vars.size(); ++i) {
    bmap[i] = index_of(b.vars[i]);
    shared_b[i] = a.var_index(b.vars[i]) >= 0;
  }
  std::vector<bool> shared_a(a.vars.size(), false);
  for (std::size_t i = 0; i < a.vars.size(); ++i)
    shared_a[i] = b.var_index(a.vars[i]) >= 0;

  VSetAutomaton out;
  out.vars = vars;
  out.alphabet = a.alphabet;
  out.functional = true;

  std::unordered_map<std::pair<uint64_t, uint64_t>, uint32_t, PairHash> ids;
  std::deque<std::pair<uint32_t, uint32_t>> work;
  auto combined_status = [&](uint32_t sa, uint32_t sb) {
    uint64_t st = 0;
    for (std::size_t i = 0; i < a.vars.size(); ++i)
      st = status_set(st, amap[i], status_get(a.states[sa].status, i));
    for (std::size_t i = 0; i < b.vars.size(); ++i)
      st = status_set(st, bmap[i], status_get(b.states[sb].status, i));
    return st;
  };
  auto intern = [&](uint32_t sa, uint32_t sb) {
    auto [it, fresh] = ids.insert({{sa, sb}, static_cast<uint32_t>(out.states.size())});
    if (fresh) {
      if (out.states.size() > kMaxConfigs)
        throw Error("join exceeded the configuration budget");
      out.states.emplace_back();
      out.states.back().final_state =
          a.states[sa].final_state && b.states[sb].final_state;
      out.states.back().status = combined_status(sa, sb);
      work.push_back({sa, sb});
    }
    return it->second;
  };

  out.initial = intern(a.initial, b.initial);
  while (!work.empty()) {
    auto [sa, sb] = work.front();
    work.pop_front();
    uint32_t id = ids.at({sa, sb});
    // synchronized character steps
    for (const auto& ea : a.states[sa].edges) {
      if (ea.kind != EdgeKind::Chars) continue;
      for (const auto& eb : b.states[sb].edges) {
        if (eb.kind != EdgeKind::Chars) continue;
        CharSet cls = ea.cls & eb.cls;
        if (cls.empty()) continue;
        out.states[id].edges.push_back(
            Edge{EdgeKind::Chars, 0, cls, intern(ea.to, eb.to)});
      }
    }
    // operations
    for (const auto& ea : a.states[sa].edges) {
      if (ea.kind != EdgeKind::Open && ea.kind != EdgeKind::Close) continue;
      if (shared_a[ea.var]) {
        for (const auto& eb : b.states[sb].edges) {
          if (eb.kind != ea.kind) continue;
          if (bmap[eb.var] != amap[ea.var]) continue;
          out.states[id].edges.push_back(
              Edge{ea.kind, amap[ea.var], CharSet(), intern(ea.to, eb.to)});
        }
      } else {
        out.states[id].edges.push_back(
            Edge{ea.kind, amap[ea.var], CharSet(), intern(ea.to, sb)});
      }
    }
    for (const auto& eb : b.states[sb].edges) {
      if (eb.kind != EdgeKind::Open && eb.kind != EdgeKind::Close) continue;
      if (shared_b[eb.var]) continue;  // handled from a's side
      out.states[id].edges.push_back(
          Edge{eb.kind, bmap[eb.var], CharSet(), intern(sa, eb.to)});
    }
  }
  return normalize(out);
}

// ---------------------------------------------------------------------------
// plain language utilities
// ---------------------------------------------------------------------------

namespace {

// variable operations become eps; result is a plain NFA
struct PlainNfa {
  std::vector<std::vector<std::pair<CharSet, uint32_t>>> chars;
  std::vector<std::vector<uint32_t>> eps;
  std::vector<bool> finals;
  uint32_t initial = 0;
};

PlainNfa erase_vars(const VSetAutomaton& a) {
  PlainNfa n;
  n.chars.resize(a.states.size());
  n.eps.resize(a.states.size());
  n.finals.resize(a.states.size());
  n.initial = a.initial;
  for (std::size_t s = 0; s < a.states.size(); ++s) {
    n.finals[s] = a.states[s].final_state;
    for (const auto& e : a.states[s].edges) {
      if (e.kind == EdgeKind::Chars)
        n.chars[s].push_back({e.cls, e.to});
      else
        n.eps[s].push_back(e.to);
    }
  }
  return n;
}

std::vector<uint32_t> eps_closure(const PlainNfa& n,
                                  std::vector<uint32_t> set) {
  std::vector<bool> seen(n.finals.size(), false);
  std::deque<uint32_t> work;
  for (uint32_t s : set) {
    if (!seen[s]) {
      seen[s] = true;
      work.push_back(s);
    }
  }
  std::vector<uint32_t> out;
  while (!work.empty()) {
    uint32_t s = work.front();
    work.pop_front();
    out.push_back(s);
    for (uint32_t t : n.eps[s])
      if (!seen[t]) {
        seen[t] = true;
        work.push_back(t);
      }
  }
  std::sort(out.begin(), out.end());
  return out;
}

struct Dfa {
  std::vector<std::array<int, 256>> delta;
  std::vector<bool> finals;
};

Dfa determinize(const PlainNfa& n, const Alphabet& sigma) {
  Dfa d;
  std::map<std::vector<uint32_t>, int> ids;
  std::deque<std::vector<uint32_t>> work;
  auto intern = [&](std::vector<uint32_t> set) {
    auto [it, fresh] = ids.insert({set, static_cast<int>(d.delta.size())});
    if (fresh) {
      d.delta.emplace_back();
      d.delta.back().fill(-1);
      bool fin = false;
      for (uint32_t s : set)
        if (n.finals[s]) fin = true;
      d.finals.push_back(fin);
      work.push_back(std::move(set));
    }
    return it->second;
  };
  intern(eps_closure(n, {n.initial}));
  while (!work.empty()) {
    std::vector<uint32_t> cur = work.front();
    work.pop_front();
    int id = ids.at(cur);
    for (unsigned char c : sigma.chars()) {
      std::vector<uint32_t> next;
      for (uint32_t s : cur)
        for (const auto& [cls, t] : n.chars[s])
          if (cls.contains(c)) next.push_back(t);
      if (next.empty()) continue;
      std::sort(next.begin(), next.end());
      next.erase(std::unique(next.begin(), next.end()), next.end());
      d.delta[id][c] = intern(eps_closure(n, std::move(next)));
    }
  }
  return d;
}

}  // namespace

bool language_member(const VSetAutomaton& a, std::string_view s) {
  PlainNfa n = erase_vars(a);
  std::vector<uint32_t> cur = eps_closure(n, {n.initial});
  for (char raw : s) {
    unsigned char c = static_cast<unsigned char>(raw);
    std::vector<uint32_t> next;
    for (uint32_t st : cur)
      for (const auto& [cls, t] : n.chars[st])
        if (cls.contains(c)) next.push_back(t);
    std::sort(next.begin(), next.end());
    next.erase(std::unique(next.begin(), next.end()), next.end());
    cur = eps_closure(n, std::move(next));
    if (cur.empty()) return false;
  }
  for (uint32_t st : cur)
    if (n.finals[st]) return true;
  return false;
}

std::optional<std::string> language_difference_witness(const VSetAutomaton& a,
                                                       const VSetAutomaton& b) {
  if (!(a.alphabet == b.alphabet))
    throw Error("language difference over different alphabets");
  Dfa da = determinize(erase_vars(a), a.alphabet);
  Dfa db = determinize(erase_vars(b), b.alphabet);

  // BFS over the product; db state -1 is the dead (rejecting) state.
  std::map<std::pair<int, int>, std::pair<std::pair<int, int>, char>> parent;
  std::deque<std::pair<int, int>> work;
  auto visit = [&](std::pair<int, int> node, std::pair<int, int> from, char c) {
    if (parent.count(node)) return;
    parent[node] = {from, c};
    work.push_back(node);
  };
  visit({0, 0}, {-2, -2}, 0);
  while (!work.empty()) {
    auto node = work.front();
    work.pop_front();
    auto [pa, pb] = node;
    bool acc_a = da.finals[static_cast<std::size_t>(pa)];
    bool acc_b = pb >= 0 && db.finals[static_cast<std::size_t>(pb)];
    if (acc_a && !acc_b) {
      std::string out;
      auto cur = node;
      while (parent.at(cur).first.first != -2) {
        out.push_back(parent.at(cur).second);
        cur = parent.at(cur).first;
      }
      std::reverse(out.begin(), out.end());
      return out;
    }
    for (unsigned char c : a.alphabet.chars()) {
      int na = da.delta[static_cast<std::size_t>(pa)][c];
      if (na < 0) continue;  // strings leaving L(a) can never witness
      int nb = pb >= 0 ? db.delta[static_cast<std::size_t>(pb)][c] : -1;
      visit({na, nb}, node, static_cast<char>(c));
    }
  }
  return std::nullopt;
}

std::string VSetAutomaton::to_dot() const {
  std::ostringstream os;
  os << "digraph vset {\n  rankdir=LR;\n";
  for (std::size_t s = 0; s < states.size(); ++s) {
    os << "  q" << s << " [shape=" << (states[s].final_state ? "doublecircle" : "circle");
    if (s == initial) os << ", style=bold";
    os << "];\n";
    for (const auto& e : states[s].edges) {
      os << "  q" << s << " -> q" << e.to << " [label=\"";
      switch (e.kind) {
        case EdgeKind::Eps:
          os << "eps";
          break;
        case EdgeKind::Open:
          os << "open " << vars[e.var];
          break;
        case EdgeKind::Close:
          os << "close " << vars[e.var];
          break;
        case EdgeKind::Chars: {
          std::string cs = e.cls.chars();
          if (cs.size() > 6) cs = cs.substr(0, 6) + "...";
          for (char c : cs) {
            if (c == '\n')
              os << "\\\\n";
            else if (c == '"')
              os << "\\\"";
            else
              os << c;
          }
          break;
        }
      }
      os << "\"];\n";
    }
  }
  os << "}\n";
  return os.str();
}

}  // namespace spanclean
