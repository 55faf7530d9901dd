#include "spanclean/allen.hpp"

#include <algorithm>
#include <vector>

namespace spanclean {

bool allen_holds(AllenRelation rel, Span x, Span y) {
  const auto [a, b] = std::pair{x.start, x.end};
  const auto [c, d] = std::pair{y.start, y.end};
  switch (rel) {
    case AllenRelation::Precedes:
      return b < c;
    case AllenRelation::PrecededBy:
      return d < a;
    case AllenRelation::Meets:
      return b == c && a < b && c < d;
    case AllenRelation::MetBy:
      return d == a && c < d && a < b;
    case AllenRelation::Overhangs:
      return a < c && c < b && b < d;
    case AllenRelation::OverhungBy:
      return c < a && a < d && d < b;
    case AllenRelation::During:
      return c < a && b < d;
    case AllenRelation::Contains:
      return a < c && d < b;
    case AllenRelation::Starts:
      return a == c && b < d;
    case AllenRelation::StartedBy:
      return a == c && d < b;
    case AllenRelation::Finishes:
      return b == d && c < a;
    case AllenRelation::FinishedBy:
      return b == d && a < c;
    case AllenRelation::Equals:
      return a == c && b == d;
    case AllenRelation::Overlap:
      for (auto r : {AllenRelation::Overhangs, AllenRelation::OverhungBy,
                     AllenRelation::During, AllenRelation::Contains,
                     AllenRelation::Starts, AllenRelation::StartedBy,
                     AllenRelation::Finishes, AllenRelation::FinishedBy,
                     AllenRelation::Equals})
        if (allen_holds(r, x, y)) return true;
      return false;
    case AllenRelation::OverlapNotEqual:
      return allen_holds(AllenRelation::Overlap, x, y) &&
             !allen_holds(AllenRelation::Equals, x, y);
    case AllenRelation::NotEqual:
      return !allen_holds(AllenRelation::Equals, x, y);
  }
  return false;
}

namespace {

// Sequence items for building a basic relation automaton: any-star,
// any-plus, and variable operations at fixed relative positions.
enum class Item : uint8_t { Star, Plus, OpenX, CloseX, OpenY, CloseY };

VSetAutomaton build_sequence(const std::vector<Item>& items,
                             const std::string& x, const std::string& y,
                             const Alphabet& sigma) {
  VSetAutomaton a;
  a.vars = {x, y};
  std::sort(a.vars.begin(), a.vars.end());
  a.alphabet = sigma;
  a.functional = true;
  uint16_t xi = static_cast<uint16_t>(a.var_index(x));
  uint16_t yi = static_cast<uint16_t>(a.var_index(y));

  using EK = VSetAutomaton::EdgeKind;
  a.states.emplace_back();
  uint32_t cur = 0;
  auto fresh = [&]() {
    a.states.emplace_back();
    return static_cast<uint32_t>(a.states.size() - 1);
  };
  for (Item it : items) {
    switch (it) {
      case Item::Star:
        a.states[cur].edges.push_back(
            VSetAutomaton::Edge{EK::Chars, 0, sigma.set(), cur});
        break;
      case Item::Plus: {
        uint32_t nxt = fresh();
        a.states[cur].edges.push_back(
            VSetAutomaton::Edge{EK::Chars, 0, sigma.set(), nxt});
        a.states[nxt].edges.push_back(
            VSetAutomaton::Edge{EK::Chars, 0, sigma.set(), nxt});
        cur = nxt;
        break;
      }
      case Item::OpenX:
      case Item::CloseX:
      case Item::OpenY:
      case Item::CloseY: {
        uint32_t nxt = fresh();
        bool open = it == Item::OpenX || it == Item::OpenY;
        uint16_t var = (it == Item::OpenX || it == Item::CloseX) ? xi : yi;
        a.states[cur].edges.push_back(VSetAutomaton::Edge{
            open ? EK::Open : EK::Close, var, CharSet(), nxt});
        cur = nxt;
        break;
      }
    }
  }
  a.states[cur].final_state = true;
  return a;
}

VSetAutomaton basic_spanner(AllenRelation rel, const std::string& x,
                            const std::string& y, const Alphabet& sigma) {
  using I = Item;
  const I S = I::Star, P = I::Plus, oX = I::OpenX, cX = I::CloseX,
          oY = I::OpenY, cY = I::CloseY;
  std::vector<Item> seq;
  switch (rel) {
    case AllenRelation::Precedes:
      seq = {S, oX, S, cX, P, oY, S, cY, S};
      break;
    case AllenRelation::PrecededBy:
      seq = {S, oY, S, cY, P, oX, S, cX, S};
      break;
    case AllenRelation::Meets:
      seq = {S, oX, P, cX, oY, P, cY, S};
      break;
    case AllenRelation::MetBy:
      seq = {S, oY, P, cY, oX, P, cX, S};
      break;
    case AllenRelation::Overhangs:
      seq = {S, oX, P, oY, P, cX, P, cY, S};
      break;
    case AllenRelation::OverhungBy:
      seq = {S, oY, P, oX, P, cY, P, cX, S};
      break;
    case AllenRelation::During:
      seq = {S, oY, P, oX, S, cX, P, cY, S};
      break;
    case AllenRelation::Contains:
      seq = {S, oX, P, oY, S, cY, P, cX, S};
      break;
    case AllenRelation::Starts:
      seq = {S, oX, oY, S, cX, P, cY, S};
      break;
    case AllenRelation::StartedBy:
      seq = {S, oX, oY, S, cY, P, cX, S};
      break;
    case AllenRelation::Finishes:
      seq = {S, oY, P, oX, S, cX, cY, S};
      break;
    case AllenRelation::FinishedBy:
      seq = {S, oX, P, oY, S, cY, cX, S};
      break;
    case AllenRelation::Equals:
      seq = {S, oX, oY, S, cX, cY, S};
      break;
    default:
      throw Error("basic_spanner called with a disjunction");
  }
  return build_sequence(seq, x, y, sigma);
}

}  // namespace

VSetAutomaton relation_spanner(AllenRelation rel, const std::string& x,
                               const std::string& y, const Alphabet& sigma) {
  if (x == y) throw Error("relation_spanner requires distinct variables");
  std::vector<AllenRelation> parts;
  switch (rel) {
    case AllenRelation::Overlap:
      parts = {AllenRelation::Overhangs, AllenRelation::OverhungBy,
               AllenRelation::During,    AllenRelation::Contains,
               AllenRelation::Starts,    AllenRelation::StartedBy,
               AllenRelation::Finishes,  AllenRelation::FinishedBy,
               AllenRelation::Equals};
      break;
    case AllenRelation::OverlapNotEqual:
      parts = {AllenRelation::Overhangs, AllenRelation::OverhungBy,
               AllenRelation::During,    AllenRelation::Contains,
               AllenRelation::Starts,    AllenRelation::StartedBy,
               AllenRelation::Finishes,  AllenRelation::FinishedBy};
      break;
    case AllenRelation::NotEqual:
      parts = {AllenRelation::Precedes,  AllenRelation::PrecededBy,
               AllenRelation::Meets,     AllenRelation::MetBy,
               AllenRelation::Overhangs, AllenRelation::OverhungBy,
               AllenRelation::During,    AllenRelation::Contains,
               AllenRelation::Starts,    AllenRelation::StartedBy,
               AllenRelation::Finishes,  AllenRelation::FinishedBy};
      break;
    default:
      return normalize(basic_spanner(rel, x, y, sigma));
  }
  VSetAutomaton acc = basic_spanner(parts[0], x, y, sigma);
  for (std::size_t i = 1; i < parts.size(); ++i)
    acc = union_a(acc, basic_spanner(parts[i], x, y, sigma));
  return acc;
}

}  // namespace spanclean
