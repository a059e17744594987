#pragma once

// Exact integer geometry for non-vertical segments: side tests, the
// above/below relation, a total order extending it, and brute-force oracles.

#include <algorithm>
#include <cstdint>
#include <functional>
#include <optional>
#include <queue>
#include <set>
#include <span>
#include <string>
#include <tuple>
#include <vector>

#include "dpl/io_model.hpp"

namespace dpl {

using Coord = std::int64_t;
using Wide = __int128;
using SegmentId = std::int64_t;

// Coordinates are bounded so that every predicate fits in 128-bit products.
inline constexpr Coord kCoordLimit = Coord{1} << 40;

struct Point {
  Coord x = 0;
  Coord y = 0;
  friend bool operator==(const Point&, const Point&) = default;
};

struct Segment {
  SegmentId id = 0;
  Point left;
  Point right;
  friend bool operator==(const Segment&, const Segment&) = default;
};

inline void check_coord(Coord v) {
  if (v <= -kCoordLimit || v >= kCoordLimit) throw Fault("coordinate out of range: " + std::to_string(v));
}

// Builds a segment with endpoints in either order. Vertical input is rejected.
inline Segment make_segment(SegmentId id, Point a, Point b) {
  check_coord(a.x), check_coord(a.y), check_coord(b.x), check_coord(b.y);
  if (a.x == b.x) throw Fault("vertical segment " + std::to_string(id));
  if (b.x < a.x) std::swap(a, b);
  return Segment{id, a, b};
}

enum class Side { below, on, above };

inline int sign(Wide v) { return (v > 0) - (v < 0); }

inline Wide cross(Point o, Point a, Point b) {
  return Wide(a.x - o.x) * Wide(b.y - o.y) - Wide(a.y - o.y) * Wide(b.x - o.x);
}

inline bool spans_x(const Segment& s, Coord x) { return s.left.x <= x && x <= s.right.x; }

// Position of p relative to s (p above s, on s, or below s).
inline Side side_of(const Segment& s, Point p) {
  if (!spans_x(s, p.x)) throw Fault("side_of: point outside segment x-range");
  int c = sign(cross(s.left, s.right, p));
  return c > 0 ? Side::above : c < 0 ? Side::below : Side::on;
}

// y of s at x as num/den with den > 0.
struct YAt {
  Wide num;
  Wide den;
};

inline YAt y_at(const Segment& s, Coord x) {
  Wide dx = s.right.x - s.left.x;
  return {Wide(s.left.y) * dx + Wide(s.right.y - s.left.y) * Wide(x - s.left.x), dx};
}

// sign(y_s(x) - y), x inside the x-range of s.
inline int compare_y(const Segment& s, Coord x, Coord y) {
  YAt a = y_at(s, x);
  return sign(a.num - Wide(y) * a.den);
}

// sign(y_a(x) - y_b(x)) for two segments that both contain x.
inline int compare_at(const Segment& a, const Segment& b, Coord x) {
  YAt ya = y_at(a, x), yb = y_at(b, x);
  return sign(ya.num * yb.den - yb.num * ya.den);
}

// sign(slope(a) - slope(b)).
inline int compare_slope(const Segment& a, const Segment& b) {
  Wide lhs = Wide(a.right.y - a.left.y) * Wide(b.right.x - b.left.x);
  Wide rhs = Wide(b.right.y - b.left.y) * Wide(a.right.x - a.left.x);
  return sign(lhs - rhs);
}

// True iff the relative interiors of a and b share a point.
inline bool interiors_intersect(const Segment& a, const Segment& b) {
  int o1 = sign(cross(a.left, a.right, b.left));
  int o2 = sign(cross(a.left, a.right, b.right));
  int o3 = sign(cross(b.left, b.right, a.left));
  int o4 = sign(cross(b.left, b.right, a.right));
  if (o1 * o2 < 0 && o3 * o4 < 0) return true;
  if (o1 == 0 && o2 == 0) {
    Coord lo = std::max(a.left.x, b.left.x), hi = std::min(a.right.x, b.right.x);
    return lo < hi;
  }
  return false;
}

enum class Order { first_below, second_below, incomparable };

inline Order compare_segments(const Segment& a, const Segment& b) {
  Coord lo = std::max(a.left.x, b.left.x), hi = std::min(a.right.x, b.right.x);
  if (lo >= hi) return Order::incomparable;
  int c_lo = compare_at(a, b, lo), c_hi = compare_at(a, b, hi);
  if ((c_lo == 0 && c_hi == 0) || c_lo * c_hi < 0)
    throw Fault("compare_segments: segments " + std::to_string(a.id) + " and " + std::to_string(b.id) + " cross");
  int c = c_lo != 0 ? c_lo : c_hi;
  return c < 0 ? Order::first_below : Order::second_below;
}

// Order of two segments crossing the common vertical line at x, refined by
// what happens just right of x (then just left of x), then by id. Callers use
// it on segments that both span an open interval around x or start at x.
inline int compare_near(const Segment& a, const Segment& b, Coord x) {
  if (a.id == b.id) return 0;
  int c = compare_at(a, b, x);
  if (c != 0) return c;
  bool a_right = a.right.x > x, b_right = b.right.x > x;
  if (a_right && b_right) {
    int s = compare_slope(a, b);
    if (s != 0) return s;
  } else if (a.left.x < x && b.left.x < x) {
    int s = compare_slope(a, b);
    if (s != 0) return -s;
  }
  return a.id < b.id ? -1 : 1;
}

inline bool validate_insert(const Segment& s, std::span<const Segment> live) {
  for (const Segment& t : live)
    if (interiors_intersect(s, t)) return false;
  return true;
}

namespace detail {

inline std::vector<std::size_t> topo_order(std::size_t k, const std::vector<std::vector<std::size_t>>& out,
                                           std::span<const Segment> segs) {
  std::vector<std::size_t> indeg(k, 0);
  for (const auto& e : out)
    for (std::size_t v : e) ++indeg[v];
  auto key = [&](std::size_t i) { return std::tuple(segs[i].left.x, segs[i].left.y, segs[i].id); };
  auto cmp = [&](std::size_t a, std::size_t b) { return key(a) > key(b); };
  std::priority_queue<std::size_t, std::vector<std::size_t>, decltype(cmp)> ready(cmp);
  for (std::size_t i = 0; i < k; ++i)
    if (indeg[i] == 0) ready.push(i);
  std::vector<std::size_t> order;
  order.reserve(k);
  while (!ready.empty()) {
    std::size_t v = ready.top();
    ready.pop();
    order.push_back(v);
    for (std::size_t w : out[v])
      if (--indeg[w] == 0) ready.push(w);
  }
  if (order.size() != k) throw Fault("order_multislab: cycle in above/below relation (crossing input)");
  return order;
}

}  // namespace detail

// Total order extending compare_segments, by explicit pairwise comparison.
inline std::vector<std::size_t> order_multislab_quadratic(std::span<const Segment> segs) {
  std::size_t k = segs.size();
  std::vector<std::vector<std::size_t>> out(k);
  for (std::size_t i = 0; i < k; ++i)
    for (std::size_t j = i + 1; j < k; ++j) {
      Order o = compare_segments(segs[i], segs[j]);
      if (o == Order::first_below) out[i].push_back(j);
      else if (o == Order::second_below) out[j].push_back(i);
    }
  return detail::topo_order(k, out, segs);
}

// Same contract, O(K log K): a left-to-right sweep records every pair that is
// ever adjacent on the sweep line; their transitive closure is the relation.
inline std::vector<std::size_t> order_multislab(std::span<const Segment> segs) {
  std::size_t k = segs.size();
  if (k <= 1) return k == 0 ? std::vector<std::size_t>{} : std::vector<std::size_t>{0};
  struct Event {
    Coord x;
    int kind;  // 0 = remove, 1 = insert
    std::size_t idx;
  };
  std::vector<Event> ev;
  ev.reserve(2 * k);
  for (std::size_t i = 0; i < k; ++i) {
    ev.push_back({segs[i].left.x, 1, i});
    ev.push_back({segs[i].right.x, 0, i});
  }
  std::sort(ev.begin(), ev.end(), [](const Event& a, const Event& b) { return std::tie(a.x, a.kind) < std::tie(b.x, b.kind); });

  Coord sweep_x = ev.front().x;
  auto less = [&](std::size_t a, std::size_t b) { return compare_near(segs[a], segs[b], sweep_x) < 0; };
  std::set<std::size_t, decltype(less)> status(less);
  std::vector<std::set<std::size_t, decltype(less)>::iterator> where(k);
  std::vector<std::vector<std::size_t>> out(k);

  for (const Event& e : ev) {
    sweep_x = e.x;
    if (e.kind == 0) {
      auto it = where[e.idx];
      auto nx = std::next(it);
      if (it != status.begin() && nx != status.end()) out[*std::prev(it)].push_back(*nx);
      status.erase(it);
    } else {
      auto [it, ok] = status.insert(e.idx);
      if (!ok) throw Fault("order_multislab: overlapping segments");
      where[e.idx] = it;
      if (it != status.begin()) out[*std::prev(it)].push_back(e.idx);
      auto nx = std::next(it);
      if (nx != status.end()) out[e.idx].push_back(*nx);
    }
  }
  return detail::topo_order(k, out, segs);
}

// Upward ray from q (closed: a segment through q is hit). Lowest hit wins,
// ties at a shared point go to the smaller id.
inline bool hit_better(const Segment& cand, const Segment& best, Coord x) {
  int c = compare_at(cand, best, x);
  return c < 0 || (c == 0 && cand.id < best.id);
}

inline std::optional<Segment> oracle_successor(Point q, std::span<const Segment> segs) {
  std::optional<Segment> best;
  for (const Segment& s : segs) {
    if (!spans_x(s, q.x) || compare_y(s, q.x, q.y) < 0) continue;
    if (!best || hit_better(s, *best, q.x)) best = s;
  }
  return best;
}

// Downward ray: highest segment at or below q, ties to the smaller id.
inline std::optional<Segment> oracle_predecessor(Point q, std::span<const Segment> segs) {
  std::optional<Segment> best;
  for (const Segment& s : segs) {
    if (!spans_x(s, q.x) || compare_y(s, q.x, q.y) > 0) continue;
    if (!best) {
      best = s;
      continue;
    }
    int c = compare_at(s, *best, q.x);
    if (c > 0 || (c == 0 && s.id < best->id)) best = s;
  }
  return best;
}

}  // namespace dpl
