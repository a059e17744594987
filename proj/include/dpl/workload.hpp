#pragma once

// Text workloads: "I x1 y1 x2 y2", "D id", "Q x y", one per line. Inserted
// segments get ids 1, 2, ... in file order. Lines starting with '#' carry
// header fields as "# key value".

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <map>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "dpl/geometry.hpp"

namespace dpl {

struct Op {
  enum Kind : char { Insert = 'I', Delete = 'D', Query = 'Q' } kind;
  Segment seg{};       // Insert: id filled in by file order
  SegmentId id = 0;    // Delete
  Point q{};           // Query
};

struct Workload {
  std::map<std::string, std::string> header;
  std::vector<Op> ops;

  // Every x-coordinate an insert can use; the fixed universe.
  std::vector<Coord> universe() const {
    std::vector<Coord> xs;
    for (const Op& o : ops)
      if (o.kind == Op::Insert) xs.push_back(o.seg.left.x), xs.push_back(o.seg.right.x);
    std::sort(xs.begin(), xs.end());
    xs.erase(std::unique(xs.begin(), xs.end()), xs.end());
    return xs;
  }

  std::size_t count(Op::Kind k) const {
    return static_cast<std::size_t>(std::count_if(ops.begin(), ops.end(), [&](const Op& o) { return o.kind == k; }));
  }

  std::string to_text() const {
    std::ostringstream os;
    for (const auto& [k, v] : header) os << "# " << k << ' ' << v << '\n';
    for (const Op& o : ops) {
      switch (o.kind) {
        case Op::Insert:
          os << "I " << o.seg.left.x << ' ' << o.seg.left.y << ' ' << o.seg.right.x << ' ' << o.seg.right.y << '\n';
          break;
        case Op::Delete: os << "D " << o.id << '\n'; break;
        case Op::Query: os << "Q " << o.q.x << ' ' << o.q.y << '\n'; break;
      }
    }
    return os.str();
  }

  static Workload parse(std::istream& in) {
    Workload w;
    std::string line;
    std::size_t no = 0;
    SegmentId next = 1;
    auto bad = [&](const std::string& why) { return Fault("workload line " + std::to_string(no) + ": " + why); };
    while (std::getline(in, line)) {
      ++no;
      if (line.empty()) continue;
      std::istringstream ls(line);
      std::string tag;
      ls >> tag;
      if (tag == "#") {
        std::string k, v;
        ls >> k;
        std::getline(ls >> std::ws, v);
        w.header[k] = v;
        continue;
      }
      Op o{Op::Query};
      if (tag == "I") {
        Coord x1, y1, x2, y2;
        if (!(ls >> x1 >> y1 >> x2 >> y2)) throw bad("expected I x1 y1 x2 y2");
        o.kind = Op::Insert;
        try {
          o.seg = make_segment(next++, {x1, y1}, {x2, y2});
        } catch (const Fault& f) {
          throw bad(f.what());
        }
      } else if (tag == "D") {
        if (!(ls >> o.id) || o.id == 0 || o.id >= next) throw bad("D must name an earlier insert");
        o.kind = Op::Delete;
      } else if (tag == "Q") {
        if (!(ls >> o.q.x >> o.q.y)) throw bad("expected Q x y");
      } else {
        throw bad("unknown record '" + tag + "'");
      }
      std::string extra;
      if (ls >> extra) throw bad("trailing text");
      w.ops.push_back(o);
    }
    return w;
  }

  static Workload load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Fault("cannot open " + path);
    return parse(in);
  }
};

// Non-crossing segment pools. Segments live in horizontal bands of height
// `band`; inside a band their x-ranges are disjoint, so no two can meet.
// Lengths are log-uniform so every level of the base tree gets work.
inline std::vector<Segment> band_pool(std::size_t n, std::uint64_t seed, Coord band, Coord width) {
  std::mt19937_64 rng(seed);
  std::vector<Coord> cursor(std::max<std::size_t>(1, static_cast<std::size_t>(std::sqrt(double(n)))), 0);
  std::vector<Segment> out;
  std::uniform_real_distribution<double> lg(0, std::log2(double(width) / 2));
  while (out.size() < n) {
    std::size_t k = rng() % cursor.size();
    Coord len = std::max<Coord>(1, static_cast<Coord>(std::exp2(lg(rng))));
    Coord x1 = cursor[k] + static_cast<Coord>(rng() % 4);
    if (x1 + len > width) {
      // band is full: open a fresh one on top
      k = cursor.size();
      cursor.push_back(0);
      x1 = static_cast<Coord>(rng() % 4);
    }
    Coord x2 = x1 + len;
    cursor[k] = x2 + 1;
    Coord base = static_cast<Coord>(k) * (band + 1);
    Coord y1 = base + static_cast<Coord>(rng() % static_cast<std::uint64_t>(band));
    Coord y2 = base + static_cast<Coord>(rng() % static_cast<std::uint64_t>(band));
    out.push_back(make_segment(0, {x1, y1}, {x2, y2}));
  }
  return out;
}

// Interleaves inserts from the pool with queries and deletes of live ids.
// Per insert: `queries` queries on average, a delete with probability `del`.
inline Workload mixed_ops(const std::vector<Segment>& pool, std::size_t inserts, double queries, double del, std::uint64_t seed) {
  std::mt19937_64 rng(seed ^ 0x9e3779b97f4a7c15ULL);
  Workload w;
  Coord xmin = 0, xmax = 1, ymin = 0, ymax = 1;
  for (const Segment& s : pool) {
    xmin = std::min(xmin, s.left.x), xmax = std::max(xmax, s.right.x);
    ymin = std::min({ymin, s.left.y, s.right.y}), ymax = std::max({ymax, s.left.y, s.right.y});
  }
  std::vector<SegmentId> live;
  std::uniform_real_distribution<double> u(0, 1);
  SegmentId next = 1;
  double owed = 0;
  for (std::size_t i = 0; i < inserts && i < pool.size(); ++i) {
    Op in{Op::Insert};
    in.seg = pool[i];
    in.seg.id = next;
    w.ops.push_back(in);
    live.push_back(next++);
    owed += queries;
    while (owed >= 1) {
      owed -= 1;
      Op q{Op::Query};
      q.q = {xmin + static_cast<Coord>(rng() % static_cast<std::uint64_t>(xmax - xmin + 1)),
             ymin - 1 + static_cast<Coord>(rng() % static_cast<std::uint64_t>(ymax - ymin + 3))};
      w.ops.push_back(q);
    }
    if (u(rng) < del && !live.empty()) {
      std::size_t k = rng() % live.size();
      Op d{Op::Delete};
      d.id = live[k];
      live[k] = live.back();
      live.pop_back();
      w.ops.push_back(d);
    }
  }
  return w;
}

// Two groups in separate slabs plus one link segment that fixes their
// relative order; each round swaps the link for the opposite one, which
// reverses the order of the whole multi-slab.
inline Workload adversarial_reorder(std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  Coord k = std::max<Coord>(2, static_cast<Coord>(n / 4));
  Coord gap = 2 * k + 2;
  Workload w;
  SegmentId next = 1;
  auto insert = [&](Point a, Point b) {
    Op o{Op::Insert};
    o.seg = make_segment(next++, a, b);
    w.ops.push_back(o);
    return o.seg.id;
  };
  for (Coord i = 0; i < k; ++i) insert({0, 10 + i}, {10, 10 + i});
  for (Coord i = 0; i < k; ++i) insert({10 + gap, 10 + i}, {20 + gap, 10 + i});
  Point lo{9, 9}, hi{9, 10 + k}, rlo{11 + gap, 9}, rhi{11 + gap, 10 + k};
  SegmentId link = insert(hi, rlo);
  bool up = true;
  for (std::size_t round = 0; w.ops.size() < 4 * n; ++round) {
    Op d{Op::Delete};
    d.id = link;
    w.ops.push_back(d);
    up = !up;
    link = up ? insert(hi, rlo) : insert(lo, rhi);
    for (int t = 0; t < 2; ++t) {
      Op q{Op::Query};
      q.q = {static_cast<Coord>(rng() % static_cast<std::uint64_t>(21 + gap)), 8 + static_cast<Coord>(rng() % static_cast<std::uint64_t>(k + 4))};
      w.ops.push_back(q);
    }
  }
  return w;
}

// kind: random-general, random-horizontal, staircase, adversarial-reorder.
inline Workload generate(const std::string& kind, std::size_t n, std::uint64_t seed) {
  if (n == 0) throw Fault("gen: n must be positive");
  Workload w;
  if (kind == "random-general") {
    w = mixed_ops(band_pool(n, seed, 64, Coord(8 * n + 64)), n, 1.0, 0.25, seed);
  } else if (kind == "random-horizontal") {
    w = mixed_ops(band_pool(n, seed, 1, Coord(8 * n + 64)), n, 1.0, 0.25, seed);
  } else if (kind == "staircase") {
    Coord m = static_cast<Coord>(n);
    for (Coord k = 1; k <= m; ++k) {
      Op o{Op::Insert};
      o.seg = make_segment(static_cast<SegmentId>(k), {m - k, k}, {m + k, k});
      w.ops.push_back(o);
    }
  } else if (kind == "adversarial-reorder") {
    w = adversarial_reorder(n, seed);
  } else {
    throw Fault("gen: unknown kind '" + kind + "'");
  }
  w.header["kind"] = kind;
  w.header["n"] = std::to_string(n);
  w.header["seed"] = std::to_string(seed);
  return w;
}

}  // namespace dpl
