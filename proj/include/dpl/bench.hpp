#pragma once

// Replays a workload against one structure on a fresh block store and records
// the I/Os of every operation. Shared by the command-line tool and the
// acceptance runs.

#include <cmath>
#include <map>
#include <memory>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "dpl/baseline.hpp"
#include "dpl/horizontal.hpp"
#include "dpl/rayshoot_dynamic.hpp"
#include "dpl/rayshoot_static.hpp"
#include "dpl/workload.hpp"

namespace dpl {

struct RunOptions {
  std::string structure = "dynamic";  // static, dynamic, horiz, horiz-linear, baseline
  std::size_t B = 64;
  std::size_t M = 0;  // words of memory; 0 = 16 blocks
  double delta = 1.0 / 8;
  std::size_t r = 0, d = 0;
  bool check = false;
  bool cold_queries = false;  // empty the cache before every query

  std::size_t memory() const { return M ? M : 16 * B; }
};

struct RunRow {
  std::size_t op_index = 0;
  char op = 'Q';
  std::optional<SegmentId> answer;  // queries only
  std::optional<SegmentId> oracle;  // queries under --check
  std::uint64_t reads = 0, writes = 0, cum_reads = 0, cum_writes = 0;
  std::size_t live = 0;  // live segments after the op
};

struct RunResult {
  std::vector<RunRow> rows;
  std::size_t mismatches = 0;
  std::size_t blocks = 0;  // allocated by the structure at the end
  std::size_t max_live = 0;
};

namespace detail {

// One interface over the five structures. The static structure is rebuilt
// from the live set before the first query after an update; the rebuild is
// charged to that update.
class Runner {
 public:
  virtual ~Runner() = default;
  virtual void insert(const Segment& s) = 0;
  virtual void erase(SegmentId id) = 0;
  virtual std::optional<Segment> query(Point q) = 0;
  virtual void settle() {}
  virtual std::size_t blocks() const = 0;
};

template <class S>
class Direct : public Runner {
 public:
  template <class... A>
  explicit Direct(A&&... a) : s_(std::forward<A>(a)...) {}
  void insert(const Segment& x) override { s_.insert(x); }
  void erase(SegmentId id) override { s_.erase(id); }
  std::optional<Segment> query(Point q) override { return s_.query(q); }
  std::size_t blocks() const override { return s_.block_count(); }

 private:
  S s_;
};

class Rebuilt : public Runner {
 public:
  Rebuilt(BlockStore& store, RayParams p) : store_(&store), p_(std::move(p)) {}
  void insert(const Segment& x) override { live_[x.id] = x, dirty_ = true; }
  void erase(SegmentId id) override { dirty_ |= live_.erase(id) != 0; }
  void settle() override {
    if (!dirty_) return;
    s_.reset();
    std::vector<Segment> segs;
    for (auto& [id, x] : live_) segs.push_back(x);
    s_ = std::make_unique<StaticRayShooter>(*store_, segs, p_);
    dirty_ = false;
  }
  std::optional<Segment> query(Point q) override { return s_ ? s_->query(q) : std::nullopt; }
  std::size_t blocks() const override { return s_ ? s_->block_count() : 0; }

 private:
  BlockStore* store_;
  RayParams p_;
  std::map<SegmentId, Segment> live_;
  std::unique_ptr<StaticRayShooter> s_;
  bool dirty_ = false;
};

template <class H>
class HorizUp : public Runner {
 public:
  HorizUp(BlockStore& store, std::vector<Coord> xs, HorizParams p) : s_(store, std::move(xs), p) {}
  void insert(const Segment& x) override { s_.insert(x); }
  void erase(SegmentId id) override { s_.erase(id); }
  std::optional<Segment> query(Point q) override { return s_.query(q, Ray::Up); }
  std::size_t blocks() const override { return s_.block_count(); }

 private:
  H s_;
};

inline std::unique_ptr<Runner> make_runner(BlockStore& store, const Workload& w, const RunOptions& o) {
  RayParams rp;
  rp.B = o.B, rp.delta = o.delta, rp.r = o.r, rp.d = o.d;
  HorizParams hp;
  hp.B = o.B, hp.r = o.r;
  std::vector<Coord> xs = w.universe();
  if (xs.empty()) xs.push_back(0);
  if (o.structure == "dynamic") return std::make_unique<Direct<DynamicRayShooter>>(store, xs, rp);
  if (o.structure == "baseline") return std::make_unique<Direct<BaselineRayShooter>>(store, xs, rp);
  if (o.structure == "static") {
    rp.universe = xs;
    return std::make_unique<Rebuilt>(store, rp);
  }
  if (o.structure == "horiz") return std::make_unique<HorizUp<HorizRayShooter>>(store, xs, hp);
  if (o.structure == "horiz-linear") return std::make_unique<HorizUp<HorizLinearRayShooter>>(store, xs, hp);
  throw Fault("unknown structure '" + o.structure + "'");
}

}  // namespace detail

inline RunResult run_workload(const Workload& w, const RunOptions& o) {
  BlockStore store(o.B, o.memory());
  auto runner = detail::make_runner(store, w, o);
  RunResult res;
  std::map<SegmentId, Segment> live;
  std::size_t last_update = SIZE_MAX;
  IoStats before = store.stats();
  for (std::size_t i = 0; i < w.ops.size(); ++i) {
    const Op& op = w.ops[i];
    RunRow row;
    row.op_index = i;
    row.op = static_cast<char>(op.kind);
    if (op.kind == Op::Query) {
      IoStats pre = store.stats();
      runner->settle();
      if (last_update != SIZE_MAX) {
        IoStats d = store.stats() - pre;
        res.rows[last_update].reads += d.reads;
        res.rows[last_update].writes += d.writes;
        for (std::size_t k = last_update; k < res.rows.size(); ++k) {
          res.rows[k].cum_reads += d.reads;
          res.rows[k].cum_writes += d.writes;
        }
        before = store.stats();
        last_update = SIZE_MAX;
      }
      if (o.cold_queries) {
        store.clear_cache();
        before = store.stats();
      }
      auto hit = runner->query(op.q);
      if (hit) row.answer = hit->id;
      if (o.check) {
        std::vector<Segment> segs;
        segs.reserve(live.size());
        for (auto& [id, s] : live) segs.push_back(s);
        auto want = oracle_successor(op.q, segs);
        if (want) row.oracle = want->id;
        if (row.oracle != row.answer) ++res.mismatches;
      }
    } else if (op.kind == Op::Insert) {
      runner->insert(op.seg);
      live[op.seg.id] = op.seg;
      last_update = i;
    } else {
      if (!live.count(op.id)) throw Fault("op " + std::to_string(i) + ": delete of a segment that is not live");
      runner->erase(op.id);
      live.erase(op.id);
      last_update = i;
    }
    IoStats now = store.stats();
    IoStats d = now - before;
    before = now;
    row.reads = d.reads, row.writes = d.writes;
    row.cum_reads = now.reads, row.cum_writes = now.writes;
    row.live = live.size();
    res.max_live = std::max(res.max_live, live.size());
    res.rows.push_back(row);
  }
  if (last_update != SIZE_MAX) {
    // a trailing update batch is never queried; charge its rebuild anyway
    IoStats pre = store.stats();
    runner->settle();
    IoStats d = store.stats() - pre;
    res.rows[last_update].reads += d.reads;
    res.rows[last_update].writes += d.writes;
    for (std::size_t k = last_update; k < res.rows.size(); ++k) res.rows[k].cum_reads += d.reads, res.rows[k].cum_writes += d.writes;
  }
  res.blocks = runner->blocks();
  return res;
}

inline void write_csv(std::ostream& os, const RunResult& r, bool with_oracle) {
  os << "op_index,op,answer_id,reads,writes,cumulative_reads,cumulative_writes";
  if (with_oracle) os << ",oracle_id";
  os << '\n';
  auto id = [](const std::optional<SegmentId>& x) { return x ? std::to_string(*x) : std::string("none"); };
  for (const RunRow& x : r.rows) {
    os << x.op_index << ',' << x.op << ',' << (x.op == 'Q' ? id(x.answer) : std::string()) << ',' << x.reads << ',' << x.writes << ','
       << x.cum_reads << ',' << x.cum_writes;
    if (with_oracle) os << ',' << (x.op == 'Q' ? id(x.oracle) : std::string());
    os << '\n';
  }
}

// Per-run means, keyed by the peak live count.
struct RunSummary {
  std::size_t n = 0;
  double query = 0, insert = 0, remove = 0;  // mean I/Os (reads + writes)
  std::size_t queries = 0, inserts = 0, deletes = 0;
};

inline RunSummary summarize_csv(std::istream& in, const std::string& name = "csv") {
  std::string line;
  std::size_t no = 0;
  RunSummary s;
  std::size_t live = 0;
  double q = 0, ins = 0, del = 0;
  while (std::getline(in, line)) {
    ++no;
    if (line.empty()) continue;
    if (no == 1) {
      if (line.rfind("op_index,op,answer_id,reads,writes", 0) != 0) throw Fault(name + " line 1: not a run CSV header");
      continue;
    }
    std::vector<std::string> f;
    std::stringstream ls(line);
    std::string cell;
    while (std::getline(ls, cell, ',')) f.push_back(cell);
    if (f.size() < 7 || f[1].size() != 1) throw Fault(name + " line " + std::to_string(no) + ": malformed row");
    double io = 0;
    try {
      io = double(std::stoull(f[3]) + std::stoull(f[4]));
    } catch (const std::exception&) {
      throw Fault(name + " line " + std::to_string(no) + ": bad I/O count");
    }
    switch (f[1][0]) {
      case 'Q': q += io, ++s.queries; break;
      case 'I': ins += io, ++s.inserts, ++live; break;
      case 'D': del += io, ++s.deletes, --live; break;
      default: throw Fault(name + " line " + std::to_string(no) + ": unknown op");
    }
    s.n = std::max(s.n, live);
  }
  if (s.queries) s.query = q / double(s.queries);
  if (s.inserts) s.insert = ins / double(s.inserts);
  if (s.deletes) s.remove = del / double(s.deletes);
  return s;
}

inline double log_base(double b, double n) { return std::log(std::max(n, 2.0)) / std::log(b); }

// Least-squares slope of log(y) against log(log_B n): y ~ (log_B n)^k.
inline std::optional<double> growth_exponent(const std::vector<RunSummary>& rows, std::size_t B, double RunSummary::*field) {
  std::vector<std::pair<double, double>> pts;
  for (const RunSummary& r : rows)
    if (r.*field > 0 && r.n > 1) pts.push_back({std::log(log_base(double(B), double(r.n))), std::log(r.*field)});
  if (pts.size() < 2) return std::nullopt;
  double mx = 0, my = 0;
  for (auto [x, y] : pts) mx += x, my += y;
  mx /= double(pts.size()), my /= double(pts.size());
  double sxx = 0, sxy = 0;
  for (auto [x, y] : pts) sxx += (x - mx) * (x - mx), sxy += (x - mx) * (y - my);
  if (sxx == 0) return std::nullopt;
  return sxy / sxx;
}

inline void write_report(std::ostream& os, std::vector<RunSummary> rows, std::size_t B) {
  std::sort(rows.begin(), rows.end(), [](const RunSummary& a, const RunSummary& b) { return a.n < b.n; });
  os << "n,log_B_n,mean_query_io,mean_insert_io,mean_delete_io,query_per_log,insert_per_log2,delete_per_log\n";
  for (const RunSummary& r : rows) {
    double l = log_base(double(B), double(r.n));
    os << r.n << ',' << l << ',' << r.query << ',' << r.insert << ',' << r.remove << ',' << r.query / l << ',' << r.insert / (l * l) << ','
       << r.remove / l << '\n';
  }
  if (rows.empty()) return;
  auto show = [&](const char* name, double RunSummary::*f) {
    auto k = growth_exponent(rows, B, f);
    os << "# exponent vs log_B n, " << name << ": " << (k ? std::to_string(*k) : std::string("n/a")) << '\n';
  };
  show("query", &RunSummary::query);
  show("insert", &RunSummary::insert);
  show("delete", &RunSummary::remove);
}

}  // namespace dpl
