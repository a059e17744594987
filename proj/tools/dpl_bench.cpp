// dpl_bench: generate workloads, replay them with I/O accounting, summarize.
//
//   dpl_bench gen --kind random-general --n 4096 --seed 1 --out w.txt
//   dpl_bench run w.txt --structure dynamic --B 64 --check --out run.csv
//   dpl_bench report run1.csv run2.csv --B 64

#include <fstream>
#include <iostream>

#include "CLI11.hpp"
#include "dpl/bench.hpp"

namespace {

int fail(const std::string& msg) {
  std::cerr << "dpl_bench: " << msg << '\n';
  return 2;
}

// Header entries fill in parameters the command line left unset.
void apply_header(const dpl::Workload& w, dpl::RunOptions& o, const CLI::App& run) {
  auto num = [&](const char* key, auto& field, const char* flag) {
    auto it = w.header.find(key);
    if (it == w.header.end() || run.count(flag)) return;
    try {
      field = static_cast<std::remove_reference_t<decltype(field)>>(std::stod(it->second));
    } catch (const std::exception&) {
      throw dpl::Fault("workload header '" + std::string(key) + "' is not a number");
    }
  };
  num("B", o.B, "--B");
  num("M", o.M, "--M");
  num("delta", o.delta, "--delta");
  num("r", o.r, "--r");
  num("d", o.d, "--d");
  if (auto it = w.header.find("variant"); it != w.header.end() && !run.count("--structure")) o.structure = it->second;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"External-memory vertical ray shooting benchmark"};
  app.require_subcommand(1);

  auto* gen = app.add_subcommand("gen", "write a workload file");
  std::string kind = "random-general", gen_out;
  std::size_t n = 1024;
  std::uint64_t seed = 1;
  std::size_t gen_B = 0;
  gen->add_option("--kind", kind, "random-general | random-horizontal | staircase | adversarial-reorder");
  gen->add_option("--n", n, "number of segments")->check(CLI::PositiveNumber);
  gen->add_option("--seed", seed);
  gen->add_option("--B", gen_B, "block size recorded in the header");
  gen->add_option("--out", gen_out, "output file (default stdout)");

  auto* run = app.add_subcommand("run", "replay a workload and write per-op I/Os as CSV");
  std::string wl_path, run_out;
  dpl::RunOptions opt;
  run->add_option("workload", wl_path, "workload file")->required();
  run->add_option("--structure", opt.structure)->check(CLI::IsMember({"static", "dynamic", "horiz", "horiz-linear", "baseline"}));
  run->add_option("--B", opt.B, "block size in words")->check(CLI::Range(4, 1 << 20));
  run->add_option("--M", opt.M, "memory in words (default 16 blocks)");
  run->add_option("--delta", opt.delta, "fanout exponent: r = B^delta")->check(CLI::Range(0.01, 0.5));
  run->add_option("--r", opt.r, "fanout override");
  run->add_option("--d", opt.d, "bridge spacing override");
  run->add_flag("--check", opt.check, "compare every query with the brute-force oracle");
  run->add_flag("--cold", opt.cold_queries, "empty the cache before every query");
  run->add_option("--seed", seed, "accepted for symmetry with gen; replay is deterministic");
  run->add_option("--out", run_out, "CSV file (default stdout)");

  auto* rep = app.add_subcommand("report", "per-n mean I/Os and growth exponents");
  std::vector<std::string> csvs;
  std::size_t rep_B = 64;
  rep->add_option("csv", csvs, "run CSV files");
  rep->add_option("--B", rep_B, "block size the runs used")->check(CLI::Range(2, 1 << 20));

  CLI11_PARSE(app, argc, argv);

  try {
    if (*gen) {
      dpl::Workload w = dpl::generate(kind, n, seed);
      if (gen_B) w.header["B"] = std::to_string(gen_B);
      if (gen_out.empty()) {
        std::cout << w.to_text();
      } else {
        std::ofstream f(gen_out);
        if (!f) return fail("cannot write " + gen_out);
        f << w.to_text();
      }
      return 0;
    }
    if (*run) {
      dpl::Workload w = dpl::Workload::load(wl_path);
      apply_header(w, opt, *run);
      dpl::RunResult r = dpl::run_workload(w, opt);
      if (run_out.empty()) {
        dpl::write_csv(std::cout, r, opt.check);
      } else {
        std::ofstream f(run_out);
        if (!f) return fail("cannot write " + run_out);
        dpl::write_csv(f, r, opt.check);
      }
      std::cerr << "ops " << r.rows.size() << ", peak live " << r.max_live << ", blocks " << r.blocks;
      if (opt.check) std::cerr << ", mismatches " << r.mismatches;
      std::cerr << '\n';
      return r.mismatches ? 1 : 0;
    }
    std::vector<dpl::RunSummary> rows;
    for (const std::string& p : csvs) {
      std::ifstream f(p);
      if (!f) return fail("cannot open " + p);
      rows.push_back(dpl::summarize_csv(f, p));
    }
    dpl::write_report(std::cout, rows, rep_B);
    return 0;
  } catch (const dpl::Fault& e) {
    return fail(e.what());
  }
}
