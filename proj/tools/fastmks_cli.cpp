#include <algorithm>
#include <charconv>
#include <cstdint>
#include <fstream>
#include <iostream>
#include <map>
#include <numeric>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "fastmks/cover_tree.hpp"
#include "fastmks/diagnostics.hpp"
#include "fastmks/errors.hpp"
#include "fastmks/io.hpp"
#include "fastmks/kernels.hpp"
#include "fastmks/search.hpp"
#include "fastmks/sharded.hpp"

namespace {

using json = nlohmann::json;
using namespace fastmks;

std::string shortest(double v) {
  char buf[32];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, ptr);
}

// A file whose first non-blank character is '>' is FASTA; anything else is
// treated as delimited vectors.
bool sniff_fasta(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open '" + path + "'");
  std::string line;
  while (std::getline(in, line)) {
    for (const char ch : line) {
      if (ch == ' ' || ch == '\t' || ch == '\r') continue;
      return ch == '>';
    }
  }
  return false;
}

Dataset load_dataset(const std::string& path) {
  return sniff_fasta(path) ? load_sequences(path) : load_vectors(path);
}

json dataset_json(const std::string& path, const Dataset& d) {
  json j;
  j["path"] = path;
  j["points"] = d.size();
  j["kind"] = d.string_domain() ? "sequences" : "vectors";
  if (!d.string_domain()) j["dim"] = d.dimension();
  return j;
}

json stats_json(const TreeStats& s) {
  return json{{"nodes", s.nodes},
              {"points", s.points},
              {"root_scale", s.root_scale},
              {"min_scale", s.min_scale},
              {"depth", s.depth},
              {"max_children", s.max_children},
              {"duplicate_points", s.duplicate_points},
              {"construction_evals", s.construction_evals}};
}

json hits_json(const std::vector<Hit>& hits) {
  json a = json::array();
  for (const Hit& h : hits) a.push_back({{"index", h.index}, {"value", h.value}});
  return a;
}

std::string guarantee_text(const SearchConfig& cfg) {
  switch (cfg.mode) {
    case SearchMode::Exact:
      return "value = exact";
    case SearchMode::AbsoluteValue:
      return "value >= exact - " + shortest(cfg.epsilon);
    case SearchMode::RelativeValue:
      return "value >= (1 - " + shortest(cfg.epsilon) + ") * exact when exact > 0";
    case SearchMode::Rank:
      return "rank <= " + shortest(cfg.tau) + " with probability >= " +
             shortest(1.0 - cfg.delta);
  }
  return "";
}

void write_report(const json& report, const std::string& path) {
  if (path.empty()) {
    std::cout << report.dump(2) << '\n';
    return;
  }
  std::ofstream out(path);
  if (!out) throw ParseError("cannot write '" + path + "'");
  out << report.dump(2) << '\n';
}

// All n kernel values for one query, off the books of any reported counter.
std::vector<double> oracle_values(const Dataset& data, const Kernel& kernel,
                                  const PointRef& q) {
  EvalCounter scratch;
  std::vector<double> values(data.size());
  for (std::size_t i = 0; i < data.size(); ++i)
    values[i] = kernel.eval(q, data.point(i), scratch);
  return values;
}

std::vector<Hit> oracle_top(const std::vector<double>& values, std::size_t k) {
  std::vector<std::size_t> order(values.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return values[a] != values[b] ? values[a] > values[b] : a < b;
  });
  std::vector<Hit> top;
  for (std::size_t i = 0; i < std::min(k, order.size()); ++i)
    top.push_back({order[i], values[order[i]]});
  return top;
}

struct VerifyStats {
  std::size_t checked = 0;
  std::size_t guarantee_void = 0;  // rva queries with best <= 0
  std::size_t rank_failures = 0;   // ra queries whose hit ranked past tau
  std::size_t worst_rank = 0;
};

// Empty string when the query passes; ra only collects statistics (its
// guarantee is probabilistic, a single miss is not a failure).
std::string verify_query(const SearchConfig& cfg, const Dataset& data, const Kernel& kernel,
                         const PointRef& q, const std::vector<Hit>& hits,
                         bool guarantee_void, VerifyStats& stats) {
  const std::vector<double> values = oracle_values(data, kernel, q);
  ++stats.checked;
  const double slack = 1e-12;
  switch (cfg.mode) {
    case SearchMode::Exact: {
      const std::vector<Hit> truth = oracle_top(values, cfg.k);
      if (hits.size() != truth.size())
        return "returned " + std::to_string(hits.size()) + " hits, oracle has " +
               std::to_string(truth.size());
      for (std::size_t i = 0; i < truth.size(); ++i)
        if (hits[i].index != truth[i].index || hits[i].value != truth[i].value)
          return "slot " + std::to_string(i) + ": got (" + std::to_string(hits[i].index) +
                 ", " + shortest(hits[i].value) + "), oracle (" +
                 std::to_string(truth[i].index) + ", " + shortest(truth[i].value) + ")";
      return {};
    }
    case SearchMode::AbsoluteValue: {
      const std::vector<Hit> truth = oracle_top(values, cfg.k);
      for (std::size_t i = 0; i < hits.size() && i < truth.size(); ++i)
        if (hits[i].value < truth[i].value - cfg.epsilon - slack)
          return "slot " + std::to_string(i) + ": value " + shortest(hits[i].value) +
                 " < exact " + shortest(truth[i].value) + " - " + shortest(cfg.epsilon);
      return {};
    }
    case SearchMode::RelativeValue: {
      if (guarantee_void) {
        ++stats.guarantee_void;
        return {};
      }
      const std::vector<Hit> truth = oracle_top(values, cfg.k);
      for (std::size_t i = 0; i < hits.size() && i < truth.size(); ++i)
        if (truth[i].value > 0 &&
            hits[i].value < (1.0 - cfg.epsilon) * truth[i].value - slack)
          return "slot " + std::to_string(i) + ": value " + shortest(hits[i].value) +
                 " < (1 - " + shortest(cfg.epsilon) + ") * " + shortest(truth[i].value);
      return {};
    }
    case SearchMode::Rank: {
      if (hits.empty()) return "no hits returned";
      std::size_t rank = 1;
      for (const double v : values)
        if (v > hits[0].value) ++rank;
      stats.worst_rank = std::max(stats.worst_rank, rank);
      if (static_cast<double>(rank) > cfg.tau) ++stats.rank_failures;
      return {};
    }
  }
  return {};
}

struct BuildOptions {
  std::string reference;
  std::string kernel_spec = "linear";
  double base = CoverTree::kDefaultBase;
  std::string output;  // index file
  std::string report;  // json; stdout when empty
};

struct QueryOptions {
  std::string reference;
  std::string queries;
  std::string index_path;
  std::string kernel_spec = "linear";
  bool kernel_given = false;
  std::string mode_spec = "exact";
  std::size_t k = 1;
  double base = CoverTree::kDefaultBase;
  std::size_t shards = 1;
  bool shuffle_shards = false;
  std::uint64_t seed = 0;
  bool no_parent_prune = false;
  bool verify = false;
  std::string output;
  std::string csv;
  std::vector<std::size_t> k_list = {1, 2, 5, 10};
};

struct DiagnoseOptions {
  std::string reference;
  std::string kernel_spec = "linear";
  double base = CoverTree::kDefaultBase;
  std::size_t cap = 5000;
  std::size_t directions = 20;
  std::size_t slabs = 20;
  std::uint64_t seed = 0;
  std::string output;
};

struct GenerateOptions {
  std::string kind;
  std::size_t n = 0;
  std::size_t dim = 3;
  std::size_t clusters = 10;
  double sigma = 0.05;
  std::size_t min_len = 20;
  std::size_t max_len = 60;
  std::uint64_t seed = 0;
  std::string output;
};

int run_build(const BuildOptions& opt) {
  const Kernel kernel = Kernel::parse(opt.kernel_spec);
  Dataset ref = load_dataset(opt.reference);
  EvalCounter counter;
  ref.prepare(kernel, counter);
  const CoverTree tree = CoverTree::build(ref, kernel, opt.base, counter);
  tree.save_file(opt.output);

  json report;
  report["schema"] = "fastmks-report-v1";
  report["command"] = "build";
  report["kernel"] = kernel.spec();
  report["base"] = opt.base;
  report["reference"] = dataset_json(opt.reference, ref);
  report["index"] = opt.output;
  report["tree"] = stats_json(tree.stats());
  report["total_evals"] = counter.count;  // self-kernel preparation + construction
  write_report(report, opt.report);
  return 0;
}

int run_queries(const QueryOptions& opt, bool bench) {
  // An index file records its kernel; only an explicit --kernel overrides it
  // (and must then match, or the load refuses).
  std::string kernel_spec = opt.kernel_spec;
  if (!opt.index_path.empty() && !opt.kernel_given)
    kernel_spec = CoverTree::stored_kernel_spec_file(opt.index_path);
  const Kernel kernel = Kernel::parse(kernel_spec);
  SearchConfig cfg = SearchConfig::parse(opt.mode_spec);
  cfg.k = opt.k;
  cfg.parent_prune = !opt.no_parent_prune;

  Dataset ref = load_dataset(opt.reference);
  Dataset queries = load_dataset(opt.queries);
  if (ref.string_domain() != queries.string_domain())
    throw InvalidArgument("reference and query sets must both be vectors or both be sequences");
  if (!ref.string_domain() && ref.dimension() != queries.dimension())
    throw InvalidArgument("reference dimension " + std::to_string(ref.dimension()) +
                          " != query dimension " + std::to_string(queries.dimension()));
  ref.prepare_grams(kernel);
  queries.prepare_grams(kernel);

  EvalCounter build_counter;
  std::optional<CoverTree> tree;
  std::optional<ShardedIndex> sharded;
  std::uint64_t construction_evals = 0;
  bool loaded = false;

  if (opt.shards > 1) {
    if (!opt.index_path.empty())
      throw InvalidArgument("--index cannot be combined with --shards");
    sharded = ShardedIndex::build(
        ref, kernel, opt.base, opt.shards,
        opt.shuffle_shards ? std::optional<std::uint64_t>(opt.seed) : std::nullopt,
        build_counter);
    construction_evals = sharded->construction_evals();
  } else if (!opt.index_path.empty()) {
    // Rebuilding the self-kernel cache is preprocessing already paid for by
    // the original build; keep it off every reported counter.
    EvalCounter scratch;
    ref.prepare(kernel, scratch);
    tree = CoverTree::load_file(opt.index_path, ref, kernel);
    construction_evals = tree->construction_evals();
    loaded = true;
  } else {
    ref.prepare(kernel, build_counter);
    tree = CoverTree::build(ref, kernel, opt.base, build_counter);
    construction_evals = tree->construction_evals();
  }

  const std::vector<std::size_t> ks =
      bench ? opt.k_list : std::vector<std::size_t>{opt.k};
  json results = json::array();
  std::map<std::size_t, std::vector<std::uint64_t>> evals_by_k;
  VerifyStats vstats;
  std::vector<std::uint64_t> shard_totals(sharded ? sharded->requested_shards() : 0, 0);
  std::uint64_t parallel_cost_total = 0;

  for (const std::size_t k : ks) {
    SearchConfig run_cfg = cfg;
    run_cfg.k = k;
    for (std::size_t qi = 0; qi < queries.size(); ++qi) {
      const PointRef q = queries.point(qi);
      std::vector<Hit> hits;
      bool guarantee_void = false;
      json row;
      row["query"] = qi;
      if (bench) row["k"] = k;

      std::uint64_t evals = 0;
      if (sharded) {
        const ShardedQueryResult r = sharded_search(*sharded, kernel, q, run_cfg);
        hits = r.hits;
        guarantee_void = r.guarantee_void;
        evals = r.total_evals;
        for (std::size_t s = 0; s < r.per_shard_evals.size(); ++s)
          shard_totals[s] += r.per_shard_evals[s];
        parallel_cost_total += r.parallel_cost;
        row["kernel_evals"] = r.total_evals;
        row["per_shard_evals"] = r.per_shard_evals;
        row["parallel_cost"] = r.parallel_cost;
      } else {
        EvalCounter qc;
        const QueryResult r = fastmks::fastmks(*tree, ref, kernel, q, run_cfg, qc);
        hits = r.hits;
        guarantee_void = r.guarantee_void;
        evals = qc.count;
        row["kernel_evals"] = r.kernel_evals;
        row["nodes_visited"] = r.nodes_visited;
        row["nodes_pruned"] = r.nodes_pruned;
      }
      if (run_cfg.mode == SearchMode::RelativeValue) row["guarantee_void"] = guarantee_void;
      row["hits"] = hits_json(hits);
      evals_by_k[k].push_back(evals);
      if (!bench) results.push_back(std::move(row));

      if (opt.verify) {
        const std::string err =
            verify_query(run_cfg, ref, kernel, q, hits, guarantee_void, vstats);
        if (!err.empty()) {
          std::cerr << "verify failed: query " << qi << " (k=" << k << "): " << err << '\n';
          return 2;
        }
      }
    }
  }

  const SpeedupReport sp = speedup_report(evals_by_k, ref.size(), construction_evals);

  json report;
  report["schema"] = "fastmks-report-v1";
  report["command"] = bench ? "bench" : "query";
  report["kernel"] = kernel.spec();
  report["mode"] = cfg.mode_spec();
  if (bench)
    report["k"] = ks;
  else
    report["k"] = opt.k;
  report["base"] = opt.base;
  report["seed"] = opt.seed;
  report["parent_prune"] = cfg.parent_prune;
  report["reference"] = dataset_json(opt.reference, ref);
  report["queries"] = dataset_json(opt.queries, queries);
  if (cfg.mode != SearchMode::Exact) report["guarantee"] = guarantee_text(cfg);

  if (tree) {
    report["tree"] = stats_json(tree->stats());
    if (loaded) report["tree"]["loaded_from"] = opt.index_path;
  }
  if (sharded) {
    json shard_points = json::array();
    std::vector<std::size_t> per_slot(sharded->requested_shards(), 0);
    for (std::size_t s = 0; s < sharded->shard_count(); ++s)
      per_slot[sharded->shard_slot(s)] = sharded->shard_data(s).size();
    for (const std::size_t p : per_slot) shard_points.push_back(p);
    report["shards"] = {{"requested", sharded->requested_shards()},
                        {"built", sharded->shard_count()},
                        {"shuffled", opt.shuffle_shards},
                        {"points", shard_points},
                        {"construction_evals", sharded->construction_evals()}};
  }

  json rows = json::array();
  for (const SpeedupRow& r : sp.rows)
    rows.push_back({{"k", r.k},
                    {"queries", r.queries},
                    {"total_evals", r.total_evals},
                    {"mean_evals", r.mean_evals},
                    {"speedup", r.speedup}});
  json aggregate;
  aggregate["rows"] = rows;
  aggregate["total_evals"] = sp.total_evals;
  aggregate["speedup"] = sp.overall_speedup;
  aggregate["construction_evals"] = sp.construction_evals;
  aggregate["construction_breakeven_queries"] = sp.construction_breakeven_queries;
  if (sharded) {
    aggregate["shard_evals"] = shard_totals;
    aggregate["parallel_cost_total"] = parallel_cost_total;
  }
  report["aggregate"] = aggregate;

  if (opt.verify) {
    json v;
    v["checked"] = vstats.checked;
    if (cfg.mode == SearchMode::Exact) v["mismatches"] = 0;
    if (cfg.mode == SearchMode::AbsoluteValue || cfg.mode == SearchMode::RelativeValue)
      v["violations"] = 0;
    if (cfg.mode == SearchMode::RelativeValue) v["guarantee_void_queries"] = vstats.guarantee_void;
    if (cfg.mode == SearchMode::Rank) {
      v["rank_failures"] = vstats.rank_failures;
      v["failure_rate"] = vstats.checked == 0
                              ? 0.0
                              : static_cast<double>(vstats.rank_failures) /
                                    static_cast<double>(vstats.checked);
      v["worst_rank"] = vstats.worst_rank;
      v["tau"] = cfg.tau;
      v["delta"] = cfg.delta;
    }
    report["verify"] = v;
  }
  if (!bench) report["results"] = results;

  write_report(report, opt.output);

  if (bench && !opt.csv.empty()) {
    std::ofstream out(opt.csv);
    if (!out) throw ParseError("cannot write '" + opt.csv + "'");
    out << "k,queries,total_evals,mean_evals,speedup\n";
    for (const SpeedupRow& r : sp.rows)
      out << r.k << ',' << r.queries << ',' << r.total_evals << ',' << shortest(r.mean_evals)
          << ',' << shortest(r.speedup) << '\n';
  }
  return 0;
}

int run_diagnose(const DiagnoseOptions& opt) {
  const Kernel kernel = Kernel::parse(opt.kernel_spec);
  Dataset ref = load_dataset(opt.reference);
  EvalCounter build_counter;
  ref.prepare(kernel, build_counter);
  const CoverTree tree = CoverTree::build(ref, kernel, opt.base, build_counter);

  EvalCounter diag;
  const double c = expansion_constant(ref, kernel, diag, opt.cap);
  const ConcentrationEstimate gamma =
      directional_concentration(ref, kernel, opt.directions, opt.slabs, opt.seed, diag);
  EvalCounter check;
  const InvariantReport inv = tree.validate(ref, kernel, check);

  json report;
  report["schema"] = "fastmks-report-v1";
  report["command"] = "diagnose";
  report["kernel"] = kernel.spec();
  report["base"] = opt.base;
  report["seed"] = opt.seed;
  report["reference"] = dataset_json(opt.reference, ref);
  report["expansion_constant"] = c;
  report["directional_concentration"] = {{"gamma", gamma.gamma},
                                         {"directions", gamma.directions},
                                         {"slabs", gamma.slabs}};
  report["tree"] = stats_json(tree.stats());
  report["invariants"] = {{"nesting", inv.nesting},
                          {"covering", inv.covering},
                          {"separation", inv.separation},
                          {"cache_furthest", inv.cache_furthest},
                          {"cache_parent", inv.cache_parent},
                          {"cache_subtree", inv.cache_subtree},
                          {"node_budget", inv.node_budget},
                          {"ok", inv.ok()}};
  report["diagnostic_evals"] = diag.count;
  write_report(report, opt.output);
  return inv.ok() ? 0 : 3;
}

int run_generate(const GenerateOptions& opt) {
  if (opt.kind == "sequences") {
    write_sequences(opt.output, generate_sequences(opt.n, opt.min_len, opt.max_len, opt.seed));
  } else if (opt.kind == "uniform") {
    write_vectors(opt.output, generate_uniform_cube(opt.n, opt.dim, opt.seed));
  } else if (opt.kind == "clusters") {
    write_vectors(opt.output,
                  generate_clusters(opt.n, opt.dim, opt.clusters, opt.sigma, opt.seed));
  } else {
    write_vectors(opt.output, generate_sphere(opt.n, opt.dim, opt.seed));
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"max-kernel search over kernel-space cover trees"};
  app.require_subcommand(1);

  BuildOptions build_opt;
  CLI::App* build = app.add_subcommand("build", "build an index and save it");
  build->add_option("-r,--reference", build_opt.reference, "reference dataset (CSV/TSV or FASTA)")
      ->required();
  build->add_option("--kernel", build_opt.kernel_spec, "kernel spec, e.g. polynomial:d=10,c=1");
  build->add_option("--base", build_opt.base, "cover tree expansion base (> 1)");
  build->add_option("-o,--output", build_opt.output, "index file to write")->required();
  build->add_option("--report", build_opt.report, "JSON report path (stdout when omitted)");

  QueryOptions query_opt;
  CLI::App* query = app.add_subcommand("query", "answer top-k max-kernel queries");
  query->add_option("-r,--reference", query_opt.reference, "reference dataset")->required();
  query->add_option("-q,--queries", query_opt.queries, "query dataset")->required();
  query->add_option("--index", query_opt.index_path, "load a saved index instead of building");
  auto* query_kernel =
      query->add_option("--kernel", query_opt.kernel_spec,
                        "kernel spec (defaults to the index's kernel when --index is given)");
  query->add_option("--mode", query_opt.mode_spec,
                    "exact | ava:eps=E | rva:eps=E | ra:tau=T,delta=D");
  query->add_option("-k,--k", query_opt.k, "results per query");
  query->add_option("--base", query_opt.base, "cover tree expansion base (> 1)");
  query->add_option("--shards", query_opt.shards, "split the reference across m trees");
  query->add_flag("--shuffle-shards", query_opt.shuffle_shards,
                  "shuffle points across shards (seeded) instead of round-robin by index");
  query->add_option("--seed", query_opt.seed, "seed for any sampling");
  query->add_flag("--no-parent-prune", query_opt.no_parent_prune,
                  "evaluate every visited child instead of pruning from parent bounds");
  query->add_flag("--verify", query_opt.verify,
                  "run the linear-scan oracle per query; non-zero exit on any violation");
  query->add_option("-o,--output", query_opt.output, "JSON report path (stdout when omitted)");

  QueryOptions bench_opt;
  CLI::App* bench = app.add_subcommand("bench", "sweep k and report speedup over linear scan");
  bench->add_option("-r,--reference", bench_opt.reference, "reference dataset")->required();
  bench->add_option("-q,--queries", bench_opt.queries, "query dataset")->required();
  bench->add_option("--index", bench_opt.index_path, "load a saved index instead of building");
  auto* bench_kernel =
      bench->add_option("--kernel", bench_opt.kernel_spec,
                        "kernel spec (defaults to the index's kernel when --index is given)");
  bench->add_option("--mode", bench_opt.mode_spec, "search mode for every batch");
  bench->add_option("--k-list", bench_opt.k_list, "k values to sweep")->delimiter(',');
  bench->add_option("--base", bench_opt.base, "cover tree expansion base (> 1)");
  bench->add_option("--shards", bench_opt.shards, "split the reference across m trees");
  bench->add_flag("--shuffle-shards", bench_opt.shuffle_shards, "shuffle points across shards");
  bench->add_option("--seed", bench_opt.seed, "seed for any sampling");
  bench->add_flag("--no-parent-prune", bench_opt.no_parent_prune, "disable parent-bound pruning");
  bench->add_flag("--verify", bench_opt.verify, "oracle-check every batch");
  bench->add_option("-o,--output", bench_opt.output, "JSON report path (stdout when omitted)");
  bench->add_option("--csv", bench_opt.csv, "also write the per-k table as CSV");

  DiagnoseOptions diag_opt;
  CLI::App* diagnose = app.add_subcommand("diagnose", "dataset hardness and tree health report");
  diagnose->add_option("-r,--reference", diag_opt.reference, "reference dataset")->required();
  diagnose->add_option("--kernel", diag_opt.kernel_spec, "kernel spec");
  diagnose->add_option("--base", diag_opt.base, "cover tree expansion base (> 1)");
  diagnose->add_option("--cap", diag_opt.cap, "refuse exact expansion constant above this n");
  diagnose->add_option("--directions", diag_opt.directions, "directions to sample");
  diagnose->add_option("--slabs", diag_opt.slabs, "slabs per direction");
  diagnose->add_option("--seed", diag_opt.seed, "sampling seed");
  diagnose->add_option("-o,--output", diag_opt.output, "JSON report path (stdout when omitted)");

  GenerateOptions gen_opt;
  CLI::App* generate = app.add_subcommand("generate", "write a synthetic dataset");
  generate->add_option("--kind", gen_opt.kind, "uniform | clusters | sphere | sequences")
      ->required()
      ->check(CLI::IsMember({"uniform", "clusters", "sphere", "sequences"}));
  generate->add_option("-n,--n", gen_opt.n, "number of points")->required();
  generate->add_option("--dim", gen_opt.dim, "dimension (vector kinds)");
  generate->add_option("--clusters", gen_opt.clusters, "cluster count (clusters kind)");
  generate->add_option("--sigma", gen_opt.sigma, "per-coordinate noise (clusters kind)");
  generate->add_option("--min-len", gen_opt.min_len, "shortest sequence (sequences kind)");
  generate->add_option("--max-len", gen_opt.max_len, "longest sequence (sequences kind)");
  generate->add_option("--seed", gen_opt.seed, "generator seed");
  generate->add_option("-o,--output", gen_opt.output, "file to write")->required();

  CLI11_PARSE(app, argc, argv);
  query_opt.kernel_given = query_kernel->count() > 0;
  bench_opt.kernel_given = bench_kernel->count() > 0;

  try {
    if (build->parsed()) return run_build(build_opt);
    if (query->parsed()) return run_queries(query_opt, false);
    if (bench->parsed()) return run_queries(bench_opt, true);
    if (diagnose->parsed()) return run_diagnose(diag_opt);
    if (generate->parsed()) return run_generate(gen_opt);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
