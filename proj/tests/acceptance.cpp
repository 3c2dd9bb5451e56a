// Runs the full acceptance checklist and prints one PASS or FAIL line per
// criterion. Exits nonzero when any criterion fails. argv[1] names the
// command-line binary, exercised by the last criterion.
#include "fastmks/diagnostics.hpp"
#include "fastmks/io.hpp"
#include "fastmks/sharded.hpp"
#include "json.hpp"

#include <unistd.h>

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <deque>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <limits>
#include <random>
#include <sstream>
#include <string>
#include <vector>

using namespace fastmks;
using json = nlohmann::json;
namespace fs = std::filesystem;

namespace {

using Rows = std::vector<std::vector<double>>;

struct Built {
    std::string name;
    Kernel kernel;
    Dataset data;
    CoverTree tree;
};

// deque: growing the suite must not invalidate references handed out earlier
std::deque<Built> suite;

Built& add_case(const std::string& name, const Kernel& kernel, Dataset data) {
    EvalCounter c;
    data.prepare(kernel, c);
    CoverTree tree = CoverTree::build(data, kernel, CoverTree::kDefaultBase, c);
    suite.push_back({name, kernel, std::move(data), std::move(tree)});
    return suite.back();
}

Built& add_vectors(const std::string& name, const Kernel& kernel, Rows rows) {
    return add_case(name, kernel, Dataset::from_vectors(std::move(rows)));
}

Built& find_case(const std::string& name) {
    for (Built& b : suite)
        if (b.name == name) return b;
    throw std::logic_error("suite case missing: " + name);
}

std::vector<QueryPoint> vector_queries(const Rows& rows) {
    std::vector<QueryPoint> qs;
    qs.reserve(rows.size());
    for (const auto& r : rows) qs.push_back(QueryPoint::vector(r));
    return qs;
}

std::vector<QueryPoint> sequence_queries(const std::vector<std::string>& seqs,
                                         const Kernel& kernel) {
    std::vector<QueryPoint> qs;
    qs.reserve(seqs.size());
    for (const auto& s : seqs) qs.push_back(QueryPoint::sequence(s, kernel));
    return qs;
}

bool hits_equal(const std::vector<Hit>& a, const std::vector<Hit>& b, std::size_t count) {
    if (a.size() < count || b.size() < count) return false;
    for (std::size_t i = 0; i < count; ++i)
        if (a[i].index != b[i].index || a[i].value != b[i].value) return false;
    return true;
}

// Per-node lists of every dataset index in the subtree, duplicates included.
std::vector<std::vector<std::size_t>> subtree_points(const CoverTree& tree) {
    std::vector<std::vector<std::size_t>> sub(tree.node_count());
    std::function<void(std::uint32_t)> walk = [&](std::uint32_t id) {
        const CoverNode& n = tree.node(id);
        if (n.children.empty()) sub[id].push_back(n.point);
        for (std::size_t d : n.duplicates) sub[id].push_back(d);
        for (std::uint32_t c : n.children) {
            walk(c);
            sub[id].insert(sub[id].end(), sub[c].begin(), sub[c].end());
        }
    };
    walk(tree.root_id());
    return sub;
}

int run_command(const std::string& cmd) {
    const int status = std::system(cmd.c_str());
    if (status == -1) return -1;
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string read_file(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

struct Criterion {
    std::string name;
    bool pass = false;
    std::string detail;
};

// ---------------------------------------------------------------------------

Criterion exactness() {
    Criterion cr{"exact search matches linear scan bitwise"};
    const std::vector<std::size_t> ks{1, 2, 5, 10};
    std::size_t combos = 0, comparisons = 0, mismatches = 0;

    auto run = [&](const Built& b, const std::vector<QueryPoint>& queries) {
        ++combos;
        for (const QueryPoint& q : queries) {
            EvalCounter oc;
            const QueryResult truth = linear_scan(b.data, b.kernel, q.ref(), 10, oc);
            for (const std::size_t k : ks) {
                EvalCounter c;
                const QueryResult got = fastmks_exact(b.tree, b.data, b.kernel, q.ref(), k, c);
                ++comparisons;
                if (got.hits.size() != k || !hits_equal(got.hits, truth.hits, k)) ++mismatches;
            }
        }
    };

    const std::vector<std::pair<std::string, Rows>> corpora = {
        {"uniform-r3", generate_uniform_cube(1000, 3, 1001)},
        {"clustered-r8", generate_clusters(1000, 8, 10, 0.05, 1002)},
        {"sphere-r16", generate_sphere(1000, 16, 1003)},
        {"clustered-r8-10k", generate_clusters(10000, 8, 10, 0.05, 1004)},
    };
    const std::vector<std::pair<std::string, Rows>> query_rows = {
        {"uniform-r3", generate_uniform_cube(100, 3, 2001)},
        {"clustered-r8", generate_clusters(100, 8, 10, 0.05, 2002)},
        {"sphere-r16", generate_sphere(100, 16, 2003)},
        {"clustered-r8-10k", generate_clusters(100, 8, 10, 0.05, 2004)},
    };
    const std::vector<Kernel> kernels = {Kernel::linear(), Kernel::polynomial(10, 1.0),
                                         Kernel::cosine(), Kernel::gaussian(1.0)};

    for (std::size_t ci = 0; ci < corpora.size(); ++ci) {
        const std::vector<QueryPoint> queries = vector_queries(query_rows[ci].second);
        for (const Kernel& kernel : kernels) {
            Built& b = add_vectors(corpora[ci].first + "/" + kernel.spec(), kernel,
                                   corpora[ci].second);
            run(b, queries);
        }
    }
    {
        const Kernel kernel = Kernel::p_spectrum(3);
        Built& b = add_case("sequences/" + kernel.spec(), kernel,
                            Dataset::from_sequences(generate_sequences(1000, 20, 60, 1005)));
        run(b, sequence_queries(generate_sequences(100, 20, 60, 2005), kernel));
    }

    cr.pass = mismatches == 0 && combos == 17;
    cr.detail = std::to_string(combos) + " corpus-kernel pairs, " + std::to_string(comparisons) +
                " top-k comparisons, " + std::to_string(mismatches) + " mismatches";
    return cr;
}

Criterion bound_soundness() {
    Criterion cr{"node bounds dominate true subtree maxima"};
    std::size_t pairs = 0, violations = 0, dominance_violations = 0;

    struct BoundCase {
        const Built* built;
        std::vector<QueryPoint> queries;
    };
    std::vector<BoundCase> cases;
    cases.push_back({&add_vectors("bounds/linear", Kernel::linear(),
                                  generate_uniform_cube(400, 3, 3001)),
                     vector_queries(generate_uniform_cube(25, 3, 3002))});
    cases.push_back({&add_vectors("bounds/" + Kernel::polynomial(10, 1.0).spec(),
                                  Kernel::polynomial(10, 1.0),
                                  generate_uniform_cube(400, 3, 3003)),
                     vector_queries(generate_uniform_cube(25, 3, 3004))});
    cases.push_back({&add_vectors("bounds/cosine", Kernel::cosine(),
                                  generate_sphere(400, 8, 3005)),
                     vector_queries(generate_sphere(25, 8, 3006))});
    cases.push_back({&add_vectors("bounds/" + Kernel::gaussian(0.8).spec(),
                                  Kernel::gaussian(0.8),
                                  generate_clusters(400, 4, 6, 0.1, 3007)),
                     vector_queries(generate_clusters(25, 4, 6, 0.1, 3008))});
    {
        const Kernel pk = Kernel::p_spectrum(3);
        cases.push_back({&add_case("bounds/" + pk.spec(), pk,
                                   Dataset::from_sequences(generate_sequences(400, 20, 60, 3009))),
                         sequence_queries(generate_sequences(25, 20, 60, 3010), pk)});
    }

    for (const BoundCase& bc : cases) {
        const Built& b = *bc.built;
        const auto sub = subtree_points(b.tree);
        EvalCounter scratch;
        std::vector<double> self_q(bc.queries.size());
        for (std::size_t qi = 0; qi < bc.queries.size(); ++qi)
            self_q[qi] = b.kernel.eval(bc.queries[qi].ref(), bc.queries[qi].ref(), scratch);

        std::mt19937_64 rng(9000 + pairs);
        std::uniform_int_distribution<std::size_t> pick_q(0, bc.queries.size() - 1);
        std::uniform_int_distribution<std::uint32_t> pick_node(
            0, static_cast<std::uint32_t>(b.tree.node_count() - 1));
        for (int i = 0; i < 1000; ++i) {
            const std::size_t qi = pick_q(rng);
            const std::uint32_t id = pick_node(rng);
            const PointRef q = bc.queries[qi].ref();
            const CoverNode& node = b.tree.node(id);
            const double kqp = b.kernel.eval(q, b.data.point(node.point), scratch);
            const double fd = node.furthest_descendant;
            const double general = bound_general(kqp, self_q[qi], fd);
            double bound = general;
            if (b.kernel.normalized()) {
                const double half = fd * 0.5;
                bound = bound_normalized(kqp, half * half);
                if (bound > general + 1e-12) ++dominance_violations;
            }
            double best = -std::numeric_limits<double>::infinity();
            for (const std::size_t p : sub[id])
                best = std::max(best, b.kernel.eval(q, b.data.point(p), scratch));
            ++pairs;
            if (best > bound + 1e-12 * std::max(1.0, std::abs(bound))) ++violations;
        }
    }

    cr.pass = violations == 0 && dominance_violations == 0;
    cr.detail = std::to_string(pairs) + " query-node pairs across 5 kernels, " +
                std::to_string(violations) + " soundness violations, " +
                std::to_string(dominance_violations) + " dominance violations";
    return cr;
}

Criterion approximation() {
    Criterion cr{"approximation modes honor their guarantees"};
    std::ostringstream detail;
    bool ok = true;

    {  // value >= exact - epsilon
        const Built& b = find_case("clustered-r8/linear");
        const std::vector<QueryPoint> queries =
            vector_queries(generate_clusters(1000, 8, 10, 0.05, 4001));
        std::size_t failures = 0, checks = 0;
        for (const QueryPoint& q : queries) {
            EvalCounter oc;
            const double exact = linear_scan(b.data, b.kernel, q.ref(), 1, oc).hits[0].value;
            for (const double eps : {0.01, 0.1}) {
                EvalCounter c;
                const QueryResult got = fastmks_ava(b.tree, b.data, b.kernel, q.ref(), 1, eps, c);
                ++checks;
                if (got.hits[0].value < exact - eps - 1e-12) ++failures;
            }
        }
        ok = ok && failures == 0;
        detail << "additive " << (checks - failures) << "/" << checks;
    }

    {  // value >= (1 - epsilon) * exact for positive exact maxima
        const Built& b = find_case("sphere-r16/cosine");
        const std::vector<QueryPoint> queries = vector_queries(generate_sphere(1000, 16, 4002));
        std::size_t failures = 0, checks = 0, voided = 0;
        for (const QueryPoint& q : queries) {
            EvalCounter oc;
            const double exact = linear_scan(b.data, b.kernel, q.ref(), 1, oc).hits[0].value;
            for (const double eps : {0.1, 0.5}) {
                EvalCounter c;
                const QueryResult got = fastmks_rva(b.tree, b.data, b.kernel, q.ref(), 1, eps, c);
                if (exact <= 0.0) {
                    ++voided;
                    continue;
                }
                ++checks;
                if (got.guarantee_void || got.hits[0].value < (1.0 - eps) * exact - 1e-12)
                    ++failures;
            }
        }
        ok = ok && failures == 0 && checks >= 1000;
        detail << ", multiplicative " << (checks - failures) << "/" << checks << " ("
               << voided << " non-positive skipped)";
    }

    {  // returned point ranks in the top tau with probability >= 1 - delta
        const double tau = 50.0, delta = 0.1;
        Built& b = add_vectors("rank-5k", Kernel::linear(),
                               generate_clusters(5000, 8, 10, 0.05, 4003));
        const std::vector<QueryPoint> queries =
            vector_queries(generate_clusters(1000, 8, 10, 0.05, 4004));
        std::size_t failures = 0;
        for (const QueryPoint& q : queries) {
            EvalCounter c;
            const QueryResult got =
                fastmks_ra(b.tree, b.data, b.kernel, q.ref(), 1, tau, delta, c);
            EvalCounter oc;
            std::size_t better = 0;
            for (std::size_t i = 0; i < b.data.size(); ++i)
                if (b.kernel.eval(q.ref(), b.data.point(i), oc) > got.hits[0].value) ++better;
            if (1 + better > static_cast<std::size_t>(tau)) ++failures;
        }
        const double rate = static_cast<double>(failures) / static_cast<double>(queries.size());
        // delta plus slack for sampling noise over 1000 queries
        ok = ok && rate <= delta + 0.03;
        detail << ", rank failure rate " << rate << " (allowed 0.13)";
    }

    ok = ok && rank_sample_count(10000, 100.0, 0.05) == 299;
    detail << ", sample count 299 ok";

    cr.pass = ok;
    cr.detail = detail.str();
    return cr;
}

Criterion scaling() {
    Criterion cr{"evaluation cost scales gently with n"};
    const Rows all = generate_clusters(8000, 8, 10, 0.05, 5001);
    const std::vector<QueryPoint> queries =
        vector_queries(generate_clusters(100, 8, 10, 0.05, 5002));
    const std::vector<std::size_t> sizes{1000, 2000, 4000, 8000};

    std::vector<double> mean_evals, construction_c;
    for (const std::size_t n : sizes) {
        Built& b = add_vectors("scaling-" + std::to_string(n), Kernel::linear(),
                               Rows(all.begin(), all.begin() + static_cast<std::ptrdiff_t>(n)));
        std::uint64_t total = 0;
        for (const QueryPoint& q : queries) {
            EvalCounter c;
            total += fastmks_exact(b.tree, b.data, b.kernel, q.ref(), 5, c).kernel_evals;
        }
        mean_evals.push_back(static_cast<double>(total) / static_cast<double>(queries.size()));
        construction_c.push_back(static_cast<double>(b.tree.construction_evals()) /
                                 (static_cast<double>(n) * std::log2(static_cast<double>(n))));
    }

    bool ok = true;
    std::ostringstream detail;
    detail << "mean evals";
    for (const double m : mean_evals) detail << " " << m;
    for (std::size_t i = 1; i < mean_evals.size(); ++i)
        if (!(mean_evals[i] / mean_evals[i - 1] < 2.0)) ok = false;
    const double speedup_8k = 8000.0 / mean_evals.back();
    if (!(speedup_8k > 1.0)) ok = false;
    detail << ", speedup at 8k " << speedup_8k;
    // Construction trend: the n log n model fitted on the smaller sizes must
    // predict the 8k cost. Quadratic growth would put the 8k coefficient at
    // ~1.85x the 4k one and ~6x the 1k one; the margins below reject that
    // while tolerating the drift of the expansion constant itself, which at
    // these sizes in R^8 is still rising with n.
    const double c_fit =
        *std::max_element(construction_c.begin(), construction_c.end() - 1);
    const double c_8k = construction_c.back();
    const auto [lo, hi] = std::minmax_element(construction_c.begin(), construction_c.end());
    if (!(c_8k <= 1.5 * c_fit)) ok = false;
    if (!(*hi / *lo <= 3.0)) ok = false;
    detail << ", construction evals / (n log2 n) in [" << *lo << ", " << *hi
           << "], 8k vs fit " << c_8k / c_fit;

    cr.pass = ok;
    cr.detail = detail.str();
    return cr;
}

Criterion sharding() {
    Criterion cr{"sharded search reproduces the single tree"};
    const Built& b = find_case("scaling-8000");
    const std::vector<QueryPoint> queries =
        vector_queries(generate_clusters(50, 8, 10, 0.05, 6001));
    std::size_t checks = 0, failures = 0;
    bool costs_ok = true;

    for (const std::size_t m : {std::size_t(1), std::size_t(2), std::size_t(4), std::size_t(8)}) {
        EvalCounter c;
        const ShardedIndex idx =
            ShardedIndex::build(b.data, b.kernel, CoverTree::kDefaultBase, m, std::nullopt, c);
        SearchConfig cfg;
        cfg.k = 5;
        for (const QueryPoint& q : queries) {
            EvalCounter sc;
            const QueryResult truth = fastmks::fastmks(b.tree, b.data, b.kernel, q.ref(), cfg, sc);
            const ShardedQueryResult got = sharded_search(idx, b.kernel, q.ref(), cfg);
            ++checks;
            if (!hits_equal(got.hits, truth.hits, cfg.k)) ++failures;
            std::uint64_t sum = 0, mx = 0;
            for (const std::uint64_t e : got.per_shard_evals) {
                sum += e;
                mx = std::max(mx, e);
            }
            if (got.total_evals != sum || got.max_shard_evals != mx ||
                got.max_shard_evals > got.total_evals ||
                got.parallel_cost != got.max_shard_evals + got.merge_items)
                costs_ok = false;
        }
    }

    cr.pass = failures == 0 && costs_ok;
    cr.detail = std::to_string(checks) + " queries across shard counts 1,2,4,8, " +
                std::to_string(failures) + " hit mismatches, costs " +
                (costs_ok ? "reconcile" : "inconsistent");
    return cr;
}

Criterion invariants() {
    Criterion cr{"every tree in the suite validates within the node budget"};
    std::size_t trees = 0, bad = 0;
    std::ostringstream names;
    for (const Built& b : suite) {
        EvalCounter c;
        const InvariantReport rep = b.tree.validate(b.data, b.kernel, c);
        ++trees;
        if (!rep.ok() || b.tree.node_count() > 2 * b.data.size()) {
            ++bad;
            names << " " << b.name;
        }
    }
    cr.pass = bad == 0;
    cr.detail = std::to_string(trees) + " trees validated, " + std::to_string(bad) +
                " failures" + names.str();
    return cr;
}

Criterion cli_end_to_end(const std::string& cli) {
    Criterion cr{"command line is deterministic and indexes persist"};
    if (cli.empty()) {
        cr.detail = "no binary path supplied";
        return cr;
    }
    const fs::path dir =
        fs::temp_directory_path() / ("fastmks_acceptance_" + std::to_string(::getpid()));
    fs::create_directories(dir);
    const auto at = [&](const char* name) { return (dir / name).string(); };
    const std::string quiet = " > /dev/null 2>&1";

    bool ok = true;
    std::ostringstream detail;
    try {
        ok = ok && run_command(cli + " generate --kind clusters -n 600 --dim 4 --clusters 6" +
                               " --sigma 0.08 --seed 91 -o " + at("ref.csv") + quiet) == 0;
        ok = ok && run_command(cli + " generate --kind clusters -n 40 --dim 4 --clusters 6" +
                               " --sigma 0.08 --seed 92 -o " + at("q.csv") + quiet) == 0;

        const std::string bench_cmd = cli + " bench -r " + at("ref.csv") + " -q " + at("q.csv") +
                                      " --kernel linear --k-list 1,5 --verify";
        ok = ok && run_command(bench_cmd + " -o " + at("b1.json") + quiet) == 0;
        ok = ok && run_command(bench_cmd + " -o " + at("b2.json") + quiet) == 0;
        const bool identical = read_file(at("b1.json")) == read_file(at("b2.json")) &&
                               !read_file(at("b1.json")).empty();
        ok = ok && identical;
        detail << "repeat runs " << (identical ? "byte-identical" : "differ");

        ok = ok && run_command(cli + " build -r " + at("ref.csv") +
                               " --kernel gaussian:sigma=1 -o " + at("idx.bin") + " --report " +
                               at("build.json") + quiet) == 0;
        const std::string query_cmd = cli + " query -r " + at("ref.csv") + " -q " + at("q.csv") +
                                      " --kernel gaussian:sigma=1 -k 3 --verify";
        ok = ok && run_command(query_cmd + " -o " + at("direct.json") + quiet) == 0;
        ok = ok && run_command(query_cmd + " --index " + at("idx.bin") + " -o " +
                               at("loaded.json") + quiet) == 0;

        const json direct = json::parse(read_file(at("direct.json")));
        const json loaded = json::parse(read_file(at("loaded.json")));
        const bool same_results = direct.at("results") == loaded.at("results");
        const bool same_speedup =
            direct.at("aggregate").at("speedup") == loaded.at("aggregate").at("speedup");
        ok = ok && same_results && same_speedup;
        detail << ", loaded index results "
               << (same_results && same_speedup ? "identical to direct build"
                                                : "diverge from direct build");
    } catch (const std::exception& e) {
        ok = false;
        detail << ", exception: " << e.what();
    }
    fs::remove_all(dir);

    cr.pass = ok;
    cr.detail = detail.str();
    return cr;
}

}  // namespace

int main(int argc, char** argv) {
    const std::string cli = argc > 1 ? argv[1] : "";

    // Criteria that grow the tree suite run first; the invariant sweep then
    // covers every tree any of them built.
    const Criterion c_exact = exactness();
    const Criterion c_bounds = bound_soundness();
    const Criterion c_approx = approximation();
    const Criterion c_scaling = scaling();
    const Criterion c_shards = sharding();
    const Criterion c_invariants = invariants();
    const Criterion c_cli = cli_end_to_end(cli);

    const std::vector<Criterion> results = {c_exact,   c_bounds, c_invariants, c_approx,
                                            c_scaling, c_shards, c_cli};

    bool all = true;
    for (const Criterion& cr : results) {
        all = all && cr.pass;
        std::cout << (cr.pass ? "PASS" : "FAIL") << "  " << cr.name << ": " << cr.detail << "\n";
    }
    return all ? 0 : 1;
}
