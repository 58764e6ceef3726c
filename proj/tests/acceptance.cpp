// Acceptance run: one PASS/FAIL line per criterion, nonzero exit on any failure.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <unistd.h>

#include "mpgk/cross_validation.hpp"
#include "mpgk/dataset_io.hpp"
#include "mpgk/graph_kernel.hpp"
#include "mpgk/hierarchy.hpp"
#include "mpgk/linalg.hpp"
#include "mpgk/vertex_kernel.hpp"
#include "oracles.hpp"
#include "test_support.hpp"

using namespace mpgk;
using namespace mpgk::testing;
namespace fs = std::filesystem;

namespace {

struct Outcome {
    bool pass = false;
    std::string detail;
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string fmt(const char* f, double x) {
    char buf[64];
    std::snprintf(buf, sizeof buf, f, x);
    return buf;
}

// Every graph Gram produced below, checked by criterion 5.
std::vector<std::pair<std::string, Eigen::MatrixXd>> emitted;

void emit(const std::string& tag, const Eigen::MatrixXd& K) { emitted.emplace_back(tag, K); }

Outcome mutag() {
    const auto t0 = Clock::now();
    const GraphDataset ds = load_tu_dataset(fs::path(MPGK_DATA_DIR) / "MUTAG", "MUTAG");
    KernelParams p;
    p.alpha = 0.8;
    p.beta = 0.2;
    p.iterations = 4;
    p.seed = 7;
    std::vector<Eigen::MatrixXd> grams;
    for (const auto& K : compute_grams(ds, p)) {
        emit("MUTAG RR t" + std::to_string(K.iteration), K.values);
        grams.push_back(K.values);
    }
    CvOptions cv;
    cv.seed = 7;
    const CvReport r = cross_validate(grams, ds.targets().classes, cv);
    const double secs = seconds_since(t0);
    return {r.mean_accuracy >= 0.80 && secs < 600.0, "accuracy " + fmt("%.4f", r.mean_accuracy) + " +- " +
                                                         fmt("%.4f", r.std_accuracy) + ", " + fmt("%.1f s", secs)};
}

Outcome barbell() {
    const fs::path dir = fs::temp_directory_path() / ("mpgk_accept_" + std::to_string(::getpid()));
    fs::create_directories(dir);
    const std::string cmd = std::string("\"") + MPGK_CLI_PATH + "\" embed --barbell 10 10 --iterations 5 --exact --out \"" +
                            dir.string() + "\" >/dev/null";
    const auto t0 = Clock::now();
    const int status = std::system(cmd.c_str());
    const double secs = seconds_since(t0);
    if (status != 0) {
        fs::remove_all(dir);
        return {false, "embed exited with status " + std::to_string(status)};
    }
    std::ifstream in(dir / "mpgk_embed_barbell_10_10.csv");
    std::string line;
    std::getline(in, line);
    std::vector<Eigen::Vector2d> pts;
    while (std::getline(in, line)) {
        std::stringstream ss(line);
        std::string g, v, x, y;
        std::getline(ss, g, ',');
        std::getline(ss, v, ',');
        std::getline(ss, x, ',');
        std::getline(ss, y, ',');
        pts.emplace_back(std::stod(x), std::stod(y));
    }
    fs::remove_all(dir);
    if (pts.size() != 30) return {false, std::to_string(pts.size()) + " rows"};

    // automorphism classes of B(10,10): clique interiors, the two attachments, mirrored path pairs
    std::vector<std::vector<int>> classes;
    std::vector<int> clique;
    for (int v = 1; v < 10; ++v) clique.push_back(v);
    for (int v = 20; v < 29; ++v) clique.push_back(v);
    classes.push_back(clique);
    classes.push_back({0, 29});
    for (int v = 10; v < 15; ++v) classes.push_back({v, 29 - v});

    double spread = 0.0;
    for (const auto& c : classes)
        for (int a : c)
            for (int b : c) spread = std::max(spread, (pts[a] - pts[b]).norm());
    double gap = 1e300;
    for (std::size_t i = 1; i < classes.size(); ++i) gap = std::min(gap, (pts[classes[0][0]] - pts[classes[i][0]]).norm());
    const bool ok = spread <= 1e-6 && gap > 0.0 && gap >= 10.0 * spread && secs < 5.0;
    return {ok, "spread " + fmt("%.2e", spread) + ", clique/path separation " + fmt("%.3e", gap) + ", " +
                    fmt("%.2f s", secs)};
}

Outcome oracle() {
    const auto t0 = Clock::now();
    double worst = 0.0;
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        RandomSpec spec;
        spec.n_labels = 1 + static_cast<int>(seed % 4);
        spec.attr_dim = seed % 3;
        const GraphDataset ds = random_dataset(1000 + seed, spec);
        for (Variant v : {Variant::RR, Variant::RA, Variant::AR, Variant::AA}) {
            KernelParams p;
            p.variant = v;
            p.iterations = 3;
            p.seed = seed;
            p.base_kernel = spec.attr_dim > 0 ? BaseKernel::delta_plus_linear : BaseKernel::delta;
            const OracleRun o = oracle_run(ds, p);
            const auto grams = compute_grams(ds, p);
            for (std::size_t t = 0; t < grams.size(); ++t) {
                worst = std::max(worst, (grams[t].values - o.grams[t]).cwiseAbs().maxCoeff());
                emit("random " + to_string(v), grams[t].values);
            }
        }
    }
    const double secs = seconds_since(t0);
    return {worst <= 1e-9 && secs < 60.0, "max abs deviation " + fmt("%.2e", worst) + ", " + fmt("%.1f s", secs)};
}

double median(std::vector<double> v) {
    std::sort(v.begin(), v.end());
    const std::size_t n = v.size();
    return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

Outcome nystrom() {
    RandomSpec spec;
    spec.min_graphs = spec.max_graphs = 10;
    spec.min_vertices = spec.max_vertices = 10;
    spec.n_labels = 6;
    spec.attr_dim = 4;
    const GraphDataset ds = random_dataset(77, spec);
    if (ds.total_vertices() != 100) return {false, "dataset has " + std::to_string(ds.total_vertices()) + " vertices"};

    KernelParams p;
    p.base_kernel = BaseKernel::delta_plus_linear;
    const auto exact = run_message_passing(ds, p);
    std::vector<Eigen::MatrixXd> exact_grams;
    for (const auto& s : exact) exact_grams.push_back(graph_gram(s, ds, p).values);

    double full_vertex = 0.0, full_graph = 0.0;
    p.landmarks = 100;
    for (const auto& s : run_message_passing(ds, p)) {
        const auto t = static_cast<std::size_t>(s.iteration - 1);
        full_vertex = std::max(full_vertex, frobenius_rel(s.dense(), exact[t].exact));
        const Eigen::MatrixXd G = graph_gram(s, ds, p).values;
        emit("nystrom full rank", G);
        full_graph = std::max(full_graph, frobenius_rel(G, exact_grams[t]));
    }

    std::vector<double> med_vertex, med_graph;
    for (std::size_t m : {4u, 16u, 64u}) {
        std::vector<double> ev, eg;
        for (std::uint64_t seed = 0; seed < 5; ++seed) {
            p.landmarks = m;
            p.seed = seed;
            const auto states = run_message_passing(ds, p);
            const Eigen::MatrixXd G = graph_gram(states.back(), ds, p).values;
            emit("nystrom m=" + std::to_string(m), G);
            ev.push_back(frobenius_rel(states.back().dense(), exact.back().exact));
            eg.push_back(frobenius_rel(G, exact_grams.back()));
        }
        med_vertex.push_back(median(ev));
        med_graph.push_back(median(eg));
    }
    const bool mono = med_vertex[0] >= med_vertex[1] && med_vertex[1] >= med_vertex[2] &&
                      med_graph[0] >= med_graph[1] && med_graph[1] >= med_graph[2];
    const bool ok = full_vertex <= 1e-6 && full_graph <= 1e-6 && mono;
    std::string d = "full rank vertex " + fmt("%.1e", full_vertex) + " graph " + fmt("%.1e", full_graph) +
                    "; median vertex";
    for (double x : med_vertex) d += fmt(" %.3e", x);
    d += " graph";
    for (double x : med_graph) d += fmt(" %.3e", x);
    return {ok, d};
}

Outcome psd_symmetry() {
    // a few more Grams: every variant, normalized, and Nyström assignment variants
    const GraphDataset ds = random_dataset(5150, {.min_graphs = 12, .max_graphs = 16, .max_vertices = 12});
    for (Variant v : {Variant::RR, Variant::RA, Variant::AR, Variant::AA}) {
        for (bool norm : {false, true}) {
            for (bool ny : {false, true}) {
                KernelParams p;
                p.variant = v;
                p.normalize = norm;
                p.base_kernel = BaseKernel::delta_plus_linear;
                if (ny) p.landmarks = 20;
                for (const auto& K : compute_grams(ds, p)) emit("extra " + to_string(v), K.values);
            }
        }
    }
    double worst_eig = 1e300, worst_sym = 0.0;
    std::string where;
    for (const auto& [tag, K] : emitted) {
        const double r = min_eig_ratio(K);
        if (r < worst_eig) {
            worst_eig = r;
            where = tag;
        }
        worst_sym = std::max(worst_sym, symmetry_error(K));
    }
    const bool ok = worst_eig >= -1e-8 && worst_sym <= 1e-9;
    return {ok, std::to_string(emitted.size()) + " Grams, min eigenvalue ratio " + fmt("%.2e", worst_eig) + " (" +
                    where + "), symmetry error " + fmt("%.1e", worst_sym)};
}

Outcome permutation() {
    std::mt19937_64 rng(2024);
    double worst = 0.0;
    int trials = 0;
    for (std::uint64_t d = 0; d < 3; ++d) {
        const GraphDataset ds = random_dataset(300 + d, {.min_graphs = 4, .max_graphs = 8, .max_vertices = 9});
        KernelParams p;
        p.base_kernel = BaseKernel::delta_plus_linear;
        const auto base_states = run_message_passing(ds, p);
        const auto base_grams = compute_grams(ds, p);
        for (int k = 0; k < 50; ++k, ++trials) {
            std::vector<std::vector<VertexId>> perms;
            for (const Graph& g : ds.graphs()) perms.push_back(random_permutation(g.n_vertices(), rng));
            const GraphDataset pd = permute_dataset(ds, perms);
            const auto states = run_message_passing(pd, p);
            const auto grams = compute_grams(pd, p);
            // permute_vertices sends old vertex v to perm[v]
            std::vector<std::size_t> map(ds.total_vertices());
            for (std::size_t g = 0; g < ds.n_graphs(); ++g)
                for (VertexId v = 0; v < ds.graph(g).n_vertices(); ++v) map[ds.global_id(g, v)] = pd.global_id(g, perms[g][v]);
            for (std::size_t t = 0; t < states.size(); ++t) {
                worst = std::max(worst, (grams[t].values - base_grams[t].values).cwiseAbs().maxCoeff());
                const Eigen::MatrixXd& A = base_states[t].exact;
                const Eigen::MatrixXd& B = states[t].exact;
                for (std::size_t a = 0; a < map.size(); ++a) {
                    for (std::size_t b = 0; b < map.size(); ++b) {
                        if (ds.locate(a).first == ds.locate(b).first) continue;
                        worst = std::max(worst, std::abs(A(a, b) - B(map[a], map[b])));
                    }
                }
            }
        }
    }
    return {worst <= 1e-9, std::to_string(trials) + " permutations, max deviation " + fmt("%.2e", worst)};
}

Outcome assignment_properties() {
    std::mt19937_64 rng(99);
    const GraphDataset ds = random_dataset(4242, {.min_graphs = 6, .max_graphs = 6, .min_vertices = 5, .max_vertices = 9});
    KernelParams p;
    p.base_kernel = BaseKernel::delta_plus_linear;
    const auto states = run_message_passing(ds, p);
    const std::size_t n = ds.total_vertices();
    std::uniform_int_distribution<std::size_t> vert(0, n - 1), len(0, 12);
    int bad_sym = 0, bad_bound = 0;
    for (int k = 0; k < 1000; ++k) {
        const auto& s = states[static_cast<std::size_t>(k) % states.size()];
        const ClusterTree tree = build_hierarchy(s, hierarchy_options(p), static_cast<std::uint64_t>(k));
        std::vector<std::size_t> X(len(rng)), Y(len(rng));
        for (auto& x : X) x = vert(rng);
        for (auto& y : Y) y = vert(rng);
        const Histogram hx = histogram(X, tree), hy = histogram(Y, tree);
        const double xy = assignment_value(hx, hy, tree), yx = assignment_value(hy, hx, tree);
        if (xy != yx) ++bad_sym;
        if (xy > std::min(assignment_value(hx, hx, tree), assignment_value(hy, hy, tree))) ++bad_bound;
    }
    return {bad_sym == 0 && bad_bound == 0,
            "1000 pairs, " + std::to_string(bad_sym) + " asymmetric, " + std::to_string(bad_bound) + " above the bound"};
}

Outcome feature_shape() {
    RandomSpec spec;
    spec.min_graphs = spec.max_graphs = 220;
    spec.max_vertices = 8;
    const GraphDataset ds = random_dataset(808, spec);
    KernelParams p;
    p.iterations = 4;
    p.base_kernel = BaseKernel::delta_plus_linear;
    const Eigen::MatrixXd F = graph_features(ds, p, 200);
    return {F.rows() == 220 && F.cols() == 800 && F.allFinite(),
            std::to_string(F.rows()) + " x " + std::to_string(F.cols()) + " features"};
}

}  // namespace

int main() {
    const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
        {"MUTAG RR classification", mutag},
        {"barbell structural equivalence", barbell},
        {"oracle equivalence", oracle},
        {"Nystrom fidelity", nystrom},
        {"PSD and symmetry", psd_symmetry},
        {"permutation invariance", permutation},
        {"assignment kernel properties", assignment_properties},
        {"feature export shape", feature_shape},
    };
    int failed = 0;
    for (std::size_t i = 0; i < criteria.size(); ++i) {
        Outcome o;
        try {
            o = criteria[i].second();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        if (!o.pass) ++failed;
        std::printf("criterion %zu %s: %s (%s)\n", i + 1, criteria[i].first.c_str(), o.pass ? "PASS" : "FAIL",
                    o.detail.c_str());
        std::fflush(stdout);
    }
    return failed == 0 ? 0 : 1;
}
