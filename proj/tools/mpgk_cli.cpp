#include <algorithm>
#include <cctype>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "mpgk/cross_validation.hpp"
#include "mpgk/dataset_io.hpp"
#include "mpgk/error.hpp"
#include "mpgk/graph_kernel.hpp"
#include "mpgk/linalg.hpp"
#include "mpgk/log.hpp"
#include "mpgk/vertex_kernel.hpp"

namespace fs = std::filesystem;
using namespace mpgk;

namespace {

constexpr std::size_t kDefaultLandmarks = 200;

struct Options {
    // dataset
    std::string dataset;
    std::string name;
    std::string data_root = "data";
    bool standardize = false;

    // kernel
    std::string variant = "RR";
    std::string base = "auto";
    int iterations = 4;
    double alpha = 0.8;
    double beta = 0.2;
    bool exact = false;
    std::size_t landmarks = 0;
    std::size_t exact_threshold = 4000;
    int depth = 4;
    int branching = 4;
    int kmeans_iter = 50;
    std::uint64_t seed = 0;
    bool normalize = false;
    int only_t = 0;

    // output and runtime
    std::string out = ".";
    int threads = 0;
    bool verbose = false;
    bool quiet = false;

    // subcommand specific
    std::vector<std::size_t> barbell;
    std::size_t dims = 2;
    int embed_iterations = 5;
    bool uncentered = false;
    int folds = 10;
    int repeats = 10;
    std::vector<double> c_grid{1e-3, 1e-2, 1e-1, 1.0, 1e1, 1e2, 1e3};
    std::size_t graph_landmarks = 200;
    bool libsvm = false;
};

std::string lower(std::string s) {
    std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return s;
}

GraphDataset load(const Options& o, std::string& name) {
    if (o.dataset.empty()) throw ConfigError("--dataset is required");
    fs::path dir = o.dataset;
    if (!fs::is_directory(dir) && !dir.has_parent_path() && fs::is_directory(fs::path(o.data_root) / dir)) {
        dir = fs::path(o.data_root) / dir;
    }
    name = o.name.empty() ? fs::path(o.dataset).lexically_normal().filename().string() : o.name;
    if (name.empty()) name = dir.parent_path().filename().string();
    GraphDataset ds;
    try {
        PhaseTimer timer("load");
        ds = load_tu_dataset(dir, name);
    } catch (const IoError& e) {
        throw ConfigError(e.what());
    } catch (const FormatError& e) {
        throw ConfigError(e.what());
    }
    if (o.standardize) ds = standardize_attributes(ds);
    log_info(name + ": " + std::to_string(ds.n_graphs()) + " graphs, " + std::to_string(ds.total_vertices()) +
             " vertices");
    return ds;
}

BaseKernel pick_base(const Options& o, const GraphDataset& ds) {
    if (o.base != "auto") return parse_base_kernel(o.base);
    if (ds.has_labels() && ds.has_attributes()) return BaseKernel::delta_plus_linear;
    if (ds.has_labels()) return BaseKernel::delta;
    if (ds.has_attributes()) return BaseKernel::linear;
    return BaseKernel::degree;
}

KernelParams make_params(const Options& o, const GraphDataset& ds, int iterations) {
    KernelParams p;
    p.alpha = o.alpha;
    p.beta = o.beta;
    p.iterations = iterations;
    p.variant = parse_variant(o.variant);
    p.base_kernel = pick_base(o, ds);
    p.hierarchy_depth = o.depth;
    p.hierarchy_branching = o.branching;
    p.kmeans_max_iter = o.kmeans_iter;
    p.seed = o.seed;
    p.normalize = o.normalize;
    if (o.exact && o.landmarks > 0) throw ConfigError("--exact and --landmarks are mutually exclusive");
    if (o.landmarks > 0) {
        p.landmarks = o.landmarks;
    } else if (!o.exact && ds.total_vertices() > o.exact_threshold) {
        p.landmarks = std::min(kDefaultLandmarks, ds.total_vertices());
    }
    if (o.only_t < 0 || o.only_t > iterations) {
        throw ParameterError("--t must lie in [1, " + std::to_string(iterations) + "]");
    }
    p.check();
    check_base_kernel(ds, p.base_kernel);
    log_info("variant " + to_string(p.variant) + ", base " + to_string(p.base_kernel) + ", " +
             (p.exact() ? std::string("exact") : "nystrom m=" + std::to_string(*p.landmarks)));
    return p;
}

std::string stem(const KernelParams& p) {
    std::string s = "mpgk_" + lower(to_string(p.variant));
    if (!p.exact()) s += "_m" + std::to_string(*p.landmarks);
    return s;
}

fs::path out_dir(const Options& o) {
    const fs::path dir = o.out;
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (!fs::is_directory(dir)) throw ConfigError("cannot create output directory " + dir.string());
    return dir;
}

int cmd_gram(const Options& o) {
    std::string name;
    const GraphDataset ds = load(o, name);
    const KernelParams p = make_params(o, ds, o.iterations);
    const fs::path dir = out_dir(o);
    const auto ids = graph_ids(ds.n_graphs());
    std::vector<int> labels(ds.n_graphs(), 0);
    if (ds.targets().kind == TargetKind::classes) {
        for (std::size_t i = 0; i < labels.size(); ++i) {
            labels[i] = static_cast<int>(ds.targets().class_values[ds.targets().classes[i]]);
        }
    }
    compute_grams(ds, p, [&](const GramMatrix& K) {
        if (o.only_t != 0 && K.iteration != o.only_t) return;
        const std::string base = stem(p) + "_t" + std::to_string(K.iteration);
        write_gram(K.values, ids, dir / (base + ".csv"));
        if (o.libsvm) write_precomputed_kernel(K.values, labels, dir / (base + ".libsvm"));
        std::cout << (dir / (base + ".csv")).string() << "\n";
    });
    return 0;
}

int cmd_embed(const Options& o) {
    if (o.dims == 0) throw ParameterError("--dims must be >= 1");
    GraphDataset ds;
    std::string name;
    if (!o.barbell.empty()) {
        if (!o.dataset.empty()) throw ConfigError("--barbell and --dataset are mutually exclusive");
        ds = GraphDataset({make_barbell(o.barbell[0], o.barbell[1])});
        name = "barbell_" + std::to_string(o.barbell[0]) + "_" + std::to_string(o.barbell[1]);
    } else {
        ds = load(o, name);
    }
    Options eo = o;
    eo.variant = "RR";
    if (eo.base == "auto") eo.base = "degree";
    KernelParams p = make_params(eo, ds, o.embed_iterations);
    if (!p.exact() && o.dims > *p.landmarks) throw ParameterError("--dims exceeds the landmark count");
    if (o.dims > ds.total_vertices()) throw ParameterError("--dims exceeds the vertex count");

    std::optional<VertexKernelState> last;
    run_message_passing(ds, p, [&](const VertexKernelState& s) {
        if (o.only_t == 0 || s.iteration == o.only_t) last = s;
    });
    if (!last) last = init_state(ds, p);
    Eigen::MatrixXd Y;
    {
        PhaseTimer timer("kernel pca");
        Y = kernel_pca(last->mode == StateMode::exact ? last->exact : last->dense(), o.dims, !o.uncentered);
    }

    const fs::path path = out_dir(o) / ("mpgk_embed_" + name + ".csv");
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write " + path.string());
    out << "graph_id,vertex_id";
    for (std::size_t d = 0; d < o.dims; ++d) out << ",x" << d;
    out << "\n";
    for (std::size_t v = 0; v < ds.total_vertices(); ++v) {
        const auto [g, local] = ds.locate(v);
        out << "g" << g << "," << local;
        for (std::size_t d = 0; d < o.dims; ++d) out << "," << format_double(Y(v, d));
        out << "\n";
    }
    out.flush();
    if (!out) throw IoError("write failed for " + path.string());
    std::cout << path.string() << "\n";
    return 0;
}

int cmd_classify(const Options& o) {
    std::string name;
    const GraphDataset ds = load(o, name);
    const Targets& tg = ds.targets();
    if (tg.kind == TargetKind::regression) throw ConfigError("classify needs class labels, found regression targets");
    if (tg.kind == TargetKind::none) throw ConfigError("classify needs graph labels");
    if (tg.n_classes() < 2) throw ConfigError("need >= 2 classes");
    const KernelParams p = make_params(o, ds, o.iterations);

    CvOptions cv;
    cv.folds = o.folds;
    cv.repeats = o.repeats;
    cv.C_grid = o.c_grid;
    cv.seed = o.seed;
    std::vector<int> class_count(tg.n_classes(), 0);
    for (int c : tg.classes) ++class_count[c];
    if (*std::min_element(class_count.begin(), class_count.end()) < cv.folds) {
        throw ParameterError("--folds exceeds the size of the smallest class");
    }
    if (cv.repeats < 1) throw ParameterError("--repeats must be >= 1");
    if (cv.C_grid.empty()) throw ParameterError("--C-grid must not be empty");

    std::vector<Eigen::MatrixXd> grams;
    compute_grams(ds, p, [&](const GramMatrix& K) {
        if (o.only_t == 0 || K.iteration == o.only_t) grams.push_back(K.values);
    });
    CvReport report;
    {
        PhaseTimer timer("cross validation");
        report = cross_validate(grams, tg.classes, cv);
    }
    const fs::path path = out_dir(o) / (stem(p) + "_cv.csv");
    write_cv_report(report, path);
    std::cout << name << " " << to_string(p.variant) << ": accuracy " << format_double(report.mean_accuracy)
              << " +- " << format_double(report.std_accuracy) << "\n"
              << path.string() << "\n";
    return 0;
}

int cmd_features(const Options& o) {
    std::string name;
    const GraphDataset ds = load(o, name);
    const KernelParams p = make_params(o, ds, o.iterations);
    if (o.graph_landmarks == 0 || o.graph_landmarks > ds.n_graphs()) {
        throw ParameterError("--graph-landmarks must lie in [1, " + std::to_string(ds.n_graphs()) + "]");
    }
    Eigen::MatrixXd F;
    {
        PhaseTimer timer("graph features");
        F = graph_features(ds, p, o.graph_landmarks);
    }
    const fs::path path = out_dir(o) / (stem(p) + "_features_g" + std::to_string(o.graph_landmarks) + ".csv");
    write_features(F, graph_ids(ds.n_graphs()), ds.targets(), path);
    std::cout << path.string() << "\n";
    return 0;
}

void add_dataset_flags(CLI::App* app, Options& o) {
    app->add_option("--dataset", o.dataset, "TU dataset directory (or a name under --data-root)");
    app->add_option("--name", o.name, "dataset file prefix; defaults to the directory name");
    app->add_option("--data-root", o.data_root, "where bare dataset names are looked up")->capture_default_str();
    app->add_flag("--standardize", o.standardize, "z-score vertex attributes");
}

void add_kernel_flags(CLI::App* app, Options& o, bool with_variant) {
    if (with_variant) {
        app->add_option("--variant", o.variant, "RR, RA, AR or AA")->capture_default_str();
        app->add_option("--T", o.iterations, "message passing iterations")->capture_default_str();
    }
    app->add_option("--base-kernel", o.base, "delta, linear, delta+linear, degree or auto")->capture_default_str();
    app->add_option("--alpha", o.alpha)->capture_default_str();
    app->add_option("--beta", o.beta)->capture_default_str();
    app->add_flag("--exact", o.exact, "dense vertex kernel regardless of size");
    app->add_option("--landmarks", o.landmarks, "Nyström landmark vertices");
    app->add_option("--exact-threshold", o.exact_threshold, "largest vertex count run exactly by default")
        ->capture_default_str();
    app->add_option("--depth", o.depth, "hierarchy depth")->capture_default_str();
    app->add_option("--branching", o.branching, "k-means clusters per hierarchy node")->capture_default_str();
    app->add_option("--kmeans-iter", o.kmeans_iter)->capture_default_str();
    app->add_option("--seed", o.seed)->capture_default_str();
    app->add_flag("--normalize", o.normalize, "cosine-normalize graph Grams");
    app->add_option("--t", o.only_t, "only use iteration t");
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Message passing graph kernels"};
    app.require_subcommand(1);
    Options o;
    if (const char* env = std::getenv("MPGK_THREADS")) o.threads = std::atoi(env);
    app.add_option("--out", o.out, "output directory")->capture_default_str();
    app.add_option("--threads", o.threads, "worker threads (0 = all)");
    app.add_flag("-v,--verbose", o.verbose, "log phase timings");
    app.add_flag("-q,--quiet", o.quiet, "suppress warnings");

    auto* gram = app.add_subcommand("gram", "write one Gram matrix per iteration");
    add_dataset_flags(gram, o);
    add_kernel_flags(gram, o, true);
    gram->add_flag("--libsvm", o.libsvm, "also write LIBSVM precomputed-kernel files");

    auto* embed = app.add_subcommand("embed", "kernel PCA coordinates of the vertices");
    add_dataset_flags(embed, o);
    add_kernel_flags(embed, o, false);
    embed->add_option("--barbell", o.barbell, "use the barbell graph B(h, k)")->expected(2);
    embed->add_option("--dims", o.dims)->capture_default_str();
    embed->add_option("--iterations", o.embed_iterations)->capture_default_str();
    embed->add_flag("--uncentered", o.uncentered, "skip double centering");

    auto* classify = app.add_subcommand("classify", "repeated cross-validated SVM accuracy");
    add_dataset_flags(classify, o);
    add_kernel_flags(classify, o, true);
    classify->add_option("--folds", o.folds)->capture_default_str();
    classify->add_option("--repeats", o.repeats)->capture_default_str();
    classify->add_option("--C-grid", o.c_grid)->delimiter(',');

    auto* features = app.add_subcommand("features", "graph-level Nyström features");
    add_dataset_flags(features, o);
    add_kernel_flags(features, o, true);
    features->add_option("--graph-landmarks", o.graph_landmarks)->capture_default_str();

    for (auto* sub : {gram, embed, classify, features}) sub->fallthrough();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    set_log_level(o.quiet ? LogLevel::quiet : o.verbose ? LogLevel::info : LogLevel::warn);
    if (o.threads < 0) {
        std::cerr << "error: --threads must be >= 0\n";
        return 2;
    }
    set_num_threads(o.threads);

    try {
        PhaseTimer timer("total");
        if (gram->parsed()) return cmd_gram(o);
        if (embed->parsed()) return cmd_embed(o);
        if (classify->parsed()) return cmd_classify(o);
        return cmd_features(o);
    } catch (const ConfigError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const ParameterError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "failed: " << e.what() << "\n";
        return 1;
    }
}
