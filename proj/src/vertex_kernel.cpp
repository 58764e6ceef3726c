#include "mpgk/vertex_kernel.hpp"

#include <algorithm>
#include <numeric>
#include <random>
#include <string>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "mpgk/error.hpp"
#include "mpgk/linalg.hpp"
#include "mpgk/log.hpp"
#include "mpgk/random.hpp"

namespace mpgk {

VertexData vertex_data(const GraphDataset& ds, std::size_t global) {
    const auto [g, v] = ds.locate(global);
    const Graph& graph = ds.graph(g);
    VertexData d;
    if (graph.has_labels()) d.label = graph.labels()[v];
    if (graph.has_attributes()) d.attributes = graph.attributes().row(static_cast<Eigen::Index>(v)).transpose();
    d.degree = graph.degree(v);
    return d;
}

double base_kernel(const VertexData& u, const VertexData& v, BaseKernel choice) {
    auto delta = [&] {
        if (!u.label || !v.label) throw ConfigError("delta base kernel needs vertex labels");
        return *u.label == *v.label ? 1.0 : 0.0;
    };
    auto linear = [&] {
        if (!u.attributes || !v.attributes) throw ConfigError("linear base kernel needs vertex attributes");
        if (u.attributes->size() != v.attributes->size()) throw ContractError("attribute dimensions differ");
        return u.attributes->dot(*v.attributes);
    };
    switch (choice) {
        case BaseKernel::delta: return delta();
        case BaseKernel::linear: return linear();
        case BaseKernel::delta_plus_linear: return delta() + linear();
        case BaseKernel::degree: return static_cast<double>(u.degree) * static_cast<double>(v.degree);
    }
    return 0.0;
}

void check_base_kernel(const GraphDataset& ds, BaseKernel choice) {
    const bool need_labels = choice == BaseKernel::delta || choice == BaseKernel::delta_plus_linear;
    const bool need_attrs = choice == BaseKernel::linear || choice == BaseKernel::delta_plus_linear;
    if (ds.n_graphs() == 0) return;
    if (need_labels && !ds.has_labels()) {
        throw ConfigError("base kernel '" + to_string(choice) + "' needs vertex labels, dataset has none");
    }
    if (need_attrs && !ds.has_attributes()) {
        throw ConfigError("base kernel '" + to_string(choice) + "' needs vertex attributes, dataset has none");
    }
}

NeighborIndex::NeighborIndex(const GraphDataset& ds) {
    offsets_.reserve(ds.total_vertices() + 1);
    offsets_.push_back(0);
    for (std::size_t g = 0; g < ds.n_graphs(); ++g) {
        const Graph& graph = ds.graph(g);
        const std::size_t base = ds.offset(g);
        for (VertexId v = 0; v < graph.n_vertices(); ++v) {
            for (VertexId u : graph.neighbors(v)) ids_.push_back(base + u);
            offsets_.push_back(ids_.size());
        }
    }
}

namespace {

// Per-vertex inputs of the base kernel in global order.
struct BaseInputs {
    std::vector<Label> labels;
    Eigen::MatrixXd attributes;  // nN x d
    Eigen::VectorXd degrees;
};

BaseInputs gather_inputs(const GraphDataset& ds, BaseKernel choice) {
    check_base_kernel(ds, choice);
    const auto n = static_cast<Eigen::Index>(ds.total_vertices());
    BaseInputs in;
    in.degrees.resize(n);
    const bool labels = choice == BaseKernel::delta || choice == BaseKernel::delta_plus_linear;
    const bool attrs = choice == BaseKernel::linear || choice == BaseKernel::delta_plus_linear;
    if (labels) in.labels.reserve(static_cast<std::size_t>(n));
    if (attrs) in.attributes.resize(n, static_cast<Eigen::Index>(ds.attribute_dim()));
    for (std::size_t g = 0; g < ds.n_graphs(); ++g) {
        const Graph& graph = ds.graph(g);
        const auto base = static_cast<Eigen::Index>(ds.offset(g));
        for (VertexId v = 0; v < graph.n_vertices(); ++v) {
            const auto row = base + static_cast<Eigen::Index>(v);
            in.degrees(row) = static_cast<double>(graph.degree(v));
            if (labels) in.labels.push_back(graph.labels()[v]);
            if (attrs) in.attributes.row(row) = graph.attributes().row(static_cast<Eigen::Index>(v));
        }
    }
    return in;
}

// base kernel between global vertices i and j; same arithmetic as base_kernel()
double base_entry(const BaseInputs& in, BaseKernel choice, Eigen::Index i, Eigen::Index j) {
    switch (choice) {
        case BaseKernel::delta: return in.labels[i] == in.labels[j] ? 1.0 : 0.0;
        case BaseKernel::linear: return in.attributes.row(i).dot(in.attributes.row(j));
        case BaseKernel::delta_plus_linear:
            return (in.labels[i] == in.labels[j] ? 1.0 : 0.0) + in.attributes.row(i).dot(in.attributes.row(j));
        case BaseKernel::degree: return in.degrees(i) * in.degrees(j);
    }
    return 0.0;
}

std::vector<std::size_t> sample_landmarks(std::size_t n, std::size_t m, std::uint64_t seed) {
    std::vector<std::size_t> ids(n);
    std::iota(ids.begin(), ids.end(), std::size_t{0});
    std::mt19937_64 rng(derive_seed(seed, {0x4c414e44ULL}));
    for (std::size_t i = 0; i < m; ++i) {
        std::uniform_int_distribution<std::size_t> pick(i, n - 1);
        std::swap(ids[i], ids[pick(rng)]);
    }
    ids.resize(m);
    std::sort(ids.begin(), ids.end());
    return ids;
}

void mirror_upper(Eigen::MatrixXd& K) { K.triangularView<Eigen::StrictlyLower>() = K.transpose(); }

// Neighborhood histograms of every vertex under `tree`.
std::vector<Histogram> neighborhood_histograms(const NeighborIndex& nb, const ClusterTree& tree) {
    std::vector<Histogram> out(nb.size());
#pragma omp parallel for schedule(dynamic, 64)
    for (std::ptrdiff_t v = 0; v < static_cast<std::ptrdiff_t>(nb.size()); ++v) {
        out[v] = histogram(nb[v], tree);
    }
    return out;
}

void check_tree(const ClusterTree& tree, std::size_t n) {
    if (tree.n_vertices() != n) {
        throw ContractError("hierarchy covers " + std::to_string(tree.n_vertices()) + " vertices, dataset has " +
                            std::to_string(n));
    }
}

}  // namespace

VertexKernelState init_state(const GraphDataset& ds, const KernelParams& params) {
    params.check();
    const BaseInputs in = gather_inputs(ds, params.base_kernel);
    const std::size_t n = ds.total_vertices();
    const auto N = static_cast<Eigen::Index>(n);

    if (params.exact()) {
        Eigen::MatrixXd K(N, N);
#pragma omp parallel for schedule(dynamic, 16)
        for (Eigen::Index j = 0; j < N; ++j) {
            for (Eigen::Index i = 0; i <= j; ++i) K(i, j) = base_entry(in, params.base_kernel, i, j);
        }
        mirror_upper(K);
        return VertexKernelState::make_exact(std::move(K), 0);
    }

    const std::size_t m = *params.landmarks;
    if (m > n) {
        throw ParameterError("landmark count m = " + std::to_string(m) + " exceeds the " + std::to_string(n) +
                             " dataset vertices");
    }
    std::vector<std::size_t> landmarks = sample_landmarks(n, m, params.seed);
    Eigen::MatrixXd C(N, static_cast<Eigen::Index>(m));
#pragma omp parallel for schedule(static)
    for (Eigen::Index i = 0; i < N; ++i) {
        for (std::size_t l = 0; l < m; ++l) {
            C(i, static_cast<Eigen::Index>(l)) =
                base_entry(in, params.base_kernel, i, static_cast<Eigen::Index>(landmarks[l]));
        }
    }
    Eigen::MatrixXd phi = nystrom_fit(C, landmarks);
    return VertexKernelState::make_nystrom(std::move(phi), std::move(landmarks), 0);
}

VertexKernelState rr_update(const VertexKernelState& state, const GraphDataset& ds, double alpha, double beta) {
    const NeighborIndex nb(ds);
    const auto N = static_cast<Eigen::Index>(nb.size());
    if (static_cast<std::size_t>(N) != state.n_vertices()) throw ContractError("state does not match dataset");

    if (state.mode == StateMode::exact) {
        const Eigen::MatrixXd& K = state.exact;
        // M(u, v) = Σ_{w∈N(v)} K(u, w)
        Eigen::MatrixXd M = Eigen::MatrixXd::Zero(N, N);
#pragma omp parallel for schedule(dynamic, 16)
        for (Eigen::Index v = 0; v < N; ++v) {
            for (std::size_t w : nb[v]) M.col(v) += K.col(static_cast<Eigen::Index>(w));
        }
        Eigen::MatrixXd out(N, N);
#pragma omp parallel for schedule(dynamic, 16)
        for (Eigen::Index v2 = 0; v2 < N; ++v2) {
            for (Eigen::Index v1 = 0; v1 <= v2; ++v1) {
                double acc = 0.0;
                for (std::size_t u1 : nb[v1]) acc += M(static_cast<Eigen::Index>(u1), v2);
                out(v1, v2) = alpha * K(v1, v2) + beta * acc;
            }
        }
        mirror_upper(out);
        return VertexKernelState::make_exact(std::move(out), state.iteration + 1);
    }

    const Eigen::MatrixXd& phi = state.features;
    Eigen::MatrixXd S = Eigen::MatrixXd::Zero(N, phi.cols());
    for (Eigen::Index v = 0; v < N; ++v) {
        for (std::size_t u : nb[v]) S.row(v) += phi.row(static_cast<Eigen::Index>(u));
    }
    const auto m = static_cast<Eigen::Index>(state.landmarks.size());
    Eigen::MatrixXd phi_l(m, phi.cols());
    Eigen::MatrixXd s_l(m, phi.cols());
    for (Eigen::Index l = 0; l < m; ++l) {
        phi_l.row(l) = phi.row(static_cast<Eigen::Index>(state.landmarks[l]));
        s_l.row(l) = S.row(static_cast<Eigen::Index>(state.landmarks[l]));
    }
    const Eigen::MatrixXd C = alpha * (phi * phi_l.transpose()) + beta * (S * s_l.transpose());
    return VertexKernelState::make_nystrom(nystrom_fit(C, state.landmarks), state.landmarks, state.iteration + 1);
}

VertexKernelState assign_update(const VertexKernelState& state, const GraphDataset& ds, double alpha, double beta,
                                const ClusterTree& tree) {
    const NeighborIndex nb(ds);
    const auto N = static_cast<Eigen::Index>(nb.size());
    if (static_cast<std::size_t>(N) != state.n_vertices()) throw ContractError("state does not match dataset");
    check_tree(tree, nb.size());
    const std::vector<Histogram> hist = neighborhood_histograms(nb, tree);

    if (state.mode == StateMode::exact) {
        const Eigen::MatrixXd& K = state.exact;
        Eigen::MatrixXd out(N, N);
#pragma omp parallel for schedule(dynamic, 16)
        for (Eigen::Index v2 = 0; v2 < N; ++v2) {
            for (Eigen::Index v1 = 0; v1 <= v2; ++v1) {
                out(v1, v2) = alpha * K(v1, v2) + beta * assignment_value(hist[v1], hist[v2], tree);
            }
        }
        mirror_upper(out);
        return VertexKernelState::make_exact(std::move(out), state.iteration + 1);
    }

    const Eigen::MatrixXd& phi = state.features;
    const auto m = static_cast<Eigen::Index>(state.landmarks.size());
    Eigen::MatrixXd phi_l(m, phi.cols());
    for (Eigen::Index l = 0; l < m; ++l) phi_l.row(l) = phi.row(static_cast<Eigen::Index>(state.landmarks[l]));
    Eigen::MatrixXd C = alpha * (phi * phi_l.transpose());
#pragma omp parallel for schedule(static)
    for (Eigen::Index v = 0; v < N; ++v) {
        for (Eigen::Index l = 0; l < m; ++l) {
            C(v, l) += beta * assignment_value(hist[v], hist[state.landmarks[l]], tree);
        }
    }
    return VertexKernelState::make_nystrom(nystrom_fit(C, state.landmarks), state.landmarks, state.iteration + 1);
}

std::uint64_t hierarchy_seed(std::uint64_t seed, int iteration, int purpose) {
    return derive_seed(seed, {0x48494552ULL, static_cast<std::uint64_t>(purpose), static_cast<std::uint64_t>(iteration)});
}

HierarchyOptions hierarchy_options(const KernelParams& params) {
    return {params.hierarchy_depth, params.hierarchy_branching, params.kmeans_max_iter};
}

void run_message_passing(const GraphDataset& ds, const KernelParams& params,
                         const std::function<void(const VertexKernelState&)>& visit) {
    params.check();
    VertexKernelState state = [&] {
        PhaseTimer timer("init k_v^0");
        return init_state(ds, params);
    }();
    for (int t = 0; t < params.iterations; ++t) {
        if (neighborhood_is_assignment(params.variant)) {
            std::optional<ClusterTree> tree;
            {
                PhaseTimer timer("hierarchy build t=" + std::to_string(t));
                tree.emplace(build_hierarchy(state, hierarchy_options(params), hierarchy_seed(params.seed, t, 0)));
            }
            PhaseTimer timer("assignment update t=" + std::to_string(t + 1));
            state = assign_update(state, ds, params.alpha, params.beta, *tree);
        } else {
            PhaseTimer timer("R-convolution update t=" + std::to_string(t + 1));
            state = rr_update(state, ds, params.alpha, params.beta);
        }
        visit(state);
    }
}

std::vector<VertexKernelState> run_message_passing(const GraphDataset& ds, const KernelParams& params) {
    std::vector<VertexKernelState> states;
    run_message_passing(ds, params, [&](const VertexKernelState& s) { states.push_back(s); });
    return states;
}

void set_num_threads(int threads) {
#ifdef _OPENMP
    if (threads > 0) omp_set_num_threads(threads);
#else
    (void)threads;
#endif
}

}  // namespace mpgk
