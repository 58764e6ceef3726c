#include "mpgk/graph_kernel.hpp"

#include <cmath>
#include <numeric>
#include <optional>
#include <random>
#include <string>

#include "mpgk/error.hpp"
#include "mpgk/linalg.hpp"
#include "mpgk/log.hpp"
#include "mpgk/random.hpp"
#include "mpgk/vertex_kernel.hpp"

namespace mpgk {

namespace {

void check_state(const VertexKernelState& state, const GraphDataset& ds) {
    if (state.n_vertices() != ds.total_vertices()) {
        throw ContractError("vertex state covers " + std::to_string(state.n_vertices()) + " vertices, dataset has " +
                            std::to_string(ds.total_vertices()));
    }
}

// Row sums of the feature matrix per graph (Nyström R-convolution).
Eigen::MatrixXd graph_feature_sums(const VertexKernelState& state, const GraphDataset& ds) {
    Eigen::MatrixXd S = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(ds.n_graphs()), state.features.cols());
    for (std::size_t g = 0; g < ds.n_graphs(); ++g) {
        const std::size_t base = ds.offset(g);
        for (std::size_t v = 0; v < ds.graph(g).n_vertices(); ++v) {
            S.row(static_cast<Eigen::Index>(g)) += state.features.row(static_cast<Eigen::Index>(base + v));
        }
    }
    return S;
}

// M(v, j) = Σ_{u∈V_j} K(v, u) for the exact state, restricted to `graphs` columns.
Eigen::MatrixXd vertex_graph_sums(const Eigen::MatrixXd& K, const GraphDataset& ds,
                                  const std::vector<std::size_t>& graphs) {
    Eigen::MatrixXd M = Eigen::MatrixXd::Zero(K.rows(), static_cast<Eigen::Index>(graphs.size()));
#pragma omp parallel for schedule(dynamic, 4)
    for (std::ptrdiff_t c = 0; c < static_cast<std::ptrdiff_t>(graphs.size()); ++c) {
        const std::size_t g = graphs[c];
        const auto base = static_cast<Eigen::Index>(ds.offset(g));
        for (Eigen::Index u = 0; u < static_cast<Eigen::Index>(ds.graph(g).n_vertices()); ++u) {
            M.col(c) += K.col(base + u);
        }
    }
    return M;
}

double graph_row_sum(const Eigen::MatrixXd& M, const GraphDataset& ds, std::size_t g, Eigen::Index col) {
    double acc = 0.0;
    const auto base = static_cast<Eigen::Index>(ds.offset(g));
    for (Eigen::Index v = 0; v < static_cast<Eigen::Index>(ds.graph(g).n_vertices()); ++v) acc += M(base + v, col);
    return acc;
}

std::vector<Histogram> graph_histograms(const GraphDataset& ds, const ClusterTree& tree) {
    std::vector<Histogram> out(ds.n_graphs());
#pragma omp parallel for schedule(dynamic, 8)
    for (std::ptrdiff_t g = 0; g < static_cast<std::ptrdiff_t>(ds.n_graphs()); ++g) {
        std::vector<std::size_t> members(ds.graph(g).n_vertices());
        std::iota(members.begin(), members.end(), ds.offset(g));
        out[g] = histogram(members, tree);
    }
    return out;
}

std::vector<std::size_t> all_graphs(std::size_t n) {
    std::vector<std::size_t> ids(n);
    std::iota(ids.begin(), ids.end(), std::size_t{0});
    return ids;
}

}  // namespace

GramMatrix gram_rconv(const VertexKernelState& state, const GraphDataset& ds) {
    check_state(state, ds);
    const auto N = static_cast<Eigen::Index>(ds.n_graphs());
    GramMatrix out;
    out.iteration = state.iteration;
    out.values.resize(N, N);

    if (state.mode == StateMode::nystrom) {
        const Eigen::MatrixXd S = graph_feature_sums(state, ds);
        out.values = S * S.transpose();
    } else {
        const Eigen::MatrixXd M = vertex_graph_sums(state.exact, ds, all_graphs(ds.n_graphs()));
#pragma omp parallel for schedule(dynamic, 4)
        for (Eigen::Index j = 0; j < N; ++j) {
            for (Eigen::Index i = 0; i <= j; ++i) out.values(i, j) = graph_row_sum(M, ds, static_cast<std::size_t>(i), j);
        }
    }
    out.values.triangularView<Eigen::StrictlyLower>() = out.values.transpose();
    return out;
}

GramMatrix gram_assign(const VertexKernelState& state, const GraphDataset& ds, const ClusterTree& tree) {
    check_state(state, ds);
    if (tree.n_vertices() != ds.total_vertices()) throw ContractError("hierarchy does not cover the dataset");
    const auto N = static_cast<Eigen::Index>(ds.n_graphs());
    const std::vector<Histogram> hist = graph_histograms(ds, tree);
    GramMatrix out;
    out.iteration = state.iteration;
    out.values.resize(N, N);
#pragma omp parallel for schedule(dynamic, 4)
    for (Eigen::Index j = 0; j < N; ++j) {
        for (Eigen::Index i = 0; i <= j; ++i) out.values(i, j) = assignment_value(hist[i], hist[j], tree);
    }
    out.values.triangularView<Eigen::StrictlyLower>() = out.values.transpose();
    return out;
}

GramMatrix normalize(const GramMatrix& K) {
    const Eigen::Index n = K.values.rows();
    Eigen::VectorXd inv(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        const double d = K.values(i, i);
        if (!(d > 0.0)) {
            throw DegenerateError("cannot normalize: graph g" + std::to_string(i) + " has kernel diagonal " +
                                  std::to_string(d));
        }
        inv(i) = 1.0 / std::sqrt(d);
    }
    GramMatrix out = K;
    out.values = inv.asDiagonal() * K.values * inv.asDiagonal();
    for (Eigen::Index i = 0; i < n; ++i) out.values(i, i) = 1.0;
    out.normalized = true;
    return out;
}

GramMatrix graph_gram(const VertexKernelState& state, const GraphDataset& ds, const KernelParams& params) {
    GramMatrix K;
    if (graph_is_assignment(params.variant)) {
        std::optional<ClusterTree> tree;
        {
            PhaseTimer timer("graph hierarchy build t=" + std::to_string(state.iteration));
            tree.emplace(build_hierarchy(state, hierarchy_options(params),
                                         hierarchy_seed(params.seed, state.iteration, 1)));
        }
        PhaseTimer timer("assignment Gram t=" + std::to_string(state.iteration));
        K = gram_assign(state, ds, *tree);
    } else {
        PhaseTimer timer("R-convolution Gram t=" + std::to_string(state.iteration));
        K = gram_rconv(state, ds);
    }
    K.variant = params.variant;
    return params.normalize ? normalize(K) : K;
}

void compute_grams(const GraphDataset& ds, const KernelParams& params,
                   const std::function<void(const GramMatrix&)>& visit) {
    run_message_passing(ds, params, [&](const VertexKernelState& state) { visit(graph_gram(state, ds, params)); });
}

std::vector<GramMatrix> compute_grams(const GraphDataset& ds, const KernelParams& params) {
    std::vector<GramMatrix> grams;
    compute_grams(ds, params, [&](const GramMatrix& K) { grams.push_back(K); });
    return grams;
}

std::vector<std::size_t> graph_landmark_ids(std::size_t n_graphs, std::size_t graph_landmarks, std::uint64_t seed,
                                            int iteration) {
    if (graph_landmarks < 1 || graph_landmarks > n_graphs) {
        throw ParameterError("graph landmark count " + std::to_string(graph_landmarks) + " outside [1, " +
                             std::to_string(n_graphs) + "]");
    }
    std::vector<std::size_t> ids = all_graphs(n_graphs);
    std::mt19937_64 rng(derive_seed(seed, {0x47524150ULL, static_cast<std::uint64_t>(iteration)}));
    for (std::size_t i = 0; i < graph_landmarks; ++i) {
        std::uniform_int_distribution<std::size_t> pick(i, n_graphs - 1);
        std::swap(ids[i], ids[pick(rng)]);
    }
    ids.resize(graph_landmarks);
    std::sort(ids.begin(), ids.end());
    return ids;
}

Eigen::MatrixXd graph_nystrom_features(const VertexKernelState& state, const GraphDataset& ds,
                                       const KernelParams& params, std::size_t graph_landmarks) {
    check_state(state, ds);
    const std::vector<std::size_t> landmarks =
        graph_landmark_ids(ds.n_graphs(), graph_landmarks, params.seed, state.iteration);
    const auto N = static_cast<Eigen::Index>(ds.n_graphs());
    const auto m = static_cast<Eigen::Index>(graph_landmarks);
    Eigen::MatrixXd C(N, m);
    Eigen::VectorXd diag(N);

    if (graph_is_assignment(params.variant)) {
        const ClusterTree tree =
            build_hierarchy(state, hierarchy_options(params), hierarchy_seed(params.seed, state.iteration, 1));
        const std::vector<Histogram> hist = graph_histograms(ds, tree);
        for (Eigen::Index i = 0; i < N; ++i) {
            for (Eigen::Index l = 0; l < m; ++l) C(i, l) = assignment_value(hist[i], hist[landmarks[l]], tree);
            diag(i) = assignment_value(hist[i], hist[i], tree);
        }
    } else if (state.mode == StateMode::nystrom) {
        const Eigen::MatrixXd S = graph_feature_sums(state, ds);
        for (Eigen::Index l = 0; l < m; ++l) C.col(l) = S * S.row(static_cast<Eigen::Index>(landmarks[l])).transpose();
        diag = S.rowwise().squaredNorm();
    } else {
        const Eigen::MatrixXd M = vertex_graph_sums(state.exact, ds, landmarks);
        for (Eigen::Index i = 0; i < N; ++i) {
            for (Eigen::Index l = 0; l < m; ++l) C(i, l) = graph_row_sum(M, ds, static_cast<std::size_t>(i), l);
        }
        if (params.normalize) diag = gram_rconv(state, ds).values.diagonal();
    }

    if (params.normalize) {
        for (Eigen::Index i = 0; i < N; ++i) {
            if (!(diag(i) > 0.0)) {
                throw DegenerateError("cannot normalize: graph g" + std::to_string(i) + " has kernel diagonal " +
                                      std::to_string(diag(i)));
            }
        }
        for (Eigen::Index i = 0; i < N; ++i) {
            for (Eigen::Index l = 0; l < m; ++l) C(i, l) /= std::sqrt(diag(i) * diag(landmarks[l]));
        }
    }

    const Eigen::MatrixXd phi = nystrom_fit(C, landmarks);
    Eigen::MatrixXd out = Eigen::MatrixXd::Zero(N, m);
    out.leftCols(phi.cols()) = phi;
    return out;
}

Eigen::MatrixXd graph_features(const GraphDataset& ds, const KernelParams& params, std::size_t graph_landmarks) {
    if (graph_landmarks < 1 || graph_landmarks > ds.n_graphs()) {
        throw ParameterError("graph landmark count " + std::to_string(graph_landmarks) + " outside [1, " +
                             std::to_string(ds.n_graphs()) + "]");
    }
    const auto m = static_cast<Eigen::Index>(graph_landmarks);
    Eigen::MatrixXd out(static_cast<Eigen::Index>(ds.n_graphs()), m * params.iterations);
    run_message_passing(ds, params, [&](const VertexKernelState& state) {
        PhaseTimer timer("graph Nystrom features t=" + std::to_string(state.iteration));
        out.middleCols(m * (state.iteration - 1), m) = graph_nystrom_features(state, ds, params, graph_landmarks);
    });
    return out;
}

}  // namespace mpgk
