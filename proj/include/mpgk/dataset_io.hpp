#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "mpgk/graph.hpp"

namespace mpgk {

/// Reads a dataset in TU-Dortmund layout from `dir`:
///   {name}_A.txt                 "i, j" per line, 1-based global vertex ids
///   {name}_graph_indicator.txt   graph id (1-based) of vertex i on line i
///   {name}_graph_labels.txt      optional, one integer per graph
///   {name}_graph_attributes.txt  optional regression targets (used when no labels)
///   {name}_node_labels.txt       optional, one integer per vertex
///   {name}_node_attributes.txt   optional, comma separated reals per vertex
/// Edges are symmetrized and deduplicated; class labels are remapped densely.
GraphDataset load_tu_dataset(const std::filesystem::path& dir, const std::string& name);

/// Per-dimension z-scoring of vertex attributes over the whole dataset.
/// Constant dimensions are only centered.
GraphDataset standardize_attributes(const GraphDataset& ds);

/// Shortest decimal that parses back to exactly `x`.
std::string format_double(double x);

/// CSV: a header of ids, then "id,K(i,0),...,K(i,N-1)" per row.
/// Throws ContractError if K is not symmetric within 1e-9 relative.
void write_gram(const Eigen::MatrixXd& K, const std::vector<std::string>& ids, const std::filesystem::path& path);

struct LabeledMatrix {
    std::vector<std::string> ids;
    Eigen::MatrixXd values;
};

/// Inverse of write_gram.
LabeledMatrix read_gram(const std::filesystem::path& path);

/// CSV with header "graph_id,target...,f0,f1,..."; one row per graph.
/// Target columns follow the dataset's target kind (none, one class label,
/// or the regression vector).
void write_features(const Eigen::MatrixXd& F, const std::vector<std::string>& ids, const Targets& targets,
                    const std::filesystem::path& path);

/// LIBSVM precomputed-kernel text: "label 0:i 1:K(i,1) ... N:K(i,N)", i 1-based.
void write_precomputed_kernel(const Eigen::MatrixXd& K, const std::vector<int>& labels,
                              const std::filesystem::path& path);

/// "g0", "g1", ... for n graphs.
std::vector<std::string> graph_ids(std::size_t n);

}  // namespace mpgk
