#include "mpgk/dataset_io.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <fstream>
#include <optional>

#include "mpgk/error.hpp"

namespace fs = std::filesystem;

namespace mpgk {

namespace {

std::string_view trim(std::string_view s) {
    const auto first = s.find_first_not_of(" \t\r\n");
    if (first == std::string_view::npos) return {};
    const auto last = s.find_last_not_of(" \t\r\n");
    return s.substr(first, last - first + 1);
}

std::vector<std::string_view> split_fields(std::string_view line) {
    std::vector<std::string_view> out;
    std::size_t start = 0;
    while (true) {
        const auto comma = line.find(',', start);
        out.push_back(trim(line.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start)));
        if (comma == std::string_view::npos) break;
        start = comma + 1;
    }
    return out;
}

struct LineFile {
    fs::path path;
    std::vector<std::string> lines;
};

// Reads non-blank lines; trailing blank lines are dropped, interior blanks are
// a format error because they shift the implicit line numbering.
LineFile read_lines(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open " + path.string());
    LineFile f{path, {}};
    std::string line;
    std::size_t pending_blank = 0;
    while (std::getline(in, line)) {
        if (trim(line).empty()) {
            ++pending_blank;
            continue;
        }
        if (pending_blank > 0) {
            throw FormatError(path.filename().string() + ": blank line before line " +
                              std::to_string(f.lines.size() + pending_blank + 1));
        }
        f.lines.push_back(std::move(line));
    }
    return f;
}

[[noreturn]] void bad_line(const LineFile& f, std::size_t i, const std::string& what) {
    throw FormatError(f.path.filename().string() + ":" + std::to_string(i + 1) + ": " + what);
}

template <typename T>
T parse_number(const LineFile& f, std::size_t i, std::string_view field) {
    T value{};
    const char* end = field.data() + field.size();
    // from_chars rejects a leading '+', which some exporters emit
    const char* begin = field.data();
    if (begin != end && *begin == '+') ++begin;
    auto [ptr, ec] = std::from_chars(begin, end, value);
    if (ec != std::errc() || ptr != end || field.empty()) {
        bad_line(f, i, "cannot parse number '" + std::string(field) + "'");
    }
    return value;
}

std::optional<LineFile> read_optional(const fs::path& dir, const std::string& name, const char* suffix) {
    const fs::path p = dir / (name + suffix);
    if (!fs::exists(p)) return std::nullopt;
    return read_lines(p);
}

void expect_rows(const LineFile& f, std::size_t expected, const char* what) {
    if (f.lines.size() != expected) {
        throw FormatError(f.path.filename().string() + ": " + std::to_string(f.lines.size()) + " rows for " +
                          std::to_string(expected) + " " + what);
    }
}

std::ofstream open_out(const fs::path& path) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write " + path.string());
    return out;
}

void finish(std::ofstream& out, const fs::path& path) {
    out.flush();
    if (!out) throw IoError("write failed for " + path.string());
}

}  // namespace

GraphDataset load_tu_dataset(const fs::path& dir, const std::string& name) {
    const fs::path a_path = dir / (name + "_A.txt");
    const fs::path gi_path = dir / (name + "_graph_indicator.txt");
    if (!fs::exists(a_path)) throw IoError("missing " + name + "_A.txt in " + dir.string());
    if (!fs::exists(gi_path)) throw IoError("missing " + name + "_graph_indicator.txt in " + dir.string());

    const LineFile indicator = read_lines(gi_path);
    const std::size_t n_total = indicator.lines.size();
    std::vector<std::size_t> graph_of(n_total);
    std::size_t max_graph = 0;
    for (std::size_t i = 0; i < n_total; ++i) {
        const auto id = parse_number<long long>(indicator, i, trim(indicator.lines[i]));
        if (id < 1) bad_line(indicator, i, "graph ids are 1-based");
        graph_of[i] = static_cast<std::size_t>(id - 1);
        max_graph = std::max(max_graph, graph_of[i] + 1);
    }

    auto graph_labels = read_optional(dir, name, "_graph_labels.txt");
    auto graph_attrs = read_optional(dir, name, "_graph_attributes.txt");
    std::size_t n_graphs = max_graph;
    if (graph_labels) {
        n_graphs = graph_labels->lines.size();
    } else if (graph_attrs) {
        n_graphs = graph_attrs->lines.size();
    }
    for (std::size_t i = 0; i < n_total; ++i) {
        if (graph_of[i] >= n_graphs) {
            bad_line(indicator, i, "vertex refers to nonexistent graph " + std::to_string(graph_of[i] + 1));
        }
    }

    // local ids follow ascending global order within each graph
    std::vector<std::size_t> local(n_total);
    std::vector<std::size_t> sizes(n_graphs, 0);
    for (std::size_t i = 0; i < n_total; ++i) local[i] = sizes[graph_of[i]]++;

    const LineFile a_file = read_lines(a_path);
    std::vector<std::vector<Edge>> edges(n_graphs);
    for (std::size_t i = 0; i < a_file.lines.size(); ++i) {
        const auto fields = split_fields(a_file.lines[i]);
        if (fields.size() != 2) bad_line(a_file, i, "expected 'i, j'");
        const auto u = parse_number<long long>(a_file, i, fields[0]);
        const auto v = parse_number<long long>(a_file, i, fields[1]);
        if (u < 1 || v < 1 || static_cast<std::size_t>(u) > n_total || static_cast<std::size_t>(v) > n_total) {
            bad_line(a_file, i, "vertex id outside [1, " + std::to_string(n_total) + "]");
        }
        const std::size_t gu = graph_of[u - 1];
        if (gu != graph_of[v - 1]) bad_line(a_file, i, "edge joins two different graphs");
        edges[gu].emplace_back(local[u - 1], local[v - 1]);
    }

    std::vector<std::vector<Label>> labels;
    if (auto f = read_optional(dir, name, "_node_labels.txt")) {
        expect_rows(*f, n_total, "vertices");
        labels.resize(n_graphs);
        for (std::size_t g = 0; g < n_graphs; ++g) labels[g].reserve(sizes[g]);
        for (std::size_t i = 0; i < n_total; ++i) {
            const auto fields = split_fields(f->lines[i]);
            labels[graph_of[i]].push_back(parse_number<long long>(*f, i, fields[0]));
        }
    }

    std::vector<Eigen::MatrixXd> attrs;
    if (auto f = read_optional(dir, name, "_node_attributes.txt")) {
        expect_rows(*f, n_total, "vertices");
        const std::size_t d = split_fields(f->lines.front()).size();
        attrs.reserve(n_graphs);
        for (std::size_t g = 0; g < n_graphs; ++g) attrs.emplace_back(sizes[g], d);
        for (std::size_t i = 0; i < n_total; ++i) {
            const auto fields = split_fields(f->lines[i]);
            if (fields.size() != d) {
                bad_line(*f, i, "ragged attribute row: " + std::to_string(fields.size()) + " values, expected " +
                                    std::to_string(d));
            }
            for (std::size_t k = 0; k < d; ++k) {
                attrs[graph_of[i]](local[i], k) = parse_number<double>(*f, i, fields[k]);
            }
        }
    }

    Targets targets;
    if (graph_labels) {
        std::vector<Label> raw;
        raw.reserve(n_graphs);
        for (std::size_t i = 0; i < n_graphs; ++i) {
            raw.push_back(parse_number<long long>(*graph_labels, i, split_fields(graph_labels->lines[i])[0]));
        }
        targets = Targets::from_class_labels(raw);
    } else if (graph_attrs) {
        std::vector<std::vector<double>> values(n_graphs);
        for (std::size_t i = 0; i < n_graphs; ++i) {
            for (auto field : split_fields(graph_attrs->lines[i])) {
                values[i].push_back(parse_number<double>(*graph_attrs, i, field));
            }
        }
        targets = Targets::from_regression(std::move(values));
    }

    std::vector<Graph> graphs;
    graphs.reserve(n_graphs);
    for (std::size_t g = 0; g < n_graphs; ++g) {
        std::optional<std::vector<Label>> gl;
        if (!labels.empty()) gl = std::move(labels[g]);
        std::optional<Eigen::MatrixXd> ga;
        if (!attrs.empty()) ga = std::move(attrs[g]);
        graphs.push_back(Graph::from_edges(sizes[g], edges[g], std::move(gl), std::move(ga)));
    }
    return GraphDataset(std::move(graphs), std::move(targets));
}

GraphDataset standardize_attributes(const GraphDataset& ds) {
    if (!ds.has_attributes()) return ds;
    const std::size_t d = ds.attribute_dim();
    const double n = static_cast<double>(ds.total_vertices());
    Eigen::VectorXd mean = Eigen::VectorXd::Zero(d);
    for (const auto& g : ds.graphs()) mean += g.attributes().colwise().sum().transpose();
    mean /= n;
    Eigen::VectorXd var = Eigen::VectorXd::Zero(d);
    for (const auto& g : ds.graphs()) {
        var += (g.attributes().rowwise() - mean.transpose()).array().square().colwise().sum().matrix().transpose();
    }
    var /= n;
    Eigen::VectorXd scale(d);
    for (std::size_t k = 0; k < d; ++k) scale[k] = var[k] > 0.0 ? 1.0 / std::sqrt(var[k]) : 1.0;

    std::vector<Graph> graphs;
    graphs.reserve(ds.n_graphs());
    for (const auto& g : ds.graphs()) {
        Eigen::MatrixXd a = (g.attributes().rowwise() - mean.transpose()) * scale.asDiagonal();
        std::optional<std::vector<Label>> labels;
        if (g.has_labels()) labels = g.labels();
        graphs.emplace_back(g.adjacency(), std::move(labels), std::move(a));
    }
    return GraphDataset(std::move(graphs), ds.targets());
}

std::string format_double(double x) {
    std::array<char, 32> buf{};
    auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), x);
    if (ec != std::errc()) throw Error("cannot format number");
    return std::string(buf.data(), ptr);
}

void write_gram(const Eigen::MatrixXd& K, const std::vector<std::string>& ids, const fs::path& path) {
    const auto n = K.rows();
    if (K.cols() != n || static_cast<std::size_t>(n) != ids.size()) {
        throw ContractError("Gram matrix shape does not match id count");
    }
    const double scale = std::max(1.0, K.cwiseAbs().maxCoeff());
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index j = i + 1; j < n; ++j) {
            if (std::abs(K(i, j) - K(j, i)) > 1e-9 * scale) {
                throw ContractError("Gram matrix not symmetric at (" + std::to_string(i) + ", " + std::to_string(j) +
                                    ")");
            }
        }
    }
    auto out = open_out(path);
    for (std::size_t i = 0; i < ids.size(); ++i) out << (i ? "," : "") << ids[i];
    out << '\n';
    for (Eigen::Index i = 0; i < n; ++i) {
        out << ids[i];
        for (Eigen::Index j = 0; j < n; ++j) out << ',' << format_double(K(i, j));
        out << '\n';
    }
    finish(out, path);
}

LabeledMatrix read_gram(const fs::path& path) {
    const LineFile f = read_lines(path);
    if (f.lines.empty()) throw FormatError(path.string() + ": empty Gram file");
    LabeledMatrix m;
    for (auto id : split_fields(f.lines[0])) m.ids.emplace_back(id);
    const std::size_t n = m.ids.size();
    expect_rows(f, n + 1, "header + rows");
    m.values.resize(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
    for (std::size_t i = 0; i < n; ++i) {
        const auto fields = split_fields(f.lines[i + 1]);
        if (fields.size() != n + 1) bad_line(f, i + 1, "expected id plus " + std::to_string(n) + " values");
        for (std::size_t j = 0; j < n; ++j) m.values(i, j) = parse_number<double>(f, i + 1, fields[j + 1]);
    }
    return m;
}

void write_features(const Eigen::MatrixXd& F, const std::vector<std::string>& ids, const Targets& targets,
                    const fs::path& path) {
    if (static_cast<std::size_t>(F.rows()) != ids.size()) throw ContractError("feature rows do not match id count");
    if (targets.kind != TargetKind::none && targets.size() != ids.size()) {
        throw ContractError("target count does not match feature rows");
    }
    std::size_t target_cols = 0;
    if (targets.kind == TargetKind::classes) target_cols = 1;
    if (targets.kind == TargetKind::regression && !targets.regression.empty()) {
        target_cols = targets.regression.front().size();
    }

    auto out = open_out(path);
    out << "graph_id";
    if (target_cols == 1) {
        out << ",target";
    } else {
        for (std::size_t k = 0; k < target_cols; ++k) out << ",target" << k;
    }
    for (Eigen::Index k = 0; k < F.cols(); ++k) out << ",f" << k;
    out << '\n';
    for (Eigen::Index i = 0; i < F.rows(); ++i) {
        out << ids[i];
        if (targets.kind == TargetKind::classes) {
            out << ',' << targets.class_values[targets.classes[i]];
        } else if (targets.kind == TargetKind::regression) {
            for (double y : targets.regression[i]) out << ',' << format_double(y);
        }
        for (Eigen::Index k = 0; k < F.cols(); ++k) out << ',' << format_double(F(i, k));
        out << '\n';
    }
    finish(out, path);
}

void write_precomputed_kernel(const Eigen::MatrixXd& K, const std::vector<int>& labels, const fs::path& path) {
    if (K.rows() != K.cols() || static_cast<std::size_t>(K.rows()) != labels.size()) {
        throw ContractError("kernel shape does not match label count");
    }
    auto out = open_out(path);
    for (Eigen::Index i = 0; i < K.rows(); ++i) {
        out << labels[i] << " 0:" << (i + 1);
        for (Eigen::Index j = 0; j < K.cols(); ++j) out << ' ' << (j + 1) << ':' << format_double(K(i, j));
        out << '\n';
    }
    finish(out, path);
}

std::vector<std::string> graph_ids(std::size_t n) {
    std::vector<std::string> ids;
    ids.reserve(n);
    for (std::size_t i = 0; i < n; ++i) ids.push_back("g" + std::to_string(i));
    return ids;
}

}  // namespace mpgk
