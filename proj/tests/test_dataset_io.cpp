#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>

#include <unistd.h>

#include "mpgk/dataset_io.hpp"
#include "mpgk/error.hpp"

using namespace mpgk;
namespace fs = std::filesystem;

namespace {

struct TempDir {
    fs::path path;
    TempDir() {
        static int counter = 0;
        path = fs::temp_directory_path() / ("mpgk_io_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
        fs::remove_all(path);
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
    void write(const std::string& name, const std::string& content) const {
        std::ofstream(path / name) << content;
    }
};

std::size_t count_lines(const fs::path& p) {
    std::ifstream in(p);
    std::size_t n = 0;
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty()) ++n;
    }
    return n;
}

}  // namespace

TEST_CASE("load MUTAG") {
    const fs::path dir = fs::path(MPGK_DATA_DIR) / "MUTAG";
    const GraphDataset ds = load_tu_dataset(dir, "MUTAG");
    CHECK(ds.n_graphs() == 188);
    CHECK(ds.has_labels());
    CHECK_FALSE(ds.has_attributes());
    CHECK(ds.targets().kind == TargetKind::classes);
    CHECK(ds.targets().n_classes() == 2);
    CHECK(ds.targets().class_values == std::vector<Label>{-1, 1});
    CHECK(validate(ds).empty());

    CHECK(ds.total_vertices() == count_lines(dir / "MUTAG_graph_indicator.txt"));
    std::size_t edges = 0;
    for (const auto& g : ds.graphs()) edges += g.n_edges();
    CHECK(2 * edges == count_lines(dir / "MUTAG_A.txt"));  // both orientations are listed

    SUBCASE("deterministic") { CHECK(load_tu_dataset(dir, "MUTAG") == ds); }
}

TEST_CASE("smallest edge list") {
    TempDir d;
    d.write("T_A.txt", "1, 2\n2, 1\n");
    d.write("T_graph_indicator.txt", "1\n1\n");
    const GraphDataset ds = load_tu_dataset(d.path, "T");
    REQUIRE(ds.n_graphs() == 1);
    CHECK(ds.graph(0).n_vertices() == 2);
    CHECK(ds.graph(0).n_edges() == 1);
    CHECK(ds.targets().kind == TargetKind::none);
}

TEST_CASE("attributes, labels and whitespace tolerance") {
    TempDir d;
    d.write("T_A.txt", "1,2\n  3 ,  2\n\n\n");
    d.write("T_graph_indicator.txt", "1\n1\n2\n");
    d.write("T_node_attributes.txt", "1.0, 2.0\n3.0, 4.0\n-1e-3,5\n");
    d.write("T_node_labels.txt", "4\n4\n2\n");
    d.write("T_graph_labels.txt", "7\n3\n");
    // vertex 3 sits in graph 2 while vertex 2 is in graph 1 -> cross-graph edge
    CHECK_THROWS_AS(load_tu_dataset(d.path, "T"), FormatError);

    d.write("T_A.txt", "1,2\n  2 ,  1\n\n");
    const GraphDataset ds = load_tu_dataset(d.path, "T");
    REQUIRE(ds.n_graphs() == 2);
    CHECK(ds.attribute_dim() == 2);
    CHECK(ds.graph(0).attributes()(1, 1) == 4.0);
    CHECK(ds.graph(1).attributes()(0, 0) == -1e-3);
    CHECK(ds.graph(1).labels() == std::vector<Label>{2});
    CHECK(ds.targets().classes == std::vector<int>{1, 0});
}

TEST_CASE("loader errors") {
    TempDir d;
    CHECK_THROWS_WITH_AS(load_tu_dataset(d.path, "X"), doctest::Contains("missing X_A.txt"), IoError);

    d.write("X_A.txt", "1, 2\n");
    d.write("X_graph_indicator.txt", "1\n3\n");
    d.write("X_graph_labels.txt", "1\n");
    CHECK_THROWS_AS(load_tu_dataset(d.path, "X"), FormatError);  // graph 3 does not exist

    d.write("X_graph_indicator.txt", "1\n1\n");
    d.write("X_node_attributes.txt", "1.0, 2.0\n3.0\n");
    CHECK_THROWS_WITH_AS(load_tu_dataset(d.path, "X"), doctest::Contains("ragged"), FormatError);

    d.write("X_node_attributes.txt", "1.0\n2.0\n");
    d.write("X_A.txt", "1, 9\n");
    CHECK_THROWS_AS(load_tu_dataset(d.path, "X"), FormatError);
}

TEST_CASE("format_double round-trips") {
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> u(-1e6, 1e6);
    for (int i = 0; i < 1000; ++i) {
        const double x = u(rng) * std::pow(10.0, static_cast<int>(rng() % 40) - 20);
        CHECK(std::stod(format_double(x)) == x);
    }
    CHECK(format_double(4.0) == "4");
    CHECK(format_double(0.1) == "0.1");
}

TEST_CASE("write_gram") {
    TempDir d;
    SUBCASE("singleton") {
        Eigen::MatrixXd K(1, 1);
        K << 4.0;
        write_gram(K, graph_ids(1), d.path / "k.csv");
        std::ifstream in(d.path / "k.csv");
        std::string header, row;
        std::getline(in, header);
        std::getline(in, row);
        CHECK(header == "g0");
        CHECK(row == "g0,4");
    }
    SUBCASE("identity") {
        write_gram(Eigen::MatrixXd::Identity(2, 2), graph_ids(2), d.path / "k.csv");
        std::ifstream in(d.path / "k.csv");
        std::string line;
        std::getline(in, line);
        CHECK(line == "g0,g1");
        std::getline(in, line);
        CHECK(line == "g0,1,0");
        std::getline(in, line);
        CHECK(line == "g1,0,1");
    }
    SUBCASE("round trip") {
        std::mt19937_64 rng(9);
        std::normal_distribution<double> nd(0, 1e3);
        Eigen::MatrixXd A(6, 6);
        for (Eigen::Index i = 0; i < A.size(); ++i) A.data()[i] = nd(rng);
        const Eigen::MatrixXd K = A * A.transpose();
        Eigen::MatrixXd S = K;
        S.triangularView<Eigen::StrictlyLower>() = S.transpose();
        write_gram(S, graph_ids(6), d.path / "k.csv");
        const LabeledMatrix back = read_gram(d.path / "k.csv");
        CHECK(back.ids == graph_ids(6));
        CHECK(((back.values - S).cwiseAbs().array() <= 1e-12 * S.cwiseAbs().array()).all());
    }
    SUBCASE("asymmetric input") {
        Eigen::MatrixXd K(2, 2);
        K << 1, 2, 3, 1;
        CHECK_THROWS_AS(write_gram(K, graph_ids(2), d.path / "k.csv"), ContractError);
    }
    SUBCASE("unwritable path") {
        CHECK_THROWS_AS(write_gram(Eigen::MatrixXd::Identity(1, 1), graph_ids(1), d.path / "nope" / "k.csv"),
                        IoError);
    }
}

TEST_CASE("write_features") {
    TempDir d;
    SUBCASE("empty matrix gives a header-only file") {
        write_features(Eigen::MatrixXd(0, 0), {}, Targets{}, d.path / "f.csv");
        CHECK(count_lines(d.path / "f.csv") == 1);
    }
    SUBCASE("columns: id, target, T*m features") {
        const Eigen::MatrixXd F = Eigen::MatrixXd::Constant(2, 2 * 3, 0.5);
        std::vector<Label> raw{3, 9};
        write_features(F, graph_ids(2), Targets::from_class_labels(raw), d.path / "f.csv");
        std::ifstream in(d.path / "f.csv");
        std::string line;
        std::getline(in, line);
        CHECK(line == "graph_id,target,f0,f1,f2,f3,f4,f5");
        std::getline(in, line);
        CHECK(line == "g0,3,0.5,0.5,0.5,0.5,0.5,0.5");
        std::getline(in, line);
        CHECK(line.rfind("g1,9,", 0) == 0);
    }
    SUBCASE("regression targets") {
        const Eigen::MatrixXd F = Eigen::MatrixXd::Zero(1, 800);
        write_features(F, graph_ids(1), Targets::from_regression({{1.5, -2.0}}), d.path / "f.csv");
        std::ifstream in(d.path / "f.csv");
        std::string header, row;
        std::getline(in, header);
        std::getline(in, row);
        CHECK(header.rfind("graph_id,target0,target1,f0,", 0) == 0);
        CHECK(std::count(row.begin(), row.end(), ',') == 2 + 800);
    }
    SUBCASE("unwritable path") {
        CHECK_THROWS_AS(write_features(Eigen::MatrixXd::Zero(1, 1), graph_ids(1), Targets{}, d.path / "x" / "f.csv"),
                        IoError);
    }
}

TEST_CASE("precomputed kernel export") {
    TempDir d;
    Eigen::MatrixXd K(2, 2);
    K << 2, 0.5, 0.5, 1;
    write_precomputed_kernel(K, {1, -1}, d.path / "k.txt");
    std::ifstream in(d.path / "k.txt");
    std::string line;
    std::getline(in, line);
    CHECK(line == "1 0:1 1:2 2:0.5");
    std::getline(in, line);
    CHECK(line == "-1 0:2 1:0.5 2:1");
}

TEST_CASE("standardize_attributes") {
    Eigen::MatrixXd a(3, 2);
    a << 1, 5, 2, 5, 3, 5;
    std::vector<Edge> e;
    GraphDataset ds({Graph::from_edges(3, e, std::nullopt, a)});
    const GraphDataset z = standardize_attributes(ds);
    const Eigen::MatrixXd& s = z.graph(0).attributes();
    CHECK(s.col(0).mean() == doctest::Approx(0.0));
    CHECK(s.col(0).squaredNorm() / 3.0 == doctest::Approx(1.0));
    CHECK(s.col(1).cwiseAbs().maxCoeff() == 0.0);
}
