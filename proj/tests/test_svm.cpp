#include <doctest.h>

#include <numeric>
#include <random>

#include "mpgk/error.hpp"
#include "mpgk/svm.hpp"

using namespace mpgk;

namespace {

struct Problem {
    Eigen::MatrixXd X;
    std::vector<int> y;
};

Problem blobs(std::size_t per_class, double gap, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> nd;
    Problem p;
    p.X.resize(static_cast<Eigen::Index>(2 * per_class), 2);
    for (std::size_t i = 0; i < 2 * per_class; ++i) {
        const int label = i < per_class ? 1 : -1;
        p.X(i, 0) = nd(rng) + gap * label;
        p.X(i, 1) = nd(rng);
        p.y.push_back(label);
    }
    return p;
}

Eigen::MatrixXd rbf(const Eigen::MatrixXd& A, const Eigen::MatrixXd& B, double gamma) {
    Eigen::MatrixXd K(A.rows(), B.rows());
    for (Eigen::Index i = 0; i < A.rows(); ++i)
        for (Eigen::Index j = 0; j < B.rows(); ++j) K(i, j) = std::exp(-gamma * (A.row(i) - B.row(j)).squaredNorm());
    return K;
}

std::vector<double> row_of(const Eigen::MatrixXd& K, Eigen::Index i) {
    std::vector<double> r(static_cast<std::size_t>(K.cols()));
    for (Eigen::Index j = 0; j < K.cols(); ++j) r[j] = K(i, j);
    return r;
}

}  // namespace

TEST_CASE("separable data is classified perfectly") {
    const Problem p = blobs(20, 4.0, 1);
    const Eigen::MatrixXd K = p.X * p.X.transpose();
    const SvmModel m = svm_train(K, p.y, 10.0);
    CHECK(m.n_train == 40);
    for (Eigen::Index i = 0; i < K.rows(); ++i) CHECK(svm_predict(m, row_of(K, i)) == p.y[i]);
    CHECK(kkt_violation(m, K, p.y) <= 1e-3);
}

TEST_CASE("dual constraints") {
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        const Problem p = blobs(15, 0.5, seed);
        const Eigen::MatrixXd K = rbf(p.X, p.X, 0.5);
        for (double C : {0.01, 1.0, 100.0}) {
            const SvmModel m = svm_train(K, p.y, C);
            double balance = 0.0;
            for (std::size_t i = 0; i < p.y.size(); ++i) {
                CHECK(m.alpha[i] >= 0.0);
                CHECK(m.alpha[i] <= C * (1 + 1e-12));
                balance += m.alpha[i] * p.y[i];
            }
            CHECK(std::abs(balance) <= 1e-9 * std::max(1.0, C));
            CHECK(m.support.size() == m.dual.size());
            for (std::size_t s = 0; s < m.support.size(); ++s) {
                CHECK(m.dual[s] > 0.0);
                CHECK(m.support_labels[s] == p.y[m.support[s]]);
            }
            CHECK(kkt_violation(m, K, p.y) <= 1e-3);
        }
    }
}

TEST_CASE("SMO solution satisfies the optimality conditions") {
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
        const Problem p = blobs(8, 0.3, 5 + seed);
        const Eigen::MatrixXd K = rbf(p.X, p.X, 1.0);
        const double C = 1.0;
        SmoOptions tight;
        tight.tolerance = 1e-8;
        const SvmModel m = svm_train(K, p.y, C, tight);
        for (std::size_t i = 0; i < p.y.size(); ++i) {
            double f = m.bias;
            for (std::size_t j = 0; j < p.y.size(); ++j) f += m.alpha[j] * p.y[j] * K(i, j);
            const double margin = p.y[i] * f;
            if (m.alpha[i] <= 0.0) {
                CHECK(margin >= 1.0 - 1e-6);
            } else if (m.alpha[i] >= C) {
                CHECK(margin <= 1.0 + 1e-6);
            } else {
                CHECK(margin == doctest::Approx(1.0).epsilon(1e-6));
            }
            CHECK(svm_decision(m, row_of(K, static_cast<Eigen::Index>(i))) == doctest::Approx(f).epsilon(1e-12));
        }
    }
}

TEST_CASE("XOR with an RBF kernel") {
    Eigen::MatrixXd X(4, 2);
    X << 0, 0, 1, 1, 0, 1, 1, 0;
    const std::vector<int> y{1, 1, -1, -1};
    const Eigen::MatrixXd K = rbf(X, X, 2.0);
    const SvmModel m = svm_train(K, y, 100.0);
    for (Eigen::Index i = 0; i < 4; ++i) CHECK(svm_predict(m, row_of(K, i)) == y[i]);
    // linear kernel cannot separate XOR
    const SvmModel lin = svm_train(X * X.transpose(), y, 100.0);
    int correct = 0;
    const Eigen::MatrixXd L = X * X.transpose();
    for (Eigen::Index i = 0; i < 4; ++i) correct += svm_predict(lin, row_of(L, i)) == y[i];
    CHECK(correct < 4);
}

TEST_CASE("two points: the midpoint is on the boundary") {
    Eigen::MatrixXd X(2, 1);
    X << 1, -1;
    const std::vector<int> y{1, -1};
    const Eigen::MatrixXd K = X * X.transpose();
    const SvmModel m = svm_train(K, y, 1000.0);
    const std::vector<double> mid{0.0, 0.0};
    CHECK(std::abs(svm_decision(m, mid)) <= 1e-9);
    CHECK(m.alpha[0] == doctest::Approx(0.5));
    CHECK(m.alpha[1] == doctest::Approx(0.5));
    const std::vector<double> at_one{1.0, -1.0};
    CHECK(svm_decision(m, at_one) == doctest::Approx(1.0));
    CHECK(svm_predict(m, mid) == 1);
}

TEST_CASE("svm errors") {
    const Eigen::MatrixXd K = Eigen::MatrixXd::Identity(3, 3);
    const std::vector<int> same{1, 1, 1};
    CHECK_THROWS_AS(svm_train(K, same, 1.0), DegenerateError);
    const std::vector<int> short_labels{1, -1};
    CHECK_THROWS_AS(svm_train(K, short_labels, 1.0), ContractError);
    const std::vector<int> bad{1, 0, -1};
    CHECK_THROWS_AS(svm_train(K, bad, 1.0), ContractError);
    const std::vector<int> ok{1, -1, 1};
    CHECK_THROWS_AS(svm_train(K, ok, 0.0), ParameterError);
    const SvmModel m = svm_train(K, ok, 1.0);
    const std::vector<double> wrong{1.0, 0.0};
    CHECK_THROWS_AS(svm_decision(m, wrong), ContractError);
}

TEST_CASE("multiclass one-vs-rest") {
    std::mt19937_64 rng(8);
    std::normal_distribution<double> nd(0.0, 0.2);
    const double centers[3][2] = {{0, 0}, {5, 0}, {0, 5}};
    Eigen::MatrixXd X(30, 2);
    std::vector<int> cls;
    for (int i = 0; i < 30; ++i) {
        X(i, 0) = centers[i % 3][0] + nd(rng);
        X(i, 1) = centers[i % 3][1] + nd(rng);
        cls.push_back(i % 3);
    }
    const Eigen::MatrixXd K = rbf(X, X, 0.5);
    const MulticlassSvm m = train_multiclass(K, cls, 10.0);
    CHECK(m.n_classes == 3);
    CHECK(m.machines.size() == 3);
    for (Eigen::Index i = 0; i < 30; ++i) CHECK(predict_multiclass(m, row_of(K, i)) == cls[i]);

    std::vector<int> two(cls.size());
    for (std::size_t i = 0; i < cls.size(); ++i) two[i] = cls[i] == 0 ? 0 : 1;
    const MulticlassSvm b = train_multiclass(K, two, 10.0);
    CHECK(b.machines.size() == 1);
    for (Eigen::Index i = 0; i < 30; ++i) CHECK(predict_multiclass(b, row_of(K, i)) == two[i]);
}

TEST_CASE("all-zero kernel row follows the bias") {
    const Problem p = blobs(10, 2.0, 4);
    const Eigen::MatrixXd K = p.X * p.X.transpose();
    const SvmModel m = svm_train(K, p.y, 1.0);
    const std::vector<double> zero(20, 0.0);
    CHECK(svm_decision(m, zero) == m.bias);
    CHECK(svm_predict(m, zero) == (m.bias >= 0 ? 1 : -1));
}

TEST_CASE("training is deterministic") {
    const Problem p = blobs(12, 0.5, 6);
    const Eigen::MatrixXd K = rbf(p.X, p.X, 0.7);
    const SvmModel a = svm_train(K, p.y, 2.0);
    const SvmModel b = svm_train(K, p.y, 2.0);
    CHECK(a.alpha == b.alpha);
    CHECK(a.bias == b.bias);
}
