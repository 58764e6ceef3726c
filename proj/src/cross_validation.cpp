#include "mpgk/cross_validation.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <random>
#include <string>

#include "mpgk/dataset_io.hpp"
#include "mpgk/error.hpp"
#include "mpgk/linalg.hpp"
#include "mpgk/log.hpp"
#include "mpgk/random.hpp"

namespace mpgk {

std::vector<int> stratified_folds(std::span<const int> classes, int folds, std::uint64_t seed) {
    if (folds < 2) throw ParameterError("need at least 2 folds");
    int n_classes = 0;
    for (int c : classes) n_classes = std::max(n_classes, c + 1);
    std::vector<std::vector<std::size_t>> members(static_cast<std::size_t>(n_classes));
    for (std::size_t i = 0; i < classes.size(); ++i) members[classes[i]].push_back(i);

    std::mt19937_64 rng(seed);
    std::vector<int> fold_of(classes.size(), -1);
    int next = 0;
    for (int c = 0; c < n_classes; ++c) {
        auto& m = members[c];
        if (m.empty()) continue;
        if (m.size() < static_cast<std::size_t>(folds)) {
            throw ParameterError("cannot stratify into " + std::to_string(folds) + " folds: class " +
                                 std::to_string(c) + " has only " + std::to_string(m.size()) + " samples");
        }
        std::shuffle(m.begin(), m.end(), rng);
        // continue the round robin across classes so fold sizes stay balanced
        for (std::size_t i : m) {
            fold_of[i] = next;
            next = (next + 1) % folds;
        }
    }
    return fold_of;
}

double make_psd(Eigen::MatrixXd& K) {
    const auto [lo, hi] = eigen_range(K);
    if (lo >= -1e-8 * std::max(hi, 0.0)) return 0.0;
    const double ridge = -lo;
    log_warn("Gram matrix has eigenvalue " + std::to_string(lo) + " (max " + std::to_string(hi) +
             "); adding diagonal ridge " + std::to_string(ridge));
    K.diagonal().array() += ridge;
    return ridge;
}

namespace {

std::vector<Eigen::Index> to_index(const std::vector<std::size_t>& ids) {
    return {ids.begin(), ids.end()};
}

// Accuracy of an SVM trained on `train` and evaluated on `test`.
std::size_t score(const Eigen::MatrixXd& K, std::span<const int> classes, const std::vector<std::size_t>& train,
                  const std::vector<std::size_t>& test, double C, const SmoOptions& smo) {
    const auto tr = to_index(train);
    const Eigen::MatrixXd Ktr = K(tr, tr);
    std::vector<int> ytr(train.size());
    for (std::size_t i = 0; i < train.size(); ++i) ytr[i] = classes[train[i]];
    const MulticlassSvm model = train_multiclass(Ktr, ytr, C, smo);

    std::size_t correct = 0;
    std::vector<double> row(train.size());
    for (std::size_t t : test) {
        for (std::size_t i = 0; i < train.size(); ++i) {
            row[i] = K(static_cast<Eigen::Index>(t), static_cast<Eigen::Index>(train[i]));
        }
        if (predict_multiclass(model, row) == classes[t]) ++correct;
    }
    return correct;
}

struct Selection {
    int gram_index = 0;
    double C = 0.0;
};

Selection select_model(const std::vector<Eigen::MatrixXd>& grams, std::span<const int> classes,
                       const std::vector<std::size_t>& train, const CvOptions& options, std::uint64_t seed) {
    std::vector<int> train_classes(train.size());
    for (std::size_t i = 0; i < train.size(); ++i) train_classes[i] = classes[train[i]];
    std::vector<std::size_t> counts;
    for (int c : train_classes) {
        if (static_cast<std::size_t>(c) >= counts.size()) counts.resize(c + 1, 0);
        ++counts[c];
    }
    std::size_t smallest = train.size();
    for (std::size_t n : counts) {
        if (n > 0) smallest = std::min(smallest, n);
    }
    const int inner = static_cast<int>(std::min<std::size_t>(options.inner_folds, smallest));
    if (inner < 2) throw ParameterError("training fold too small for inner model selection");

    const std::vector<int> fold_of = stratified_folds(train_classes, inner, seed);
    std::vector<std::vector<std::size_t>> inner_train(inner), inner_test(inner);
    for (std::size_t i = 0; i < train.size(); ++i) {
        for (int f = 0; f < inner; ++f) (fold_of[i] == f ? inner_test[f] : inner_train[f]).push_back(train[i]);
    }

    Selection best;
    std::size_t best_correct = 0;
    bool first = true;
    for (std::size_t g = 0; g < grams.size(); ++g) {
        for (double C : options.C_grid) {
            std::size_t correct = 0;
            for (int f = 0; f < inner; ++f) {
                correct += score(grams[g], classes, inner_train[f], inner_test[f], C, options.smo);
            }
            // strict improvement keeps the earliest (smallest t, then C) on ties
            if (first || correct > best_correct) {
                first = false;
                best_correct = correct;
                best = {static_cast<int>(g), C};
            }
        }
    }
    return best;
}

}  // namespace

CvReport cross_validate(const std::vector<Eigen::MatrixXd>& grams_in, std::span<const int> classes,
                        const CvOptions& options) {
    if (grams_in.empty()) throw ParameterError("cross_validate needs at least one Gram matrix");
    if (options.C_grid.empty()) throw ParameterError("empty C grid");
    if (options.repeats < 1) throw ParameterError("repeats must be >= 1");
    const std::size_t n = classes.size();
    for (const auto& K : grams_in) {
        if (static_cast<std::size_t>(K.rows()) != n || K.cols() != K.rows()) {
            throw ContractError("Gram matrices must be N x N for N labels");
        }
    }
    std::vector<int> distinct(classes.begin(), classes.end());
    std::sort(distinct.begin(), distinct.end());
    distinct.erase(std::unique(distinct.begin(), distinct.end()), distinct.end());
    if (distinct.size() < 2) throw DegenerateError("need >= 2 classes");

    std::vector<Eigen::MatrixXd> grams = grams_in;
    for (auto& K : grams) make_psd(K);

    const int folds = options.folds;
    std::vector<FoldResult> results(static_cast<std::size_t>(options.repeats * folds));
    std::vector<std::vector<int>> fold_of(options.repeats);
    for (int r = 0; r < options.repeats; ++r) {
        fold_of[r] = stratified_folds(classes, folds, derive_seed(options.seed, {0x52455045ULL, static_cast<std::uint64_t>(r)}));
    }

#pragma omp parallel for schedule(dynamic, 1)
    for (int job = 0; job < options.repeats * folds; ++job) {
        const int r = job / folds;
        const int f = job % folds;
        std::vector<std::size_t> train, test;
        for (std::size_t i = 0; i < n; ++i) (fold_of[r][i] == f ? test : train).push_back(i);
        const Selection sel = select_model(
            grams, classes, train, options,
            derive_seed(options.seed, {0x494e4e45ULL, static_cast<std::uint64_t>(r), static_cast<std::uint64_t>(f)}));
        FoldResult& out = results[static_cast<std::size_t>(job)];
        out.repeat = r;
        out.fold = f;
        out.C = sel.C;
        out.gram_index = sel.gram_index;
        out.n_test = test.size();
        out.n_correct = score(grams[sel.gram_index], classes, train, test, sel.C, options.smo);
        out.accuracy = static_cast<double>(out.n_correct) / static_cast<double>(out.n_test);
    }

    CvReport report;
    report.folds = std::move(results);
    for (int r = 0; r < options.repeats; ++r) {
        std::size_t correct = 0;
        std::size_t total = 0;
        for (int f = 0; f < folds; ++f) {
            const FoldResult& fr = report.folds[static_cast<std::size_t>(r * folds + f)];
            correct += fr.n_correct;
            total += fr.n_test;
        }
        report.repeat_accuracies.push_back(static_cast<double>(correct) / static_cast<double>(total));
    }
    const double R = static_cast<double>(options.repeats);
    report.mean_accuracy =
        std::accumulate(report.repeat_accuracies.begin(), report.repeat_accuracies.end(), 0.0) / R;
    double var = 0.0;
    for (double a : report.repeat_accuracies) var += (a - report.mean_accuracy) * (a - report.mean_accuracy);
    report.std_accuracy = std::sqrt(var / R);
    return report;
}

void write_cv_report(const CvReport& report, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write " + path.string());
    out << "repeat,fold,C,t,n_test,accuracy\n";
    for (const auto& f : report.folds) {
        out << f.repeat << ',' << f.fold << ',' << format_double(f.C) << ',' << (f.gram_index + 1) << ',' << f.n_test
            << ',' << format_double(f.accuracy) << '\n';
    }
    out << "summary,mean," << format_double(report.mean_accuracy) << ",std," << format_double(report.std_accuracy)
        << ",\n";
    out.flush();
    if (!out) throw IoError("write failed for " + path.string());
}

}  // namespace mpgk
