#include "mpgk/svm.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "mpgk/error.hpp"

namespace mpgk {

namespace {

constexpr double kTau = 1e-12;
constexpr double kInf = std::numeric_limits<double>::infinity();

// Maximal violating pair gap m(α) - M(α) for the current gradient.
double violation_gap(const std::vector<double>& alpha, const std::vector<double>& G, std::span<const int> y,
                     double C) {
    double up = -kInf;
    double low = -kInf;
    for (std::size_t t = 0; t < alpha.size(); ++t) {
        const bool can_up = y[t] > 0 ? alpha[t] < C : alpha[t] > 0.0;
        const bool can_low = y[t] > 0 ? alpha[t] > 0.0 : alpha[t] < C;
        if (can_up) up = std::max(up, -y[t] * G[t]);
        if (can_low) low = std::max(low, y[t] * G[t]);
    }
    if (up == -kInf || low == -kInf) return 0.0;
    return std::max(0.0, up + low);
}

// Primal active-set refinement: minimize the dual exactly on a working set
// of free variables (bounded ones held fixed), block at the first bound that
// gets in the way, and release the bounded variable with the worst multiplier
// once the working set is optimal. Every move is a descent step, so this only
// accelerates SMO in the ill-conditioned regime and leaves its stopping rule
// in charge. Returns whether α changed.
bool active_set_refine(std::vector<double>& alpha, std::vector<double>& G, const Eigen::MatrixXd& K,
                       std::span<const int> y, double C, double tolerance) {
    const std::size_t n = alpha.size();
    std::vector<char> in_set(n, 0);
    for (std::size_t t = 0; t < n; ++t) in_set[t] = alpha[t] > 0.0 && alpha[t] < C;
    bool moved = false;

    for (std::size_t round = 0; round < 4 * n; ++round) {
        std::vector<Eigen::Index> F;
        for (std::size_t t = 0; t < n; ++t) {
            if (in_set[t]) F.push_back(static_cast<Eigen::Index>(t));
        }
        const auto f = static_cast<Eigen::Index>(F.size());
        if (f < 2) break;

        Eigen::MatrixXd A = Eigen::MatrixXd::Zero(f + 1, f + 1);
        Eigen::VectorXd rhs = Eigen::VectorXd::Zero(f + 1);
        Eigen::VectorXd yf(f);
        for (Eigen::Index a = 0; a < f; ++a) {
            yf[a] = y[F[a]];
            for (Eigen::Index b = 0; b < f; ++b) A(a, b) = y[F[a]] * y[F[b]] * K(F[a], F[b]);
            A(a, f) = A(f, a) = yf[a];
            rhs[a] = -G[F[a]];
        }
        const Eigen::VectorXd sol = A.completeOrthogonalDecomposition().solve(rhs);
        // An inconsistent (singular) system leaves a residual in the null space
        // of A: a zero-curvature descent direction that keeps yᵀα fixed.
        const Eigen::VectorXd res = rhs - A * sol;
        const bool singular = res.norm() > 1e-9 * (1.0 + rhs.norm());
        Eigen::VectorXd d = singular ? Eigen::VectorXd(res.head(f)) : Eigen::VectorXd(sol.head(f));
        d -= (yf.dot(d) / static_cast<double>(f)) * yf;
        const double lambda = sol[f];

        double slope = 0.0;
        for (Eigen::Index a = 0; a < f; ++a) slope += G[F[a]] * d[a];
        const double curv = d.dot(A.topLeftCorner(f, f) * d);
        const bool descent = slope < 0.0;

        double step = 0.0;
        Eigen::Index hit = -1;
        bool full = false;
        if (descent) {
            step = curv > 0.0 ? -slope / curv : kInf;
            for (Eigen::Index a = 0; a < f; ++a) {
                const double room = d[a] > 0.0 ? (C - alpha[F[a]]) / d[a] : d[a] < 0.0 ? -alpha[F[a]] / d[a] : kInf;
                if (room < step) {
                    step = room;
                    hit = a;
                }
            }
            if (step == kInf) break;
            full = !singular && hit < 0 && std::abs(step - 1.0) <= 1e-6;
        }

        if (step > 0.0) {
            Eigen::VectorXd delta = step * d;
            for (Eigen::Index a = 0; a < f; ++a) {
                const double next = a == hit ? (d[a] > 0.0 ? C : 0.0) : std::clamp(alpha[F[a]] + delta[a], 0.0, C);
                delta[a] = next - alpha[F[a]];
                alpha[F[a]] = next;
            }
            for (std::size_t t = 0; t < n; ++t) {
                double acc = 0.0;
                for (Eigen::Index a = 0; a < f; ++a) acc += y[F[a]] * K(static_cast<Eigen::Index>(t), F[a]) * delta[a];
                G[t] += y[t] * acc;
            }
            moved = true;
        }
        if (hit >= 0) {
            in_set[F[hit]] = 0;
            continue;
        }
        if (!full && d.cwiseAbs().maxCoeff() > 1e-12 * C) {
            // singular working-set problem: keep descending while it pays off
            if (step * -slope > 1e-12 * (1.0 + std::abs(slope))) continue;
            break;
        }

        // working set optimal: release the worst bounded variable
        double worst = 0.5 * tolerance;
        std::size_t release = n;
        for (std::size_t t = 0; t < n; ++t) {
            if (in_set[t]) continue;
            const double mu = G[t] + lambda * y[t];
            const double violation = alpha[t] <= 0.0 ? -mu : mu;
            if (violation > worst) {
                worst = violation;
                release = t;
            }
        }
        if (release == n) break;
        in_set[release] = 1;
    }
    return moved;
}

}  // namespace

SvmModel svm_train(const Eigen::MatrixXd& K, std::span<const int> labels, double C, const SmoOptions& options) {
    const std::size_t n = labels.size();
    if (K.rows() != K.cols() || static_cast<std::size_t>(K.rows()) != n) {
        throw ContractError("svm_train: kernel is " + std::to_string(K.rows()) + "x" + std::to_string(K.cols()) +
                            " for " + std::to_string(n) + " labels");
    }
    if (!(C > 0.0)) throw ParameterError("svm_train: C must be positive");
    bool pos = false;
    bool neg = false;
    for (int y : labels) {
        if (y != 1 && y != -1) throw ContractError("svm_train: labels must be +1 or -1");
        (y > 0 ? pos : neg) = true;
    }
    if (!pos || !neg) throw DegenerateError("svm_train: training set contains a single class");

    const auto at = [&K](std::size_t i, std::size_t j) {
        return K(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
    };
    std::vector<double> alpha(n, 0.0);
    std::vector<double> G(n, -1.0);
    const auto& y = labels;

    long iter = 0;
    const long refine_period = 10 * static_cast<long>(std::max<std::size_t>(n, 20));
    while (iter < options.max_iter) {
        // second-order working set selection
        double gmax = -kInf;
        std::size_t i = n;
        for (std::size_t t = 0; t < n; ++t) {
            if (y[t] > 0) {
                if (alpha[t] < C && -G[t] >= gmax) {
                    gmax = -G[t];
                    i = t;
                }
            } else if (alpha[t] > 0.0 && G[t] >= gmax) {
                gmax = G[t];
                i = t;
            }
        }
        if (i == n) break;

        double gmax2 = -kInf;
        double best_obj = kInf;
        std::size_t j = n;
        for (std::size_t t = 0; t < n; ++t) {
            // curvature along the pair direction; the same for both label signs
            const double quad = at(i, i) + at(t, t) - 2.0 * at(i, t);
            if (y[t] > 0) {
                if (alpha[t] > 0.0) {
                    const double diff = gmax + G[t];
                    gmax2 = std::max(gmax2, G[t]);
                    if (diff > 0.0) {
                        const double obj = -(diff * diff) / (quad > 0.0 ? quad : kTau);
                        if (obj <= best_obj) {
                            best_obj = obj;
                            j = t;
                        }
                    }
                }
            } else if (alpha[t] < C) {
                const double diff = gmax - G[t];
                gmax2 = std::max(gmax2, -G[t]);
                if (diff > 0.0) {
                    const double obj = -(diff * diff) / (quad > 0.0 ? quad : kTau);
                    if (obj <= best_obj) {
                        best_obj = obj;
                        j = t;
                    }
                }
            }
        }
        if (gmax + gmax2 < options.tolerance || j == n) break;
        ++iter;
        if (iter % refine_period == 0 && active_set_refine(alpha, G, K, y, C, options.tolerance)) continue;

        const double old_i = alpha[i];
        const double old_j = alpha[j];
        const double Qii = at(i, i);
        const double Qjj = at(j, j);
        const double Qij = y[i] * y[j] * at(i, j);
        if (y[i] != y[j]) {
            double quad = Qii + Qjj + 2.0 * Qij;
            if (quad <= 0.0) quad = kTau;
            const double delta = (-G[i] - G[j]) / quad;
            const double diff = alpha[i] - alpha[j];
            alpha[i] += delta;
            alpha[j] += delta;
            if (diff > 0.0) {
                if (alpha[j] < 0.0) {
                    alpha[j] = 0.0;
                    alpha[i] = diff;
                }
            } else if (alpha[i] < 0.0) {
                alpha[i] = 0.0;
                alpha[j] = -diff;
            }
            if (diff > 0.0) {
                if (alpha[i] > C) {
                    alpha[i] = C;
                    alpha[j] = C - diff;
                }
            } else if (alpha[j] > C) {
                alpha[j] = C;
                alpha[i] = C + diff;
            }
        } else {
            double quad = Qii + Qjj - 2.0 * Qij;
            if (quad <= 0.0) quad = kTau;
            const double delta = (G[i] - G[j]) / quad;
            const double sum = alpha[i] + alpha[j];
            alpha[i] -= delta;
            alpha[j] += delta;
            if (sum > C) {
                if (alpha[i] > C) {
                    alpha[i] = C;
                    alpha[j] = sum - C;
                }
            } else if (alpha[j] < 0.0) {
                alpha[j] = 0.0;
                alpha[i] = sum;
            }
            if (sum > C) {
                if (alpha[j] > C) {
                    alpha[j] = C;
                    alpha[i] = sum - C;
                }
            } else if (alpha[i] < 0.0) {
                alpha[i] = 0.0;
                alpha[j] = sum;
            }
        }

        const double di = alpha[i] - old_i;
        const double dj = alpha[j] - old_j;
        for (std::size_t t = 0; t < n; ++t) {
            G[t] += y[t] * (y[i] * at(t, i) * di + y[j] * at(t, j) * dj);
        }
    }

    SvmModel model;
    model.C = C;
    model.n_train = n;
    model.iterations = static_cast<int>(iter);

    // bias from free support vectors, else midpoint of the feasible interval
    double ub = kInf;
    double lb = -kInf;
    double sum_free = 0.0;
    std::size_t n_free = 0;
    for (std::size_t t = 0; t < n; ++t) {
        const double yg = y[t] * G[t];
        if (alpha[t] >= C) {
            if (y[t] < 0) ub = std::min(ub, yg);
            else lb = std::max(lb, yg);
        } else if (alpha[t] <= 0.0) {
            if (y[t] > 0) ub = std::min(ub, yg);
            else lb = std::max(lb, yg);
        } else {
            ++n_free;
            sum_free += yg;
        }
    }
    const double rho = n_free > 0 ? sum_free / static_cast<double>(n_free) : 0.5 * (ub + lb);
    model.bias = -rho;

    for (std::size_t t = 0; t < n; ++t) {
        if (alpha[t] > 0.0) {
            model.support.push_back(t);
            model.dual.push_back(alpha[t]);
            model.support_labels.push_back(y[t]);
        }
    }
    model.alpha = std::move(alpha);
    return model;
}

double svm_decision(const SvmModel& model, std::span<const double> row) {
    if (row.size() != model.n_train) {
        throw ContractError("svm_predict: kernel row has " + std::to_string(row.size()) + " entries, expected " +
                            std::to_string(model.n_train));
    }
    double f = model.bias;
    for (std::size_t s = 0; s < model.support.size(); ++s) {
        f += model.dual[s] * model.support_labels[s] * row[model.support[s]];
    }
    return f;
}

int svm_predict(const SvmModel& model, std::span<const double> row) { return svm_decision(model, row) >= 0.0 ? 1 : -1; }

double kkt_violation(const SvmModel& model, const Eigen::MatrixXd& K, std::span<const int> labels) {
    const std::size_t n = labels.size();
    std::vector<double> G(n, -1.0);
    for (std::size_t t = 0; t < n; ++t) {
        for (std::size_t s = 0; s < n; ++s) {
            G[t] += labels[t] * labels[s] * K(static_cast<Eigen::Index>(t), static_cast<Eigen::Index>(s)) *
                    model.alpha[s];
        }
    }
    return violation_gap(model.alpha, G, labels, model.C);
}

MulticlassSvm train_multiclass(const Eigen::MatrixXd& K, std::span<const int> classes, double C,
                               const SmoOptions& options) {
    MulticlassSvm model;
    for (int c : classes) {
        if (c < 0) throw ContractError("class indices must be nonnegative");
        model.n_classes = std::max(model.n_classes, c + 1);
    }
    if (model.n_classes < 2) throw DegenerateError("need >= 2 classes to train");
    const int machines = model.n_classes == 2 ? 1 : model.n_classes;
    std::vector<int> y(classes.size());
    for (int c = 0; c < machines; ++c) {
        for (std::size_t i = 0; i < classes.size(); ++i) y[i] = classes[i] == c ? 1 : -1;
        SvmModel m = svm_train(K, y, C, options);
        m.positive_class = c;
        m.negative_class = model.n_classes == 2 ? 1 : -1;
        model.machines.push_back(std::move(m));
    }
    return model;
}

int predict_multiclass(const MulticlassSvm& model, std::span<const double> row) {
    if (model.n_classes == 2) return svm_predict(model.machines.front(), row) > 0 ? 0 : 1;
    int best = 0;
    double best_value = -kInf;
    for (int c = 0; c < model.n_classes; ++c) {
        const double f = svm_decision(model.machines[c], row);
        if (f > best_value) {
            best_value = f;
            best = c;
        }
    }
    return best;
}

}  // namespace mpgk
