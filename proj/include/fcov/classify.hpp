#pragma once

#include "fcov/stats.hpp"

#include <optional>
#include <string>
#include <vector>

namespace fcov {

// exp(-n r^2 / 2 sigma^2) versus the full concentration denominator
// 4 ||R|| U + 2 sigma^2 + 2 r U / 3 with U = sigma. The Gaussian surrogate
// classifies better in practice and is the default.
enum class TailKind { gaussian, full };

struct LabelSummary {
    std::string label;
    int count = 0;
    double rademacher_norm = 0.0;
    double weak_variance = 0.0; // sigma_hat_j
    std::optional<Curve> mean_curve;       // curve mode
    std::optional<CovOperator> mean_operator; // operator mode
};

enum class ClassifierMode { curve, op };

struct TrainedClassifier {
    ClassifierMode mode = ClassifierMode::curve;
    double p_norm = 1.0;
    TailKind tail = TailKind::gaussian;
    Grid grid = Grid::uniform(2);
    std::vector<LabelSummary> labels;
    // Uniform by default; class-weighted priors for imbalanced corpora.
    std::vector<double> priors;

    std::size_t n_labels() const { return labels.size(); }
};

struct TrainOptions {
    TailKind tail = TailKind::gaussian;
    std::vector<double> priors; // empty = uniform
};

// Curve-level training: one FunctionalSample per label.
TrainedClassifier train(const std::vector<FunctionalSample>& data, double p_norm,
                        std::uint64_t seed, const TrainOptions& options = {});

// Operator-level training: one OperatorSample per label.
TrainedClassifier train(const std::vector<OperatorSample>& data, double p_norm,
                        std::uint64_t seed, const TrainOptions& options = {});

// Variants with caller-supplied sign vectors (one draw per label).
TrainedClassifier train_with_draws(const std::vector<FunctionalSample>& data, double p_norm,
                                   const std::vector<RademacherDraw>& draws,
                                   const TrainOptions& options = {});
TrainedClassifier train_with_draws(const std::vector<OperatorSample>& data, double p_norm,
                                   const std::vector<RademacherDraw>& draws,
                                   const TrainOptions& options = {});

// phi_j = exp{ -(n_j/2) ((D_j - ||R_j||)_+ / sigma_j)^2 } normalized over
// labels, computed in the log domain. D_j is the L2 distance to the label
// mean curve, or the p-Schatten distance to the label mean operator.
Eigen::VectorXd posterior(const TrainedClassifier& c, const Curve& g);
Eigen::VectorXd posterior(const TrainedClassifier& c, const CovOperator& g);

struct Classification {
    std::size_t index = 0;
    std::string label;
    bool tie = false; // argmax shared; first label in order wins
    Eigen::VectorXd probabilities;
};

Classification classify(const TrainedClassifier& c, const Curve& g);
Classification classify(const TrainedClassifier& c, const CovOperator& g);

} // namespace fcov
