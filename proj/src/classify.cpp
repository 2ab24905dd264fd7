#include "fcov/classify.hpp"

#include <algorithm>
#include <cmath>
#include <set>

namespace fcov {

namespace {

void check_labels(const std::vector<std::string>& labels)
{
    if (labels.size() < 2)
        throw std::invalid_argument("train: need at least 2 labels");
    std::set<std::string> seen(labels.begin(), labels.end());
    if (seen.size() != labels.size())
        throw std::invalid_argument("train: duplicate labels");
}

std::vector<double> resolve_priors(const TrainOptions& options, std::size_t k)
{
    if (options.priors.empty())
        return std::vector<double>(k, 1.0 / static_cast<double>(k));
    if (options.priors.size() != k)
        throw std::invalid_argument("train: priors length does not match label count");
    double total = 0.0;
    for (double w : options.priors) {
        if (!(w > 0.0))
            throw std::invalid_argument("train: priors must be positive");
        total += w;
    }
    std::vector<double> out = options.priors;
    for (double& w : out)
        w /= total;
    return out;
}

} // namespace

TrainedClassifier train_with_draws(const std::vector<FunctionalSample>& data, double p_norm,
                                   const std::vector<RademacherDraw>& draws,
                                   const TrainOptions& options)
{
    if (data.empty())
        throw std::invalid_argument("train: empty data");
    if (draws.size() != data.size())
        throw std::invalid_argument("train: one draw per label required");

    TrainedClassifier c;
    c.mode = ClassifierMode::curve;
    c.p_norm = p_norm;
    c.tail = options.tail;
    c.grid = data.front().grid;

    std::vector<std::string> names;
    for (std::size_t j = 0; j < data.size(); ++j) {
        const FunctionalSample& s = data[j];
        require_same_grid(c.grid, s.grid, "train");
        if (!s.label)
            throw std::invalid_argument("train: unlabeled sample");
        if (s.size() < 2)
            throw std::invalid_argument("train: label '" + *s.label + "' has fewer than 2 curves");
        names.push_back(*s.label);

        LabelSummary summary;
        summary.label = *s.label;
        summary.count = s.size();
        summary.mean_curve = sample_mean(s);

        const RademacherDraw& draw = draws[j];
        if (static_cast<int>(draw.signs.size()) != s.size())
            throw std::invalid_argument("train: draw length does not match label size");
        Eigen::VectorXd r = Eigen::VectorXd::Zero(s.dim());
        for (int i = 0; i < s.size(); ++i)
            r += draw.signs[static_cast<std::size_t>(i)] *
                 (s.curves[static_cast<std::size_t>(i)].values - summary.mean_curve->values);
        r /= s.size();
        summary.rademacher_norm = l2_norm(Curve(c.grid, std::move(r)));

        summary.weak_variance = weak_variance_empirical(s, p_norm);
        if (!(summary.weak_variance > 0.0))
            throw std::invalid_argument("train: label '" + *s.label + "' is degenerate (zero variance)");
        c.labels.push_back(std::move(summary));
    }
    check_labels(names);
    c.priors = resolve_priors(options, c.labels.size());
    return c;
}

TrainedClassifier train_with_draws(const std::vector<OperatorSample>& data, double p_norm,
                                   const std::vector<RademacherDraw>& draws,
                                   const TrainOptions& options)
{
    if (data.empty())
        throw std::invalid_argument("train: empty data");
    if (draws.size() != data.size())
        throw std::invalid_argument("train: one draw per label required");

    TrainedClassifier c;
    c.mode = ClassifierMode::op;
    c.p_norm = p_norm;
    c.tail = options.tail;
    c.grid = data.front().grid;

    std::vector<std::string> names;
    for (std::size_t j = 0; j < data.size(); ++j) {
        const OperatorSample& s = data[j];
        require_same_grid(c.grid, s.grid, "train");
        if (!s.label)
            throw std::invalid_argument("train: unlabeled sample");
        if (s.size() < 2)
            throw std::invalid_argument("train: label '" + *s.label + "' has fewer than 2 operators");
        names.push_back(*s.label);

        const int n = s.size();
        const int d = c.grid.size();
        Eigen::MatrixXd mean = Eigen::MatrixXd::Zero(d, d);
        for (const CovOperator& op : s.operators)
            mean += op.kernel();
        mean /= n;

        const RademacherDraw& draw = draws[j];
        if (static_cast<int>(draw.signs.size()) != n)
            throw std::invalid_argument("train: draw length does not match label size");
        Eigen::MatrixXd r = Eigen::MatrixXd::Zero(d, d);
        for (int i = 0; i < n; ++i)
            r += draw.signs[static_cast<std::size_t>(i)] *
                 (s.operators[static_cast<std::size_t>(i)].kernel() - mean);
        r /= n;

        LabelSummary summary;
        summary.label = *s.label;
        summary.count = n;
        summary.mean_operator = CovOperator(c.grid, std::move(mean));
        summary.rademacher_norm = schatten_norm(CovOperator(c.grid, std::move(r)), p_norm);
        summary.weak_variance = weak_variance_gaussian(*summary.mean_operator, p_norm);
        if (!(summary.weak_variance > 0.0))
            throw std::invalid_argument("train: label '" + *s.label + "' is degenerate (zero variance)");
        c.labels.push_back(std::move(summary));
    }
    check_labels(names);
    c.priors = resolve_priors(options, c.labels.size());
    return c;
}

namespace {

template <typename SampleT>
std::vector<RademacherDraw> derive_draws(const std::vector<SampleT>& data, std::uint64_t seed)
{
    std::vector<RademacherDraw> draws;
    draws.reserve(data.size());
    for (std::size_t j = 0; j < data.size(); ++j)
        draws.push_back(RademacherDraw::generate(data[j].size(), split_seed(seed, j)));
    return draws;
}

} // namespace

TrainedClassifier train(const std::vector<FunctionalSample>& data, double p_norm,
                        std::uint64_t seed, const TrainOptions& options)
{
    return train_with_draws(data, p_norm, derive_draws(data, seed), options);
}

TrainedClassifier train(const std::vector<OperatorSample>& data, double p_norm,
                        std::uint64_t seed, const TrainOptions& options)
{
    return train_with_draws(data, p_norm, derive_draws(data, seed), options);
}

namespace {

double log_phi(const LabelSummary& s, double distance, TailKind tail)
{
    // Inside the Rademacher radius a match is a match: clamp at zero so a
    // perfect hit is not penalized.
    const double r = std::max(0.0, distance - s.rademacher_norm);
    const double sigma = s.weak_variance;
    if (tail == TailKind::gaussian)
        return -0.5 * s.count * (r / sigma) * (r / sigma);
    const double u = sigma;
    const double denom = 4.0 * s.rademacher_norm * u + 2.0 * sigma * sigma + 2.0 * r * u / 3.0;
    return -s.count * r * r / denom;
}

Eigen::VectorXd posterior_from_distances(const TrainedClassifier& c,
                                         const std::vector<double>& distances)
{
    const std::size_t k = c.n_labels();
    Eigen::VectorXd logp(static_cast<Eigen::Index>(k));
    for (std::size_t j = 0; j < k; ++j)
        logp[static_cast<Eigen::Index>(j)] =
            log_phi(c.labels[j], distances[j], c.tail) + std::log(c.priors[j]);
    // log-sum-exp normalization; immune to underflow for large counts
    const double top = logp.maxCoeff();
    Eigen::VectorXd p = (logp.array() - top).exp();
    return p / p.sum();
}

} // namespace

Eigen::VectorXd posterior(const TrainedClassifier& c, const Curve& g)
{
    if (c.mode != ClassifierMode::curve)
        throw std::invalid_argument("posterior: classifier was trained on operators");
    require_same_grid(c.grid, g.grid, "posterior");
    std::vector<double> distances;
    distances.reserve(c.n_labels());
    for (const LabelSummary& s : c.labels)
        distances.push_back(l2_norm(Curve(c.grid, s.mean_curve->values - g.values)));
    return posterior_from_distances(c, distances);
}

Eigen::VectorXd posterior(const TrainedClassifier& c, const CovOperator& g)
{
    if (c.mode != ClassifierMode::op)
        throw std::invalid_argument("posterior: classifier was trained on curves");
    require_same_grid(c.grid, g.grid(), "posterior");
    std::vector<double> distances;
    distances.reserve(c.n_labels());
    for (const LabelSummary& s : c.labels)
        distances.push_back(schatten_distance(*s.mean_operator, g, c.p_norm));
    return posterior_from_distances(c, distances);
}

namespace {

Classification pick(const TrainedClassifier& c, Eigen::VectorXd probs)
{
    Classification out;
    out.probabilities = std::move(probs);
    Eigen::Index best = 0;
    for (Eigen::Index j = 1; j < out.probabilities.size(); ++j)
        if (out.probabilities[j] > out.probabilities[best])
            best = j;
    for (Eigen::Index j = 0; j < out.probabilities.size(); ++j)
        if (j != best && out.probabilities[j] == out.probabilities[best])
            out.tie = true;
    out.index = static_cast<std::size_t>(best);
    out.label = c.labels[out.index].label;
    return out;
}

} // namespace

Classification classify(const TrainedClassifier& c, const Curve& g)
{
    return pick(c, posterior(c, g));
}

Classification classify(const TrainedClassifier& c, const CovOperator& g)
{
    return pick(c, posterior(c, g));
}

} // namespace fcov
