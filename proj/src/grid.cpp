#include "fcov/grid.hpp"

#include <cmath>

namespace fcov {

Grid::Grid(Eigen::VectorXd points, Eigen::VectorXd weights)
{
    if (points.size() != weights.size())
        throw std::invalid_argument("Grid: points/weights length mismatch");
    if (points.size() < 2)
        throw std::invalid_argument("Grid: need at least 2 points");
    for (Eigen::Index i = 0; i + 1 < points.size(); ++i)
        if (!(points[i] < points[i + 1]))
            throw std::invalid_argument("Grid: points must be strictly increasing");
    for (Eigen::Index i = 0; i < weights.size(); ++i)
        if (!(weights[i] > 0.0) || !std::isfinite(weights[i]))
            throw std::invalid_argument("Grid: weights must be positive and finite");

    auto d = std::make_shared<Data>();
    d->points = std::move(points);
    d->weights = std::move(weights);
    d->sqrt_w = d->weights.array().sqrt();
    d->inv_sqrt_w = d->sqrt_w.array().inverse();
    data_ = std::move(d);
}

Grid Grid::uniform(int d)
{
    if (d < 2)
        throw std::invalid_argument("Grid::uniform: need d >= 2");
    Eigen::VectorXd pts = Eigen::VectorXd::LinSpaced(d, 0.0, 1.0);
    Eigen::VectorXd w = Eigen::VectorXd::Constant(d, 1.0 / d);
    return Grid(std::move(pts), std::move(w));
}

Grid Grid::from_points_trapezoid(Eigen::VectorXd points)
{
    const Eigen::Index d = points.size();
    if (d < 2)
        throw std::invalid_argument("Grid::from_points_trapezoid: need d >= 2");
    Eigen::VectorXd w(d);
    w[0] = 0.5 * (points[1] - points[0]);
    for (Eigen::Index i = 1; i + 1 < d; ++i)
        w[i] = 0.5 * (points[i + 1] - points[i - 1]);
    w[d - 1] = 0.5 * (points[d - 1] - points[d - 2]);
    return Grid(std::move(points), std::move(w));
}

bool Grid::same_as(const Grid& other) const
{
    if (data_ == other.data_)
        return true;
    return data_->points == other.data_->points && data_->weights == other.data_->weights;
}

Curve::Curve(Grid g, Eigen::VectorXd v)
    : grid(std::move(g)), values(std::move(v))
{
    if (values.size() != grid.size())
        throw std::invalid_argument("Curve: values length does not match grid size");
    if (!values.allFinite())
        throw std::invalid_argument("Curve: values must be finite");
}

void require_same_grid(const Grid& a, const Grid& b, const char* where)
{
    if (!a.same_as(b))
        throw std::invalid_argument(std::string(where) + ": grid mismatch");
}

double inner_product(const Curve& f, const Curve& g)
{
    require_same_grid(f.grid, g.grid, "inner_product");
    const Eigen::VectorXd& w = f.grid.weights();
    double acc = 0.0;
    for (Eigen::Index i = 0; i < w.size(); ++i)
        acc += f.values[i] * g.values[i] * w[i];
    return acc;
}

double l2_norm(const Curve& f)
{
    return std::sqrt(inner_product(f, f));
}

} // namespace fcov
