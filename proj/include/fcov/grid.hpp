#pragma once

#include <Eigen/Dense>

#include <memory>
#include <stdexcept>
#include <vector>

namespace fcov {

// Discretization of the interval I. Every curve and operator lives on one
// grid; the L2 inner product is the weighted sum sum_i f_i g_i w_i.
class Grid {
public:
    Grid(Eigen::VectorXd points, Eigen::VectorXd weights);

    // d evenly spaced points on [0,1] with flat weights 1/d.
    static Grid uniform(int d);

    // Trapezoid-rule weights from an ordered point set.
    static Grid from_points_trapezoid(Eigen::VectorXd points);

    int size() const { return static_cast<int>(data_->points.size()); }
    const Eigen::VectorXd& points() const { return data_->points; }
    const Eigen::VectorXd& weights() const { return data_->weights; }
    const Eigen::VectorXd& sqrt_weights() const { return data_->sqrt_w; }
    const Eigen::VectorXd& inv_sqrt_weights() const { return data_->inv_sqrt_w; }

    bool same_as(const Grid& other) const;

private:
    struct Data {
        Eigen::VectorXd points;
        Eigen::VectorXd weights;
        Eigen::VectorXd sqrt_w;
        Eigen::VectorXd inv_sqrt_w;
    };
    std::shared_ptr<const Data> data_;
};

// A function f in L2(I) sampled on a grid.
struct Curve {
    Curve(Grid grid, Eigen::VectorXd values);

    Grid grid;
    Eigen::VectorXd values;
};

void require_same_grid(const Grid& a, const Grid& b, const char* where);

// Quadrature inner product sum_i f_i g_i w_i.
double inner_product(const Curve& f, const Curve& g);

double l2_norm(const Curve& f);

} // namespace fcov
