#pragma once

#include <Eigen/Dense>

namespace switchsde {

// Minimum-cost perfect matching on a dense square cost matrix (shortest
// augmenting paths with dual potentials).  Returns the optimal total cost.
double solve_assignment(const Eigen::MatrixXd& cost);

// Balanced transportation problem: minimize sum f_ij cost(i, j) over
// couplings of `supply` and `demand` (both nonnegative, equal totals).
// Successive shortest paths on the bipartite graph; exact optimum.
double solve_transport(const Eigen::MatrixXd& cost, const Eigen::VectorXd& supply,
                       const Eigen::VectorXd& demand);

}  // namespace switchsde
