#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <stdexcept>
#include <string>

namespace itrack {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using Index = Eigen::Index;

/// Raised for invalid inputs, malformed files and numerical breakdowns.
/// Solver non-convergence is not an error; it is reported on the solution.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace itrack
