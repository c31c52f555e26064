#pragma once

// Internal dense-tensor helpers shared by composite, definetti and quantum.

#include <cstddef>
#include <vector>

#include <Eigen/Dense>

#include "finetti/test_space.hpp"

namespace finetti::detail {

using Shape = std::vector<std::size_t>;

std::size_t shape_size(const Shape& shape);

/// Replaces axis `mode` by M.rows(): out[.., r, ..] = sum_e M(r,e) in[.., e, ..].
/// Each output entry is reduced pairwise in a fixed order.
std::vector<double> apply_mode(const std::vector<double>& data, Shape& shape, std::size_t mode,
                               const Eigen::MatrixXd& m);

/// Row t is the indicator of test t.
Eigen::MatrixXd test_indicator_matrix(const TestSpace& space);

/// Advances a mixed-radix counter (last digit fastest); false after the last tuple.
bool next_tuple(std::vector<std::size_t>& tuple, const Shape& radix);

}  // namespace finetti::detail
