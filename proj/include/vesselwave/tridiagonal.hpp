/// @file tridiagonal.hpp
/// @brief Symmetric tridiagonal eigen tools: Sturm-sequence bisection for the
///        smallest eigenvalue and inverse iteration for its eigenvector.
#pragma once

#include <vector>

namespace vesselwave {

/// Number of eigenvalues of the symmetric tridiagonal (diag, off) strictly
/// below lambda, by the classic Sturm sequence count.
int sturm_count(const std::vector<double>& diag, const std::vector<double>& off, double lambda);

/// Smallest eigenvalue by bisection on the Sturm count. Converges to roughly
/// machine precision relative to the matrix scale.
double smallest_eigenvalue(const std::vector<double>& diag, const std::vector<double>& off);

/// Solves (T - shift I) x = rhs with partial pivoting; T symmetric tridiagonal.
/// Safe near-singular (the inverse-iteration use case).
std::vector<double> shifted_tridiagonal_solve(const std::vector<double>& diag,
                                              const std::vector<double>& off, double shift,
                                              const std::vector<double>& rhs);

/// Eigenvector for an isolated eigenvalue lambda by inverse iteration.
/// seed may be empty (constant start) or a shape hint.
std::vector<double> inverse_iteration(const std::vector<double>& diag,
                                      const std::vector<double>& off, double lambda,
                                      std::vector<double> seed = {});

}  // namespace vesselwave
