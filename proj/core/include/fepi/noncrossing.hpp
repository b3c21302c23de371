#pragma once

#include <span>
#include <vector>

namespace fepi {

/// A set partition of {0, ..., n-1} as a list of blocks (each sorted).
using Partition = std::vector<std::vector<int>>;

/// All non-crossing partitions of an n-element set, n <= 10. Cached.
const std::vector<Partition>& noncrossing_partitions(int n);

/// Free cumulants kappa_1..kappa_n from moments m_0..m_n (m_0 = 1) by Moebius
/// inversion over non-crossing partitions. Index 0 of the result is unused
/// and set to 0.
std::vector<double> free_cumulants_from_moments(std::span<const double> moments);

/// Inverse of free_cumulants_from_moments.
std::vector<double> moments_from_free_cumulants(std::span<const double> cumulants);

/// tau(x_{w_0} x_{w_1} ... x_{w_{m-1}}) for freely independent variables,
/// given each variable's free cumulants (cumulants[v][order]). Only
/// partitions whose blocks use a single variable contribute.
double free_word_moment(std::span<const int> word, const std::vector<std::vector<double>>& cumulants);

}  // namespace fepi
