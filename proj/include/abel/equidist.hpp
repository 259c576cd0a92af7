#pragma once

#include <optional>
#include <vector>

#include "abel/torus.hpp"

namespace abel {

// |(1/N) sum_j exp(2*pi*i k.x_j)| via compensated summation, with a
// conservative rounding-error bound on the reported magnitude.
struct WeylSum {
    double magnitude = 0;
    double phase = 0;
    double error_bound = 0;
    std::size_t terms = 0;
};

WeylSum weyl_sum(const std::vector<TorusPoint>& points, const CharacterIndex& k);
WeylSum weyl_sum(const std::vector<std::vector<double>>& points, const CharacterIndex& k);

// Exact 1-d star discrepancy of a sorted sample of [0,1):
//   D*_N = 1/(2N) + max_i |x_(i) - (2i-1)/(2N)|.
double star_discrepancy_1d(const std::vector<double>& sorted_points);
Rat star_discrepancy_1d_exact(const std::vector<Rat>& sorted_points);

// Per-character uniform-distribution test: passes at (k, m) when the
// normalized character sum is at most 1/m.
struct UdRow {
    CharacterIndex k;
    double magnitude = 0;
    double bound = 0;
    bool pass = false;
};
std::vector<UdRow> ud_test(const std::vector<std::vector<double>>& prefix, long long k_max,
                           long long m);
std::vector<UdRow> ud_test(const std::vector<TorusPoint>& prefix, long long k_max, long long m);

// Exact decision: the subgroup generated by (x_1, ..., x_d) is dense in T^d
// exactly when 1, x_1, ..., x_d are rationally independent.  When they are
// not, one integer relation m_0 + m_1 x_1 + ... + m_d x_d = 0 is returned.
struct KroneckerResult {
    bool dense = false;
    std::optional<std::vector<Int>> relation; // size d+1, leading entry for the constant 1
};
KroneckerResult kronecker_independence(const std::vector<FormalReal>& xs);

// Greedy enumeration of a finite point set that keeps prefix discrepancy
// small: each step appends the point minimizing the new prefix's star
// discrepancy (coordinate-averaged for d > 1), ties broken by input order.
std::vector<std::size_t> reorder_uniform(const std::vector<TorusPoint>& points);

} // namespace abel
