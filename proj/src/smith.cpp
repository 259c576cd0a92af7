#include "abel/smith.hpp"

#include <algorithm>
#include <cstddef>

namespace abel {

namespace {

// True if all entries below and right of the pivot (s,s) are zero.
bool pivot_isolated(const IntMatrix& a, std::size_t s) {
    for (std::size_t i = s + 1; i < a.size(); ++i)
        if (a[i][s] != 0) return false;
    for (std::size_t j = s + 1; j < a[s].size(); ++j)
        if (a[s][j] != 0) return false;
    return true;
}

// Locate the minimal nonzero |entry| in the submatrix at (s,s); returns
// false when the submatrix is all zero.
bool locate_min(const IntMatrix& a, std::size_t s, std::size_t& ir, std::size_t& ic) {
    bool found = false;
    Int best;
    for (std::size_t i = s; i < a.size(); ++i) {
        for (std::size_t j = s; j < a[i].size(); ++j) {
            if (a[i][j] == 0) continue;
            Int v = abs(a[i][j]);
            if (!found || v < best) {
                best = v;
                ir = i;
                ic = j;
                found = true;
            }
        }
    }
    return found;
}

} // namespace

std::vector<Int> smith_normal_form(IntMatrix a) {
    const std::size_t m = a.size();
    const std::size_t n = m == 0 ? 0 : a[0].size();
    std::vector<Int> factors;
    if (m == 0 || n == 0) return factors;

    const std::size_t steps = std::min(m, n);
    for (std::size_t s = 0; s < steps; ++s) {
        std::size_t ir = s, ic = s;
        if (!locate_min(a, s, ir, ic)) break; // all-zero tail: trailing zeros

        while (true) {
            locate_min(a, s, ir, ic);
            std::swap(a[s], a[ir]);
            if (ic != s)
                for (std::size_t i = 0; i < m; ++i) std::swap(a[i][s], a[i][ic]);

            // Clear the pivot row and column by division steps.
            bool dirty = false;
            for (std::size_t i = s + 1; i < m; ++i) {
                if (a[i][s] == 0) continue;
                Int q = a[i][s] / a[s][s];
                for (std::size_t j = s; j < n; ++j) a[i][j] -= q * a[s][j];
                if (a[i][s] != 0) dirty = true;
            }
            for (std::size_t j = s + 1; j < n; ++j) {
                if (a[s][j] == 0) continue;
                Int q = a[s][j] / a[s][s];
                for (std::size_t i = s; i < m; ++i) a[i][j] -= q * a[i][s];
                if (a[s][j] != 0) dirty = true;
            }
            if (dirty) continue;

            // Pivot divides every remaining entry, or fold an offender in.
            bool divides_all = true;
            std::size_t oi = 0, oj = 0;
            for (std::size_t i = s + 1; i < m && divides_all; ++i)
                for (std::size_t j = s + 1; j < n && divides_all; ++j)
                    if (a[i][j] % a[s][s] != 0) {
                        divides_all = false;
                        oi = i;
                        oj = j;
                    }
            if (divides_all) break;
            for (std::size_t j = s; j < n; ++j) a[s][j] += a[oi][j];
            (void)oj;
        }

        if (a[s][s] < 0)
            for (std::size_t j = s; j < n; ++j) a[s][j] = -a[s][j];
    }

    for (std::size_t s = 0; s < steps; ++s) factors.push_back(a[s][s]);
    // Zeros (free directions) go last.
    std::stable_partition(factors.begin(), factors.end(), [](const Int& v) { return v != 0; });
    return factors;
}

} // namespace abel
