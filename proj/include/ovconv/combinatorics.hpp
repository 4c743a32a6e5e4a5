#pragma once

#include <functional>
#include <span>
#include <vector>

#include "ovconv/algebra.hpp"
#include "ovconv/realization.hpp"

namespace ovconv {

// All interval partitions of [1, n], each given by its ordered block lengths
// (a composition of n). Deterministic order; 2^(n-1) entries. n <= 12.
std::vector<std::vector<int>> interval_partitions(int n);

// A B-series: multilinear maps B^{[k]}: B^{k-1} -> B for 1 <= k <= max_order,
// stored as flat tensors over matrix-unit tuples (d^2 choices per slot).
class BSeries {
public:
    BSeries(int d, int max_order);

    int d() const { return d_; }
    int max_order() const { return max_order_; }

    // tensor entry at a tuple of unit indices (u = i*d + j addresses E_ij)
    Matrix& entry(int order, std::span<const int> units);
    const Matrix& entry(int order, std::span<const int> units) const;

    // multilinear evaluation on arbitrary d x d arguments (args.size() = order-1)
    Matrix eval(int order, std::span<const Matrix> args) const;
    // beta^[sigma] for an interval partition given as ordered block lengths
    Matrix eval_partition(std::span<const int> blocks, std::span<const Matrix> args) const;

private:
    std::size_t flat_index(int order, std::span<const int> units) const;
    int d_, max_order_;
    std::vector<std::vector<Matrix>> maps_;  // maps_[k-1] has (d^2)^(k-1) entries
};

// moment series M^{[k]}(b_1,...,b_{k-1}) = E[x b_1 x ... b_{k-1} x]
using MomentSeries = std::function<Matrix(int order, std::span<const Matrix> args)>;

MomentSeries moment_series_of(const Realization& r);

// Solves M^{[n]} = sum_{sigma in IN(n)} B^{[sigma]} for the B-series, order by
// order, by evaluating the moment series on matrix-unit tuples.
BSeries moments_to_bcumulants(const MomentSeries& moments, int max_order, int d);

// Forward sum over interval partitions: the inverse of the previous map.
Matrix bcumulants_to_moments(const BSeries& b, int order, std::span<const Matrix> args);

// B_{mu^{uplus alpha}}^{[n]} = alpha(B_mu^{[n]})
BSeries boolean_power_cumulants(const BSeries& b, const CPMap& alpha);

// Max residual of B_{n,x}(b_1,...,b_n) = B^{[n]}_x(b_1,...,b_{n-1}) b_n over
// the supplied argument tuples (each tuple holds n matrices).
double lemma_bridge_check(const Realization& r, int n,
                          std::span<const std::vector<Matrix>> tuples);

}  // namespace ovconv
