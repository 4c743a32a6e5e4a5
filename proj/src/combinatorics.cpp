#include "ovconv/combinatorics.hpp"

#include <cmath>

namespace ovconv {

std::vector<std::vector<int>> interval_partitions(int n) {
    if (n < 1) throw InputError("interval_partitions: n must be positive");
    if (n > 12) throw TooLarge("interval_partitions: n capped at 12");
    // bit b of the counter decides whether a block boundary sits after slot b+1
    std::vector<std::vector<int>> out;
    const unsigned total = 1u << (n - 1);
    out.reserve(total);
    for (unsigned mask = 0; mask < total; ++mask) {
        std::vector<int> blocks;
        int len = 1;
        for (int b = 0; b < n - 1; ++b) {
            if (mask & (1u << b)) {
                blocks.push_back(len);
                len = 1;
            } else {
                ++len;
            }
        }
        blocks.push_back(len);
        out.push_back(std::move(blocks));
    }
    return out;
}

BSeries::BSeries(int d, int max_order) : d_(d), max_order_(max_order) {
    if (d < 1 || max_order < 1) throw InputError("BSeries: bad dimensions");
    maps_.resize(max_order);
    std::size_t count = 1;
    for (int k = 1; k <= max_order; ++k) {
        maps_[k - 1].assign(count, Matrix::Zero(d, d));
        count *= std::size_t(d) * d;
    }
}

std::size_t BSeries::flat_index(int order, std::span<const int> units) const {
    if (order < 1 || order > max_order_) throw InputError("BSeries: order out of range");
    if (static_cast<int>(units.size()) != order - 1)
        throw DimensionMismatch("BSeries: unit tuple size must be order-1");
    std::size_t idx = 0;
    for (int u : units) {
        if (u < 0 || u >= d_ * d_) throw InputError("BSeries: unit index out of range");
        idx = idx * (std::size_t(d_) * d_) + std::size_t(u);
    }
    return idx;
}

Matrix& BSeries::entry(int order, std::span<const int> units) {
    return maps_[order - 1][flat_index(order, units)];
}

const Matrix& BSeries::entry(int order, std::span<const int> units) const {
    return maps_[order - 1][flat_index(order, units)];
}

Matrix BSeries::eval(int order, std::span<const Matrix> args) const {
    if (static_cast<int>(args.size()) != order - 1)
        throw DimensionMismatch("BSeries::eval: argument count must be order-1");
    for (const auto& a : args)
        if (a.rows() != d_ || a.cols() != d_)
            throw DimensionMismatch("BSeries::eval: arguments must be d x d");
    const int slots = order - 1;
    Matrix out = Matrix::Zero(d_, d_);
    std::vector<int> units(slots, 0);
    // multilinear expansion over matrix-unit tuples; coefficient of E_ij in b is b(i,j)
    while (true) {
        Complex coeff = 1.0;
        for (int s = 0; s < slots; ++s) coeff *= args[s](units[s] / d_, units[s] % d_);
        if (coeff != Complex(0.0)) out += coeff * entry(order, units);
        int s = slots - 1;
        for (; s >= 0; --s) {
            if (++units[s] < d_ * d_) break;
            units[s] = 0;
        }
        if (s < 0) break;
    }
    return out;
}

Matrix BSeries::eval_partition(std::span<const int> blocks, std::span<const Matrix> args) const {
    // beta^[sigma](b_1..b_{n-1}) = beta^[sigma'](..) b_k beta^[last block](..)
    int n = 0;
    for (int b : blocks) n += b;
    if (static_cast<int>(args.size()) != n - 1)
        throw DimensionMismatch("eval_partition: argument count mismatch");
    Matrix out;
    int pos = 0;  // next unused argument slot
    for (std::size_t bi = 0; bi < blocks.size(); ++bi) {
        const int len = blocks[bi];
        const Matrix factor = eval(len, args.subspan(pos, len - 1));
        if (bi == 0) {
            out = factor;
        } else {
            out = out * args[pos - 1] * factor;
        }
        pos += len;  // len-1 arguments consumed inside the block plus the separator
    }
    return out;
}

MomentSeries moment_series_of(const Realization& r) {
    return [r](int order, std::span<const Matrix> args) {
        if (static_cast<int>(args.size()) != order - 1)
            throw DimensionMismatch("moment series: argument count must be order-1");
        std::vector<Matrix> word;
        word.reserve(order + 1);
        word.push_back(Matrix::Identity(r.d(), r.d()));
        for (const auto& a : args) word.push_back(a);
        word.push_back(Matrix::Identity(r.d(), r.d()));
        return r.moment(word);
    };
}

BSeries moments_to_bcumulants(const MomentSeries& moments, int max_order, int d) {
    BSeries b(d, max_order);
    std::vector<Matrix> units(std::size_t(d) * d);
    for (int u = 0; u < d * d; ++u) {
        units[u] = Matrix::Zero(d, d);
        units[u](u / d, u % d) = 1.0;
    }
    for (int order = 1; order <= max_order; ++order) {
        const auto partitions = interval_partitions(order);
        const int slots = order - 1;
        std::vector<int> idx(slots, 0);
        while (true) {
            std::vector<Matrix> args;
            args.reserve(slots);
            for (int s = 0; s < slots; ++s) args.push_back(units[idx[s]]);
            Matrix value = moments(order, args);
            for (const auto& blocks : partitions) {
                if (blocks.size() == 1) continue;  // the full block is the unknown
                value -= b.eval_partition(blocks, args);
            }
            b.entry(order, idx) = value;
            int s = slots - 1;
            for (; s >= 0; --s) {
                if (++idx[s] < d * d) break;
                idx[s] = 0;
            }
            if (s < 0) break;
        }
    }
    return b;
}

Matrix bcumulants_to_moments(const BSeries& b, int order, std::span<const Matrix> args) {
    Matrix out = Matrix::Zero(b.d(), b.d());
    for (const auto& blocks : interval_partitions(order)) out += b.eval_partition(blocks, args);
    return out;
}

BSeries boolean_power_cumulants(const BSeries& b, const CPMap& alpha) {
    if (alpha.dim() != b.d())
        throw DimensionMismatch("boolean_power_cumulants: base dimension mismatch");
    BSeries out(b.d(), b.max_order());
    const int d2 = b.d() * b.d();
    for (int order = 1; order <= b.max_order(); ++order) {
        const int slots = order - 1;
        std::vector<int> idx(slots, 0);
        while (true) {
            out.entry(order, idx) = alpha.apply(b.entry(order, idx));
            int s = slots - 1;
            for (; s >= 0; --s) {
                if (++idx[s] < d2) break;
                idx[s] = 0;
            }
            if (s < 0) break;
        }
    }
    return out;
}

double lemma_bridge_check(const Realization& r, int n,
                          std::span<const std::vector<Matrix>> tuples) {
    if (n < 1 || n > 6) throw InputError("lemma_bridge_check: n must be in [1, 6]");
    const int d = r.d();
    const BSeries series = moments_to_bcumulants(moment_series_of(r), n, d);
    const Matrix one = Matrix::Identity(d, d);

    // Popa Boolean cumulants from E[x b1 ... x bk] = sum_j E[x b1 .. x bj] B_{k-j}(..)
    std::function<Matrix(std::span<const Matrix>)> popa = [&](std::span<const Matrix> bs) {
        const int k = static_cast<int>(bs.size());
        std::vector<Matrix> word;
        word.push_back(one);
        for (const auto& m : bs) word.push_back(m);
        Matrix value = r.moment(word);  // E[x b1 x b2 ... x bk]
        for (int j = 1; j < k; ++j) {
            std::vector<Matrix> head;
            head.push_back(one);
            for (int t = 0; t < j; ++t) head.push_back(bs[t]);
            value -= r.moment(head) * popa(bs.subspan(j));
        }
        return value;
    };

    double worst = 0.0;
    for (const auto& tuple : tuples) {
        if (static_cast<int>(tuple.size()) != n)
            throw DimensionMismatch("lemma_bridge_check: each tuple must hold n matrices");
        const Matrix lhs = popa(tuple);
        const Matrix rhs =
            series.eval(n, std::span<const Matrix>(tuple).subspan(0, n - 1)) * tuple[n - 1];
        worst = std::max(worst, (lhs - rhs).norm());
    }
    return worst;
}

}  // namespace ovconv
