#include "ddsim/sparse.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace ddsim {

SparseChannelMatrix::SparseChannelMatrix(int dim) : dim_(dim), rows_(static_cast<size_t>(dim)) {
    if (dim < 1) throw std::invalid_argument("SparseChannelMatrix: dim must be >= 1");
}

void SparseChannelMatrix::add_entry(int row, int col, cplx value) {
    if (row < 0 || row >= dim_ || col < 0 || col >= dim_)
        throw std::invalid_argument("SparseChannelMatrix: entry out of range");
    rows_[static_cast<size_t>(row)].push_back({col, value});
    finalized_ = false;
}

void SparseChannelMatrix::finalize() {
    for (auto& row : rows_) {
        std::sort(row.begin(), row.end(),
                  [](const Entry& a, const Entry& b) { return a.col < b.col; });
        for (size_t i = 1; i < row.size(); ++i) {
            if (row[i].col == row[i - 1].col)
                throw std::invalid_argument("SparseChannelMatrix: duplicate entry");
        }
    }
    finalized_ = true;
}

const cplx* SparseChannelMatrix::find(int r, int c) const {
    const auto& row = rows_[static_cast<size_t>(r)];
    auto it = std::lower_bound(row.begin(), row.end(), c,
                               [](const Entry& e, int col) { return e.col < col; });
    if (it != row.end() && it->col == c) return &it->value;
    return nullptr;
}

void SparseChannelMatrix::set(int r, int c, cplx value) {
    auto& row = rows_[static_cast<size_t>(r)];
    for (auto& e : row) {
        if (e.col == c) {
            e.value = value;
            return;
        }
    }
    throw std::invalid_argument("SparseChannelMatrix::set: entry not present");
}

std::vector<cplx> SparseChannelMatrix::apply(std::span<const cplx> x) const {
    if (x.size() != static_cast<size_t>(dim_))
        throw std::invalid_argument("SparseChannelMatrix::apply: dimension mismatch");
    std::vector<cplx> y(static_cast<size_t>(dim_));
    for (int r = 0; r < dim_; ++r) {
        cplx acc(0.0, 0.0);
        for (const auto& e : rows_[static_cast<size_t>(r)])
            acc += e.value * x[static_cast<size_t>(e.col)];
        y[static_cast<size_t>(r)] = acc;
    }
    return y;
}

long SparseChannelMatrix::nonzero_count() const {
    long n = 0;
    for (const auto& row : rows_) n += static_cast<long>(row.size());
    return n;
}

std::vector<int> SparseChannelMatrix::row_counts() const {
    std::vector<int> counts(static_cast<size_t>(dim_));
    for (int r = 0; r < dim_; ++r)
        counts[static_cast<size_t>(r)] = static_cast<int>(rows_[static_cast<size_t>(r)].size());
    return counts;
}

std::vector<int> SparseChannelMatrix::column_counts() const {
    std::vector<int> counts(static_cast<size_t>(dim_), 0);
    for (const auto& row : rows_)
        for (const auto& e : row) ++counts[static_cast<size_t>(e.col)];
    return counts;
}

std::vector<cplx> SparseChannelMatrix::to_dense() const {
    std::vector<cplx> dense(static_cast<size_t>(dim_) * static_cast<size_t>(dim_));
    for (int r = 0; r < dim_; ++r)
        for (const auto& e : rows_[static_cast<size_t>(r)])
            dense[static_cast<size_t>(r) * static_cast<size_t>(dim_) +
                  static_cast<size_t>(e.col)] = e.value;
    return dense;
}

double frobenius_distance(const SparseChannelMatrix& a, const SparseChannelMatrix& b) {
    if (a.dim() != b.dim())
        throw std::invalid_argument("frobenius_distance: order mismatch");
    double sum = 0.0;
    for (int r = 0; r < a.dim(); ++r) {
        auto ra = a.row(r);
        auto rb = b.row(r);
        size_t i = 0, j = 0;
        while (i < ra.size() || j < rb.size()) {
            if (j >= rb.size() || (i < ra.size() && ra[i].col < rb[j].col)) {
                sum += std::norm(ra[i].value);
                ++i;
            } else if (i >= ra.size() || rb[j].col < ra[i].col) {
                sum += std::norm(rb[j].value);
                ++j;
            } else {
                sum += std::norm(ra[i].value - rb[j].value);
                ++i;
                ++j;
            }
        }
    }
    return std::sqrt(sum);
}

double frobenius_norm(const SparseChannelMatrix& a) {
    double sum = 0.0;
    for (int r = 0; r < a.dim(); ++r)
        for (const auto& e : a.row(r)) sum += std::norm(e.value);
    return std::sqrt(sum);
}

} // namespace ddsim
