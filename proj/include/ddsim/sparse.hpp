// sparse.hpp - Row-sparse complex matrix for equivalent channel models.
//
// Square, stored as per-row (column, value) lists sorted by column. The
// delay-Doppler builders produce matrices with a fixed nonzero count per
// row and column; the OFDM sparsifier produces variable-degree rows.

#pragma once

#include "ddsim/types.hpp"

#include <span>
#include <vector>

namespace ddsim {

class SparseChannelMatrix {
public:
    struct Entry {
        int col;
        cplx value;
    };

    explicit SparseChannelMatrix(int dim);

    int dim() const { return dim_; }

    // Build phase. finalize() sorts each row by column and rejects
    // duplicate (row, col) entries.
    void add_entry(int row, int col, cplx value);
    void finalize();

    std::span<const Entry> row(int r) const { return rows_[static_cast<size_t>(r)]; }

    // nullptr if (r, c) is structurally zero
    const cplx* find(int r, int c) const;
    void set(int r, int c, cplx value);   // existing entry only (test hook)

    std::vector<cplx> apply(std::span<const cplx> x) const;   // y = H x

    long nonzero_count() const;
    std::vector<int> row_counts() const;
    std::vector<int> column_counts() const;

    std::vector<cplx> to_dense() const;   // row-major dim x dim

private:
    int dim_;
    std::vector<std::vector<Entry>> rows_;
    bool finalized_ = false;
};

// || a - b ||_F over the union of both sparsity patterns; orders must match.
double frobenius_distance(const SparseChannelMatrix& a, const SparseChannelMatrix& b);

double frobenius_norm(const SparseChannelMatrix& a);

} // namespace ddsim
