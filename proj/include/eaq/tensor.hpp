#pragma once

#include <cassert>
#include <cstddef>
#include <vector>

namespace eaq {

/// Dense row-major matrix of doubles. Rows index channels/features,
/// columns index time, matching the (F, T) trajectory layout used
/// throughout the diffusion stack.
struct Mat {
    int rows = 0;
    int cols = 0;
    std::vector<double> v;

    Mat() = default;
    Mat(int r, int c) : rows(r), cols(c), v(static_cast<std::size_t>(r) * c, 0.0) {}

    static Mat zeros(int r, int c) { return Mat(r, c); }

    double* data() { return v.data(); }
    const double* data() const { return v.data(); }

    double* row(int r) { return v.data() + static_cast<std::size_t>(r) * cols; }
    const double* row(int r) const { return v.data() + static_cast<std::size_t>(r) * cols; }

    double& at(int r, int c) {
        assert(r >= 0 && r < rows && c >= 0 && c < cols);
        return v[static_cast<std::size_t>(r) * cols + c];
    }
    double at(int r, int c) const {
        assert(r >= 0 && r < rows && c >= 0 && c < cols);
        return v[static_cast<std::size_t>(r) * cols + c];
    }

    std::size_t size() const { return v.size(); }

    void set_zero() { std::fill(v.begin(), v.end(), 0.0); }

    /// Reshape without reallocating when the shape already matches.
    /// Contents are unspecified afterwards; callers overwrite in full.
    void ensure(int r, int c) {
        if (rows == r && cols == c) return;
        rows = r;
        cols = c;
        v.assign(static_cast<std::size_t>(r) * c, 0.0);
    }

    bool same_shape(const Mat& o) const { return rows == o.rows && cols == o.cols; }
};

}  // namespace eaq
