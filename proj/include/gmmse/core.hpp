#pragma once

#include <cmath>
#include <complex>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace gmmse {

// Input/file problems (unreadable, unsupported, empty corpus). CLI exit code 2.
struct DataError : std::runtime_error {
    explicit DataError(const std::string& msg) : std::runtime_error(msg) {}
};

// Broken internal contract (non-finite values, dimension mismatch between
// trained models and config). CLI exit code 3.
struct InvariantError : std::runtime_error {
    explicit InvariantError(const std::string& msg) : std::runtime_error(msg) {}
};

// Dense column-major matrix. Columns hold per-frame data so a frame is
// contiguous in memory.
template <typename T>
struct Mat {
    std::vector<T> data;
    int rows = 0;
    int cols = 0;

    Mat() = default;
    Mat(int r, int c, T init = T{})
        : data(static_cast<size_t>(r) * static_cast<size_t>(c), init), rows(r), cols(c) {}

    T& operator()(int r, int c) { return data[static_cast<size_t>(c) * rows + r]; }
    const T& operator()(int r, int c) const { return data[static_cast<size_t>(c) * rows + r]; }

    T* col(int c) { return data.data() + static_cast<size_t>(c) * rows; }
    const T* col(int c) const { return data.data() + static_cast<size_t>(c) * rows; }

    bool empty() const { return data.empty(); }
};

using RealMat = Mat<double>;
using CplxMat = Mat<std::complex<double>>;

inline bool all_finite(const std::vector<double>& v) {
    for (double x : v)
        if (!std::isfinite(x)) return false;
    return true;
}

inline constexpr double kPi = 3.14159265358979323846;

}  // namespace gmmse
