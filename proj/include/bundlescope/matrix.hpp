#ifndef BUNDLESCOPE_MATRIX_HPP
#define BUNDLESCOPE_MATRIX_HPP

#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "bundlescope/errors.hpp"
#include "bundlescope/float_format.hpp"

namespace bundlescope {

// Dense row-major matrix over float or double. All arithmetic, including
// matmul accumulation, runs in T itself: when T = float the rounding of
// every intermediate is the binary32 rounding under study, never a wider
// accumulator. Stored values must be finite; operations re-check this in
// debug builds.
template <typename T>
class Mat {
public:
    Mat() = default;

    Mat(int rows, int cols) : rows_(rows), cols_(cols), data_(checked_size(rows, cols), T(0)) {}

    Mat(int rows, int cols, std::vector<T> data)
        : rows_(rows), cols_(cols), data_(std::move(data)) {
        if (data_.size() != checked_size(rows, cols))
            throw shape_error("Mat: data length " + std::to_string(data_.size()) +
                              " != rows*cols " + std::to_string(std::size_t(rows) * std::size_t(cols)));
        check_finite("construction");
    }

    static Mat filled(int rows, int cols, T v) {
        Mat m(rows, cols);
        for (auto& x : m.data_) x = v;
        m.check_finite("construction");
        return m;
    }

    static Mat identity(int n) {
        Mat m(n, n);
        for (int i = 0; i < n; ++i) m(i, i) = T(1);
        return m;
    }

    int rows() const { return rows_; }
    int cols() const { return cols_; }
    std::size_t size() const { return data_.size(); }
    bool empty() const { return data_.empty(); }

    T& operator()(int r, int c) { return data_[std::size_t(r) * cols_ + c]; }
    T operator()(int r, int c) const { return data_[std::size_t(r) * cols_ + c]; }

    std::span<T> row(int r) { return {data_.data() + std::size_t(r) * cols_, std::size_t(cols_)}; }
    std::span<const T> row(int r) const {
        return {data_.data() + std::size_t(r) * cols_, std::size_t(cols_)};
    }

    std::vector<T>& data() { return data_; }
    const std::vector<T>& data() const { return data_; }

    void check_finite(const char* where) const {
        for (const T v : data_)
            if (!std::isfinite(v))
                throw data_error(std::string("Mat: non-finite value after ") + where);
    }

    void debug_check_finite(const char* where) const {
#ifndef NDEBUG
        check_finite(where);
#else
        (void)where;
#endif
    }

    bool same_shape(const Mat& o) const { return rows_ == o.rows_ && cols_ == o.cols_; }

private:
    static std::size_t checked_size(int rows, int cols) {
        if (rows < 1 || cols < 1)
            throw shape_error("Mat: dimensions must be positive, got " + std::to_string(rows) +
                              "x" + std::to_string(cols));
        return std::size_t(rows) * std::size_t(cols);
    }

    int rows_ = 0;
    int cols_ = 0;
    std::vector<T> data_;
};

namespace detail {
template <typename T>
void require_same_shape(const Mat<T>& a, const Mat<T>& b, const char* op) {
    if (!a.same_shape(b))
        throw shape_error(std::string(op) + ": shape mismatch " + std::to_string(a.rows()) + "x" +
                          std::to_string(a.cols()) + " vs " + std::to_string(b.rows()) + "x" +
                          std::to_string(b.cols()));
}
} // namespace detail

// C = A * B with accumulation in T (i-k-j loop order, binary32 stays binary32).
template <typename T>
Mat<T> matmul(const Mat<T>& a, const Mat<T>& b) {
    if (a.cols() != b.rows())
        throw shape_error("matmul: inner dimensions " + std::to_string(a.cols()) + " vs " +
                          std::to_string(b.rows()));
    Mat<T> c(a.rows(), b.cols());
    const int n = b.cols();
    for (int i = 0; i < a.rows(); ++i) {
        T* crow = c.row(i).data();
        for (int k = 0; k < a.cols(); ++k) {
            const T aik = a(i, k);
            const T* brow = b.row(k).data();
            for (int j = 0; j < n; ++j) crow[j] += aik * brow[j];
        }
    }
    c.debug_check_finite("matmul");
    return c;
}

template <typename T>
Mat<T> add(const Mat<T>& a, const Mat<T>& b) {
    detail::require_same_shape(a, b, "add");
    Mat<T> c = a;
    for (std::size_t i = 0; i < c.size(); ++i) c.data()[i] += b.data()[i];
    c.debug_check_finite("add");
    return c;
}

template <typename T>
Mat<T> sub(const Mat<T>& a, const Mat<T>& b) {
    detail::require_same_shape(a, b, "sub");
    Mat<T> c = a;
    for (std::size_t i = 0; i < c.size(); ++i) c.data()[i] -= b.data()[i];
    c.debug_check_finite("sub");
    return c;
}

template <typename T>
Mat<T> scale(const Mat<T>& a, T s) {
    Mat<T> c = a;
    for (auto& v : c.data()) v *= s;
    c.debug_check_finite("scale");
    return c;
}

template <typename T>
Mat<T> hadamard(const Mat<T>& a, const Mat<T>& b) {
    detail::require_same_shape(a, b, "hadamard");
    Mat<T> c = a;
    for (std::size_t i = 0; i < c.size(); ++i) c.data()[i] *= b.data()[i];
    c.debug_check_finite("hadamard");
    return c;
}

template <typename T>
Mat<T> transpose(const Mat<T>& a) {
    Mat<T> t(a.cols(), a.rows());
    for (int i = 0; i < a.rows(); ++i)
        for (int j = 0; j < a.cols(); ++j) t(j, i) = a(i, j);
    return t;
}

template <typename T>
Mat<T> relu(const Mat<T>& a) {
    Mat<T> c = a;
    for (auto& v : c.data())
        if (v < T(0)) v = T(0);
    return c;
}

// Adds a bias column vector (features x 1) to every sample row of a
// (samples x features) matrix.
template <typename T>
Mat<T> add_row_bias(const Mat<T>& a, const Mat<T>& bias) {
    if (bias.cols() != 1 || bias.rows() != a.cols())
        throw shape_error("add_row_bias: bias must be cols x 1");
    Mat<T> c = a;
    for (int i = 0; i < c.rows(); ++i) {
        T* r = c.row(i).data();
        for (int j = 0; j < c.cols(); ++j) r[j] += bias(j, 0);
    }
    c.debug_check_finite("add_row_bias");
    return c;
}

template <typename T>
T max_abs(const Mat<T>& a) {
    T m = T(0);
    for (const T v : a.data()) {
        const T av = v < T(0) ? -v : v;
        if (av > m) m = av;
    }
    return m;
}

// Row-wise softmax with max-logit subtraction.
template <typename T>
Mat<T> softmax_rows(const Mat<T>& logits) {
    Mat<T> out = logits;
    for (int i = 0; i < out.rows(); ++i) {
        auto r = out.row(i);
        T mx = r[0];
        for (const T v : r)
            if (v > mx) mx = v;
        T sum = T(0);
        for (auto& v : r) {
            v = std::exp(v - mx);
            sum += v;
        }
        for (auto& v : r) v /= sum;
    }
    out.debug_check_finite("softmax");
    return out;
}

template <typename T>
double frobenius_norm(const Mat<T>& a) {
    double s = 0.0;
    for (const T v : a.data()) s += double(v) * double(v);
    return std::sqrt(s);
}

// Largest coordinate-wise absolute difference of two rows, in binary64.
template <typename T>
double row_inf_distance(const Mat<T>& m, int i, int j) {
    double d = 0.0;
    const auto ri = m.row(i);
    const auto rj = m.row(j);
    for (std::size_t k = 0; k < ri.size(); ++k) {
        const double dk = std::fabs(double(ri[k]) - double(rj[k]));
        if (dk > d) d = dk;
    }
    return d;
}

template <typename T, typename U>
Mat<U> cast_mat(const Mat<T>& a) {
    Mat<U> out(a.rows(), a.cols());
    for (std::size_t i = 0; i < a.size(); ++i) out.data()[i] = static_cast<U>(a.data()[i]);
    return out;
}

} // namespace bundlescope

#endif
