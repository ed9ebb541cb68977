#ifndef HMLAB_VEC_HPP
#define HMLAB_VEC_HPP

#include <array>
#include <cassert>
#include <cmath>
#include <initializer_list>

namespace hmlab {

// Small ambient vector (up to 4 components). Targets here live in R^2 or
// R^3; keeping the storage inline avoids heap traffic in the node sweeps.
class Vec {
  public:
    Vec() : n_(0), a_{0, 0, 0, 0} {}
    explicit Vec(int n) : n_(n), a_{0, 0, 0, 0} { assert(n >= 0 && n <= 4); }
    Vec(std::initializer_list<double> xs) : n_(0), a_{0, 0, 0, 0} {
        for (double x : xs) a_[n_++] = x;
    }
    static Vec zero(int n) { return Vec(n); }

    int size() const { return n_; }
    double& operator[](int i) { return a_[i]; }
    double operator[](int i) const { return a_[i]; }
    const double* data() const { return a_.data(); }
    double* data() { return a_.data(); }

    Vec& operator+=(const Vec& o) {
        for (int i = 0; i < n_; ++i) a_[i] += o.a_[i];
        return *this;
    }
    Vec& operator-=(const Vec& o) {
        for (int i = 0; i < n_; ++i) a_[i] -= o.a_[i];
        return *this;
    }
    Vec& operator*=(double s) {
        for (int i = 0; i < n_; ++i) a_[i] *= s;
        return *this;
    }
    friend Vec operator+(Vec a, const Vec& b) { return a += b; }
    friend Vec operator-(Vec a, const Vec& b) { return a -= b; }
    friend Vec operator*(double s, Vec a) { return a *= s; }
    friend Vec operator*(Vec a, double s) { return a *= s; }
    friend Vec operator-(Vec a) { return a *= -1.0; }

    friend double dot(const Vec& a, const Vec& b) {
        double s = 0;
        for (int i = 0; i < a.n_; ++i) s += a.a_[i] * b.a_[i];
        return s;
    }
    double norm() const { return std::sqrt(dot(*this, *this)); }
    double norm2() const { return dot(*this, *this); }

  private:
    int n_;
    std::array<double, 4> a_;
};

// Dense little matrix for tangent-space maps (DPhi in frames, chart metrics).
// Row-major, at most 4x4.
class Mat {
  public:
    Mat() : r_(0), c_(0) { a_.fill(0.0); }
    Mat(int r, int c) : r_(r), c_(c) { a_.fill(0.0); }
    static Mat identity(int n) {
        Mat m(n, n);
        for (int i = 0; i < n; ++i) m(i, i) = 1.0;
        return m;
    }
    int rows() const { return r_; }
    int cols() const { return c_; }
    double& operator()(int i, int j) { return a_[i * c_ + j]; }
    double operator()(int i, int j) const { return a_[i * c_ + j]; }

    Vec apply(const Vec& x) const {
        Vec y(r_);
        for (int i = 0; i < r_; ++i) {
            double s = 0;
            for (int j = 0; j < c_; ++j) s += (*this)(i, j) * x[j];
            y[i] = s;
        }
        return y;
    }
    Mat transposed() const {
        Mat t(c_, r_);
        for (int i = 0; i < r_; ++i)
            for (int j = 0; j < c_; ++j) t(j, i) = (*this)(i, j);
        return t;
    }
    friend Mat operator*(const Mat& a, const Mat& b) {
        Mat m(a.r_, b.c_);
        for (int i = 0; i < a.r_; ++i)
            for (int k = 0; k < a.c_; ++k)
                for (int j = 0; j < b.c_; ++j) m(i, j) += a(i, k) * b(k, j);
        return m;
    }

  private:
    int r_, c_;
    std::array<double, 16> a_;
};

// Gaussian elimination with partial pivoting; fine for the <=4x4 systems
// showing up in chart metric inversion and coupling matrices.
inline Vec solve_small(Mat a, Vec b) {
    const int n = a.rows();
    for (int col = 0; col < n; ++col) {
        int piv = col;
        for (int r = col + 1; r < n; ++r)
            if (std::fabs(a(r, col)) > std::fabs(a(piv, col))) piv = r;
        if (piv != col) {
            for (int j = 0; j < n; ++j) std::swap(a(col, j), a(piv, j));
            std::swap(b[col], b[piv]);
        }
        const double d = a(col, col);
        for (int r = col + 1; r < n; ++r) {
            const double f = a(r, col) / d;
            for (int j = col; j < n; ++j) a(r, j) -= f * a(col, j);
            b[r] -= f * b[col];
        }
    }
    Vec x(n);
    for (int i = n - 1; i >= 0; --i) {
        double s = b[i];
        for (int j = i + 1; j < n; ++j) s -= a(i, j) * x[j];
        x[i] = s / a(i, i);
    }
    return x;
}

}  // namespace hmlab

#endif
