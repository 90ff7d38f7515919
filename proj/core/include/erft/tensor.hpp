#pragma once

#include <cstddef>
#include <vector>

namespace erft {

// Dense row-major tensor of doubles. Rank is dynamic but in practice
// everything here is rank 1 (frames, rows) or rank 2 (clips laid out
// as frames x dim).
class Tensor {
public:
    Tensor() = default;
    explicit Tensor(std::vector<std::size_t> shape);
    Tensor(std::vector<std::size_t> shape, double fill);
    Tensor(std::vector<std::size_t> shape, std::vector<double> data);

    static Tensor zeros_like(const Tensor& other);

    const std::vector<std::size_t>& shape() const noexcept { return shape_; }
    std::size_t size() const noexcept { return data_.size(); }
    bool empty() const noexcept { return data_.empty(); }

    double* data() noexcept { return data_.data(); }
    const double* data() const noexcept { return data_.data(); }

    double& operator[](std::size_t i) { return data_[i]; }
    double operator[](std::size_t i) const { return data_[i]; }

    // Rank-2 access, row major.
    double& at(std::size_t row, std::size_t col);
    double at(std::size_t row, std::size_t col) const;

    std::vector<double>& raw() noexcept { return data_; }
    const std::vector<double>& raw() const noexcept { return data_; }

    bool same_shape(const Tensor& other) const noexcept { return shape_ == other.shape_; }
    bool all_finite() const noexcept;

    Tensor& operator+=(const Tensor& other);
    Tensor& operator-=(const Tensor& other);
    Tensor& operator*=(double s);

    friend Tensor operator+(Tensor a, const Tensor& b) { a += b; return a; }
    friend Tensor operator-(Tensor a, const Tensor& b) { a -= b; return a; }
    friend Tensor operator*(Tensor a, double s) { a *= s; return a; }
    friend Tensor operator*(double s, Tensor a) { a *= s; return a; }

    bool operator==(const Tensor& other) const = default;

private:
    std::vector<std::size_t> shape_;
    std::vector<double> data_;
};

// Sum of elementwise products. Shapes must match.
double dot(const Tensor& a, const Tensor& b);

// Euclidean distance between two same-shaped tensors.
double l2_distance(const Tensor& a, const Tensor& b);

// Euclidean norm.
double l2_norm(const Tensor& a);

// Mean of squared elements; the flow-matching loss is msq(pred - target).
double mean_square(const Tensor& a);

// a + s * b without a temporary.
void axpy(Tensor& a, double s, const Tensor& b);

// Extract row `row` of a rank-2 tensor as a rank-1 tensor.
Tensor row_of(const Tensor& clip, std::size_t row);

// Overwrite row `row` of a rank-2 tensor.
void set_row(Tensor& clip, std::size_t row, const Tensor& frame);

} // namespace erft
