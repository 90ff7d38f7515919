#include "erft/tensor.hpp"

#include <cmath>
#include <numeric>
#include <stdexcept>

namespace erft {

namespace {

std::size_t element_count(const std::vector<std::size_t>& shape) {
    std::size_t n = 1;
    for (std::size_t d : shape) n *= d;
    return shape.empty() ? 0 : n;
}

} // namespace

Tensor::Tensor(std::vector<std::size_t> shape)
    : shape_(std::move(shape)), data_(element_count(shape_), 0.0) {}

Tensor::Tensor(std::vector<std::size_t> shape, double fill)
    : shape_(std::move(shape)), data_(element_count(shape_), fill) {}

Tensor::Tensor(std::vector<std::size_t> shape, std::vector<double> data)
    : shape_(std::move(shape)), data_(std::move(data)) {
    if (data_.size() != element_count(shape_))
        throw std::invalid_argument("Tensor: data size does not match shape");
}

Tensor Tensor::zeros_like(const Tensor& other) {
    return Tensor(other.shape_);
}

double& Tensor::at(std::size_t row, std::size_t col) {
    if (shape_.size() != 2) throw std::invalid_argument("Tensor::at: rank-2 access on non-matrix");
    if (row >= shape_[0] || col >= shape_[1]) throw std::invalid_argument("Tensor::at: index out of range");
    return data_[row * shape_[1] + col];
}

double Tensor::at(std::size_t row, std::size_t col) const {
    return const_cast<Tensor*>(this)->at(row, col);
}

bool Tensor::all_finite() const noexcept {
    for (double v : data_)
        if (!std::isfinite(v)) return false;
    return true;
}

Tensor& Tensor::operator+=(const Tensor& other) {
    if (!same_shape(other)) throw std::invalid_argument("Tensor::operator+=: shape mismatch");
    for (std::size_t i = 0; i < data_.size(); ++i) data_[i] += other.data_[i];
    return *this;
}

Tensor& Tensor::operator-=(const Tensor& other) {
    if (!same_shape(other)) throw std::invalid_argument("Tensor::operator-=: shape mismatch");
    for (std::size_t i = 0; i < data_.size(); ++i) data_[i] -= other.data_[i];
    return *this;
}

Tensor& Tensor::operator*=(double s) {
    for (double& v : data_) v *= s;
    return *this;
}

double dot(const Tensor& a, const Tensor& b) {
    if (!a.same_shape(b)) throw std::invalid_argument("dot: shape mismatch");
    double acc = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) acc += a[i] * b[i];
    return acc;
}

double l2_distance(const Tensor& a, const Tensor& b) {
    if (!a.same_shape(b)) throw std::invalid_argument("l2_distance: shape mismatch");
    double acc = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double d = a[i] - b[i];
        acc += d * d;
    }
    return std::sqrt(acc);
}

double l2_norm(const Tensor& a) {
    return std::sqrt(dot(a, a));
}

double mean_square(const Tensor& a) {
    if (a.size() == 0) throw std::invalid_argument("mean_square: empty tensor");
    double acc = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) acc += a[i] * a[i];
    return acc / static_cast<double>(a.size());
}

void axpy(Tensor& a, double s, const Tensor& b) {
    if (!a.same_shape(b)) throw std::invalid_argument("axpy: shape mismatch");
    for (std::size_t i = 0; i < a.size(); ++i) a[i] += s * b[i];
}

Tensor row_of(const Tensor& clip, std::size_t row) {
    const auto& sh = clip.shape();
    if (sh.size() != 2) throw std::invalid_argument("row_of: expected rank-2 tensor");
    if (row >= sh[0]) throw std::invalid_argument("row_of: row out of range");
    Tensor out({sh[1]});
    for (std::size_t c = 0; c < sh[1]; ++c) out[c] = clip[row * sh[1] + c];
    return out;
}

void set_row(Tensor& clip, std::size_t row, const Tensor& frame) {
    const auto& sh = clip.shape();
    if (sh.size() != 2) throw std::invalid_argument("set_row: expected rank-2 tensor");
    if (row >= sh[0]) throw std::invalid_argument("set_row: row out of range");
    if (frame.size() != sh[1]) throw std::invalid_argument("set_row: frame size mismatch");
    for (std::size_t c = 0; c < sh[1]; ++c) clip.raw()[row * sh[1] + c] = frame[c];
}

} // namespace erft
