#pragma once

// Dense row-major tensor of doubles. Networks always operate on a batch:
// the first dimension of any tensor fed to forward() is the sample count.

#include <cstddef>
#include <string>
#include <vector>

namespace moocxfer {

using Shape = std::vector<std::size_t>;

std::size_t shape_product(const Shape& shape);
std::string shape_to_string(const Shape& shape);

struct Tensor {
    Shape shape;
    std::vector<double> values;

    Tensor() = default;
    Tensor(Shape s, std::vector<double> v);
    explicit Tensor(Shape s);  // zero-filled

    static Tensor zeros(Shape s) { return Tensor(std::move(s)); }

    std::size_t size() const { return values.size(); }
    std::size_t rank() const { return shape.size(); }
    std::size_t dim(std::size_t i) const { return shape.at(i); }

    double& operator[](std::size_t i) { return values[i]; }
    double operator[](std::size_t i) const { return values[i]; }

    // First dimension is the batch; returns the per-sample shape.
    Shape sample_shape() const;
    std::size_t batch() const { return shape.empty() ? 0 : shape[0]; }
    std::size_t sample_size() const;

    bool all_finite() const;
    Tensor reshaped(Shape new_shape) const;

    // Rows picked from the batch dimension, in the given order.
    Tensor gather_rows(const std::vector<std::size_t>& rows) const;
};

bool same_shape(const Tensor& a, const Tensor& b);

}  // namespace moocxfer
