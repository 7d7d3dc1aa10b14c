#include "moocxfer/tensor.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

namespace moocxfer {

std::size_t shape_product(const Shape& shape) {
    std::size_t p = 1;
    for (std::size_t d : shape) p *= d;
    return p;
}

std::string shape_to_string(const Shape& shape) {
    std::ostringstream os;
    os << "[";
    for (std::size_t i = 0; i < shape.size(); ++i) {
        if (i) os << "x";
        os << shape[i];
    }
    os << "]";
    return os.str();
}

Tensor::Tensor(Shape s, std::vector<double> v) : shape(std::move(s)), values(std::move(v)) {
    if (shape_product(shape) != values.size()) {
        throw std::invalid_argument("tensor value count " + std::to_string(values.size()) +
                                    " does not match shape " + shape_to_string(shape));
    }
}

Tensor::Tensor(Shape s) : shape(std::move(s)) {
    values.assign(shape_product(shape), 0.0);
}

Shape Tensor::sample_shape() const {
    if (shape.empty()) return {};
    return Shape(shape.begin() + 1, shape.end());
}

std::size_t Tensor::sample_size() const {
    return batch() == 0 ? 0 : size() / batch();
}

bool Tensor::all_finite() const {
    for (double v : values) {
        if (!std::isfinite(v)) return false;
    }
    return true;
}

Tensor Tensor::reshaped(Shape new_shape) const {
    if (shape_product(new_shape) != values.size()) {
        throw std::invalid_argument("cannot reshape " + shape_to_string(shape) + " to " +
                                    shape_to_string(new_shape));
    }
    return Tensor(std::move(new_shape), values);
}

Tensor Tensor::gather_rows(const std::vector<std::size_t>& rows) const {
    if (shape.empty()) throw std::invalid_argument("gather_rows on rank-0 tensor");
    const std::size_t stride = sample_size();
    Shape out_shape = shape;
    out_shape[0] = rows.size();
    Tensor out(std::move(out_shape));
    for (std::size_t r = 0; r < rows.size(); ++r) {
        if (rows[r] >= batch()) throw std::out_of_range("gather_rows: row index out of range");
        const double* src = values.data() + rows[r] * stride;
        double* dst = out.values.data() + r * stride;
        for (std::size_t i = 0; i < stride; ++i) dst[i] = src[i];
    }
    return out;
}

bool same_shape(const Tensor& a, const Tensor& b) { return a.shape == b.shape; }

}  // namespace moocxfer
