#include "gsfl/tensor.hpp"

#include <cmath>

#include "gsfl/errors.hpp"

namespace gsfl {

std::size_t shape_size(const std::vector<std::size_t>& shape) {
    std::size_t n = 1;
    for (std::size_t d : shape) n *= d;
    return shape.empty() ? 0 : n;
}

Tensor::Tensor(std::vector<std::size_t> shape_in, std::vector<double> data_in)
    : shape(std::move(shape_in)), data(std::move(data_in)) {
    if (data.size() != shape_size(shape)) {
        throw ShapeError("tensor data length does not match shape");
    }
}

Tensor Tensor::zeros(std::vector<std::size_t> shape) {
    const std::size_t n = shape_size(shape);
    Tensor t;
    t.shape = std::move(shape);
    t.data.assign(n, 0.0);
    return t;
}

Tensor Tensor::matrix(std::size_t rows, std::size_t cols) { return zeros({rows, cols}); }

Tensor Tensor::row_major(std::size_t rows, std::size_t cols, std::initializer_list<double> values) {
    return Tensor({rows, cols}, std::vector<double>(values));
}

std::size_t Tensor::rows() const {
    if (shape.size() != 2) throw ShapeError("tensor is not 2-d");
    return shape[0];
}

std::size_t Tensor::cols() const {
    if (shape.size() != 2) throw ShapeError("tensor is not 2-d");
    return shape[1];
}

bool Tensor::all_finite() const {
    for (double v : data) {
        if (!std::isfinite(v)) return false;
    }
    return true;
}

}  // namespace gsfl
