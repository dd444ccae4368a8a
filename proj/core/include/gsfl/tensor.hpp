#pragma once

#include <cstddef>
#include <initializer_list>
#include <vector>

namespace gsfl {

// Dense row-major array of doubles. Everything the engine moves around —
// activations, smashed data, weights, gradients — is one of these.
struct Tensor {
    std::vector<std::size_t> shape;
    std::vector<double> data;

    Tensor() = default;
    Tensor(std::vector<std::size_t> shape_in, std::vector<double> data_in);

    static Tensor zeros(std::vector<std::size_t> shape);
    static Tensor matrix(std::size_t rows, std::size_t cols);
    // Convenience for literals in tests and fixtures.
    static Tensor row_major(std::size_t rows, std::size_t cols, std::initializer_list<double> values);

    std::size_t size() const { return data.size(); }
    bool empty() const { return data.empty(); }

    std::size_t rows() const;
    std::size_t cols() const;

    double& at(std::size_t r, std::size_t c) { return data[r * cols() + c]; }
    double at(std::size_t r, std::size_t c) const { return data[r * cols() + c]; }

    bool all_finite() const;

    friend bool operator==(const Tensor&, const Tensor&) = default;
};

// Number of elements implied by a shape.
std::size_t shape_size(const std::vector<std::size_t>& shape);

}  // namespace gsfl
