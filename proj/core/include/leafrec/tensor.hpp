#ifndef LEAFREC_TENSOR_HPP
#define LEAFREC_TENSOR_HPP

#include <numeric>
#include <stdexcept>
#include <string>
#include <vector>

namespace leafrec {

struct ShapeError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Dense row-major tensor of doubles.
struct Tensor {
    std::vector<int> shape;
    std::vector<double> data;

    Tensor() = default;
    explicit Tensor(std::vector<int> s) : shape(std::move(s)) {
        data.assign(count(shape), 0.0);
    }
    Tensor(std::vector<int> s, std::vector<double> d)
        : shape(std::move(s)), data(std::move(d)) {
        if (data.size() != count(shape))
            throw ShapeError("tensor: data length does not match shape");
    }

    static std::size_t count(const std::vector<int>& s) {
        std::size_t n = 1;
        for (int e : s) {
            if (e < 0) throw ShapeError("tensor: negative extent");
            n *= static_cast<std::size_t>(e);
        }
        return n;
    }

    int dim(std::size_t i) const { return shape.at(i); }
    std::size_t rank() const { return shape.size(); }
    std::size_t size() const { return data.size(); }
};

std::string shape_str(const std::vector<int>& s);
void expect_shape(const Tensor& t, const std::vector<int>& want, const char* where);

}  // namespace leafrec

#endif
