#include "leafrec/tensor.hpp"

namespace leafrec {

std::string shape_str(const std::vector<int>& s) {
    std::string out = "[";
    for (std::size_t i = 0; i < s.size(); ++i) {
        if (i) out += ",";
        out += std::to_string(s[i]);
    }
    return out + "]";
}

void expect_shape(const Tensor& t, const std::vector<int>& want, const char* where) {
    if (t.shape != want)
        throw ShapeError(std::string(where) + ": expected shape " + shape_str(want) +
                         ", got " + shape_str(t.shape));
}

}  // namespace leafrec
