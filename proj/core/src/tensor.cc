#include "sonoscope/tensor.h"

#include <algorithm>
#include <cmath>

#include "sonoscope/errors.h"

namespace sonoscope::nn {

std::size_t element_count(const std::vector<int>& dims) {
  std::size_t n = 1;
  for (int d : dims) {
    if (d <= 0) throw ShapeError("tensor dimensions must be positive");
    n *= static_cast<std::size_t>(d);
  }
  return n;
}

template <typename T>
Tensor<T>::Tensor(std::vector<int> dims, T fill)
    : dims_(std::move(dims)), data_(element_count(dims_), fill) {}

template <typename T>
void Tensor<T>::reshape(std::vector<int> dims) {
  if (element_count(dims) != data_.size()) throw ShapeError("reshape changes element count");
  dims_ = std::move(dims);
}

template <typename T>
void Tensor<T>::fill(T v) {
  std::fill(data_.begin(), data_.end(), v);
}

template <typename T>
bool Tensor<T>::all_finite() const {
  return std::all_of(data_.begin(), data_.end(), [](T v) { return std::isfinite(v); });
}

template <typename T>
std::string Tensor<T>::shape_string() const {
  std::string s = "[";
  for (std::size_t i = 0; i < dims_.size(); ++i) {
    if (i) s += "x";
    s += std::to_string(dims_[i]);
  }
  return s + "]";
}

void expect_dims(const std::vector<int>& actual, const std::vector<int>& expected,
                 const char* what) {
  if (actual != expected) {
    auto fmt = [](const std::vector<int>& d) {
      std::string s = "[";
      for (std::size_t i = 0; i < d.size(); ++i) s += (i ? "x" : "") + std::to_string(d[i]);
      return s + "]";
    };
    throw ShapeError(std::string(what) + ": expected " + fmt(expected) + ", got " + fmt(actual));
  }
}

template class Tensor<float>;
template class Tensor<double>;

}  // namespace sonoscope::nn
