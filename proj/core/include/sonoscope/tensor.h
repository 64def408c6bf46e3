#ifndef SONOSCOPE_TENSOR_H_
#define SONOSCOPE_TENSOR_H_

#include <cstddef>
#include <initializer_list>
#include <span>
#include <string>
#include <vector>

namespace sonoscope::nn {

// Dense row-major tensor. Activations use the N x C x H x W convention.
template <typename T>
class Tensor {
 public:
  Tensor() = default;
  explicit Tensor(std::vector<int> dims, T fill = T(0));
  Tensor(std::initializer_list<int> dims) : Tensor(std::vector<int>(dims)) {}

  const std::vector<int>& dims() const { return dims_; }
  int dim(std::size_t i) const { return dims_.at(i); }
  std::size_t rank() const { return dims_.size(); }
  std::size_t size() const { return data_.size(); }
  bool empty() const { return data_.empty(); }

  T* data() { return data_.data(); }
  const T* data() const { return data_.data(); }
  std::span<T> values() { return data_; }
  std::span<const T> values() const { return data_; }
  std::vector<T>& storage() { return data_; }
  const std::vector<T>& storage() const { return data_; }

  T& operator[](std::size_t i) { return data_[i]; }
  const T& operator[](std::size_t i) const { return data_[i]; }

  // 4-D accessor.
  T& at(int n, int c, int h, int w) {
    return data_[((static_cast<std::size_t>(n) * dims_[1] + c) * dims_[2] + h) * dims_[3] + w];
  }
  const T& at(int n, int c, int h, int w) const {
    return data_[((static_cast<std::size_t>(n) * dims_[1] + c) * dims_[2] + h) * dims_[3] + w];
  }

  void reshape(std::vector<int> dims);
  void fill(T v);
  bool all_finite() const;
  bool same_shape(const Tensor& other) const { return dims_ == other.dims_; }
  std::string shape_string() const;

 private:
  std::vector<int> dims_;
  std::vector<T> data_;
};

std::size_t element_count(const std::vector<int>& dims);

// Throws ShapeError with `what` when the dims differ.
void expect_dims(const std::vector<int>& actual, const std::vector<int>& expected,
                 const char* what);

extern template class Tensor<float>;
extern template class Tensor<double>;

}  // namespace sonoscope::nn

#endif  // SONOSCOPE_TENSOR_H_
