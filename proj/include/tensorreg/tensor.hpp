#pragma once

#include <array>
#include <cstddef>
#include <initializer_list>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace tensorreg {

using Shape = std::vector<std::size_t>;

std::size_t numel(const Shape& shape);
std::string shape_string(const Shape& shape);
// Strides for the last-index-fastest layout.
std::vector<std::size_t> strides_of(const Shape& shape);

// Dense real tensor with last-index-fastest storage. An empty shape is a
// scalar holding one value. Values never change after construction.
class DenseTensor {
 public:
  DenseTensor();
  explicit DenseTensor(Shape shape);  // zeros
  DenseTensor(Shape shape, std::vector<double> data);
  DenseTensor(Shape shape, const Eigen::Ref<const Eigen::VectorXd>& data);

  static DenseTensor scalar(double value);
  static DenseTensor filled(Shape shape, double value);

  const Shape& shape() const { return shape_; }
  std::size_t order() const { return shape_.size(); }
  std::size_t size() const { return data_.size(); }
  std::size_t dim(std::size_t axis) const;
  bool is_scalar() const { return shape_.empty(); }
  double scalar_value() const;

  const std::vector<double>& data() const { return data_; }
  double operator[](std::size_t i) const { return data_[i]; }
  double at(const std::vector<std::size_t>& index) const;
  double at(std::initializer_list<std::size_t> index) const;
  std::size_t offset(const std::vector<std::size_t>& index) const;

  Eigen::Map<const Eigen::VectorXd> vec() const;
  double frobenius_norm() const;
  double squared_norm() const;
  DenseTensor reshaped(Shape shape) const;

  friend DenseTensor operator+(const DenseTensor& a, const DenseTensor& b);
  friend DenseTensor operator-(const DenseTensor& a, const DenseTensor& b);
  friend DenseTensor operator*(double s, const DenseTensor& a);
  friend bool operator==(const DenseTensor& a, const DenseTensor& b);

 private:
  Shape shape_;
  std::vector<double> data_;
};

void require_same_shape(const DenseTensor& a, const DenseTensor& b, const char* where);
void require_order(const DenseTensor& a, std::size_t order, const char* where);

// Partial inner product: contracts A against the leading axes of B. When the
// shapes are equal the result is a scalar tensor.
DenseTensor inner(const DenseTensor& a, const DenseTensor& b);
double dot(const DenseTensor& a, const DenseTensor& b);

// Rows enumerate the axes in `modes` (given order, last fastest); columns the
// remaining axes in increasing order, last fastest.
Eigen::MatrixXd matricize(const DenseTensor& a, const std::vector<std::size_t>& modes);
DenseTensor dematricize(const Eigen::Ref<const Eigen::MatrixXd>& m, const Shape& shape,
                        const std::vector<std::size_t>& modes);
Eigen::MatrixXd unfold(const DenseTensor& a, std::size_t mode);

DenseTensor permute(const DenseTensor& a, const std::vector<std::size_t>& perm);
// Replaces axis `mode` (length d) by rows(m), contracting with m (rows x d).
DenseTensor mode_multiply(const DenseTensor& a, std::size_t mode,
                          const Eigen::Ref<const Eigen::MatrixXd>& m);

DenseTensor outer3(const Eigen::Ref<const Eigen::VectorXd>& u,
                   const Eigen::Ref<const Eigen::VectorXd>& v,
                   const Eigen::Ref<const Eigen::VectorXd>& w);
DenseTensor outer(const DenseTensor& a, const DenseTensor& b);

// Order-3 cross sections. A slice fixes axis `fixed`; its rows run over the
// smaller remaining axis, its columns over the larger one.
Eigen::MatrixXd slice_matrix(const DenseTensor& a, std::size_t fixed, std::size_t index);
Eigen::VectorXd fiber(const DenseTensor& a, std::size_t mode, std::size_t i, std::size_t j);

class ProjectorTriple {
 public:
  // Each factor must have orthonormal columns; zero columns means P_k = 0.
  explicit ProjectorTriple(std::array<Eigen::MatrixXd, 3> factors, double tol = 1e-10);

  static ProjectorTriple identity(const Shape& shape);
  static ProjectorTriple zero(const Shape& shape);

  const Eigen::MatrixXd& factor(std::size_t k) const { return factors_[k]; }
  std::size_t rank(std::size_t k) const { return static_cast<std::size_t>(factors_[k].cols()); }
  std::size_t dim(std::size_t k) const { return static_cast<std::size_t>(factors_[k].rows()); }
  Shape shape() const { return {dim(0), dim(1), dim(2)}; }
  Eigen::MatrixXd projector(std::size_t k) const;
  Eigen::MatrixXd complement(std::size_t k) const;

 private:
  std::array<Eigen::MatrixXd, 3> factors_;
};

enum class TuckerPattern { Full, Q, QPerp };

// Per-mode choice in a sign pattern: P_k, P_k-perp, or the identity.
enum class ModeSide { Range, Perp, Identity };

DenseTensor apply_projector_pattern(const DenseTensor& a, const ProjectorTriple& p,
                                    const std::array<ModeSide, 3>& sides);
DenseTensor tucker_project(const DenseTensor& a, const ProjectorTriple& p, TuckerPattern pattern);

}  // namespace tensorreg
