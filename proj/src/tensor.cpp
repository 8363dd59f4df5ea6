#include "tensorreg/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "tensorreg/errors.hpp"

namespace tensorreg {

std::size_t numel(const Shape& shape) {
  std::size_t n = 1;
  for (auto d : shape) n *= d;
  return n;
}

std::string shape_string(const Shape& shape) {
  std::ostringstream os;
  os << '(';
  for (std::size_t i = 0; i < shape.size(); ++i) os << (i ? "," : "") << shape[i];
  os << ')';
  return os.str();
}

std::vector<std::size_t> strides_of(const Shape& shape) {
  std::vector<std::size_t> s(shape.size(), 1);
  for (std::size_t k = shape.size(); k-- > 1;) s[k - 1] = s[k] * shape[k];
  return s;
}

namespace {

void check_shape(const Shape& shape) {
  for (auto d : shape)
    if (d == 0) throw ShapeMismatch("zero extent in shape " + shape_string(shape));
}

void check_finite(const std::vector<double>& data) {
  for (double x : data)
    if (!std::isfinite(x)) throw InvalidValue("tensor entries must be finite");
}

}  // namespace

DenseTensor::DenseTensor() : data_(1, 0.0) {}

DenseTensor::DenseTensor(Shape shape) : shape_(std::move(shape)) {
  check_shape(shape_);
  data_.assign(numel(shape_), 0.0);
}

DenseTensor::DenseTensor(Shape shape, std::vector<double> data)
    : shape_(std::move(shape)), data_(std::move(data)) {
  check_shape(shape_);
  if (data_.size() != numel(shape_))
    throw ShapeMismatch("data length " + std::to_string(data_.size()) + " does not match shape " +
                        shape_string(shape_));
  check_finite(data_);
}

DenseTensor::DenseTensor(Shape shape, const Eigen::Ref<const Eigen::VectorXd>& data)
    : DenseTensor(std::move(shape), std::vector<double>(data.data(), data.data() + data.size())) {}

DenseTensor DenseTensor::scalar(double value) { return DenseTensor(Shape{}, std::vector<double>{value}); }

DenseTensor DenseTensor::filled(Shape shape, double value) {
  auto n = numel(shape);
  return DenseTensor(std::move(shape), std::vector<double>(n, value));
}

std::size_t DenseTensor::dim(std::size_t axis) const {
  if (axis >= shape_.size()) throw InvalidAxes("axis " + std::to_string(axis) + " out of range");
  return shape_[axis];
}

double DenseTensor::scalar_value() const {
  if (data_.size() != 1) throw ShapeMismatch("not a scalar: shape " + shape_string(shape_));
  return data_[0];
}

std::size_t DenseTensor::offset(const std::vector<std::size_t>& index) const {
  if (index.size() != shape_.size()) throw ShapeMismatch("index order mismatch");
  std::size_t off = 0;
  for (std::size_t k = 0; k < index.size(); ++k) {
    if (index[k] >= shape_[k]) throw ShapeMismatch("index out of range");
    off = off * shape_[k] + index[k];
  }
  return off;
}

double DenseTensor::at(const std::vector<std::size_t>& index) const { return data_[offset(index)]; }

double DenseTensor::at(std::initializer_list<std::size_t> index) const {
  return at(std::vector<std::size_t>(index));
}

Eigen::Map<const Eigen::VectorXd> DenseTensor::vec() const {
  return Eigen::Map<const Eigen::VectorXd>(data_.data(), static_cast<Eigen::Index>(data_.size()));
}

double DenseTensor::squared_norm() const { return vec().squaredNorm(); }
double DenseTensor::frobenius_norm() const { return vec().norm(); }

DenseTensor DenseTensor::reshaped(Shape shape) const {
  if (numel(shape) != data_.size()) throw ShapeMismatch("reshape changes element count");
  return DenseTensor(std::move(shape), data_);
}

DenseTensor operator+(const DenseTensor& a, const DenseTensor& b) {
  require_same_shape(a, b, "operator+");
  std::vector<double> out(a.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = a.data_[i] + b.data_[i];
  return DenseTensor(a.shape_, std::move(out));
}

DenseTensor operator-(const DenseTensor& a, const DenseTensor& b) {
  require_same_shape(a, b, "operator-");
  std::vector<double> out(a.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = a.data_[i] - b.data_[i];
  return DenseTensor(a.shape_, std::move(out));
}

DenseTensor operator*(double s, const DenseTensor& a) {
  std::vector<double> out(a.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = s * a.data_[i];
  return DenseTensor(a.shape_, std::move(out));
}

bool operator==(const DenseTensor& a, const DenseTensor& b) {
  return a.shape_ == b.shape_ && a.data_ == b.data_;
}

void require_same_shape(const DenseTensor& a, const DenseTensor& b, const char* where) {
  if (a.shape() != b.shape())
    throw ShapeMismatch(std::string(where) + ": " + shape_string(a.shape()) + " vs " +
                        shape_string(b.shape()));
}

void require_order(const DenseTensor& a, std::size_t order, const char* where) {
  if (a.order() != order)
    throw ShapeMismatch(std::string(where) + ": expected order " + std::to_string(order) +
                        ", got shape " + shape_string(a.shape()));
}

DenseTensor inner(const DenseTensor& a, const DenseTensor& b) {
  const auto& sa = a.shape();
  const auto& sb = b.shape();
  if (sa.size() > sb.size() || !std::equal(sa.begin(), sa.end(), sb.begin()))
    throw ShapeMismatch("inner: " + shape_string(sa) + " is not a prefix of " + shape_string(sb));
  Shape tail(sb.begin() + static_cast<std::ptrdiff_t>(sa.size()), sb.end());
  const std::size_t m = a.size();
  const std::size_t t = numel(tail);
  Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>> bm(
      b.data().data(), static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(t));
  Eigen::VectorXd r = bm.transpose() * a.vec();
  return DenseTensor(std::move(tail), r);
}

double dot(const DenseTensor& a, const DenseTensor& b) {
  require_same_shape(a, b, "dot");
  return a.vec().dot(b.vec());
}

namespace {

std::vector<std::size_t> complete_permutation(const std::vector<std::size_t>& modes, std::size_t order) {
  if (modes.empty() || modes.size() >= order)
    throw InvalidAxes("matricize needs a non-empty proper subset of axes");
  std::vector<bool> used(order, false);
  for (auto m : modes) {
    if (m >= order) throw InvalidAxes("axis " + std::to_string(m) + " out of range");
    if (used[m]) throw InvalidAxes("duplicate axis " + std::to_string(m));
    used[m] = true;
  }
  std::vector<std::size_t> perm = modes;
  for (std::size_t k = 0; k < order; ++k)
    if (!used[k]) perm.push_back(k);
  return perm;
}

using RowMajor = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

}  // namespace

DenseTensor permute(const DenseTensor& a, const std::vector<std::size_t>& perm) {
  const std::size_t n = a.order();
  if (perm.size() != n) throw InvalidAxes("permutation length mismatch");
  std::vector<bool> seen(n, false);
  for (auto p : perm) {
    if (p >= n || seen[p]) throw InvalidAxes("not a permutation");
    seen[p] = true;
  }
  Shape out_shape(n);
  for (std::size_t k = 0; k < n; ++k) out_shape[k] = a.shape()[perm[k]];
  const auto in_strides = strides_of(a.shape());
  std::vector<std::size_t> step(n);
  for (std::size_t k = 0; k < n; ++k) step[k] = in_strides[perm[k]];

  std::vector<double> out(a.size());
  std::vector<std::size_t> idx(n, 0);
  std::size_t src = 0;
  for (std::size_t i = 0; i < out.size(); ++i) {
    out[i] = a[src];
    for (std::size_t k = n; k-- > 0;) {
      if (++idx[k] < out_shape[k]) {
        src += step[k];
        break;
      }
      src -= step[k] * (out_shape[k] - 1);
      idx[k] = 0;
    }
  }
  return DenseTensor(std::move(out_shape), std::move(out));
}

Eigen::MatrixXd matricize(const DenseTensor& a, const std::vector<std::size_t>& modes) {
  auto perm = complete_permutation(modes, a.order());
  DenseTensor p = permute(a, perm);
  std::size_t rows = 1;
  for (auto m : modes) rows *= a.shape()[m];
  const std::size_t cols = a.size() / rows;
  return Eigen::Map<const RowMajor>(p.data().data(), static_cast<Eigen::Index>(rows),
                                    static_cast<Eigen::Index>(cols));
}

DenseTensor dematricize(const Eigen::Ref<const Eigen::MatrixXd>& m, const Shape& shape,
                        const std::vector<std::size_t>& modes) {
  auto perm = complete_permutation(modes, shape.size());
  Shape pshape(shape.size());
  for (std::size_t k = 0; k < shape.size(); ++k) pshape[k] = shape[perm[k]];
  std::size_t rows = 1;
  for (auto k : modes) rows *= shape[k];
  if (static_cast<std::size_t>(m.rows()) != rows || static_cast<std::size_t>(m.cols()) != numel(shape) / rows)
    throw ShapeMismatch("dematricize: matrix size does not match shape " + shape_string(shape));
  RowMajor rm = m;
  DenseTensor p(pshape, std::vector<double>(rm.data(), rm.data() + rm.size()));
  std::vector<std::size_t> inv(perm.size());
  for (std::size_t k = 0; k < perm.size(); ++k) inv[perm[k]] = k;
  return permute(p, inv);
}

Eigen::MatrixXd unfold(const DenseTensor& a, std::size_t mode) { return matricize(a, {mode}); }

DenseTensor mode_multiply(const DenseTensor& a, std::size_t mode, const Eigen::Ref<const Eigen::MatrixXd>& m) {
  if (mode >= a.order()) throw InvalidAxes("mode_multiply: axis out of range");
  const std::size_t d = a.shape()[mode];
  if (static_cast<std::size_t>(m.cols()) != d)
    throw ShapeMismatch("mode_multiply: matrix has " + std::to_string(m.cols()) + " columns, axis has " +
                        std::to_string(d));
  std::size_t pre = 1, post = 1;
  for (std::size_t k = 0; k < mode; ++k) pre *= a.shape()[k];
  for (std::size_t k = mode + 1; k < a.order(); ++k) post *= a.shape()[k];
  const std::size_t r = static_cast<std::size_t>(m.rows());
  Shape out_shape = a.shape();
  out_shape[mode] = r;
  std::vector<double> out(pre * r * post);
  if (r == 0) return DenseTensor(out_shape, std::move(out));
  for (std::size_t p = 0; p < pre; ++p) {
    Eigen::Map<const RowMajor> block(a.data().data() + p * d * post, static_cast<Eigen::Index>(d),
                                     static_cast<Eigen::Index>(post));
    Eigen::Map<RowMajor> dst(out.data() + p * r * post, static_cast<Eigen::Index>(r),
                             static_cast<Eigen::Index>(post));
    dst.noalias() = m * block;
  }
  return DenseTensor(std::move(out_shape), std::move(out));
}

DenseTensor outer3(const Eigen::Ref<const Eigen::VectorXd>& u, const Eigen::Ref<const Eigen::VectorXd>& v,
                   const Eigen::Ref<const Eigen::VectorXd>& w) {
  const auto d1 = static_cast<std::size_t>(u.size()), d2 = static_cast<std::size_t>(v.size()),
             d3 = static_cast<std::size_t>(w.size());
  std::vector<double> out(d1 * d2 * d3);
  std::size_t o = 0;
  for (std::size_t i = 0; i < d1; ++i)
    for (std::size_t j = 0; j < d2; ++j) {
      const double uv = u[static_cast<Eigen::Index>(i)] * v[static_cast<Eigen::Index>(j)];
      for (std::size_t k = 0; k < d3; ++k) out[o++] = uv * w[static_cast<Eigen::Index>(k)];
    }
  return DenseTensor({d1, d2, d3}, std::move(out));
}

DenseTensor outer(const DenseTensor& a, const DenseTensor& b) {
  Shape s = a.shape();
  s.insert(s.end(), b.shape().begin(), b.shape().end());
  std::vector<double> out(a.size() * b.size());
  for (std::size_t i = 0; i < a.size(); ++i)
    for (std::size_t j = 0; j < b.size(); ++j) out[i * b.size() + j] = a[i] * b[j];
  return DenseTensor(std::move(s), std::move(out));
}

Eigen::MatrixXd slice_matrix(const DenseTensor& a, std::size_t fixed, std::size_t index) {
  require_order(a, 3, "slice_matrix");
  if (fixed > 2) throw InvalidAxes("slice axis out of range");
  if (index >= a.shape()[fixed]) throw ShapeMismatch("slice index out of range");
  const std::size_t r = fixed == 0 ? 1 : 0;
  const std::size_t c = fixed == 2 ? 1 : 2;
  const auto st = strides_of(a.shape());
  Eigen::MatrixXd m(a.shape()[r], a.shape()[c]);
  for (std::size_t i = 0; i < a.shape()[r]; ++i)
    for (std::size_t j = 0; j < a.shape()[c]; ++j)
      m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
          a[index * st[fixed] + i * st[r] + j * st[c]];
  return m;
}

Eigen::VectorXd fiber(const DenseTensor& a, std::size_t mode, std::size_t i, std::size_t j) {
  require_order(a, 3, "fiber");
  if (mode > 2) throw InvalidAxes("fiber mode out of range");
  const std::size_t p = mode == 0 ? 1 : 0;
  const std::size_t q = mode == 2 ? 1 : 2;
  if (i >= a.shape()[p] || j >= a.shape()[q]) throw ShapeMismatch("fiber index out of range");
  const auto st = strides_of(a.shape());
  Eigen::VectorXd f(a.shape()[mode]);
  for (std::size_t t = 0; t < a.shape()[mode]; ++t)
    f[static_cast<Eigen::Index>(t)] = a[i * st[p] + j * st[q] + t * st[mode]];
  return f;
}

ProjectorTriple::ProjectorTriple(std::array<Eigen::MatrixXd, 3> factors, double tol)
    : factors_(std::move(factors)) {
  for (std::size_t k = 0; k < 3; ++k) {
    const auto& u = factors_[k];
    if (u.rows() == 0) throw ShapeMismatch("projector factor with zero rows");
    if (u.cols() > u.rows()) throw InvalidValue("projector factor has more columns than rows");
    if (!u.allFinite()) throw InvalidValue("projector factor not finite");
    if (u.cols() == 0) continue;
    const double err = (u.transpose() * u - Eigen::MatrixXd::Identity(u.cols(), u.cols())).cwiseAbs().maxCoeff();
    if (err > tol) throw InvalidValue("projector factor " + std::to_string(k) + " is not orthonormal");
  }
}

ProjectorTriple ProjectorTriple::identity(const Shape& shape) {
  if (shape.size() != 3) throw ShapeMismatch("projector triple needs a third-order shape");
  std::array<Eigen::MatrixXd, 3> f;
  for (std::size_t k = 0; k < 3; ++k) f[k] = Eigen::MatrixXd::Identity(shape[k], shape[k]);
  return ProjectorTriple(std::move(f));
}

ProjectorTriple ProjectorTriple::zero(const Shape& shape) {
  if (shape.size() != 3) throw ShapeMismatch("projector triple needs a third-order shape");
  std::array<Eigen::MatrixXd, 3> f;
  for (std::size_t k = 0; k < 3; ++k) f[k] = Eigen::MatrixXd(shape[k], 0);
  return ProjectorTriple(std::move(f));
}

Eigen::MatrixXd ProjectorTriple::projector(std::size_t k) const {
  return factors_[k] * factors_[k].transpose();
}

Eigen::MatrixXd ProjectorTriple::complement(std::size_t k) const {
  return Eigen::MatrixXd::Identity(factors_[k].rows(), factors_[k].rows()) - projector(k);
}

DenseTensor apply_projector_pattern(const DenseTensor& a, const ProjectorTriple& p,
                                    const std::array<ModeSide, 3>& sides) {
  require_order(a, 3, "apply_projector_pattern");
  if (a.shape() != p.shape())
    throw ShapeMismatch("projector shape " + shape_string(p.shape()) + " vs tensor " + shape_string(a.shape()));
  DenseTensor out = a;
  for (std::size_t k = 0; k < 3; ++k) {
    if (sides[k] == ModeSide::Identity) continue;
    out = mode_multiply(out, k, sides[k] == ModeSide::Range ? p.projector(k) : p.complement(k));
  }
  return out;
}

DenseTensor tucker_project(const DenseTensor& a, const ProjectorTriple& p, TuckerPattern pattern) {
  using S = ModeSide;
  if (pattern == TuckerPattern::Full) return apply_projector_pattern(a, p, {S::Range, S::Range, S::Range});
  // Q = P1P2P3 + P1'P2P3 + P1P2'P3 + P1P2P3' = (I P2 P3) + (P1 P2' P3) + (P1 P2 P3')
  DenseTensor q = apply_projector_pattern(a, p, {S::Identity, S::Range, S::Range}) +
                  apply_projector_pattern(a, p, {S::Range, S::Perp, S::Range}) +
                  apply_projector_pattern(a, p, {S::Range, S::Range, S::Perp});
  if (pattern == TuckerPattern::Q) return q;
  return a - q;
}

}  // namespace tensorreg
