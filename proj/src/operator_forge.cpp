#include "hslab/operator_forge.hpp"

#include <cstring>

namespace hslab {

namespace {

enum CacheLabel { kTheta = 1, kQ = 2 };

void check_field(const std::vector<Mat>& field, Index rows) {
  if (field.empty()) throw InvalidArgument("pointwise field is empty");
  const Index d = field.front().rows();
  if (rows != d * static_cast<Index>(field.size())) {
    throw InvalidArgument("pointwise field does not match operator size");
  }
}

}  // namespace

DiscreteOperator assemble_D(const TorusGrid& grid, int m) {
  const int n = grid.size();
  const Mat dx = spectral_derivative(grid);
  DiscreteOperator d{Mat::Zero(2 * m * n, 2 * m * n), n, m, "D"};
  for (int a = 0; a < m; ++a) {
    const Index normal = static_cast<Index>(a) * n;
    const Index tangential = static_cast<Index>(m + a) * n;
    d.entries.block(normal, tangential, n, n) = dx;
    d.entries.block(tangential, normal, n, n) = -dx;
  }
  return d;
}

DiscreteOperator multiplication_operator(const TorusGrid& grid, const std::vector<Mat>& field,
                                         std::string label) {
  const int n = grid.size();
  const Index comps = field.front().rows();
  check_field(field, comps * n);
  DiscreteOperator op{Mat::Zero(comps * n, comps * n), n, static_cast<int>(comps / 2),
                      std::move(label)};
  for (int i = 0; i < n; ++i) {
    for (Index r = 0; r < comps; ++r) {
      for (Index c = 0; c < comps; ++c) op.entries(r * n + i, c * n + i) = field[i](r, c);
    }
  }
  return op;
}

void multiply_pointwise_left(const std::vector<Mat>& field, Mat& x) {
  check_field(field, x.rows());
  const Index n = static_cast<Index>(field.size());
  const Index comps = field.front().rows();
  Mat gathered(comps, x.cols());
  for (Index i = 0; i < n; ++i) {
    for (Index c = 0; c < comps; ++c) gathered.row(c) = x.row(c * n + i);
    gathered = field[i] * gathered;
    for (Index c = 0; c < comps; ++c) x.row(c * n + i) = gathered.row(c);
  }
}

void multiply_pointwise_right(Mat& x, const std::vector<Mat>& field) {
  check_field(field, x.cols());
  const Index n = static_cast<Index>(field.size());
  const Index comps = field.front().rows();
  Mat gathered(x.rows(), comps);
  for (Index i = 0; i < n; ++i) {
    for (Index c = 0; c < comps; ++c) gathered.col(c) = x.col(c * n + i);
    gathered = gathered * field[i];
    for (Index c = 0; c < comps; ++c) x.col(c * n + i) = gathered.col(c);
  }
}

Vec apply_pointwise(const std::vector<Mat>& field, const Vec& v) {
  Mat x = v;
  multiply_pointwise_left(field, x);
  return x.col(0);
}

std::vector<Mat> pointwise_adjoint(const std::vector<Mat>& field) {
  std::vector<Mat> out(field.size());
  for (std::size_t i = 0; i < field.size(); ++i) out[i] = field[i].adjoint();
  return out;
}

namespace {

struct TAProducts {
  Mat direct;
  Mat factored;
};

TAProducts ta_products(const CoefficientField& a) {
  const AuxiliaryPair aux = auxiliary_pair(a);
  const Mat d = assemble_D(a.grid(), a.m()).entries;
  TAProducts p;
  p.direct = d;
  multiply_pointwise_right(p.direct, aux.lower);
  multiply_pointwise_left(aux.upper_inv, p.direct);
  p.factored = d;
  multiply_pointwise_right(p.factored, aux.b);
  multiply_pointwise_right(p.factored, aux.upper);
  multiply_pointwise_left(aux.upper_inv, p.factored);
  return p;
}

}  // namespace

double factorization_defect(const CoefficientField& a) {
  const TAProducts p = ta_products(a);
  return relative_error(p.factored, p.direct);
}

DiscreteOperator assemble_TA(const CoefficientField& a) {
  TAProducts p = ta_products(a);
  const double defect = relative_error(p.factored, p.direct);
  if (!(defect <= 1e-10)) {
    throw Error("assemble_TA: factorization upper^-1 D B upper disagrees by " +
                std::to_string(defect));
  }
  return DiscreteOperator{std::move(p.direct), a.grid().size(), a.m(), "T_A"};
}

ResolventFamily::ResolventFamily(const CoefficientField& a)
    : a_(a), aux_(auxiliary_pair(a)), hash_(a.content_hash()) {
  upper_inv_adj_ = pointwise_adjoint(aux_.upper_inv);
  x_ = assemble_D(a.grid(), a.m()).entries;
  multiply_pointwise_left(pointwise_adjoint(aux_.b), x_);
  x_sq_ = x_ * x_;
}

ResolventFamily::Solve ResolventFamily::apply_theta(double t, const Mat& w) const {
  if (!(t > 0.0)) throw InvalidArgument("Theta_t needs t > 0");
  Mat k = (t * t) * x_sq_;
  k.diagonal().array() += 1.0;
  Eigen::PartialPivLU<Mat> lu(k);
  Solve s;
  s.rcond = lu.rcond();
  if (!(s.rcond > 1e-14)) {
    throw Error("resolvent solve failed at t=" + std::to_string(t) +
                " (I + (tB*D)^2 nearly singular; accretivity violated?)");
  }
  s.result = lu.solve(t * (x_ * w));
  return s;
}

ResolventFamily::Solve ResolventFamily::apply_q(double t, const Mat& w) const {
  Mat y = w;
  multiply_pointwise_left(upper_inv_adj_, y);
  return apply_theta(t, y);
}

std::shared_ptr<const Mat> ResolventFamily::theta(double t) const {
  const OperatorCache::Key key{hash_, t, kTheta};
  if (auto hit = operator_cache().find(key)) return hit;
  auto value = std::make_shared<const Mat>(apply_theta(t, Mat::Identity(dim(), dim())).result);
  return operator_cache().insert(key, std::move(value));
}

std::shared_ptr<const Mat> ResolventFamily::q(double t) const {
  const OperatorCache::Key key{hash_, t, kQ};
  if (auto hit = operator_cache().find(key)) return hit;
  Mat out = *theta(t);
  multiply_pointwise_right(out, upper_inv_adj_);
  return operator_cache().insert(key, std::make_shared<const Mat>(std::move(out)));
}

DiscreteOperator assemble_theta(const CoefficientField& a, double t) {
  ResolventFamily family(a);
  return DiscreteOperator{*family.theta(t), a.grid().size(), a.m(), "Theta_t"};
}

DiscreteOperator assemble_Q(const CoefficientField& a, double t) {
  ResolventFamily family(a);
  return DiscreteOperator{*family.q(t), a.grid().size(), a.m(), "Q_t"};
}

std::size_t OperatorCache::KeyHash::operator()(const Key& k) const {
  std::uint64_t bits;
  std::memcpy(&bits, &k.t, sizeof(bits));
  return static_cast<std::size_t>(k.hash ^ (bits * 0x9e3779b97f4a7c15ULL) ^
                                  (static_cast<std::uint64_t>(k.label) << 56));
}

OperatorCache::OperatorCache(std::size_t byte_budget) : budget_(byte_budget) {}

std::shared_ptr<const Mat> OperatorCache::find(const Key& key) const {
  std::shared_lock lock(mutex_);
  auto it = map_.find(key);
  return it == map_.end() ? nullptr : it->second;
}

std::shared_ptr<const Mat> OperatorCache::insert(const Key& key, std::shared_ptr<const Mat> value) {
  std::unique_lock lock(mutex_);
  auto [it, inserted] = map_.emplace(key, value);
  if (!inserted) return it->second;
  bytes_ += sizeof(cplx) * static_cast<std::size_t>(value->size());
  order_.push_back(key);
  while (bytes_ > budget_ && order_.size() > 1) {
    const Key old = order_.front();
    order_.pop_front();
    auto victim = map_.find(old);
    bytes_ -= sizeof(cplx) * static_cast<std::size_t>(victim->second->size());
    map_.erase(victim);
  }
  return value;
}

void OperatorCache::clear() {
  std::unique_lock lock(mutex_);
  map_.clear();
  order_.clear();
  bytes_ = 0;
}

std::size_t OperatorCache::entries() const {
  std::shared_lock lock(mutex_);
  return map_.size();
}

OperatorCache& operator_cache() {
  static OperatorCache cache(std::size_t{256} << 20);
  return cache;
}

}  // namespace hslab
