#include "wellflow/chart.hpp"

#include <stdexcept>

namespace wellflow {

ChartMap ChartMap::affine(Eigen::MatrixXd A, Vec b) {
  if (A.rows() != b.size())
    throw std::invalid_argument("ChartMap::affine: A rows != b size");
  ChartMap m;
  m.kind_ = Kind::Affine;
  m.src_dim_ = static_cast<int>(A.cols());
  m.tgt_dim_ = static_cast<int>(A.rows());
  m.A_ = std::move(A);
  m.b_ = std::move(b);
  return m;
}

ChartMap ChartMap::affine_integer(Eigen::MatrixXi A, Vec b) {
  ChartMap m = affine(A.cast<double>(), std::move(b));
  m.Ai_ = std::move(A);
  m.integer_ = true;
  return m;
}

ChartMap ChartMap::identity(int n) {
  return affine_integer(Eigen::MatrixXi::Identity(n, n), Vec::Zero(n));
}

ChartMap ChartMap::translation(Vec b) {
  const int n = static_cast<int>(b.size());
  return affine_integer(Eigen::MatrixXi::Identity(n, n), std::move(b));
}

ChartMap ChartMap::trig(std::vector<TrigPoly> components) {
  if (components.empty())
    throw std::invalid_argument("ChartMap::trig: no components");
  ChartMap m;
  m.kind_ = Kind::Trig;
  m.src_dim_ = components.front().dim();
  m.tgt_dim_ = static_cast<int>(components.size());
  for (const auto& c : components)
    if (c.dim() != m.src_dim_)
      throw std::invalid_argument("ChartMap::trig: mixed dimensions");
  m.comps_ = std::move(components);
  return m;
}

ChartMap ChartMap::projection(int source_dim, std::vector<int> keep) {
  ChartMap m;
  m.kind_ = Kind::Projection;
  m.src_dim_ = source_dim;
  m.tgt_dim_ = static_cast<int>(keep.size());
  for (int i : keep)
    if (i < 0 || i >= source_dim)
      throw std::invalid_argument("ChartMap::projection: index out of range");
  m.keep_ = std::move(keep);
  return m;
}

ChartMap ChartMap::product(ChartMap f, ChartMap g) {
  ChartMap m;
  m.kind_ = Kind::Product;
  m.src_dim_ = f.src_dim_ + g.src_dim_;
  m.tgt_dim_ = f.tgt_dim_ + g.tgt_dim_;
  m.lhs_ = std::make_shared<ChartMap>(std::move(f));
  m.rhs_ = std::make_shared<ChartMap>(std::move(g));
  return m;
}

ChartMap ChartMap::compose(ChartMap outer, ChartMap inner) {
  if (outer.src_dim_ != inner.tgt_dim_)
    throw std::invalid_argument("ChartMap::compose: rank mismatch");
  ChartMap m;
  m.kind_ = Kind::Compose;
  m.src_dim_ = inner.src_dim_;
  m.tgt_dim_ = outer.tgt_dim_;
  m.lhs_ = std::make_shared<ChartMap>(std::move(outer));
  m.rhs_ = std::make_shared<ChartMap>(std::move(inner));
  return m;
}

Vec ChartMap::eval(const Vec& x) const {
  if (x.size() != src_dim_)
    throw std::invalid_argument("ChartMap::eval: dimension mismatch");
  switch (kind_) {
    case Kind::Affine:
      return A_ * x + b_;
    case Kind::Trig: {
      Vec y(tgt_dim_);
      for (int i = 0; i < tgt_dim_; ++i) y[i] = comps_[i].eval(x);
      return y;
    }
    case Kind::Projection: {
      Vec y(tgt_dim_);
      for (int i = 0; i < tgt_dim_; ++i) y[i] = x[keep_[i]];
      return y;
    }
    case Kind::Product: {
      Vec y(tgt_dim_);
      y.head(lhs_->tgt_dim_) = lhs_->eval(x.head(lhs_->src_dim_));
      y.tail(rhs_->tgt_dim_) = rhs_->eval(x.tail(rhs_->src_dim_));
      return y;
    }
    case Kind::Compose:
      return lhs_->eval(rhs_->eval(x));
  }
  throw std::logic_error("ChartMap::eval: unreachable");
}

Eigen::MatrixXd ChartMap::jacobian(const Vec& x) const {
  switch (kind_) {
    case Kind::Affine:
      return A_;
    case Kind::Trig: {
      Eigen::MatrixXd J(tgt_dim_, src_dim_);
      for (int i = 0; i < tgt_dim_; ++i)
        for (int j = 0; j < src_dim_; ++j) J(i, j) = comps_[i].deriv(j).eval(x);
      return J;
    }
    case Kind::Projection: {
      Eigen::MatrixXd J = Eigen::MatrixXd::Zero(tgt_dim_, src_dim_);
      for (int i = 0; i < tgt_dim_; ++i) J(i, keep_[i]) = 1.0;
      return J;
    }
    case Kind::Product: {
      Eigen::MatrixXd J = Eigen::MatrixXd::Zero(tgt_dim_, src_dim_);
      J.topLeftCorner(lhs_->tgt_dim_, lhs_->src_dim_) =
          lhs_->jacobian(x.head(lhs_->src_dim_));
      J.bottomRightCorner(rhs_->tgt_dim_, rhs_->src_dim_) =
          rhs_->jacobian(x.tail(rhs_->src_dim_));
      return J;
    }
    case Kind::Compose: {
      const Vec mid = rhs_->eval(x);
      return lhs_->jacobian(mid) * rhs_->jacobian(x);
    }
  }
  throw std::logic_error("ChartMap::jacobian: unreachable");
}

}  // namespace wellflow
