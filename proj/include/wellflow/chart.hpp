#pragma once

#include <Eigen/Dense>
#include <memory>
#include <vector>

#include "wellflow/trigpoly.hpp"

namespace wellflow {

// Smooth map between tori / charts, drawn from a closed constructor set so
// that every map carries an exact Jacobian rule.
class ChartMap {
 public:
  enum class Kind { Affine, Trig, Projection, Product, Compose };

  static ChartMap affine(Eigen::MatrixXd A, Vec b);
  // integer linear part: an honest torus-to-torus map, pullbacks stay exact
  static ChartMap affine_integer(Eigen::MatrixXi A, Vec b);
  static ChartMap identity(int n);
  static ChartMap translation(Vec b);
  static ChartMap trig(std::vector<TrigPoly> components);
  static ChartMap projection(int source_dim, std::vector<int> keep);
  static ChartMap product(ChartMap f, ChartMap g);
  static ChartMap compose(ChartMap outer, ChartMap inner);

  int source_dim() const { return src_dim_; }
  int target_dim() const { return tgt_dim_; }
  Kind kind() const { return kind_; }
  bool is_integer_affine() const { return kind_ == Kind::Affine && integer_; }

  Vec eval(const Vec& x) const;
  Eigen::MatrixXd jacobian(const Vec& x) const;

  // accessors used by the exact pullback paths
  const Eigen::MatrixXd& affine_matrix() const { return A_; }
  const Eigen::MatrixXi& affine_matrix_int() const { return Ai_; }
  const Vec& affine_shift() const { return b_; }
  const std::vector<int>& kept_indices() const { return keep_; }
  const ChartMap& left() const { return *lhs_; }
  const ChartMap& right() const { return *rhs_; }

 private:
  ChartMap() = default;

  Kind kind_{Kind::Affine};
  int src_dim_ = 0, tgt_dim_ = 0;
  bool integer_ = false;
  Eigen::MatrixXd A_;
  Eigen::MatrixXi Ai_;
  Vec b_;
  std::vector<TrigPoly> comps_;
  std::vector<int> keep_;
  std::shared_ptr<const ChartMap> lhs_, rhs_;
};

}  // namespace wellflow
