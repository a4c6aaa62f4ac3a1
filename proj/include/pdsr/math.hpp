#pragma once

#include <span>

#include <Eigen/Core>

#include "pdsr/core.hpp"

namespace pdsr {

/// Cosine similarity of two equal-length vectors. Throws kZeroVector when
/// either operand has zero norm.
template <typename DerivedA, typename DerivedB>
typename DerivedA::Scalar cosine_similarity(const Eigen::MatrixBase<DerivedA>& a,
                                            const Eigen::MatrixBase<DerivedB>& b) {
  using S = typename DerivedA::Scalar;
  if (a.size() != b.size()) {
    throw Error(ErrorCode::kDimensionMismatch, "cosine over vectors of different length");
  }
  const S na = a.norm();
  const S nb = b.norm();
  if (na == S(0) || nb == S(0)) {
    throw Error(ErrorCode::kZeroVector, "cosine similarity with a zero vector");
  }
  return a.dot(b) / (na * nb);
}

/// Element-wise mean accumulated in input order.
template <typename Range, typename Project>
FeatureVector mean_of(const Range& items, Project&& project) {
  FeatureVector sum;
  Eigen::Index n = 0;
  for (const auto& item : items) {
    const auto& v = project(item);
    if (n == 0) {
      sum = v;
    } else {
      if (v.size() != sum.size()) {
        throw Error(ErrorCode::kDimensionMismatch, "mean over vectors of different length");
      }
      sum += v;
    }
    ++n;
  }
  if (n == 0) {
    throw Error(ErrorCode::kInvalidArgument, "mean of an empty set");
  }
  return sum / static_cast<Scalar>(n);
}

}  // namespace pdsr
