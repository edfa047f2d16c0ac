// Copyright 2026 The dldsep Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <cstddef>
#include <initializer_list>
#include <span>
#include <vector>

namespace dldsep {

/// Flips the sign of `v` so that its first nonzero coordinate is positive.
/// This fixes one representative of each antipodal pair.
void canonicalize(std::span<double> v);

double dot(std::span<const double> a, std::span<const double> b);

/// A direction on the half unit sphere in R^p, p >= 2.
///
/// Always unit norm and in canonical sign. Construction normalizes the
/// input; a zero or non-finite vector throws std::invalid_argument.
class UnitVector {
 public:
  explicit UnitVector(std::vector<double> coords);
  UnitVector(std::initializer_list<double> coords)
      : UnitVector(std::vector<double>(coords)) {}

  int dimension() const { return static_cast<int>(coords_.size()); }
  std::span<const double> coords() const { return coords_; }
  double operator[](std::size_t i) const { return coords_[i]; }
  double dot(std::span<const double> x) const {
    return dldsep::dot(coords_, x);
  }

  friend bool operator==(const UnitVector&, const UnitVector&) = default;

 private:
  std::vector<double> coords_;
};

/// sqrt(1 - (m'x)^2) with m'x clamped to +-(1 - 1e-12). This is the
/// exponent term of the density; the clamp keeps 1/sin bounded in the mean
/// gradient.
double sin_distance(std::span<const double> mean, std::span<const double> x);

/// Unclamped sqrt(1 - (m'x)^2), used as the directional K-means distance.
/// Lies in [0, 1], is zero exactly for x = +-m, and ignores the sign of x.
double directional_distance(std::span<const double> centre,
                            std::span<const double> x);

/// N points of dimension p stored row-major; every row is a unit vector in
/// canonical sign.
class AngularDataset {
 public:
  explicit AngularDataset(int dimension);
  /// `rows` holds N*p values. Each row is normalized and canonicalized;
  /// zero rows throw std::invalid_argument.
  AngularDataset(int dimension, std::vector<double> rows);

  static AngularDataset from_points(const std::vector<UnitVector>& points);

  int dimension() const { return p_; }
  std::size_t size() const { return p_ == 0 ? 0 : data_.size() / p_; }
  bool empty() const { return data_.empty(); }

  std::span<const double> point(std::size_t n) const {
    return {data_.data() + n * p_, static_cast<std::size_t>(p_)};
  }
  std::span<const double> raw() const { return data_; }

  void push_back(std::span<const double> x);
  void reserve(std::size_t n) { data_.reserve(n * p_); }

 private:
  int p_;
  std::vector<double> data_;
};

}  // namespace dldsep
