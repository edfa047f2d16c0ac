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

#include "dldsep/directional.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace dldsep {

namespace {

constexpr double kInnerProductGuard = 1.0 - 1e-12;

void normalize_in_place(std::span<double> v) {
  double norm_sq = 0.0;
  for (double c : v) norm_sq += c * c;
  const double norm = std::sqrt(norm_sq);
  if (!(norm > 0.0) || !std::isfinite(norm)) {
    throw std::invalid_argument("direction must be a finite nonzero vector");
  }
  for (double& c : v) c /= norm;
}

}  // namespace

void canonicalize(std::span<double> v) {
  for (double c : v) {
    if (c == 0.0) continue;
    if (c < 0.0) {
      for (double& x : v) x = -x;
    }
    return;
  }
}

double dot(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) {
    throw std::invalid_argument("dimension mismatch");
  }
  double sum = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) sum += a[i] * b[i];
  return sum;
}

UnitVector::UnitVector(std::vector<double> coords)
    : coords_(std::move(coords)) {
  if (coords_.size() < 2) {
    throw std::invalid_argument("UnitVector: dimension must be >= 2");
  }
  normalize_in_place(coords_);
  canonicalize(coords_);
}

double sin_distance(std::span<const double> mean, std::span<const double> x) {
  const double t =
      std::clamp(dot(mean, x), -kInnerProductGuard, kInnerProductGuard);
  return std::sqrt(1.0 - t * t);
}

double directional_distance(std::span<const double> centre,
                            std::span<const double> x) {
  const double t = dot(centre, x);
  return std::sqrt(std::max(0.0, 1.0 - t * t));
}

AngularDataset::AngularDataset(int dimension) : p_(dimension) {
  if (p_ < 2) throw std::invalid_argument("AngularDataset: p must be >= 2");
}

AngularDataset::AngularDataset(int dimension, std::vector<double> rows)
    : p_(dimension), data_(std::move(rows)) {
  if (p_ < 2) throw std::invalid_argument("AngularDataset: p must be >= 2");
  if (data_.size() % p_ != 0) {
    throw std::invalid_argument(
        "AngularDataset: value count is not a multiple of p");
  }
  for (std::size_t off = 0; off < data_.size(); off += p_) {
    std::span<double> row(data_.data() + off, static_cast<std::size_t>(p_));
    normalize_in_place(row);
    canonicalize(row);
  }
}

AngularDataset AngularDataset::from_points(
    const std::vector<UnitVector>& points) {
  if (points.empty()) {
    throw std::invalid_argument("AngularDataset: no points");
  }
  AngularDataset out(points.front().dimension());
  out.reserve(points.size());
  for (const auto& x : points) out.push_back(x.coords());
  return out;
}

void AngularDataset::push_back(std::span<const double> x) {
  if (static_cast<int>(x.size()) != p_) {
    throw std::invalid_argument("AngularDataset: dimension mismatch");
  }
  std::vector<double> row(x.begin(), x.end());
  normalize_in_place(row);
  canonicalize(row);
  data_.insert(data_.end(), row.begin(), row.end());
}

}  // namespace dldsep
