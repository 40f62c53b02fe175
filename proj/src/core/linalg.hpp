#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

namespace mw {

// Cyclic Jacobi eigen-decomposition for small dense symmetric matrices
// (k <= ~8 here: Hessians of the potential).  a is row-major k*k and is
// destroyed; eigenvalues come out ascending; vecs (optional) gets the
// eigenvectors as columns.
inline void jacobi_symmetric_eigen(std::vector<double> a, int k, std::vector<double>& values,
                                   std::vector<double>* vecs = nullptr) {
  std::vector<double> v;
  if (vecs) {
    v.assign(k * k, 0.0);
    for (int i = 0; i < k; ++i) v[i * k + i] = 1.0;
  }
  for (int sweep = 0; sweep < 64; ++sweep) {
    double off = 0.0;
    for (int p = 0; p < k; ++p)
      for (int q = p + 1; q < k; ++q) off += a[p * k + q] * a[p * k + q];
    if (off < 1e-30) break;
    for (int p = 0; p < k; ++p) {
      for (int q = p + 1; q < k; ++q) {
        double apq = a[p * k + q];
        if (std::fabs(apq) < 1e-300) continue;
        double theta = (a[q * k + q] - a[p * k + p]) / (2.0 * apq);
        double t = (theta >= 0 ? 1.0 : -1.0) / (std::fabs(theta) + std::sqrt(theta * theta + 1.0));
        double c = 1.0 / std::sqrt(t * t + 1.0), s = t * c;
        for (int i = 0; i < k; ++i) {
          double aip = a[i * k + p], aiq = a[i * k + q];
          a[i * k + p] = c * aip - s * aiq;
          a[i * k + q] = s * aip + c * aiq;
        }
        for (int i = 0; i < k; ++i) {
          double api = a[p * k + i], aqi = a[q * k + i];
          a[p * k + i] = c * api - s * aqi;
          a[q * k + i] = s * api + c * aqi;
        }
        if (vecs) {
          for (int i = 0; i < k; ++i) {
            double vip = v[i * k + p], viq = v[i * k + q];
            v[i * k + p] = c * vip - s * viq;
            v[i * k + q] = s * vip + c * viq;
          }
        }
      }
    }
  }
  values.resize(k);
  std::vector<int> order(k);
  for (int i = 0; i < k; ++i) {
    values[i] = a[i * k + i];
    order[i] = i;
  }
  std::sort(order.begin(), order.end(), [&](int x, int y) { return values[x] < values[y]; });
  std::vector<double> sorted(k);
  for (int i = 0; i < k; ++i) sorted[i] = values[order[i]];
  values = sorted;
  if (vecs) {
    vecs->assign(k * k, 0.0);
    for (int j = 0; j < k; ++j)
      for (int i = 0; i < k; ++i) (*vecs)[i * k + j] = v[i * k + order[j]];
  }
}

inline void symmetric_eigenvalue_range(const std::vector<double>& a, int k, double& lo, double& hi) {
  std::vector<double> vals;
  jacobi_symmetric_eigen(a, k, vals);
  lo = vals.front();
  hi = vals.back();
}

}  // namespace mw
