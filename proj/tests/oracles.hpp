#pragma once

// Independent reference computations used by the tests. Nothing here calls
// into the code paths it is used to check.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <random>
#include <string>
#include <vector>

namespace oracle {

using Mat = Eigen::MatrixXd;

inline Mat random_matrix(std::mt19937_64& rng, int rows, int cols) {
  std::normal_distribution<double> g(0.0, 1.0);
  Mat m(rows, cols);
  for (int i = 0; i < rows; ++i)
    for (int j = 0; j < cols; ++j) m(i, j) = g(rng);
  return m;
}

// Random orthogonal matrix from the QR factorisation of a Gaussian matrix,
// with column signs fixed by diag(R).
inline Mat random_orthogonal(std::mt19937_64& rng, int n) {
  const Mat g = random_matrix(rng, n, n);
  Eigen::HouseholderQR<Mat> qr(g);
  Mat q = qr.householderQ() * Mat::Identity(n, n);
  const Mat r = qr.matrixQR().triangularView<Eigen::Upper>();
  for (int j = 0; j < n; ++j)
    if (r(j, j) < 0) q.col(j) *= -1.0;
  return q;
}

inline double dot(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

inline double cosine(const std::vector<double>& a, const std::vector<double>& b) {
  const double na = std::sqrt(dot(a, a)), nb = std::sqrt(dot(b, b));
  if (na == 0.0 || nb == 0.0) return 0.0;
  return dot(a, b) / (na * nb);
}

inline std::vector<double> row(const Mat& m, int i) {
  std::vector<double> r(static_cast<std::size_t>(m.cols()));
  for (int j = 0; j < m.cols(); ++j) r[static_cast<std::size_t>(j)] = m(i, j);
  return r;
}

// Brute-force kNN: full scan, stable sort by (similarity desc, id asc).
inline std::vector<std::pair<std::size_t, double>> knn(const Mat& m, std::size_t q, std::size_t k) {
  std::vector<std::pair<std::size_t, double>> all;
  const auto vq = row(m, static_cast<int>(q));
  for (int j = 0; j < m.rows(); ++j)
    if (static_cast<std::size_t>(j) != q) all.emplace_back(j, cosine(vq, row(m, j)));
  std::stable_sort(all.begin(), all.end(), [](auto& a, auto& b) { return a.second > b.second; });
  all.resize(k);
  return all;
}

// Spearman from concordance: for tie-free data, rho = 1 - 6 sum d^2 / (n(n^2-1))
// where d is the rank difference computed by counting smaller elements.
inline double spearman_tie_free(const std::vector<double>& x, const std::vector<double>& y) {
  const std::size_t n = x.size();
  double d2 = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    std::size_t rx = 1, ry = 1;
    for (std::size_t j = 0; j < n; ++j) {
      rx += x[j] < x[i];
      ry += y[j] < y[i];
    }
    const double d = static_cast<double>(rx) - static_cast<double>(ry);
    d2 += d * d;
  }
  const double nn = static_cast<double>(n);
  return 1.0 - 6.0 * d2 / (nn * (nn * nn - 1.0));
}

// SGNS objective log s(u.v) + sum log s(-u_n.v) over explicit vectors.
inline double sgns_objective(const std::vector<double>& v, const std::vector<double>& u,
                             const std::vector<std::vector<double>>& negs) {
  auto logsig = [](double x) { return -std::log1p(std::exp(-x)); };
  double l = logsig(dot(u, v));
  for (const auto& n : negs) l += logsig(-dot(n, v));
  return l;
}

inline std::string temp_path(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() / "lsc_tests";
  std::filesystem::create_directories(dir);
  return (dir / name).string();
}

inline std::string write_file(const std::string& name, const std::string& content) {
  auto p = temp_path(name);
  std::ofstream(p, std::ios::binary) << content;
  return p;
}

}  // namespace oracle
