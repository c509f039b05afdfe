#pragma once

// Orthogonal Procrustes alignment of one embedding space onto another.
//
// With A (source) and B (target) holding the L2-normalized vectors of the
// shared vocabulary as rows, the rotation minimizing |A Q - B|_F over
// orthogonal Q is Q = U V^T where A^T B = U S V^T. Reflections are allowed.

#include <Eigen/Dense>
#include <Eigen/SVD>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "synodiff/common.hpp"
#include "synodiff/io.hpp"
#include "synodiff/vecspace.hpp"

namespace synodiff {

struct AlignmentMap {
  Eigen::MatrixXd rotation;               // dim x dim
  std::vector<std::string> shared_vocab;  // sorted
  double residual = 0.0;                  // |A Q - B|_F over shared_vocab

  std::size_t dim() const { return static_cast<std::size_t>(rotation.rows()); }

  static AlignmentMap identity(std::size_t dim) {
    return {Eigen::MatrixXd::Identity(static_cast<Eigen::Index>(dim), static_cast<Eigen::Index>(dim)), {}, 0.0};
  }
};

namespace detail {

inline Eigen::RowVectorXd normalized_row(std::span<const double> v) {
  Eigen::RowVectorXd r(static_cast<Eigen::Index>(v.size()));
  const double s = max_abs(v);
  if (!(s > 0.0)) throw DomainError("zero vector cannot be normalized");
  for (std::size_t i = 0; i < v.size(); ++i) r(static_cast<Eigen::Index>(i)) = v[i] / s;
  return r / r.norm();
}

}  // namespace detail

/// Orthogonal Q such that normalize(source) * Q approximates normalize(target).
inline AlignmentMap fit_procrustes(const VectorSpace& source, const VectorSpace& target) {
  if (source.dim() != target.dim()) {
    throw DomainError("fit_procrustes: dimension mismatch (" + std::to_string(source.dim()) + " vs " +
                      std::to_string(target.dim()) + ")");
  }
  auto shared = shared_vocabulary(source, target);
  const auto n = static_cast<Eigen::Index>(shared.size());
  const auto d = static_cast<Eigen::Index>(source.dim());
  if (shared.size() < source.dim()) {
    throw DomainError("fit_procrustes: ill-posed, shared vocabulary of " + std::to_string(shared.size()) +
                      " words is smaller than dimension " + std::to_string(source.dim()));
  }
  Eigen::MatrixXd a(n, d), b(n, d);
  for (Eigen::Index i = 0; i < n; ++i) {
    a.row(i) = detail::normalized_row(source.vector(shared[static_cast<std::size_t>(i)]));
    b.row(i) = detail::normalized_row(target.vector(shared[static_cast<std::size_t>(i)]));
  }
  const Eigen::MatrixXd m = a.transpose() * b;
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(m, Eigen::ComputeFullU | Eigen::ComputeFullV);
  if (svd.info() != Eigen::Success) throw NumericalError("fit_procrustes: SVD did not converge");
  AlignmentMap map;
  map.rotation = svd.matrixU() * svd.matrixV().transpose();
  map.residual = (a * map.rotation - b).norm();
  map.shared_vocab = std::move(shared);
  return map;
}

/// normalize(v) * Q.
inline std::vector<double> apply(const AlignmentMap& map, std::span<const double> v) {
  if (v.size() != map.dim()) {
    throw DomainError("apply: vector dimension " + std::to_string(v.size()) + " but map dimension " +
                      std::to_string(map.dim()));
  }
  const Eigen::RowVectorXd r = detail::normalized_row(v) * map.rotation;
  return {r.data(), r.data() + r.size()};
}

/// Max-norm of Q^T Q - I.
inline double orthogonality_error(const Eigen::MatrixXd& q) {
  return (q.transpose() * q - Eigen::MatrixXd::Identity(q.rows(), q.cols())).cwiseAbs().maxCoeff();
}

// Persistence: "<stem>.mat" holds the rotation as text ("dim dim" header then
// one row per line); "<stem>.json" holds shared_vocab and residual.
inline void save_alignment(const AlignmentMap& map, const std::filesystem::path& stem) {
  std::string mat = std::to_string(map.rotation.rows()) + " " + std::to_string(map.rotation.cols()) + "\n";
  char buf[40];
  for (Eigen::Index i = 0; i < map.rotation.rows(); ++i) {
    for (Eigen::Index j = 0; j < map.rotation.cols(); ++j) {
      std::snprintf(buf, sizeof buf, "%.17g", map.rotation(i, j));
      mat += (j ? " " : "");
      mat += buf;
    }
    mat += "\n";
  }
  auto mat_path = stem;
  mat_path += ".mat";
  auto json_path = stem;
  json_path += ".json";
  io::atomic_write(mat_path, mat);
  nlohmann::json side{{"dim", map.dim()}, {"residual", map.residual}, {"shared_vocab", map.shared_vocab}};
  io::atomic_write(json_path, side.dump(2) + "\n");
}

inline AlignmentMap load_alignment(const std::filesystem::path& stem) {
  auto mat_path = stem;
  mat_path += ".mat";
  auto json_path = stem;
  json_path += ".json";
  std::istringstream in(io::read_file(mat_path));
  Eigen::Index rows = 0, cols = 0;
  if (!(in >> rows >> cols) || rows <= 0 || rows != cols) throw LoadError(mat_path.string() + ": bad matrix header");
  AlignmentMap map;
  map.rotation.resize(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i)
    for (Eigen::Index j = 0; j < cols; ++j)
      if (!(in >> map.rotation(i, j))) throw LoadError(mat_path.string() + ": truncated matrix");
  try {
    const auto side = nlohmann::json::parse(io::read_file(json_path));
    map.residual = side.at("residual").get<double>();
    map.shared_vocab = side.at("shared_vocab").get<std::vector<std::string>>();
  } catch (const nlohmann::json::exception& e) {
    throw LoadError(json_path.string() + ": " + e.what());
  }
  return map;
}

}  // namespace synodiff
