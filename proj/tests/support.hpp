#pragma once

#include <filesystem>
#include <fstream>
#include <initializer_list>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "synodiff/random.hpp"
#include "synodiff/vecspace.hpp"

namespace testing_support {

inline synodiff::VectorSpace space(std::initializer_list<std::pair<std::string, std::vector<double>>> rows,
                                   std::string timestamp = "t") {
  std::vector<std::string> words;
  std::vector<double> data;
  std::size_t dim = 0;
  for (const auto& [w, v] : rows) {
    words.push_back(w);
    data.insert(data.end(), v.begin(), v.end());
    dim = v.size();
  }
  return synodiff::VectorSpace(std::move(timestamp), dim, std::move(words), std::move(data));
}

/// n words w000.. with standard normal coordinates.
inline synodiff::VectorSpace random_space(std::size_t n, std::size_t dim, synodiff::Rng& rng, std::string ts = "t") {
  std::vector<std::string> words;
  std::vector<double> data;
  for (std::size_t i = 0; i < n; ++i) {
    char buf[16];
    std::snprintf(buf, sizeof buf, "w%03zu", i);
    words.emplace_back(buf);
    for (std::size_t j = 0; j < dim; ++j) data.push_back(rng.normal());
  }
  return synodiff::VectorSpace(std::move(ts), dim, std::move(words), std::move(data));
}

/// Same words, every row multiplied by r (row-vector convention: v' = v R).
inline synodiff::VectorSpace transformed(const synodiff::VectorSpace& s, const Eigen::MatrixXd& r, std::string ts = "t2") {
  std::vector<std::string> words;
  std::vector<double> data;
  for (std::size_t i = 0; i < s.size(); ++i) {
    words.push_back(s.words()[i]);
    const auto v = s.vector(i);
    const Eigen::Map<const Eigen::RowVectorXd> row(v.data(), static_cast<Eigen::Index>(v.size()));
    const Eigen::RowVectorXd out = row * r;
    data.insert(data.end(), out.data(), out.data() + out.size());
  }
  return synodiff::VectorSpace(std::move(ts), s.dim(), std::move(words), std::move(data));
}

/// Haar-ish random orthogonal matrix from a QR of a Gaussian matrix (test-side).
inline Eigen::MatrixXd orthogonal(std::size_t dim, synodiff::Rng& rng) {
  const auto d = static_cast<Eigen::Index>(dim);
  Eigen::MatrixXd a(d, d);
  for (Eigen::Index i = 0; i < d; ++i)
    for (Eigen::Index j = 0; j < d; ++j) a(i, j) = rng.normal();
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(a);
  return qr.householderQ() * Eigen::MatrixXd::Identity(d, d);
}

class TempDir {
 public:
  TempDir() {
    static int counter = 0;
    path_ = std::filesystem::temp_directory_path() /
            ("synodiff_test_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path write(const std::string& name, const std::string& contents) const {
    const auto p = path_ / name;
    std::ofstream(p) << contents;
    return p;
  }

 private:
  std::filesystem::path path_;
};

}  // namespace testing_support
