#pragma once

// Immutable time-stamped embedding spaces.
//
// Text format (word2vec style):
//   <count> <dim>
//   <word> <f1> ... <fdim>
// Fields are single-space separated; floats may use scientific notation.

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <istream>
#include <map>
#include <mutex>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "synodiff/common.hpp"
#include "synodiff/io.hpp"

namespace synodiff {

namespace detail {

// Largest absolute component; used to rescale before forming dot products so
// that huge finite inputs never overflow.
inline double max_abs(std::span<const double> x) {
  double m = 0.0;
  for (double v : x) m = std::max(m, std::abs(v));
  return m;
}

}  // namespace detail

/// 1 - <x,y>/(|x||y|), clamped to [0, 2].
inline double cosine_distance(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) {
    throw DomainError("cosine_distance: dimension mismatch (" + std::to_string(x.size()) +
                      " vs " + std::to_string(y.size()) + ")");
  }
  const double sx = detail::max_abs(x);
  const double sy = detail::max_abs(y);
  if (!(sx > 0.0) || !(sy > 0.0)) throw DomainError("cosine_distance: zero vector");
  if (!std::isfinite(sx) || !std::isfinite(sy)) throw DomainError("cosine_distance: non-finite vector");
  double dot = 0.0, nx = 0.0, ny = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double a = x[i] / sx;
    const double b = y[i] / sy;
    dot += a * b;
    nx += a * a;
    ny += b * b;
  }
  const double d = 1.0 - dot / std::sqrt(nx * ny);
  return std::clamp(d, 0.0, 2.0);
}

struct Neighborhood {
  std::string word;
  std::size_t k = 0;
  std::vector<std::string> neighbors;  // ascending distance, ties lexicographic
};

class VectorSpace {
 public:
  VectorSpace() = default;

  /// Validates every invariant; throws LoadError listing all violations.
  VectorSpace(std::string timestamp, std::size_t dim, std::vector<std::string> words,
              std::vector<double> data)
      : timestamp_(std::move(timestamp)), dim_(dim), words_(std::move(words)), data_(std::move(data)) {
    if (dim_ == 0) throw LoadError("vector space dimension must be positive");
    if (data_.size() != words_.size() * dim_) throw LoadError("vector data size does not match words x dim");
    std::string problems;
    index_.reserve(words_.size());
    for (std::size_t i = 0; i < words_.size(); ++i) {
      if (words_[i].empty()) problems += "\n  entry " + std::to_string(i) + ": empty word";
      const auto row = vector(i);
      if (std::any_of(row.begin(), row.end(), [](double v) { return !std::isfinite(v); }))
        problems += "\n  '" + words_[i] + "': non-finite component";
      else if (detail::max_abs(row) == 0.0)
        problems += "\n  '" + words_[i] + "': zero vector";
      if (!index_.emplace(words_[i], i).second) problems += "\n  '" + words_[i] + "': duplicate word";
    }
    if (!problems.empty()) throw LoadError("invalid vector space" + problems);
    norms_.resize(words_.size());
    for (std::size_t i = 0; i < words_.size(); ++i) {
      const auto row = vector(i);
      const double s = detail::max_abs(row);
      double acc = 0.0;
      for (double v : row) acc += (v / s) * (v / s);
      norms_[i] = s * std::sqrt(acc);
    }
  }

  const std::string& timestamp() const { return timestamp_; }
  std::size_t dim() const { return dim_; }
  std::size_t size() const { return words_.size(); }
  const std::vector<std::string>& words() const { return words_; }

  bool contains(const std::string& w) const { return index_.contains(w); }

  std::optional<std::size_t> find(const std::string& w) const {
    const auto it = index_.find(w);
    if (it == index_.end()) return std::nullopt;
    return it->second;
  }

  std::size_t index_of(const std::string& w) const {
    const auto it = index_.find(w);
    if (it == index_.end()) throw LookupError("word '" + w + "' not in space " + timestamp_);
    return it->second;
  }

  std::span<const double> vector(std::size_t i) const { return {data_.data() + i * dim_, dim_}; }
  std::span<const double> vector(const std::string& w) const { return vector(index_of(w)); }

  double norm(std::size_t i) const { return norms_[i]; }

  double distance(const std::string& a, const std::string& b) const {
    return cosine_distance(vector(a), vector(b));
  }

  /// Exact brute-force k-NN by cosine distance; the query word is excluded.
  Neighborhood k_nearest(const std::string& word, std::size_t k) const {
    const std::size_t q = index_of(word);
    if (k == 0 || k >= size()) {
      throw DomainError("k_nearest: k=" + std::to_string(k) + " must be in [1, " + std::to_string(size() - 1) + "]");
    }
    const auto qv = vector(q);
    std::vector<std::pair<double, std::size_t>> cand;
    cand.reserve(size() - 1);
    for (std::size_t i = 0; i < size(); ++i) {
      if (i == q) continue;
      const auto v = vector(i);
      double dot = 0.0;
      for (std::size_t j = 0; j < dim_; ++j) dot += qv[j] * v[j];
      double d = 1.0 - dot / (norms_[q] * norms_[i]);
      if (!std::isfinite(d)) d = cosine_distance(qv, v);
      cand.emplace_back(std::clamp(d, 0.0, 2.0), i);
    }
    auto less = [this](const auto& a, const auto& b) {
      if (a.first != b.first) return a.first < b.first;
      return words_[a.second] < words_[b.second];
    };
    std::partial_sort(cand.begin(), cand.begin() + static_cast<std::ptrdiff_t>(k), cand.end(), less);
    Neighborhood n{word, k, {}};
    n.neighbors.reserve(k);
    for (std::size_t i = 0; i < k; ++i) n.neighbors.push_back(words_[cand[i].second]);
    return n;
  }

 private:
  std::string timestamp_;
  std::size_t dim_ = 0;
  std::vector<std::string> words_;
  std::vector<double> data_;
  std::vector<double> norms_;
  std::unordered_map<std::string, std::size_t> index_;
};

inline Neighborhood k_nearest(const VectorSpace& space, const std::string& word, std::size_t k) {
  return space.k_nearest(word, k);
}

struct LoadOptions {
  std::optional<std::size_t> expected_dim;
  /// When false, invalid rows are skipped and listed in LoadReport::skipped.
  bool strict = true;
};

struct LoadReport {
  std::vector<std::string> skipped;  // "line N: reason"
};

inline VectorSpace read_space(std::istream& in, std::string timestamp, const LoadOptions& opts = {},
                              LoadReport* report = nullptr) {
  std::string line;
  if (!std::getline(in, line)) throw LoadError("embedding file: missing header");
  const auto header = io::split(io::trim(line), ' ');
  std::optional<std::size_t> count, dim;
  if (header.size() == 2) {
    count = io::parse_int<std::size_t>(header[0]);
    dim = io::parse_int<std::size_t>(header[1]);
  }
  if (!count || !dim || *dim == 0) throw LoadError("embedding file line 1: malformed header '" + line + "'");
  if (opts.expected_dim && *opts.expected_dim != *dim) {
    throw LoadError("embedding file: dimension " + std::to_string(*dim) + " but expected " +
                    std::to_string(*opts.expected_dim));
  }

  std::vector<std::string> problems;
  std::vector<std::string> words;
  std::vector<double> data;
  std::unordered_map<std::string, std::size_t> seen;
  words.reserve(*count);
  data.reserve(*count * *dim);
  std::vector<double> row(*dim);
  std::size_t lineno = 1, rows = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (io::trim(line).empty()) continue;
    ++rows;
    auto sv = std::string_view(line);
    while (!sv.empty() && sv.back() == ' ') sv.remove_suffix(1);
    const auto fields = io::split(sv, ' ');
    const auto where = "line " + std::to_string(lineno) + ": ";
    if (fields.size() != *dim + 1) {
      problems.push_back(where + "expected " + std::to_string(*dim) + " values, found " +
                         std::to_string(fields.size() - 1));
      continue;
    }
    const std::string word(fields[0]);
    bool ok = !word.empty();
    if (!ok) problems.push_back(where + "empty word");
    bool zero = true, finite = true;
    for (std::size_t j = 0; ok && j < *dim; ++j) {
      const auto v = io::parse_double(fields[j + 1]);
      if (!v) {
        problems.push_back(where + "'" + word + "' unparsable value '" + std::string(fields[j + 1]) + "'");
        ok = false;
        break;
      }
      row[j] = *v;
      zero = zero && *v == 0.0;
      finite = finite && std::isfinite(*v);
    }
    if (!ok) continue;
    if (!finite) {
      problems.push_back(where + "'" + word + "' non-finite value");
      continue;
    }
    if (zero) {
      problems.push_back(where + "'" + word + "' zero vector");
      continue;
    }
    if (const auto it = seen.find(word); it != seen.end()) {
      problems.push_back(where + "'" + word + "' duplicate word (first at line " + std::to_string(it->second) + ")");
      continue;
    }
    seen.emplace(word, lineno);
    words.push_back(word);
    data.insert(data.end(), row.begin(), row.end());
  }
  if (rows != *count) {
    problems.push_back("header declares " + std::to_string(*count) + " rows, found " + std::to_string(rows));
  }
  if (!problems.empty()) {
    if (opts.strict) {
      std::string msg = "embedding file rejected:";
      for (const auto& p : problems) msg += "\n  " + p;
      throw LoadError(msg);
    }
    if (report) report->skipped = problems;
  }
  if (words.empty()) throw LoadError("embedding file: no valid vectors");
  return VectorSpace(std::move(timestamp), *dim, std::move(words), std::move(data));
}

inline VectorSpace load_space(const std::filesystem::path& path, const LoadOptions& opts = {},
                              LoadReport* report = nullptr, std::string timestamp = {}) {
  auto in = io::open_input(path);
  if (timestamp.empty()) timestamp = path.stem().string();
  try {
    return read_space(in, std::move(timestamp), opts, report);
  } catch (const LoadError& e) {
    throw LoadError(path.string() + ": " + e.what());
  }
}

/// Sorted intersection of two vocabularies.
inline std::vector<std::string> shared_vocabulary(const VectorSpace& a, const VectorSpace& b) {
  std::vector<std::string> out;
  for (const auto& w : a.words())
    if (b.contains(w)) out.push_back(w);
  std::sort(out.begin(), out.end());
  return out;
}

/// Thread-safe memo of k-neighborhoods for one space.
class NeighborCache {
 public:
  explicit NeighborCache(const VectorSpace& space) : space_(&space) {}

  const VectorSpace& space() const { return *space_; }

  const std::vector<std::string>& get(const std::string& word, std::size_t k) const {
    {
      std::lock_guard lock(mu_);
      if (const auto it = memo_.find({word, k}); it != memo_.end()) return it->second;
    }
    auto n = space_->k_nearest(word, k).neighbors;
    std::sort(n.begin(), n.end());
    std::lock_guard lock(mu_);
    return memo_.try_emplace({word, k}, std::move(n)).first->second;
  }

 private:
  const VectorSpace* space_;
  mutable std::mutex mu_;
  // std::map keeps references stable across insertions.
  mutable std::map<std::pair<std::string, std::size_t>, std::vector<std::string>> memo_;
};

}  // namespace synodiff
