#pragma once

// Synchronic distances (SD, within one period), diachronic distances (DD, one
// word across periods), the divergence delta = SD(T2) - SD(T1), the dilation
// threshold tau (mean delta over vocabulary pairs) and the Syn/Diff rule.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "synodiff/alignment.hpp"
#include "synodiff/common.hpp"
#include "synodiff/random.hpp"
#include "synodiff/vecspace.hpp"

namespace synodiff {

/// 1 - |a ∩ b| / |a ∪ b|. Inputs need not be sorted; duplicates are ignored.
template <class T>
double jaccard_distance(std::vector<T> a, std::vector<T> b) {
  std::sort(a.begin(), a.end());
  a.erase(std::unique(a.begin(), a.end()), a.end());
  std::sort(b.begin(), b.end());
  b.erase(std::unique(b.begin(), b.end()), b.end());
  if (a.empty() && b.empty()) throw DomainError("jaccard_distance: both sets empty");
  std::size_t inter = 0;
  auto i = a.begin();
  auto j = b.begin();
  while (i != a.end() && j != b.end()) {
    if (*i < *j) {
      ++i;
    } else if (*j < *i) {
      ++j;
    } else {
      ++inter;
      ++i;
      ++j;
    }
  }
  const std::size_t uni = a.size() + b.size() - inter;
  return 1.0 - static_cast<double>(inter) / static_cast<double>(uni);
}

template <class T>
double jaccard_distance(const std::set<T>& a, const std::set<T>& b) {
  return jaccard_distance(std::vector<T>(a.begin(), a.end()), std::vector<T>(b.begin(), b.end()));
}

struct SdSpec {
  enum class Kind { Cosine, Neighborhood } kind = Kind::Cosine;
  std::size_t k = 0;  // neighborhood only

  static SdSpec cosine() { return {Kind::Cosine, 0}; }
  static SdSpec neighborhood(std::size_t k) { return {Kind::Neighborhood, k}; }

  void validate() const {
    if (kind == Kind::Neighborhood && k == 0) throw ConfigError("SD(nk) requires k > 0");
    if (kind == Kind::Cosine && k != 0) throw ConfigError("SD(cd) takes no k");
  }

  /// "cd" or "n<k>".
  std::string name() const { return kind == Kind::Cosine ? "cd" : "n" + std::to_string(k); }

  static SdSpec parse(std::string_view s) {
    if (s == "cd" || s == "cosine") return cosine();
    if (s.size() > 1 && s.front() == 'n') {
      if (const auto k = io::parse_int<std::size_t>(s.substr(1)); k && *k > 0) return neighborhood(*k);
    }
    throw ConfigError("unknown SD spec '" + std::string(s) + "' (expected cd or n<k>)");
  }

  friend bool operator==(const SdSpec&, const SdSpec&) = default;
};

struct DdSpec {
  enum class Kind { Neighborhood, Procrustes } kind = Kind::Procrustes;
  std::size_t k = 0;  // neighborhood only

  static DdSpec procrustes() { return {Kind::Procrustes, 0}; }
  static DdSpec neighborhood(std::size_t k = 100) { return {Kind::Neighborhood, k}; }

  void validate() const {
    if (kind == Kind::Neighborhood && k == 0) throw ConfigError("DD(nk) requires k > 0");
    if (kind == Kind::Procrustes && k != 0) throw ConfigError("DD(op) takes no k");
  }

  /// "op" or "n<k>".
  std::string name() const { return kind == Kind::Procrustes ? "op" : "n" + std::to_string(k); }

  static DdSpec parse(std::string_view s) {
    if (s == "op" || s == "procrustes") return procrustes();
    if (s == "nk") return neighborhood();
    if (s.size() > 1 && s.front() == 'n') {
      if (const auto k = io::parse_int<std::size_t>(s.substr(1)); k && *k > 0) return neighborhood(*k);
    }
    throw ConfigError("unknown DD spec '" + std::string(s) + "' (expected op or n<k>)");
  }

  friend bool operator==(const DdSpec&, const DdSpec&) = default;
};

/// One period's space, with a neighborhood memo for SD(nk)/DD(nk).
class Period {
 public:
  explicit Period(const VectorSpace& space) : space_(&space), cache_(space) {}

  const VectorSpace& space() const { return *space_; }
  const std::vector<std::string>& neighbors(const std::string& w, std::size_t k) const { return cache_.get(w, k); }

 private:
  const VectorSpace* space_;
  NeighborCache cache_;
};

inline double sd(const Period& period, const std::string& u, const std::string& v, const SdSpec& spec) {
  if (u == v) throw DomainError("sd: u and v must differ ('" + u + "')");
  const auto& space = period.space();
  if (spec.kind == SdSpec::Kind::Cosine) return cosine_distance(space.vector(u), space.vector(v));
  return jaccard_distance(period.neighbors(u, spec.k), period.neighbors(v, spec.k));
}

inline double sd(const VectorSpace& space, const std::string& u, const std::string& v, const SdSpec& spec) {
  return sd(Period(space), u, v, spec);
}

/// For the procrustes kind `map` must rotate period-2 vectors into period-1
/// coordinates, i.e. fit_procrustes(space2, space1).
inline double dd(const Period& p1, const Period& p2, const AlignmentMap& map, const std::string& w,
                 const DdSpec& spec) {
  if (spec.kind == DdSpec::Kind::Procrustes) {
    const auto v1 = p1.space().vector(w);
    const auto v2 = p2.space().vector(w);
    return cosine_distance(v1, apply(map, v2));
  }
  p2.space().index_of(w);
  return jaccard_distance(p1.neighbors(w, spec.k), p2.neighbors(w, spec.k));
}

inline double dd(const VectorSpace& s1, const VectorSpace& s2, const AlignmentMap& map, const std::string& w,
                 const DdSpec& spec) {
  return dd(Period(s1), Period(s2), map, w, spec);
}

inline double delta(const Period& p1, const Period& p2, const std::string& u, const std::string& v,
                    const SdSpec& spec) {
  return sd(p2, u, v, spec) - sd(p1, u, v, spec);
}

inline double delta(const VectorSpace& s1, const VectorSpace& s2, const std::string& u, const std::string& v,
                    const SdSpec& spec) {
  return delta(Period(s1), Period(s2), u, v, spec);
}

struct Threshold {
  double tau = 0.0;
  std::uint64_t sample_size = 0;  // pairs actually averaged
  std::uint64_t seed = 0;
  SdSpec sd_spec;
  bool exact = false;
  double std_error = 0.0;  // 0 in exact mode
};

/// Mean delta over ordered pairs (w1, w2), w1 != w2, of `vocab`. Exact over
/// all pairs when sample_size >= n(n-1); otherwise a seeded uniform sample.
inline Threshold estimate_tau(const Period& p1, const Period& p2, const std::vector<std::string>& vocab,
                              const SdSpec& spec, std::uint64_t sample_size, std::uint64_t seed) {
  spec.validate();
  const std::uint64_t n = vocab.size();
  if (n < 2) throw DomainError("estimate_tau: vocabulary needs at least 2 words");
  if (sample_size == 0) throw DomainError("estimate_tau: sample_size must be >= 1");
  for (const auto& w : vocab) {
    p1.space().index_of(w);
    p2.space().index_of(w);
  }
  Threshold t;
  t.seed = seed;
  t.sd_spec = spec;
  const std::uint64_t all_pairs = n * (n - 1);
  if (sample_size >= all_pairs) {
    // Cosine and Jaccard are symmetric, so each unordered pair counts twice.
    double sum = 0.0;
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = i + 1; j < n; ++j) sum += 2.0 * delta(p1, p2, vocab[i], vocab[j], spec);
    t.tau = sum / static_cast<double>(all_pairs);
    t.sample_size = all_pairs;
    t.exact = true;
    return t;
  }
  Rng rng(derive_seed(seed, "measures", "tau"));
  double mean = 0.0, m2 = 0.0;  // Welford
  for (std::uint64_t s = 0; s < sample_size; ++s) {
    const auto i = rng.below(n);
    auto j = rng.below(n - 1);
    if (j >= i) ++j;
    const double x = delta(p1, p2, vocab[i], vocab[j], spec);
    const double d = x - mean;
    mean += d / static_cast<double>(s + 1);
    m2 += d * (x - mean);
  }
  t.tau = mean;
  t.sample_size = sample_size;
  t.std_error = sample_size > 1 ? std::sqrt(m2 / static_cast<double>(sample_size - 1) / static_cast<double>(sample_size)) : 0.0;
  return t;
}

inline Threshold estimate_tau(const VectorSpace& s1, const VectorSpace& s2, const std::vector<std::string>& vocab,
                              const SdSpec& spec, std::uint64_t sample_size, std::uint64_t seed) {
  return estimate_tau(Period(s1), Period(s2), vocab, spec, sample_size, seed);
}

/// Diff iff delta >= tau.
inline Label classify_delta(double delta_value, double tau) {
  return delta_value >= tau ? Label::Diff : Label::Syn;
}

inline nlohmann::json to_json(const Threshold& t) {
  return {{"tau", t.tau},       {"sample_size", t.sample_size}, {"seed", t.seed},
          {"sd_spec", t.sd_spec.name()}, {"exact", t.exact}, {"std_error", t.std_error}};
}

inline Threshold threshold_from_json(const nlohmann::json& j) {
  Threshold t;
  t.tau = j.at("tau").get<double>();
  t.sample_size = j.at("sample_size").get<std::uint64_t>();
  t.seed = j.at("seed").get<std::uint64_t>();
  t.sd_spec = SdSpec::parse(j.at("sd_spec").get<std::string>());
  t.exact = j.value("exact", false);
  t.std_error = j.value("std_error", 0.0);
  return t;
}

}  // namespace synodiff
