#pragma once

// Synthetic two-period worlds with known ground truth.
//
// Every vector is a*c + b*z with a shared unit direction c, a residual unit z
// orthogonal to c and a^2 + b^2 = 1, so the cosine distance of two words is
// (1 - a^2)(1 - <z1, z2>). Lowering a between periods dilates all distances
// (mean dilation common_t1^2 - common_t2^2). For each pair the residuals are
// placed to hit a prescribed SD at both periods: Diff pairs move apart by
// `diff_shift`, Syn pairs only by `syn_noise`. T2 is finally rotated by a
// random orthogonal matrix.

#include <Eigen/Dense>
#include <cmath>
#include <filesystem>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "synodiff/common.hpp"
#include "synodiff/io.hpp"
#include "synodiff/lexicon.hpp"
#include "synodiff/random.hpp"
#include "synodiff/vecspace.hpp"

namespace synodiff::synthetic {

struct WorldSpec {
  std::size_t n_pairs = 500;
  double syn_fraction = 0.30;
  std::size_t n_background = 300;
  std::size_t dim = 64;
  double common_t1 = std::sqrt(0.30);
  double common_t2 = std::sqrt(0.15);
  double sd1_lo = 0.10, sd1_hi = 0.40;
  double diff_shift_lo = 0.30, diff_shift_hi = 0.50;  // +0.4 +/- 0.1
  double syn_noise = 0.05;                            // shift in [-0.05, 0.05]
  bool rotate_t2 = true;
  std::uint64_t seed = 0;
};

struct World {
  VectorSpace t1, t2;
  std::vector<WordPair> pairs;
  std::vector<Label> labels;
  std::vector<double> sd1, sd2;  // prescribed SD(cd) per pair
  std::vector<std::string> vocabulary;  // all words, sorted
  Eigen::MatrixXd rotation;             // applied to T2 rows
};

/// Haar-distributed random orthogonal matrix (QR of a Gaussian matrix with sign fix).
inline Eigen::MatrixXd random_orthogonal(std::size_t dim, Rng& rng) {
  const auto d = static_cast<Eigen::Index>(dim);
  Eigen::MatrixXd g(d, d);
  for (Eigen::Index i = 0; i < d; ++i)
    for (Eigen::Index j = 0; j < d; ++j) g(i, j) = rng.normal();
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(g);
  Eigen::MatrixXd q = qr.householderQ() * Eigen::MatrixXd::Identity(d, d);
  const Eigen::MatrixXd r = qr.matrixQR().triangularView<Eigen::Upper>();
  for (Eigen::Index j = 0; j < d; ++j)
    if (r(j, j) < 0) q.col(j) *= -1.0;
  return q;
}

namespace detail {

inline Eigen::VectorXd random_unit_orthogonal_to(const std::vector<Eigen::VectorXd>& basis, std::size_t dim, Rng& rng) {
  Eigen::VectorXd z(static_cast<Eigen::Index>(dim));
  for (Eigen::Index i = 0; i < z.size(); ++i) z(i) = rng.normal();
  for (const auto& b : basis) z -= z.dot(b) * b;
  return z.normalized();
}

inline std::string word_name(const char* prefix, std::size_t i) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%s%04zu", prefix, i);
  return buf;
}

}  // namespace detail

inline World make_world(const WorldSpec& spec) {
  if (spec.dim < 4) throw DomainError("synthetic world needs dim >= 4");
  Rng rng(derive_seed(spec.seed, "synthetic", "world"));
  const std::size_t dim = spec.dim;
  Eigen::VectorXd c = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(dim));
  c(0) = 1.0;
  const double a1 = spec.common_t1, a2 = spec.common_t2;
  const double b1 = std::sqrt(1 - a1 * a1), b2 = std::sqrt(1 - a2 * a2);

  std::vector<std::string> words;
  std::vector<Eigen::VectorXd> v1, v2;
  auto add = [&](std::string w, const Eigen::VectorXd& z1, const Eigen::VectorXd& z2) {
    words.push_back(std::move(w));
    v1.push_back(a1 * c + b1 * z1);
    v2.push_back(a2 * c + b2 * z2);
  };

  World world;
  const auto n_syn = static_cast<std::size_t>(std::llround(spec.syn_fraction * static_cast<double>(spec.n_pairs)));
  // Residual correlation giving cosine distance s when the common weight is a.
  auto rho_for = [](double s, double a) { return std::clamp(1.0 - s / (1.0 - a * a), -1.0, 1.0); };
  for (std::size_t p = 0; p < spec.n_pairs; ++p) {
    const Label label = p < n_syn ? Label::Syn : Label::Diff;
    const double s1 = rng.uniform(spec.sd1_lo, spec.sd1_hi);
    const double shift = label == Label::Diff ? rng.uniform(spec.diff_shift_lo, spec.diff_shift_hi)
                                              : rng.uniform(-spec.syn_noise, spec.syn_noise);
    const double s2 = std::max(0.01, s1 + shift);
    const auto zu = detail::random_unit_orthogonal_to({c}, dim, rng);
    const auto q = detail::random_unit_orthogonal_to({c, zu}, dim, rng);
    const double r1 = rho_for(s1, a1), r2 = rho_for(s2, a2);
    const Eigen::VectorXd zv1 = r1 * zu + std::sqrt(1 - r1 * r1) * q;
    const Eigen::VectorXd zv2 = r2 * zu + std::sqrt(1 - r2 * r2) * q;
    const auto u = detail::word_name("pa", p), v = detail::word_name("pb", p);
    add(u, zu, zu);
    add(v, zv1, zv2);
    world.pairs.push_back({u, v, Pos::NN});
    world.labels.push_back(label);
    world.sd1.push_back(s1);
    world.sd2.push_back(s2);
  }
  for (std::size_t i = 0; i < spec.n_background; ++i) {
    const auto z = detail::random_unit_orthogonal_to({c}, dim, rng);
    add(detail::word_name("bg", i), z, z);
  }
  world.rotation = spec.rotate_t2 ? random_orthogonal(dim, rng)
                                  : Eigen::MatrixXd::Identity(static_cast<Eigen::Index>(dim), static_cast<Eigen::Index>(dim));

  std::vector<double> d1, d2;
  d1.reserve(words.size() * dim);
  d2.reserve(words.size() * dim);
  for (std::size_t i = 0; i < words.size(); ++i) {
    const Eigen::RowVectorXd r2 = v2[i].transpose() * world.rotation;
    for (std::size_t j = 0; j < dim; ++j) {
      d1.push_back(v1[i](static_cast<Eigen::Index>(j)));
      d2.push_back(r2(static_cast<Eigen::Index>(j)));
    }
  }
  world.vocabulary = words;
  std::sort(world.vocabulary.begin(), world.vocabulary.end());
  world.t1 = VectorSpace("1890", dim, words, std::move(d1));
  world.t2 = VectorSpace("1990", dim, std::move(words), std::move(d2));
  return world;
}

/// Dataset records for the world's pairs: Syn pairs share a synset (distance
/// 0), Diff pairs are disconnected. Sense counts are 1.
inline std::vector<PairRecord> records(const World& w) {
  std::vector<PairRecord> out;
  for (std::size_t i = 0; i < w.pairs.size(); ++i) {
    PairRecord r{w.pairs[i].u, w.pairs[i].v, w.pairs[i].pos, w.labels[i],
                 w.labels[i] == Label::Syn ? GraphDistance(0) : GraphDistance::infinite(), 1, 1};
    out.push_back(std::move(r));
  }
  return out;
}

inline std::string space_text(const VectorSpace& s) {
  std::string out = std::to_string(s.size()) + " " + std::to_string(s.dim()) + "\n";
  char buf[40];
  for (std::size_t i = 0; i < s.size(); ++i) {
    out += s.words()[i];
    for (double v : s.vector(i)) {
      std::snprintf(buf, sizeof buf, " %.9g", v);
      out += buf;
    }
    out += "\n";
  }
  return out;
}

/// Writes a complete resource set for the CLI pipeline into `dir`:
/// emb_1890.txt, emb_1990.txt, pairs.tsv, synsets.json, frequencies.csv and
/// config.ini. Lexical structure: Syn pairs share a synset; a third of Diff
/// pairs are direct hypernyms, a sixth are two hops apart, the rest unrelated.
/// A handful of background words fail the frequency filter.
inline void write_fixture(const World& w, const std::filesystem::path& dir, std::uint64_t seed) {
  std::filesystem::create_directories(dir);
  io::atomic_write(dir / "emb_1890.txt", space_text(w.t1));
  io::atomic_write(dir / "emb_1990.txt", space_text(w.t2));

  Rng rng(derive_seed(seed, "synthetic", "lexicon"));
  std::string tsv = "# u\tv\tPOS\n";
  for (const auto& p : w.pairs) tsv += p.u + "\t" + p.v + "\tNN\n";
  if (!w.pairs.empty()) tsv += w.pairs.front().v + "\t" + w.pairs.front().u + "\tNN\n";  // reversed duplicate
  tsv += "pa0000\tbg0000\tNN\n";  // bg0000 is below the frequency threshold
  io::atomic_write(dir / "pairs.tsv", tsv);

  nlohmann::json synsets = nlohmann::json::array();
  nlohmann::json hypernyms = nlohmann::json::array();
  std::map<std::string, std::vector<std::string>> senses;
  for (const auto& word : w.vocabulary) {
    const auto n = 1 + rng.below(6);
    for (std::size_t k = 0; k < n; ++k) {
      const auto id = word + ".n." + std::to_string(k + 1);
      synsets.push_back({{"id", id}, {"pos", "NN"}, {"lemmas", {word}}});
      senses[word].push_back(id);
    }
  }
  std::size_t diff_seen = 0;
  for (std::size_t i = 0; i < w.pairs.size(); ++i) {
    const auto& p = w.pairs[i];
    if (w.labels[i] == Label::Syn) {
      synsets.push_back({{"id", "shared." + std::to_string(i)}, {"pos", "NN"}, {"lemmas", {p.u, p.v}}});
      continue;
    }
    switch (diff_seen++ % 6) {
      case 0:
      case 1: hypernyms.push_back({senses[p.v].front(), senses[p.u].front()}); break;
      case 2: {
        const auto mid = "mid." + std::to_string(i);
        synsets.push_back({{"id", mid}, {"pos", "NN"}, {"lemmas", {"mid" + std::to_string(i)}}});
        hypernyms.push_back({senses[p.v].front(), mid});
        hypernyms.push_back({mid, senses[p.u].front()});
        break;
      }
      default: break;
    }
  }
  io::atomic_write(dir / "synsets.json", nlohmann::json{{"synsets", synsets}, {"hypernyms", hypernyms}}.dump(1) + "\n");

  std::string csv = "word,pos,decade,count\n";
  for (std::size_t wi = 0; wi < w.vocabulary.size(); ++wi) {
    const auto& word = w.vocabulary[wi];
    const double base = std::exp(rng.uniform(2.0, 9.0));
    for (const auto& decade : default_decades()) {
      auto count = static_cast<std::uint64_t>(std::max(3.0, base * rng.uniform(0.5, 1.5)));
      if (word.starts_with("bg") && wi % 50 == 0 && decade == "1930") count = 2;
      csv += word + ",NN," + decade + "," + std::to_string(count) + "\n";
    }
  }
  io::atomic_write(dir / "frequencies.csv", csv);

  const std::string config =
      "# synthetic fixture\n"
      "seed = " + std::to_string(seed) + "\n"
      "pos = nn\n"
      "out_dir = out\n"
      "\n[paths]\n"
      "embeddings_t1 = emb_1890.txt\n"
      "embeddings_t2 = emb_1990.txt\n"
      "t1_pairs = pairs.tsv\n"
      "synsets = synsets.json\n"
      "frequencies = frequencies.csv\n"
      "\n[features]\n"
      "sd = cd,n10\n"
      "dd = op,n100\n"
      "freq = both\n"
      "\n[tau]\n"
      "samples = 200000\n"
      "\n[split]\n"
      "test_fraction = 0.33\n"
      "repeats = 20\n";
  io::atomic_write(dir / "config.ini", config);
}

}  // namespace synodiff::synthetic
