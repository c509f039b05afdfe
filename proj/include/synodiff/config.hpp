#pragma once

// Run configuration: one INI-style file ("key = value", [sections], '#' or
// ';' comments). Relative paths resolve against the config file's directory.
//
//   seed, pos (adj|nn|verb|all), out_dir
//   [paths]     embeddings_t1, embeddings_t2, t1_pairs, synsets, frequencies
//   [periods]   t1 (1890), t2 (1990)
//   [targets]   min_count (3), min_length (3)
//   [features]  sd (cd,n10), dd (op,n100), freq (both), log_raw_frequency (true), groups (4)
//   [model]     kind (lr), l2 (0.01), class_weighting (balanced), degree (1),
//               c_grid (0.01,0.1,1,10,100), gamma (auto), columns (all)
//   [tau]       samples (1000000)
//   [split]     test_fraction (0.33), repeats (20), stratify_by_pos, stratify_by_label
//   [xk]        max_attempts (1000)
//   [evaluate]  methods (all | baselines | comma list of row names)
//   [analyze]   random_pairs (10000), bins (40)

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "synodiff/common.hpp"
#include "synodiff/evaluation.hpp"
#include "synodiff/features.hpp"
#include "synodiff/io.hpp"
#include "synodiff/lexicon.hpp"
#include "synodiff/measures.hpp"
#include "synodiff/models.hpp"

namespace synodiff {

struct RunConfig {
  std::filesystem::path embeddings_t1, embeddings_t2, t1_pairs, synsets, frequencies;
  std::vector<Pos> pos{Pos::ADJ, Pos::NN, Pos::VERB};
  std::string t1_decade = "1890", t2_decade = "1990";
  std::uint64_t min_count = 3;
  std::size_t min_length = 3;
  FeatureSetSpec features{{SdSpec::cosine(), SdSpec::neighborhood(10)},
                          {DdSpec::procrustes(), DdSpec::neighborhood(100)},
                          FrequencyMode::Both};
  int frequency_groups = 4;
  ModelSpec model;
  std::uint64_t tau_samples = 1'000'000;
  std::size_t xk_max_attempts = 1000;
  std::string methods = "all";
  std::size_t random_pairs = 10'000;
  std::size_t histogram_bins = 40;
  SplitSpec split;
  std::filesystem::path out_dir = "out";
  std::uint64_t seed = 0;

  /// Every referenced input path must exist.
  void validate_paths() const {
    for (const auto* p : {&embeddings_t1, &embeddings_t2, &t1_pairs, &synsets, &frequencies}) {
      if (p->empty()) throw ConfigError("config: a required resource path is not set");
      if (!std::filesystem::exists(*p)) throw ConfigError("config: missing file '" + p->string() + "'");
    }
  }
};

inline std::vector<Pos> parse_pos_filter(std::string_view s) {
  if (s == "all" || s == "ALL") return {Pos::ADJ, Pos::NN, Pos::VERB};
  return {parse_pos(s)};
}

inline std::vector<std::string> split_list(std::string_view s) {
  std::vector<std::string> out;
  for (auto part : io::split(s, ','))
    if (const auto t = io::trim(part); !t.empty()) out.emplace_back(t);
  return out;
}

inline std::vector<SdSpec> parse_sd_list(std::string_view s) {
  std::vector<SdSpec> out;
  for (const auto& x : split_list(s)) out.push_back(SdSpec::parse(x));
  return out;
}

inline std::vector<DdSpec> parse_dd_list(std::string_view s) {
  std::vector<DdSpec> out;
  for (const auto& x : split_list(s))
    if (x != "none") out.push_back(DdSpec::parse(x));
  return out;
}

inline RunConfig load_config(const std::filesystem::path& path) {
  boost::property_tree::ptree tree;
  try {
    boost::property_tree::read_ini(path.string(), tree);
  } catch (const boost::property_tree::ini_parser_error& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
  const auto base = path.has_parent_path() ? path.parent_path() : std::filesystem::path(".");
  auto resolve = [&](const std::string& p) {
    const std::filesystem::path fp(p);
    return fp.is_absolute() ? fp : base / fp;
  };
  RunConfig c;
  try {
    auto str = [&](const char* key) { return tree.get_optional<std::string>(key); };
    if (auto v = str("seed")) {
      const auto s = io::parse_int<std::uint64_t>(*v);
      if (!s) throw ConfigError("config: bad seed '" + *v + "'");
      c.seed = *s;
    }
    if (auto v = str("pos")) c.pos = parse_pos_filter(*v);
    if (auto v = str("out_dir")) c.out_dir = resolve(*v);
    else c.out_dir = base / "out";
    if (auto v = str("paths.embeddings_t1")) c.embeddings_t1 = resolve(*v);
    if (auto v = str("paths.embeddings_t2")) c.embeddings_t2 = resolve(*v);
    if (auto v = str("paths.t1_pairs")) c.t1_pairs = resolve(*v);
    if (auto v = str("paths.synsets")) c.synsets = resolve(*v);
    if (auto v = str("paths.frequencies")) c.frequencies = resolve(*v);
    if (auto v = str("periods.t1")) c.t1_decade = normalize_decade(*v);
    if (auto v = str("periods.t2")) c.t2_decade = normalize_decade(*v);
    c.min_count = tree.get<std::uint64_t>("targets.min_count", c.min_count);
    c.min_length = tree.get<std::size_t>("targets.min_length", c.min_length);
    if (auto v = str("features.sd")) c.features.include_sd = parse_sd_list(*v);
    if (auto v = str("features.dd")) c.features.include_dd = parse_dd_list(*v);
    if (auto v = str("features.freq")) c.features.frequency = parse_frequency_mode(*v);
    c.features.log_raw_frequency = tree.get<bool>("features.log_raw_frequency", true);
    c.frequency_groups = tree.get<int>("features.groups", c.frequency_groups);
    if (auto v = str("model.kind")) c.model.kind = parse_model_kind(*v);
    c.model.lr.l2_strength = tree.get<double>("model.l2", c.model.lr.l2_strength);
    if (auto v = str("model.class_weighting")) {
      c.model.lr.class_weighting = parse_class_weighting(*v);
      c.model.svm.class_weighting = c.model.lr.class_weighting;
    }
    c.model.polynomial_degree = tree.get<int>("model.degree", 1);
    if (auto v = str("model.columns"); v && *v != "all") c.model.columns = split_list(*v);
    if (auto v = str("model.c_grid")) {
      c.model.svm.c_grid.clear();
      for (const auto& x : split_list(*v)) {
        const auto d = io::parse_double(x);
        if (!d || !(*d > 0)) throw ConfigError("config: bad C value '" + x + "'");
        c.model.svm.c_grid.push_back(*d);
      }
    }
    if (auto v = str("model.gamma"); v && *v != "auto") {
      const auto d = io::parse_double(*v);
      if (!d || !(*d > 0)) throw ConfigError("config: bad gamma '" + *v + "'");
      c.model.svm.gamma = *d;
    }
    c.tau_samples = tree.get<std::uint64_t>("tau.samples", c.tau_samples);
    c.split.test_fraction = tree.get<double>("split.test_fraction", c.split.test_fraction);
    c.split.n_repeats = tree.get<int>("split.repeats", c.split.n_repeats);
    c.split.stratify_by_pos = tree.get<bool>("split.stratify_by_pos", false);
    c.split.stratify_by_label = tree.get<bool>("split.stratify_by_label", false);
    c.xk_max_attempts = tree.get<std::size_t>("xk.max_attempts", c.xk_max_attempts);
    c.methods = tree.get<std::string>("evaluate.methods", c.methods);
    c.random_pairs = tree.get<std::size_t>("analyze.random_pairs", c.random_pairs);
    c.histogram_bins = tree.get<std::size_t>("analyze.bins", c.histogram_bins);
  } catch (const boost::property_tree::ptree_error& e) {
    throw ConfigError(std::string("config: ") + e.what());
  } catch (const ParseError& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
  return c;
}

}  // namespace synodiff
