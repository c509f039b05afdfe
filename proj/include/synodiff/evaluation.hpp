#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <boost/math/distributions/normal.hpp>
#include <boost/math/distributions/students_t.hpp>
#include <nlohmann/json.hpp>

#include "synodiff/common.hpp"
#include "synodiff/features.hpp"
#include "synodiff/io.hpp"
#include "synodiff/lexicon.hpp"
#include "synodiff/measures.hpp"
#include "synodiff/models.hpp"
#include "synodiff/random.hpp"

namespace synodiff {

struct MetricError : Error {
  using Error::Error;
};

// ---------------------------------------------------------------------------
// Metrics

struct Confusion {
  double tp = 0, fp = 0, tn = 0, fn = 0;  // Diff is positive

  Confusion(std::span<const Label> pred, std::span<const Label> truth) {
    if (pred.size() != truth.size()) throw ContractError("metrics: predictions/labels size mismatch");
    for (std::size_t i = 0; i < truth.size(); ++i) {
      const bool p = pred[i] == Label::Diff, t = truth[i] == Label::Diff;
      (p ? (t ? tp : fp) : (t ? fn : tn)) += 1;
    }
  }
};

/// Mean of the per-class recalls.
inline double balanced_accuracy(std::span<const Label> pred, std::span<const Label> truth) {
  const Confusion c(pred, truth);
  if (c.tp + c.fn == 0 || c.tn + c.fp == 0) throw MetricError("balanced_accuracy: ground truth has a single class");
  return 0.5 * (c.tp / (c.tp + c.fn) + c.tn / (c.tn + c.fp));
}

/// F1 of `positive`; 0/0 terms count as 0.
inline double f1(std::span<const Label> pred, std::span<const Label> truth, Label positive) {
  const Confusion c(pred, truth);
  const double tp = positive == Label::Diff ? c.tp : c.tn;
  const double fp = positive == Label::Diff ? c.fp : c.fn;
  const double fn = positive == Label::Diff ? c.fn : c.fp;
  const double denom = 2 * tp + fp + fn;
  return denom == 0 ? 0.0 : 2 * tp / denom;
}

inline double pct_diff(std::span<const Label> pred) {
  if (pred.empty()) return 0.0;
  return 100.0 * static_cast<double>(std::count(pred.begin(), pred.end(), Label::Diff)) /
         static_cast<double>(pred.size());
}

// ---------------------------------------------------------------------------
// Significance tests

struct WelchResult {
  double t = 0.0, df = 0.0, p = 1.0;  // two-sided
};

struct MannWhitneyResult {
  double u = 0.0;          // U of the first group
  double p_less = 1.0;     // first group stochastically smaller
  double p_greater = 1.0;  // first group stochastically larger
  double p_two_sided = 1.0;
  bool exact = false;
};

struct SignificanceReport {
  WelchResult welch;
  MannWhitneyResult mann_whitney;
  bool significant_t = false;   // p < 0.05
  bool significant_mw = false;  // two-sided p < 0.05
};

inline WelchResult welch_t_test(std::span<const double> a, std::span<const double> b) {
  if (a.size() < 2 || b.size() < 2) throw DomainError("welch_t_test: each group needs at least 2 values");
  auto stats = [](std::span<const double> x) {
    const double n = static_cast<double>(x.size());
    const double m = std::accumulate(x.begin(), x.end(), 0.0) / n;
    double ss = 0.0;
    for (double v : x) ss += (v - m) * (v - m);
    return std::pair{m, ss / (n - 1.0)};
  };
  const auto [ma, va] = stats(a);
  const auto [mb, vb] = stats(b);
  const double na = static_cast<double>(a.size()), nb = static_cast<double>(b.size());
  const double sa = va / na, sb = vb / nb;
  const double se2 = sa + sb;
  WelchResult r;
  if (se2 == 0.0) {
    r.t = ma == mb ? 0.0 : std::copysign(std::numeric_limits<double>::infinity(), ma - mb);
    r.df = na + nb - 2.0;
    r.p = ma == mb ? 1.0 : 0.0;
    return r;
  }
  r.t = (ma - mb) / std::sqrt(se2);
  r.df = se2 * se2 / (sa * sa / (na - 1.0) + sb * sb / (nb - 1.0));
  const boost::math::students_t dist(r.df);
  r.p = std::min(1.0, 2.0 * boost::math::cdf(boost::math::complement(dist, std::abs(r.t))));
  return r;
}

namespace detail {

/// Midranks (1-based) of the concatenation a ++ b.
inline std::vector<double> midranks(std::span<const double> a, std::span<const double> b) {
  std::vector<std::pair<double, std::size_t>> all;
  for (std::size_t i = 0; i < a.size(); ++i) all.emplace_back(a[i], i);
  for (std::size_t i = 0; i < b.size(); ++i) all.emplace_back(b[i], a.size() + i);
  std::sort(all.begin(), all.end());
  std::vector<double> rank(all.size());
  for (std::size_t i = 0; i < all.size();) {
    std::size_t j = i;
    while (j < all.size() && all[j].first == all[i].first) ++j;
    const double r = (static_cast<double>(i + 1) + static_cast<double>(j)) / 2.0;
    for (std::size_t k = i; k < j; ++k) rank[all[k].second] = r;
    i = j;
  }
  return rank;
}

}  // namespace detail

/// Exact permutation distribution (dynamic programming over subsets of the
/// pooled midranks) when both groups have <= exact_limit values; otherwise the
/// normal approximation with tie and continuity corrections.
inline MannWhitneyResult mann_whitney_u(std::span<const double> a, std::span<const double> b,
                                        std::size_t exact_limit = 20) {
  if (a.size() < 2 || b.size() < 2) throw DomainError("mann_whitney_u: each group needs at least 2 values");
  const auto rank = detail::midranks(a, b);
  const std::size_t na = a.size(), nb = b.size(), n = na + nb;
  double ra = 0.0;
  for (std::size_t i = 0; i < na; ++i) ra += rank[i];
  const double dna = static_cast<double>(na), dnb = static_cast<double>(nb);
  MannWhitneyResult r;
  r.u = ra - dna * (dna + 1.0) / 2.0;

  if (na <= exact_limit && nb <= exact_limit) {
    // Doubled midranks are integers; count size-na subsets by rank sum.
    std::vector<int> dr(n);
    int total = 0;
    for (std::size_t i = 0; i < n; ++i) {
      dr[i] = static_cast<int>(std::lround(2.0 * rank[i]));
      total += dr[i];
    }
    std::vector<std::vector<double>> ways(na + 1, std::vector<double>(static_cast<std::size_t>(total) + 1, 0.0));
    ways[0][0] = 1.0;
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t c = std::min(i + 1, na); c >= 1; --c)
        for (int s = total; s >= dr[i]; --s) ways[c][static_cast<std::size_t>(s)] += ways[c - 1][static_cast<std::size_t>(s - dr[i])];
    const int obs = static_cast<int>(std::lround(2.0 * ra));
    double all = 0, le = 0, ge = 0;
    for (int s = 0; s <= total; ++s) {
      const double w = ways[na][static_cast<std::size_t>(s)];
      all += w;
      if (s <= obs) le += w;
      if (s >= obs) ge += w;
    }
    r.p_less = le / all;
    r.p_greater = ge / all;
    r.exact = true;
  } else {
    double ties = 0.0;
    std::vector<double> sorted = rank;
    std::sort(sorted.begin(), sorted.end());
    for (std::size_t i = 0; i < n;) {
      std::size_t j = i;
      while (j < n && sorted[j] == sorted[i]) ++j;
      const double t = static_cast<double>(j - i);
      ties += t * t * t - t;
      i = j;
    }
    const double dn = static_cast<double>(n);
    const double mu = dna * dnb / 2.0;
    const double var = dna * dnb / 12.0 * ((dn + 1.0) - ties / (dn * (dn - 1.0)));
    if (var <= 0.0) {
      r.p_less = r.p_greater = 1.0;
    } else {
      const boost::math::normal z;
      const double sd = std::sqrt(var);
      r.p_less = std::min(1.0, boost::math::cdf(z, (r.u - mu + 0.5) / sd));
      r.p_greater = std::min(1.0, boost::math::cdf(boost::math::complement(z, (r.u - mu - 0.5) / sd)));
    }
  }
  r.p_two_sided = std::min(1.0, 2.0 * std::min(r.p_less, r.p_greater));
  return r;
}

/// Both tests side by side; significance at p < 0.05.
inline SignificanceReport significance_tests(std::span<const double> group_a, std::span<const double> group_b) {
  SignificanceReport r;
  r.welch = welch_t_test(group_a, group_b);
  r.mann_whitney = mann_whitney_u(group_a, group_b);
  r.significant_t = r.welch.p < 0.05;
  r.significant_mw = r.mann_whitney.p_two_sided < 0.05;
  return r;
}

inline nlohmann::json to_json(const SignificanceReport& s) {
  return {{"welch_t", s.welch.t},
          {"welch_df", s.welch.df},
          {"welch_p", s.welch.p},
          {"mw_u", s.mann_whitney.u},
          {"mw_p_two_sided", s.mann_whitney.p_two_sided},
          {"mw_p_less", s.mann_whitney.p_less},
          {"mw_p_greater", s.mann_whitney.p_greater},
          {"mw_exact", s.mann_whitney.exact},
          {"significant_t", s.significant_t},
          {"significant_mw", s.significant_mw}};
}

// ---------------------------------------------------------------------------
// Repeated random splits

struct SplitSpec {
  double test_fraction = 0.33;
  int n_repeats = 20;
  std::uint64_t seed = 0;
  bool stratify_by_pos = false;
  bool stratify_by_label = false;

  void validate() const {
    if (!(test_fraction > 0.0 && test_fraction < 1.0)) throw ConfigError("test_fraction must be in (0, 1)");
    if (n_repeats < 1) throw ConfigError("n_repeats must be >= 1");
  }
};

struct Split {
  std::vector<std::size_t> train, test;  // row indices, ascending
};

/// Split for repeat `r`: a seeded shuffle per stratum, first ceil(f * size) rows to test.
inline Split make_split(std::span<const Label> labels, std::span<const Pos> pos, const SplitSpec& spec, int r) {
  Rng rng(derive_seed(spec.seed, "evaluation", "split", static_cast<std::uint64_t>(r)));
  std::map<int, std::vector<std::size_t>> strata;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    int key = 0;
    if (spec.stratify_by_label) key = static_cast<int>(labels[i]);
    if (spec.stratify_by_pos && i < pos.size()) key += 4 * static_cast<int>(pos[i]);
    strata[key].push_back(i);
  }
  Split s;
  for (auto& [key, idx] : strata) {
    rng.shuffle(std::span<std::size_t>(idx));
    const auto n_test = static_cast<std::size_t>(std::ceil(spec.test_fraction * static_cast<double>(idx.size())));
    s.test.insert(s.test.end(), idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(std::min(n_test, idx.size())));
    s.train.insert(s.train.end(), idx.begin() + static_cast<std::ptrdiff_t>(std::min(n_test, idx.size())), idx.end());
  }
  std::sort(s.train.begin(), s.train.end());
  std::sort(s.test.begin(), s.test.end());
  return s;
}

/// Rows of an experiment. features.rows[i] carries labels[i] and pos[i].
struct ExperimentData {
  FeatureTable features;
  std::vector<Label> labels;
  std::vector<Pos> pos;
};

/// One row of the results table.
struct MethodSpec {
  enum class Kind {
    Supervised,   // fit_pipeline on train, predict test
    DeltaFixed,   // classify_delta with a precomputed tau
    DeltaTuned,   // tune_tau on train deltas
    Precomputed,  // per-row predictions (e.g. control pairs); rows without one are skipped
  } kind = Kind::Supervised;
  std::string name;
  ModelSpec model;
  std::string sd_tag = "cd";  // delta = sd_t2_<tag> - sd_t1_<tag>
  double tau = 0.0;
  std::vector<std::optional<Label>> precomputed;
};

struct SplitMetrics {
  double balanced_accuracy = 0, f1_syn = 0, f1_diff = 0, pct_diff = 0;
};

struct MetricsReport {
  std::string method;
  std::vector<SplitMetrics> per_split;
  SplitMetrics mean, stddev;
  std::vector<std::string> skipped;  // "repeat r: reason"
  // Test-set predictions of every evaluated repeat: (row, label, score).
  struct TestPrediction {
    std::size_t row;
    Label label;
    double score;
  };
  std::vector<std::vector<TestPrediction>> test_predictions;
};

namespace detail {

inline std::vector<double> delta_column(const FeatureTable& t, const std::string& tag) {
  const auto c1 = t.column("sd_t1_" + tag);
  const auto c2 = t.column("sd_t2_" + tag);
  std::vector<double> d;
  d.reserve(t.rows.size());
  for (const auto& r : t.rows) d.push_back(r.values[c2] - r.values[c1]);
  return d;
}

inline FeatureTable subset(const FeatureTable& t, std::span<const std::size_t> idx) {
  FeatureTable out{t.schema, {}};
  out.rows.reserve(idx.size());
  for (auto i : idx) out.rows.push_back(t.rows[i]);
  return out;
}

inline void aggregate(MetricsReport& r) {
  const double n = static_cast<double>(r.per_split.size());
  if (r.per_split.empty()) return;
  auto field = [](SplitMetrics& m, int k) -> double& {
    switch (k) {
      case 0: return m.balanced_accuracy;
      case 1: return m.f1_syn;
      case 2: return m.f1_diff;
      default: return m.pct_diff;
    }
  };
  for (int k = 0; k < 4; ++k) {
    double s = 0.0;
    for (auto& m : r.per_split) s += field(m, k);
    const double mean = s / n;
    double ss = 0.0;
    for (auto& m : r.per_split) ss += (field(m, k) - mean) * (field(m, k) - mean);
    field(r.mean, k) = mean;
    field(r.stddev, k) = n > 1 ? std::sqrt(ss / (n - 1.0)) : 0.0;
  }
}

}  // namespace detail

/// Repeats independent seeded splits. Supervised methods fit on the train
/// portion (standardizer included); unsupervised methods are evaluated on the
/// test portion only. Repeats whose train set (for fitted methods) or test set
/// has a single class are skipped and reported.
inline MetricsReport run_experiment(const ExperimentData& data, const MethodSpec& method, const SplitSpec& split) {
  split.validate();
  if (data.labels.empty()) throw DomainError("run_experiment: empty dataset");
  if (data.labels.size() != data.features.rows.size()) throw ContractError("run_experiment: labels/features size mismatch");
  if (method.kind == MethodSpec::Kind::Precomputed && method.precomputed.size() != data.labels.size())
    throw ContractError("run_experiment: precomputed predictions size mismatch");
  {
    const auto n_diff = std::count(data.labels.begin(), data.labels.end(), Label::Diff);
    if (n_diff == 0 || n_diff == static_cast<std::ptrdiff_t>(data.labels.size()))
      throw DegenerateDataError("run_experiment: dataset has a single class");
  }
  std::vector<double> deltas;
  if (method.kind == MethodSpec::Kind::DeltaFixed || method.kind == MethodSpec::Kind::DeltaTuned)
    deltas = detail::delta_column(data.features, method.sd_tag);

  MetricsReport report;
  report.method = method.name;
  for (int r = 0; r < split.n_repeats; ++r) {
    const auto s = make_split(data.labels, data.pos, split, r);
    std::vector<Label> ytrain;
    for (auto i : s.train) ytrain.push_back(data.labels[i]);
    const auto train_diff = std::count(ytrain.begin(), ytrain.end(), Label::Diff);
    const bool fitted = method.kind == MethodSpec::Kind::DeltaTuned ||
                        (method.kind == MethodSpec::Kind::Supervised &&
                         (method.model.kind == ModelSpec::Kind::Lr || method.model.kind == ModelSpec::Kind::Svm));
    if (fitted && (train_diff == 0 || train_diff == static_cast<std::ptrdiff_t>(ytrain.size()))) {
      report.skipped.push_back("repeat " + std::to_string(r) + ": single-class training split");
      continue;
    }
    std::vector<MetricsReport::TestPrediction> preds;
    try {
      switch (method.kind) {
        case MethodSpec::Kind::Supervised: {
          const auto pipe = fit_pipeline(detail::subset(data.features, s.train), ytrain, method.model);
          const auto out = pipe.predict_table(detail::subset(data.features, s.test));
          for (std::size_t k = 0; k < s.test.size(); ++k) preds.push_back({s.test[k], out[k].label, out[k].score});
          break;
        }
        case MethodSpec::Kind::DeltaFixed:
          for (auto i : s.test) preds.push_back({i, classify_delta(deltas[i], method.tau), deltas[i]});
          break;
        case MethodSpec::Kind::DeltaTuned: {
          std::vector<double> dtrain;
          for (auto i : s.train) dtrain.push_back(deltas[i]);
          const auto tuned = tune_tau(dtrain, ytrain);
          for (auto i : s.test) preds.push_back({i, classify_delta(deltas[i], tuned.tau), deltas[i]});
          break;
        }
        case MethodSpec::Kind::Precomputed:
          for (auto i : s.test)
            if (method.precomputed[i]) preds.push_back({i, *method.precomputed[i], 0.0});
          break;
      }
    } catch (const DegenerateDataError& e) {
      report.skipped.push_back("repeat " + std::to_string(r) + ": " + e.what());
      continue;
    }
    std::vector<Label> yp, yt;
    for (const auto& p : preds) {
      yp.push_back(p.label);
      yt.push_back(data.labels[p.row]);
    }
    const auto test_diff = std::count(yt.begin(), yt.end(), Label::Diff);
    if (test_diff == 0 || test_diff == static_cast<std::ptrdiff_t>(yt.size())) {
      report.skipped.push_back("repeat " + std::to_string(r) + ": single-class test split");
      continue;
    }
    report.per_split.push_back(
        {balanced_accuracy(yp, yt), f1(yp, yt, Label::Syn), f1(yp, yt, Label::Diff), pct_diff(yp)});
    report.test_predictions.push_back(std::move(preds));
  }
  detail::aggregate(report);
  return report;
}

inline nlohmann::json to_json(const MetricsReport& r) {
  auto m = [](const SplitMetrics& s) {
    return nlohmann::json{{"balanced_accuracy", s.balanced_accuracy},
                          {"f1_syn", s.f1_syn},
                          {"f1_diff", s.f1_diff},
                          {"pct_diff", s.pct_diff}};
  };
  nlohmann::json splits = nlohmann::json::array();
  for (const auto& s : r.per_split) splits.push_back(m(s));
  return {{"method", r.method}, {"mean", m(r.mean)}, {"stddev", m(r.stddev)}, {"per_split", splits},
          {"skipped", r.skipped}};
}

/// Table-2-shaped aligned text: method, BA, F1(Syn), F1(Diff), %(D), repeats.
inline std::string format_results_table(const std::vector<MetricsReport>& reports) {
  std::size_t w = 6;
  for (const auto& r : reports) w = std::max(w, r.method.size());
  auto pad = [](std::string s, std::size_t n) {
    if (s.size() < n) s.insert(0, n - s.size(), ' ');
    return s;
  };
  std::string out = pad("Method", w) + " |     BA | F1(Syn) | F1(Diff) |  %(D) | splits\n";
  out += std::string(w, '-') + "-+--------+---------+----------+-------+-------\n";
  for (const auto& r : reports) {
    out += pad(r.method, w) + " | " + pad(io::fmt(r.mean.balanced_accuracy, 3), 6) + " | " +
           pad(io::fmt(r.mean.f1_syn, 3), 7) + " | " + pad(io::fmt(r.mean.f1_diff, 3), 8) + " | " +
           pad(io::fmt(r.mean.pct_diff, 1), 5) + " | " + pad(std::to_string(r.per_split.size()), 6) + "\n";
  }
  return out;
}

// ---------------------------------------------------------------------------
// Analyses

/// Bucket label for a graph distance: "0", "1", "2", "3", ">=4", "inf".
inline std::string distance_bucket(GraphDistance d) {
  if (!d.finite()) return "inf";
  if (d.edges() >= 4) return ">=4";
  return std::to_string(d.edges());
}

struct BucketShare {
  std::size_t count = 0;
  double pct_syn = 0.0, pct_diff = 0.0;
};

/// Predicted-class proportions per graph-distance bucket; empty buckets omitted.
inline std::map<std::string, BucketShare> wn_distance_breakdown(const std::vector<PairRecord>& pairs,
                                                                std::span<const Label> predictions) {
  if (pairs.size() != predictions.size()) throw ContractError("wn_distance_breakdown: size mismatch");
  std::map<std::string, std::pair<std::size_t, std::size_t>> counts;  // syn, diff
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    auto& c = counts[distance_bucket(pairs[i].wn_distance)];
    (predictions[i] == Label::Syn ? c.first : c.second) += 1;
  }
  std::map<std::string, BucketShare> out;
  for (const auto& [k, c] : counts) {
    const double n = static_cast<double>(c.first + c.second);
    out[k] = {c.first + c.second, 100.0 * static_cast<double>(c.first) / n, 100.0 * static_cast<double>(c.second) / n};
  }
  return out;
}

/// Confusion cell of a prediction: TS, FD (true Syn predicted Diff), TD, FS.
inline std::string cell_name(Label truth, Label pred) {
  if (truth == Label::Syn) return pred == Label::Syn ? "TS" : "FD";
  return pred == Label::Diff ? "TD" : "FS";
}

struct PolysemyCell {
  std::size_t count = 0;
  std::optional<double> mean_senses_u, mean_senses_v;  // absent for empty cells
};

inline std::map<std::string, PolysemyCell> polysemy_comparison(const std::vector<PairRecord>& pairs,
                                                               std::span<const Label> predictions) {
  if (pairs.size() != predictions.size()) throw ContractError("polysemy_comparison: size mismatch");
  std::map<std::string, std::pair<double, double>> sums;
  std::map<std::string, PolysemyCell> out;
  for (const char* c : {"TS", "FD", "TD", "FS"}) out[c];
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    const auto c = cell_name(pairs[i].label, predictions[i]);
    ++out[c].count;
    sums[c].first += static_cast<double>(pairs[i].senses_u);
    sums[c].second += static_cast<double>(pairs[i].senses_v);
  }
  for (auto& [c, cell] : out) {
    if (cell.count == 0) continue;
    cell.mean_senses_u = sums[c].first / static_cast<double>(cell.count);
    cell.mean_senses_v = sums[c].second / static_cast<double>(cell.count);
  }
  return out;
}

struct Histogram {
  double lo = 0.0, hi = 2.0;
  std::vector<double> density;  // integrates to 1 over [lo, hi]
  std::size_t count = 0;
};

inline Histogram density_histogram(std::span<const double> values, std::size_t bins, double lo = 0.0, double hi = 2.0) {
  Histogram h{lo, hi, std::vector<double>(bins, 0.0), values.size()};
  if (values.empty() || bins == 0) return h;
  const double width = (hi - lo) / static_cast<double>(bins);
  for (double v : values) {
    auto b = static_cast<std::ptrdiff_t>(std::floor((v - lo) / width));
    b = std::clamp<std::ptrdiff_t>(b, 0, static_cast<std::ptrdiff_t>(bins) - 1);
    h.density[static_cast<std::size_t>(b)] += 1.0;
  }
  for (auto& d : h.density) d /= static_cast<double>(values.size()) * width;
  return h;
}

struct PeriodDistances {
  std::string period;
  std::vector<double> synonym, random;
  Histogram synonym_hist, random_hist;
  double synonym_median = 0.0, random_median = 0.0;
  MannWhitneyResult mw;  // synonym vs random
  bool synonyms_closer = false;  // p_less < 0.05
};

inline double median(std::vector<double> v) {
  if (v.empty()) return std::numeric_limits<double>::quiet_NaN();
  std::sort(v.begin(), v.end());
  const auto n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

/// SD(cd) of synonym pairs vs. a seeded sample of unconstrained vocabulary
/// pairs, for each period.
inline std::vector<PeriodDistances> distance_distribution_report(const std::vector<const VectorSpace*>& spaces,
                                                                 const std::vector<WordPair>& synonyms,
                                                                 const std::vector<std::string>& vocab,
                                                                 std::size_t sample_size, std::uint64_t seed,
                                                                 std::size_t bins = 40) {
  if (synonyms.empty()) throw DomainError("distance_distribution_report: empty pair set");
  if (vocab.size() < 2) throw DomainError("distance_distribution_report: vocabulary needs 2 words");
  std::vector<PeriodDistances> out;
  for (std::size_t p = 0; p < spaces.size(); ++p) {
    const auto& space = *spaces[p];
    PeriodDistances d;
    d.period = space.timestamp();
    for (const auto& s : synonyms)
      if (space.contains(s.u) && space.contains(s.v)) d.synonym.push_back(space.distance(s.u, s.v));
    Rng rng(derive_seed(seed, "evaluation", "distance-sample"));
    const std::size_t max_draws = 100 * sample_size + 1000;
    for (std::size_t draw = 0; d.random.size() < sample_size; ++draw) {
      if (draw == max_draws)
        throw DomainError("distance_distribution_report: too few vocabulary words in space " + d.period);
      const auto i = rng.below(vocab.size());
      auto j = rng.below(vocab.size() - 1);
      if (j >= i) ++j;
      if (space.contains(vocab[i]) && space.contains(vocab[j])) d.random.push_back(space.distance(vocab[i], vocab[j]));
    }
    if (d.synonym.empty()) throw DomainError("distance_distribution_report: no synonym pair in space " + d.period);
    d.synonym_hist = density_histogram(d.synonym, bins);
    d.random_hist = density_histogram(d.random, bins);
    d.synonym_median = median(d.synonym);
    d.random_median = median(d.random);
    if (d.synonym.size() >= 2 && d.random.size() >= 2) {
      d.mw = mann_whitney_u(d.synonym, d.random);
      d.synonyms_closer = d.mw.p_less < 0.05;
    }
    out.push_back(std::move(d));
  }
  return out;
}

}  // namespace synodiff
