#include <gtest/gtest.h>

#include <cmath>

#include "support.hpp"
#include "synodiff/evaluation.hpp"

using namespace synodiff;

namespace {

// U of `a` by pairwise comparison (ties count one half).
double u_pairwise(const std::vector<double>& a, const std::vector<double>& b) {
  double u = 0;
  for (double x : a)
    for (double y : b) u += x > y ? 1.0 : (x == y ? 0.5 : 0.0);
  return u;
}

// Exact one-sided p-values by enumerating every size-|a| subset of the pooled sample.
std::pair<double, double> mw_enumeration(const std::vector<double>& a, const std::vector<double>& b) {
  std::vector<double> pool(a);
  pool.insert(pool.end(), b.begin(), b.end());
  const double obs = u_pairwise(a, b);
  const std::size_t n = pool.size();
  double all = 0, le = 0, ge = 0;
  for (std::uint32_t mask = 0; mask < (1u << n); ++mask) {
    if (static_cast<std::size_t>(__builtin_popcount(mask)) != a.size()) continue;
    std::vector<double> x, y;
    for (std::size_t i = 0; i < n; ++i) ((mask >> i) & 1u ? x : y).push_back(pool[i]);
    const double u = u_pairwise(x, y);
    all += 1;
    le += u <= obs + 1e-9;
    ge += u >= obs - 1e-9;
  }
  return {le / all, ge / all};
}

ExperimentData dataset(std::size_t n, double p_diff, std::uint64_t seed) {
  Rng rng(seed);
  ExperimentData d;
  d.features.schema = {"sd_t1_cd", "sd_t2_cd"};
  for (std::size_t i = 0; i < n; ++i) {
    const bool diff = rng.uniform() < p_diff;
    const double s1 = rng.uniform(0.2, 0.6);
    const double s2 = s1 + (diff ? rng.uniform(0.3, 0.5) : rng.uniform(-0.05, 0.05));
    d.features.rows.push_back({i, {s1, s2}});
    d.labels.push_back(diff ? Label::Diff : Label::Syn);
    d.pos.push_back(static_cast<Pos>(i % 3));
  }
  return d;
}

MethodSpec constant(Label l) {
  MethodSpec m;
  m.name = "c";
  m.model.kind = l == Label::Diff ? ModelSpec::Kind::ConstantDiff : ModelSpec::Kind::ConstantSyn;
  return m;
}

}  // namespace

TEST(Metrics, BalancedAccuracy) {
  const std::vector<Label> y{Label::Syn, Label::Diff, Label::Diff};
  EXPECT_EQ(balanced_accuracy(y, y), 1.0);
  const std::vector<Label> all_diff(3, Label::Diff), all_syn(3, Label::Syn);
  EXPECT_EQ(balanced_accuracy(all_diff, y), 0.5);
  EXPECT_EQ(balanced_accuracy(all_syn, y), 0.5);
  EXPECT_THROW(balanced_accuracy(y, all_diff), MetricError);
  // Diff recall 4/5 = 0.8, Syn recall 2/5 = 0.4.
  std::vector<Label> truth, pred;
  for (int i = 0; i < 5; ++i) {
    truth.push_back(Label::Diff);
    pred.push_back(i < 4 ? Label::Diff : Label::Syn);
    truth.push_back(Label::Syn);
    pred.push_back(i < 2 ? Label::Syn : Label::Diff);
  }
  EXPECT_NEAR(balanced_accuracy(pred, truth), 0.6, 1e-15);
}

TEST(Metrics, F1) {
  const std::vector<Label> y{Label::Syn, Label::Diff, Label::Diff, Label::Diff};
  EXPECT_EQ(f1(y, y, Label::Diff), 1.0);
  EXPECT_EQ(f1(y, y, Label::Syn), 1.0);
  const std::vector<Label> all_syn(4, Label::Syn), all_diff(4, Label::Diff);
  EXPECT_EQ(f1(all_syn, y, Label::Diff), 0.0);
  const double p = 0.75;
  EXPECT_NEAR(f1(all_diff, y, Label::Diff), 2 * p / (1 + p), 1e-15);
  EXPECT_EQ(pct_diff(all_diff), 100.0);
}

TEST(Metrics, AllDiffClosedFormOnRandomLabels) {
  Rng rng(3);
  for (int t = 0; t < 100; ++t) {
    const std::size_t n = 2 + rng.below(200);
    std::vector<Label> y(n);
    std::size_t diff = 0;
    for (auto& l : y) {
      l = rng.uniform() < 0.8 ? Label::Diff : Label::Syn;
      diff += l == Label::Diff;
    }
    if (diff == 0 || diff == n) continue;
    const std::vector<Label> all_diff(n, Label::Diff), all_syn(n, Label::Syn);
    const double p = static_cast<double>(diff) / static_cast<double>(n);
    EXPECT_NEAR(f1(all_diff, y, Label::Diff), 2 * p / (1 + p), 1e-12);
    EXPECT_EQ(balanced_accuracy(all_diff, y), 0.5);
    EXPECT_EQ(balanced_accuracy(all_syn, y), 0.5);
  }
}

TEST(MannWhitney, ClassicExample) {
  const std::vector<double> a{1, 2, 3}, b{4, 5, 6};
  const auto r = mann_whitney_u(a, b);
  EXPECT_TRUE(r.exact);
  EXPECT_EQ(r.u, 0.0);
  EXPECT_NEAR(r.p_less, 0.05, 1e-15);
  EXPECT_NEAR(r.p_two_sided, 0.1, 1e-15);
  EXPECT_NEAR(r.p_greater, 1.0, 1e-15);
}

TEST(MannWhitney, ExactMatchesEnumeration) {
  Rng rng(4);
  for (int t = 0; t < 60; ++t) {
    const std::size_t na = 2 + rng.below(6), nb = 2 + rng.below(6);
    std::vector<double> a(na), b(nb);
    for (auto& v : a) v = static_cast<double>(rng.below(6));  // many ties
    for (auto& v : b) v = static_cast<double>(rng.below(7));
    const auto r = mann_whitney_u(a, b);
    ASSERT_TRUE(r.exact);
    EXPECT_DOUBLE_EQ(r.u, u_pairwise(a, b));
    const auto [le, ge] = mw_enumeration(a, b);
    EXPECT_NEAR(r.p_less, le, 1e-12);
    EXPECT_NEAR(r.p_greater, ge, 1e-12);
  }
}

TEST(MannWhitney, NormalApproximationForLargeGroups) {
  std::vector<double> a, b;
  for (int i = 0; i < 30; ++i) {
    a.push_back(i);
    b.push_back(i + 0.5);
  }
  const auto r = mann_whitney_u(a, b);
  EXPECT_FALSE(r.exact);
  EXPECT_DOUBLE_EQ(r.u, u_pairwise(a, b));
  EXPECT_GT(r.p_two_sided, 0.5);
  std::vector<double> low(25), high(25);
  for (int i = 0; i < 25; ++i) {
    low[static_cast<std::size_t>(i)] = i;
    high[static_cast<std::size_t>(i)] = 100 + i;
  }
  EXPECT_LT(mann_whitney_u(low, high).p_less, 1e-8);
}

TEST(Welch, IdenticalAndShifted) {
  const std::vector<double> a{1, 2, 3, 4}, b{1, 2, 3, 4};
  const auto same = welch_t_test(a, b);
  EXPECT_GT(same.p, 0.99);
  const auto s = significance_tests(a, b);
  EXPECT_FALSE(s.significant_t);
  EXPECT_FALSE(s.significant_mw);
  // Hand computation: means 2.5 vs 12.5, both variances 5/3 -> t = -10 / sqrt(5/6).
  const std::vector<double> c{11, 12, 13, 14};
  const auto w = welch_t_test(a, c);
  EXPECT_NEAR(w.t, -10.0 / std::sqrt(5.0 / 6.0), 1e-12);
  EXPECT_NEAR(w.df, 6.0, 1e-12);
  EXPECT_LT(w.p, 1e-4);
  const std::vector<double> one{1};
  EXPECT_THROW(welch_t_test(one, a), DomainError);
  EXPECT_THROW(mann_whitney_u(one, a), DomainError);
}

TEST(Splits, SizesAndDeterminism) {
  const auto d = dataset(100, 0.7, 1);
  SplitSpec spec;
  spec.seed = 9;
  const auto s = make_split(d.labels, d.pos, spec, 0);
  EXPECT_EQ(s.test.size(), 33u);
  EXPECT_EQ(s.train.size(), 67u);
  const auto again = make_split(d.labels, d.pos, spec, 0);
  EXPECT_EQ(s.test, again.test);
  EXPECT_NE(s.test, make_split(d.labels, d.pos, spec, 1).test);
  spec.stratify_by_label = true;
  const auto st = make_split(d.labels, d.pos, spec, 0);
  const auto n_diff = std::count(d.labels.begin(), d.labels.end(), Label::Diff);
  std::size_t test_diff = 0;
  for (auto i : st.test) test_diff += d.labels[i] == Label::Diff;
  EXPECT_EQ(test_diff, static_cast<std::size_t>(std::ceil(0.33 * static_cast<double>(n_diff))));
}

TEST(RunExperiment, ConstantBaselinesAreExact) {
  const auto d = dataset(150, 0.8, 2);
  SplitSpec spec;
  const auto diff = run_experiment(d, constant(Label::Diff), spec);
  const auto syn = run_experiment(d, constant(Label::Syn), spec);
  ASSERT_EQ(diff.per_split.size(), 20u);
  EXPECT_EQ(diff.mean.balanced_accuracy, 0.5);
  EXPECT_EQ(syn.mean.balanced_accuracy, 0.5);
  EXPECT_EQ(syn.mean.f1_diff, 0.0);
  for (std::size_t r = 0; r < diff.per_split.size(); ++r) {
    const auto& preds = diff.test_predictions[r];
    double n_diff = 0;
    for (const auto& p : preds) n_diff += d.labels[p.row] == Label::Diff;
    const double p = n_diff / static_cast<double>(preds.size());
    EXPECT_NEAR(diff.per_split[r].f1_diff, 2 * p / (1 + p), 1e-12);
  }
}

TEST(RunExperiment, SeparableLrAndDelta) {
  const auto d = dataset(300, 0.7, 3);
  MethodSpec lr;
  lr.name = "lr";
  EXPECT_GE(run_experiment(d, lr, SplitSpec{}).mean.balanced_accuracy, 0.95);
  MethodSpec fixed;
  fixed.kind = MethodSpec::Kind::DeltaFixed;
  fixed.tau = 0.15;
  EXPECT_EQ(run_experiment(d, fixed, SplitSpec{}).mean.balanced_accuracy, 1.0);
  MethodSpec tuned;
  tuned.kind = MethodSpec::Kind::DeltaTuned;
  EXPECT_GE(run_experiment(d, tuned, SplitSpec{}).mean.balanced_accuracy, 0.99);
}

TEST(RunExperiment, Idempotent) {
  const auto d = dataset(120, 0.6, 4);
  MethodSpec lr;
  lr.name = "lr";
  SplitSpec spec;
  spec.n_repeats = 1;
  spec.seed = 5;
  EXPECT_EQ(to_json(run_experiment(d, lr, spec)).dump(), to_json(run_experiment(d, lr, spec)).dump());
  spec.n_repeats = 20;
  EXPECT_EQ(to_json(run_experiment(d, lr, spec)).dump(), to_json(run_experiment(d, lr, spec)).dump());
}

TEST(RunExperiment, SkipsSingleClassTraining) {
  auto d = dataset(10, 0.0, 5);
  d.labels[0] = Label::Diff;
  MethodSpec lr;
  lr.name = "lr";
  SplitSpec spec;
  spec.test_fraction = 0.5;
  const auto r = run_experiment(d, lr, spec);
  EXPECT_EQ(r.per_split.size() + r.skipped.size(), 20u);
  EXPECT_FALSE(r.skipped.empty());
}

TEST(RunExperiment, PrecomputedSkipsMissingRows) {
  const auto d = dataset(60, 0.5, 6);
  MethodSpec m;
  m.kind = MethodSpec::Kind::Precomputed;
  for (std::size_t i = 0; i < d.labels.size(); ++i)
    m.precomputed.push_back(i % 4 == 0 ? std::nullopt : std::optional(d.labels[i]));
  const auto r = run_experiment(d, m, SplitSpec{});
  EXPECT_EQ(r.mean.balanced_accuracy, 1.0);
  for (const auto& split : r.test_predictions)
    for (const auto& p : split) EXPECT_NE(p.row % 4, 0u);
}

TEST(Analysis, WnBreakdown) {
  std::vector<PairRecord> pairs;
  std::vector<Label> pred;
  for (int i = 0; i < 4; ++i) {
    pairs.push_back({"a", "b", Pos::NN, Label::Syn, GraphDistance(0)});
    pred.push_back(Label::Syn);
  }
  for (int i = 0; i < 5; ++i) {
    pairs.push_back({"a", "c", Pos::NN, Label::Diff, GraphDistance(1)});
    pred.push_back(i < 2 ? Label::Syn : Label::Diff);
  }
  pairs.push_back({"a", "d", Pos::NN, Label::Diff, GraphDistance(7)});
  pred.push_back(Label::Diff);
  const auto t = wn_distance_breakdown(pairs, pred);
  EXPECT_EQ(t.at("0").pct_syn, 100.0);
  EXPECT_EQ(t.at("1").pct_syn, 40.0);
  EXPECT_EQ(t.at("1").pct_diff, 60.0);
  EXPECT_EQ(t.at(">=4").count, 1u);
  EXPECT_FALSE(t.count("2"));
  for (const auto& [k, s] : t) EXPECT_DOUBLE_EQ(s.pct_syn + s.pct_diff, 100.0);
}

TEST(Analysis, Polysemy) {
  std::vector<PairRecord> pairs{
      {"a", "b", Pos::NN, Label::Syn, GraphDistance(0), 5, 6},  {"a", "b", Pos::NN, Label::Syn, GraphDistance(0), 7, 8},
      {"a", "c", Pos::NN, Label::Syn, GraphDistance(0), 1, 2},  {"a", "d", Pos::NN, Label::Diff, GraphDistance(2), 3, 3},
  };
  const std::vector<Label> pred{Label::Syn, Label::Syn, Label::Diff, Label::Diff};
  const auto c = polysemy_comparison(pairs, pred);
  EXPECT_EQ(*c.at("TS").mean_senses_u, 6.0);
  EXPECT_EQ(*c.at("TS").mean_senses_v, 7.0);
  EXPECT_LT(*c.at("FD").mean_senses_v, *c.at("TS").mean_senses_v);
  EXPECT_FALSE(c.at("FS").mean_senses_u.has_value());
  EXPECT_EQ(c.at("FS").count, 0u);

  for (auto& p : pairs) p.senses_u = p.senses_v = 1;
  for (const auto& [k, cell] : polysemy_comparison(pairs, pred))
    if (cell.count) EXPECT_EQ(*cell.mean_senses_u, 1.0);
}

TEST(Analysis, DistanceDistributions) {
  const auto s = testing_support::space(
      {{"a", {1, 0, 0}}, {"a2", {1, 0, 0}}, {"b", {0, 1, 0}}, {"b2", {0, 1, 0}}, {"c", {0, 0, 1}}, {"d", {1, 1, 1}}});
  const std::vector<WordPair> syn{{"a", "a2", Pos::NN}, {"b", "b2", Pos::NN}};
  const auto r = distance_distribution_report({&s}, syn, s.words(), 200, 7, 10);
  ASSERT_EQ(r.size(), 1u);
  EXPECT_DOUBLE_EQ(r[0].synonym_hist.density[0] * 0.2, 1.0);
  EXPECT_LT(r[0].synonym_median, r[0].random_median);
  EXPECT_TRUE(r[0].synonyms_closer);
  const auto again = distance_distribution_report({&s}, syn, s.words(), 200, 7, 10);
  EXPECT_EQ(again[0].random_hist.density, r[0].random_hist.density);
  EXPECT_THROW(distance_distribution_report({&s}, {}, s.words(), 10, 7), DomainError);
  EXPECT_THROW(distance_distribution_report({&s}, syn, {"zz1", "zz2"}, 10, 7), DomainError);
}

TEST(Histogram, Density) {
  const std::vector<double> v{0.0, 0.1, 1.9, 2.0};
  const auto h = density_histogram(v, 2);
  EXPECT_DOUBLE_EQ(h.density[0], 0.5);
  EXPECT_DOUBLE_EQ(h.density[1], 0.5);
  EXPECT_EQ(median({3, 1, 2}), 2.0);
  EXPECT_EQ(median({4, 1, 2, 3}), 2.5);
}
