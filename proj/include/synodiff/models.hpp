#pragma once

// Classifiers mapping feature rows to Syn/Diff. Diff is the positive class
// (y = 1 for logistic regression, y = +1 for the SVM).

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include <nlohmann/json.hpp>

#include "synodiff/common.hpp"
#include "synodiff/features.hpp"
#include "synodiff/measures.hpp"
#include "synodiff/random.hpp"

namespace synodiff {

struct Prediction {
  Label label = Label::Diff;
  double score = 0.0;  // LR: P(Diff); SVM: decision value; constant: 1 or 0
};

enum class ClassWeighting { None, Balanced };

inline ClassWeighting parse_class_weighting(std::string_view s) {
  if (s == "none") return ClassWeighting::None;
  if (s == "balanced") return ClassWeighting::Balanced;
  throw ConfigError("unknown class weighting '" + std::string(s) + "'");
}

namespace detail {

inline void require_two_classes(std::span<const Label> labels, const char* who) {
  const auto diff = std::count(labels.begin(), labels.end(), Label::Diff);
  if (diff == 0 || diff == static_cast<std::ptrdiff_t>(labels.size()))
    throw DegenerateDataError(std::string(who) + ": training labels contain a single class");
}

/// Per-sample weights: 1, or n / (2 n_class) when balanced.
inline std::vector<double> sample_weights(std::span<const Label> labels, ClassWeighting w) {
  std::vector<double> s(labels.size(), 1.0);
  if (w == ClassWeighting::None) return s;
  const double n = static_cast<double>(labels.size());
  const double n_diff = static_cast<double>(std::count(labels.begin(), labels.end(), Label::Diff));
  const double n_syn = n - n_diff;
  for (std::size_t i = 0; i < labels.size(); ++i)
    s[i] = labels[i] == Label::Diff ? n / (2.0 * n_diff) : n / (2.0 * n_syn);
  return s;
}

inline double sigmoid(double z) {
  if (z >= 0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

/// log(1 + e^z) without overflow.
inline double softplus(double z) { return z > 0 ? z + std::log1p(std::exp(-z)) : std::log1p(std::exp(z)); }

inline void check_schema(const std::vector<std::string>& model, const std::vector<std::string>& data) {
  if (model != data) {
    std::string m, d;
    for (const auto& s : model) m += s + " ";
    for (const auto& s : data) d += s + " ";
    throw ContractError("feature schema mismatch: model [" + m + "] vs data [" + d + "]");
  }
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Logistic regression

struct LrOptions {
  double l2_strength = 1e-2;
  ClassWeighting class_weighting = ClassWeighting::Balanced;
  double tolerance = 1e-8;
  int max_iters = 100;
};

struct LogisticModel {
  std::vector<std::string> schema;
  std::vector<double> weights;
  double bias = 0.0;
  ClassWeighting class_weighting = ClassWeighting::Balanced;
  double l2_strength = 0.0;
  int iterations = 0;
  bool converged = false;
  double gradient_norm = 0.0;  // max-norm at termination

  double margin(std::span<const double> x) const {
    double z = bias;
    for (std::size_t i = 0; i < weights.size(); ++i) z += weights[i] * x[i];
    return z;
  }
};

/// Minimizes (1/n) sum_i s_i [softplus(z_i) - y_i z_i] + (l2/2)|w|^2 with
/// z_i = w.x_i + b (bias unpenalized) by damped Newton steps with Armijo
/// backtracking. Stops when the gradient max-norm drops below tolerance.
inline LogisticModel train_lr(const FeatureTable& rows, std::span<const Label> labels, const LrOptions& opt = {}) {
  if (rows.rows.size() != labels.size()) throw ContractError("train_lr: rows/labels size mismatch");
  if (rows.rows.size() < 2) throw DegenerateDataError("train_lr: need at least 2 rows");
  detail::require_two_classes(labels, "train_lr");
  const auto n = static_cast<Eigen::Index>(rows.rows.size());
  const auto d = static_cast<Eigen::Index>(rows.schema.size());
  Eigen::MatrixXd x(n, d + 1);  // last column is the intercept
  Eigen::VectorXd y(n), s(n);
  const auto sw = detail::sample_weights(labels, opt.class_weighting);
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto& r = rows.rows[static_cast<std::size_t>(i)].values;
    for (Eigen::Index j = 0; j < d; ++j) x(i, j) = r[static_cast<std::size_t>(j)];
    x(i, d) = 1.0;
    y(i) = labels[static_cast<std::size_t>(i)] == Label::Diff ? 1.0 : 0.0;
    s(i) = sw[static_cast<std::size_t>(i)];
  }
  const double inv_n = 1.0 / static_cast<double>(n);
  Eigen::VectorXd penalty = Eigen::VectorXd::Constant(d + 1, opt.l2_strength);
  penalty(d) = 0.0;

  auto objective = [&](const Eigen::VectorXd& theta) {
    const Eigen::VectorXd z = x * theta;
    double f = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) f += s(i) * (detail::softplus(z(i)) - y(i) * z(i));
    return f * inv_n + 0.5 * (penalty.array() * theta.array().square()).sum();
  };

  Eigen::VectorXd theta = Eigen::VectorXd::Zero(d + 1);
  LogisticModel m;
  m.schema = rows.schema;
  m.class_weighting = opt.class_weighting;
  m.l2_strength = opt.l2_strength;
  double f = objective(theta);
  for (int it = 0;; ++it) {
    const Eigen::VectorXd z = x * theta;
    Eigen::VectorXd p(n), h(n);
    for (Eigen::Index i = 0; i < n; ++i) {
      p(i) = detail::sigmoid(z(i));
      h(i) = s(i) * p(i) * (1.0 - p(i)) * inv_n;
    }
    const Eigen::VectorXd grad = x.transpose() * (s.array() * (p - y).array()).matrix() * inv_n +
                                 (penalty.array() * theta.array()).matrix();
    m.gradient_norm = grad.cwiseAbs().maxCoeff();
    m.iterations = it;
    if (m.gradient_norm < opt.tolerance) {
      m.converged = true;
      break;
    }
    if (it >= opt.max_iters) break;
    Eigen::MatrixXd hess = x.transpose() * h.asDiagonal() * x;
    hess.diagonal() += penalty;
    // Tiny ridge keeps the system solvable on separable data without l2.
    hess.diagonal().array() += 1e-12 * (1.0 + hess.diagonal().cwiseAbs().maxCoeff());
    const Eigen::VectorXd step = -hess.ldlt().solve(grad);
    double t = 1.0;
    const double slope = grad.dot(step);
    double f_new = f;
    Eigen::VectorXd cand = theta;
    for (int ls = 0; ls < 60; ++ls) {
      cand = theta + t * step;
      f_new = objective(cand);
      if (f_new <= f + 1e-4 * t * slope) break;
      t *= 0.5;
    }
    if (!(f_new <= f)) break;  // no further progress possible at machine precision
    theta = cand;
    f = f_new;
  }
  m.weights.assign(theta.data(), theta.data() + d);
  m.bias = theta(d);
  if (!std::all_of(m.weights.begin(), m.weights.end(), [](double w) { return std::isfinite(w); }) ||
      !std::isfinite(m.bias))
    throw NumericalError("train_lr: non-finite parameters");
  return m;
}

/// Diff iff sigmoid(w.x + b) >= 0.5.
inline Prediction predict(const LogisticModel& m, std::span<const double> x) {
  if (x.size() != m.weights.size()) throw ContractError("predict: row width does not match LR schema");
  const double p = detail::sigmoid(m.margin(x));
  return {p >= 0.5 ? Label::Diff : Label::Syn, p};
}

// ---------------------------------------------------------------------------
// Gaussian-kernel SVM (SMO with second-order working-set selection)

struct SvmOptions {
  std::vector<double> c_grid{0.01, 0.1, 1.0, 10.0, 100.0};
  std::optional<double> gamma;  // default 1 / (n_features * var(X))
  int folds = 5;
  std::uint64_t seed = 0;
  ClassWeighting class_weighting = ClassWeighting::Balanced;
  double tolerance = 1e-3;
};

struct SvmModel {
  std::vector<std::string> schema;
  std::vector<std::vector<double>> support_vectors;
  std::vector<double> dual_coef;  // alpha_i * y_i
  double rho = 0.0;
  double gamma = 1.0;
  double c = 1.0;
  std::vector<double> cv_scores;  // mean CV balanced accuracy per grid value

  double decision(std::span<const double> x) const {
    double f = -rho;
    for (std::size_t i = 0; i < support_vectors.size(); ++i) {
      double d2 = 0.0;
      for (std::size_t j = 0; j < x.size(); ++j) {
        const double t = x[j] - support_vectors[i][j];
        d2 += t * t;
      }
      f += dual_coef[i] * std::exp(-gamma * d2);
    }
    return f;
  }
};

namespace detail {

inline double default_gamma(const std::vector<std::vector<double>>& x) {
  const std::size_t d = x.empty() ? 1 : x.front().size();
  double sum = 0.0, sq = 0.0, cnt = 0.0;
  for (const auto& r : x)
    for (double v : r) {
      sum += v;
      sq += v * v;
      cnt += 1.0;
    }
  const double mean = cnt > 0 ? sum / cnt : 0.0;
  const double var = cnt > 0 ? sq / cnt - mean * mean : 0.0;
  return var > 1e-12 ? 1.0 / (static_cast<double>(d) * var) : 1.0 / static_cast<double>(d);
}

/// Solves the C-SVC dual for fixed C; returns the model over support vectors.
inline SvmModel smo_fit(const std::vector<std::vector<double>>& x, std::span<const Label> labels, double c,
                        double gamma, ClassWeighting weighting, double eps) {
  const std::size_t n = x.size();
  std::vector<double> y(n), cbound(n);
  const auto sw = sample_weights(labels, weighting);
  for (std::size_t i = 0; i < n; ++i) {
    y[i] = labels[i] == Label::Diff ? 1.0 : -1.0;
    cbound[i] = c * sw[i];
  }
  std::vector<float> k(n * n);
  for (std::size_t i = 0; i < n; ++i) {
    k[i * n + i] = 1.0f;
    for (std::size_t j = i + 1; j < n; ++j) {
      double d2 = 0.0;
      for (std::size_t t = 0; t < x[i].size(); ++t) {
        const double diff = x[i][t] - x[j][t];
        d2 += diff * diff;
      }
      k[i * n + j] = k[j * n + i] = static_cast<float>(std::exp(-gamma * d2));
    }
  }
  auto kk = [&](std::size_t i, std::size_t j) { return static_cast<double>(k[i * n + j]); };
  constexpr double tau = 1e-12;
  std::vector<double> alpha(n, 0.0), grad(n, -1.0);
  auto upper = [&](std::size_t t) { return alpha[t] >= cbound[t]; };
  auto lower = [&](std::size_t t) { return alpha[t] <= 0.0; };
  const std::size_t max_iter = std::max<std::size_t>(10'000'000, n > 214'748 ? n : 100 * n);
  for (std::size_t iter = 0; iter < max_iter; ++iter) {
    double gmax = -std::numeric_limits<double>::infinity();
    double gmax2 = -std::numeric_limits<double>::infinity();
    std::ptrdiff_t ii = -1, jj = -1;
    for (std::size_t t = 0; t < n; ++t) {
      if (y[t] > 0) {
        if (!upper(t) && -grad[t] >= gmax) {
          gmax = -grad[t];
          ii = static_cast<std::ptrdiff_t>(t);
        }
      } else if (!lower(t) && grad[t] >= gmax) {
        gmax = grad[t];
        ii = static_cast<std::ptrdiff_t>(t);
      }
    }
    if (ii < 0) break;
    const auto i = static_cast<std::size_t>(ii);
    double obj_min = std::numeric_limits<double>::infinity();
    for (std::size_t t = 0; t < n; ++t) {
      const double qit = y[i] * y[t] * kk(i, t);
      if (y[t] > 0) {
        if (lower(t)) continue;
        const double gdiff = gmax + grad[t];
        gmax2 = std::max(gmax2, grad[t]);
        if (gdiff > 0) {
          double quad = kk(i, i) + kk(t, t) - 2.0 * y[i] * qit;
          const double obj = -(gdiff * gdiff) / (quad > 0 ? quad : tau);
          if (obj <= obj_min) {
            obj_min = obj;
            jj = static_cast<std::ptrdiff_t>(t);
          }
        }
      } else {
        if (upper(t)) continue;
        const double gdiff = gmax - grad[t];
        gmax2 = std::max(gmax2, -grad[t]);
        if (gdiff > 0) {
          double quad = kk(i, i) + kk(t, t) + 2.0 * y[i] * qit;
          const double obj = -(gdiff * gdiff) / (quad > 0 ? quad : tau);
          if (obj <= obj_min) {
            obj_min = obj;
            jj = static_cast<std::ptrdiff_t>(t);
          }
        }
      }
    }
    if (gmax + gmax2 < eps || jj < 0) break;
    const auto j = static_cast<std::size_t>(jj);
    const double qij = y[i] * y[j] * kk(i, j);
    const double ci = cbound[i], cj = cbound[j];
    const double ai_old = alpha[i], aj_old = alpha[j];
    if (y[i] != y[j]) {
      double quad = kk(i, i) + kk(j, j) + 2.0 * qij;
      if (quad <= 0) quad = tau;
      const double delta = (-grad[i] - grad[j]) / quad;
      const double diff = alpha[i] - alpha[j];
      alpha[i] += delta;
      alpha[j] += delta;
      if (diff > 0) {
        if (alpha[j] < 0) {
          alpha[j] = 0;
          alpha[i] = diff;
        }
      } else if (alpha[i] < 0) {
        alpha[i] = 0;
        alpha[j] = -diff;
      }
      if (diff > ci - cj) {
        if (alpha[i] > ci) {
          alpha[i] = ci;
          alpha[j] = ci - diff;
        }
      } else if (alpha[j] > cj) {
        alpha[j] = cj;
        alpha[i] = cj + diff;
      }
    } else {
      double quad = kk(i, i) + kk(j, j) - 2.0 * qij;
      if (quad <= 0) quad = tau;
      const double delta = (grad[i] - grad[j]) / quad;
      const double sum = alpha[i] + alpha[j];
      alpha[i] -= delta;
      alpha[j] += delta;
      if (sum > ci) {
        if (alpha[i] > ci) {
          alpha[i] = ci;
          alpha[j] = sum - ci;
        }
      } else if (alpha[j] < 0) {
        alpha[j] = 0;
        alpha[i] = sum;
      }
      if (sum > cj) {
        if (alpha[j] > cj) {
          alpha[j] = cj;
          alpha[i] = sum - cj;
        }
      } else if (alpha[i] < 0) {
        alpha[i] = 0;
        alpha[j] = sum;
      }
    }
    const double dai = alpha[i] - ai_old, daj = alpha[j] - aj_old;
    for (std::size_t t = 0; t < n; ++t)
      grad[t] += y[t] * (y[i] * kk(t, i) * dai + y[j] * kk(t, j) * daj);
  }
  // Bias from free variables, else the midpoint of the feasible interval.
  double ub = std::numeric_limits<double>::infinity(), lb = -ub, sum_free = 0.0;
  std::size_t n_free = 0;
  for (std::size_t t = 0; t < n; ++t) {
    const double yg = y[t] * grad[t];
    if (upper(t)) {
      if (y[t] < 0) ub = std::min(ub, yg);
      else lb = std::max(lb, yg);
    } else if (lower(t)) {
      if (y[t] > 0) ub = std::min(ub, yg);
      else lb = std::max(lb, yg);
    } else {
      ++n_free;
      sum_free += yg;
    }
  }
  SvmModel m;
  m.rho = n_free > 0 ? sum_free / static_cast<double>(n_free) : (ub + lb) / 2.0;
  m.gamma = gamma;
  m.c = c;
  for (std::size_t t = 0; t < n; ++t) {
    if (alpha[t] > 0.0) {
      m.support_vectors.push_back(x[t]);
      m.dual_coef.push_back(alpha[t] * y[t]);
    }
  }
  return m;
}

/// Stratified fold assignment (each class dealt round-robin after a seeded shuffle).
inline std::vector<int> stratified_folds(std::span<const Label> labels, int folds, std::uint64_t seed) {
  std::vector<int> fold(labels.size(), 0);
  Rng rng(seed);
  for (const Label cls : {Label::Syn, Label::Diff}) {
    std::vector<std::size_t> idx;
    for (std::size_t i = 0; i < labels.size(); ++i)
      if (labels[i] == cls) idx.push_back(i);
    rng.shuffle(std::span<std::size_t>(idx));
    for (std::size_t r = 0; r < idx.size(); ++r) fold[idx[r]] = static_cast<int>(r % static_cast<std::size_t>(folds));
  }
  return fold;
}

inline double balanced_accuracy_raw(std::span<const Label> pred, std::span<const Label> truth) {
  double tp = 0, fn = 0, tn = 0, fp = 0;
  for (std::size_t i = 0; i < truth.size(); ++i) {
    if (truth[i] == Label::Diff) (pred[i] == Label::Diff ? tp : fn) += 1;
    else (pred[i] == Label::Syn ? tn : fp) += 1;
  }
  return 0.5 * (tp / (tp + fn) + tn / (tn + fp));
}

}  // namespace detail

/// Diff iff the decision value is >= 0.
inline Prediction predict(const SvmModel& m, std::span<const double> x) {
  if (!m.support_vectors.empty() && x.size() != m.support_vectors.front().size())
    throw ContractError("predict: row width does not match SVM schema");
  const double f = m.decision(x);
  return {f >= 0.0 ? Label::Diff : Label::Syn, f};
}

/// Chooses C by stratified k-fold CV balanced accuracy (ties -> smaller C),
/// then refits on all rows.
inline SvmModel train_svm_gaussian(const FeatureTable& rows, std::span<const Label> labels, const SvmOptions& opt = {}) {
  if (rows.rows.size() != labels.size()) throw ContractError("train_svm: rows/labels size mismatch");
  if (opt.c_grid.empty()) throw ConfigError("train_svm: empty C grid");
  if (opt.folds < 2) throw ConfigError("train_svm: need at least 2 folds");
  detail::require_two_classes(labels, "train_svm");
  const auto n_diff = static_cast<std::size_t>(std::count(labels.begin(), labels.end(), Label::Diff));
  const auto n_syn = labels.size() - n_diff;
  const auto folds = static_cast<std::size_t>(opt.folds);
  if (n_diff < folds || n_syn < folds)
    throw DomainError("train_svm: " + std::to_string(opt.folds) + "-fold CV needs at least that many rows per class");
  std::vector<std::vector<double>> x;
  x.reserve(rows.rows.size());
  for (const auto& r : rows.rows) x.push_back(r.values);
  const double gamma = opt.gamma.value_or(detail::default_gamma(x));
  if (!(gamma > 0.0)) throw ConfigError("train_svm: gamma must be positive");

  auto grid = opt.c_grid;
  std::sort(grid.begin(), grid.end());
  std::vector<double> scores;
  if (grid.size() > 1) {
    const auto fold = detail::stratified_folds(labels, opt.folds, derive_seed(opt.seed, "models", "svm-folds"));
    for (double c : grid) {
      double total = 0.0;
      for (int f = 0; f < opt.folds; ++f) {
        std::vector<std::vector<double>> xtr, xva;
        std::vector<Label> ytr, yva;
        for (std::size_t i = 0; i < x.size(); ++i) {
          if (fold[i] == f) {
            xva.push_back(x[i]);
            yva.push_back(labels[i]);
          } else {
            xtr.push_back(x[i]);
            ytr.push_back(labels[i]);
          }
        }
        const auto m = detail::smo_fit(xtr, ytr, c, gamma, opt.class_weighting, opt.tolerance);
        std::vector<Label> pred;
        for (const auto& v : xva) pred.push_back(predict(m, v).label);
        total += detail::balanced_accuracy_raw(pred, yva);
      }
      scores.push_back(total / static_cast<double>(opt.folds));
    }
  } else {
    scores.push_back(std::numeric_limits<double>::quiet_NaN());
  }
  std::size_t best = 0;
  for (std::size_t g = 1; g < grid.size(); ++g)
    if (scores[g] > scores[best]) best = g;
  auto m = detail::smo_fit(x, labels, grid[best], gamma, opt.class_weighting, opt.tolerance);
  m.schema = rows.schema;
  m.cv_scores = scores;
  return m;
}

// ---------------------------------------------------------------------------
// Constant baseline

struct ConstantModel {
  Label label = Label::Diff;
};

inline Prediction predict(const ConstantModel& m, std::span<const double>) {
  return {m.label, m.label == Label::Diff ? 1.0 : 0.0};
}

inline ConstantModel constant_baseline(Label l) { return {l}; }

using Model = std::variant<ConstantModel, LogisticModel, SvmModel>;

inline Prediction predict(const Model& m, std::span<const double> x) {
  return std::visit([&](const auto& mm) { return predict(mm, x); }, m);
}

inline std::vector<std::string> frequency_columns(const std::vector<std::string>& schema) {
  std::vector<std::string> out;
  for (const auto& s : schema)
    if (s.starts_with("freq_") || s.starts_with("fg_")) out.push_back(s);
  return out;
}

/// train_lr restricted to the frequency columns of `rows`.
inline LogisticModel frequency_only_lr(const FeatureTable& rows, std::span<const Label> labels,
                                       const LrOptions& opt = {}) {
  const auto cols = frequency_columns(rows.schema);
  if (cols.empty()) throw ConfigError("frequency_only_lr: no frequency columns in schema");
  return train_lr(rows.select(cols), labels, opt);
}

// ---------------------------------------------------------------------------
// Fitted pipeline: column projection -> polynomial expansion -> standardizer -> model

struct ModelSpec {
  enum class Kind { ConstantSyn, ConstantDiff, Lr, Svm } kind = Kind::Lr;
  std::vector<std::string> columns;  // base features consumed; empty = all
  int polynomial_degree = 1;
  bool standardize = true;
  LrOptions lr;
  SvmOptions svm;
};

inline std::string_view to_string(ModelSpec::Kind k) {
  switch (k) {
    case ModelSpec::Kind::ConstantSyn: return "constant-syn";
    case ModelSpec::Kind::ConstantDiff: return "constant-diff";
    case ModelSpec::Kind::Lr: return "lr";
    case ModelSpec::Kind::Svm: return "svm";
  }
  return "?";
}

inline ModelSpec::Kind parse_model_kind(std::string_view s) {
  if (s == "constant-syn") return ModelSpec::Kind::ConstantSyn;
  if (s == "constant-diff") return ModelSpec::Kind::ConstantDiff;
  if (s == "lr") return ModelSpec::Kind::Lr;
  if (s == "svm") return ModelSpec::Kind::Svm;
  throw ConfigError("unknown model kind '" + std::string(s) + "'");
}

struct Pipeline {
  std::vector<std::string> input_schema;  // base columns, in order
  int polynomial_degree = 1;
  std::optional<Standardizer> standardizer;
  Model model;

  std::vector<double> transform(std::span<const double> base) const {
    std::vector<double> x(base.begin(), base.end());
    x = polynomial_expand(x, polynomial_degree);
    if (standardizer) x = standardizer->apply(x);
    return x;
  }

  /// Projects `table` onto input_schema (ContractError if columns are missing).
  std::vector<Prediction> predict_table(const FeatureTable& table) const {
    const auto proj = table.select(input_schema);
    std::vector<Prediction> out;
    out.reserve(proj.rows.size());
    for (const auto& r : proj.rows) out.push_back(predict(model, transform(r.values)));
    return out;
  }
};

inline Pipeline fit_pipeline(const FeatureTable& table, std::span<const Label> labels, const ModelSpec& spec) {
  Pipeline p;
  p.input_schema = spec.columns.empty() ? table.schema : spec.columns;
  p.polynomial_degree = spec.polynomial_degree;
  if (spec.kind == ModelSpec::Kind::ConstantSyn || spec.kind == ModelSpec::Kind::ConstantDiff) {
    p.model = constant_baseline(spec.kind == ModelSpec::Kind::ConstantSyn ? Label::Syn : Label::Diff);
    return p;
  }
  auto x = polynomial_expand(table.select(p.input_schema), spec.polynomial_degree);
  if (spec.standardize) {
    p.standardizer = fit_standardizer(x);
    x = p.standardizer->apply(x);
  }
  if (spec.kind == ModelSpec::Kind::Lr) p.model = train_lr(x, labels, spec.lr);
  else p.model = train_svm_gaussian(x, labels, spec.svm);
  return p;
}

// ---------------------------------------------------------------------------
// Threshold tuning and the control-pair rule

struct TunedTau {
  double tau = 0.0;
  double balanced_accuracy = 0.0;
};

/// Scans min(delta), midpoints between consecutive distinct deltas, and a
/// value just above max(delta); keeps the first (smallest) tau of maximal
/// training balanced accuracy under classify_delta.
inline TunedTau tune_tau(std::span<const double> deltas, std::span<const Label> labels) {
  if (deltas.size() != labels.size()) throw ContractError("tune_tau: size mismatch");
  detail::require_two_classes(labels, "tune_tau");
  std::vector<double> u(deltas.begin(), deltas.end());
  std::sort(u.begin(), u.end());
  u.erase(std::unique(u.begin(), u.end()), u.end());
  std::vector<double> cand{u.front()};
  for (std::size_t i = 0; i + 1 < u.size(); ++i) cand.push_back(u[i] + (u[i + 1] - u[i]) / 2.0);
  cand.push_back(std::nextafter(u.back(), std::numeric_limits<double>::infinity()));

  // Sweep candidates in ascending order with a sorted pass over the data.
  std::vector<std::size_t> order(deltas.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](auto a, auto b) { return deltas[a] < deltas[b]; });
  const double n_diff = static_cast<double>(std::count(labels.begin(), labels.end(), Label::Diff));
  const double n_syn = static_cast<double>(labels.size()) - n_diff;
  double syn_below = 0, diff_below = 0;  // items with delta < tau are predicted Syn
  std::size_t k = 0;
  TunedTau best{cand.front(), -1.0};
  for (double tau : cand) {
    while (k < order.size() && deltas[order[k]] < tau) {
      (labels[order[k]] == Label::Syn ? syn_below : diff_below) += 1;
      ++k;
    }
    const double ba = 0.5 * (syn_below / n_syn + (n_diff - diff_below) / n_diff);
    if (ba > best.balanced_accuracy) best = {tau, ba};
  }
  return best;
}

struct ControlSelectionFailure : Error {
  using Error::Error;
};

struct ControlRule {
  std::uint64_t seed = 0;
  std::vector<std::string> candidate_pool;
  std::size_t max_attempts = 1000;
};

struct XkDecision {
  Label label = Label::Diff;
  std::string control_a, control_b;
  std::size_t attempts = 0;
};

/// Draws random control pairs from the pool (stream keyed by the pair) until
/// one has SD(T1) below the pair's; Diff iff the pair's SD(T2) exceeds the
/// control's.
inline XkDecision xk_classify(const std::string& u, const std::string& v, const Period& p1, const Period& p2,
                              const ControlRule& rule, const SdSpec& spec) {
  if (rule.candidate_pool.size() < 2) throw ConfigError("xk_classify: candidate pool needs at least 2 words");
  const double sd1 = sd(p1, u, v, spec);
  const double sd2 = sd(p2, u, v, spec);
  Rng rng(derive_seed(rule.seed, "models", "xk-control:" + u + "|" + v));
  const auto& pool = rule.candidate_pool;
  for (std::size_t attempt = 1; attempt <= rule.max_attempts; ++attempt) {
    const auto i = rng.below(pool.size());
    auto j = rng.below(pool.size() - 1);
    if (j >= i) ++j;
    const auto& a = pool[i];
    const auto& b = pool[j];
    if ((a == u && b == v) || (a == v && b == u)) continue;
    if (sd(p1, a, b, spec) < sd1) {
      return {sd2 > sd(p2, a, b, spec) ? Label::Diff : Label::Syn, a, b, attempt};
    }
  }
  throw ControlSelectionFailure("xk_classify: no control pair with smaller SD(T1) than (" + u + ", " + v + ") in " +
                                std::to_string(rule.max_attempts) + " attempts");
}

// ---------------------------------------------------------------------------
// Persistence

inline nlohmann::json to_json(const Model& model) {
  return std::visit(
      [](const auto& m) -> nlohmann::json {
        using T = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<T, ConstantModel>) {
          return {{"type", "constant"}, {"label", std::string(to_string(m.label))}};
        } else if constexpr (std::is_same_v<T, LogisticModel>) {
          return {{"type", "lr"},
                  {"schema", m.schema},
                  {"weights", m.weights},
                  {"bias", m.bias},
                  {"class_weighting", m.class_weighting == ClassWeighting::Balanced ? "balanced" : "none"},
                  {"l2_strength", m.l2_strength},
                  {"iterations", m.iterations},
                  {"converged", m.converged}};
        } else {
          return {{"type", "svm"},    {"schema", m.schema}, {"support_vectors", m.support_vectors},
                  {"dual_coef", m.dual_coef}, {"rho", m.rho}, {"gamma", m.gamma},
                  {"c", m.c},          {"cv_scores", m.cv_scores}};
        }
      },
      model);
}

inline Model model_from_json(const nlohmann::json& j) {
  const auto type = j.at("type").get<std::string>();
  if (type == "constant") return ConstantModel{parse_label(j.at("label").get<std::string>())};
  if (type == "lr") {
    LogisticModel m;
    m.schema = j.at("schema").get<std::vector<std::string>>();
    m.weights = j.at("weights").get<std::vector<double>>();
    m.bias = j.at("bias").get<double>();
    m.class_weighting = parse_class_weighting(j.at("class_weighting").get<std::string>());
    m.l2_strength = j.at("l2_strength").get<double>();
    m.iterations = j.value("iterations", 0);
    m.converged = j.value("converged", false);
    if (m.weights.size() != m.schema.size()) throw ContractError("LR model: weights/schema length mismatch");
    return m;
  }
  if (type == "svm") {
    SvmModel m;
    m.schema = j.at("schema").get<std::vector<std::string>>();
    m.support_vectors = j.at("support_vectors").get<std::vector<std::vector<double>>>();
    m.dual_coef = j.at("dual_coef").get<std::vector<double>>();
    m.rho = j.at("rho").get<double>();
    m.gamma = j.at("gamma").get<double>();
    m.c = j.at("c").get<double>();
    for (const auto& s : j.value("cv_scores", nlohmann::json::array()))
      m.cv_scores.push_back(s.is_null() ? std::numeric_limits<double>::quiet_NaN() : s.get<double>());
    if (m.support_vectors.size() != m.dual_coef.size()) throw ContractError("SVM model: coefficient count mismatch");
    return m;
  }
  throw ContractError("unknown model type '" + type + "'");
}

inline nlohmann::json to_json(const Pipeline& p) {
  nlohmann::json j{{"input_schema", p.input_schema}, {"polynomial_degree", p.polynomial_degree}, {"model", to_json(p.model)}};
  j["standardizer"] = p.standardizer ? to_json(*p.standardizer) : nlohmann::json(nullptr);
  return j;
}

inline Pipeline pipeline_from_json(const nlohmann::json& j) {
  Pipeline p;
  p.input_schema = j.at("input_schema").get<std::vector<std::string>>();
  p.polynomial_degree = j.at("polynomial_degree").get<int>();
  if (!j.at("standardizer").is_null()) p.standardizer = standardizer_from_json(j.at("standardizer"));
  p.model = model_from_json(j.at("model"));
  return p;
}

}  // namespace synodiff
