#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "synodiff/alignment.hpp"
#include "synodiff/common.hpp"
#include "synodiff/lexicon.hpp"
#include "synodiff/measures.hpp"

namespace synodiff {

struct FeatureRow {
  std::size_t pair_id = 0;  // index into the dataset
  std::vector<double> values;
};

struct FeatureTable {
  std::vector<std::string> schema;
  std::vector<FeatureRow> rows;

  std::size_t column(const std::string& name) const {
    const auto it = std::find(schema.begin(), schema.end(), name);
    if (it == schema.end()) throw ContractError("feature '" + name + "' not in schema");
    return static_cast<std::size_t>(it - schema.begin());
  }

  /// Projection onto `names`, in that order.
  FeatureTable select(const std::vector<std::string>& names) const {
    std::vector<std::size_t> cols;
    for (const auto& n : names) cols.push_back(column(n));
    FeatureTable out{names, {}};
    out.rows.reserve(rows.size());
    for (const auto& r : rows) {
      FeatureRow nr{r.pair_id, {}};
      for (auto c : cols) nr.values.push_back(r.values[c]);
      out.rows.push_back(std::move(nr));
    }
    return out;
  }
};

enum class FrequencyMode { None, Raw, Groups, Both };

inline FrequencyMode parse_frequency_mode(std::string_view s) {
  if (s == "none") return FrequencyMode::None;
  if (s == "raw" || s == "fr") return FrequencyMode::Raw;
  if (s == "groups" || s == "fg") return FrequencyMode::Groups;
  if (s == "both") return FrequencyMode::Both;
  throw ConfigError("unknown frequency mode '" + std::string(s) + "'");
}

inline std::string_view to_string(FrequencyMode m) {
  switch (m) {
    case FrequencyMode::None: return "none";
    case FrequencyMode::Raw: return "raw";
    case FrequencyMode::Groups: return "groups";
    case FrequencyMode::Both: return "both";
  }
  return "?";
}

struct FeatureSetSpec {
  std::vector<SdSpec> include_sd;
  std::vector<DdSpec> include_dd;
  FrequencyMode frequency = FrequencyMode::None;
  int polynomial_degree = 1;
  bool standardize = true;
  bool log_raw_frequency = true;  // raw counts enter as log(1 + count)

  void validate() const {
    if (include_sd.empty() && include_dd.empty() && frequency == FrequencyMode::None)
      throw ConfigError("feature spec enables no feature family");
    if (polynomial_degree != 1 && polynomial_degree != 2)
      throw ConfigError("unsupported polynomial degree " + std::to_string(polynomial_degree));
    auto count_kind = [](const auto& v, auto kind) {
      return std::count_if(v.begin(), v.end(), [&](const auto& s) { return s.kind == kind; });
    };
    if (count_kind(include_sd, SdSpec::Kind::Cosine) > 1 || count_kind(include_sd, SdSpec::Kind::Neighborhood) > 1)
      throw ConfigError("at most one SD spec per kind");
    if (count_kind(include_dd, DdSpec::Kind::Procrustes) > 1 || count_kind(include_dd, DdSpec::Kind::Neighborhood) > 1)
      throw ConfigError("at most one DD spec per kind");
    for (const auto& s : include_sd) s.validate();
    for (const auto& d : include_dd) d.validate();
  }

  std::vector<std::string> base_schema() const {
    std::vector<std::string> s;
    for (const auto& sd : include_sd) {
      const auto tag = sd.kind == SdSpec::Kind::Cosine ? "cd" : "nk";
      s.push_back(std::string("sd_t1_") + tag);
      s.push_back(std::string("sd_t2_") + tag);
    }
    for (const auto& dd : include_dd) {
      const auto tag = dd.kind == DdSpec::Kind::Procrustes ? "op" : "nk";
      s.push_back(std::string("dd_u_") + tag);
      s.push_back(std::string("dd_v_") + tag);
    }
    if (frequency == FrequencyMode::Raw || frequency == FrequencyMode::Both)
      for (const char* n : {"freq_u_t1", "freq_v_t1", "freq_u_t2", "freq_v_t2"}) s.emplace_back(n);
    if (frequency == FrequencyMode::Groups || frequency == FrequencyMode::Both)
      for (const char* n : {"fg_u_t1", "fg_v_t1", "fg_u_t2", "fg_v_t2"}) s.emplace_back(n);
    return s;
  }
};

inline nlohmann::json to_json(const FeatureSetSpec& s) {
  std::vector<std::string> sds, dds;
  for (const auto& x : s.include_sd) sds.push_back(x.name());
  for (const auto& x : s.include_dd) dds.push_back(x.name());
  return {{"sd", sds},
          {"dd", dds},
          {"frequency", std::string(to_string(s.frequency))},
          {"polynomial_degree", s.polynomial_degree},
          {"standardize", s.standardize},
          {"log_raw_frequency", s.log_raw_frequency}};
}

inline FeatureSetSpec feature_spec_from_json(const nlohmann::json& j) {
  FeatureSetSpec s;
  for (const auto& x : j.at("sd")) s.include_sd.push_back(SdSpec::parse(x.get<std::string>()));
  for (const auto& x : j.at("dd")) s.include_dd.push_back(DdSpec::parse(x.get<std::string>()));
  s.frequency = parse_frequency_mode(j.at("frequency").get<std::string>());
  s.polynomial_degree = j.value("polynomial_degree", 1);
  s.standardize = j.value("standardize", true);
  s.log_raw_frequency = j.value("log_raw_frequency", true);
  return s;
}

/// Everything featurize reads besides the pairs. Frequency tables must carry
/// groups when groups are requested.
struct FeatureInputs {
  const Period* t1 = nullptr;
  const Period* t2 = nullptr;
  const AlignmentMap* alignment = nullptr;  // rotates T2 into T1 coordinates
  const FrequencyTable* freq_t1 = nullptr;
  const FrequencyTable* freq_t2 = nullptr;
};

struct Featurization {
  FeatureTable table;
  std::vector<std::string> excluded;  // "<pair_id> u v: reason"
};

/// n + n(n+1)/2 outputs: originals, then x_i * x_j for i <= j in row-major order.
inline std::vector<std::string> polynomial_schema(const std::vector<std::string>& schema) {
  std::vector<std::string> out = schema;
  for (std::size_t i = 0; i < schema.size(); ++i)
    for (std::size_t j = i; j < schema.size(); ++j)
      out.push_back(i == j ? schema[i] + "^2" : schema[i] + "*" + schema[j]);
  return out;
}

inline std::vector<double> polynomial_expand(const std::vector<double>& x, int degree = 2) {
  if (degree == 1) return x;
  if (degree != 2) throw ConfigError("unsupported polynomial degree " + std::to_string(degree));
  std::vector<double> out = x;
  out.reserve(x.size() + x.size() * (x.size() + 1) / 2);
  for (std::size_t i = 0; i < x.size(); ++i)
    for (std::size_t j = i; j < x.size(); ++j) out.push_back(x[i] * x[j]);
  return out;
}

inline FeatureRow polynomial_expand(const FeatureRow& row, int degree = 2) {
  return {row.pair_id, polynomial_expand(row.values, degree)};
}

inline FeatureTable polynomial_expand(const FeatureTable& t, int degree = 2) {
  if (degree == 1) return t;
  FeatureTable out{polynomial_schema(t.schema), {}};
  out.rows.reserve(t.rows.size());
  for (const auto& r : t.rows) out.rows.push_back(polynomial_expand(r, degree));
  return out;
}

/// Base (degree-1) features per pair. Pairs failing a lookup or producing a
/// non-finite value are excluded and reported. Polynomial expansion and
/// standardization are applied later, per training split.
inline Featurization featurize(const std::vector<PairRecord>& pairs, const FeatureInputs& in,
                               const FeatureSetSpec& spec) {
  spec.validate();
  const bool need_dd_op = std::any_of(spec.include_dd.begin(), spec.include_dd.end(),
                                      [](const DdSpec& d) { return d.kind == DdSpec::Kind::Procrustes; });
  const bool need_freq = spec.frequency != FrequencyMode::None;
  if (!in.t1 || !in.t2) throw ConfigError("featurize: both periods required");
  if (need_dd_op && !in.alignment) throw ConfigError("featurize: DD(op) requires an alignment");
  if (need_freq && (!in.freq_t1 || !in.freq_t2)) throw ConfigError("featurize: frequency tables required");

  Featurization out;
  out.table.schema = spec.base_schema();
  for (std::size_t id = 0; id < pairs.size(); ++id) {
    const auto& p = pairs[id];
    FeatureRow row{id, {}};
    row.values.reserve(out.table.schema.size());
    try {
      for (const auto& s : spec.include_sd) {
        row.values.push_back(sd(*in.t1, p.u, p.v, s));
        row.values.push_back(sd(*in.t2, p.u, p.v, s));
      }
      static const AlignmentMap unused;
      const AlignmentMap& map = in.alignment ? *in.alignment : unused;
      for (const auto& d : spec.include_dd) {
        row.values.push_back(dd(*in.t1, *in.t2, map, p.u, d));
        row.values.push_back(dd(*in.t1, *in.t2, map, p.v, d));
      }
      auto lookup_count = [&](const FrequencyTable& t, const std::string& w) {
        const auto c = t.count(w, p.pos);
        if (!c) throw LookupError("no " + t.period + " count for '" + w + "'");
        return *c;
      };
      auto lookup_group = [&](const FrequencyTable& t, const std::string& w) {
        const auto g = t.group(w, p.pos);
        if (!g) throw LookupError("no " + t.period + " frequency group for '" + w + "'");
        return static_cast<double>(*g);
      };
      if (spec.frequency == FrequencyMode::Raw || spec.frequency == FrequencyMode::Both) {
        for (const auto* t : {in.freq_t1, in.freq_t2}) {
          for (const auto* w : {&p.u, &p.v}) {
            const double c = static_cast<double>(lookup_count(*t, *w));
            row.values.push_back(spec.log_raw_frequency ? std::log1p(c) : c);
          }
        }
      }
      if (spec.frequency == FrequencyMode::Groups || spec.frequency == FrequencyMode::Both) {
        for (const auto* t : {in.freq_t1, in.freq_t2})
          for (const auto* w : {&p.u, &p.v}) row.values.push_back(lookup_group(*t, *w));
      }
    } catch (const LookupError& e) {
      out.excluded.push_back(std::to_string(id) + " " + p.u + " " + p.v + ": " + e.what());
      continue;
    } catch (const DomainError& e) {
      out.excluded.push_back(std::to_string(id) + " " + p.u + " " + p.v + ": " + e.what());
      continue;
    }
    if (!std::all_of(row.values.begin(), row.values.end(), [](double v) { return std::isfinite(v); })) {
      out.excluded.push_back(std::to_string(id) + " " + p.u + " " + p.v + ": non-finite feature");
      continue;
    }
    out.table.rows.push_back(std::move(row));
  }
  return out;
}

/// Per-column z-scoring with training-split statistics (population stddev).
struct Standardizer {
  std::vector<double> mean, stddev;
  std::vector<bool> passthrough;  // zero-variance columns are left untouched
  std::vector<std::string> warnings;

  std::vector<double> apply(const std::vector<double>& x) const {
    if (x.size() != mean.size()) throw ContractError("standardizer: row width mismatch");
    std::vector<double> y(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) y[i] = passthrough[i] ? x[i] : (x[i] - mean[i]) / stddev[i];
    return y;
  }

  FeatureTable apply(const FeatureTable& t) const {
    FeatureTable out{t.schema, {}};
    out.rows.reserve(t.rows.size());
    for (const auto& r : t.rows) out.rows.push_back({r.pair_id, apply(r.values)});
    return out;
  }
};

inline Standardizer fit_standardizer(const FeatureTable& train) {
  if (train.rows.empty()) throw DomainError("fit_standardizer: empty training set");
  const std::size_t d = train.schema.size();
  const double n = static_cast<double>(train.rows.size());
  Standardizer s;
  s.mean.assign(d, 0.0);
  s.stddev.assign(d, 0.0);
  s.passthrough.assign(d, false);
  for (const auto& r : train.rows)
    for (std::size_t j = 0; j < d; ++j) s.mean[j] += r.values[j];
  for (auto& m : s.mean) m /= n;
  for (const auto& r : train.rows)
    for (std::size_t j = 0; j < d; ++j) s.stddev[j] += (r.values[j] - s.mean[j]) * (r.values[j] - s.mean[j]);
  for (std::size_t j = 0; j < d; ++j) {
    s.stddev[j] = std::sqrt(s.stddev[j] / n);
    if (!(s.stddev[j] > 1e-12 * std::max(1.0, std::abs(s.mean[j])))) {
      s.passthrough[j] = true;
      s.warnings.push_back("feature '" + train.schema[j] + "' has zero variance; left unscaled");
    }
  }
  return s;
}

inline nlohmann::json to_json(const Standardizer& s) {
  return {{"mean", s.mean}, {"stddev", s.stddev}, {"passthrough", s.passthrough}};
}

inline Standardizer standardizer_from_json(const nlohmann::json& j) {
  Standardizer s;
  s.mean = j.at("mean").get<std::vector<double>>();
  s.stddev = j.at("stddev").get<std::vector<double>>();
  s.passthrough = j.at("passthrough").get<std::vector<bool>>();
  return s;
}

/// "pair_id,u,v,<schema...>" with %.17g values.
inline std::string feature_csv(const FeatureTable& t, const std::vector<PairRecord>& pairs) {
  std::string out = "pair_id,u,v";
  for (const auto& s : t.schema) out += "," + s;
  out += "\n";
  char buf[40];
  for (const auto& r : t.rows) {
    out += std::to_string(r.pair_id) + "," + pairs.at(r.pair_id).u + "," + pairs.at(r.pair_id).v;
    for (double v : r.values) {
      std::snprintf(buf, sizeof buf, "%.17g", v);
      out += ",";
      out += buf;
    }
    out += "\n";
  }
  return out;
}

inline FeatureTable read_feature_csv(std::istream& in, const std::string& source = "features") {
  FeatureTable t;
  std::string line;
  if (!std::getline(in, line)) throw ParseError(source + ": empty feature file");
  const auto header = io::split(io::trim(line), ',');
  if (header.size() < 4 || header[0] != "pair_id") throw ParseError(source + ": bad header");
  for (std::size_t i = 3; i < header.size(); ++i) t.schema.emplace_back(header[i]);
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    const auto tr = io::trim(line);
    if (tr.empty()) continue;
    const auto f = io::split(tr, ',');
    if (f.size() != header.size()) throw ParseError(source + " line " + std::to_string(lineno) + ": wrong width");
    FeatureRow r;
    const auto id = io::parse_int<std::size_t>(f[0]);
    if (!id) throw ParseError(source + " line " + std::to_string(lineno) + ": bad pair_id");
    r.pair_id = *id;
    for (std::size_t i = 3; i < f.size(); ++i) {
      const auto v = io::parse_double(f[i]);
      if (!v || !std::isfinite(*v)) throw ParseError(source + " line " + std::to_string(lineno) + ": bad value");
      r.values.push_back(*v);
    }
    t.rows.push_back(std::move(r));
  }
  return t;
}

}  // namespace synodiff
