#pragma once

// End-to-end orchestration behind the CLI subcommands. Every command reads
// its inputs from the config and the upstream artifacts in out_dir, and
// writes its outputs atomically into out_dir.
//
//   build-dataset  dataset.csv, dataset_stats.json, targets_<POS>.txt, excluded_pairs.tsv
//   features       features.csv, features.json, alignment.mat, alignment.json
//   train          model.json
//   evaluate       report.json, report.csv, report.txt, thresholds.json
//   analyze        analysis.json, fig1_wn_breakdown.csv, fig3_wn_distances.csv,
//                  fig5_distances.csv, polysemy.csv, table5_significance.csv

#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "synodiff/alignment.hpp"
#include "synodiff/config.hpp"
#include "synodiff/evaluation.hpp"
#include "synodiff/features.hpp"
#include "synodiff/lexicon.hpp"
#include "synodiff/measures.hpp"
#include "synodiff/models.hpp"
#include "synodiff/vecspace.hpp"

namespace synodiff::pipeline {

namespace fs = std::filesystem;

inline std::string targets_file(Pos p) { return "targets_" + std::string(to_string(p)) + ".txt"; }

inline std::string join_lines(const std::vector<std::string>& v) {
  std::string out;
  for (const auto& s : v) out += s + "\n";
  return out;
}

// ---------------------------------------------------------------------------
// build-dataset

struct BuildResult {
  std::vector<PairRecord> records;
  std::map<Pos, DatasetStats> stats;
  std::vector<std::string> excluded;
  std::map<Pos, std::vector<std::string>> targets;
};

inline nlohmann::json stats_json(const std::map<Pos, DatasetStats>& stats) {
  nlohmann::json j;
  DatasetStats all;
  for (const auto& [p, s] : stats) {
    j[std::string(to_string(p))] = to_json(s);
    all += s;
  }
  j["All"] = to_json(all);
  return j;
}

inline BuildResult build(const RunConfig& cfg) {
  cfg.validate_paths();
  const auto pairs = load_t1_pairs(cfg.t1_pairs);
  const auto db = load_synsets(cfg.synsets);
  const auto freqs = load_frequencies(cfg.frequencies);
  const auto t1 = load_space(cfg.embeddings_t1);
  const auto t2 = load_space(cfg.embeddings_t2);
  TargetCriteria criteria;
  criteria.min_count = cfg.min_count;
  criteria.min_length = cfg.min_length;
  BuildResult out;
  for (const Pos p : cfg.pos) {
    auto targets = select_targets(t1, freqs, p, criteria);
    std::erase_if(targets, [&](const std::string& w) { return !t2.contains(w); });
    auto built = build_dataset(pairs, db, targets, p);
    out.records.insert(out.records.end(), built.records.begin(), built.records.end());
    out.excluded.insert(out.excluded.end(), built.excluded.begin(), built.excluded.end());
    out.stats[p] = built.stats;
    out.targets[p] = std::move(targets);
  }
  return out;
}

inline void cmd_build_dataset(const RunConfig& cfg) {
  const auto r = build(cfg);
  io::atomic_write(cfg.out_dir / "dataset.csv", dataset_csv(r.records));
  io::atomic_write(cfg.out_dir / "dataset_stats.json", stats_json(r.stats).dump(2) + "\n");
  io::atomic_write(cfg.out_dir / "excluded_pairs.tsv", join_lines(r.excluded));
  for (const auto& [p, t] : r.targets) io::atomic_write(cfg.out_dir / targets_file(p), join_lines(t));
}

// ---------------------------------------------------------------------------
// Shared state for the downstream commands

struct Workspace {
  RunConfig cfg;
  VectorSpace t1, t2;
  std::unique_ptr<Period> p1, p2;
  AlignmentMap alignment;
  FrequencyTable freq_t1, freq_t2;
  std::vector<PairRecord> dataset;
  std::map<Pos, std::vector<std::string>> targets;

  FeatureInputs inputs() const { return {p1.get(), p2.get(), &alignment, &freq_t1, &freq_t2}; }
};

inline std::vector<std::string> read_lines(const fs::path& path) {
  std::istringstream in(io::read_file(path));
  std::vector<std::string> out;
  std::string line;
  while (std::getline(in, line))
    if (const auto t = io::trim(line); !t.empty()) out.emplace_back(t);
  return out;
}

inline std::unique_ptr<Workspace> open_workspace(const RunConfig& cfg) {
  cfg.validate_paths();
  auto ws = std::make_unique<Workspace>();
  ws->cfg = cfg;
  ws->dataset = load_dataset(cfg.out_dir / "dataset.csv");
  std::erase_if(ws->dataset, [&](const PairRecord& r) {
    return std::find(cfg.pos.begin(), cfg.pos.end(), r.pos) == cfg.pos.end();
  });
  for (const Pos p : cfg.pos) ws->targets[p] = read_lines(cfg.out_dir / targets_file(p));
  ws->t1 = load_space(cfg.embeddings_t1);
  ws->t2 = load_space(cfg.embeddings_t2);
  ws->p1 = std::make_unique<Period>(ws->t1);
  ws->p2 = std::make_unique<Period>(ws->t2);
  ws->alignment = fit_procrustes(ws->t2, ws->t1);
  auto freqs = load_frequencies(cfg.frequencies);
  for (const auto* d : {&cfg.t1_decade, &cfg.t2_decade})
    if (!freqs.contains(*d)) throw ConfigError("no frequency table for decade " + *d);
  ws->freq_t1 = freqs.at(cfg.t1_decade);
  ws->freq_t2 = freqs.at(cfg.t2_decade);
  // Groups are formed per POS over that POS's target words.
  for (auto* table : {&ws->freq_t1, &ws->freq_t2}) {
    std::map<std::pair<std::string, Pos>, int> groups;
    for (const auto& [p, words] : ws->targets) {
      std::vector<std::pair<std::string, Pos>> keys;
      for (const auto& w : words) keys.emplace_back(w, p);
      FrequencyTable sub = *table;
      if (keys.size() >= static_cast<std::size_t>(cfg.frequency_groups)) {
        assign_groups(sub, keys, cfg.frequency_groups);
        groups.insert(sub.groups.begin(), sub.groups.end());
      }
    }
    table->groups = std::move(groups);
    table->m = cfg.frequency_groups;
  }
  return ws;
}

inline ExperimentData experiment_data(const Workspace& ws, const Featurization& f) {
  ExperimentData d{f.table, {}, {}};
  for (const auto& r : f.table.rows) {
    d.labels.push_back(ws.dataset[r.pair_id].label);
    d.pos.push_back(ws.dataset[r.pair_id].pos);
  }
  return d;
}

inline SplitSpec split_spec(const RunConfig& cfg) {
  auto s = cfg.split;
  s.seed = derive_seed(cfg.seed, "evaluation", "splits");
  return s;
}

inline std::vector<std::string> deviation_notes(const FeatureSetSpec& spec) {
  std::vector<std::string> notes{
      "features standardized with training-split statistics",
      "class weighting: balanced (inverse class frequency)",
      "tau averages over ordered pairs of distinct target words of the pair's POS (self-pairs excluded)",
  };
  if (spec.log_raw_frequency) notes.emplace_back("raw frequencies enter as log(1 + count)");
  return notes;
}

// ---------------------------------------------------------------------------
// features

inline void cmd_features(const RunConfig& cfg) {
  const auto ws = open_workspace(cfg);
  const auto f = featurize(ws->dataset, ws->inputs(), cfg.features);
  save_alignment(ws->alignment, cfg.out_dir / "alignment");
  nlohmann::json side{{"spec", to_json(cfg.features)},
                      {"schema", f.table.schema},
                      {"rows", f.table.rows.size()},
                      {"excluded", f.excluded},
                      {"alignment_residual", ws->alignment.residual},
                      {"notes", deviation_notes(cfg.features)}};
  if (f.table.rows.size() >= 1) {
    const auto st = fit_standardizer(f.table);
    side["standardizer"] = to_json(st);
    side["standardizer_warnings"] = st.warnings;
  }
  io::atomic_write(cfg.out_dir / "features.csv", feature_csv(f.table, ws->dataset));
  io::atomic_write(cfg.out_dir / "features.json", side.dump(2) + "\n");
}

// ---------------------------------------------------------------------------
// train

inline void cmd_train(const RunConfig& cfg) {
  const auto dataset = load_dataset(cfg.out_dir / "dataset.csv");
  std::istringstream in(io::read_file(cfg.out_dir / "features.csv"));
  const auto table = read_feature_csv(in, (cfg.out_dir / "features.csv").string());
  std::vector<Label> labels;
  for (const auto& r : table.rows) {
    if (r.pair_id >= dataset.size()) throw ContractError("features.csv references pair " + std::to_string(r.pair_id) + " beyond dataset");
    labels.push_back(dataset[r.pair_id].label);
  }
  for (const auto& c : cfg.model.columns)
    if (std::find(table.schema.begin(), table.schema.end(), c) == table.schema.end())
      throw ContractError("model column '" + c + "' is not in the feature schema");
  auto spec = cfg.model;
  spec.svm.seed = derive_seed(cfg.seed, "models", "svm");
  const auto pipe = fit_pipeline(table, labels, spec);
  const auto preds = pipe.predict_table(table);
  std::vector<Label> yp;
  for (const auto& p : preds) yp.push_back(p.label);
  nlohmann::json j{{"pipeline", to_json(pipe)},
                   {"model_kind", std::string(to_string(spec.kind))},
                   {"training_rows", table.rows.size()},
                   {"training_balanced_accuracy", balanced_accuracy(yp, labels)}};
  io::atomic_write(cfg.out_dir / "model.json", j.dump(2) + "\n");
}

// ---------------------------------------------------------------------------
// evaluate

/// Row keys in Table-2 order.
inline const std::vector<std::pair<std::string, std::string>>& method_rows() {
  static const std::vector<std::pair<std::string, std::string>> rows{
      {"all-syn", "All (Syn)"},
      {"all-diff", "All (Diff)"},
      {"lr-f", "LR F"},
      {"xk", "XK controls"},
      {"delta-cd", "Delta (cd)"},
      {"delta-nk", "Delta (nk)"},
      {"delta-tuned", "Delta (tuned tau)"},
      {"lr-sd", "LR SD"},
      {"lr-sd-dd", "LR SD + DD"},
      {"lr-sd-f", "LR SD + F"},
      {"lr-sd-dd-f", "LR SD + DD + F"},
      {"lr-multi", "LR multi"},
      {"lr-multi-poly2", "LR multi poly(2)"},
      {"svm", "SVM (gaussian)"},
  };
  return rows;
}

inline std::set<std::string> selected_methods(const std::string& sel) {
  std::set<std::string> out;
  if (sel == "all") {
    for (const auto& [k, n] : method_rows()) out.insert(k);
    return out;
  }
  for (const auto& k : split_list(sel)) {
    if (k == "baselines") {
      out.insert({"all-syn", "all-diff", "lr-f"});
      continue;
    }
    if (std::none_of(method_rows().begin(), method_rows().end(), [&](const auto& r) { return r.first == k; }))
      throw ConfigError("unknown evaluation method '" + k + "'");
    out.insert(k);
  }
  return out;
}

struct EvaluationRun {
  std::vector<MetricsReport> reports;
  std::map<std::string, std::string> keys;  // display name -> key
  nlohmann::json thresholds = nlohmann::json::object();
  std::vector<std::string> notes;
  std::size_t xk_failures = 0;
};

inline std::vector<std::string> sd_cols(const std::string& tag) { return {"sd_t1_" + tag, "sd_t2_" + tag}; }

inline EvaluationRun evaluate(const Workspace& ws, const std::set<std::string>& methods) {
  const auto& cfg = ws.cfg;
  const auto f = featurize(ws.dataset, ws.inputs(), cfg.features);
  const auto data = experiment_data(ws, f);
  const auto split = split_spec(cfg);
  const auto& schema = f.table.schema;
  auto has = [&](const std::string& c) { return std::find(schema.begin(), schema.end(), c) != schema.end(); };
  auto cat = [](std::vector<std::string> a, const std::vector<std::string>& b) {
    a.insert(a.end(), b.begin(), b.end());
    return a;
  };
  const auto freq = frequency_columns(schema);
  std::vector<std::string> dd;
  for (const char* tag : {"op", "nk"})
    if (has(std::string("dd_u_") + tag)) {
      dd = {std::string("dd_u_") + tag, std::string("dd_v_") + tag};
      break;
    }
  const std::string sd_tag = has("sd_t1_cd") ? "cd" : (has("sd_t1_nk") ? "nk" : "");

  EvaluationRun run;
  run.notes = deviation_notes(cfg.features);
  auto supervised = [&](const std::string& key, std::vector<std::string> cols, int degree = 1,
                        ModelSpec::Kind kind = ModelSpec::Kind::Lr) {
    MethodSpec m;
    m.kind = MethodSpec::Kind::Supervised;
    m.model = cfg.model;
    m.model.kind = kind;
    m.model.columns = std::move(cols);
    m.model.polynomial_degree = degree;
    m.model.svm.seed = derive_seed(cfg.seed, "models", "svm");
    return std::pair{key, m};
  };

  std::vector<std::pair<std::string, MethodSpec>> plan;
  for (const auto& [key, name] : method_rows()) {
    if (!methods.contains(key)) continue;
    std::optional<std::pair<std::string, MethodSpec>> item;
    if (key == "all-syn") item = supervised(key, {}, 1, ModelSpec::Kind::ConstantSyn);
    else if (key == "all-diff") item = supervised(key, {}, 1, ModelSpec::Kind::ConstantDiff);
    else if (key == "lr-f" && !freq.empty()) item = supervised(key, freq);
    else if (key == "lr-sd" && !sd_tag.empty()) item = supervised(key, sd_cols(sd_tag));
    else if (key == "lr-sd-dd" && !sd_tag.empty() && !dd.empty()) item = supervised(key, cat(sd_cols(sd_tag), dd));
    else if (key == "lr-sd-f" && !sd_tag.empty() && !freq.empty()) item = supervised(key, cat(sd_cols(sd_tag), freq));
    else if (key == "lr-sd-dd-f" && !sd_tag.empty() && !dd.empty() && !freq.empty())
      item = supervised(key, cat(cat(sd_cols(sd_tag), dd), freq));
    else if (key == "lr-multi") item = supervised(key, schema);
    else if (key == "lr-multi-poly2") item = supervised(key, schema, 2);
    else if (key == "svm") item = supervised(key, schema, 1, ModelSpec::Kind::Svm);
    else if (key == "delta-tuned" && !sd_tag.empty()) {
      MethodSpec m;
      m.kind = MethodSpec::Kind::DeltaTuned;
      m.sd_tag = sd_tag;
      item = std::pair{key, m};
    } else if ((key == "delta-cd" && has("sd_t1_cd")) || (key == "delta-nk" && has("sd_t1_nk"))) {
      const std::string tag = key == "delta-cd" ? "cd" : "nk";
      const auto sd_spec = *std::find_if(cfg.features.include_sd.begin(), cfg.features.include_sd.end(), [&](const SdSpec& s) {
        return (s.kind == SdSpec::Kind::Cosine) == (tag == "cd");
      });
      std::map<Pos, double> tau;
      for (const auto& [p, words] : ws.targets) {
        if (words.size() < 2) continue;
        const auto t = estimate_tau(*ws.p1, *ws.p2, words, sd_spec, cfg.tau_samples,
                                    derive_seed(cfg.seed, "measures", "tau-" + std::string(to_string(p))));
        tau[p] = t.tau;
        run.thresholds[key][std::string(to_string(p))] = to_json(t);
      }
      const auto deltas = detail::delta_column(f.table, tag);
      MethodSpec m;
      m.kind = MethodSpec::Kind::Precomputed;
      for (std::size_t i = 0; i < deltas.size(); ++i) {
        const auto it = tau.find(data.pos[i]);
        m.precomputed.push_back(it == tau.end() ? std::nullopt : std::optional(classify_delta(deltas[i], it->second)));
      }
      item = std::pair{key, m};
    } else if (key == "xk" && has("sd_t1_cd")) {
      MethodSpec m;
      m.kind = MethodSpec::Kind::Precomputed;
      std::map<Pos, ControlRule> rules;
      for (const auto& [p, words] : ws.targets)
        rules[p] = ControlRule{derive_seed(cfg.seed, "models", "xk"), words, cfg.xk_max_attempts};
      for (const auto& r : f.table.rows) {
        const auto& pr = ws.dataset[r.pair_id];
        try {
          m.precomputed.push_back(xk_classify(pr.u, pr.v, *ws.p1, *ws.p2, rules.at(pr.pos), SdSpec::cosine()).label);
        } catch (const ControlSelectionFailure&) {
          m.precomputed.push_back(std::nullopt);
          ++run.xk_failures;
        }
      }
      item = std::pair{key, m};
    }
    if (!item) {
      run.notes.push_back("row '" + key + "' skipped: required features not configured");
      continue;
    }
    item->second.name = name;
    plan.push_back(std::move(*item));
  }
  for (const auto& [key, m] : plan) {
    run.reports.push_back(run_experiment(data, m, split));
    run.keys[m.name] = key;
  }
  return run;
}

inline std::string report_csv(const std::vector<MetricsReport>& reports) {
  std::string out = "method,ba_mean,ba_std,f1_syn_mean,f1_syn_std,f1_diff_mean,f1_diff_std,pct_diff_mean,pct_diff_std,splits\n";
  for (const auto& r : reports) {
    out += r.method + "," + io::fmt(r.mean.balanced_accuracy) + "," + io::fmt(r.stddev.balanced_accuracy) + "," +
           io::fmt(r.mean.f1_syn) + "," + io::fmt(r.stddev.f1_syn) + "," + io::fmt(r.mean.f1_diff) + "," +
           io::fmt(r.stddev.f1_diff) + "," + io::fmt(r.mean.pct_diff) + "," + io::fmt(r.stddev.pct_diff) + "," +
           std::to_string(r.per_split.size()) + "\n";
  }
  return out;
}

inline void cmd_evaluate(const RunConfig& cfg) {
  const auto methods = selected_methods(cfg.methods);
  const auto ws = open_workspace(cfg);
  const auto run = evaluate(*ws, methods);
  nlohmann::json rows = nlohmann::json::array();
  for (const auto& r : run.reports) {
    auto j = to_json(r);
    j["key"] = run.keys.at(r.method);
    rows.push_back(std::move(j));
  }
  nlohmann::json report{{"rows", rows},
                        {"thresholds", run.thresholds},
                        {"xk_failures", run.xk_failures},
                        {"notes", run.notes},
                        {"pairs", ws->dataset.size()}};
  io::atomic_write(cfg.out_dir / "report.json", report.dump(2) + "\n");
  io::atomic_write(cfg.out_dir / "report.csv", report_csv(run.reports));
  io::atomic_write(cfg.out_dir / "report.txt", format_results_table(run.reports));
  io::atomic_write(cfg.out_dir / "thresholds.json", run.thresholds.dump(2) + "\n");
}

// ---------------------------------------------------------------------------
// analyze

/// Majority vote over the repeats in which each row was tested (ties -> Diff).
inline std::vector<std::optional<Label>> consensus(const MetricsReport& r, std::size_t n_rows) {
  std::vector<int> diff(n_rows, 0), seen(n_rows, 0);
  for (const auto& split : r.test_predictions)
    for (const auto& p : split) {
      ++seen[p.row];
      diff[p.row] += p.label == Label::Diff;
    }
  std::vector<std::optional<Label>> out(n_rows);
  for (std::size_t i = 0; i < n_rows; ++i)
    if (seen[i]) out[i] = 2 * diff[i] >= seen[i] ? Label::Diff : Label::Syn;
  return out;
}

inline void cmd_analyze(const RunConfig& cfg) {
  const auto ws = open_workspace(cfg);
  const auto f = featurize(ws->dataset, ws->inputs(), cfg.features);
  const auto data = experiment_data(*ws, f);
  MethodSpec m;
  m.name = "LR multi";
  m.model = cfg.model;
  m.model.kind = ModelSpec::Kind::Lr;
  m.model.columns = f.table.schema;
  const auto report = run_experiment(data, m, split_spec(cfg));
  const auto votes = consensus(report, f.table.rows.size());

  std::vector<PairRecord> pairs;
  std::vector<Label> preds;
  std::vector<std::size_t> rows;
  for (std::size_t i = 0; i < votes.size(); ++i) {
    if (!votes[i]) continue;
    pairs.push_back(ws->dataset[f.table.rows[i].pair_id]);
    preds.push_back(*votes[i]);
    rows.push_back(i);
  }
  nlohmann::json analysis{{"model", m.name}, {"pairs_analyzed", pairs.size()}};

  // Fig. 1: predicted-class shares per WordNet distance bucket.
  std::string fig1 = "bucket,count,pct_syn,pct_diff\n";
  for (const auto& [b, s] : wn_distance_breakdown(pairs, preds)) {
    fig1 += b + "," + std::to_string(s.count) + "," + io::fmt(s.pct_syn, 3) + "," + io::fmt(s.pct_diff, 3) + "\n";
    analysis["wn_breakdown"][b] = {{"count", s.count}, {"pct_syn", s.pct_syn}, {"pct_diff", s.pct_diff}};
  }
  // Fig. 3: WordNet distance distribution of the dataset.
  std::map<std::tuple<std::string, std::string, std::string>, std::size_t> dist;
  for (const auto& r : ws->dataset)
    ++dist[{std::string(to_string(r.pos)), distance_bucket(r.wn_distance), std::string(to_string(r.label))}];
  std::string fig3 = "pos,bucket,label,count\n";
  for (const auto& [k, n] : dist)
    fig3 += std::get<0>(k) + "," + std::get<1>(k) + "," + std::get<2>(k) + "," + std::to_string(n) + "\n";

  // Polysemy per confusion cell.
  std::string poly = "cell,count,mean_senses_u,mean_senses_v\n";
  for (const auto& [c, cell] : polysemy_comparison(pairs, preds)) {
    poly += c + "," + std::to_string(cell.count) + "," + (cell.mean_senses_u ? io::fmt(*cell.mean_senses_u, 4) : "") +
            "," + (cell.mean_senses_v ? io::fmt(*cell.mean_senses_v, 4) : "") + "\n";
    analysis["polysemy"][c] = {{"count", cell.count},
                               {"mean_senses_u", cell.mean_senses_u ? nlohmann::json(*cell.mean_senses_u) : nlohmann::json()},
                               {"mean_senses_v", cell.mean_senses_v ? nlohmann::json(*cell.mean_senses_v) : nlohmann::json()}};
  }

  // Table 5: well- vs. mis-classified within each true class.
  std::vector<std::pair<std::string, std::vector<double>>> variables;
  {
    std::vector<double> su, sv;
    for (const auto& p : pairs) {
      su.push_back(static_cast<double>(p.senses_u));
      sv.push_back(static_cast<double>(p.senses_v));
    }
    variables.emplace_back("senses_u", su);
    variables.emplace_back("senses_v", sv);
    for (std::size_t c = 0; c < f.table.schema.size(); ++c) {
      std::vector<double> col;
      for (auto i : rows) col.push_back(f.table.rows[i].values[c]);
      variables.emplace_back(f.table.schema[c], col);
    }
  }
  std::string t5 =
      "variable,class,mean_correct,mean_wrong,n_correct,n_wrong,welch_t,welch_p,mw_u,mw_p,significant_t,significant_mw\n";
  for (const auto& [name, values] : variables) {
    for (const Label cls : {Label::Syn, Label::Diff}) {
      std::vector<double> good, bad;
      for (std::size_t i = 0; i < pairs.size(); ++i) {
        if (pairs[i].label != cls) continue;
        (preds[i] == cls ? good : bad).push_back(values[i]);
      }
      auto mean = [](const std::vector<double>& v) {
        return v.empty() ? std::string() : io::fmt(std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size()), 4);
      };
      std::string line = name + "," + std::string(to_string(cls)) + "," + mean(good) + "," + mean(bad) + "," +
                         std::to_string(good.size()) + "," + std::to_string(bad.size());
      if (good.size() >= 2 && bad.size() >= 2) {
        const auto s = significance_tests(good, bad);
        line += "," + io::fmt(s.welch.t, 4) + "," + io::fmt(s.welch.p, 6) + "," + io::fmt(s.mann_whitney.u, 1) + "," +
                io::fmt(s.mann_whitney.p_two_sided, 6) + "," + (s.significant_t ? "1" : "0") + "," +
                (s.significant_mw ? "1" : "0");
        analysis["table5"][name][std::string(to_string(cls))] = to_json(s);
      } else {
        line += ",,,,,,";
      }
      t5 += line + "\n";
    }
  }

  // Fig. 5: synonym vs. random-pair cosine distances per period.
  std::vector<WordPair> syn_pairs;
  for (const auto& r : ws->dataset) syn_pairs.push_back({r.u, r.v, r.pos});
  std::set<std::string> vocab_set;
  for (const auto& [p, w] : ws->targets) vocab_set.insert(w.begin(), w.end());
  const std::vector<std::string> vocab(vocab_set.begin(), vocab_set.end());
  std::string fig5 = "period,group,bin_lo,bin_hi,density\n";
  if (!syn_pairs.empty() && vocab.size() >= 2) {
    const auto dists = distance_distribution_report({&ws->t1, &ws->t2}, syn_pairs, vocab, cfg.random_pairs,
                                                    derive_seed(cfg.seed, "evaluation", "fig5"), cfg.histogram_bins);
    for (const auto& d : dists) {
      for (const auto* h : {&d.synonym_hist, &d.random_hist}) {
        const double w = (h->hi - h->lo) / static_cast<double>(h->density.size());
        for (std::size_t b = 0; b < h->density.size(); ++b)
          fig5 += d.period + "," + (h == &d.synonym_hist ? "synonym" : "random") + "," +
                  io::fmt(h->lo + w * static_cast<double>(b), 3) + "," + io::fmt(h->lo + w * static_cast<double>(b + 1), 3) +
                  "," + io::fmt(h->density[b], 6) + "\n";
      }
      analysis["distances"][d.period] = {{"synonym_median", d.synonym_median},
                                         {"random_median", d.random_median},
                                         {"mw_u", d.mw.u},
                                         {"mw_p_less", d.mw.p_less},
                                         {"synonyms_closer", d.synonyms_closer}};
    }
  }
  io::atomic_write(cfg.out_dir / "fig1_wn_breakdown.csv", fig1);
  io::atomic_write(cfg.out_dir / "fig3_wn_distances.csv", fig3);
  io::atomic_write(cfg.out_dir / "fig5_distances.csv", fig5);
  io::atomic_write(cfg.out_dir / "polysemy.csv", poly);
  io::atomic_write(cfg.out_dir / "table5_significance.csv", t5);
  io::atomic_write(cfg.out_dir / "analysis.json", analysis.dump(2) + "\n");
}

// ---------------------------------------------------------------------------
// report

/// Table-1 block from dataset_stats.json (if present) plus the results table.
inline std::string cmd_report(const RunConfig& cfg) {
  std::string out;
  const auto stats_path = cfg.out_dir / "dataset_stats.json";
  if (fs::exists(stats_path)) {
    const auto s = nlohmann::json::parse(io::read_file(stats_path));
    out += "Dataset            pairs   %Syn   %hyp  %hyp(1) %hyp(2) %hyp(3)\n";
    for (const auto& [k, v] : s.items()) {
      char buf[160];
      std::snprintf(buf, sizeof buf, "%-16s %7zu %6.1f %6.1f %8.1f %7.1f %7.1f\n", k.c_str(), v.at("pairs").get<std::size_t>(),
                    v.at("syn_pct").get<double>(), v.at("hypernym_pct").get<double>(), v.at("hyp_d1_pct").get<double>(),
                    v.at("hyp_d2_pct").get<double>(), v.at("hyp_d3_pct").get<double>());
      out += buf;
    }
    out += "\n";
  }
  const auto report = nlohmann::json::parse(io::read_file(cfg.out_dir / "report.json"));
  std::vector<MetricsReport> rows;
  for (const auto& r : report.at("rows")) {
    MetricsReport m;
    m.method = r.at("method").get<std::string>();
    const auto& mean = r.at("mean");
    m.mean = {mean.at("balanced_accuracy").get<double>(), mean.at("f1_syn").get<double>(), mean.at("f1_diff").get<double>(),
              mean.at("pct_diff").get<double>()};
    m.per_split.resize(r.at("per_split").size());
    rows.push_back(std::move(m));
  }
  out += format_results_table(rows);
  return out;
}

}  // namespace synodiff::pipeline
