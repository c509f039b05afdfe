#pragma once

// Lexical resources and dataset construction.
//
//   T1 pairs      TSV  "u<TAB>v<TAB>POS", '#' comments
//   synset DB     JSON {synsets: [{id, pos, lemmas: []}], hypernyms: [[child, parent]],
//                       optional lemmas: [{lemma, pos, synsets: []}],
//                       optional meronyms / antonyms: [[a, b]]}
//   frequencies   CSV  "word,pos,decade,count" (optional header row)
//   dataset       CSV  "u,v,pos,label,wn_distance,senses_u,senses_v"

#include <algorithm>
#include <deque>
#include <filesystem>
#include <limits>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "synodiff/common.hpp"
#include "synodiff/io.hpp"
#include "synodiff/vecspace.hpp"

namespace synodiff {

/// Edge count in the synset graph, or infinity when disconnected.
class GraphDistance {
 public:
  constexpr GraphDistance() = default;  // infinity
  constexpr explicit GraphDistance(int edges) : edges_(edges) {}
  static constexpr GraphDistance infinite() { return {}; }

  constexpr bool finite() const { return edges_ >= 0; }
  constexpr int edges() const { return edges_; }
  std::string str() const { return finite() ? std::to_string(edges_) : "inf"; }

  static GraphDistance parse(std::string_view s) {
    if (s == "inf") return infinite();
    if (const auto v = io::parse_int<int>(s); v && *v >= 0) return GraphDistance(*v);
    throw ParseError("bad wn_distance '" + std::string(s) + "'");
  }

  friend constexpr bool operator==(GraphDistance, GraphDistance) = default;

 private:
  int edges_ = -1;
};

struct Synset {
  std::string id;
  Pos pos = Pos::NN;
  std::set<std::string> lemmas;
};

class SynsetDb {
 public:
  SynsetDb() = default;

  /// Validates ids, references and acyclicity; throws LoadError.
  SynsetDb(std::vector<Synset> synsets, std::vector<std::pair<std::string, std::string>> hypernyms,
           std::vector<std::pair<std::string, std::string>> other_relations = {})
      : synsets_(std::move(synsets)) {
    std::string problems;
    for (std::size_t i = 0; i < synsets_.size(); ++i) {
      if (synsets_[i].id.empty()) problems += "\n  synset #" + std::to_string(i) + " has empty id";
      if (!by_id_.emplace(synsets_[i].id, i).second) problems += "\n  duplicate synset id '" + synsets_[i].id + "'";
    }
    parents_.resize(synsets_.size());
    children_.resize(synsets_.size());
    for (const auto& [child, parent] : hypernyms) {
      const auto c = by_id_.find(child);
      const auto p = by_id_.find(parent);
      if (c == by_id_.end() || p == by_id_.end()) {
        problems += "\n  hypernym edge [" + child + ", " + parent + "] references a missing synset";
        continue;
      }
      parents_[c->second].push_back(p->second);
      children_[p->second].push_back(c->second);
    }
    for (const auto& [a, b] : other_relations) {
      if (!by_id_.contains(a) || !by_id_.contains(b))
        problems += "\n  relation [" + a + ", " + b + "] references a missing synset";
    }
    other_relations_ = std::move(other_relations);
    if (!problems.empty()) throw LoadError("invalid synset database" + problems);
    if (const auto cyc = find_cycle(); !cyc.empty()) throw LoadError("hypernym cycle through synset '" + cyc + "'");
    for (std::size_t i = 0; i < synsets_.size(); ++i)
      for (const auto& l : synsets_[i].lemmas) lemma_index_[{l, synsets_[i].pos}].push_back(i);
  }

  std::size_t size() const { return synsets_.size(); }
  const std::vector<Synset>& synsets() const { return synsets_; }
  const std::vector<std::pair<std::string, std::string>>& other_relations() const { return other_relations_; }

  bool contains(const std::string& lemma, Pos pos) const { return lemma_index_.contains({lemma, pos}); }

  /// Synset indices of (lemma, pos), ascending. Throws CoverageError.
  const std::vector<std::size_t>& synsets_of(const std::string& lemma, Pos pos) const {
    const auto it = lemma_index_.find({lemma, pos});
    if (it == lemma_index_.end())
      throw CoverageError("lemma '" + lemma + "' (" + std::string(to_string(pos)) + ") not in synset database");
    return it->second;
  }

  const std::vector<std::size_t>& parents(std::size_t s) const { return parents_[s]; }
  const std::vector<std::size_t>& children(std::size_t s) const { return children_[s]; }

 private:
  std::string find_cycle() const {
    // Iterative three-color DFS over child -> parent edges.
    enum : char { White, Grey, Black };
    std::vector<char> color(synsets_.size(), White);
    for (std::size_t root = 0; root < synsets_.size(); ++root) {
      if (color[root] != White) continue;
      std::vector<std::pair<std::size_t, std::size_t>> stack{{root, 0}};
      color[root] = Grey;
      while (!stack.empty()) {
        auto& [node, next] = stack.back();
        if (next < parents_[node].size()) {
          const auto p = parents_[node][next++];
          if (color[p] == Grey) return synsets_[p].id;
          if (color[p] == White) {
            color[p] = Grey;
            stack.emplace_back(p, 0);
          }
        } else {
          color[node] = Black;
          stack.pop_back();
        }
      }
    }
    return {};
  }

  std::vector<Synset> synsets_;
  std::unordered_map<std::string, std::size_t> by_id_;
  std::vector<std::vector<std::size_t>> parents_, children_;
  std::vector<std::pair<std::string, std::string>> other_relations_;
  std::map<std::pair<std::string, Pos>, std::vector<std::size_t>> lemma_index_;
};

inline SynsetDb parse_synsets(const nlohmann::json& j) {
  try {
    std::vector<Synset> synsets;
    std::unordered_map<std::string, std::size_t> by_id;
    for (const auto& s : j.at("synsets")) {
      Synset syn;
      syn.id = s.at("id").get<std::string>();
      syn.pos = parse_pos(s.at("pos").get<std::string>());
      for (const auto& l : s.at("lemmas")) syn.lemmas.insert(l.get<std::string>());
      by_id.emplace(syn.id, synsets.size());
      synsets.push_back(std::move(syn));
    }
    // Optional lemma-centric index; every referenced synset must exist.
    if (j.contains("lemmas")) {
      std::string problems;
      for (const auto& e : j.at("lemmas")) {
        const auto lemma = e.at("lemma").get<std::string>();
        const auto pos = parse_pos(e.at("pos").get<std::string>());
        for (const auto& id : e.at("synsets")) {
          const auto it = by_id.find(id.get<std::string>());
          if (it == by_id.end()) {
            problems += "\n  lemma '" + lemma + "' points to missing synset '" + id.get<std::string>() + "'";
          } else if (synsets[it->second].pos != pos) {
            problems += "\n  lemma '" + lemma + "' POS disagrees with synset '" + synsets[it->second].id + "'";
          } else {
            synsets[it->second].lemmas.insert(lemma);
          }
        }
      }
      if (!problems.empty()) throw LoadError("invalid synset database" + problems);
    }
    auto edges = [&](const char* key) {
      std::vector<std::pair<std::string, std::string>> out;
      if (!j.contains(key)) return out;
      for (const auto& e : j.at(key)) {
        if (!e.is_array() || e.size() != 2) throw LoadError(std::string(key) + " entries must be [a, b] pairs");
        out.emplace_back(e[0].get<std::string>(), e[1].get<std::string>());
      }
      return out;
    };
    auto others = edges("meronyms");
    for (auto& e : edges("antonyms")) others.push_back(std::move(e));
    return SynsetDb(std::move(synsets), edges("hypernyms"), std::move(others));
  } catch (const nlohmann::json::exception& e) {
    throw LoadError(std::string("synset database: ") + e.what());
  } catch (const ParseError& e) {
    throw LoadError(std::string("synset database: ") + e.what());
  }
}

inline SynsetDb load_synsets(const std::filesystem::path& path) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(io::read_file(path));
  } catch (const nlohmann::json::exception& e) {
    throw LoadError(path.string() + ": " + e.what());
  }
  try {
    return parse_synsets(j);
  } catch (const LoadError& e) {
    throw LoadError(path.string() + ": " + e.what());
  }
}

struct WordPair {
  std::string u, v;
  Pos pos = Pos::NN;
};

/// Unordered dedup: (u,v) and (v,u) with the same POS collapse to the first seen.
inline std::vector<WordPair> read_t1_pairs(std::istream& in, const std::string& source = "pairs") {
  std::vector<WordPair> out;
  std::set<std::tuple<std::string, std::string, Pos>> seen;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const auto t = io::trim(line);
    if (t.empty() || t.front() == '#') continue;
    const auto f = io::split(line, '\t');
    const auto where = source + " line " + std::to_string(lineno) + ": ";
    if (f.size() != 3) throw ParseError(where + "expected 3 tab-separated fields, found " + std::to_string(f.size()));
    const std::string u(io::trim(f[0])), v(io::trim(f[1]));
    if (u.empty() || v.empty()) throw ParseError(where + "empty word");
    if (u == v) throw ParseError(where + "pair of identical words '" + u + "'");
    Pos pos;
    try {
      pos = parse_pos(io::trim(f[2]));
    } catch (const ParseError& e) {
      throw ParseError(where + e.what());
    }
    const auto key = u < v ? std::tuple{u, v, pos} : std::tuple{v, u, pos};
    if (seen.insert(key).second) out.push_back({u, v, pos});
  }
  return out;
}

inline std::vector<WordPair> load_t1_pairs(const std::filesystem::path& path) {
  auto in = io::open_input(path);
  return read_t1_pairs(in, path.string());
}

inline std::size_t sense_count(const SynsetDb& db, const std::string& w, Pos pos) {
  return db.synsets_of(w, pos).size();
}

inline Label label_pair(const SynsetDb& db, const std::string& u, const std::string& v, Pos pos) {
  const auto& a = db.synsets_of(u, pos);
  const auto& b = db.synsets_of(v, pos);
  std::vector<std::size_t> common;
  std::set_intersection(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(common));
  return common.empty() ? Label::Diff : Label::Syn;
}

/// Shortest undirected path over hypernym edges, minimized over synset pairs.
inline GraphDistance wn_distance(const SynsetDb& db, const std::string& u, const std::string& v, Pos pos) {
  const auto& from = db.synsets_of(u, pos);
  const auto& to = db.synsets_of(v, pos);
  std::vector<int> dist(db.size(), -1);
  std::deque<std::size_t> queue;
  for (auto s : from) {
    dist[s] = 0;
    queue.push_back(s);
  }
  const std::unordered_set<std::size_t> goal(to.begin(), to.end());
  while (!queue.empty()) {
    const auto s = queue.front();
    queue.pop_front();
    if (goal.contains(s)) return GraphDistance(dist[s]);
    for (const auto* adj : {&db.parents(s), &db.children(s)}) {
      for (auto n : *adj) {
        if (dist[n] < 0) {
          dist[n] = dist[s] + 1;
          queue.push_back(n);
        }
      }
    }
  }
  return GraphDistance::infinite();
}

/// Shortest directed hypernym chain between a synset of u and one of v, in
/// either direction (u above v or v above u); infinity if neither is an
/// ancestor of the other.
inline GraphDistance hypernym_chain(const SynsetDb& db, const std::string& u, const std::string& v, Pos pos) {
  const auto& a = db.synsets_of(u, pos);
  const auto& b = db.synsets_of(v, pos);
  auto up = [&](const std::vector<std::size_t>& start, const std::vector<std::size_t>& target) {
    std::vector<int> dist(db.size(), -1);
    std::deque<std::size_t> queue;
    for (auto s : start) {
      dist[s] = 0;
      queue.push_back(s);
    }
    const std::unordered_set<std::size_t> goal(target.begin(), target.end());
    while (!queue.empty()) {
      const auto s = queue.front();
      queue.pop_front();
      if (dist[s] > 0 && goal.contains(s)) return dist[s];
      for (auto p : db.parents(s)) {
        if (dist[p] < 0) {
          dist[p] = dist[s] + 1;
          queue.push_back(p);
        }
      }
    }
    return -1;
  };
  const int x = up(a, b);
  const int y = up(b, a);
  if (x < 0 && y < 0) return GraphDistance::infinite();
  if (x < 0) return GraphDistance(y);
  if (y < 0) return GraphDistance(x);
  return GraphDistance(std::min(x, y));
}

// ---------------------------------------------------------------------------
// Frequencies

struct FrequencyTable {
  std::string period;  // e.g. "1890"
  std::map<std::pair<std::string, Pos>, std::uint64_t> counts;
  std::map<std::pair<std::string, Pos>, int> groups;
  int m = 0;

  std::optional<std::uint64_t> count(const std::string& w, Pos pos) const {
    const auto it = counts.find({w, pos});
    if (it == counts.end()) return std::nullopt;
    return it->second;
  }
  std::optional<int> group(const std::string& w, Pos pos) const {
    const auto it = groups.find({w, pos});
    if (it == groups.end()) return std::nullopt;
    return it->second;
  }
};

/// Decade key: "1890", "1890s" -> "1890".
inline std::string normalize_decade(std::string_view s) {
  s = io::trim(s);
  if (!s.empty() && (s.back() == 's' || s.back() == 'S')) s.remove_suffix(1);
  if (!io::parse_int<int>(s)) throw ParseError("bad decade '" + std::string(s) + "'");
  return std::string(s);
}

/// One table per decade found in the CSV. Duplicate (word,pos,decade) rows are summed.
inline std::map<std::string, FrequencyTable> read_frequencies(std::istream& in, const std::string& source = "frequencies") {
  std::map<std::string, FrequencyTable> out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const auto t = io::trim(line);
    if (t.empty() || t.front() == '#') continue;
    if (lineno == 1 && t.starts_with("word,")) continue;
    const auto f = io::split(t, ',');
    const auto where = source + " line " + std::to_string(lineno) + ": ";
    if (f.size() != 4) throw ParseError(where + "expected word,pos,decade,count");
    try {
      const auto pos = parse_pos(f[1]);
      const auto decade = normalize_decade(f[2]);
      const auto c = io::parse_int<std::uint64_t>(io::trim(f[3]));
      if (!c) throw ParseError("bad count '" + std::string(f[3]) + "'");
      auto& table = out[decade];
      table.period = decade;
      table.counts[{std::string(io::trim(f[0])), pos}] += *c;
    } catch (const ParseError& e) {
      throw ParseError(where + e.what());
    }
  }
  return out;
}

inline std::map<std::string, FrequencyTable> load_frequencies(const std::filesystem::path& path) {
  auto in = io::open_input(path);
  return read_frequencies(in, path.string());
}

/// Recursive halving: sort ascending by count (ties by word); group 0 takes
/// the first ceil(n/2), group 1 ceil(rest/2), ..., group m-1 the remainder.
/// Later groups may be empty when n is small relative to 2^(m-1).
template <class Key>
std::map<Key, int> frequency_groups(const std::map<Key, std::uint64_t>& counts, int m) {
  if (m < 2) throw DomainError("frequency_groups: m must be >= 2");
  if (counts.size() < static_cast<std::size_t>(m))
    throw DomainError("frequency_groups: " + std::to_string(counts.size()) + " words for " + std::to_string(m) +
                      " groups");
  std::vector<std::pair<std::uint64_t, Key>> sorted;
  sorted.reserve(counts.size());
  for (const auto& [k, c] : counts) sorted.emplace_back(c, k);
  std::sort(sorted.begin(), sorted.end());
  std::map<Key, int> out;
  std::size_t pos = 0;
  for (int g = 0; g < m; ++g) {
    const std::size_t remaining = sorted.size() - pos;
    const std::size_t take = g == m - 1 ? remaining : (remaining + 1) / 2;
    for (std::size_t i = 0; i < take; ++i) out.emplace(sorted[pos + i].second, g);
    pos += take;
  }
  return out;
}

/// Fills table.groups over the given (target) keys; keys without counts are skipped.
inline void assign_groups(FrequencyTable& table, const std::vector<std::pair<std::string, Pos>>& keys, int m) {
  std::map<std::pair<std::string, Pos>, std::uint64_t> sub;
  for (const auto& k : keys)
    if (const auto it = table.counts.find(k); it != table.counts.end()) sub.emplace(k, it->second);
  table.groups = frequency_groups(sub, m);
  table.m = m;
}

inline std::vector<std::string> default_decades() {
  std::vector<std::string> d;
  for (int y = 1890; y <= 1990; y += 10) d.push_back(std::to_string(y));
  return d;
}

struct TargetCriteria {
  std::vector<std::string> decades = default_decades();
  std::uint64_t min_count = 3;
  std::size_t min_length = 3;  // code points
};

/// Words in `embeddings`, tagged `pos`, with count >= min_count in every
/// required decade and at least min_length characters. Sorted.
inline std::vector<std::string> select_targets(const VectorSpace& embeddings,
                                               const std::map<std::string, FrequencyTable>& freq_by_decade, Pos pos,
                                               const TargetCriteria& criteria = {}) {
  std::vector<const FrequencyTable*> tables;
  for (const auto& d : criteria.decades) {
    const auto it = freq_by_decade.find(d);
    if (it == freq_by_decade.end()) throw ConfigError("select_targets: no frequency table for decade " + d);
    tables.push_back(&it->second);
  }
  std::vector<std::string> out;
  for (const auto& [key, c] : tables.front()->counts) {
    const auto& [word, p] = key;
    if (p != pos || io::utf8_length(word) < criteria.min_length || !embeddings.contains(word)) continue;
    const bool frequent = std::all_of(tables.begin(), tables.end(), [&](const FrequencyTable* t) {
      const auto n = t->count(word, pos);
      return n && *n >= criteria.min_count;
    });
    if (frequent) out.push_back(word);
  }
  std::sort(out.begin(), out.end());
  return out;
}

// ---------------------------------------------------------------------------
// Dataset

struct PairRecord {
  std::string u, v;
  Pos pos = Pos::NN;
  Label label = Label::Diff;
  GraphDistance wn_distance;
  std::size_t senses_u = 0, senses_v = 0;
};

/// Table-1-shaped statistics for one POS (or "All").
struct DatasetStats {
  std::size_t pairs = 0, syn = 0, hypernym = 0;
  std::size_t hyp_d1 = 0, hyp_d2 = 0, hyp_d3 = 0, hyp_d4plus = 0;
  std::size_t excluded_targets = 0, excluded_coverage = 0;

  double pct(std::size_t x) const { return pairs ? 100.0 * static_cast<double>(x) / static_cast<double>(pairs) : 0.0; }

  DatasetStats& operator+=(const DatasetStats& o) {
    pairs += o.pairs;
    syn += o.syn;
    hypernym += o.hypernym;
    hyp_d1 += o.hyp_d1;
    hyp_d2 += o.hyp_d2;
    hyp_d3 += o.hyp_d3;
    hyp_d4plus += o.hyp_d4plus;
    excluded_targets += o.excluded_targets;
    excluded_coverage += o.excluded_coverage;
    return *this;
  }
};

struct DatasetBuild {
  std::vector<PairRecord> records;
  DatasetStats stats;
  std::vector<std::string> excluded;  // one reason per excluded pair
};

/// Keeps pairs of `pos` whose words are both in `targets`; attaches labels,
/// graph distances and sense counts. Pairs with missing lemmas are excluded
/// and reported. Hyper-/hyponym pairs are labeled Diff.
inline DatasetBuild build_dataset(const std::vector<WordPair>& t1_pairs, const SynsetDb& db,
                                  const std::vector<std::string>& targets, Pos pos) {
  const std::unordered_set<std::string> target_set(targets.begin(), targets.end());
  DatasetBuild out;
  for (const auto& p : t1_pairs) {
    if (p.pos != pos) continue;
    if (!target_set.contains(p.u) || !target_set.contains(p.v)) {
      ++out.stats.excluded_targets;
      out.excluded.push_back(p.u + "\t" + p.v + "\t" + std::string(to_string(pos)) + "\tnot a target word");
      continue;
    }
    PairRecord r;
    r.u = p.u;
    r.v = p.v;
    r.pos = pos;
    GraphDistance chain;
    try {
      r.label = label_pair(db, p.u, p.v, pos);
      r.wn_distance = wn_distance(db, p.u, p.v, pos);
      r.senses_u = sense_count(db, p.u, pos);
      r.senses_v = sense_count(db, p.v, pos);
      if (r.label == Label::Diff) chain = hypernym_chain(db, p.u, p.v, pos);
    } catch (const CoverageError& e) {
      ++out.stats.excluded_coverage;
      out.excluded.push_back(p.u + "\t" + p.v + "\t" + std::string(to_string(pos)) + "\t" + e.what());
      continue;
    }
    ++out.stats.pairs;
    if (r.label == Label::Syn) ++out.stats.syn;
    if (chain.finite()) {
      ++out.stats.hypernym;
      switch (chain.edges()) {
        case 1: ++out.stats.hyp_d1; break;
        case 2: ++out.stats.hyp_d2; break;
        case 3: ++out.stats.hyp_d3; break;
        default: ++out.stats.hyp_d4plus; break;
      }
    }
    out.records.push_back(std::move(r));
  }
  return out;
}

inline nlohmann::json to_json(const DatasetStats& s) {
  auto r1 = [](double x) { return std::round(x * 10.0) / 10.0; };
  return {{"pairs", s.pairs},
          {"syn", s.syn},
          {"syn_pct", r1(s.pct(s.syn))},
          {"hypernym", s.hypernym},
          {"hypernym_pct", r1(s.pct(s.hypernym))},
          {"hyp_d1_pct", r1(s.pct(s.hyp_d1))},
          {"hyp_d2_pct", r1(s.pct(s.hyp_d2))},
          {"hyp_d3_pct", r1(s.pct(s.hyp_d3))},
          {"hyp_d4plus_pct", r1(s.pct(s.hyp_d4plus))},
          {"excluded_not_target", s.excluded_targets},
          {"excluded_coverage", s.excluded_coverage}};
}

inline std::string dataset_csv(const std::vector<PairRecord>& records) {
  std::string out = "u,v,pos,label,wn_distance,senses_u,senses_v\n";
  for (const auto& r : records) {
    out += r.u + "," + r.v + "," + std::string(to_string(r.pos)) + "," + std::string(to_string(r.label)) + "," +
           r.wn_distance.str() + "," + std::to_string(r.senses_u) + "," + std::to_string(r.senses_v) + "\n";
  }
  return out;
}

inline std::vector<PairRecord> read_dataset(std::istream& in, const std::string& source = "dataset") {
  std::vector<PairRecord> out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (io::trim(line).empty()) continue;
    if (lineno == 1 && line.starts_with("u,v,")) continue;
    const auto f = io::split(line, ',');
    const auto where = source + " line " + std::to_string(lineno) + ": ";
    if (f.size() != 7) throw ParseError(where + "expected 7 fields");
    try {
      PairRecord r{std::string(f[0]), std::string(f[1]), parse_pos(f[2]), parse_label(f[3]),
                   GraphDistance::parse(f[4])};
      const auto su = io::parse_int<std::size_t>(f[5]);
      const auto sv = io::parse_int<std::size_t>(f[6]);
      if (!su || !sv) throw ParseError("bad sense count");
      r.senses_u = *su;
      r.senses_v = *sv;
      if ((r.label == Label::Syn) != (r.wn_distance == GraphDistance(0)))
        throw ParseError("label inconsistent with wn_distance");
      out.push_back(std::move(r));
    } catch (const ParseError& e) {
      throw ParseError(where + e.what());
    }
  }
  return out;
}

inline std::vector<PairRecord> load_dataset(const std::filesystem::path& path) {
  auto in = io::open_input(path);
  return read_dataset(in, path.string());
}

}  // namespace synodiff
