#pragma once

#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "hde/dataset.hpp"
#include "hde/mentions.hpp"

namespace hde {

constexpr int kCacheSchemaVersion = 1;

enum class FollowType { unknown, single, multi };

inline const char* to_string(FollowType f) {
  switch (f) {
    case FollowType::single: return "single";
    case FollowType::multi: return "multi";
    default: return "unknown";
  }
}

inline FollowType follow_from_string(const std::string& s) {
  if (s == "single") return FollowType::single;
  if (s == "multi") return FollowType::multi;
  return FollowType::unknown;
}

/// A tokenized sample with its extracted mentions and optional provenance
/// labels (follow type, gold document chain) carried by synthetic data.
struct PreparedSample {
  QuerySample sample;
  std::vector<Mention> mentions;
  FollowType follow = FollowType::unknown;
  std::vector<int> gold_chain;
};

inline PreparedSample prepare_sample(QuerySample s) {
  PreparedSample p;
  p.mentions = extract_mentions(s);
  p.sample = std::move(s);
  return p;
}

// ---- preprocessed cache (JSON lines, versioned) -----------------------------
// Line 1: {"schema_version":1,"kind":"hde-preprocessed-cache"}
// Then one JSON object per sample.

namespace detail {

inline nlohmann::json sample_to_json(const PreparedSample& p) {
  const QuerySample& s = p.sample;
  nlohmann::json j;
  j["id"] = s.id;
  j["relation"] = s.relation;
  j["query"] = s.query_tokens;
  j["subject"] = s.subject_tokens;
  j["documents"] = s.documents;
  j["candidates"] = s.candidates;
  if (s.answer_index)
    j["answer_index"] = *s.answer_index;
  else
    j["answer_index"] = nullptr;
  nlohmann::json ms = nlohmann::json::array();
  for (const Mention& m : p.mentions)
    ms.push_back(nlohmann::json::array({m.document, m.start, m.end, m.candidate}));
  j["mentions"] = ms;
  if (p.follow != FollowType::unknown) j["follow"] = to_string(p.follow);
  if (!p.gold_chain.empty()) j["gold_chain"] = p.gold_chain;
  return j;
}

inline PreparedSample sample_from_json(const nlohmann::json& j) {
  PreparedSample p;
  QuerySample& s = p.sample;
  s.id = j.at("id").get<std::string>();
  s.relation = j.at("relation").get<std::string>();
  s.query_tokens = j.at("query").get<TokenSeq>();
  s.subject_tokens = j.at("subject").get<TokenSeq>();
  s.documents = j.at("documents").get<std::vector<TokenSeq>>();
  s.candidates = j.at("candidates").get<std::vector<TokenSeq>>();
  if (!j.at("answer_index").is_null()) s.answer_index = j.at("answer_index").get<int>();
  for (const auto& m : j.at("mentions"))
    p.mentions.push_back(Mention{m.at(0).get<int>(), m.at(1).get<int>(), m.at(2).get<int>(),
                                 m.at(3).get<int>()});
  if (j.contains("follow")) p.follow = follow_from_string(j["follow"].get<std::string>());
  if (j.contains("gold_chain")) p.gold_chain = j["gold_chain"].get<std::vector<int>>();
  return p;
}

}  // namespace detail

inline std::string cache_to_string(const std::vector<PreparedSample>& samples) {
  std::ostringstream out;
  nlohmann::json header;
  header["schema_version"] = kCacheSchemaVersion;
  header["kind"] = "hde-preprocessed-cache";
  out << header.dump() << "\n";
  for (const auto& p : samples) out << detail::sample_to_json(p).dump() << "\n";
  return out.str();
}

inline std::vector<PreparedSample> cache_from_string(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line)) throw ParseError("cache: empty file");
  nlohmann::json header;
  try {
    header = nlohmann::json::parse(line);
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("cache: bad header: ") + e.what());
  }
  if (!header.contains("schema_version") ||
      header["schema_version"].get<int>() != kCacheSchemaVersion)
    throw ParseError("cache: schema-version mismatch (want " +
                     std::to_string(kCacheSchemaVersion) + ")");
  std::vector<PreparedSample> out;
  size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    try {
      out.push_back(detail::sample_from_json(nlohmann::json::parse(line)));
    } catch (const nlohmann::json::exception& e) {
      throw ParseError("cache: line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  return out;
}

inline void write_cache(const std::string& path, const std::vector<PreparedSample>& samples) {
  write_file_atomic(path, cache_to_string(samples));
}

inline std::vector<PreparedSample> read_cache(const std::string& path) {
  return cache_from_string(read_file(path));
}

/// Sidecar labels: {"sample_id": {"follow":"multi","gold_chain":[0,1]}, ...}
inline void apply_labels(std::vector<PreparedSample>& samples, const std::string& labels_json) {
  nlohmann::json root = nlohmann::json::parse(labels_json);
  for (auto& p : samples) {
    auto it = root.find(p.sample.id);
    if (it == root.end()) continue;
    if (it->contains("follow")) p.follow = follow_from_string((*it)["follow"].get<std::string>());
    if (it->contains("gold_chain")) p.gold_chain = (*it)["gold_chain"].get<std::vector<int>>();
  }
}

}  // namespace hde
