#pragma once

#include <fstream>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "hde/tokenizer.hpp"

namespace hde {

struct ParseError : std::runtime_error {
  explicit ParseError(const std::string& what) : std::runtime_error(what) {}
};

/// One multiple-choice task instance: query (subject, relation), support
/// documents, candidate list, optional gold answer index.
struct QuerySample {
  std::string id;
  std::string relation;
  TokenSeq query_tokens;    // full query, tokenized
  TokenSeq subject_tokens;  // query minus the leading relation token
  std::vector<TokenSeq> documents;
  std::vector<TokenSeq> candidates;
  std::optional<int> answer_index;
};

/// Splits a raw query into (relation, subject tokens). The relation is the
/// first whitespace-delimited token (underscore form, e.g. record_label);
/// the rest is the subject.
inline std::pair<std::string, TokenSeq> split_query(const std::string& query) {
  size_t i = 0;
  while (i < query.size() && std::isspace(static_cast<unsigned char>(query[i]))) ++i;
  size_t j = i;
  while (j < query.size() && !std::isspace(static_cast<unsigned char>(query[j]))) ++j;
  if (i == j) throw ParseError("split_query: empty query");
  std::string relation = query.substr(i, j - i);
  TokenSeq subject = tokenize(query.substr(j));
  if (subject.empty())
    throw ParseError("split_query: no subject after relation '" + relation + "'");
  return {relation, subject};
}

struct ParseOptions {
  int document_cap = 300;  // truncate longer documents to this many tokens
};

namespace detail {

inline void check(bool cond, const std::string& msg) {
  if (!cond) throw ParseError(msg);
}

}  // namespace detail

/// Parses one dataset record (already decoded JSON object).
inline QuerySample parse_record(const nlohmann::json& rec, size_t index,
                                const ParseOptions& opt = {}) {
  const std::string where = "record " + std::to_string(index);
  detail::check(rec.is_object(), where + ": not an object");
  detail::check(rec.contains("id") && rec["id"].is_string(), where + ": missing id");
  detail::check(rec.contains("query") && rec["query"].is_string(), where + ": missing query");
  detail::check(rec.contains("supports") && rec["supports"].is_array(),
                where + ": missing supports");
  detail::check(rec.contains("candidates") && rec["candidates"].is_array(),
                where + ": missing candidates");

  QuerySample s;
  s.id = rec["id"].get<std::string>();
  const std::string query = rec["query"].get<std::string>();
  s.query_tokens = tokenize(query);
  detail::check(!s.query_tokens.empty(), where + ": empty query");
  std::tie(s.relation, s.subject_tokens) = split_query(query);

  detail::check(!rec["supports"].empty(), where + ": empty supports array");
  for (const auto& doc : rec["supports"]) {
    detail::check(doc.is_string(), where + ": support is not a string");
    TokenSeq toks = tokenize(doc.get<std::string>());
    detail::check(!toks.empty(), where + ": empty support document");
    if (static_cast<int>(toks.size()) > opt.document_cap) toks.resize(opt.document_cap);
    s.documents.push_back(std::move(toks));
  }

  detail::check(rec["candidates"].size() >= 2, where + ": need at least two candidates");
  for (const auto& cand : rec["candidates"]) {
    detail::check(cand.is_string(), where + ": candidate is not a string");
    TokenSeq toks = tokenize(cand.get<std::string>());
    detail::check(!toks.empty(), where + ": empty candidate");
    s.candidates.push_back(std::move(toks));
  }

  if (rec.contains("answer") && !rec["answer"].is_null()) {
    detail::check(rec["answer"].is_string(), where + ": answer is not a string");
    TokenSeq ans = tokenize(rec["answer"].get<std::string>());
    int found = -1;
    for (size_t j = 0; j < s.candidates.size(); ++j)
      if (s.candidates[j] == ans) {
        found = static_cast<int>(j);
        break;
      }
    detail::check(found >= 0, "sample '" + s.id + "': answer not among candidates");
    s.answer_index = found;
  }
  return s;
}

/// Parses a serialized dataset (array of {id, query, answer, candidates,
/// supports}) into QuerySamples, tokenizing everything.
inline std::vector<QuerySample> parse_dataset(const std::string& raw,
                                              const ParseOptions& opt = {}) {
  nlohmann::json root;
  try {
    root = nlohmann::json::parse(raw);
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("dataset: invalid JSON: ") + e.what());
  }
  detail::check(root.is_array(), "dataset: top level must be an array of records");
  std::vector<QuerySample> out;
  out.reserve(root.size());
  for (size_t i = 0; i < root.size(); ++i) out.push_back(parse_record(root[i], i, opt));
  return out;
}

/// Serializes samples back to the input schema (tokens joined by spaces).
/// parse -> serialize -> parse is a fixed point: emitted tokens never carry
/// leading or trailing punctuation, so they re-tokenize to themselves.
inline std::string serialize_dataset(const std::vector<QuerySample>& samples) {
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& s : samples) {
    nlohmann::json rec;
    rec["id"] = s.id;
    rec["query"] = s.relation + " " + join_tokens(s.subject_tokens);
    nlohmann::json sup = nlohmann::json::array();
    for (const auto& d : s.documents) sup.push_back(join_tokens(d));
    rec["supports"] = sup;
    nlohmann::json cands = nlohmann::json::array();
    for (const auto& c : s.candidates) cands.push_back(join_tokens(c));
    rec["candidates"] = cands;
    if (s.answer_index) rec["answer"] = join_tokens(s.candidates[*s.answer_index]);
    arr.push_back(std::move(rec));
  }
  return arr.dump();
}

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open file: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline void write_file(const std::string& path, const std::string& contents) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write file: " + path);
  out << contents;
}

/// Write-then-rename so partially written files are never observed.
inline void write_file_atomic(const std::string& path, const std::string& contents) {
  std::string tmp = path + ".tmp";
  write_file(tmp, contents);
  if (std::rename(tmp.c_str(), path.c_str()) != 0)
    throw std::runtime_error("cannot rename " + tmp + " to " + path);
}

}  // namespace hde
