#pragma once

#include <algorithm>
#include <string>
#include <vector>

#include "hde/dataset.hpp"
#include "hde/tokenizer.hpp"

namespace hde {

/// A located span in a support document tied to a candidate or to the query
/// subject. Offsets are token positions, [start, end).
struct Mention {
  static constexpr int kSubject = -1;

  int document = 0;
  int start = 0;
  int end = 0;
  int candidate = kSubject;  // candidate index, or kSubject

  bool from_subject() const { return candidate == kSubject; }

  bool operator==(const Mention&) const = default;
};

namespace detail {

inline bool window_matches(const TokenSeq& doc, size_t at, const TokenSeq& pattern) {
  for (size_t k = 0; k < pattern.size(); ++k)
    if (doc[at + k] != pattern[k]) return false;
  return true;
}

}  // namespace detail

/// Exact-match entity extraction: every occurrence of every candidate and of
/// the query subject inside every document yields one Mention. Matching is
/// token-level on the already-lowercased token sequences; overlapping matches
/// from different sources are all kept, and a candidate that is a sub-span of
/// another candidate still matches on its own. Output order is
/// (document, start, end, source) with candidates before the subject.
inline std::vector<Mention> extract_mentions(const QuerySample& sample) {
  std::vector<Mention> out;
  const int num_cands = static_cast<int>(sample.candidates.size());
  for (int d = 0; d < static_cast<int>(sample.documents.size()); ++d) {
    const TokenSeq& doc = sample.documents[d];
    auto scan = [&](const TokenSeq& pattern, int source) {
      if (pattern.empty() || pattern.size() > doc.size()) return;
      for (size_t at = 0; at + pattern.size() <= doc.size(); ++at)
        if (detail::window_matches(doc, at, pattern))
          out.push_back(Mention{d, static_cast<int>(at),
                                static_cast<int>(at + pattern.size()), source});
    };
    for (int c = 0; c < num_cands; ++c) scan(sample.candidates[c], c);
    scan(sample.subject_tokens, Mention::kSubject);
  }
  auto rank = [num_cands](const Mention& m) {
    return m.candidate == Mention::kSubject ? num_cands : m.candidate;
  };
  std::sort(out.begin(), out.end(), [&](const Mention& a, const Mention& b) {
    if (a.document != b.document) return a.document < b.document;
    if (a.start != b.start) return a.start < b.start;
    if (a.end != b.end) return a.end < b.end;
    return rank(a) < rank(b);
  });
  return out;
}

/// The token sequence a mention must reproduce.
inline const TokenSeq& mention_source_tokens(const QuerySample& s, const Mention& m) {
  return m.from_subject() ? s.subject_tokens : s.candidates[m.candidate];
}

inline void validate_mention(const QuerySample& s, const Mention& m) {
  detail::check(0 <= m.document && m.document < static_cast<int>(s.documents.size()),
                "mention: document index out of range");
  detail::check(m.candidate == Mention::kSubject ||
                    (0 <= m.candidate && m.candidate < static_cast<int>(s.candidates.size())),
                "mention: candidate index out of range");
  const TokenSeq& doc = s.documents[m.document];
  detail::check(0 <= m.start && m.start < m.end && m.end <= static_cast<int>(doc.size()),
                "mention: span out of document bounds");
}

}  // namespace hde
