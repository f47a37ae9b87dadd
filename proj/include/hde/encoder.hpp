#pragma once

#include <string>
#include <vector>

#include "hde/cache.hpp"
#include "hde/embedding.hpp"
#include "hde/gru.hpp"
#include "hde/tape.hpp"

namespace hde {

enum class Role { query = 0, document = 1, candidate = 2 };
enum class Family { candidate = 0, document = 1, entity = 2 };

/// Two-layer tanh MLP scoring each position, softmax over positions, weighted
/// sum. Input width 2h, hidden width h, one score per row.
template <typename T>
struct SelfAttnParams {
  Parameter<T> w1, b1, w2, b2;

  SelfAttnParams() = default;
  SelfAttnParams(const std::string& prefix, int h, std::mt19937_64& rng)
      : w1(prefix + ".w1", glorot_tensor<T>(2 * h, h, rng)),
        b1(prefix + ".b1", Tensor<T>(1, h)),
        w2(prefix + ".w2", glorot_tensor<T>(h, 1, rng)),
        b2(prefix + ".b2", Tensor<T>(1, 1)) {}

  void collect(std::vector<Parameter<T>*>& out) {
    for (Parameter<T>* p : {&w1, &b1, &w2, &b2}) out.push_back(p);
  }
};

struct EncoderOptions {
  int embed_dim = 400;
  int h = 64;                       // encoder output width, even
  bool tie_role_encoders = false;   // one GRU for query/document/candidate
  bool tie_family_params = false;   // one fusion GRU + self-attention MLP for all families
};

/// All context-encoding parameters: per-role sequence GRUs, per-family fusion
/// GRUs and self-attention heads, and the subject dimension lift.
template <typename T>
struct EncoderParams {
  EncoderOptions opt;
  std::vector<BiGruParams<T>> role_grus;    // size 3, or 1 when roles are tied
  std::vector<BiGruParams<T>> fusion_grus;  // size 3, or 1 when families are tied
  std::vector<SelfAttnParams<T>> self_attn;
  Parameter<T> lift_w, lift_b;

  EncoderParams() = default;
  EncoderParams(const EncoderOptions& o, std::mt19937_64& rng) : opt(o) {
    detail::require(o.h % 2 == 0, "EncoderParams: h must be even");
    const char* role_names[] = {"query", "document", "candidate"};
    const char* family_names[] = {"candidate", "document", "entity"};
    int n_roles = o.tie_role_encoders ? 1 : 3;
    int n_fams = o.tie_family_params ? 1 : 3;
    for (int i = 0; i < n_roles; ++i)
      role_grus.emplace_back(std::string("enc.gru.") + (o.tie_role_encoders ? "shared" : role_names[i]),
                             o.embed_dim, o.h, rng);
    for (int i = 0; i < n_fams; ++i)
      fusion_grus.emplace_back(std::string("enc.fusion.") +
                                   (o.tie_family_params ? "shared" : family_names[i]),
                               o.h, o.h, rng);
    for (int i = 0; i < n_fams; ++i)
      self_attn.emplace_back(std::string("enc.selfattn.") +
                                 (o.tie_family_params ? "shared" : family_names[i]),
                             o.h, rng);
    lift_w = Parameter<T>("enc.lift.w", glorot_tensor<T>(o.h, 2 * o.h, rng));
    lift_b = Parameter<T>("enc.lift.b", Tensor<T>(1, 2 * o.h));
  }

  BiGruParams<T>& role_gru(Role r) {
    return role_grus[opt.tie_role_encoders ? 0 : static_cast<int>(r)];
  }
  BiGruParams<T>& fusion_gru(Family f) {
    return fusion_grus[opt.tie_family_params ? 0 : static_cast<int>(f)];
  }
  SelfAttnParams<T>& attn(Family f) {
    return self_attn[opt.tie_family_params ? 0 : static_cast<int>(f)];
  }

  void collect(std::vector<Parameter<T>*>& out) {
    for (auto& g : role_grus) g.collect(out);
    for (auto& g : fusion_grus) g.collect(out);
    for (auto& a : self_attn) a.collect(out);
    out.push_back(&lift_w);
    out.push_back(&lift_b);
  }
};

/// Co-attention between a query encoding h_q (l_q x h) and a context encoding
/// h_x (l_x x h). The affinity matrix is normalized over its contracted axis
/// so attended rows are convex combinations of encoder rows; the attended
/// query context is fused by a bidirectional GRU and concatenated with the
/// attended context, giving l_x x 2h.
template <typename T>
typename Tape<T>::Var coattend(Tape<T>& tape, typename Tape<T>::Var h_q,
                               typename Tape<T>::Var h_x, BiGruParams<T>& fusion) {
  detail::require(tape.value(h_q).cols() == tape.value(h_x).cols(),
                  "coattend: width mismatch " + tape.value(h_q).shape_str() + " vs " +
                      tape.value(h_x).shape_str());
  auto affinity = tape.matmul(h_x, tape.transpose(h_q));        // l_x x l_q
  auto attn_x = tape.softmax_rows(affinity);                    // rows sum over l_q
  auto attn_q = tape.softmax_rows(tape.transpose(affinity));    // rows sum over l_x
  auto ctx_q = tape.matmul(attn_q, h_x);                        // l_q x h
  auto ctx_x = tape.matmul(attn_x, h_q);                        // l_x x h
  auto fused = bigru_encode(tape, tape.matmul(attn_x, ctx_q), fusion);  // l_x x h
  return tape.concat_cols(ctx_x, fused);
}

/// Softmax-weighted sum over positions: l x 2h -> 1 x 2h.
template <typename T>
typename Tape<T>::Var self_attentive_pool(Tape<T>& tape, typename Tape<T>::Var s,
                                          SelfAttnParams<T>& p) {
  auto hidden = tape.tanh(tape.add_bias(tape.matmul(s, tape.param(p.w1)), tape.param(p.b1)));
  auto scores = tape.add_bias(tape.matmul(hidden, tape.param(p.w2)), tape.param(p.b2));
  auto weights = tape.softmax_rows(tape.transpose(scores));  // 1 x l
  return tape.matmul(weights, s);
}

/// Single tanh layer lifting a subject span encoding from width h to 2h.
template <typename T>
typename Tape<T>::Var lift_subject(Tape<T>& tape, typename Tape<T>::Var m,
                                   EncoderParams<T>& enc) {
  return tape.tanh(
      tape.add_bias(tape.matmul(m, tape.param(enc.lift_w)), tape.param(enc.lift_b)));
}

/// Per-node-kind initial vectors, each 1 x 2h, in graph node order
/// (candidates, documents, entities).
template <typename T>
struct NodeInitVars {
  std::vector<typename Tape<T>::Var> candidates;
  std::vector<typename Tape<T>::Var> documents;
  std::vector<typename Tape<T>::Var> entities;  // aligned with the mention list
};

/// Embeds and encodes one sample: role GRUs, co-attention against the query,
/// self-attentive pooling per candidate/document/entity. Subject-mention
/// entities skip co-attention (the subject is already part of the query) and
/// are lifted to 2h instead.
template <typename T>
NodeInitVars<T> encode_sample(Tape<T>& tape, const PreparedSample& prepped,
                              const EmbeddingProvider& provider, EncoderParams<T>& enc) {
  using Var = typename Tape<T>::Var;
  const QuerySample& s = prepped.sample;
  for (const Mention& m : prepped.mentions) validate_mention(s, m);

  Var h_q = bigru_encode(tape, tape.constant(provider.embed<T>(s.query_tokens)),
                         enc.role_gru(Role::query));

  std::vector<Var> doc_enc;
  doc_enc.reserve(s.documents.size());
  for (const TokenSeq& doc : s.documents)
    doc_enc.push_back(bigru_encode(tape, tape.constant(provider.embed<T>(doc)),
                                   enc.role_gru(Role::document)));

  NodeInitVars<T> init;
  for (const TokenSeq& cand : s.candidates) {
    Var h_c = bigru_encode(tape, tape.constant(provider.embed<T>(cand)),
                           enc.role_gru(Role::candidate));
    Var ca = coattend(tape, h_q, h_c, enc.fusion_gru(Family::candidate));
    init.candidates.push_back(self_attentive_pool(tape, ca, enc.attn(Family::candidate)));
  }
  for (Var d : doc_enc) {
    Var ca = coattend(tape, h_q, d, enc.fusion_gru(Family::document));
    init.documents.push_back(self_attentive_pool(tape, ca, enc.attn(Family::document)));
  }
  for (const Mention& m : prepped.mentions) {
    Var span = tape.slice_rows(doc_enc[m.document], m.start, m.end);
    Var ctx = m.from_subject() ? lift_subject(tape, span, enc)
                               : coattend(tape, h_q, span, enc.fusion_gru(Family::entity));
    init.entities.push_back(self_attentive_pool(tape, ctx, enc.attn(Family::entity)));
  }
  return init;
}

}  // namespace hde
