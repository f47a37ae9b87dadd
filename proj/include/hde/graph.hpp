#pragma once

#include <algorithm>
#include <array>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "hde/cache.hpp"
#include "hde/mentions.hpp"

namespace hde {

enum class NodeKind { candidate, document, entity };

inline const char* to_string(NodeKind k) {
  switch (k) {
    case NodeKind::candidate: return "candidate";
    case NodeKind::document: return "document";
    default: return "entity";
  }
}

struct NodeRef {
  NodeKind kind;
  int ref;  // candidate index, document index, or mention index

  bool operator==(const NodeRef&) const = default;
};

constexpr int kNumEdgeTypes = 7;
using EdgeList = std::vector<std::pair<int, int>>;  // pairs with first < second

/// Typed undirected graph over candidate, document and entity nodes.
///
/// Node order is fixed: candidates, then documents, then entities in mention
/// order; serialized graphs are byte-stable. Edge semantics:
///   1 document-candidate: the candidate is mentioned in the document
///   2 document-entity:    the entity was extracted from the document
///   3 candidate-entity:   the entity is a mention of the candidate
///   4 entity-entity:      extracted from the same document
///   5 entity-entity:      same source (candidate, or both subject), different documents
///   6 candidate-candidate: complete graph
///   7 entity-entity:      pairs carrying neither a type-4 nor a type-5 edge
struct HdeGraph {
  std::vector<NodeRef> nodes;
  std::array<EdgeList, kNumEdgeTypes> edges;  // edges[r-1] holds type r

  int num_candidates = 0;
  int num_documents = 0;
  int num_entities = 0;

  int node_count() const { return static_cast<int>(nodes.size()); }
  int candidate_node(int c) const { return c; }
  int document_node(int d) const { return num_candidates + d; }
  int entity_node(int e) const { return num_candidates + num_documents + e; }

  const EdgeList& edges_of(int type) const {
    detail::require(1 <= type && type <= kNumEdgeTypes, "edge type out of range");
    return edges[type - 1];
  }
};

inline HdeGraph build_graph(const QuerySample& sample, const std::vector<Mention>& mentions) {
  for (const Mention& m : mentions) validate_mention(sample, m);

  HdeGraph g;
  g.num_candidates = static_cast<int>(sample.candidates.size());
  g.num_documents = static_cast<int>(sample.documents.size());
  g.num_entities = static_cast<int>(mentions.size());
  for (int c = 0; c < g.num_candidates; ++c) g.nodes.push_back({NodeKind::candidate, c});
  for (int d = 0; d < g.num_documents; ++d) g.nodes.push_back({NodeKind::document, d});
  for (int e = 0; e < g.num_entities; ++e) g.nodes.push_back({NodeKind::entity, e});

  auto put = [&g](int type, int a, int b) {
    if (a > b) std::swap(a, b);
    g.edges[type - 1].emplace_back(a, b);
  };

  // 1: document-candidate on mention evidence (dedup repeated mentions)
  std::set<std::pair<int, int>> doc_cand;
  for (const Mention& m : mentions)
    if (!m.from_subject()) doc_cand.insert({m.document, m.candidate});
  for (auto [d, c] : doc_cand) put(1, g.document_node(d), g.candidate_node(c));

  for (int e = 0; e < g.num_entities; ++e) {
    put(2, g.document_node(mentions[e].document), g.entity_node(e));
    if (!mentions[e].from_subject())
      put(3, g.candidate_node(mentions[e].candidate), g.entity_node(e));
  }

  for (int a = 0; a < g.num_entities; ++a)
    for (int b = a + 1; b < g.num_entities; ++b) {
      bool same_doc = mentions[a].document == mentions[b].document;
      bool same_source = mentions[a].candidate == mentions[b].candidate;
      if (same_doc)
        put(4, g.entity_node(a), g.entity_node(b));
      else if (same_source)
        put(5, g.entity_node(a), g.entity_node(b));
      else
        put(7, g.entity_node(a), g.entity_node(b));
    }

  for (int a = 0; a < g.num_candidates; ++a)
    for (int b = a + 1; b < g.num_candidates; ++b) put(6, g.candidate_node(a), g.candidate_node(b));

  for (auto& list : g.edges) std::sort(list.begin(), list.end());
  return g;
}

/// Partners of `node` under type-r edges, ascending; empty set allowed.
inline std::vector<int> neighbors(const HdeGraph& g, int node, int type) {
  detail::require(0 <= node && node < g.node_count(), "neighbors: node index out of range");
  std::vector<int> out;
  for (auto [a, b] : g.edges_of(type)) {
    if (a == node) out.push_back(b);
    if (b == node) out.push_back(a);
  }
  std::sort(out.begin(), out.end());
  return out;
}

/// Structural invariant check; returns one diagnostic per violation.
inline std::vector<std::string> validate(const HdeGraph& g) {
  std::vector<std::string> out;
  const int n = g.node_count();
  auto name = [&](int i) {
    if (i < 0 || i >= n) return std::string("node ") + std::to_string(i) + " (out of range)";
    return std::string(to_string(g.nodes[i].kind)) + " node " + std::to_string(i);
  };
  auto kind_of = [&](int i) { return g.nodes[i].kind; };

  if (n != g.num_candidates + g.num_documents + g.num_entities)
    out.push_back("node count does not equal candidates + documents + entities");

  struct Rule {
    NodeKind a, b;
  };
  const Rule allowed[kNumEdgeTypes] = {
      {NodeKind::document, NodeKind::candidate}, {NodeKind::document, NodeKind::entity},
      {NodeKind::candidate, NodeKind::entity},   {NodeKind::entity, NodeKind::entity},
      {NodeKind::entity, NodeKind::entity},      {NodeKind::candidate, NodeKind::candidate},
      {NodeKind::entity, NodeKind::entity}};

  for (int type = 1; type <= kNumEdgeTypes; ++type) {
    std::set<std::pair<int, int>> seen;
    for (auto [a, b] : g.edges_of(type)) {
      std::string edge = "type-" + std::to_string(type) + " edge (" + std::to_string(a) + "," +
                         std::to_string(b) + ")";
      if (a < 0 || a >= n || b < 0 || b >= n) {
        out.push_back(edge + ": endpoint out of range");
        continue;
      }
      if (a == b) out.push_back(edge + ": self-loop");
      if (!seen.insert({std::min(a, b), std::max(a, b)}).second)
        out.push_back(edge + ": duplicate pair within one edge type");
      const Rule& r = allowed[type - 1];
      bool ok = (kind_of(a) == r.a && kind_of(b) == r.b) ||
                (kind_of(a) == r.b && kind_of(b) == r.a);
      if (!ok)
        out.push_back(edge + ": joins " + name(a) + " and " + name(b) +
                      ", not allowed for this type");
    }
  }

  // types 4, 5, 7 pairwise disjoint over entity pairs
  auto pair_set = [&](int type) {
    std::set<std::pair<int, int>> s;
    for (auto [a, b] : g.edges_of(type)) s.insert({std::min(a, b), std::max(a, b)});
    return s;
  };
  auto s4 = pair_set(4), s5 = pair_set(5), s7 = pair_set(7);
  for (const auto& p : s4) {
    if (s5.count(p))
      out.push_back("entity pair (" + std::to_string(p.first) + "," + std::to_string(p.second) +
                    ") carries both type-4 and type-5 edges");
    if (s7.count(p))
      out.push_back("entity pair (" + std::to_string(p.first) + "," + std::to_string(p.second) +
                    ") carries both type-4 and type-7 edges");
  }
  for (const auto& p : s5)
    if (s7.count(p))
      out.push_back("entity pair (" + std::to_string(p.first) + "," + std::to_string(p.second) +
                    ") carries both type-5 and type-7 edges");

  // type 6 is the complete graph on candidate nodes
  std::set<std::pair<int, int>> s6 = pair_set(6);
  for (int a = 0; a < g.num_candidates; ++a)
    for (int b = a + 1; b < g.num_candidates; ++b)
      if (!s6.count({g.candidate_node(a), g.candidate_node(b)}))
        out.push_back("candidate pair (" + std::to_string(a) + "," + std::to_string(b) +
                      ") missing its type-6 edge");
  size_t expected6 = static_cast<size_t>(g.num_candidates) * (g.num_candidates - 1) / 2;
  if (s6.size() != expected6) out.push_back("type-6 edge count is not C(C-1)/2");

  return out;
}

/// Removes every node of one kind together with its incident edges,
/// reindexing the remaining nodes (node refs keep their original meaning).
inline HdeGraph drop_node_kind(const HdeGraph& g, NodeKind kind) {
  HdeGraph out;
  std::vector<int> remap(g.node_count(), -1);
  for (int i = 0; i < g.node_count(); ++i) {
    if (g.nodes[i].kind == kind) continue;
    remap[i] = out.node_count();
    out.nodes.push_back(g.nodes[i]);
  }
  out.num_candidates = kind == NodeKind::candidate ? 0 : g.num_candidates;
  out.num_documents = kind == NodeKind::document ? 0 : g.num_documents;
  out.num_entities = kind == NodeKind::entity ? 0 : g.num_entities;
  for (int type = 1; type <= kNumEdgeTypes; ++type)
    for (auto [a, b] : g.edges_of(type))
      if (remap[a] >= 0 && remap[b] >= 0)
        out.edges[type - 1].emplace_back(remap[a], remap[b]);
  return out;
}

inline nlohmann::json graph_to_json(const HdeGraph& g) {
  nlohmann::json j;
  j["nodes"] = nlohmann::json::array();
  for (const NodeRef& n : g.nodes)
    j["nodes"].push_back({{"kind", to_string(n.kind)}, {"ref", n.ref}});
  nlohmann::json edges;
  for (int type = 1; type <= kNumEdgeTypes; ++type) {
    nlohmann::json list = nlohmann::json::array();
    for (auto [a, b] : g.edges_of(type)) list.push_back({a, b});
    edges["type_" + std::to_string(type)] = list;
  }
  j["edges"] = edges;
  return j;
}

inline std::string graph_to_dot(const HdeGraph& g) {
  std::ostringstream os;
  os << "graph hde {\n";
  const char* shapes[] = {"box", "ellipse", "diamond"};
  for (int i = 0; i < g.node_count(); ++i)
    os << "  n" << i << " [label=\"" << to_string(g.nodes[i].kind) << " " << g.nodes[i].ref
       << "\", shape=" << shapes[static_cast<int>(g.nodes[i].kind)] << "];\n";
  for (int type = 1; type <= kNumEdgeTypes; ++type)
    for (auto [a, b] : g.edges_of(type))
      os << "  n" << a << " -- n" << b << " [label=\"" << type << "\"];\n";
  os << "}\n";
  return os.str();
}

}  // namespace hde
