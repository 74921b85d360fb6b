#include "martweak/serialize.hpp"

#include <json.hpp>
#include <stdexcept>
#include <unordered_map>
#include <vector>

namespace martweak {

namespace {

using nlohmann::json;

template <typename Summary>
json leaf_json(const Summary& s);

template <>
json leaf_json(const PairSummary& s) {
  return json{{"phi", s.phi}, {"psi", s.psi}};
}

template <>
json leaf_json(const StepSummary& s) {
  return json{{"val", s.mean}};
}

template <typename Summary>
std::string encode(const DyadicTree<Summary>& t, const char* kind, const SerializeOptions& opt) {
  using Node = typename DyadicTree<Summary>::Node;

  std::unordered_map<const Node*, int> in_degree;
  if (opt.share_subtrees) {
    std::vector<const Node*> stack{t.id()};
    in_degree[t.id()] = 1;
    while (!stack.empty()) {
      const Node* n = stack.back();
      stack.pop_back();
      if (n->is_leaf()) continue;
      for (const Node* c : {n->left.get(), n->right.get()}) {
        if (++in_degree[c] == 1) stack.push_back(c);
      }
    }
  }

  json shared = json::array();
  std::unordered_map<const Node*, std::size_t> ref_of;
  std::function<json(const Node*)> go = [&](const Node* n) -> json {
    if (n->is_leaf()) return leaf_json(n->summary);
    if (auto it = ref_of.find(n); it != ref_of.end()) return json{{"ref", it->second}};
    json node{{"left", go(n->left.get())}, {"right", go(n->right.get())}};
    if (opt.share_subtrees && in_degree[n] > 1) {
      ref_of.emplace(n, shared.size());
      shared.push_back(std::move(node));
      return json{{"ref", shared.size() - 1}};
    }
    return node;
  };

  json doc{{"kind", kind}, {"root", go(t.id())}};
  if (!shared.empty()) doc["shared"] = std::move(shared);
  return doc.dump(opt.indent);
}

template <typename Summary>
DyadicTree<Summary> decode(const std::string& text, const char* kind) {
  using Tree = DyadicTree<Summary>;
  const json doc = json::parse(text);
  if (!doc.is_object() || doc.value("kind", "") != kind) {
    throw std::invalid_argument(std::string("expected a JSON document of kind ") + kind);
  }
  std::vector<Tree> shared;
  std::function<Tree(const json&)> go = [&](const json& n) -> Tree {
    if (!n.is_object()) throw std::invalid_argument("tree node must be an object");
    if (n.contains("ref")) {
      const auto i = n.at("ref").get<std::size_t>();
      if (i >= shared.size()) throw std::invalid_argument("dangling shared-node reference");
      return shared[i];
    }
    if (n.contains("left") || n.contains("right")) {
      return Tree::split(go(n.at("left")), go(n.at("right")));
    }
    if constexpr (std::is_same_v<Summary, PairSummary>) {
      return Tree::leaf(n.at("phi").get<double>(), n.at("psi").get<double>());
    } else {
      return Tree::leaf(n.at("val").get<double>());
    }
  };
  if (doc.contains("shared")) {
    for (const json& entry : doc.at("shared")) shared.push_back(go(entry));
  }
  return go(doc.at("root"));
}

}  // namespace

std::string to_json(const PairTree& p, const SerializeOptions& opt) {
  return encode(p, "pair", opt);
}

std::string to_json(const StepFunction& f, const SerializeOptions& opt) {
  return encode(f, "step", opt);
}

PairTree pair_from_json(const std::string& text) { return decode<PairSummary>(text, "pair"); }

StepFunction step_from_json(const std::string& text) { return decode<StepSummary>(text, "step"); }

}  // namespace martweak
