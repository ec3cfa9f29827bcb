#include "irtmpt/mpt_graph.hpp"

#include <string>

#include "irtmpt/errors.hpp"

namespace irtmpt {

NodeId ProcessGraph::add_latent(std::string name) {
  nodes_.push_back(ProcessNode{std::move(name), std::nullopt, {}});
  return nodes_.size() - 1;
}

NodeId ProcessGraph::add_observable(Category c) {
  nodes_.push_back(ProcessNode{std::string(to_string(c)), c, {}});
  return nodes_.size() - 1;
}

void ProcessGraph::add_binary_split(NodeId from, int process, NodeId on_failure,
                                    NodeId on_success) {
  auto& edges = nodes_.at(from).edges;
  edges.push_back({process, false, on_failure});
  edges.push_back({process, true, on_success});
}

std::size_t ProcessGraph::observable_count() const {
  std::size_t n = 0;
  for (const auto& node : nodes_) n += node.observable() ? 1 : 0;
  return n;
}

std::optional<NodeId> ProcessGraph::find_observable(Category c) const {
  for (NodeId i = 0; i < nodes_.size(); ++i) {
    if (nodes_[i].category == c) return i;
  }
  return std::nullopt;
}

ProcessGraph build_default_graph() {
  ProcessGraph g;
  const NodeId attempt = g.add_latent("Attempt");
  const NodeId sem = g.add_latent("Sem");
  const NodeId lex_sem = g.add_latent("LexSem");
  const NodeId lex_phon = g.add_latent("LexPhon");
  const NodeId lex_sel = g.add_latent("LexSel");
  const NodeId phon_sem = g.add_latent("Phon1");
  const NodeId phon_lex_sem = g.add_latent("Phon2");
  const NodeId phon_lex_phon = g.add_latent("Phon3");
  const NodeId phon_sel_fail = g.add_latent("Phon4");
  const NodeId phon_sel_ok = g.add_latent("Phon5");
  const NodeId word_l = g.add_latent("Word-L");
  const NodeId word_t = g.add_latent("Word-T");

  NodeId obs[kNumCategories];
  for (Category c : kAllCategories) obs[index_of(c)] = g.add_observable(c);
  auto leaf = [&](Category c) { return obs[index_of(c)]; };

  g.add_binary_split(attempt, 1, leaf(Category::NA), sem);
  g.add_binary_split(sem, 2, phon_sem, lex_sem);
  g.add_binary_split(lex_sem, 3, phon_lex_sem, lex_phon);
  g.add_binary_split(lex_phon, 4, phon_lex_phon, lex_sel);
  g.add_binary_split(lex_sel, 5, phon_sel_fail, phon_sel_ok);

  g.add_binary_split(phon_sem, 6, word_l, leaf(Category::U));
  g.add_binary_split(phon_lex_sem, 6, word_l, leaf(Category::S));
  g.add_binary_split(phon_lex_phon, 6, word_t, leaf(Category::F));
  g.add_binary_split(phon_sel_fail, 6, word_t, leaf(Category::M));
  g.add_binary_split(phon_sel_ok, 6, word_t, leaf(Category::C));

  g.add_binary_split(word_l, 8, leaf(Category::AN), leaf(Category::U));
  g.add_binary_split(word_t, 7, leaf(Category::N), leaf(Category::F));

  g.set_root(attempt);
  return g;
}

namespace {

enum class Mark { Unvisited, OnStack };

void walk(const ProcessGraph& g, NodeId id, std::vector<Mark>& marks,
          std::vector<PathFactor>& prefix, PathSet& out) {
  const ProcessNode& node = g.node(id);
  if (node.observable()) {
    out.push_back({*node.category, prefix});
    return;
  }
  if (node.edges.empty()) throw StructuralError("latent node " + node.name + " has no children");
  marks[id] = Mark::OnStack;
  for (const ProcessEdge& e : node.edges) {
    if (e.target >= g.size()) throw StructuralError("edge out of " + node.name + " is dangling");
    if (marks[e.target] == Mark::OnStack) {
      throw StructuralError("cycle through " + g.node(e.target).name);
    }
    prefix.push_back({e.process, e.success});
    walk(g, e.target, marks, prefix, out);
    prefix.pop_back();
  }
  marks[id] = Mark::Unvisited;
}

}  // namespace

PathSet enumerate_paths(const ProcessGraph& graph) {
  if (graph.size() == 0) throw StructuralError("empty graph");
  std::vector<Mark> marks(graph.size(), Mark::Unvisited);
  std::vector<PathFactor> prefix;
  PathSet out;
  walk(graph, graph.root(), marks, prefix, out);
  return out;
}

std::size_t count_paths(const PathSet& paths, Category c) {
  std::size_t n = 0;
  for (const auto& p : paths) n += p.category == c ? 1 : 0;
  return n;
}

CategoryDistribution oracle_distribution(const PathSet& paths, const PsiCell& psi) {
  require_unit_interval(psi);
  CategoryDistribution d;
  for (const ProcessPath& path : paths) {
    double prod = 1.0;
    for (const PathFactor& f : path.factors) {
      const double v = psi(f.process);
      prod *= f.success ? v : 1.0 - v;
    }
    d[path.category] += prod;
  }
  return d;
}

}  // namespace irtmpt
