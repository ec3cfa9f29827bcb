#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "irtmpt/category.hpp"
#include "irtmpt/psi_cell.hpp"

namespace irtmpt {

using NodeId = std::size_t;

struct ProcessEdge {
  int process;   // 1..8
  bool success;  // traversal probability psi_s if true, 1 - psi_s otherwise
  NodeId target;
};

struct ProcessNode {
  std::string name;
  std::optional<Category> category;  // set for observable nodes only
  std::vector<ProcessEdge> edges;    // left-to-right child order

  bool observable() const { return category.has_value(); }
};

/// Directed acyclic graph of latent processes ending in observable
/// response categories.
class ProcessGraph {
 public:
  NodeId add_latent(std::string name);
  NodeId add_observable(Category c);
  /// Adds the complementary pair of edges for process s out of `from`.
  void add_binary_split(NodeId from, int process, NodeId on_failure, NodeId on_success);
  void set_root(NodeId root) { root_ = root; }

  NodeId root() const { return root_; }
  const ProcessNode& node(NodeId id) const { return nodes_.at(id); }
  std::size_t size() const { return nodes_.size(); }
  std::size_t observable_count() const;
  std::optional<NodeId> find_observable(Category c) const;

 private:
  std::vector<ProcessNode> nodes_;
  NodeId root_ = 0;
};

/// The collapsed naming-test DAG: Attempt, Sem, LexSem, LexPhon, LexSel,
/// five Phon nodes, Word-L and Word-T feeding the eight categories.
ProcessGraph build_default_graph();

struct PathFactor {
  int process;
  bool success;

  bool operator==(const PathFactor&) const = default;
};

struct ProcessPath {
  Category category;
  std::vector<PathFactor> factors;
};

using PathSet = std::vector<ProcessPath>;

/// Depth-first enumeration of every root-to-observable path. Throws
/// StructuralError on a cycle or on a latent node without children.
PathSet enumerate_paths(const ProcessGraph& graph);

std::size_t count_paths(const PathSet& paths, Category c);

/// Category probabilities as sums of path products. Independent of the
/// closed forms in forward_model.hpp. Entries must lie in [0,1].
CategoryDistribution oracle_distribution(const PathSet& paths, const PsiCell& psi);

}  // namespace irtmpt
