#pragma once

#include <deque>
#include <memory>
#include <string>
#include <unordered_map>
#include <vector>

#include "neuropt/symgraph/graph.hpp"

namespace neuropt::sym::detail {

struct GraphStore : std::enable_shared_from_this<GraphStore> {
  std::deque<Node> nodes;  // deque: references survive appends
  std::unordered_map<std::string, std::int32_t> symbols;

  ExprRef ref(std::int32_t index) { return ExprRef(shared_from_this(), index); }

  /// Appends `node`, folding it into a Constant when every operand is one.
  ExprRef append(Node node);
};

struct Access {
  static GraphStore& store(const ExprRef& e) { return *e.store_; }
  static GraphStore& store(const ExprGraph& g) { return *g.store_; }
};

}  // namespace neuropt::sym::detail
