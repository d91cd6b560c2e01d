#pragma once

#include <cstddef>
#include <functional>
#include <vector>

#include "glomseg/tensor.hpp"

namespace glomseg {

// Recording tape. Constructing a Graph makes it the active tape (stack scoped,
// single-threaded per training run); ops append one node per recorded
// operation, in execution order, which is a topological order of the DAG.
// backward() seeds the scalar loss with gradient 1 and replays the nodes in
// reverse, each node accumulating into its inputs' gradients.
//
// Gradients accumulate across backward calls: calling backward twice on the
// same loss doubles every leaf gradient. Callers zero or clear grads between
// iterations.
class Graph {
 public:
  Graph();
  ~Graph();
  Graph(const Graph&) = delete;
  Graph& operator=(const Graph&) = delete;

  void backward(Tensor loss);
  std::size_t node_count() const { return nodes_.size(); }

  static Graph* active();
  // Append a node to the active tape. No-op when no tape is active.
  static void record(Tensor output, std::function<void()> backward_fn);

 private:
  struct Node {
    Tensor output;
    std::function<void()> fn;
  };
  std::vector<Node> nodes_;
};

// Backward through the currently active graph; error if none is active.
void backward(Tensor loss);

}  // namespace glomseg
