#include "glomseg/graph.hpp"

#include <stdexcept>

namespace glomseg {

namespace {
thread_local std::vector<Graph*> g_graph_stack;
}

Graph::Graph() { g_graph_stack.push_back(this); }

Graph::~Graph() {
  if (!g_graph_stack.empty() && g_graph_stack.back() == this) {
    g_graph_stack.pop_back();
  }
}

Graph* Graph::active() { return g_graph_stack.empty() ? nullptr : g_graph_stack.back(); }

void Graph::record(Tensor output, std::function<void()> backward_fn) {
  Graph* g = active();
  if (!g) return;
  g->nodes_.push_back(Node{std::move(output), std::move(backward_fn)});
}

void Graph::backward(Tensor loss) {
  if (!loss.defined() || !loss.is_scalar()) {
    throw std::invalid_argument("backward: loss must be a scalar tensor");
  }
  loss.ensure_grad();
  loss.grad()[0] += 1.0f;
  for (auto it = nodes_.rbegin(); it != nodes_.rend(); ++it) {
    // Nodes whose output never received a gradient are not ancestors of the
    // loss; skipping them keeps unrelated leaves' gradients absent.
    if (it->output.has_grad()) it->fn();
  }
}

void backward(Tensor loss) {
  Graph* g = Graph::active();
  if (!g) throw std::logic_error("backward: no active graph");
  g->backward(std::move(loss));
}

}  // namespace glomseg
