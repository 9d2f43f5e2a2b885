#include "flowtree/kernels.hpp"

#include <cstdlib>
#include <string>

namespace flowtree {

std::size_t prefix_table_entries(const TruncatedTree& t) {
  std::size_t total = 0;
  for (VertexId x = 0; x < t.size(); ++x) total += static_cast<std::size_t>(t.height(x) + 2);
  return total;
}

std::vector<std::vector<VertexId>> descendant_layers(const TruncatedTree& t, VertexId x, int depth) {
  std::vector<std::vector<VertexId>> layers;
  if (depth <= 0) return layers;
  layers.push_back({x});
  for (int k = 1; k < depth; ++k) {
    std::vector<VertexId> next;
    for (VertexId v : layers.back())
      for (VertexId c : t.successors(v)) next.push_back(c);
    if (next.empty()) break;
    layers.push_back(std::move(next));
  }
  return layers;
}

void configure_threads_from_env() {
  if (const char* env = std::getenv("FLOWTREE_THREADS")) {
    const int n = std::atoi(env);
    if (n > 0) omp_set_num_threads(n);
  }
}

}  // namespace flowtree
