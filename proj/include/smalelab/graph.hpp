#ifndef SMALELAB_GRAPH_HPP
#define SMALELAB_GRAPH_HPP

#include <vector>

#include "smalelab/partitions.hpp"

namespace smalelab::graph {

// Leveled rooted inclusion graph of a refining sequence. Level 0 is the root
// (the whole space); levels 1..depth hold the covers.
struct ApproximationGraph {
  const systems::SmaleSystem* system = nullptr;
  bool dynamic = true;  // built from a dynamic refining sequence
  std::vector<partitions::RefinedCover> levels;
  // parent[n][k]: index in level n of the parent of vertex k at level n+1
  std::vector<std::vector<int>> parent;
  std::vector<std::vector<std::vector<int>>> children;

  int depth() const { return static_cast<int>(levels.size()); }
  size_t level_size(int n) const { return n == 0 ? 1 : levels.at(n - 1).count(); }
};

ApproximationGraph build_graph(const systems::SmaleSystem& sys, int depth);
// provider variant: covers supplied externally; inclusion resolved by word
// ancestry; marked non-dynamic unless stated
ApproximationGraph build_graph(const systems::SmaleSystem& sys,
                               std::vector<partitions::RefinedCover> covers, bool dynamic);

// edge choice per level: vertex indices v_0..v_len with v_0 at level 1
struct PathPrefix {
  std::vector<int> vertices;
  int length() const { return static_cast<int>(vertices.size()); }
};

PathPrefix path_of_point(const ApproximationGraph& g, const systems::Point& x);
std::vector<int> descendants(const ApproximationGraph& g, int level, int k);
PathPrefix shift_path(const ApproximationGraph& g, const PathPrefix& p);

// per-level membership counts #N_{V_n}({x}); count 1 certifies a unique coding
std::vector<int> injectivity_diagnostic(const ApproximationGraph& g, const systems::Point& x,
                                        int depth);

struct GraphConstants {
  double lambda = 0, Lambda = 0;  // decay bases of diameters resp. Lebesgue numbers
  double theta = 0, eta = 0;      // scale constants
  int C_graph = 0;                // max descendant count
  int N_graph = 0;                // max neighbour count
  int K_eta = 0;                  // minimal eta/2-ball cover cardinality (greedy)
  double growth_base = 0;         // fitted growth base of the level cardinalities
};

// leb[n-1] = Lebesgue number of level n (sampled; fattened covers for systems
// whose closed covers have overlapping boundaries)
GraphConstants extract_constants(const ApproximationGraph& g, const std::vector<double>& leb,
                                 double fit_tol = 0.35);

struct HomogeneityBound {
  double C = 0, s = 0;
};
// guarantee: every finite (a,b)-separated set Y has #Y <= C (b/a)^s.
// use_growth swaps the exact max-descendant count for the fitted growth base
// (an estimate, not a certificate).
HomogeneityBound homogeneity_bound(const GraphConstants& c, bool use_growth = false);

}  // namespace smalelab::graph

#endif
