#include "smalelab/graph.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>

namespace smalelab::graph {

using partitions::RefinedCover;
using systems::Point;
using systems::SmaleSystem;

namespace {

void wire_edges(ApproximationGraph& g) {
  g.parent.clear();
  g.children.clear();
  if (g.levels.empty()) return;  // just the root
  // level 1 -> root
  g.parent.emplace_back(g.levels[0].count(), 0);
  g.children.push_back({std::vector<int>{}});
  for (size_t k = 0; k < g.levels[0].count(); ++k) g.children[0][0].push_back(static_cast<int>(k));

  for (size_t n = 1; n < g.levels.size(); ++n) {
    const auto& shallow = g.levels[n - 1];
    const auto& deep = g.levels[n];
    std::map<std::vector<int>, int> index;
    for (size_t k = 0; k < shallow.count(); ++k) index[shallow.word(k)] = static_cast<int>(k);
    std::vector<int> par(deep.count(), -1);
    std::vector<std::vector<int>> ch(shallow.count());
    for (size_t k = 0; k < deep.count(); ++k) {
      const auto& w = deep.word(k);
      std::vector<int> central(w.begin() + 1, w.end() - 1);
      auto it = index.find(central);
      if (it == index.end()) throw not_refining("vertex has no parent at level " + std::to_string(n));
      par[k] = it->second;
      ch[it->second].push_back(static_cast<int>(k));
    }
    // refining-sequence sanity: no sinks
    for (size_t k = 0; k < shallow.count(); ++k)
      if (ch[k].empty()) throw not_refining("vertex has no child at level " + std::to_string(n));
    g.parent.push_back(std::move(par));
    g.children.push_back(std::move(ch));
  }
}

}  // namespace

ApproximationGraph build_graph(const SmaleSystem& sys, int depth) {
  ApproximationGraph g;
  g.system = &sys;
  g.dynamic = true;
  if (depth >= 1) g.levels = partitions::refine_range(sys, depth);
  wire_edges(g);
  return g;
}

ApproximationGraph build_graph(const SmaleSystem& sys, std::vector<RefinedCover> covers,
                               bool dynamic) {
  ApproximationGraph g;
  g.system = &sys;
  g.dynamic = dynamic;
  g.levels = std::move(covers);
  wire_edges(g);
  return g;
}

PathPrefix path_of_point(const ApproximationGraph& g, const Point& x) {
  PathPrefix p;
  for (const auto& lvl : g.levels) {
    auto c = lvl.geom->containing(x, 1e-12);
    if (c.empty()) throw geometry_unavailable("point not covered at level " + std::to_string(lvl.level));
    // compatible choice: prefer a child of the previous vertex
    int pick = c[0];
    if (!p.vertices.empty()) {
      for (int k : c)
        if (g.parent[lvl.level - 1][k] == p.vertices.back()) {
          pick = k;
          break;
        }
    }
    p.vertices.push_back(pick);
  }
  return p;
}

std::vector<int> descendants(const ApproximationGraph& g, int level, int k) {
  if (level < 0 || level >= g.depth()) throw unknown_vertex("level out of range");
  if (k < 0 || static_cast<size_t>(k) >= g.level_size(level)) throw unknown_vertex("index out of range");
  return g.children.at(level).at(k);
}

PathPrefix shift_path(const ApproximationGraph& g, const PathPrefix& p) {
  if (!g.dynamic) throw not_dynamic_graph("shift is defined for dynamic refining sequences only");
  if (p.length() < 2) throw config_error("shift needs a prefix of length >= 2");
  // on symbolic payloads the shift acts as the left shift of the deepest
  // central word, truncated one level
  const auto& deepest = g.levels[p.length() - 1];
  const auto& w = deepest.word(p.vertices.back());
  PathPrefix out;
  for (int n = 1; n <= p.length() - 1; ++n) {
    // shifted central word of rank 2n-1: symbols w_{1-n+1}..w_{n-1+1}
    const int off = static_cast<int>(w.size() + 1) / 2 - n + 1;  // index of (1-n)+1 within w
    std::vector<int> cw(w.begin() + off, w.begin() + off + 2 * n - 1);
    const auto& lvl = g.levels[n - 1];
    int found = -1;
    for (size_t k = 0; k < lvl.count(); ++k)
      if (lvl.word(k) == cw) {
        found = static_cast<int>(k);
        break;
      }
    if (found < 0) throw AuditError("ShiftPath", "shifted word missing from level");
    out.vertices.push_back(found);
  }
  return out;
}

std::vector<int> injectivity_diagnostic(const ApproximationGraph& g, const Point& x, int depth) {
  if (depth > g.depth()) throw config_error("diagnostic depth exceeds built levels");
  std::vector<int> out;
  for (int n = 1; n <= depth; ++n) {
    auto c = g.levels[n - 1].geom->containing(x, 1e-12);
    if (c.empty()) throw geometry_unavailable("point not covered at level " + std::to_string(n));
    out.push_back(static_cast<int>(c.size()));
  }
  return out;
}

GraphConstants extract_constants(const ApproximationGraph& g, const std::vector<double>& leb,
                                 double fit_tol) {
  GraphConstants c;
  const int depth = g.depth();
  if (depth < 2) throw config_error("constant extraction needs depth >= 2");

  // fit log2 diam_n ~ log2 theta - (n-1) log2 lambda by least squares, then
  // round theta outward so condition (1) holds at every level
  std::vector<double> dmax(depth);
  for (int n = 1; n <= depth; ++n) dmax[n - 1] = g.levels[n - 1].geom->diam_max();
  auto fit_base = [&](const std::vector<double>& vals) {
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    const int m = static_cast<int>(vals.size());
    for (int i = 0; i < m; ++i) {
      double xx = i, yy = std::log2(vals[i]);
      sx += xx;
      sy += yy;
      sxx += xx * xx;
      sxy += xx * yy;
    }
    double slope = (m * sxy - sx * sy) / (m * sxx - sx * sx);
    // residual check: decay must be exponential within tolerance
    double icpt = (sy - slope * sx) / m;
    for (int i = 0; i < m; ++i) {
      double pred = icpt + slope * i;
      if (std::abs(pred - std::log2(vals[i])) > fit_tol)
        throw decay_not_exponential("log-linear fit residual too large");
    }
    return std::exp2(-slope);
  };

  c.lambda = fit_base(dmax);
  if (c.lambda <= 1) throw decay_not_exponential("diameters do not decay");
  c.theta = 0;
  for (int n = 1; n <= depth; ++n) c.theta = std::max(c.theta, dmax[n - 1] * std::pow(c.lambda, n - 1));

  if (static_cast<int>(leb.size()) < depth) throw config_error("need a Lebesgue number per level");
  std::vector<double> lebv(leb.begin(), leb.begin() + depth);
  c.Lambda = fit_base(lebv);
  if (c.Lambda < c.lambda) c.Lambda = c.lambda;  // certificate may be rounded outward
  c.eta = std::numeric_limits<double>::infinity();
  for (int n = 1; n <= depth; ++n) c.eta = std::min(c.eta, lebv[n - 1] * std::pow(c.Lambda, n - 1));
  c.eta = std::min(c.eta, c.theta);

  c.C_graph = 0;
  for (const auto& level_children : g.children)
    for (const auto& ch : level_children) c.C_graph = std::max(c.C_graph, static_cast<int>(ch.size()));
  c.N_graph = 0;
  for (const auto& lvl : g.levels) c.N_graph = std::max(c.N_graph, lvl.geom->max_neighbours());

  // greedy eta/2-ball cover of the space over a sampled cloud
  auto cloud = systems::sample_points(*g.system, 4000, 404);
  std::vector<char> covered(cloud.size(), 0);
  int balls = 0;
  for (size_t i = 0; i < cloud.size(); ++i) {
    if (covered[i]) continue;
    ++balls;
    for (size_t j = 0; j < cloud.size(); ++j)
      if (!covered[j] && g.system->dist(cloud[i], cloud[j]) < c.eta / 2) covered[j] = 1;
  }
  c.K_eta = std::max(1, balls);

  double growth = 0;
  int cnt = 0;
  for (int n = 1; n < depth; ++n) {
    growth += std::log(static_cast<double>(g.level_size(n + 1)) / g.level_size(n));
    ++cnt;
  }
  c.growth_base = std::exp(growth / std::max(1, cnt));
  return c;
}

HomogeneityBound homogeneity_bound(const GraphConstants& c, bool use_growth) {
  if (std::abs(c.lambda - c.Lambda) > 0.05 * c.Lambda)
    throw not_homogeneous("decay bases of diameters and Lebesgue numbers disagree");
  const double lam = std::min(c.lambda, c.Lambda);
  const double base = use_growth ? c.growth_base : static_cast<double>(c.C_graph);
  HomogeneityBound out;
  out.s = std::log(base) / std::log(lam);
  const double cexp = 2 + std::log(c.theta / c.eta) / std::log(lam);
  out.C = static_cast<double>(c.K_eta) * c.N_graph * std::pow(base, cexp);
  return out;
}

}  // namespace smalelab::graph
