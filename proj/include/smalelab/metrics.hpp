#ifndef SMALELAB_METRICS_HPP
#define SMALELAB_METRICS_HPP

#include <string>
#include <vector>

#include "smalelab/systems.hpp"

namespace smalelab::metrics {

struct AxBound {
  double upper = 0, lower = 0;
};
AxBound a_x_bound(double lambda, double Lambda);

struct FathiReport {
  bool theoretical_applicable = false;
  double k_theoretical = 0, xi_theoretical = 0;
  double k_empirical = 0, xi_empirical = 0;
  bool pass = false;
};
FathiReport fathi_check(const systems::SmaleSystem& sys, int n_pairs, uint64_t seed);

// Self-similarizing metric d_A(x,y) = max_n d(phi^n x, phi^n y) / k^{|n|},
// evaluated with exact adaptive truncation.
class MetricTransform {
public:
  MetricTransform(const systems::SmaleSystem& sys, double k, int truncation_guard = 2);
  double distance(const systems::Point& x, const systems::Point& y) const;
  double k() const { return k_; }
  const systems::SmaleSystem& system() const { return *sys_; }

private:
  const systems::SmaleSystem* sys_;
  double k_;
  int guard_;
};

double artigue_distance(const MetricTransform& t, const systems::Point& x, const systems::Point& y);

struct SelfSimReport {
  bool pass = false;
  double lip_max = 0;          // max of d_A(phi^{+-1}x, phi^{+-1}y) / d_A(x,y)
  double stable_contraction = 0;  // max forward ratio over local stable pairs
  double holder_c = 0, holder_gamma = 0, gamma_target = 0;
  std::string counterexample;
};
SelfSimReport selfsimilarity_audit(const MetricTransform& t, int n_pairs, uint64_t seed);

// sampled pairs at controlled scales, shared by the metric checks
std::vector<std::pair<systems::Point, systems::Point>> scaled_pairs(const systems::SmaleSystem& sys,
                                                                    int n_pairs, uint64_t seed);

}  // namespace smalelab::metrics

#endif
