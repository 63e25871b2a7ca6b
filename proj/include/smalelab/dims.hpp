#ifndef SMALELAB_DIMS_HPP
#define SMALELAB_DIMS_HPP

#include <string>
#include <vector>

#include "smalelab/partitions.hpp"

namespace smalelab::dims {

struct RectangleCheck {
  double K = 0, s0 = 0;
};
// semi-conformal rectangle estimate: the Bowen measure of every built
// rectangle lies within K of diam^{s0}
RectangleCheck bowen_rectangle_check(const systems::SmaleSystem& sys,
                                     const std::vector<partitions::RefinedCover>& covers);

struct BallMeasure {
  double estimate = 0;
  double ci_lo = 0, ci_hi = 0;  // 99% interval (exact bounds for quadrature)
  bool exact = false;
};
BallMeasure ball_measure(const systems::SmaleSystem& sys,
                         const std::vector<partitions::RefinedCover>& covers,
                         const systems::Point& x, double r, int n_samples, uint64_t seed);

struct RegularityProbe {
  int center = 0;
  double r = 0, mu = 0, ci_lo = 0, ci_hi = 0;
};
struct RegularityReport {
  double s_target = 0;
  double s_hat = 0;
  double c_hat = 0;
  double spread = 0;
  std::string verdict;  // PASS or FAIL
  std::vector<RegularityProbe> probes;
  std::vector<double> ball_slopes;
};
RegularityReport ahlfors_fit(const systems::SmaleSystem& sys,
                             const std::vector<partitions::RefinedCover>& covers, double s_target,
                             const std::vector<systems::Point>& centers,
                             const std::vector<double>& radii, int n_samples, uint64_t seed,
                             double s_tol = 0.1, double spread_tol = 0.05);

struct BoxDimension {
  double lower_slope = 0, upper_slope = 0;  // min/max successive-pair slopes
  double fitted = 0;                        // pooled least-squares slope
};
BoxDimension box_dimension(const symdyn::TransitionMatrix& m, int depth);  // exact SFT counts
BoxDimension box_dimension(const std::vector<partitions::RefinedCover>& covers);

double assouad_estimate(const systems::SmaleSystem& sys, const std::vector<systems::Point>& cloud,
                        const std::vector<std::pair<double, double>>& scale_pairs);

double doubling_constant(const systems::SmaleSystem& sys,
                         const std::vector<partitions::RefinedCover>& covers,
                         const std::vector<systems::Point>& centers, const std::vector<double>& radii,
                         int n_samples, uint64_t seed);

struct BoundsReport {
  double h = 0, lambda = 0, Lambda = 0;
  double A_upper = 0, A_lower = 0;
  double lower_dim = 0, upper_dim = 0;
  bool applicable = false;  // lambda > 2 A_upper
};
BoundsReport dimension_bounds(double h, double lambda, double Lambda);

}  // namespace smalelab::dims

#endif
