#ifndef SMALELAB_SYSTEMS_HPP
#define SMALELAB_SYSTEMS_HPP

#include <array>
#include <memory>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "smalelab/qsqrt5.hpp"
#include "smalelab/rng.hpp"
#include "smalelab/symdyn.hpp"

namespace smalelab::systems {

enum class Kind { Sft, CatMap, Solenoid, Horseshoe };

struct SystemConstants {
  double eps = 0;         // bracket domain radius
  double eps_prime = 0;   // uniqueness radius of the local product
  double eps_dprime = 0;  // two-step control radius
  double lambda = 0;      // contraction constant, > 1
  double lip_fwd = 0, lip_inv = 0;
  double ell = 0, Lambda = 0;  // min resp. max of the Lipschitz constants
  double diameter = 0;         // diam of the space
  // Largest base-partition diameter for which the coding is certified faithful
  // by construction (exact Markov verification / clopen cylinders). The
  // sufficient two-step diameter hypothesis is far below desk scale, so the
  // refine precondition accepts either route.
  double coding_diam = 0;
};

struct SftPoint {
  std::vector<int> window;  // symbols 1..N at indices -depth..depth
  int depth = 0;
  int at(int i) const { return window[i + depth]; }
};

struct TorusPoint {
  double x = 0, y = 0;  // mod 1
};

struct SolenoidPoint {
  double theta = 0;           // angle of the 0-th coordinate, in [0,1)
  std::vector<uint8_t> bits;  // root choices b_1..b_K
  double angle(int n) const;  // n-th coordinate angle
};

struct HorseshoePoint {
  std::vector<int> window;  // binary symbols (1/2) at -depth..depth
  int depth = 0;
  int at(int i) const { return window[i + depth]; }
};

using Point = std::variant<SftPoint, TorusPoint, SolenoidPoint, HorseshoePoint>;

class SmaleSystem {
public:
  virtual ~SmaleSystem() = default;
  virtual std::string name() const = 0;
  virtual Kind kind() const = 0;
  virtual const SystemConstants& constants() const = 0;

  virtual double dist(const Point& a, const Point& b) const = 0;
  virtual Point apply(const Point& p) const = 0;
  virtual Point apply_inv(const Point& p) const = 0;
  virtual Point bracket(const Point& a, const Point& b) const = 0;  // TooFar beyond eps
  virtual Point random_point(Rng& rng) const = 0;  // coded Parry sample (Bowen-distributed)

  // Markov coding layer: the base partition's transition matrix and Parry data.
  virtual const symdyn::TransitionMatrix& base_matrix() const = 0;
  virtual const symdyn::ParryMeasure& base_parry() const = 0;
  virtual int depth_cap() const = 0;
};

struct SystemParams {
  int sft_depth = 16;           // point window half-width K
  int solenoid_depth = 24;      // truncation K
  int solenoid_base = 2;        // base partition = (2m-1)-bit blocks of the 2-to-1 cover
  int horseshoe_depth = 32;     // coding half-width
  double horseshoe_lambda1 = 1.0 / 3.0;
  double horseshoe_cantor = 1.0 / 3.0;
  int catmap_prerefine = 0;
};

class Sft final : public SmaleSystem {
public:
  Sft(std::string name, symdyn::TransitionMatrix m, int depth);
  std::string name() const override { return name_; }
  Kind kind() const override { return Kind::Sft; }
  const SystemConstants& constants() const override { return consts_; }
  double dist(const Point& a, const Point& b) const override;
  symdyn::DyadicDistance dyadic_dist(const Point& a, const Point& b) const;
  Point apply(const Point& p) const override;
  Point apply_inv(const Point& p) const override;
  Point bracket(const Point& a, const Point& b) const override;
  Point random_point(Rng& rng) const override;
  const symdyn::TransitionMatrix& base_matrix() const override { return m_; }
  const symdyn::ParryMeasure& base_parry() const override { return parry_; }
  int depth_cap() const override { return 16; }
  int point_depth() const { return depth_; }

private:
  std::string name_;
  symdyn::TransitionMatrix m_;
  symdyn::ParryMeasure parry_;
  SystemConstants consts_;
  int depth_;
};

// Exact scalar (a + b*sqrt5)/den used for all cat-map coordinates. Every box
// of every cover level lives over a small shared denominator, so coordinate
// predicates reduce to 128-bit integer sign tests.
struct K5 {
  long long a = 0, b = 0;
  // sign of a + b*sqrt5
  static int sign(long long a, long long b);
  // compare x/dx with y/dy
  static int cmp(const K5& x, long long dx, const K5& y, long long dy);
};

// Hyperbolic toral automorphism [[2,1],[1,1]] with an exactly constructed
// Markov partition: two golden squares in orthogonal eigen-coordinates,
// split along the one-step joint refinement into five full-height slabs.
class CatMap final : public SmaleSystem {
public:
  struct Box {
    long long den = 1;     // common denominator of all eight coordinates
    K5 x0, x1, y0, y1;     // closed box [x0,x1] x [y0,y1] in eigen-parameters
    double xlo = 0, xhi = 0, ylo = 0, yhi = 0;  // double mirrors
    void refresh();
  };

  explicit CatMap(int prerefine = 0);

  std::string name() const override { return "catmap"; }
  Kind kind() const override { return Kind::CatMap; }
  const SystemConstants& constants() const override { return consts_; }
  double dist(const Point& a, const Point& b) const override;
  Point apply(const Point& p) const override;
  Point apply_inv(const Point& p) const override;
  Point bracket(const Point& a, const Point& b) const override;
  Point random_point(Rng& rng) const override;
  const symdyn::TransitionMatrix& base_matrix() const override { return *matrix_; }
  const symdyn::ParryMeasure& base_parry() const override { return parry_; }
  int depth_cap() const override { return 8; }

  // exact partition data
  const std::vector<Box>& base_boxes() const { return boxes_; }
  double base_diam() const;
  static Box map_box(const Box& b, int power);  // A^power in eigen-coords
  static Box translated(const Box& b, int m, int n);
  static Box rescaled(const Box& b, long long new_den);
  // open expansion of a box by e = (ea + eb*sqrt5)/eden on all four sides
  static Box expanded(const Box& b, long long ea, long long eb, long long eden);
  // in-place multiplication of an exact scalar by phi^{2 power}
  static void scale_by_phi_power(long long& ea, long long& eb, long long& eden, int power);
  // exact box predicates (denominators are reconciled internally)
  static bool box_overlap_open(const Box& a, const Box& b);
  static bool box_overlap_closed(const Box& a, const Box& b);
  static bool box_subset_strict(const Box& inner, const Box& outer);
  static bool box_contains_closed(const Box& b, K5 p_x, K5 p_y, long long pden);
  static bool box_contains_open(const Box& b, K5 p_x, K5 p_y, long long pden);
  // euclidean scale of the eigen-parameterization: |p| = eig_scale * |(xi,eta)|
  static double eig_scale();
  static Q5 eig_scale_sq();

  // extend an exact box by the constraint A^{-i}(base box of symbol s + suitable
  // lattice translate); nullopt when no translate admits an open overlap
  std::optional<Box> constrain(const Box& running, int symbol, int i) const;

  // exact area of a box in torus measure
  static Q5 box_area(const Box& b);

  TorusPoint eig_to_torus(double xi, double eta) const;
  void torus_to_eig(const TorusPoint& p, double& xi, double& eta) const;

private:
  void build_partition(int prerefine);

  std::vector<Box> boxes_;
  std::unique_ptr<symdyn::TransitionMatrix> matrix_;
  symdyn::ParryMeasure parry_;
  SystemConstants consts_;
  std::vector<double> sample_weights_;
};

// Truncated dyadic solenoid: inverse limit of the circle-doubling map with the
// weighted product metric, truncated at depth K.
class Solenoid final : public SmaleSystem {
public:
  explicit Solenoid(int depth = 24, int base_halfwidth = 2);
  std::string name() const override { return "solenoid"; }
  Kind kind() const override { return Kind::Solenoid; }
  const SystemConstants& constants() const override { return consts_; }
  double dist(const Point& a, const Point& b) const override;
  Point apply(const Point& p) const override;
  Point apply_inv(const Point& p) const override;
  Point bracket(const Point& a, const Point& b) const override;
  Point random_point(Rng& rng) const override;
  const symdyn::TransitionMatrix& base_matrix() const override { return *matrix_; }
  const symdyn::ParryMeasure& base_parry() const override { return parry_; }
  int depth_cap() const override { return 8; }

  int depth() const { return depth_; }
  int base_halfwidth() const { return base_m_; }
  // decode a base symbol (1..2^{2m-1}) into its window bits b_{1-m}..b_{m-1}
  std::vector<int> symbol_bits(int symbol) const;
  // geometric sum of 4^{-n} truncated at K, the scale factor of the t-flow
  double tflow_norm() const { return tflow_norm_; }

private:
  int depth_, base_m_;
  std::unique_ptr<symdyn::TransitionMatrix> matrix_;
  symdyn::ParryMeasure parry_;
  SystemConstants consts_;
  double tflow_norm_;
};

// Linear horseshoe in R^3: product of a planar self-affine set (two affine
// contractions of the unit square) with a uniform Cantor set.
class Horseshoe final : public SmaleSystem {
public:
  Horseshoe(double lambda1 = 1.0 / 3.0, double cantor_ratio = 1.0 / 3.0, int depth = 32);
  std::string name() const override { return "horseshoe"; }
  Kind kind() const override { return Kind::Horseshoe; }
  const SystemConstants& constants() const override { return consts_; }
  double dist(const Point& a, const Point& b) const override;
  Point apply(const Point& p) const override;
  Point apply_inv(const Point& p) const override;
  Point bracket(const Point& a, const Point& b) const override;
  Point random_point(Rng& rng) const override;
  const symdyn::TransitionMatrix& base_matrix() const override { return *matrix_; }
  const symdyn::ParryMeasure& base_parry() const override { return parry_; }
  int depth_cap() const override { return 16; }

  double lambda1() const { return lambda1_; }
  double lambda2() const { return lambda2_; }
  double cantor_ratio() const { return cantor_; }
  int point_depth() const { return depth_; }
  std::array<double, 3> embed(const HorseshoePoint& p) const;
  // cylinder box of a finite word: F-box from symbols at indices >= 1,
  // E-interval from symbols at indices <= 0
  struct Cyl {
    double fx_lo, fx_hi, fy_lo, fy_hi, e_lo, e_hi;
  };
  Cyl cylinder_box(const std::vector<int>& symbols, int offset) const;

private:
  double lambda1_, lambda2_, cantor_;
  int depth_;
  std::unique_ptr<symdyn::TransitionMatrix> matrix_;
  symdyn::ParryMeasure parry_;
  SystemConstants consts_;
};

std::unique_ptr<SmaleSystem> make_system(const std::string& name, const SystemParams& params = {});

struct LipschitzEstimate {
  double lip_fwd = 0, lip_inv = 0, lambda_emp = 0;
};
LipschitzEstimate lipschitz_estimate(const SmaleSystem& sys, int n_pairs, uint64_t seed);

std::vector<Point> sample_points(const SmaleSystem& sys, int n, uint64_t seed);

std::array<double, 3> horseshoe_point(const Horseshoe& sys, const HorseshoePoint& code);

}  // namespace smalelab::systems

#endif
