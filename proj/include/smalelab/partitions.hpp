#ifndef SMALELAB_PARTITIONS_HPP
#define SMALELAB_PARTITIONS_HPP

#include <memory>
#include <string>
#include <vector>

#include "smalelab/systems.hpp"

namespace smalelab::partitions {

// Geometric realization of one cover level. Implementations are per system:
// exact interval boxes for the cat map, cylinder combinatorics for shifts,
// dyadic interval-times-bits rectangles for the solenoid.
class Geometry {
public:
  virtual ~Geometry() = default;
  virtual int count() const = 0;
  virtual double diam(int k) const = 0;
  virtual double diam_max() const;
  virtual double diam_min() const;
  virtual bool touches(int a, int b) const = 0;  // closed-set intersection on the space
  virtual std::vector<int> neighbors(int k) const = 0;  // includes k itself
  virtual int max_neighbours() const;
  virtual int multiplicity() const = 0;  // max number of rectangles sharing a point
  virtual std::vector<int> containing(const systems::Point& x, double tol) const = 0;
  virtual std::vector<int> meeting_ball(const systems::Point& x, double r) const = 0;
  // distance from x to the complement of rectangle k; 0 when x is outside
  virtual double dist_to_complement(const systems::Point& x, int k) const = 0;
  virtual systems::Point sample_point(int k, Rng& rng) const = 0;
  virtual double rect_measure(int k) const = 0;  // Bowen measure of the rectangle
};

using WordList = std::vector<std::vector<int>>;

struct RefinedCover {
  int level = 0;  // n: words have rank 2n-1, offset 1-n
  const systems::SmaleSystem* system = nullptr;
  std::shared_ptr<const WordList> words;
  std::shared_ptr<Geometry> geom;

  size_t count() const { return words->size(); }
  const std::vector<int>& word(size_t k) const { return (*words)[k]; }
};

// Levels 1..n_max of the refining sequence, realized incrementally.
std::vector<RefinedCover> refine_range(const systems::SmaleSystem& sys, int n_max);
RefinedCover refine(const systems::SmaleSystem& sys, int n);

struct SamplingSpec {
  int leb_samples = 100000;
  uint64_t seed = 1;
};

struct CoverStats {
  int level = 0;
  size_t count = 0;
  double diam_max = 0, diam_min = 0;
  double leb = 0;
  int multiplicity = 0;
  int max_neighbours = 0;
};

CoverStats cover_stats(const RefinedCover& cover, const SamplingSpec& spec = {});

// Smallest N >= 1 such that neighbourhoods at level 1+N separate every
// disjoint pair of base rectangles; spot-checked one level higher.
int normality_constant(const std::vector<RefinedCover>& covers);

struct NeighbourBoundReport {
  int sup_observed = 0;
  int normality = 0;
  symdyn::BigInt bound = 0;  // max((#R1)^{2(N+1)}, M_N)
  bool ok = false;
};
NeighbourBoundReport neighbour_bound(const std::vector<RefinedCover>& covers, int N);

struct FatCover {
  int level = 0;
  double delta = 0;  // metric fattening radius actually realized
  const systems::SmaleSystem* system = nullptr;
  std::shared_ptr<Geometry> geom;
  size_t count = 0;
};

struct DeltaBounds {
  double delta0 = 0, delta1 = 0;
};
DeltaBounds delta_search(const systems::SmaleSystem& sys, const RefinedCover& base);

FatCover fatten(const RefinedCover& cover, double delta);

struct AuditReport {
  bool pass = false;
  std::vector<std::string> violations;
};
AuditReport fattening_audit(const std::vector<RefinedCover>& covers, const std::vector<FatCover>& fats);

struct UfcpRow {
  int center = 0;
  double r = 0;
  int level = 0;  // n_r
  int count = 0;
  bool depth_exceeded = false;
};
struct UfcpReport {
  int sup_count = 0;
  std::vector<UfcpRow> table;
};
UfcpReport ufcp(const systems::SmaleSystem& sys, const std::vector<RefinedCover>& covers,
                const std::vector<double>& radii, const std::vector<systems::Point>& centers);

// Sampled Lebesgue covering number of a fat cover (quasi-random probes).
double lebesgue(const FatCover& fat, int samples, uint64_t seed);

}  // namespace smalelab::partitions

#endif
