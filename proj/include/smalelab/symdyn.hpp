#ifndef SMALELAB_SYMDYN_HPP
#define SMALELAB_SYMDYN_HPP

#include <boost/multiprecision/cpp_int.hpp>

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "smalelab/errors.hpp"
#include "smalelab/rng.hpp"

namespace smalelab::symdyn {

using BigInt = boost::multiprecision::cpp_int;

// 0/1 transition matrix of a topological Markov chain. Symbols are 1..N in
// all external interfaces; storage is 0-based.
class TransitionMatrix {
public:
  TransitionMatrix(int n, std::vector<uint8_t> entries);
  static TransitionMatrix full_shift(int n);
  static TransitionMatrix golden_mean();
  static TransitionMatrix from_file(const std::string& path);

  int size() const { return n_; }
  bool at(int i, int j) const { return entries_[i * n_ + j] != 0; }  // 0-based
  bool allows(int a, int b) const { return at(a - 1, b - 1); }       // 1-based symbols
  const std::vector<uint8_t>& entries() const { return entries_; }

private:
  int n_;
  std::vector<uint8_t> entries_;
};

struct MatrixClassification {
  bool irreducible = false;
  bool primitive = false;
  int witness_power = 0;  // smallest p with M^p > 0 when primitive
};

MatrixClassification validate_matrix(const TransitionMatrix& m);

struct PerronData {
  double lambda = 0;
  std::vector<double> u;  // right eigenvector, positive
  std::vector<double> v;  // left eigenvector, positive, sum v_i u_i = 1
  double residual = 0;    // ||Mu - lambda u||_inf / ||u||_inf
};

PerronData perron(const TransitionMatrix& m, double tol = 1e-13, int max_iter = 100000);
double entropy(const TransitionMatrix& m);

// Admissible finite word. offset = index of the first symbol, so a symmetric
// rank-(2n-1) word has offset 1-n. Construction rejects inadmissible strings.
struct Word {
  std::vector<int> symbols;  // values 1..N
  int offset = 0;

  int rank() const { return static_cast<int>(symbols.size()); }
  int last_index() const { return offset + rank() - 1; }
  int at(int index) const { return symbols[index - offset]; }
  std::string str() const;  // "1,2,1@-1"

  static std::optional<Word> make(const TransitionMatrix& m, std::vector<int> symbols, int offset);
  static std::optional<Word> parse(const TransitionMatrix& m, const std::string& text);
};

struct ParryMeasure {
  double lambda = 0;
  std::vector<double> p;               // stationary distribution, p_i = v_i u_i
  std::vector<std::vector<double>> P;  // row-stochastic, P_ij = M_ij u_j / (lambda u_i)
  std::vector<double> u, v;            // eigendata the stochasticization came from

  int size() const { return static_cast<int>(p.size()); }
  // Constant of the symmetric-cylinder estimate: the measure of every rank
  // (2n-1) symmetric cylinder telescopes to v_first * u_last * lambda^{-2n+2},
  // so mu * lambda^{2n} lies in [D^{-1}, D] with D from the eigenvector extremes.
  double cylinder_bound() const;
};

ParryMeasure parry(const TransitionMatrix& m, const PerronData& pd);
ParryMeasure parry(const TransitionMatrix& m);

struct CylinderOutcome {
  bool admissible = false;
  double measure = 0;  // 0 when inadmissible; this is an outcome, not an error
};

// Measure of the cylinder named by a raw symbol string (offset-independent).
CylinderOutcome cylinder_measure(const ParryMeasure& mu, const TransitionMatrix& m,
                                 const std::vector<int>& symbols);
double cylinder_measure(const ParryMeasure& mu, const Word& w);

// Number of admissible words of length m: sum of entries of M^{m-1}, exact.
BigInt count_words(const TransitionMatrix& m, int length);

// Truncated bi-infinite admissible sequence, window indices -K..K.
struct ShiftPoint {
  std::vector<int> window;  // size 2K+1, symbols 1..N
  int depth = 0;            // K

  int at(int i) const { return window[i + depth]; }
  ShiftPoint shifted(int by) const;  // left shift: (sigma x)_i = x_{i+1}; loses edge symbols
  static ShiftPoint random(const TransitionMatrix& m, const ParryMeasure& mu, int depth, Rng& rng);
};

// Distance value in the shift ultrametric: exactly {0} or {2^{-n}}.
// Stored as an exponent so ultrametric identities can be tested exactly.
struct DyadicDistance {
  bool zero = false;  // windows agree everywhere (true distance <= error bound)
  int exponent = 0;   // d = 2^{-exponent} when !zero
  double error_bound = 0;

  double value() const;
  bool operator==(const DyadicDistance& o) const = default;
};

DyadicDistance word_metric(const ShiftPoint& x, const ShiftPoint& y);

// Lexicographic enumeration of admissible words of given length. The callback
// form streams words without materializing the list.
void enumerate_admissible(const TransitionMatrix& m, int length,
                          const std::function<void(const std::vector<int>&)>& emit);
std::vector<Word> enumerate_admissible(const TransitionMatrix& m, int length, int offset);

}  // namespace smalelab::symdyn

#endif
