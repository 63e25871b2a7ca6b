#include "smalelab/symdyn.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

namespace smalelab::symdyn {

TransitionMatrix::TransitionMatrix(int n, std::vector<uint8_t> entries)
    : n_(n), entries_(std::move(entries)) {
  if (n <= 0 || entries_.size() != static_cast<size_t>(n) * n)
    throw config_error("transition matrix must be square");
  for (auto& e : entries_)
    if (e > 1) throw config_error("transition matrix entries must be 0/1");
  for (int i = 0; i < n_; ++i) {
    bool row = false, col = false;
    for (int j = 0; j < n_; ++j) {
      row |= at(i, j);
      col |= at(j, i);
    }
    if (!row) throw zero_row_or_column("symbol " + std::to_string(i + 1) + " has no successor");
    if (!col) throw zero_row_or_column("symbol " + std::to_string(i + 1) + " has no predecessor");
  }
}

TransitionMatrix TransitionMatrix::full_shift(int n) {
  return TransitionMatrix(n, std::vector<uint8_t>(static_cast<size_t>(n) * n, 1));
}

TransitionMatrix TransitionMatrix::golden_mean() {
  return TransitionMatrix(2, {1, 1, 1, 0});
}

TransitionMatrix TransitionMatrix::from_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw config_error("cannot open matrix file " + path);
  int n = 0;
  in >> n;
  if (n <= 0 || n > 4096) throw config_error("bad matrix size in " + path);
  std::vector<uint8_t> e(static_cast<size_t>(n) * n);
  for (auto& x : e) {
    int v = -1;
    in >> v;
    if (v != 0 && v != 1) throw config_error("matrix entries must be 0/1 in " + path);
    x = static_cast<uint8_t>(v);
  }
  return TransitionMatrix(n, std::move(e));
}

namespace {

// boolean matrix product, used for irreducibility/primitivity witnesses
std::vector<uint8_t> bool_mul(const std::vector<uint8_t>& a, const std::vector<uint8_t>& b, int n) {
  std::vector<uint8_t> c(static_cast<size_t>(n) * n, 0);
  for (int i = 0; i < n; ++i)
    for (int k = 0; k < n; ++k)
      if (a[i * n + k])
        for (int j = 0; j < n; ++j) c[i * n + j] |= b[k * n + j];
  return c;
}

bool all_positive(const std::vector<uint8_t>& a) {
  return std::all_of(a.begin(), a.end(), [](uint8_t x) { return x != 0; });
}

}  // namespace

MatrixClassification validate_matrix(const TransitionMatrix& m) {
  const int n = m.size();
  MatrixClassification out;

  // irreducible: reachability i -> j for all pairs
  std::vector<uint8_t> reach = m.entries();
  std::vector<uint8_t> power = m.entries();
  for (int step = 1; step < n; ++step) {
    power = bool_mul(power, m.entries(), n);
    for (size_t k = 0; k < reach.size(); ++k) reach[k] |= power[k];
  }
  out.irreducible = all_positive(reach);

  // primitive: some M^p > 0 with p <= (n-1)^2 + 1 (Wielandt bound)
  const int pmax = (n - 1) * (n - 1) + 1;
  std::vector<uint8_t> q = m.entries();
  for (int p = 1; p <= pmax; ++p) {
    if (all_positive(q)) {
      out.primitive = true;
      out.witness_power = p;
      break;
    }
    q = bool_mul(q, m.entries(), n);
  }
  return out;
}

PerronData perron(const TransitionMatrix& m, double tol, int max_iter) {
  if (tol <= 0) throw config_error("perron tolerance must be positive");
  auto cls = validate_matrix(m);
  if (!cls.primitive) throw not_primitive("matrix has no positive power");
  const int n = m.size();

  auto iterate = [&](bool transpose) {
    std::vector<double> x(n, 1.0), y(n, 0.0);
    double lambda = 0;
    for (int it = 0; it < max_iter; ++it) {
      std::fill(y.begin(), y.end(), 0.0);
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
          if (transpose ? m.at(j, i) : m.at(i, j)) y[i] += x[j];
      double norm = *std::max_element(y.begin(), y.end());
      for (auto& v : y) v /= norm;
      // Rayleigh-quotient estimate and residual in the sup norm
      double num = 0, den = 0;
      for (int i = 0; i < n; ++i) {
        num += y[i] * x[i];
        den += x[i] * x[i];
      }
      lambda = norm * num / den;
      double resid = 0;
      for (int i = 0; i < n; ++i) resid = std::max(resid, std::abs(norm * y[i] - lambda * x[i]));
      x = y;
      if (resid <= tol * lambda) {
        return std::pair<std::vector<double>, double>{x, lambda};
      }
    }
    throw no_convergence("power iteration did not reach tolerance");
  };

  auto [u, lambda_u] = iterate(false);
  auto [v, lambda_v] = iterate(true);
  (void)lambda_v;

  // normalize: sum v_i u_i = 1
  double s = 0;
  for (int i = 0; i < n; ++i) s += u[i] * v[i];
  for (auto& x : v) x /= s;

  PerronData out;
  out.lambda = lambda_u;
  out.u = std::move(u);
  out.v = std::move(v);
  double resid = 0, umax = 0;
  for (int i = 0; i < n; ++i) {
    double mu = 0;
    for (int j = 0; j < n; ++j)
      if (m.at(i, j)) mu += out.u[j];
    resid = std::max(resid, std::abs(mu - out.lambda * out.u[i]));
    umax = std::max(umax, out.u[i]);
  }
  out.residual = resid / umax;
  return out;
}

double entropy(const TransitionMatrix& m) { return std::log(perron(m).lambda); }

std::string Word::str() const {
  std::ostringstream os;
  for (size_t i = 0; i < symbols.size(); ++i) {
    if (i) os << ',';
    os << symbols[i];
  }
  os << '@' << offset;
  return os.str();
}

std::optional<Word> Word::make(const TransitionMatrix& m, std::vector<int> symbols, int offset) {
  if (symbols.empty()) return std::nullopt;
  for (int s : symbols)
    if (s < 1 || s > m.size()) return std::nullopt;
  for (size_t i = 0; i + 1 < symbols.size(); ++i)
    if (!m.allows(symbols[i], symbols[i + 1])) return std::nullopt;
  return Word{std::move(symbols), offset};
}

std::optional<Word> Word::parse(const TransitionMatrix& m, const std::string& text) {
  auto at = text.find('@');
  if (at == std::string::npos) return std::nullopt;
  std::vector<int> syms;
  std::stringstream body(text.substr(0, at));
  std::string tok;
  while (std::getline(body, tok, ',')) {
    try {
      syms.push_back(std::stoi(tok));
    } catch (...) {
      return std::nullopt;
    }
  }
  int offset = 0;
  try {
    offset = std::stoi(text.substr(at + 1));
  } catch (...) {
    return std::nullopt;
  }
  return make(m, std::move(syms), offset);
}

double ParryMeasure::cylinder_bound() const {
  double lo = std::numeric_limits<double>::infinity(), hi = 0;
  for (double vi : v)
    for (double uj : u) {
      double val = vi * uj * lambda * lambda;
      lo = std::min(lo, val);
      hi = std::max(hi, val);
    }
  return std::max(hi, 1.0 / lo);
}

ParryMeasure parry(const TransitionMatrix& m, const PerronData& pd) {
  const int n = m.size();
  ParryMeasure out;
  out.lambda = pd.lambda;
  out.p.resize(n);
  out.P.assign(n, std::vector<double>(n, 0.0));
  for (int i = 0; i < n; ++i) out.p[i] = pd.v[i] * pd.u[i];
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      if (m.at(i, j)) out.P[i][j] = pd.u[j] / (pd.lambda * pd.u[i]);
  out.u = pd.u;
  out.v = pd.v;
  return out;
}

ParryMeasure parry(const TransitionMatrix& m) { return parry(m, perron(m)); }

CylinderOutcome cylinder_measure(const ParryMeasure& mu, const TransitionMatrix& m,
                                 const std::vector<int>& symbols) {
  if (symbols.empty()) return {true, 1.0};
  for (int s : symbols)
    if (s < 1 || s > m.size()) return {false, 0.0};
  for (size_t i = 0; i + 1 < symbols.size(); ++i)
    if (!m.allows(symbols[i], symbols[i + 1])) return {false, 0.0};
  double v = mu.p[symbols[0] - 1];
  for (size_t i = 0; i + 1 < symbols.size(); ++i) v *= mu.P[symbols[i] - 1][symbols[i + 1] - 1];
  return {true, v};
}

double cylinder_measure(const ParryMeasure& mu, const Word& w) {
  double v = mu.p[w.symbols[0] - 1];
  for (size_t i = 0; i + 1 < w.symbols.size(); ++i) v *= mu.P[w.symbols[i] - 1][w.symbols[i + 1] - 1];
  return v;
}

BigInt count_words(const TransitionMatrix& m, int length) {
  if (length < 1) throw config_error("word length must be >= 1");
  const int n = m.size();
  // big-integer matrix power M^{length-1}, then sum of entries
  std::vector<BigInt> acc(static_cast<size_t>(n) * n, 0);
  for (int i = 0; i < n; ++i) acc[i * n + i] = 1;
  std::vector<BigInt> base(static_cast<size_t>(n) * n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) base[i * n + j] = m.at(i, j) ? 1 : 0;
  int e = length - 1;
  auto mul = [n](const std::vector<BigInt>& a, const std::vector<BigInt>& b) {
    std::vector<BigInt> c(static_cast<size_t>(n) * n, 0);
    for (int i = 0; i < n; ++i)
      for (int k = 0; k < n; ++k)
        if (a[i * n + k] != 0)
          for (int j = 0; j < n; ++j) c[i * n + j] += a[i * n + k] * b[k * n + j];
    return c;
  };
  while (e > 0) {
    if (e & 1) acc = mul(acc, base);
    base = mul(base, base);
    e >>= 1;
  }
  BigInt total = 0;
  for (auto& x : acc) total += x;
  return total;
}

ShiftPoint ShiftPoint::shifted(int by) const {
  // keep the same depth; symbols that fall outside are regenerated from the
  // window edge (admissible continuation is the caller's concern for tests)
  ShiftPoint out;
  out.depth = depth - std::abs(by);
  if (out.depth < 0) throw truncation_too_shallow("shift exceeds window");
  out.window.resize(2 * out.depth + 1);
  for (int i = -out.depth; i <= out.depth; ++i) out.window[i + out.depth] = at(i + by);
  return out;
}

ShiftPoint ShiftPoint::random(const TransitionMatrix& m, const ParryMeasure& mu, int depth,
                              Rng& rng) {
  ShiftPoint p;
  p.depth = depth;
  p.window.resize(2 * depth + 1);
  const int n = m.size();
  // stationary start at index -K, then Markov steps under P
  int s = rng.pick_weighted(mu.p.data(), n);
  p.window[0] = s + 1;
  for (int k = 1; k < 2 * depth + 1; ++k) {
    s = rng.pick_weighted(mu.P[s].data(), n);
    p.window[k] = s + 1;
  }
  return p;
}

double DyadicDistance::value() const { return zero ? 0.0 : std::ldexp(1.0, -exponent); }

DyadicDistance word_metric(const ShiftPoint& x, const ShiftPoint& y) {
  const int k = std::min(x.depth, y.depth);
  int agree = 0;  // largest n with x_i = y_i for all |i| < n
  while (agree <= k) {
    if (x.at(agree) != y.at(agree) || x.at(-agree) != y.at(-agree)) break;
    ++agree;
  }
  // d = inf{2^{-n} : agreement for |i| < n} = 2^{-agree}; agree beyond the
  // common window cannot be certified
  if (agree > k) {
    if (x.depth != y.depth)
      throw truncation_too_shallow("agreement extends beyond the shorter window");
    DyadicDistance d;
    d.zero = true;
    d.error_bound = std::ldexp(1.0, -k);
    return d;
  }
  DyadicDistance d;
  d.exponent = agree;
  d.error_bound = 0;
  return d;
}

namespace {

void enum_rec(const TransitionMatrix& m, int length, std::vector<int>& buf,
              const std::function<void(const std::vector<int>&)>& emit) {
  if (static_cast<int>(buf.size()) == length) {
    emit(buf);
    return;
  }
  for (int s = 1; s <= m.size(); ++s) {
    if (!buf.empty() && !m.allows(buf.back(), s)) continue;
    buf.push_back(s);
    enum_rec(m, length, buf, emit);
    buf.pop_back();
  }
}

}  // namespace

void enumerate_admissible(const TransitionMatrix& m, int length,
                          const std::function<void(const std::vector<int>&)>& emit) {
  if (length < 1) throw config_error("word length must be >= 1");
  std::vector<int> buf;
  buf.reserve(length);
  enum_rec(m, length, buf, emit);
}

std::vector<Word> enumerate_admissible(const TransitionMatrix& m, int length, int offset) {
  std::vector<Word> out;
  enumerate_admissible(m, length,
                       [&](const std::vector<int>& w) { out.push_back(Word{w, offset}); });
  return out;
}

}  // namespace smalelab::symdyn
