#ifndef SMALELAB_ERRORS_HPP
#define SMALELAB_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace smalelab {

// Precondition violations carry a stable machine-readable name so the CLI can
// map them to exit codes and report fields.
class PreconditionError : public std::runtime_error {
public:
  PreconditionError(std::string name, const std::string& what)
      : std::runtime_error(name + ": " + what), name_(std::move(name)) {}
  const std::string& name() const { return name_; }

private:
  std::string name_;
};

// Internal consistency failures (a certified invariant did not hold).
class AuditError : public std::runtime_error {
public:
  AuditError(std::string name, const std::string& what)
      : std::runtime_error(name + ": " + what), name_(std::move(name)) {}
  const std::string& name() const { return name_; }

private:
  std::string name_;
};

inline PreconditionError zero_row_or_column(const std::string& w) { return {"ZeroRowOrColumn", w}; }
inline PreconditionError not_primitive(const std::string& w) { return {"NotPrimitive", w}; }
inline PreconditionError no_convergence(const std::string& w) { return {"NoConvergence", w}; }
inline PreconditionError inadmissible_word(const std::string& w) { return {"InadmissibleWord", w}; }
inline PreconditionError truncation_too_shallow(const std::string& w) { return {"TruncationTooShallow", w}; }
inline PreconditionError too_far(const std::string& w) { return {"TooFar", w}; }
inline PreconditionError unknown_vertex(const std::string& w) { return {"UnknownVertex", w}; }
inline PreconditionError not_dynamic_graph(const std::string& w) { return {"NotDynamicGraph", w}; }
inline PreconditionError not_refining(const std::string& w) { return {"NotRefining", w}; }
inline PreconditionError geometry_unavailable(const std::string& w) { return {"GeometryUnavailable", w}; }
inline PreconditionError decay_not_exponential(const std::string& w) { return {"DecayNotExponential", w}; }
inline PreconditionError not_homogeneous(const std::string& w) { return {"NotHomogeneous", w}; }
inline PreconditionError base_too_coarse(const std::string& w) { return {"BaseTooCoarse", w}; }
inline PreconditionError delta_too_large(const std::string& w) { return {"DeltaTooLarge", w}; }
inline PreconditionError not_found(const std::string& w) { return {"NotFound", w}; }
inline PreconditionError depth_exceeded(const std::string& w) { return {"DepthExceeded", w}; }
inline PreconditionError not_semi_conformal(const std::string& w) { return {"NotSemiConformal", w}; }
inline PreconditionError insufficient_scales(const std::string& w) { return {"InsufficientScales", w}; }
inline PreconditionError no_valid_k(const std::string& w) { return {"NoValidK", w}; }
inline PreconditionError config_error(const std::string& w) { return {"ConfigError", w}; }

}  // namespace smalelab

#endif
