#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "coalsens/estimators.hpp"
#include "coalsens/input_models.hpp"
#include "coalsens/lattice.hpp"
#include "coalsens/models.hpp"
#include "coalsens/ring.hpp"

namespace coalsens {

struct EngineOptions {
  int threads = 1;  // worker count for the subset map; never affects values
};

/// Outcome of the sign check on the estimated Mobius masses.
struct FractionalFlag {
  enum class Status { Holds, Violated, NotApplicable };

  Status status = Status::NotApplicable;
  std::vector<SubsetMask> violations;  // offending subsets when Violated

  std::string describe() const;
};

/// Structural certificate that each phi_A is the QoI of an E_A-measurable
/// function, established per QoI variant rather than per run.
struct GradualCertificate {
  bool certified = false;
  std::string f_a;  // the registered f_A constructor, empty when uncertified
};

struct AttributionVector {
  std::vector<double> values;  // one share per input, 0-based
  std::string method = "shapley";
};

struct DecompositionMeta {
  std::string model;
  std::string inputs;
  std::string qoi;
  EstimatorBudget budget;
  std::optional<double> bandwidth;  // resolved kernel width, MMD runs only
  int threads = 1;                  // not serialized: reports are thread-agnostic
  double wall_seconds = 0.0;        // not serialized, for the same reason
};

/// Everything a run produces: the phi table, its Mobius inverse psi,
/// propagated standard errors, the share vector and the diagnostics.
struct DecompositionReport {
  int d = 0;
  int k = 1;
  QoISpec qoi;

  SetFunctionTable phi;
  SetFunctionTable phi_std_errors;
  SetFunctionTable psi;
  SetFunctionTable psi_std_errors;  // se(psi_A)^2 = sum_{B subseteq A} se(phi_B)^2

  RingValue total;     // phi_D
  RingValue total_se;
  RingValue sum_residual;  // sum_A psi_A - phi_D, zero up to accumulation error

  bool degenerate = false;       // |phi_D| within 10 std errors of zero
  std::vector<double> ratios;    // psi_A / phi_D; empty unless scalar and non-degenerate
  FractionalFlag fractional;
  GradualCertificate gradual;
  std::optional<DkCheck> dk_membership;         // matrix QoI: check on phi_D
  std::optional<AttributionVector> attribution;  // scalar QoI

  DecompositionMeta meta;
};

/// Estimates phi over all 2^d subsets (parallel map over a derived-seed
/// stream per subset), inverts to psi and fills every diagnostic. Throws
/// std::invalid_argument on an incompatible QoI or d > 24, and
/// std::runtime_error naming the offending subset when an estimator fails.
DecompositionReport decompose(const Model& model, const InputModel& inputs,
                              const QoISpec& qoi, const EstimatorBudget& budget,
                              const EngineOptions& options = {});

/// Sign check of the Lemma's fractional property on estimates: holds iff
/// every psi_A that is distinguishable from zero (|psi_A| > 3 se) shares the
/// sign of phi_D. Zero and within-noise masses count as sign-compatible.
FractionalFlag check_fractional(const SetFunctionTable& psi,
                                const SetFunctionTable& psi_std_errors,
                                double total, bool degenerate);

/// Equal split of each Harsanyi dividend psi_A among its members:
/// Shap_i = sum_{A owning i} psi_A / |A|. The efficiency identity
/// sum_i Shap_i = sum_{A != empty} psi_A holds algebraically.
AttributionVector shapley_attribution(const SetFunctionTable& psi);

GradualCertificate verify_gradual(const QoISpec& qoi);

}  // namespace coalsens
