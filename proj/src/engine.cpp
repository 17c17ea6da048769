#include "coalsens/engine.hpp"

#include <atomic>
#include <chrono>
#include <cmath>
#include <mutex>
#include <stdexcept>
#include <thread>

#include "coalsens/rng.hpp"

namespace coalsens {

std::string FractionalFlag::describe() const {
  switch (status) {
    case Status::Holds: return "holds";
    case Status::NotApplicable: return "not_applicable";
    case Status::Violated: {
      std::string out = "violated(";
      for (std::size_t i = 0; i < violations.size(); ++i) {
        if (i) out += "; ";
        out += "{" + subsets::to_index_list(violations[i]) + "}";
      }
      return out + ")";
    }
  }
  throw std::logic_error("unreachable");
}

GradualCertificate verify_gradual(const QoISpec& qoi) {
  switch (qoi.kind) {
    case QoISpec::Kind::Variance:
      return {true, "f_A(x_A) = E[G(X) | X_A = x_A], the conditional mean"};
    case QoISpec::Kind::Covariance:
      return {true,
              "f_A(x_A) = (E[G_p(X) | X_A = x_A], E[G_q(X) | X_A = x_A]), the pair of "
              "conditional means"};
    case QoISpec::Kind::CovarianceMatrix:
      return {true, "f_A(x_A) = E[G(X) | X_A = x_A], the vector of conditional means"};
    case QoISpec::Kind::MeanMMD:
      // No measurable f_A with S^MMD_A = S^MMD(f_A) is known, so only the
      // Mobius (not the gradual) property is claimed.
      return {false, ""};
  }
  throw std::logic_error("unreachable");
}

FractionalFlag check_fractional(const SetFunctionTable& psi,
                                const SetFunctionTable& psi_std_errors,
                                double total, bool degenerate) {
  FractionalFlag flag;
  if (!psi.is_scalar() || degenerate || total == 0.0) {
    flag.status = FractionalFlag::Status::NotApplicable;
    return flag;
  }
  const double total_sign = total > 0.0 ? 1.0 : -1.0;
  for (SubsetMask a = 0; a < psi.size(); ++a) {
    const double value = psi.get_channel(a, 0);
    const double se = psi_std_errors.get_channel(a, 0);
    // Masses within noise of zero are sign-compatible by convention.
    if (std::abs(value) <= 3.0 * se) continue;
    if (value * total_sign < 0.0) flag.violations.push_back(a);
  }
  flag.status = flag.violations.empty() ? FractionalFlag::Status::Holds
                                        : FractionalFlag::Status::Violated;
  return flag;
}

AttributionVector shapley_attribution(const SetFunctionTable& psi) {
  if (!psi.is_scalar())
    throw std::invalid_argument("shapley attribution requires a scalar psi table");
  const int d = psi.dimension();
  AttributionVector shap;
  shap.values.assign(static_cast<std::size_t>(d), 0.0);
  for (SubsetMask a = 1; a < psi.size(); ++a) {
    const double share = psi.get_channel(a, 0) / subsets::cardinality(a);
    for (int i : subsets::member_indices(a)) shap.values[i] += share;
  }
  return shap;
}

namespace {

/// Square root, clamped so accumulated rounding in the variance sums can
/// never produce NaN standard errors.
double safe_sqrt(double x) { return std::sqrt(std::max(x, 0.0)); }

SetFunctionTable make_table(int d, const QoISpec& qoi, int k) {
  return qoi.kind == QoISpec::Kind::CovarianceMatrix ? SetFunctionTable::matrix(d, k)
                                                     : SetFunctionTable::scalar(d);
}

PhiEstimate estimate_subset(const Model& model, const InputModel& inputs,
                            const QoISpec& qoi, const EstimatorBudget& budget,
                            const MmdReference* mmd_ref, SubsetMask a) {
  switch (qoi.kind) {
    case QoISpec::Kind::Variance:
      return estimate_phi_variance(model, inputs, a, budget, qoi.coordinate);
    case QoISpec::Kind::Covariance:
      return estimate_phi_covariance(model, inputs, a, qoi.pair_p, qoi.pair_q, budget);
    case QoISpec::Kind::CovarianceMatrix:
      return estimate_phi_covmatrix(model, inputs, a, budget);
    case QoISpec::Kind::MeanMMD:
      return estimate_phi_mmd(model, inputs, a, *mmd_ref, budget);
  }
  throw std::logic_error("unreachable");
}

}  // namespace

DecompositionReport decompose(const Model& model, const InputModel& inputs,
                              const QoISpec& qoi, const EstimatorBudget& budget,
                              const EngineOptions& options) {
  const auto t_start = std::chrono::steady_clock::now();

  const int d = model.input_dimension();
  const int k = model.output_dimension();
  const SubsetMask full = subsets::full_mask(d);
  if (inputs.dimension() != d)
    throw std::invalid_argument("input model dimension " + std::to_string(inputs.dimension()) +
                                " does not match model input dimension " + std::to_string(d));
  qoi.check_compatible(k);
  budget.validate();

  // The MMD reference sample and its kernel are resolved once and shared
  // read-only by every subset worker.
  std::optional<MmdReference> mmd_ref;
  if (qoi.kind == QoISpec::Kind::MeanMMD)
    mmd_ref = prepare_mmd_reference(model, inputs, qoi.kernel, budget);

  const std::size_t n_subsets = subsets::table_size(d);
  std::vector<PhiEstimate> estimates(n_subsets);

  // Parallel map over subsets. Each subset derives its own seed stream, so
  // the assignment of subsets to workers cannot influence any value.
  const int threads = std::max(1, std::min<int>(options.threads, static_cast<int>(n_subsets)));
  std::atomic<std::size_t> next{0};
  std::mutex error_mutex;
  std::string first_error;

  auto worker = [&]() {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= n_subsets) return;
      try {
        estimates[i] = estimate_subset(model, inputs, qoi, budget,
                                       mmd_ref ? &*mmd_ref : nullptr,
                                       static_cast<SubsetMask>(i));
      } catch (const std::exception& e) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (first_error.empty())
          first_error = "estimation failed for subset {" +
                        subsets::to_index_list(static_cast<SubsetMask>(i)) + "}: " + e.what();
      }
    }
  };
  if (threads == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(threads);
    for (int t = 0; t < threads; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  if (!first_error.empty()) throw std::runtime_error(first_error);

  DecompositionReport report;
  report.d = d;
  report.k = k;
  report.qoi = qoi;
  report.phi = make_table(d, qoi, k);
  report.phi_std_errors = make_table(d, qoi, k);
  for (SubsetMask a = 0; a < n_subsets; ++a) {
    report.phi.set(a, estimates[a].value);
    report.phi_std_errors.set(a, estimates[a].std_error);
  }

  report.psi = mobius_transform(report.phi);

  // Independent noise across subsets: variances add along the zeta transform.
  SetFunctionTable se_sq = make_table(d, qoi, k);
  for (SubsetMask a = 0; a < n_subsets; ++a)
    for (std::size_t c = 0; c < se_sq.channels(); ++c) {
      const double se = report.phi_std_errors.get_channel(a, c);
      se_sq.set_channel(a, c, se * se);
    }
  SetFunctionTable psi_var = zeta_transform(se_sq);
  report.psi_std_errors = make_table(d, qoi, k);
  for (SubsetMask a = 0; a < n_subsets; ++a)
    for (std::size_t c = 0; c < psi_var.channels(); ++c)
      report.psi_std_errors.set_channel(a, c, safe_sqrt(psi_var.get_channel(a, c)));

  report.total = report.phi.get(full);
  report.total_se = report.phi_std_errors.get(full);

  RingValue psi_sum = report.total.zero_like();
  for (SubsetMask a = 0; a < n_subsets; ++a) psi_sum = ring_add(psi_sum, report.psi.get(a));
  report.sum_residual = ring_add(psi_sum, ring_scale(report.total, -1.0));

  if (qoi.scalar_valued()) {
    const double total = report.total.scalar();
    const double total_se = report.total_se.scalar();
    report.degenerate = std::abs(total) <= 10.0 * total_se;
    if (!report.degenerate) {
      report.ratios.resize(n_subsets);
      for (SubsetMask a = 0; a < n_subsets; ++a)
        report.ratios[a] = report.psi.get_channel(a, 0) / total;
    }
    report.fractional =
        check_fractional(report.psi, report.psi_std_errors, total, report.degenerate);
    report.attribution = shapley_attribution(report.psi);
  } else {
    report.fractional.status = FractionalFlag::Status::NotApplicable;
    report.dk_membership = check_dk_membership(report.total.matrix());
  }
  report.gradual = verify_gradual(qoi);

  report.meta.model = model.name();
  report.meta.inputs = inputs.describe();
  report.meta.qoi = qoi.name();
  report.meta.budget = budget;
  if (mmd_ref) report.meta.bandwidth = mmd_ref->bandwidth;
  report.meta.threads = threads;
  report.meta.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start).count();
  return report;
}

}  // namespace coalsens
