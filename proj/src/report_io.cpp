#include "coalsens/report_io.hpp"

#include <cmath>
#include <cstdio>
#include <stdexcept>

namespace coalsens {

std::string format_double(double value) {
  if (!std::isfinite(value)) return "null";
  char buffer[40];
  std::snprintf(buffer, sizeof(buffer), "%.17g", value);
  return buffer;
}

namespace {

std::string json_escape(const std::string& s) {
  std::string out;
  out.reserve(s.size() + 2);
  out += '"';
  for (char c : s) {
    switch (c) {
      case '"': out += "\\\""; break;
      case '\\': out += "\\\\"; break;
      case '\n': out += "\\n"; break;
      case '\t': out += "\\t"; break;
      case '\r': out += "\\r"; break;
      default:
        if (static_cast<unsigned char>(c) < 0x20) {
          char buf[8];
          std::snprintf(buf, sizeof(buf), "\\u%04x", c);
          out += buf;
        } else {
          out += c;
        }
    }
  }
  out += '"';
  return out;
}

/// A ring value as JSON: a bare number for scalars, a full (unpacked) square
/// array of arrays for matrices.
std::string ring_value_json(const RingValue& v) {
  if (v.is_scalar()) return format_double(v.scalar());
  const SymMatrix& m = v.matrix();
  std::string out = "[";
  for (int i = 0; i < m.size(); ++i) {
    if (i) out += ",";
    out += "[";
    for (int j = 0; j < m.size(); ++j) {
      if (j) out += ",";
      out += format_double(m(i, j));
    }
    out += "]";
  }
  return out + "]";
}

std::string table_values_json(const SetFunctionTable& table) {
  std::string out = "[";
  for (SubsetMask a = 0; a < table.size(); ++a) {
    if (a) out += ",";
    out += ring_value_json(table.get(a));
  }
  return out + "]";
}

std::string fractional_status(const FractionalFlag& flag) {
  switch (flag.status) {
    case FractionalFlag::Status::Holds: return "holds";
    case FractionalFlag::Status::Violated: return "violated";
    case FractionalFlag::Status::NotApplicable: return "not_applicable";
  }
  throw std::logic_error("unreachable");
}

std::string dk_status(DkCheck::Status status) {
  switch (status) {
    case DkCheck::Status::Accepted: return "accepted";
    case DkCheck::Status::ZeroDiagonal: return "zero_diagonal";
    case DkCheck::Status::MixedDiagonalSigns: return "mixed_diagonal_signs";
    case DkCheck::Status::Indefinite: return "indefinite";
  }
  throw std::logic_error("unreachable");
}

/// CSV cell for a subset: always quoted so the comma-separated index list
/// ("1,3") survives as one field.
std::string subset_cell(SubsetMask a) {
  return '"' + subsets::to_index_list(a) + '"';
}

}  // namespace

std::string report_to_json(const DecompositionReport& report) {
  const std::size_t n = report.phi.size();
  std::string out;
  out.reserve(4096);

  out += "{\n  \"meta\": {\n";
  out += "    \"schema\": \"coalsens-report-v1\",\n";
  out += "    \"model\": " + json_escape(report.meta.model) + ",\n";
  out += "    \"inputs\": " + json_escape(report.meta.inputs) + ",\n";
  out += "    \"qoi\": " + json_escape(report.meta.qoi) + ",\n";
  out += "    \"d\": " + std::to_string(report.d) + ",\n";
  out += "    \"output_dim\": " + std::to_string(report.k) + ",\n";
  out += "    \"budget\": {\"n_outer\": " + std::to_string(report.meta.budget.n_outer) +
         ", \"n_inner\": " + std::to_string(report.meta.budget.n_inner) +
         ", \"n_ref\": " + std::to_string(report.meta.budget.n_ref) +
         ", \"seed\": " + std::to_string(report.meta.budget.seed) + "},\n";
  if (report.meta.bandwidth)
    out += "    \"bandwidth\": " + format_double(*report.meta.bandwidth) + ",\n";
  out += "    \"subsets\": [";
  for (SubsetMask a = 0; a < n; ++a) {
    if (a) out += ",";
    out += json_escape(subsets::to_index_list(a));
  }
  out += "]\n  },\n";

  out += "  \"phi\": {\n    \"values\": " + table_values_json(report.phi) +
         ",\n    \"std_errors\": " + table_values_json(report.phi_std_errors) + "\n  },\n";
  out += "  \"psi\": {\n    \"values\": " + table_values_json(report.psi) +
         ",\n    \"std_errors\": " + table_values_json(report.psi_std_errors) + "\n  },\n";

  if (report.ratios.empty()) {
    out += "  \"ratios\": null,\n";
  } else {
    out += "  \"ratios\": [";
    for (std::size_t i = 0; i < report.ratios.size(); ++i) {
      if (i) out += ",";
      out += format_double(report.ratios[i]);
    }
    out += "],\n";
  }

  out += "  \"diagnostics\": {\n";
  out += "    \"total\": " + ring_value_json(report.total) + ",\n";
  out += "    \"total_std_error\": " + ring_value_json(report.total_se) + ",\n";
  out += "    \"sum_residual\": " + ring_value_json(report.sum_residual) + ",\n";
  out += std::string("    \"degenerate\": ") + (report.degenerate ? "true" : "false") + ",\n";
  out += "    \"fractional\": {\"status\": \"" + fractional_status(report.fractional) +
         "\", \"violations\": [";
  for (std::size_t i = 0; i < report.fractional.violations.size(); ++i) {
    if (i) out += ",";
    out += json_escape(subsets::to_index_list(report.fractional.violations[i]));
  }
  out += "]},\n";
  out += "    \"gradual\": {\"certified\": " +
         std::string(report.gradual.certified ? "true" : "false") +
         ", \"f_A\": " + json_escape(report.gradual.f_a) + "},\n";
  if (report.dk_membership) {
    const DkCheck& dk = *report.dk_membership;
    out += "    \"dk_membership\": {\"status\": \"" + dk_status(dk.status) +
           "\", \"diag_sign\": " + std::to_string(dk.diag_sign) +
           ", \"min_eigenvalue\": " + format_double(dk.min_eigenvalue) +
           ", \"max_eigenvalue\": " + format_double(dk.max_eigenvalue) + "}\n";
  } else {
    out += "    \"dk_membership\": null\n";
  }
  out += "  }";

  if (report.attribution) {
    out += ",\n  \"attribution\": {\"method\": " + json_escape(report.attribution->method) +
           ", \"values\": [";
    for (std::size_t i = 0; i < report.attribution->values.size(); ++i) {
      if (i) out += ",";
      out += format_double(report.attribution->values[i]);
    }
    out += "]}";
  }
  out += "\n}\n";
  return out;
}

std::string report_to_csv(const DecompositionReport& report) {
  const std::size_t n = report.phi.size();
  std::string out;

  if (report.phi.is_scalar()) {
    out = "subset,size,phi,phi_se,psi,psi_se,ratio\n";
    for (SubsetMask a = 0; a < n; ++a) {
      out += subset_cell(a) + ',' + std::to_string(subsets::cardinality(a));
      out += ',' + format_double(report.phi.get_channel(a, 0));
      out += ',' + format_double(report.phi_std_errors.get_channel(a, 0));
      out += ',' + format_double(report.psi.get_channel(a, 0));
      out += ',' + format_double(report.psi_std_errors.get_channel(a, 0));
      out += ',';
      if (!report.ratios.empty()) out += format_double(report.ratios[a]);
      out += '\n';
    }
    return out;
  }

  const int k = report.phi.matrix_size();
  out = "subset,size";
  for (int p = 0; p < k; ++p)
    for (int q = p; q < k; ++q) {
      const std::string tag = std::to_string(p + 1) + "_" + std::to_string(q + 1);
      out += ",phi_" + tag + ",phi_se_" + tag + ",psi_" + tag + ",psi_se_" + tag;
    }
  out += '\n';
  for (SubsetMask a = 0; a < n; ++a) {
    out += subset_cell(a) + ',' + std::to_string(subsets::cardinality(a));
    std::size_t channel = 0;
    for (int p = 0; p < k; ++p)
      for (int q = p; q < k; ++q, ++channel) {
        out += ',' + format_double(report.phi.get_channel(a, channel));
        out += ',' + format_double(report.phi_std_errors.get_channel(a, channel));
        out += ',' + format_double(report.psi.get_channel(a, channel));
        out += ',' + format_double(report.psi_std_errors.get_channel(a, channel));
      }
    out += '\n';
  }
  return out;
}

std::string attribution_to_csv(const DecompositionReport& report) {
  if (!report.attribution)
    throw std::logic_error("report carries no attribution vector");
  std::string out = "input,shapley\n";
  for (std::size_t i = 0; i < report.attribution->values.size(); ++i)
    out += std::to_string(i + 1) + ',' + format_double(report.attribution->values[i]) + '\n';
  return out;
}

}  // namespace coalsens
