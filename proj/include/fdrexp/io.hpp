#pragma once

// Serialization: JSON for mixtures and results, CSV for batches, curves and
// scans. Numbers are written with std::to_chars at 12 significant digits,
// which is locale independent.

#include <charconv>
#include <chrono>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <ctime>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

#include "fdrexp/envelope.hpp"
#include "fdrexp/errors.hpp"
#include "fdrexp/fdr.hpp"
#include "fdrexp/mc.hpp"
#include "fdrexp/mixtures.hpp"
#include "fdrexp/risk.hpp"
#include "fdrexp/rng.hpp"

namespace fdrexp {

inline constexpr std::string_view kLibraryVersion = "1.0.0";

using Json = nlohmann::ordered_json;

namespace io {

inline std::string format_number(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::general, 12);
  return {buf, res.ptr};
}

/// Numbers pass through the 12-digit formatter so JSON and CSV agree.
inline Json number(double v) {
  if (!std::isfinite(v)) return format_number(v);
  return Json::parse(format_number(v));
}

inline double parse_number(std::string_view text) {
  while (!text.empty() && (text.front() == ' ' || text.front() == '\t')) text.remove_prefix(1);
  while (!text.empty() && (text.back() == ' ' || text.back() == '\t' || text.back() == '\r')) {
    text.remove_suffix(1);
  }
  double v = 0.0;
  const auto res = std::from_chars(text.data(), text.data() + text.size(), v);
  if (text.empty() || res.ec != std::errc() || res.ptr != text.data() + text.size()) {
    throw InputError("not a number: '" + std::string(text) + "'");
  }
  return v;
}

inline std::vector<std::string_view> split_fields(std::string_view line) {
  std::vector<std::string_view> fields;
  std::size_t start = 0;
  while (true) {
    const auto comma = line.find(',', start);
    fields.push_back(line.substr(start, comma == std::string_view::npos ? line.npos : comma - start));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return fields;
}

inline Json to_json(const MixingDistribution& f) {
  Json support = Json::array(), weights = Json::array();
  for (double mu : f.support()) support.push_back(number(mu));
  for (double w : f.weights()) weights.push_back(number(w));
  return {{"support", support}, {"weights", weights}};
}

inline MixingDistribution mixture_from_json(const Json& j) {
  if (!j.is_object() || !j.contains("support") || !j.contains("weights")) {
    throw InputError("mixture JSON needs \"support\" and \"weights\" arrays");
  }
  try {
    return {j.at("support").get<std::vector<double>>(), j.at("weights").get<std::vector<double>>()};
  } catch (const Json::exception& e) {
    throw InputError(std::string("mixture JSON: ") + e.what());
  }
}

inline Json to_json(const Threshold& t) {
  return t.is_finite() ? number(t.value()) : Json("inf");
}

inline Json to_json(const ThresholdResult& r) {
  return {{"k_fdr", r.k_fdr},
          {"threshold", to_json(r.threshold)},
          {"capped", r.capped},
          {"discoveries", r.discoveries}};
}

inline Json to_json(const RiskBreakdown& r) {
  return {{"bias", number(r.bias)}, {"variance", number(r.variance)}, {"total", number(r.total)}};
}

inline Json to_json(const EnvelopeResult& r) {
  Json j{{"regime", std::string(to_string(r.regime))},
         {"value", number(r.value)},
         {"mu_star", number(r.mu_star)}};
  j["mu_lower"] = r.mu_lower ? number(*r.mu_lower) : Json(nullptr);
  j["slope"] = number(r.slope);
  j["attaining"] = to_json(r.attaining);
  return j;
}

/// Reads a CSV with an `x` column and optional `mu` column.
inline SampleBatch read_batch_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw InputError("sample CSV is empty");
  const auto header = split_fields(line);
  std::ptrdiff_t x_col = -1, mu_col = -1;
  for (std::size_t c = 0; c < header.size(); ++c) {
    std::string_view name = header[c];
    while (!name.empty() && (name.back() == '\r' || name.back() == ' ')) name.remove_suffix(1);
    if (name == "x") x_col = static_cast<std::ptrdiff_t>(c);
    if (name == "mu") mu_col = static_cast<std::ptrdiff_t>(c);
  }
  if (x_col < 0) throw InputError("sample CSV: missing column 'x'");

  SampleBatch batch;
  std::size_t row = 1;
  while (std::getline(in, line)) {
    ++row;
    if (line.empty() || line == "\r") continue;
    const auto fields = split_fields(line);
    if (fields.size() != header.size()) {
      throw InputError("sample CSV: row " + std::to_string(row) + " has the wrong field count");
    }
    try {
      batch.x.push_back(parse_number(fields[static_cast<std::size_t>(x_col)]));
      if (mu_col >= 0) batch.mu.push_back(parse_number(fields[static_cast<std::size_t>(mu_col)]));
    } catch (const InputError& e) {
      throw InputError("sample CSV: row " + std::to_string(row) + ": " + e.what());
    }
  }
  if (batch.x.empty()) throw InputError("sample CSV has no data rows");
  try {
    batch.validate();
  } catch (const DomainError& e) {
    throw InputError(e.what());
  }
  return batch;
}

inline void write_batch_csv(std::ostream& out, const SampleBatch& batch) {
  out << "x,mu\n";
  for (std::size_t i = 0; i < batch.size(); ++i) {
    out << format_number(batch.x[i]) << ',' << format_number(batch.mu[i]) << '\n';
  }
}

inline void write_curve_csv(std::ostream& out, const std::vector<CurvePoint>& curve) {
  out << "q,mu,eps,mean_loss,se_loss,mean_fdp,reps,n,seed\n";
  for (const auto& c : curve) {
    out << format_number(c.q) << ',' << format_number(c.mu) << ',' << format_number(c.eps) << ','
        << format_number(c.mean_loss) << ',' << format_number(c.se_loss) << ','
        << format_number(c.mean_fdp) << ',' << c.reps << ',' << c.n << ',' << c.seed << '\n';
  }
}

inline void write_convergence_csv(std::ostream& out, const ConvergenceResult& result) {
  out << "n,median_abs_dev,reps,seed,slope_overall\n";
  for (const auto& row : result.rows) {
    out << row.n << ',' << format_number(row.median_abs_dev) << ',' << row.reps << ',' << row.seed
        << ',' << format_number(result.slope) << '\n';
  }
}

inline void write_scan_csv(std::ostream& out, const RiskScan& scan) {
  out << "mu,eps,threshold,bias,variance,total\n";
  for (const auto& p : scan.curve) {
    out << format_number(p.mu) << ',' << format_number(p.eps) << ',' << format_number(p.threshold)
        << ',' << format_number(p.risk.bias) << ',' << format_number(p.risk.variance) << ','
        << format_number(p.risk.total) << '\n';
  }
}

inline std::string utc_timestamp(std::chrono::system_clock::time_point tp) {
  const std::time_t t = std::chrono::system_clock::to_time_t(tp);
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

struct RunManifest {
  std::string command_line;
  Json parameters = Json::object();
  std::uint64_t seed = 0;
  std::string started;
  std::string finished;
  std::vector<std::string> outputs;

  Json to_json() const {
    return {{"command_line", command_line},
            {"parameters", parameters},
            {"seed", seed},
            {"generator", std::string(kGeneratorName)},
            {"library_version", std::string(kLibraryVersion)},
            {"started", started},
            {"finished", finished},
            {"outputs", outputs}};
  }
};

}  // namespace io
}  // namespace fdrexp
