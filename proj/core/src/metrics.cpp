#include "canopy/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <sstream>
#include <stdexcept>
#include <tuple>

#include "canopy/textio.hpp"

namespace canopy {

FitReport fit(std::vector<PairedSample> pairs, ResidualMode residuals) {
  if (pairs.size() < 3) throw std::invalid_argument("fit needs at least 3 samples");
  std::sort(pairs.begin(), pairs.end(), [](const PairedSample& a, const PairedSample& b) {
    return std::tie(a.measured, a.modelled, a.x, a.y, a.dataset) <
           std::tie(b.measured, b.modelled, b.x, b.y, b.dataset);
  });
  const double n = static_cast<double>(pairs.size());
  double mx = 0.0, my = 0.0;
  for (const auto& p : pairs) {
    mx += p.measured;
    my += p.modelled;
  }
  mx /= n;
  my /= n;
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (const auto& p : pairs) {
    const double dx = p.measured - mx;
    const double dy = p.modelled - my;
    sxx += dx * dx;
    sxy += dx * dy;
    syy += dy * dy;
  }
  if (!(sxx > 0.0)) throw std::invalid_argument("measured values have no variance");

  FitReport r;
  r.n = pairs.size();
  r.residuals = residuals;
  r.slope = sxy / sxx;
  r.intercept = my - r.slope * mx;
  double ss_res = 0.0, ss_identity = 0.0;
  for (const auto& p : pairs) {
    const double e = p.modelled - (r.slope * p.measured + r.intercept);
    ss_res += e * e;
    const double d = p.modelled - p.measured;
    ss_identity += d * d;
  }
  r.r_squared = syy > 0.0 ? std::clamp(1.0 - ss_res / syy, 0.0, 1.0) : 1.0;
  r.rmse_vertical = std::sqrt(ss_res / n);
  r.rmse_perpendicular = std::sqrt(ss_res / (1.0 + r.slope * r.slope) / n);
  r.rmse_identity = std::sqrt(ss_identity / n);
  r.rmse = residuals == ResidualMode::perpendicular ? r.rmse_perpendicular : r.rmse_vertical;
  return r;
}

std::string FitReport::to_record() const {
  std::string out;
  const auto put = [&](const char* key, double v) { out += std::string(key) + '=' + textio::format_double(v) + '\n'; };
  put("m", slope);
  put("intercept", intercept);
  put("r2", r_squared);
  put("rmse", rmse);
  put("rmse_perpendicular", rmse_perpendicular);
  put("rmse_vertical", rmse_vertical);
  put("rmse_identity", rmse_identity);
  out += "n=" + std::to_string(n) + '\n';
  out += std::string("residuals=") + (residuals == ResidualMode::perpendicular ? "perpendicular" : "vertical") + '\n';
  return out;
}

FitReport FitReport::from_record(const std::string& text) {
  FitReport r;
  std::istringstream in(text);
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto trimmed = textio::trim(line);
    if (trimmed.empty()) continue;
    const auto eq = trimmed.find('=');
    if (eq == std::string_view::npos) throw std::invalid_argument("fit record line without '='");
    const auto key = trimmed.substr(0, eq);
    const auto value = trimmed.substr(eq + 1);
    if (key == "m") r.slope = textio::parse_double(value, lineno);
    else if (key == "intercept") r.intercept = textio::parse_double(value, lineno);
    else if (key == "r2") r.r_squared = textio::parse_double(value, lineno);
    else if (key == "rmse") r.rmse = textio::parse_double(value, lineno);
    else if (key == "rmse_perpendicular") r.rmse_perpendicular = textio::parse_double(value, lineno);
    else if (key == "rmse_vertical") r.rmse_vertical = textio::parse_double(value, lineno);
    else if (key == "rmse_identity") r.rmse_identity = textio::parse_double(value, lineno);
    else if (key == "n") r.n = static_cast<std::size_t>(textio::parse_int(value, lineno));
    else if (key == "residuals") r.residuals = value == "vertical" ? ResidualMode::vertical : ResidualMode::perpendicular;
  }
  return r;
}

std::vector<PairedSample> window_average(const std::vector<PairedSample>& pairs, double window) {
  if (!(window > 0.0)) throw std::invalid_argument("window must be positive");
  const double half = window / 2.0 + 1e-9;
  std::vector<PairedSample> out = pairs;
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    double measured = 0.0, modelled = 0.0;
    std::size_t count = 0;
    for (const auto& q : pairs) {
      if (q.dataset != pairs[i].dataset || q.survey != pairs[i].survey) continue;
      if (std::abs(q.x - pairs[i].x) > half || std::abs(q.y - pairs[i].y) > half) continue;
      measured += q.measured;
      modelled += q.modelled;
      ++count;
    }
    out[i].measured = measured / static_cast<double>(count);
    out[i].modelled = modelled / static_cast<double>(count);
  }
  return out;
}

}  // namespace canopy
