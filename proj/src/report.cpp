#include "conelab/report.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

namespace conelab {

ReportRow& VerificationReport::add(std::string check, std::string point, double h, double residual,
                                   double tolerance, bool lower_bound) {
  const bool ok = lower_bound ? residual >= tolerance : residual <= tolerance;
  auto& row = add_flag(std::move(check), std::move(point), h, residual, tolerance, ok);
  row.lower_bound = lower_bound;
  return row;
}

ReportRow& VerificationReport::add_flag(std::string check, std::string point, double h,
                                        double residual, double tolerance, bool pass) {
  ReportRow row;
  row.check = std::move(check);
  row.point = std::move(point);
  row.h = h;
  row.residual = residual;
  row.tolerance = tolerance;
  // NaN never passes.
  row.pass = pass && !std::isnan(residual);
  rows.push_back(std::move(row));
  return rows.back();
}

void VerificationReport::append(const VerificationReport& other) {
  rows.insert(rows.end(), other.rows.begin(), other.rows.end());
}

bool VerificationReport::pass() const {
  return std::all_of(rows.begin(), rows.end(), [](const ReportRow& r) { return r.pass; });
}

std::size_t VerificationReport::failures() const {
  return static_cast<std::size_t>(
      std::count_if(rows.begin(), rows.end(), [](const ReportRow& r) { return !r.pass; }));
}

double VerificationReport::max_residual(const std::string& check) const {
  double m = 0.0;
  for (const auto& r : rows)
    if (check.empty() || r.check == check) m = std::max(m, std::abs(r.residual));
  return m;
}

void VerificationReport::scale_tolerances(double scale) {
  for (auto& r : rows) {
    if (r.lower_bound) continue;
    const bool was_decided_by_bound = (r.residual <= r.tolerance) == r.pass;
    r.tolerance *= scale;
    if (was_decided_by_bound) r.pass = r.residual <= r.tolerance && !std::isnan(r.residual);
  }
}

bool ChainReport::pass() const {
  return std::all_of(rows.begin(), rows.end(), [](const ChainRow& r) { return r.pass; });
}

std::string format_double(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

std::string format_point(const Vec& x) {
  std::string s;
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    if (i) s += ' ';
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.6g", x[i]);
    s += buf;
  }
  return s;
}

std::string to_csv(const VerificationReport& report) {
  std::ostringstream os;
  os << "check,point,h,residual,tolerance,pass\n";
  for (const auto& r : report.rows) {
    os << r.check << ",\"" << r.point << "\"," << format_double(r.h) << ',' << format_double(r.residual)
       << ',' << format_double(r.tolerance) << ',' << (r.pass ? "true" : "false") << '\n';
  }
  return os.str();
}

std::string to_csv(const ChainReport& report) {
  std::ostringstream os;
  os << "link,lhs,rhs,slack,tolerance,pass\n";
  for (const auto& r : report.rows) {
    os << r.link << ',' << format_double(r.lhs) << ',' << format_double(r.rhs) << ','
       << format_double(r.slack) << ',' << format_double(r.tolerance) << ',' << (r.pass ? "true" : "false")
       << '\n';
  }
  return os.str();
}

}  // namespace conelab
