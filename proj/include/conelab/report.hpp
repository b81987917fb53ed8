#pragma once

#include "conelab/types.hpp"

#include <string>
#include <vector>

namespace conelab {

// One verification record. Upper-bound rows pass when residual <= tolerance,
// lower-bound rows (negative controls) when residual >= tolerance.
struct ReportRow {
  std::string check;
  std::string point;
  double h = 0.0;
  double residual = 0.0;
  double tolerance = 0.0;
  bool pass = false;
  bool lower_bound = false;
};

struct VerificationReport {
  std::string name;
  std::vector<ReportRow> rows;

  ReportRow& add(std::string check, std::string point, double h, double residual, double tolerance,
                 bool lower_bound = false);
  // Row whose pass flag is decided by the caller.
  ReportRow& add_flag(std::string check, std::string point, double h, double residual,
                      double tolerance, bool pass);
  void append(const VerificationReport& other);
  bool pass() const;
  std::size_t failures() const;
  double max_residual(const std::string& check = {}) const;
  // Re-evaluate upper-bound rows with tolerances multiplied by `scale`.
  void scale_tolerances(double scale);
};

struct ChainRow {
  std::string link;
  double lhs = 0.0;
  double rhs = 0.0;
  double slack = 0.0;  // rhs - lhs
  double tolerance = 0.0;
  bool pass = false;
  bool equality = false;  // whether the link was expected to be tight
};

struct ChainReport {
  std::string name;
  std::vector<ChainRow> rows;
  bool pass() const;
};

std::string format_double(double x);
std::string format_point(const Vec& x);

std::string to_csv(const VerificationReport& report);
std::string to_csv(const ChainReport& report);

}  // namespace conelab
