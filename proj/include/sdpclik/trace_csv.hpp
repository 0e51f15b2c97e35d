#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "sdpclik/sim.hpp"

namespace sdpclik {

struct CsvOptions {
  /// When false the solve_time_s column is written as 0 so reruns are
  /// byte-identical.
  bool timing = true;
};

/// Column names: t, q_1..q_dof, qd_1..qd_dof, err_norm_1..err_norm_h,
/// lambda_1..lambda_n, beta, gamma, stab_margin, lyapunov, solver_status,
/// solve_time_s.
std::vector<std::string> trace_columns(int dof, int h, int n);

/// Header plus one row per record. Numbers use 17 significant digits;
/// solver_status is one of optimal, infeasible, max_iterations,
/// numerical_failure (gains reused from the previous step) or fixed.
void write_trace_csv(std::ostream& os, const SimTrace& trace, const CsvOptions& opts = {});
void write_trace_csv(const std::filesystem::path& path, const SimTrace& trace,
                     const CsvOptions& opts = {});

/// Python/matplotlib script plotting the standard figures from a trace CSV.
std::string plot_script(const std::string& csv_path, int dof, int h, int n);

}  // namespace sdpclik
