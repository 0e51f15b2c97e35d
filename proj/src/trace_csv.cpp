#include "sdpclik/trace_csv.hpp"

#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <ostream>
#include <sstream>

#include "sdpclik/errors.hpp"

namespace sdpclik {

namespace {

void put(std::ostream& os, double v) {
  if (std::isnan(v)) {
    os << "nan";
  } else if (std::isinf(v)) {
    os << (v > 0 ? "inf" : "-inf");
  } else {
    os << v;
  }
}

}  // namespace

std::vector<std::string> trace_columns(int dof, int h, int n) {
  std::vector<std::string> cols{"t"};
  for (int j = 1; j <= dof; ++j) cols.push_back("q_" + std::to_string(j));
  for (int j = 1; j <= dof; ++j) cols.push_back("qd_" + std::to_string(j));
  for (int i = 1; i <= h; ++i) cols.push_back("err_norm_" + std::to_string(i));
  for (int l = 1; l <= n; ++l) cols.push_back("lambda_" + std::to_string(l));
  for (const char* c : {"beta", "gamma", "stab_margin", "lyapunov", "solver_status", "solve_time_s"}) {
    cols.emplace_back(c);
  }
  return cols;
}

void write_trace_csv(std::ostream& os, const SimTrace& trace, const CsvOptions& opts) {
  const auto cols = trace_columns(trace.dof, trace.h, trace.n);
  for (std::size_t c = 0; c < cols.size(); ++c) os << (c ? "," : "") << cols[c];
  os << '\n';

  std::ostringstream row;
  row.imbue(std::locale::classic());
  row << std::setprecision(std::numeric_limits<double>::max_digits10);
  for (const auto& r : trace.records) {
    row.str("");
    put(row, r.t);
    for (double v : r.q) row << ',', put(row, v);
    for (double v : r.qd) row << ',', put(row, v);
    for (double v : r.err_norms) row << ',', put(row, v);
    for (double v : r.lambda) row << ',', put(row, v);
    row << ',', put(row, r.beta);
    row << ',', put(row, r.gamma);
    row << ',', put(row, r.margin);
    row << ',', put(row, r.lyapunov);
    row << ',' << (r.solver_status ? to_string(*r.solver_status) : std::string_view("fixed"));
    row << ',', put(row, opts.timing ? r.solve_time : 0.0);
    os << row.str() << '\n';
  }
}

void write_trace_csv(const std::filesystem::path& path, const SimTrace& trace, const CsvOptions& opts) {
  std::ofstream out(path);
  if (!out) throw ConfigError("", "cannot write '" + path.string() + "'");
  write_trace_csv(out, trace, opts);
  if (!out) throw ConfigError("", "write failed for '" + path.string() + "'");
}

std::string plot_script(const std::string& csv_path, int dof, int h, int n) {
  std::ostringstream s;
  s << "import sys\n"
       "import pandas as pd\n"
       "import matplotlib\n"
       "matplotlib.use('Agg')\n"
       "import matplotlib.pyplot as plt\n\n"
    << "csv = sys.argv[1] if len(sys.argv) > 1 else " << std::quoted(csv_path) << "\n"
    << "d = pd.read_csv(csv)\n"
    << "DOF, H, N = " << dof << ", " << h << ", " << n << "\n"
    << "stem = csv[:-4] if csv.endswith('.csv') else csv\n\n"
       "fig, ax = plt.subplots(2, 2, figsize=(11, 7))\n"
       "for i in range(1, H + 1):\n"
       "    ax[0, 0].semilogy(d.t, d[f'err_norm_{i}'], label=f'task {i}')\n"
       "ax[0, 0].set_title('task error norm'); ax[0, 0].legend()\n"
       "for j in range(1, DOF + 1):\n"
       "    ax[0, 1].plot(d.t, d[f'qd_{j}'], label=f'qd_{j}')\n"
       "ax[0, 1].set_title('joint velocity [rad/s]'); ax[0, 1].legend(fontsize=7)\n"
       "for l in range(1, N + 1):\n"
       "    ax[1, 0].plot(d.t, d[f'lambda_{l}'], label=f'lambda_{l}')\n"
       "ax[1, 0].plot(d.t, d.beta, 'k--', label='beta')\n"
       "ax[1, 0].set_title('gains'); ax[1, 0].legend(fontsize=7)\n"
       "ax[1, 1].plot(d.t, d.stab_margin)\n"
       "ax[1, 1].axhline(0.0, color='r', lw=0.8)\n"
       "ax[1, 1].set_title('stability margin')\n"
       "for a in ax.flat:\n"
       "    a.set_xlabel('t [s]'); a.grid(True, alpha=0.3)\n"
       "fig.tight_layout()\n"
       "fig.savefig(stem + '.png', dpi=120)\n"
       "print('wrote', stem + '.png')\n";
  return s.str();
}

}  // namespace sdpclik
