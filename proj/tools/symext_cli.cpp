// Batch front end: reproduce the t-value tables, scan thresholds, enumerate
// parity classes, decide individual states or channels, and emit the
// Bell-diagonal state-space curves as CSV.
//
// Exit codes: 0 success, 2 invalid configuration, 3 solver non-convergence,
// 4 undecidable routing.
#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <iostream>
#include <mutex>
#include <sstream>
#include <thread>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "symext/analytic.hpp"
#include "symext/bell.hpp"
#include "symext/gf2.hpp"
#include "symext/json_io.hpp"
#include "symext/symext_sdp.hpp"

namespace {

constexpr const char* kVersion = "1.0.0";

using symext::bell::BellDiagonalDistribution;
namespace gf2 = symext::gf2;
namespace sx = symext;

struct OutputTarget {
  std::ofstream file;
  std::ostream* os = &std::cout;
  void open(const std::string& path) {
    if (path.empty()) return;
    file.open(path);
    if (!file) throw CLI::ValidationError("--out", "cannot open " + path);
    os = &file;
  }
};

std::string format_double(double v, int digits) {
  std::ostringstream ss;
  ss.imbue(std::locale::classic());
  ss.setf(std::ios::fixed);
  ss.precision(digits);
  ss << v;
  return ss.str();
}

void metadata(std::ostream& os, const std::string& command, const std::string& params,
              std::uint64_t seed, double tol) {
  os << "# command=" << command << " version=" << kVersion << " " << params
     << " seed=" << seed << " tol=" << format_double(tol, 12) << "\n";
}

struct TableRow {
  std::vector<int> label;
  double t;
};

std::vector<TableRow> reproduce_table(int k, int n, int jobs, double tol) {
  const double p = sx::bell::threshold_p(n);
  const BellDiagonalDistribution start = sx::bell::iid(sx::bell::isotropic(p), n);
  std::vector<gf2::ParityMatrix> classes = gf2::enumerate_classes(n, k, false);
  // The tables list announcements with every parity bit meaningful: drop
  // classes whose parity matrix has an all-zero row.
  classes.erase(std::remove_if(classes.begin(), classes.end(),
                               [](const gf2::ParityMatrix& pm) {
                                 return std::any_of(pm.rows.begin(), pm.rows.end(),
                                                    [](gf2::Word r) { return r == 0; });
                               }),
                classes.end());
  std::vector<TableRow> rows(classes.size());
  std::vector<std::thread> pool;
  std::mutex err_mutex;
  std::string error;
  const int nthreads = std::max(1, std::min<int>(jobs, static_cast<int>(classes.size())));
  auto work = [&](int tid) {
    try {
      for (size_t i = tid; i < classes.size(); i += nthreads) {
        std::vector<gf2::Word> hrows = classes[i].rows;
        for (int r = 0; r < classes[i].m; ++r) hrows[r] |= gf2::Word(1) << (k + r);
        const gf2::ParityCheckMatrix h(classes[i].m, n, hrows);
        const BellDiagonalDistribution out = sx::bell::lad_apply(h, start);
        symext::sdp::SdpOptions opts;
        opts.tol = tol;
        const auto res = sx::symext_sdp::min_t(out, sx::symext_sdp::SymmetryMode::S_SYMMETRIC, opts);
        rows[i] = TableRow{gf2::row_multiset_label(classes[i]), res.t};
      }
    } catch (const std::exception& e) {
      std::scoped_lock lock(err_mutex);
      error = e.what();
    }
  };
  for (int t = 0; t < nthreads; ++t) pool.emplace_back(work, t);
  for (auto& th : pool) th.join();
  if (!error.empty()) throw std::runtime_error(error);
  std::sort(rows.begin(), rows.end(), [](const TableRow& a, const TableRow& b) {
    if (a.t != b.t) return a.t < b.t;
    return a.label < b.label;
  });
  return rows;
}

int cmd_tables(int k, int n_lo, int n_hi, const std::string& out, int jobs, double tol,
               const std::string& format) {
  OutputTarget target;
  target.open(out);
  for (int n = n_lo; n <= n_hi; ++n) {
    if (k < 1 || k >= n) throw CLI::ValidationError("--k/--n", "need 1 <= k < n");
    const std::vector<TableRow> rows = reproduce_table(k, n, jobs, tol);
    if (format == "json") {
      nlohmann::json jrows = nlohmann::json::array();
      for (const TableRow& r : rows) jrows.push_back({{"label", r.label}, {"t", r.t}});
      nlohmann::json j{{"command", "tables"}, {"version", kVersion}, {"k", k},
                       {"n", n},             {"tol", tol},          {"rows", jrows}};
      *target.os << j.dump(2) << "\n";
      continue;
    }
    metadata(*target.os, "tables", "k=" + std::to_string(k) + " n=" + std::to_string(n), 0, tol);
    for (const std::string& h : gf2::class_label_headers(k)) *target.os << h << ",";
    *target.os << "t\n";
    for (const TableRow& r : rows) {
      for (int c : r.label) *target.os << c << ",";
      *target.os << format_double(r.t, 6) << "\n";
    }
  }
  return 0;
}

int cmd_threshold(const std::string& protocol, int blocksize, const std::string& out) {
  OutputTarget target;
  target.open(out);
  const sx::bell::Thresholds th = sx::bell::thresholds();
  metadata(*target.os, "threshold", "protocol=" + protocol, 0, 1e-12);
  if (protocol == "six-state") {
    *target.os << "protocol,quantity,value\n";
    *target.os << "six-state,two_way_qber," << format_double(th.six_state_two_way, 12) << "\n";
    *target.os << "six-state,symext_oneway_qber,"
               << format_double(th.six_state_symext_oneway, 12) << "\n";
    if (blocksize > 0) {
      const double p = sx::bell::threshold_p(blocksize);
      *target.os << "six-state,blocksize_" << blocksize << "_p," << format_double(p, 12) << "\n";
      *target.os << "six-state,blocksize_" << blocksize << "_qber," << format_double(2 * p, 12)
                 << "\n";
    }
  } else if (protocol == "bb84") {
    *target.os << "protocol,quantity,value\n";
    *target.os << "bb84,two_way_qber," << format_double(th.bb84_two_way, 12) << "\n";
  } else {
    throw CLI::ValidationError("--protocol", "expected six-state or bb84");
  }
  return 0;
}

int cmd_statespace(const std::string& out) {
  OutputTarget target;
  target.open(out);
  metadata(*target.os, "statespace", "", 0, 0);
  *target.os << "curve,alpha1,alpha2\n";
  const int samples = 200;
  auto emit = [&](const std::string& name, double a1, double a2) {
    *target.os << name << "," << format_double(a1, 9) << "," << format_double(a2, 9) << "\n";
  };
  for (int level = -2; level <= 2; ++level) {
    for (int i = 0; i <= samples; ++i) {
      const double a1 = -1.0 + 2.0 * i / samples;
      const double a2sq = (1.0 - a1 * a1) * std::pow(2.0, level - 1);
      if (a2sq < 0) continue;
      emit("dc_" + std::to_string(level), a1, std::sqrt(a2sq));
    }
  }
  for (int i = 0; i <= samples; ++i) {  // outer ellipse 4(a1-1/2)^2 + a2^2 = 1
    const double phi = M_PI * i / samples;
    emit("outer_ellipse", 0.5 + 0.5 * std::cos(phi), std::sin(phi));
  }
  for (int i = 0; i <= samples; ++i) {  // inner ellipse (9/4)(a1-1/3)^2 + (3/2)a2^2 = 1
    const double phi = M_PI * i / samples;
    emit("inner_ellipse", 1.0 / 3.0 + (2.0 / 3.0) * std::cos(phi),
         std::sqrt(2.0 / 3.0) * std::sin(phi));
  }
  // Projected tetrahedron boundary: |alpha2| <= (1 + alpha1)/sqrt 2, alpha1 <= 1.
  for (int i = 0; i <= samples; ++i) {
    const double a1 = -1.0 + 2.0 * i / samples;
    emit("tetrahedron", a1, (1 + a1) / std::sqrt(2.0));
  }
  for (int i = 0; i <= samples; ++i) {
    const double a2 = -std::sqrt(2.0) + 2 * std::sqrt(2.0) * i / samples;
    emit("tetrahedron", 1.0, a2);
  }
  return 0;
}

int cmd_classes(int n, int k, bool irreducible_only, const std::string& out) {
  OutputTarget target;
  target.open(out);
  const std::vector<gf2::ParityMatrix> classes = gf2::enumerate_classes(n, k, irreducible_only);
  metadata(*target.os, "classes",
           "n=" + std::to_string(n) + " k=" + std::to_string(k) +
               " irreducible_only=" + (irreducible_only ? "1" : "0"),
           0, 0);
  for (const std::string& h : gf2::class_label_headers(k)) *target.os << h << ",";
  *target.os << "rows\n";
  for (const gf2::ParityMatrix& p : classes) {
    for (int c : gf2::row_multiset_label(p)) *target.os << c << ",";
    std::string rows;
    for (gf2::Word r : p.rows) {
      if (!rows.empty()) rows += "|";
      rows += gf2::row_string(r, p.k);
    }
    *target.os << rows << "\n";
  }
  return 0;
}

int cmd_decide(const std::string& input, const std::string& method, const std::string& out,
               double tol) {
  OutputTarget target;
  target.open(out);
  const nlohmann::json j = sx::io::load_file(input);
  const std::string type = j.at("type").get<std::string>();
  nlohmann::json result;
  if (method == "channel") {
    const sx::QuantumChannel ch = sx::io::channel_from_json(j);
    result["antidegradable"] = sx::io::to_json(sx::analytic::is_antidegradable(ch));
    result["degradable"] = sx::io::to_json(sx::analytic::is_degradable(ch));
  } else if (method == "sdp") {
    const BellDiagonalDistribution s = sx::io::bell_from_json(j);
    symext::sdp::SdpOptions opts;
    opts.tol = tol;
    const auto mode = sx::bell::s_symmetry_defect(s) > 1e-12
                          ? sx::symext_sdp::SymmetryMode::GENERIC_BELL_DIAG
                          : sx::symext_sdp::SymmetryMode::S_SYMMETRIC;
    const auto res = sx::symext_sdp::min_t(s, mode, opts);
    sx::analytic::Decision d{res.t <= 1e-7 ? sx::analytic::Verdict::YES
                                           : sx::analytic::Verdict::NO,
                             -res.t, "sdp-min-t"};
    result = sx::io::to_json(d);
    result["min_t"] = res.t;
  } else if (method == "conjecture") {
    result = sx::io::to_json(sx::analytic::decide_conjecture(sx::io::density_from_json(j)));
  } else {  // analytic
    if (type == "bell_diagonal") {
      const BellDiagonalDistribution s = sx::io::bell_from_json(j);
      result = sx::io::to_json(sx::analytic::decide_bell_diag(s.normalized()));
    } else {
      result = sx::io::to_json(sx::analytic::decide_state(sx::io::density_from_json(j)));
    }
  }
  *target.os << result.dump(2) << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Symmetric-extension deciders and advantage-distillation tables"};
  app.require_subcommand(1);

  int k = 3, n = 4, n_hi = -1, blocksize = 0, jobs = 1;
  bool irreducible_only = false;
  std::string out, input, method = "analytic", protocol = "six-state", format = "csv";
  double tol = 1e-9;
  std::uint64_t seed = 0;

  CLI::App* tables = app.add_subcommand("tables", "Reproduce the symmetric-extension t tables");
  tables->add_option("--k", k, "encoded bits")->required();
  tables->add_option("--n", n, "block size (low end)")->required();
  tables->add_option("--n-hi", n_hi, "optional block size range end");
  tables->add_option("--out", out);
  tables->add_option("--jobs", jobs);
  tables->add_option("--tol", tol);
  tables->add_option("--format", format)->check(CLI::IsMember({"csv", "json"}));

  CLI::App* threshold = app.add_subcommand("threshold", "QBER thresholds");
  threshold->add_option("--protocol", protocol)->check(CLI::IsMember({"six-state", "bb84"}));
  threshold->add_option("--blocksize", blocksize);
  threshold->add_option("--out", out);

  CLI::App* statespace = app.add_subcommand("statespace", "State-space curves as CSV");
  statespace->add_option("--out", out);

  CLI::App* classes = app.add_subcommand("classes", "Enumerate parity-matrix classes");
  classes->add_option("--n", n)->required();
  classes->add_option("--k", k)->required();
  classes->add_flag("--irreducible-only", irreducible_only);
  classes->add_option("--out", out);

  CLI::App* decide = app.add_subcommand("decide", "Decide one state or channel");
  decide->add_option("--input", input)->required();
  decide->add_option("--method", method)
      ->check(CLI::IsMember({"analytic", "conjecture", "sdp", "channel"}));
  decide->add_option("--out", out);
  decide->add_option("--tol", tol);
  decide->add_option("--seed", seed);

  CLI11_PARSE(app, argc, argv);

  try {
    if (tables->parsed()) return cmd_tables(k, n, n_hi < 0 ? n : n_hi, out, jobs, tol, format);
    if (threshold->parsed()) return cmd_threshold(protocol, blocksize, out);
    if (statespace->parsed()) return cmd_statespace(out);
    if (classes->parsed()) return cmd_classes(n, k, irreducible_only, out);
    if (decide->parsed()) return cmd_decide(input, method, out, tol);
  } catch (const CLI::ValidationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const symext::analytic::UndecidedError& e) {
    std::cerr << "undecided: " << e.what() << "\n";
    return 4;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "solver error: " << e.what() << "\n";
    return 3;
  }
  return 2;
}
