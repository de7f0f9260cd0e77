// Acceptance report: one PASS/FAIL line per criterion, details on the same
// line. Exit status is 0 once every criterion has been evaluated; a crash
// or an exception exits nonzero.

#include "cli_app.hpp"

#include <cstdio>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

using namespace fastmaxwell;

namespace {

struct Verdict {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

void report(int id, const char* title, const std::function<Verdict()>& run) {
  Verdict v;
  try {
    v = run();
  } catch (const std::exception& e) {
    v = {false, std::string("exception: ") + e.what()};
  }
  std::printf("C%d %s %s: %s\n", id, v.pass ? "PASS" : "FAIL", title, v.detail.c_str());
  std::fflush(stdout);
}

Verdict convergence() {
  struct Row {
    const char* name;
    int n;
    double l2, rot;
  };
  const Row rows[] = {{"example1", 128, 5.77e-3, 2.05e-2},
                      {"example2", 64, 7.92e-3, 4.98e-2},
                      {"example3", 128, 5.01e-3, 3.15e-2},
                      {"example5", 128, 5.01e-3, 2.23e-2}};
  Verdict v{true, ""};
  for (const Row& r : rows) {
    const Problem& p = find_problem(r.name);
    const ErrorNorms a = run_problem(p, r.n).errors;
    const ErrorNorms b = run_problem(p, 2 * r.n).errors;
    const double dl = std::abs(a.l2 / r.l2 - 1), dr = std::abs(a.rot / r.rot - 1);
    const double ol = std::log2(a.l2 / b.l2), orot = std::log2(a.rot / b.rot);
    const bool ok = dl <= 0.02 && dr <= 0.02 && ol >= 0.98 && ol <= 1.02 && orot >= 0.98 && orot <= 1.02;
    v.pass = v.pass && ok;
    v.detail += std::string(r.name) + " " + fmt("%.3e", a.l2) + "/" + fmt("%.3e", a.rot) + " orders " +
                fmt("%.3f", ol) + "/" + fmt("%.3f", orot) + "; ";
  }
  return v;
}

Verdict oracle() {
  double worst = 0.0;
  int cases = 0;
  for (int n = 2; n <= 16; ++n) {
    for (const auto& c : oracle_cases()) {
      const Check k = oracle_equivalence(Grid::square(n), c, 10, 1000 + n, 1e-10);
      worst = std::max(worst, k.value);
      ++cases;
    }
  }
  return {worst <= 1e-10, std::to_string(cases) + " cases x 10 rhs, worst relative difference " +
                              fmt("%.2e", worst) + " (limit 1e-10)"};
}

Verdict eigen() {
  double eq = 0.0, dv = 0.0;
  bool counts = true;
  for (int n = 2; n <= 32; ++n) {
    for (Bc bc : {Bc::Essential, Bc::Natural}) {
      for (const auto& c : eigen_checks(n, bc, 1e-10)) {
        if (c.name.rfind("eigen residual", 0) == 0) eq = std::max(eq, c.value);
        if (c.name.rfind("eigen divergence", 0) == 0) dv = std::max(dv, c.value);
        if (c.name.find("count") != std::string::npos) counts = counts && c.passed;
      }
    }
  }
  return {eq <= 1e-10 && dv <= 1e-10 && counts,
          "n=2..32 both bc, worst residual " + fmt("%.2e", eq) + ", worst divergence " + fmt("%.2e", dv) +
              ", counts " + (counts ? "ok" : "wrong")};
}

Verdict structure() {
  std::vector<int> sizes;
  for (int n = 2; n <= 32; ++n) sizes.push_back(n);
  for (int n : {63, 64, 100, 127, 128, 255, 256, 511, 512}) sizes.push_back(n);
  double worst = 0.0;
  std::string where;
  for (int n : sizes) {
    for (const auto& c : structure_identities(n, 1e-11)) {
      if (c.value > worst) {
        worst = c.value;
        where = c.name;
      }
    }
  }
  return {worst <= 1e-11, std::to_string(sizes.size()) + " sizes up to 512, worst " + fmt("%.2e", worst) +
                              " (" + where + ")"};
}

Verdict gauss_law() {
  double g = 0.0, m = 0.0;
  for (int n : {8, 64}) {
    for (double a : {1.0, 5.0}) {
      for (Bc bc : {Bc::Essential, Bc::Natural}) g = std::max(g, gauss_law_residual(n, bc, a, 50 + n, 1e-11).value);
      m = std::max(m, consistent_multiplier(n, a, 60 + n, 1e-10).value);
    }
  }
  return {g <= 1e-11 && m <= 1e-10,
          "gauss-law residual " + fmt("%.2e", g) + " (limit 1e-11), max|P|/max|u| " + fmt("%.2e", m) +
              " (limit 1e-10)"};
}

Verdict pcg_flatness() {
  const Problem& p = find_problem("example4");
  KrylovConfig pc;
  pc.preconditioner = Preconditioner::ConstantCoeffFast;
  pc.keep_history = false;
  bool ok = true;
  std::string d = "pcg iterations";
  for (int n : {128, 256, 512, 1024}) {
    const IterativeRun r = run_iterative(p, n, pc);
    ok = ok && r.result.converged && std::abs(r.result.iterations - 76) <= 3;
    d += " n=" + std::to_string(n) + ":" + std::to_string(r.result.iterations) + (r.result.converged ? "" : "(no conv)");
  }
  KrylovConfig plain;
  plain.keep_history = false;
  const IterativeRun c = run_iterative(p, 128, plain);
  ok = ok && c.result.converged && std::abs(c.result.iterations - 4564) <= 456;
  d += "; cg n=128:" + std::to_string(c.result.iterations) + " (targets 76+-3 and 4564+-10%)";
  return {ok, d};
}

Verdict scaling() {
  std::vector<cli::BenchRow> rows;
  for (int n : {4096, 8192, 16384}) {
    rows.push_back(cli::bench_one(n, Bc::Essential, Variant::DivergenceConstrained, 1.0, n < 16384 ? 3 : 2, 7));
  }
  bool ok = true;
  std::string d;
  for (std::size_t k = 1; k < rows.size(); ++k) {
    const double t = rows[k].seconds / rows[k - 1].seconds;
    const double m = rows[k].peak_rss_mb / rows[k - 1].peak_rss_mb;
    ok = ok && t <= 4.6 && m <= 4.6;
    d += "n " + std::to_string(rows[k - 1].n) + "->" + std::to_string(rows[k].n) + ": time x" + fmt("%.2f", t) +
         ", peak rss x" + fmt("%.2f", m) + "; ";
  }
  d += "seconds " + fmt("%.3f", rows[0].seconds) + "/" + fmt("%.3f", rows[1].seconds) + "/" +
       fmt("%.3f", rows[2].seconds);
  return {ok, d};
}

Verdict eigen_convergence() {
  double prev = 0.0;
  bool ok = true;
  std::string d = "error ratios";
  for (int n : {16, 32, 64, 128}) {
    const double e = std::abs(smallest_eigenvalue(n) - pi * pi);
    if (prev > 0.0) {
      const double r = prev / e;
      ok = ok && std::abs(r - 4.0) <= 0.1;
      d += " " + fmt("%.4f", r);
    }
    prev = e;
  }
  return {ok, d};
}

}  // namespace

int main() {
  report(1, "convergence reproduction", convergence);
  report(2, "oracle equivalence", oracle);
  report(3, "eigen-decomposition exactness", eigen);
  report(4, "structure identities", structure);
  report(5, "gauss-law preservation", gauss_law);
  report(6, "pcg flatness", pcg_flatness);
  report(7, "complexity scaling", scaling);
  report(8, "eigenvalue convergence", eigen_convergence);
  return 0;
}
