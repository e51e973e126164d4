#pragma once
#include <cstdint>
#include <string>

#include "isoembed/decompose.hpp"
#include "isoembed/freemap.hpp"

namespace isoembed {

enum class TwistMode { never, automatic, always };

struct PerturbOptions {
  double tol_residual = 1e-8;
  int max_iterations = 60;
  int staging_cap = 256;
  double rank_threshold = 1e-10;  // pointwise sigma_min(A) relative to its largest row
  double freeness_threshold = 1e-8;
  TwistMode twist = TwistMode::automatic;
  double twist_ratio = 0.1;   // |dv1.dv1| / |h| above which the spiral pre-step is used
  double twist_budget = 0.9;  // fraction of eps given to the spiral amplitude
  double min_cycles = 6;
  // low-pass dv (|k_a| <= rho_cut * N_a / 2) before it enters the quadratic term
  bool smoothing = false;
  double rho_cut = 2.0 / 3.0;
  // > 0: an increment whose iteration stalls keeps its best iterate if that reduced the
  // residual, and up to refine_passes correction solves toward the full target follow
  int refine_passes = 0;
};

/// Rows d_i w then d_i d_j w at one grid point, with its minimum-norm solver.
struct PointwiseSystem {
  Mat A;
  Vec rhs;
  Mat pinv;
  double sigma_min = 0;
};
PointwiseSystem assemble_system(const Jet& jet, std::size_t p, double threshold = 1e-10);

struct PerturbationState {
  PeriodicField v;
  int iterations = 0;
  std::vector<double> residual_history;
  double v_sup = 0;
  bool converged = false;
};

/// Pseudo-inverses of the normal system [dw; d2w] on the chart points of a fixed map w.
class ChartSolver {
 public:
  ChartSolver(const EquivariantMap& w, std::vector<std::uint8_t> mask, double rank_threshold = 1e-10);
  /// v^1 = A^+ (0, -h/2) on the chart.
  PeriodicField first_iterate(const PeriodicField& h) const;
  PerturbationState solve(const PeriodicField& h, double eps_budget, const PerturbOptions& opt) const;
  /// sup-norm of d(w+v).d(w+v) - dw.dw - h given dv.
  double residual(const PeriodicField& dv, const PeriodicField& h) const;
  const Jet& jet() const { return jet_; }
  const std::vector<std::size_t>& points() const { return points_; }
  const std::vector<double>& pinv() const { return pinv_; }
  double sigma_min() const { return sigma_min_; }

 private:
  PeriodicField iterate(const PeriodicField& h, const PeriodicField* dv) const;

  EquivariantMap w_;
  std::vector<std::uint8_t> mask_;
  std::vector<std::size_t> points_;
  Jet jet_;
  std::vector<double> pinv_;
  double sigma_min_ = 0;
};

PerturbationState fixed_point_solve(const EquivariantMap& w, const PeriodicField& h,
                                    const std::vector<std::uint8_t>& mask, double eps_budget,
                                    const PerturbOptions& opt);

struct TwistInfo {
  bool used = false;
  double lambda = 0;
  double ratio = 0;  // |dv1.dv1| / |h| that drove the decision
  std::string frame;  // "constant" or "projected"
  int xi = -1, eta = -1;
  double amplitude = 0;
  double error = 0;  // |d(w+s).d(w+s) - dw.dw - h|
};

struct TermDiagnostics {
  int K = 1;
  std::vector<int> iterations;
  std::vector<double> residual_history;  // last increment
  double displacement = 0;               // sup_x |w'(x) - w(x)|
  double residual = 0;                   // |dw'.dw' - dw.dw - h|
  double sigma_rel = 0;                  // freeness certificate of w'
  double eps = 0;
  TwistInfo twist;
};

struct StagedResult {
  EquivariantMap w;
  TermDiagnostics diag;
};

/// Spiral s = (a^2 / lambda)(cos(lambda f.(x - c)) xi + sin(..) eta) in normal directions.
EquivariantMap apply_twist(const EquivariantMap& w, const RankOneTerm& term, double eps, const PerturbOptions& opt,
                           const ChartSolver& solver, TwistInfo& info);

StagedResult staged_perturb(const EquivariantMap& w, const RankOneTerm& term, double eps_budget,
                            const PerturbOptions& opt);
/// Same for an arbitrary increment h supported in the chart.
StagedResult staged_perturb(const EquivariantMap& w, const PeriodicField& h, const RankOneTerm& term,
                            double eps_budget, const PerturbOptions& opt);

/// sup_x |a(x) - b(x)| of two maps on the same grid.
double displacement(const EquivariantMap& a, const EquivariantMap& b);

}  // namespace isoembed
