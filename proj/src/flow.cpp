#include <algorithm>
#include <cmath>
#include <map>
#include <memory>
#include <stdexcept>

#include <Eigen/SparseCholesky>

#include "acmorse/flow.hpp"

namespace acmorse {

namespace {

using Factor = Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>>;

// W + dt eps K, with K the (positive semidefinite) stiffness form.
Eigen::SparseMatrix<double> imex_matrix(const Problem& prob, double dt) {
  Eigen::SparseMatrix<double> A = prob.laplacian().form() * (dt * prob.epsilon());
  // laplacian form is -K, so the scaled form above is -dt eps K; subtract it.
  Eigen::SparseMatrix<double> W(A.rows(), A.cols());
  W = Eigen::SparseMatrix<double>(prob.weights().asDiagonal());
  A = W - A;
  return A;
}

Eigen::VectorXd explicit_part(const Problem& prob, const Eigen::VectorXd& u, double dt) {
  const Potential& p = prob.potential();
  Eigen::VectorXd v(u.size());
  for (Eigen::Index i = 0; i < u.size(); ++i) v[i] = u[i] - dt * p.f(u[i]);
  return prob.weights().cwiseProduct(v);
}

double auto_dt_max(const Problem& prob) {
  const double t0 = prob.potential().T0();
  const double s = prob.potential().fprime_sup(-t0, t0);
  return s > 0.0 ? 1.0 / (2.0 * s) : 1.0;
}

}  // namespace

ScalarField flow_step(const Problem& prob, const ScalarField& u, double dt) {
  if (!(dt > 0.0)) throw std::invalid_argument("flow_step: dt must be positive");
  u.check_finite("flow_step state");
  auto one = [&](const Eigen::VectorXd& v, double step, Eigen::VectorXd& out) {
    Factor f;
    f.compute(imex_matrix(prob, step));
    if (f.info() != Eigen::Success) return false;
    out = f.solve(explicit_part(prob, v, step));
    return f.info() == Eigen::Success && out.allFinite();
  };
  Eigen::VectorXd next;
  if (one(u.values, dt, next)) return ScalarField(prob.grid(), std::move(next));
  Eigen::VectorXd half;
  if (one(u.values, dt / 2, half) && one(half, dt / 2, next))
    return ScalarField(prob.grid(), std::move(next));
  throw std::runtime_error("flow_step: the implicit solve failed at dt and dt/2");
}

Trajectory run_flow(const Problem& prob, const ScalarField& u0, const FlowOptions& opt,
                    const std::vector<SolutionPoint>& known) {
  if (!u0.grid || !u0.grid->same_layout(*prob.grid()))
    throw std::invalid_argument("run_flow: state grid does not match the problem grid");
  u0.check_finite("run_flow start");
  const double dt_max = opt.dt_max > 0.0 ? opt.dt_max : auto_dt_max(prob);
  const Eigen::VectorXd& w = prob.weights();

  std::map<double, std::shared_ptr<Factor>> cache;
  auto factor_for = [&](double dt) -> std::shared_ptr<Factor> {
    auto it = cache.find(dt);
    if (it != cache.end()) return it->second;
    if (cache.size() >= 64) cache.clear();
    auto f = std::make_shared<Factor>();
    f->compute(imex_matrix(prob, dt));
    if (f->info() != Eigen::Success)
      throw std::runtime_error("run_flow: the implicit factorization failed");
    cache.emplace(dt, f);
    return f;
  };

  Trajectory tr;
  Eigen::VectorXd u = u0.values;
  double t = 0.0;
  double energy = prob.energy(u0);
  double dt = std::min(opt.dt0, dt_max);
  std::int64_t since_sample = 0;
  int accepts_in_row = 0;

  auto sample = [&]() {
    tr.times.push_back(t);
    tr.states.emplace_back(prob.grid(), u);
    tr.energies.push_back(energy);
  };
  sample();

  tr.equilibrated = prob.residual_norm(tr.states.back()) <= opt.equil_tol;
  while (!tr.equilibrated && tr.steps_taken < opt.max_steps) {
    auto f = factor_for(dt);
    Eigen::VectorXd next = f->solve(explicit_part(prob, u, dt));
    bool ok = f->info() == Eigen::Success && next.allFinite();
    double next_energy = 0.0;
    if (ok) {
      next_energy = prob.energy(ScalarField(prob.grid(), next));
      ok = std::isfinite(next_energy) &&
           next_energy <= energy + opt.uptick_tol * (1.0 + std::abs(energy));
    }
    if (!ok) {
      dt /= 2;
      accepts_in_row = 0;
      if (dt < 1e-12) {
        tr.note = "time step underflowed before equilibration";
        break;
      }
      continue;
    }
    tr.max_energy_uptick = std::max(tr.max_energy_uptick, next_energy - energy);
    u = std::move(next);
    t += dt;
    energy = next_energy;
    ++tr.steps_taken;
    if (++accepts_in_row >= 20) {
      dt = std::min(dt * 1.5, dt_max);
      accepts_in_row = 0;
    }
    ScalarField cur(prob.grid(), u);
    tr.equilibrated = prob.residual_norm(cur) <= opt.equil_tol;
    if (++since_sample >= opt.sample_stride || tr.equilibrated) {
      sample();
      since_sample = 0;
    }
  }
  if (tr.times.back() < t) sample();
  if (!tr.equilibrated && tr.note.empty()) tr.note = "step budget exhausted before equilibration";

  if (!known.empty()) {
    auto [i0, d0] = nearest_solution(known, tr.states.front(), w);
    if (d0 <= 1e-2) tr.limit_start = known[i0];
    if (tr.equilibrated) {
      auto [i1, d1] = nearest_solution(known, tr.states.back(), w);
      if (d1 <= 1e-3) tr.limit_end = known[i1];
    }
  }
  return tr;
}

ScalarTrajectory space_constant_trajectory(const Potential& p, double c_minus, double c_plus) {
  const PotentialZero* zm = nullptr;
  const PotentialZero* zp = nullptr;
  for (const PotentialZero& z : p.zeros()) {
    if (std::abs(z.location - c_minus) <= 1e-8 * (1.0 + std::abs(c_minus))) zm = &z;
    if (std::abs(z.location - c_plus) <= 1e-8 * (1.0 + std::abs(c_plus))) zp = &z;
  }
  if (!zm || !zp || zm == zp)
    throw std::invalid_argument("space_constant_trajectory: endpoints must be distinct zeros of f");
  if (!(zm->fprime < 0.0))
    throw std::invalid_argument(
        "space_constant_trajectory: descent cannot leave a local minimum of the potential");
  if (!(zp->fprime > 0.0))
    throw std::invalid_argument(
        "space_constant_trajectory: the target must be a local minimum of the potential");
  const double lo = std::min(c_minus, c_plus), hi = std::max(c_minus, c_plus);
  for (const PotentialZero& z : p.zeros())
    if (&z != zm && &z != zp && z.location > lo + 1e-12 && z.location < hi - 1e-12)
      throw std::invalid_argument(
          "space_constant_trajectory: an intermediate zero blocks the flow");

  const double sigma = c_plus > c_minus ? 1.0 : -1.0;
  const double dt_cap = 0.2 / std::max({std::abs(zm->fprime), std::abs(zp->fprime), 1.0});

  ScalarTrajectory tr;
  tr.c_minus = c_minus;
  tr.c_plus = c_plus;
  double t = 0.0;
  double wv = c_minus + sigma * 1e-6 * std::abs(c_plus - c_minus);
  double dt = 1e-3;
  tr.times.push_back(t);
  tr.values.push_back(wv);

  auto rhs = [&](double x) { return -p.f(x); };
  // Embedded Runge-Kutta 4(5) pair (Cash-Karp coefficients).
  const double a21 = 1.0 / 5;
  const double a31 = 3.0 / 40, a32 = 9.0 / 40;
  const double a41 = 3.0 / 10, a42 = -9.0 / 10, a43 = 6.0 / 5;
  const double a51 = -11.0 / 54, a52 = 5.0 / 2, a53 = -70.0 / 27, a54 = 35.0 / 27;
  const double a61 = 1631.0 / 55296, a62 = 175.0 / 512, a63 = 575.0 / 13824,
               a64 = 44275.0 / 110592, a65 = 253.0 / 4096;
  const double b1 = 37.0 / 378, b3 = 250.0 / 621, b4 = 125.0 / 594, b6 = 512.0 / 1771;
  const double e1 = b1 - 2825.0 / 27648, e3 = b3 - 18575.0 / 48384, e4 = b4 - 13525.0 / 55296,
               e5 = -277.0 / 14336, e6 = b6 - 1.0 / 4;

  std::int64_t steps = 0;
  while (std::abs(wv - c_plus) >= 1e-10) {
    if (++steps > 2000000)
      throw std::runtime_error("space_constant_trajectory: time budget exhausted");
    dt = std::min(dt, dt_cap);
    const double k1 = rhs(wv);
    const double k2 = rhs(wv + dt * a21 * k1);
    const double k3 = rhs(wv + dt * (a31 * k1 + a32 * k2));
    const double k4 = rhs(wv + dt * (a41 * k1 + a42 * k2 + a43 * k3));
    const double k5 = rhs(wv + dt * (a51 * k1 + a52 * k2 + a53 * k3 + a54 * k4));
    const double k6 = rhs(wv + dt * (a61 * k1 + a62 * k2 + a63 * k3 + a64 * k4 + a65 * k5));
    const double step5 = dt * (b1 * k1 + b3 * k3 + b4 * k4 + b6 * k6);
    const double err = std::abs(dt * (e1 * k1 + e3 * k3 + e4 * k4 + e5 * k5 + e6 * k6));
    const double tol = 1e-12 * (1.0 + std::abs(wv));
    if (err <= tol) {
      t += dt;
      wv += step5;
      if (sigma * (wv - c_plus) > 0.0) wv = c_plus;
      tr.times.push_back(t);
      tr.values.push_back(wv);
    }
    const double factor =
        err > 0.0 ? std::clamp(0.9 * std::pow(tol / err, 0.2), 0.2, 5.0) : 5.0;
    dt *= factor;
  }
  return tr;
}

ModeDecayReport mode_decay_check(const Problem& prob, const ScalarTrajectory& w, int modes) {
  if (modes < 0) throw std::invalid_argument("mode_decay_check: modes must be nonnegative");
  const Potential& p = prob.potential();
  const double t0 = p.T0();
  const Eigen::Index n = prob.grid()->node_count();
  const int m = static_cast<int>(std::min<Eigen::Index>(n, std::max(modes + 1, 2)));
  const SpectrumResult spec = laplacian_spectrum(prob, m);

  ModeDecayReport rep;
  rep.bound = p.fprime_sup(-t0, t0) / spec.eigenvalues[1];
  rep.applicable = prob.epsilon() > rep.bound;
  if (!rep.applicable) {
    rep.note = "bound not satisfied: epsilon <= sup|f'| / lambda_1, no verdict";
    return rep;
  }
  if (modes == 0) {
    rep.all_positive = true;
    rep.note = "no modes requested";
    return rep;
  }
  if (modes + 1 > m)
    throw std::invalid_argument("mode_decay_check: more modes than grid eigenvalues");

  const std::size_t ns = w.values.size();
  if (ns < 2) throw std::invalid_argument("mode_decay_check: trajectory has fewer than 2 samples");
  std::vector<double> fp(ns);
  for (std::size_t i = 0; i < ns; ++i) fp[i] = p.fprime(w.values[i]);
  const double fp_ends = std::min(p.fprime(w.c_minus), p.fprime(w.c_plus));

  rep.all_positive = true;
  for (int k = 1; k <= modes; ++k) {
    const double base = prob.epsilon() * spec.eigenvalues[k];
    double margin = base + fp_ends;
    bool mono = true;
    for (std::size_t i = 0; i < ns; ++i) margin = std::min(margin, base + fp[i]);
    for (std::size_t i = 0; i + 1 < ns; ++i) {
      const double inc =
          0.5 * ((base + fp[i]) + (base + fp[i + 1])) * (w.times[i + 1] - w.times[i]);
      if (!(inc > 0.0)) mono = false;
    }
    rep.margins.push_back(margin);
    rep.monotone.push_back(mono);
    if (!(margin > 0.0)) rep.all_positive = false;
  }
  return rep;
}

ConnectionCount connection_count_mod2(const Problem& prob, const std::vector<SolutionPoint>& all,
                                      std::size_t from, std::size_t to, int samples,
                                      std::uint64_t rng_seed, const FlowOptions& opt) {
  if (from >= all.size() || to >= all.size() || from == to)
    throw std::invalid_argument("connection_count_mod2: bad endpoint positions");
  const SolutionPoint& src = all[from];
  const SolutionPoint& dst = all[to];
  if (src.nullity > 0 || dst.nullity > 0)
    throw std::invalid_argument("connection_count_mod2: endpoints must be nondegenerate");
  if (src.index < 1)
    throw std::invalid_argument("connection_count_mod2: the source has no unstable direction");
  if (dst.index != src.index - 1)
    throw std::invalid_argument("connection_count_mod2: the target index must be one below");

  const int k = src.index;
  const LinearOperator H = prob.hessian(src.u);
  const double tol = prob.hessian_zero_tol(src.u);
  const Eigen::Index n = H.size();
  int m = static_cast<int>(std::min<Eigen::Index>(n, k + 2));
  SpectrumResult spec;
  for (;;) {
    spec = eigen_solve(H, m);
    if (spec.eigenvalues[m - 1] > tol || m == n) break;
    m = static_cast<int>(std::min<Eigen::Index>(n, 2 * m));
  }
  if (!(spec.eigenvalues[k - 1] < -tol))
    throw std::invalid_argument("connection_count_mod2: unstable directions are not clear of zero");

  const Eigen::VectorXd& w = prob.weights();
  const double delta0 = 1e-3 * prob.potential().T0();
  FlowOptions launch_opt = opt;
  launch_opt.sample_stride = std::max<std::int64_t>(launch_opt.max_steps, 1);

  auto flow_to_limit = [&](const Eigen::VectorXd& u0, std::size_t& limit, double& dist,
                           double& time) {
    Trajectory tr = run_flow(prob, ScalarField(prob.grid(), u0), launch_opt, all);
    auto [i, d] = nearest_solution(all, tr.states.back(), w);
    limit = i;
    dist = d;
    time = tr.times.back();
    return tr.equilibrated && d <= 1e-3;
  };

  std::vector<Eigen::VectorXd> dirs;
  for (int i = 0; i < k; ++i) {
    dirs.push_back(spec.eigenfields[i].values);
    dirs.push_back(-spec.eigenfields[i].values);
  }
  const int counted = static_cast<int>(dirs.size());
  if (k >= 2 && samples > 0) {
    Rng rng(rng_seed);
    for (int s = 0; s < samples; ++s) {
      Eigen::VectorXd d = Eigen::VectorXd::Zero(n);
      for (int i = 0; i < k; ++i) {
        // Box-Muller normal draw; two uniforms consumed per coefficient.
        const double u1 = std::max(rng.uniform(), 1e-300);
        const double u2 = rng.uniform();
        d += std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586 * u2) *
             spec.eigenfields[i].values;
      }
      const double nn = norm_w(d, w);
      if (nn > 0.0) dirs.push_back(d / nn);
    }
  }

  ConnectionCount out;
  for (std::size_t di = 0; di < dirs.size(); ++di) {
    LaunchRecord rec;
    rec.direction = static_cast<int>(di);
    double delta = delta0;
    for (int attempt = 0; attempt < 4; ++attempt) {
      std::size_t lim1 = 0, lim2 = 0;
      double d1 = 0, d2 = 0, t1 = 0, t2 = 0;
      const bool ok1 = flow_to_limit(src.u.values + delta * dirs[di], lim1, d1, t1);
      const bool ok2 = flow_to_limit(src.u.values + 0.5 * delta * dirs[di], lim2, d2, t2);
      rec.delta = delta;
      rec.resolved = ok1;
      rec.limit = lim1;
      rec.distance = d1;
      rec.time = t1;
      if (ok1 && ok2 && lim1 == lim2) {
        rec.delta_stable = true;
        break;
      }
      delta *= 0.5;
    }
    out.launches.push_back(rec);
  }

  bool clean = true;
  for (int di = 0; di < counted; ++di) {
    const LaunchRecord& rec = out.launches[di];
    if (!rec.resolved || !rec.delta_stable) {
      clean = false;
      continue;
    }
    if (rec.limit == to) out.parity ^= 1;
  }
  out.reliable = clean;
  out.exact = clean && k == 1;
  if (!clean)
    out.note = "some launches did not resolve stably; the parity is unreliable";
  else if (k >= 2)
    out.note = "heuristic: index >= 2 sources are sampled, not exhaustively tracked";
  return out;
}

}  // namespace acmorse
