#include "lqgcap/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <limits>
#include <sstream>
#include <thread>

#include "lqgcap/error.hpp"

namespace lqgcap {

namespace {

std::uint64_t mix64(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ULL;

}  // namespace

NormalStream::NormalStream(std::uint64_t seed, std::uint64_t index)
    : state_(mix64(seed + kGolden * (index + 1)) ^ mix64(index)) {}

std::uint64_t NormalStream::next_u64() {
  state_ += kGolden;
  return mix64(state_);
}

double NormalStream::next_symmetric() {
  // 53 random bits mapped to (0, 1), then to (−1, 1).
  const double u = (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
  return 2.0 * u - 1.0;
}

double NormalStream::next_normal() {
  if (has_spare_) {
    has_spare_ = false;
    return spare_;
  }
  double u, v, s;
  do {
    u = next_symmetric();
    v = next_symmetric();
    s = u * u + v * v;
  } while (s >= 1.0 || s == 0.0);
  const double f = std::sqrt(-2.0 * std::log(s) / s);
  spare_ = v * f;
  has_spare_ = true;
  return u * f;
}

namespace {

struct Accumulator {
  double cost = 0.0;
  VectorXd err_sum, psi_sum;
  MatrixXd err_outer, psi_outer, psi_lag, orth, obs;
  long long count = 0, lag_count = 0;
  double max_dither = 0.0;

  Accumulator(Eigen::Index k, Eigen::Index p)
      : err_sum(VectorXd::Zero(k)),
        psi_sum(VectorXd::Zero(p)),
        err_outer(MatrixXd::Zero(k, k)),
        psi_outer(MatrixXd::Zero(p, p)),
        psi_lag(MatrixXd::Zero(p, p)),
        orth(MatrixXd::Zero(k, k)),
        obs(MatrixXd::Zero(k, p)) {}
};

struct Plant {
  MatrixXd F, G, H, J, Q, R, K_p, K_Y, K_LQR, GammaBar, sqrt_M, sqrt_noise, sqrt_s1;
};

Accumulator run_trajectory(const Plant& pl, const SimConfig& cfg, std::uint64_t index) {
  const Eigen::Index k = pl.F.rows(), m = pl.G.cols(), p = pl.H.rows();
  NormalStream rng(cfg.seed, index);
  auto draw = [&](Eigen::Index n) {
    VectorXd z(n);
    for (Eigen::Index i = 0; i < n; ++i) z(i) = rng.next_normal();
    return z;
  };
  Accumulator acc(k, p);
  const int burn = cfg.effective_burn_in();
  VectorXd s = pl.sqrt_s1 * draw(k);
  VectorXd sh = VectorXd::Zero(k), shh = VectorXd::Zero(k), psi_prev = VectorXd::Zero(p);
  const MatrixXd a_obs = pl.F - pl.G * pl.K_LQR;
  for (int i = 1; i <= cfg.horizon; ++i) {
    const VectorXd mi = pl.sqrt_M * draw(m);
    const VectorXd noise = pl.sqrt_noise * draw(k + p);
    const VectorXd err = sh - shh;
    const VectorXd x = -pl.K_LQR * shh + pl.GammaBar * err + mi;
    const VectorXd y = pl.H * s + pl.J * x + noise.tail(p);
    const VectorXd e = y - pl.H * sh - pl.J * x;
    const VectorXd psi = y - pl.H * shh + pl.J * pl.K_LQR * shh;
    if (i > burn) {
      acc.cost += s.dot(pl.Q * s) + x.dot(pl.R * x);
      acc.err_sum += err;
      acc.err_outer += err * err.transpose();
      acc.psi_sum += psi;
      acc.psi_outer += psi * psi.transpose();
      acc.orth += (s - sh) * sh.transpose();
      ++acc.count;
      if (i - 1 > burn) {
        acc.psi_lag += psi * psi_prev.transpose();
        acc.obs += err * psi_prev.transpose();
        ++acc.lag_count;
      }
      acc.max_dither = std::max(acc.max_dither, mi.size() ? mi.cwiseAbs().maxCoeff() : 0.0);
    }
    s = pl.F * s + pl.G * x + noise.head(k);
    sh = pl.F * sh + pl.G * x + pl.K_p * e;
    shh = a_obs * shh + pl.K_Y * psi;
    psi_prev = psi;
    if (!s.allFinite() || s.norm() > 1e100 || !shh.allFinite()) {
      std::ostringstream os;
      os << "trajectory " << index << " diverged at step " << i;
      throw Error(ErrorCode::NumericalOverflow, os.str());
    }
  }
  return acc;
}

// Largest |mean| / SE over entries of per-trajectory averaged matrices.
double max_z(const std::vector<MatrixXd>& per) {
  const double n = static_cast<double>(per.size());
  if (per.size() < 2) return 0.0;
  MatrixXd mean = MatrixXd::Zero(per[0].rows(), per[0].cols());
  for (const MatrixXd& c : per) mean += c;
  mean /= n;
  MatrixXd var = MatrixXd::Zero(mean.rows(), mean.cols());
  for (const MatrixXd& c : per) var += (c - mean).cwiseAbs2();
  var /= (n - 1.0);
  double z = 0.0;
  for (Eigen::Index i = 0; i < mean.size(); ++i) {
    const double se = std::sqrt(var(i) / n);
    if (se > 0.0) z = std::max(z, std::abs(mean(i)) / se);
  }
  return z;
}

}  // namespace

SimReport simulate(const SystemModel& model, const CostWeights& weights, const Policy& policy,
                   const SimConfig& cfg) {
  if (cfg.trajectories < 1) throw Error(ErrorCode::InvalidArgument, "trajectories must be at least 1");
  const int burn = cfg.effective_burn_in();
  if (burn < 0 || cfg.horizon <= burn + 1) {
    throw Error(ErrorCode::InvalidArgument, "horizon must exceed burn_in + 1");
  }
  validate_model(model, weights).raise_if_invalid();
  const SystemModel sm = symmetrized(model);
  const CostWeights sw = symmetrized(weights);
  const EstimatorModel est = reduce_to_estimator(sm);
  const PolicyRiccatiSolution prs = solve_policy_riccati(est, policy);

  Plant pl;
  pl.F = sm.F;
  pl.G = sm.G;
  pl.H = sm.H;
  pl.J = sm.J;
  pl.Q = sw.Q;
  pl.R = sw.R;
  pl.K_p = est.K_p;
  pl.K_Y = prs.K_Y;
  pl.K_LQR = policy.K_LQR;
  pl.GammaBar = policy.GammaBar;
  pl.sqrt_M = psd_sqrt(clip_psd(symmetrize(policy.M)));
  const Eigen::Index k = sm.k(), p = sm.p();
  MatrixXd joint(k + p, k + p);
  joint << sm.W, sm.L, sm.L.transpose(), sm.V;
  pl.sqrt_noise = psd_sqrt(joint);
  pl.sqrt_s1 = psd_sqrt(symmetrize(sm.initial_covariance()));

  const int n_traj = cfg.trajectories;
  std::vector<Accumulator> accs(n_traj, Accumulator(k, p));
  const int jobs = std::clamp(cfg.jobs, 1, n_traj);
  std::vector<std::exception_ptr> failures(jobs);
  auto worker = [&](int w) {
    try {
      for (int t = w; t < n_traj; t += jobs) accs[t] = run_trajectory(pl, cfg, static_cast<std::uint64_t>(t));
    } catch (...) {
      failures[w] = std::current_exception();
    }
  };
  if (jobs == 1) {
    worker(0);
  } else {
    std::vector<std::thread> threads;
    for (int w = 0; w < jobs; ++w) threads.emplace_back(worker, w);
    for (std::thread& th : threads) th.join();
  }
  for (const std::exception_ptr& f : failures) {
    if (f) std::rethrow_exception(f);
  }

  // Ordered reduction over trajectories keeps results independent of jobs.
  Accumulator tot(k, p);
  std::vector<double> traj_cost;
  std::vector<MatrixXd> orth, obs;
  for (const Accumulator& a : accs) {
    tot.cost += a.cost;
    tot.err_sum += a.err_sum;
    tot.err_outer += a.err_outer;
    tot.psi_sum += a.psi_sum;
    tot.psi_outer += a.psi_outer;
    tot.psi_lag += a.psi_lag;
    tot.count += a.count;
    tot.lag_count += a.lag_count;
    tot.max_dither = std::max(tot.max_dither, a.max_dither);
    traj_cost.push_back(a.cost / static_cast<double>(a.count));
    orth.push_back(a.orth / static_cast<double>(a.count));
    obs.push_back(a.obs / static_cast<double>(a.lag_count));
  }

  SimReport r;
  const double cnt = static_cast<double>(tot.count);
  r.samples = tot.count;
  r.empirical_cost = tot.cost / cnt;
  if (n_traj > 1) {
    double var = 0.0;
    for (double c : traj_cost) var += (c - r.empirical_cost) * (c - r.empirical_cost);
    r.cost_se = std::sqrt(var / (n_traj - 1.0) / n_traj);
  }
  const VectorXd em = tot.err_sum / cnt, pm = tot.psi_sum / cnt;
  r.empirical_SigmaHat = symmetrize((tot.err_outer - cnt * em * em.transpose()) / (cnt - 1.0));
  r.empirical_PsiY = symmetrize((tot.psi_outer - cnt * pm * pm.transpose()) / (cnt - 1.0));
  r.empirical_rate = 0.5 * (logdet_pd(r.empirical_PsiY) - logdet_pd(est.Psi));
  const MatrixXd c1 = tot.psi_lag / static_cast<double>(tot.lag_count);
  const MatrixXd w = pinv(psd_sqrt(r.empirical_PsiY));
  r.innovation_whiteness = Eigen::JacobiSVD<MatrixXd>(w * c1 * w).singularValues()(0);
  r.whiteness_bound = 4.0 / std::sqrt(static_cast<double>(n_traj) * cfg.horizon);
  r.orthogonality_z = max_z(orth);
  // An error covariance at rounding level carries no orthogonality signal.
  const bool err_trivial = r.empirical_SigmaHat.trace() <= 1e-12 * (1.0 + r.empirical_PsiY.trace());
  r.observer_orthogonality_z = err_trivial ? 0.0 : max_z(obs);
  r.max_abs_dither = tot.max_dither;
  return r;
}

ComparisonVerdict compare_to_theory(const SimReport& report, const LBSolution& lb, const SimTolerances& tol) {
  ComparisonVerdict v;
  auto add = [&](std::string name, double emp, double theory, double error, double limit) {
    v.items.push_back({std::move(name), emp, theory, error, limit, error <= limit});
  };
  const double se = report.cost_se > 0.0 ? report.cost_se : std::numeric_limits<double>::min();
  add("cost", report.empirical_cost, lb.achieved_budget, std::abs(report.empirical_cost - lb.achieved_budget) / se,
      tol.cost_se);
  const MatrixXd& psi_y = lb.riccati.Psi_Y;
  add("Psi_Y", report.empirical_PsiY.norm(), psi_y.norm(), (report.empirical_PsiY - psi_y).norm() / psi_y.norm(),
      tol.psi_rel);
  const MatrixXd& sh = lb.riccati.SigmaHat;
  const double sh_err = (report.empirical_SigmaHat - sh).norm();
  if (sh.norm() > 1e-12 * (1.0 + psi_y.norm())) {
    add("SigmaHat", report.empirical_SigmaHat.norm(), sh.norm(), sh_err / sh.norm(), tol.sigma_rel);
  } else {
    add("SigmaHat", report.empirical_SigmaHat.norm(), sh.norm(), sh_err, 1e-6 * (1.0 + psi_y.norm()));
  }
  add("rate", report.empirical_rate, lb.rate, std::abs(report.empirical_rate - lb.rate),
      std::max(tol.rate_rel * std::abs(lb.rate), tol.rate_abs));
  add("whiteness", report.innovation_whiteness, 0.0, report.innovation_whiteness, report.whiteness_bound);
  add("orthogonality", report.orthogonality_z, 0.0, report.orthogonality_z, tol.orthogonality_z);
  add("observer_orthogonality", report.observer_orthogonality_z, 0.0, report.observer_orthogonality_z,
      tol.orthogonality_z);
  v.passed = std::all_of(v.items.begin(), v.items.end(), [](const ComparisonItem& i) { return i.passed; });
  return v;
}

}  // namespace lqgcap
