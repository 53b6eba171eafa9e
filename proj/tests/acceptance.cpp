// Acceptance suite: prints one PASS/FAIL line per criterion and exits nonzero
// if any criterion fails. Pass criterion numbers as arguments to run a subset.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "cqnp/bench.hpp"
#include "cqnp/linalg.hpp"
#include "support.hpp"

using namespace cqnp;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(char const *format, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, format, args...);
  return buf;
}

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

// The bundled desk-scale problem: 64 x 64 phantom, radial 16 x 64, 2 coils,
// noise variance 1e-2.
ExperimentConfig bundled(std::uint64_t seed = 1) {
  ExperimentConfig c;
  c.size = 64;
  c.trajectory = TrajectoryKind::radial;
  c.spokes = 16;
  c.readout = 64;
  c.coils = 2;
  c.noise_var = 1e-2;
  c.seed = seed;
  c.lambda = 5e-4;
  c.alpha = 1.0;
  return c;
}

// The wavelet + TV variant of the bundled problem.
ExperimentConfig bundled_mixed() {
  ExperimentConfig c = bundled();
  c.lambda = 6e-4;
  c.alpha = 1.0 / 6.0;
  c.outer_iters = 30;
  return c;
}

std::vector<double> costs(std::vector<IterationRecord> const &records) {
  std::vector<double> out;
  for (auto const &r : records)
    out.push_back(r.cost);
  return out;
}

std::vector<double> run_costs(Simulation const &sim, ExperimentConfig const &c, Method m) {
  return costs(solve(sim.model, sim.data, solver_config(c, m)).records);
}

// Largest relative increase cost[k+1] / cost[k] - 1 over k >= first.
double worst_increase(std::vector<double> const &c, std::size_t first) {
  double worst = 0.0;
  for (std::size_t k = first; k + 1 < c.size(); ++k)
    worst = std::max(worst, c[k + 1] / c[k] - 1.0);
  return worst;
}

Outcome adjoint_identities() {
  auto const t0 = Clock::now();
  std::mt19937_64 rng(101);
  Dims const d{32, 32};
  auto const traj = make_radial_trajectory(8, 32);
  ForwardModel const model(traj, make_sensitivities(32, 2));
  WaveletSpec const spec{WaveletFamily::haar, 5};
  double worst[4] = {0, 0, 0, 0};
  auto const record = [&](int op, Cx lhs, Cx rhs, double scale) {
    worst[op] = std::max(worst[op], std::abs(lhs - rhs) / scale);
  };
  for (int trial = 0; trial < 100; ++trial) {
    ComplexImage const x = test::random_image(d, rng);
    double const nx = x.data().norm();

    CVec const s = random_cvec(traj.size(), rng);
    record(0, inner(nudft_forward(x, traj), s), inner(x.data(), nudft_adjoint(s, traj, d).data()),
           nx * s.norm());

    CVec const y = random_cvec(model.data_size(), rng);
    record(1, inner(model.forward(x).samples, y), inner(x.data(), model.adjoint({y}).data()),
           nx * y.norm());

    CVec const t = random_cvec(d.size(), rng);
    record(2, inner(wavelet_forward(x, spec), t),
           inner(x.data(), wavelet_adjoint(t, spec, d).data()), nx * t.norm());

    DualPair const p = test::random_pair(d, rng);
    record(3, inner(L_apply(p).data(), x.data()), test::pair_inner(p, L_adjoint(x)),
           nx * std::sqrt(p.squared_norm()));
  }
  double const elapsed = seconds_since(t0);
  double const max_err = *std::max_element(worst, worst + 4);
  return {max_err <= 1e-10 && elapsed < 60.0,
          fmt("max relative gap F %.1e, A %.1e, T %.1e, L %.1e (limit 1e-10); %.1f s (limit 60 s)",
              worst[0], worst[1], worst[2], worst[3], elapsed)};
}

Outcome wavelet_left_inverse() {
  std::mt19937_64 rng(102);
  WaveletSpec const spec{WaveletFamily::haar, 5};
  double worst = 0.0;
  for (int trial = 0; trial < 100; ++trial) {
    ComplexImage const x = test::random_image({64, 64}, rng);
    ComplexImage const back = wavelet_adjoint(wavelet_forward(x, spec), spec, x.dims());
    worst = std::max(worst, (back.data() - x.data()).norm() / x.data().norm());
  }
  return {worst <= 1e-12, fmt("max ||T^H T x - x|| / ||x|| = %.2e over 100 images (limit 1e-12)", worst)};
}

Outcome l_operator_norm() {
  std::mt19937_64 rng(103);
  Dims const d{64, 64};
  auto const op = [&](CVec const &v) { return L_apply(L_adjoint(ComplexImage(d, v))).data(); };
  double const estimate = power_iteration(op, random_cvec(d.size(), rng), 500);
  return {estimate >= 7.5 && estimate <= 8.0 + 1e-6,
          fmt("power-iteration ||L||^2 = %.9f (required in [7.5, 8 + 1e-6])", estimate)};
}

Outcome sr1_properties() {
  auto const t0 = Clock::now();
  std::mt19937_64 rng(104);
  double worst_secant = 0.0;
  double worst_eig = 0.0;
  int kept = 0;
  int not_pd = 0;
  for (int trial = 0; trial < 1000; ++trial) {
    auto const g = test::random_hermitian(16, 0.0, 10.0, rng);
    CVec const s = random_cvec(16, rng);
    CVec const m = g * s;
    double const gamma = test::uniform(rng, 1.05, 3.0);
    Rank1Metric const b = sr1_update(s, m, SR1Settings{gamma, 1.0, 1e-8});
    if (b.sign() != 0) {
      ++kept;
      worst_secant = std::max(worst_secant, (b.apply(s) - m).norm() / m.norm());
    }
    if (!b.positive_definite()) {
      ++not_pd;
      continue;
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> eig(b.dense(), Eigen::EigenvaluesOnly);
    worst_eig = std::max(worst_eig, std::abs(b.min_eigenvalue() - eig.eigenvalues().minCoeff()));
  }
  double const elapsed = seconds_since(t0);
  bool const pass = worst_secant <= 1e-10 && worst_eig <= 1e-8 && not_pd == 0 && elapsed < 30.0;
  return {pass, fmt("secant rel err %.1e over %d rank-1 updates (limit 1e-10); |sigma_min - dense| "
                    "%.1e (limit 1e-8); %d not PD; %.1f s (limit 30 s)",
                    worst_secant, kept, worst_eig, not_pd, elapsed)};
}

Outcome wpm_oracle() {
  auto const t0 = Clock::now();
  std::mt19937_64 rng(105);
  Dims const d{8, 8};
  int const levels = 3;
  double worst_obj = 0.0;
  double worst_paths = 0.0;
  int instances = 0;
  double const alphas[] = {0.0, 0.5, 1.0};
  TvVariant const variants[] = {TvVariant::iso, TvVariant::l1};
  for (int trial = 0; trial < 50; ++trial) {
    double const alpha = alphas[trial % 3];
    TvVariant const variant = variants[(trial / 3) % 2];
    WpmProblem const p{random_cvec(64, rng), test::random_sr1_metric(64, rng),
                       test::uniform(rng, 0.05, 0.3), alpha, variant,
                       WaveletSpec{WaveletFamily::haar, levels}, d};
    auto const fista = solve_dual_fista(p, {2000, 1e-10, std::nullopt});
    auto const reg = test::wpm_regularizer(d, levels, alpha, variant);
    Eigen::MatrixXcd const b = p.metric.dense();
    CVec const oracle = test::admm_wpm(b, p.v, p.lambda_bar, reg, 30000);
    double const ours = test::primal_objective(b, p.v, p.lambda_bar, reg, fista.x);
    double const best = test::primal_objective(b, p.v, p.lambda_bar, reg, oracle);
    worst_obj = std::max(worst_obj, std::abs(ours - best) / std::abs(best));
    ++instances;

    if (alpha == 1.0) {
      WaveletSpec const spec = p.wavelet;
      Rank1Metric const coeff_metric(64, p.metric.tau(), p.metric.sign(),
                                     wavelet_forward(ComplexImage(d, p.metric.u_tilde()), spec));
      auto const root =
          solve_rank1_root(wavelet_forward(ComplexImage(d, p.v), spec), coeff_metric, p.lambda_bar);
      CVec const x = wavelet_adjoint(root.x, spec, d).data();
      worst_paths = std::max(worst_paths, (x - fista.x).cwiseAbs().maxCoeff());
    }
  }
  double const elapsed = seconds_since(t0);
  return {worst_obj <= 1e-6 && worst_paths <= 1e-6 && elapsed < 300.0,
          fmt("%d instances: max relative objective gap to ADMM oracle %.1e (limit 1e-6); root vs "
              "dual FISTA max abs diff %.1e (limit 1e-6); %.1f s (limit 300 s)",
              instances, worst_obj, worst_paths, elapsed)};
}

Outcome dual_gradient_fd() {
  std::mt19937_64 rng(106);
  Dims const d{8, 8};
  double worst = 0.0;
  double const alphas[] = {0.0, 0.3, 0.5, 1.0};
  for (int trial = 0; trial < 20; ++trial) {
    double const alpha = alphas[trial % 4];
    WpmProblem const p{random_cvec(64, rng), test::random_sr1_metric(64, rng),
                       test::uniform(rng, 0.05, 0.5), alpha,
                       trial % 2 ? TvVariant::l1 : TvVariant::iso,
                       WaveletSpec{WaveletFamily::haar, 2}, d};
    DualTriple base = zero_triple(p);
    if (p.uses_wavelet())
      base.z = random_cvec(64, rng);
    if (p.uses_tv())
      base.pair = test::random_pair(d, rng);
    DualTriple const g = dual_gradient(p, base);

    // Full central-difference gradient over the real and imaginary parts.
    auto const value = [&](DualTriple const &t) {
      CVec const w = w_of(p, t);
      return inner(p.metric.apply(w), w).real();
    };
    double const h = 1e-6;
    double err_sq = 0.0;
    double norm_sq = 0.0;
    auto const probe = [&](Cx &slot, Cx analytic) {
      Cx const saved = slot;
      double parts[2];
      for (int part = 0; part < 2; ++part) {
        Cx const step = part == 0 ? Cx{h, 0.0} : Cx{0.0, h};
        slot = saved + step;
        double const up = value(base);
        slot = saved - step;
        double const down = value(base);
        parts[part] = (up - down) / (2.0 * h);
      }
      slot = saved;
      err_sq += std::norm(Cx{parts[0], parts[1]} - analytic);
      norm_sq += std::norm(analytic);
    };
    for (Index n = 0; n < base.z.size(); ++n)
      probe(base.z[n], g.z[n]);
    for (Index n = 0; n < base.pair.P.size(); ++n)
      probe(base.pair.P.data()[n], g.pair.P.data()[n]);
    for (Index n = 0; n < base.pair.Q.size(); ++n)
      probe(base.pair.Q.data()[n], g.pair.Q.data()[n]);
    worst = std::max(worst, std::sqrt(err_sq / norm_sq));
  }
  return {worst <= 1e-5, fmt("max relative error of the full gradient over 20 instances %.1e (limit 1e-5)", worst)};
}

Outcome convergence_trend() {
  auto const t0 = Clock::now();
  int wins = 0;
  bool all_close = true;
  std::string per_seed;
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    ExperimentConfig c = bundled(seed);
    auto const sim = simulate(c);
    c.outer_iters = 100;
    auto const cq = run_costs(sim, c, Method::cqnpm);
    auto const apm = run_costs(sim, c, Method::apm);
    c.outer_iters = 500;
    double const reference = run_costs(sim, c, Method::apm).back();
    if (cq[16] <= apm[16])
      ++wins;
    double const cq_best = *std::min_element(cq.begin(), cq.end());
    double const apm_best = *std::min_element(apm.begin(), apm.end());
    double const cq_gap = (cq_best - reference) / reference;
    double const apm_gap = (apm_best - reference) / reference;
    all_close = all_close && std::abs(cq_gap) <= 0.01 && std::abs(apm_gap) <= 0.01;
    per_seed += fmt(" [seed %d: k16 cqnpm %.4f apm %.4f; ref %.4f, gap@100 cqnpm %+.2f%% apm %+.2f%%]",
                    static_cast<int>(seed), cq[16], apm[16], reference, 100 * cq_gap, 100 * apm_gap);
  }
  double const elapsed = seconds_since(t0);
  bool const pass = wins >= 4 && all_close && elapsed < 600.0;
  return {pass, fmt("(a) CQNPM <= APM at iteration 16 on %d/5 seeds (need 4); (b) all within 1%% of "
                    "the 500-iteration APM cost by iteration 100: %s; %.0f s (limit 600 s);",
                    wins, all_close ? "yes" : "no", elapsed) +
                    per_seed};
}

Outcome partial_smoothing() {
  double const eta = 1e-5;
  ExperimentConfig const c = bundled_mixed();
  auto const sim = simulate(c);
  WaveletSpec const spec = solver_config(c, Method::cqnpm).wavelet;
  Index const n = sim.truth.size();

  // Surrogate gap on the phantom, the adjoint image, random images and the
  // S-CQNPM iterates.
  std::vector<ComplexImage> images{sim.truth, sim.model.adjoint(sim.data)};
  std::mt19937_64 rng(108);
  for (int i = 0; i < 20; ++i)
    images.push_back(test::random_image(sim.truth.dims(), rng));
  SolveOptions options;
  options.on_iterate = [&](int, ComplexImage const &img) { images.push_back(img); };
  auto const smoothed = solve(sim.model, sim.data, solver_config(c, Method::s_cqnpm), options);
  double worst_gap = 0.0;
  for (auto const &img : images) {
    CVec const t = wavelet_forward(img, spec);
    worst_gap = std::max(worst_gap, std::abs(smoothed_l1(t, eta).value - t.cwiseAbs().sum()));
  }
  double const bound = n * std::sqrt(eta);

  double const s_final = smoothed.records.back().cost;
  double const q_final = run_costs(sim, c, Method::cqnpm).back();
  double const rel = std::abs(s_final - q_final) / q_final;
  return {worst_gap <= bound && rel <= 0.02,
          fmt("max |S^eta - l1| = %.4f over %zu images (bound N sqrt(eta) = %.4f); S-CQNPM %.5f vs "
              "CQNPM %.5f after 30 iterations, %.2f%% apart (limit 2%%)",
              worst_gap, images.size(), bound, s_final, q_final, 100 * rel)};
}

Outcome robustness() {
  ExperimentConfig const base = bundled_mixed();
  auto const sim = simulate(base);
  double const slack = 1e-12;
  std::string detail;
  bool monotone = true;

  std::vector<double> gamma_finals;
  for (double gamma : {1.25, 1.7, 2.0, 3.0}) {
    ExperimentConfig c = base;
    c.gamma = gamma;
    auto const cs = run_costs(sim, c, Method::cqnpm);
    double const worst = worst_increase(cs, 3);
    monotone = monotone && worst <= slack;
    gamma_finals.push_back(cs.back());
    detail += fmt(" [gamma %.2f: final %.4f, worst rise after k=3 %.2f%%]", gamma, cs.back(), 100 * worst);
  }
  std::vector<double> iter_finals;
  for (int max_iter : {1, 5, 10, 20, 50}) {
    ExperimentConfig c = base;
    c.wpm_max_iter = max_iter;
    auto const cs = run_costs(sim, c, Method::cqnpm);
    double const worst = worst_increase(cs, 3);
    monotone = monotone && worst <= slack;
    if (max_iter >= 10)
      iter_finals.push_back(cs.back());
    detail += fmt(" [Max_Iter %d: final %.4f, worst rise after k=3 %.2f%%]", max_iter, cs.back(), 100 * worst);
  }
  auto const spread = [](std::vector<double> const &v) {
    auto const [lo, hi] = std::minmax_element(v.begin(), v.end());
    return (*hi - *lo) / *lo;
  };
  double const gamma_spread = spread(gamma_finals);
  double const iter_spread = spread(iter_finals);
  bool const pass = monotone && gamma_spread <= 0.05 && iter_spread <= 0.05;
  return {pass, fmt("monotone after iteration 3: %s; final-cost spread gamma %.2f%%, Max_Iter>=10 "
                    "%.2f%% (limit 5%% each);",
                    monotone ? "yes" : "no", 100 * gamma_spread, 100 * iter_spread) +
                    detail};
}

std::string slurp(fs::path const &p) {
  std::ifstream is(p, std::ios::binary);
  std::stringstream ss;
  ss << is.rdbuf();
  return ss.str();
}

std::string drop_time_column(std::string const &csv) {
  std::istringstream is(csv);
  std::string line;
  std::string out;
  while (std::getline(is, line)) {
    auto const a = line.find(',');
    auto const b = line.find(',', a + 1);
    out += line.substr(0, a) + line.substr(b) + '\n';
  }
  return out;
}

Outcome determinism() {
  ExperimentConfig c = bundled_mixed();
  c.outer_iters = 10;
  c.methods = {Method::cqnpm, Method::apm, Method::s_cqnpm, Method::s_apm};
  fs::path const root = fs::temp_directory_path() / "cqnp_acceptance_determinism";
  fs::remove_all(root);
  run_experiment(c, root / "a");
  run_experiment(c, root / "b");
  int compared = 0;
  bool identical = true;
  for (Method m : c.methods) {
    std::string const name(to_string(m));
    identical = identical && drop_time_column(slurp(root / "a" / (name + ".csv"))) ==
                                 drop_time_column(slurp(root / "b" / (name + ".csv")));
    identical = identical && slurp(root / "a" / (name + ".img")) == slurp(root / "b" / (name + ".img"));
    ++compared;
  }
  fs::remove_all(root);
  return {identical, fmt("%d methods: CSVs (time column excluded) and final images %s", compared,
                         identical ? "byte-identical" : "differ")};
}

} // namespace

int main(int argc, char **argv) {
  std::vector<std::pair<std::string, std::function<Outcome()>>> const criteria{
      {"adjoint identities", adjoint_identities},
      {"wavelet left-invertibility", wavelet_left_inverse},
      {"difference operator norm", l_operator_norm},
      {"SR1 secant and smallest eigenvalue", sr1_properties},
      {"weighted prox against primal oracle", wpm_oracle},
      {"dual gradient vs finite differences", dual_gradient_fd},
      {"convergence trend", convergence_trend},
      {"partial smoothing fidelity", partial_smoothing},
      {"robustness sweeps", robustness},
      {"determinism", determinism},
  };
  std::set<int> selected;
  for (int i = 1; i < argc; ++i)
    selected.insert(std::atoi(argv[i]));

  int failures = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    int const number = static_cast<int>(i) + 1;
    if (!selected.empty() && !selected.count(number))
      continue;
    Outcome outcome;
    try {
      outcome = criteria[i].second();
    } catch (std::exception const &e) {
      outcome = {false, std::string("exception: ") + e.what()};
    }
    failures += outcome.pass ? 0 : 1;
    std::printf("%s %2d %s: %s\n", outcome.pass ? "PASS" : "FAIL", number, criteria[i].first.c_str(),
                outcome.detail.c_str());
    std::fflush(stdout);
  }
  return failures == 0 ? 0 : 1;
}
