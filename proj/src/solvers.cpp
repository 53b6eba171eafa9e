#include "cqnp/solvers.hpp"

#include <chrono>
#include <cmath>
#include <limits>

#include "cqnp/linalg.hpp"
#include "cqnp/metric.hpp"

namespace cqnp {

std::string_view to_string(Method m) {
  switch (m) {
  case Method::cqnpm: return "cqnpm";
  case Method::apm: return "apm";
  case Method::s_cqnpm: return "s_cqnpm";
  case Method::s_apm: return "s_apm";
  }
  return "?";
}

std::string_view to_string(Formulation f) {
  return f == Formulation::analysis ? "analysis" : "synthesis";
}

std::string_view to_string(TvVariant v) { return v == TvVariant::iso ? "iso" : "l1"; }

Method parse_method(std::string_view s) {
  for (Method m : {Method::cqnpm, Method::apm, Method::s_cqnpm, Method::s_apm})
    if (s == to_string(m))
      return m;
  throw std::invalid_argument("unknown method: " + std::string(s));
}

Formulation parse_formulation(std::string_view s) {
  if (s == "analysis")
    return Formulation::analysis;
  if (s == "synthesis")
    return Formulation::synthesis;
  throw std::invalid_argument("unknown formulation: " + std::string(s));
}

TvVariant parse_tv_variant(std::string_view s) {
  if (s == "iso")
    return TvVariant::iso;
  if (s == "l1")
    return TvVariant::l1;
  throw std::invalid_argument("unknown tv_variant: " + std::string(s));
}

void validate(SolverConfig const &c) {
  auto require = [](bool ok, char const *msg) {
    if (!ok)
      throw std::invalid_argument(msg);
  };
  require(c.lambda >= 0.0 && std::isfinite(c.lambda), "SolverConfig: lambda must be >= 0");
  require(c.alpha >= 0.0 && c.alpha <= 1.0, "SolverConfig: alpha must lie in [0, 1]");
  require(c.eta > 0.0, "SolverConfig: eta must be positive");
  require(c.gamma > 1.0, "SolverConfig: gamma must exceed 1");
  require(c.xi > 0.0, "SolverConfig: xi must be positive");
  require(c.step > 0.0, "SolverConfig: a_k must be positive");
  require(c.outer_iters >= 1, "SolverConfig: outer_iters must be positive");
  require(c.wpm_max_iter >= 1, "SolverConfig: wpm_max_iter must be positive");
  require(c.wpm_tol > 0.0, "SolverConfig: wpm_tol must be positive");
  require(c.backtracking.rho > 0.0 && c.backtracking.rho < 1.0,
          "SolverConfig: backtracking rho must lie in (0, 1)");
  require(c.power_iters >= 1 && c.lipschitz_safety >= 1.0,
          "SolverConfig: invalid power iteration settings");
  if (c.formulation == Formulation::synthesis) {
    require(c.alpha == 1.0, "SolverConfig: the synthesis formulation requires alpha = 1");
    require(c.method == Method::cqnpm || c.method == Method::apm,
            "SolverConfig: partial smoothing runs in the analysis formulation only");
  }
}

double cost(ForwardModel const &model, ComplexImage const &img, KSpaceData const &data,
            double lambda, double alpha, TvVariant tv_variant, WaveletSpec const &wavelet) {
  if (data.size() != model.data_size())
    throw std::invalid_argument("cost: data length must equal M * L");
  double const fidelity = 0.5 * (model.forward(img).samples - data.samples).squaredNorm();
  double reg = 0.0;
  if (alpha != 0.0)
    reg += alpha * wavelet_forward(img, wavelet).cwiseAbs().sum();
  if (alpha != 1.0)
    reg += (1.0 - alpha) * tv_value(img, tv_variant);
  return fidelity + lambda * reg;
}

double psnr(ComplexImage const &reference, ComplexImage const &estimate) {
  if (reference.dims() != estimate.dims())
    throw std::invalid_argument("psnr: image dimensions differ");
  double const err = (estimate.data().cwiseAbs() - reference.data().cwiseAbs()).squaredNorm();
  if (err == 0.0)
    return kPsnrCap;
  double const value = 10.0 * std::log10(static_cast<double>(reference.size()) / err);
  return std::min(value, kPsnrCap);
}

double estimate_lipschitz(ForwardModel const &model, int iterations) {
  std::mt19937_64 rng(0x5eed);
  Dims const d = model.dims();
  auto const gram = [&](CVec const &x) { return model.normal(ComplexImage(d, x)).data(); };
  return power_iteration(gram, random_cvec(d.size(), rng), iterations);
}

namespace {

using Clock = std::chrono::steady_clock;

// Smooth part of the objective in the optimization variable: the image in the
// analysis formulation, wavelet coefficients in the synthesis formulation.
// With smoothing enabled it also carries lambda alpha sum sqrt(|Tx|^2 + eta).
class SmoothPart {
public:
  SmoothPart(ForwardModel const &model, KSpaceData const &data, SolverConfig const &config,
             bool smoothed)
      : model_(model), data_(data), config_(config),
        smoothing_weight_(smoothed ? config.lambda * config.alpha : 0.0) {}

  bool synthesis() const { return config_.formulation == Formulation::synthesis; }
  Dims dims() const { return model_.dims(); }

  ComplexImage image(CVec const &var) const {
    if (synthesis())
      return wavelet_adjoint(var, config_.wavelet, dims());
    return ComplexImage(dims(), var);
  }

  CVec to_var(ComplexImage const &img) const {
    return synthesis() ? wavelet_forward(img, config_.wavelet) : img.data();
  }

  CVec measure(CVec const &var) const { return model_.forward(image(var)).samples; }

  double value(CVec const &var, CVec const &measured) const {
    double v = 0.5 * (measured - data_.samples).squaredNorm();
    if (smoothing_weight_ != 0.0)
      v += smoothing_weight_ * smoothed_l1(transform(var), config_.eta).value;
    return v;
  }

  CVec gradient(CVec const &var, CVec const &measured) const {
    ComplexImage back = model_.adjoint(KSpaceData{measured - data_.samples});
    CVec g = synthesis() ? wavelet_forward(back, config_.wavelet) : std::move(back.data());
    if (smoothing_weight_ != 0.0) {
      auto const s = smoothed_l1(transform(var), config_.eta);
      g += smoothing_weight_ * wavelet_adjoint(s.grad, config_.wavelet, dims()).data();
    }
    return g;
  }

  /// Unsmoothed objective at var given measured = A x.
  double cost(CVec const &var, CVec const &measured) const {
    ComplexImage const img = image(var);
    double reg = 0.0;
    if (config_.alpha != 0.0)
      reg += config_.alpha * wavelet_forward(img, config_.wavelet).cwiseAbs().sum();
    if (config_.alpha != 1.0)
      reg += (1.0 - config_.alpha) * tv_value(img, config_.tv_variant);
    return 0.5 * (measured - data_.samples).squaredNorm() + config_.lambda * reg;
  }

private:
  CVec transform(CVec const &var) const {
    return wavelet_forward(ComplexImage(dims(), var), config_.wavelet);
  }

  ForwardModel const &model_;
  KSpaceData const &data_;
  SolverConfig const &config_;
  double smoothing_weight_;
};

// Weighted proximal step for the nonsmooth part, carrying the dual warm start.
class ProxPart {
public:
  ProxPart(SolverConfig const &config, Dims dims, bool smoothed)
      : config_(config), dims_(dims),
        lambda_h_(smoothed ? config.lambda * (1.0 - config.alpha) : config.lambda),
        alpha_h_(smoothed ? 0.0 : config.alpha) {}

  struct Out {
    CVec x;
    int inner = 0;
  };

  /// prox^B_{scale * lambda_h * h}(v); `warm` is read and updated.
  Out operator()(CVec const &v, Rank1Metric const &metric, double scale,
                 std::optional<DualTriple> &warm) const {
    double const lambda_bar = scale * lambda_h_;
    if (config_.formulation == Formulation::synthesis) {
      if (lambda_bar == 0.0)
        return {v, 0};
      auto r = solve_rank1_root(v, metric, lambda_bar);
      return {std::move(r.x), r.iterations};
    }
    WpmProblem const problem{v,         metric, lambda_bar, alpha_h_, config_.tv_variant,
                             config_.wavelet, dims_};
    WpmSettings const settings{config_.wpm_max_iter, config_.wpm_tol, warm};
    auto r = solve_dual_fista(problem, settings);
    warm = std::move(r.triple);
    return {std::move(r.x), r.iterations};
  }

private:
  SolverConfig const &config_;
  Dims dims_;
  double lambda_h_;
  double alpha_h_;
};

class Recorder {
public:
  Recorder(SmoothPart const &smooth, SolveOptions const &options)
      : smooth_(smooth), options_(options), start_(Clock::now()) {}

  void record(int iter, CVec const &var, CVec const &measured, int inner) {
    double const seconds = std::chrono::duration<double>(Clock::now() - start_).count();
    ComplexImage const img = smooth_.image(var);
    double const p = options_.reference ? psnr(*options_.reference, img)
                                        : std::numeric_limits<double>::quiet_NaN();
    records_.push_back({iter, seconds, smooth_.cost(var, measured), p, inner});
    if (options_.on_iterate)
      options_.on_iterate(iter, img);
  }

  std::vector<IterationRecord> take() { return std::move(records_); }

private:
  SmoothPart const &smooth_;
  SolveOptions const &options_;
  Clock::time_point start_;
  std::vector<IterationRecord> records_;
};

CVec initial_var(ForwardModel const &model, KSpaceData const &data, SmoothPart const &smooth,
                 SolveOptions const &options) {
  if (options.initial) {
    if (options.initial->dims() != model.dims())
      throw std::invalid_argument("SolveOptions: initial image dims do not match the model");
    return smooth.to_var(*options.initial);
  }
  return smooth.to_var(model.adjoint(data));
}

void check_inputs(ForwardModel const &model, KSpaceData const &data, SolverConfig const &config) {
  validate(config);
  if (data.size() != model.data_size())
    throw std::invalid_argument("solver: data length must equal M * L");
  if (config.alpha != 0.0 || config.formulation == Formulation::synthesis)
    validate(config.wavelet, model.dims());
}

// Variable-metric proximal loop without momentum:
//   x_{k+1} = prox^{B_k}_{a lambda h}(x_k - a B_k^{-1} grad f(x_k)).
SolveResult variable_metric_loop(ForwardModel const &model, KSpaceData const &data,
                                 SolverConfig const &config, SolveOptions const &options,
                                 bool smoothed) {
  check_inputs(model, data, config);
  SmoothPart const smooth(model, data, config, smoothed);
  ProxPart const prox(config, model.dims(), smoothed);
  Recorder recorder(smooth, options);
  SR1Settings const sr1{config.gamma, config.xi, 1e-8};

  CVec x = initial_var(model, data, smooth, options);
  CVec measured = smooth.measure(x);
  CVec grad = smooth.gradient(x, measured);
  recorder.record(0, x, measured, 0);

  std::optional<DualTriple> warm;
  CVec x_prev;
  CVec grad_prev;
  for (int k = 1; k <= config.outer_iters; ++k) {
    Rank1Metric const metric = (k == 1 || !config.sr1)
                                   ? Rank1Metric::scaled_identity(x.size(), config.xi)
                                   : sr1_update(x - x_prev, grad - grad_prev, sr1);
    CVec const v = x - config.step * metric.apply_inverse(grad);
    auto step = prox(v, metric, config.step, warm);
    x_prev = std::move(x);
    grad_prev = std::move(grad);
    x = std::move(step.x);
    measured = smooth.measure(x);
    grad = smooth.gradient(x, measured);
    recorder.record(k, x, measured, step.inner);
  }
  return {smooth.image(x), recorder.take()};
}

// FISTA outer loop. With backtracking the step starts at 1/L and shrinks by rho
// until f(x+) <= f(y) + Re<grad f(y), x+ - y> + ||x+ - y||^2 / (2 t).
SolveResult accelerated_loop(ForwardModel const &model, KSpaceData const &data,
                             SolverConfig const &config, SolveOptions const &options,
                             bool smoothed, bool backtracking) {
  check_inputs(model, data, config);
  SmoothPart const smooth(model, data, config, smoothed);
  ProxPart const prox(config, model.dims(), smoothed);
  Recorder recorder(smooth, options);

  double const lipschitz = config.lipschitz_safety * estimate_lipschitz(model, config.power_iters);
  if (!(lipschitz > 0.0))
    throw std::runtime_error("accelerated solver: A^H A has a zero Lipschitz estimate");
  double step = 1.0 / lipschitz;

  CVec x = initial_var(model, data, smooth, options);
  CVec measured_x = smooth.measure(x);
  recorder.record(0, x, measured_x, 0);
  auto const identity = Rank1Metric::scaled_identity(x.size(), 1.0);

  CVec y = x;
  CVec measured_y = measured_x;
  std::optional<DualTriple> warm;
  double t = 1.0;
  for (int k = 1; k <= config.outer_iters; ++k) {
    CVec const grad = smooth.gradient(y, measured_y);
    ProxPart::Out next;
    CVec measured_next;
    if (!backtracking) {
      next = prox(y - step * grad, identity, step, warm);
      measured_next = smooth.measure(next.x);
    } else {
      double const f_y = smooth.value(y, measured_y);
      int halvings = 0;
      while (true) {
        std::optional<DualTriple> trial_warm = warm;
        next = prox(y - step * grad, identity, step, trial_warm);
        measured_next = smooth.measure(next.x);
        CVec const d = next.x - y;
        double const model_value =
            f_y + inner(grad, d).real() + d.squaredNorm() / (2.0 * step);
        double const slack = 1e-12 * (std::abs(f_y) + 1.0);
        if (smooth.value(next.x, measured_next) <= model_value + slack) {
          warm = std::move(trial_warm);
          break;
        }
        if (++halvings > config.backtracking.max_halvings)
          throw StepFailure("accelerated solver: backtracking exhausted its step reductions");
        step *= config.backtracking.rho;
      }
    }
    double const t_next = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * t * t));
    double const beta = (t - 1.0) / t_next;
    // A is linear, so A y follows from A x without another forward pass.
    y = next.x + beta * (next.x - x);
    measured_y = measured_next + beta * (measured_next - measured_x);
    x = std::move(next.x);
    measured_x = std::move(measured_next);
    t = t_next;
    recorder.record(k, x, measured_x, next.inner);
  }
  return {smooth.image(x), recorder.take()};
}

} // namespace

SolveResult run_cqnpm(ForwardModel const &model, KSpaceData const &data,
                      SolverConfig const &config, SolveOptions const &options) {
  if (config.method != Method::cqnpm)
    throw std::invalid_argument("run_cqnpm: config.method must be cqnpm");
  return variable_metric_loop(model, data, config, options, false);
}

SolveResult run_apm(ForwardModel const &model, KSpaceData const &data, SolverConfig const &config,
                    SolveOptions const &options) {
  if (config.method != Method::apm)
    throw std::invalid_argument("run_apm: config.method must be apm");
  return accelerated_loop(model, data, config, options, false, false);
}

SolveResult run_partial_smoothing(ForwardModel const &model, KSpaceData const &data,
                                  SolverConfig const &config, SolveOptions const &options) {
  switch (config.method) {
  case Method::s_cqnpm: return variable_metric_loop(model, data, config, options, true);
  case Method::s_apm: return accelerated_loop(model, data, config, options, true, true);
  default: throw std::invalid_argument("run_partial_smoothing: method must be s_cqnpm or s_apm");
  }
}

SolveResult solve(ForwardModel const &model, KSpaceData const &data, SolverConfig const &config,
                  SolveOptions const &options) {
  switch (config.method) {
  case Method::cqnpm: return run_cqnpm(model, data, config, options);
  case Method::apm: return run_apm(model, data, config, options);
  default: return run_partial_smoothing(model, data, config, options);
  }
}

} // namespace cqnp
