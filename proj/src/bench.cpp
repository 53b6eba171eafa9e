#include "cqnp/bench.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <limits>
#include <fstream>
#include <numbers>
#include <random>
#include <sstream>

namespace cqnp {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr std::array<char, 8> kImageMagic{'C', 'Q', 'N', 'P', 'I', 'M', 'G', '1'};

std::string_view trim(std::string_view s) {
  auto const first = s.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos)
    return {};
  auto const last = s.find_last_not_of(" \t\r\n");
  return s.substr(first, last - first + 1);
}

std::string format_double(double v) {
  std::array<char, 64> buf{};
  auto const r = std::to_chars(buf.data(), buf.data() + buf.size(), v);
  return {buf.data(), r.ptr};
}

double parse_double(std::string_view key, std::string_view text) {
  double v = 0.0;
  auto const r = std::from_chars(text.data(), text.data() + text.size(), v);
  if (r.ec != std::errc{} || r.ptr != text.data() + text.size() || !std::isfinite(v))
    throw ConfigError("config: '" + std::string(key) + "' expects a number, got '" +
                      std::string(text) + "'");
  return v;
}

template <class Int>
Int parse_int(std::string_view key, std::string_view text) {
  Int v{};
  auto const r = std::from_chars(text.data(), text.data() + text.size(), v);
  if (r.ec != std::errc{} || r.ptr != text.data() + text.size())
    throw ConfigError("config: '" + std::string(key) + "' expects an integer, got '" +
                      std::string(text) + "'");
  return v;
}

template <class T>
T parse_enum(std::string_view key, std::string_view text, T (*parse)(std::string_view)) {
  try {
    return parse(text);
  } catch (std::invalid_argument const &e) {
    throw ConfigError("config: '" + std::string(key) + "': " + e.what());
  }
}

TrajectoryKind parse_trajectory(std::string_view s) {
  if (s == "radial")
    return TrajectoryKind::radial;
  if (s == "spiral")
    return TrajectoryKind::spiral;
  throw std::invalid_argument("unknown trajectory: " + std::string(s));
}

std::string_view to_string(TrajectoryKind k) {
  return k == TrajectoryKind::radial ? "radial" : "spiral";
}

void put_le(std::ostream &os, std::uint32_t v) {
  std::array<char, 4> b{};
  for (int i = 0; i < 4; ++i)
    b[static_cast<std::size_t>(i)] = static_cast<char>((v >> (8 * i)) & 0xffu);
  os.write(b.data(), 4);
}

std::uint32_t get_le32(std::istream &is) {
  std::array<unsigned char, 4> b{};
  is.read(reinterpret_cast<char *>(b.data()), 4);
  std::uint32_t v = 0;
  for (int i = 0; i < 4; ++i)
    v |= static_cast<std::uint32_t>(b[static_cast<std::size_t>(i)]) << (8 * i);
  return v;
}

void put_le(std::ostream &os, double d) {
  auto v = std::bit_cast<std::uint64_t>(d);
  std::array<char, 8> b{};
  for (int i = 0; i < 8; ++i)
    b[static_cast<std::size_t>(i)] = static_cast<char>((v >> (8 * i)) & 0xffu);
  os.write(b.data(), 8);
}

double get_le_double(std::istream &is) {
  std::array<unsigned char, 8> b{};
  is.read(reinterpret_cast<char *>(b.data()), 8);
  std::uint64_t v = 0;
  for (int i = 0; i < 8; ++i)
    v |= static_cast<std::uint64_t>(b[static_cast<std::size_t>(i)]) << (8 * i);
  return std::bit_cast<double>(v);
}

struct Ellipse {
  double amplitude, a, b, x0, y0, phi_deg;
};

// Modified Shepp-Logan (Toft) with higher contrast.
constexpr std::array<Ellipse, 10> kSheppLogan{{
    {1.0, 0.69, 0.92, 0.0, 0.0, 0.0},
    {-0.8, 0.6624, 0.8740, 0.0, -0.0184, 0.0},
    {-0.2, 0.1100, 0.3100, 0.22, 0.0, -18.0},
    {-0.2, 0.1600, 0.4100, -0.22, 0.0, 18.0},
    {0.1, 0.2100, 0.2500, 0.0, 0.35, 0.0},
    {0.1, 0.0460, 0.0460, 0.0, 0.1, 0.0},
    {0.1, 0.0460, 0.0460, 0.0, -0.1, 0.0},
    {0.1, 0.0460, 0.0230, -0.08, -0.605, 0.0},
    {0.1, 0.0230, 0.0230, 0.0, -0.606, 0.0},
    {0.1, 0.0230, 0.0460, 0.06, -0.605, 0.0},
}};

void write_text(std::filesystem::path const &path, std::string const &text) {
  std::ofstream os(path, std::ios::binary);
  if (!os)
    throw std::runtime_error("cannot open " + path.string() + " for writing");
  os << text;
}

} // namespace

int default_wavelet_levels(int size) {
  int levels = 0;
  while ((1 << (levels + 1)) <= size)
    ++levels;
  return std::clamp(levels - 3, 1, 5);
}

void validate(ExperimentConfig const &c) {
  auto require = [](bool ok, char const *msg) {
    if (!ok)
      throw ConfigError(msg);
  };
  require(c.size >= 8 && std::has_single_bit(static_cast<unsigned>(c.size)),
          "config: size must be a power of two >= 8");
  require(c.spokes >= 1 && c.interleaves >= 1 && c.readout >= 2,
          "config: trajectory counts must be positive (readout >= 2)");
  require(c.coils >= 1, "config: coils must be positive");
  require(c.noise_var >= 0.0, "config: noise_var must be >= 0");
  require(!c.methods.empty(), "config: at least one method is required");
  if (c.wavelet_levels) {
    require(*c.wavelet_levels >= 1 && (c.size % (1 << *c.wavelet_levels)) == 0,
            "config: wavelet_levels must divide the image size");
  }
  for (Method m : c.methods) {
    try {
      validate(solver_config(c, m));
    } catch (std::invalid_argument const &e) {
      throw ConfigError(std::string("config: ") + e.what());
    }
  }
}

SolverConfig solver_config(ExperimentConfig const &c, Method method) {
  SolverConfig s;
  s.method = method;
  s.formulation = c.formulation;
  s.lambda = c.lambda;
  s.alpha = c.alpha;
  s.eta = c.eta;
  s.gamma = c.gamma;
  s.xi = c.xi;
  s.step = c.a_k;
  s.outer_iters = c.outer_iters;
  s.wpm_max_iter = c.wpm_max_iter;
  s.wpm_tol = c.wpm_tol;
  s.tv_variant = c.tv_variant;
  s.wavelet = {WaveletFamily::haar, c.wavelet_levels.value_or(default_wavelet_levels(c.size))};
  return s;
}

std::vector<std::string_view> config_keys() {
  return {"size",       "trajectory",   "spokes",  "interleaves", "readout",     "coils",
          "noise_var",  "seed",         "lambda",  "alpha",       "eta",         "gamma",
          "xi",         "a_k",          "outer_iters", "wpm_max_iter", "wpm_tol", "methods",
          "tv_variant", "formulation",  "wavelet_levels"};
}

void apply_setting(ExperimentConfig &c, std::string_view key, std::string_view value) {
  value = trim(value);
  if (key == "size") c.size = parse_int<int>(key, value);
  else if (key == "trajectory") c.trajectory = parse_enum(key, value, &parse_trajectory);
  else if (key == "spokes") c.spokes = parse_int<int>(key, value);
  else if (key == "interleaves") c.interleaves = parse_int<int>(key, value);
  else if (key == "readout") c.readout = parse_int<int>(key, value);
  else if (key == "coils") c.coils = parse_int<int>(key, value);
  else if (key == "noise_var") c.noise_var = parse_double(key, value);
  else if (key == "seed") c.seed = parse_int<std::uint64_t>(key, value);
  else if (key == "lambda") c.lambda = parse_double(key, value);
  else if (key == "alpha") c.alpha = parse_double(key, value);
  else if (key == "eta") c.eta = parse_double(key, value);
  else if (key == "gamma") c.gamma = parse_double(key, value);
  else if (key == "xi") c.xi = parse_double(key, value);
  else if (key == "a_k") c.a_k = parse_double(key, value);
  else if (key == "outer_iters") c.outer_iters = parse_int<int>(key, value);
  else if (key == "wpm_max_iter") c.wpm_max_iter = parse_int<int>(key, value);
  else if (key == "wpm_tol") c.wpm_tol = parse_double(key, value);
  else if (key == "tv_variant") c.tv_variant = parse_enum(key, value, &parse_tv_variant);
  else if (key == "formulation") c.formulation = parse_enum(key, value, &parse_formulation);
  else if (key == "wavelet_levels") c.wavelet_levels = parse_int<int>(key, value);
  else if (key == "methods") {
    c.methods.clear();
    std::string_view rest = value;
    while (!rest.empty()) {
      auto const comma = rest.find(',');
      auto const item = trim(rest.substr(0, comma));
      if (item.empty())
        throw ConfigError("config: empty entry in 'methods'");
      c.methods.push_back(parse_enum(key, item, &parse_method));
      rest = comma == std::string_view::npos ? std::string_view{} : rest.substr(comma + 1);
    }
  } else {
    throw ConfigError("config: unknown key '" + std::string(key) + "'");
  }
}

ExperimentConfig parse_config(std::string_view text) {
  ExperimentConfig c;
  int line_no = 0;
  while (!text.empty()) {
    auto const nl = text.find('\n');
    std::string_view line = text.substr(0, nl);
    text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
    ++line_no;
    if (auto const hash = line.find('#'); hash != std::string_view::npos)
      line = line.substr(0, hash);
    line = trim(line);
    if (line.empty())
      continue;
    auto const eq = line.find('=');
    if (eq == std::string_view::npos)
      throw ConfigError("config line " + std::to_string(line_no) + ": expected 'key = value'");
    apply_setting(c, trim(line.substr(0, eq)), line.substr(eq + 1));
  }
  validate(c);
  return c;
}

ExperimentConfig load_config(std::filesystem::path const &path) {
  std::ifstream is(path, std::ios::binary);
  if (!is)
    throw ConfigError("config: cannot read " + path.string());
  std::stringstream ss;
  ss << is.rdbuf();
  return parse_config(ss.str());
}

std::string emit_config(ExperimentConfig const &c) {
  std::ostringstream os;
  os << "size = " << c.size << '\n'
     << "trajectory = " << to_string(c.trajectory) << '\n'
     << "spokes = " << c.spokes << '\n'
     << "interleaves = " << c.interleaves << '\n'
     << "readout = " << c.readout << '\n'
     << "coils = " << c.coils << '\n'
     << "noise_var = " << format_double(c.noise_var) << '\n'
     << "seed = " << c.seed << '\n'
     << "lambda = " << format_double(c.lambda) << '\n'
     << "alpha = " << format_double(c.alpha) << '\n'
     << "eta = " << format_double(c.eta) << '\n'
     << "gamma = " << format_double(c.gamma) << '\n'
     << "xi = " << format_double(c.xi) << '\n'
     << "a_k = " << format_double(c.a_k) << '\n'
     << "outer_iters = " << c.outer_iters << '\n'
     << "wpm_max_iter = " << c.wpm_max_iter << '\n'
     << "wpm_tol = " << format_double(c.wpm_tol) << '\n'
     << "methods = ";
  for (std::size_t i = 0; i < c.methods.size(); ++i)
    os << (i ? "," : "") << to_string(c.methods[i]);
  os << '\n'
     << "tv_variant = " << to_string(c.tv_variant) << '\n'
     << "formulation = " << to_string(c.formulation) << '\n';
  if (c.wavelet_levels)
    os << "wavelet_levels = " << *c.wavelet_levels << '\n';
  return os.str();
}

ComplexImage make_phantom(int size) {
  if (size < 8 || !std::has_single_bit(static_cast<unsigned>(size)))
    throw std::invalid_argument("make_phantom: size must be a power of two >= 8");
  double const half = size / 2.0;
  ComplexImage img(size, size);
  RVec magnitude = RVec::Zero(img.size());
  for (int r = 0; r < size; ++r) {
    for (int c = 0; c < size; ++c) {
      double const x = (c - half) / half;
      double const y = (half - r) / half;
      double value = 0.0;
      for (auto const &e : kSheppLogan) {
        double const th = e.phi_deg * kPi / 180.0;
        double const xr = (x - e.x0) * std::cos(th) + (y - e.y0) * std::sin(th);
        double const yr = -(x - e.x0) * std::sin(th) + (y - e.y0) * std::cos(th);
        if ((xr * xr) / (e.a * e.a) + (yr * yr) / (e.b * e.b) <= 1.0)
          value += e.amplitude;
      }
      magnitude[r * size + c] = std::abs(value);
    }
  }
  magnitude /= magnitude.maxCoeff();
  for (int r = 0; r < size; ++r) {
    for (int c = 0; c < size; ++c) {
      double const u = (c - half) / half;
      double const v = (r - half) / half;
      double const phase = 0.5 * kPi * (0.5 * u + 0.3 * v + 0.2 * u * v);
      img(r, c) = std::polar(magnitude[r * size + c], phase);
    }
  }
  return img;
}

SensitivityMaps make_sensitivities(int size, int coils) {
  if (size < 1 || coils < 1)
    throw std::invalid_argument("make_sensitivities: size and coils must be positive");
  double const half = size / 2.0;
  double const sigma = 0.6 * size;
  std::vector<ComplexImage> raw;
  raw.reserve(static_cast<std::size_t>(coils));
  for (int l = 0; l < coils; ++l) {
    double const theta = 2.0 * kPi * l / coils;
    double const cy = half + half * std::sin(theta);
    double const cx = half + half * std::cos(theta);
    ComplexImage map(size, size);
    for (int r = 0; r < size; ++r) {
      for (int c = 0; c < size; ++c) {
        double const dy = r - cy;
        double const dx = c - cx;
        double const mag = std::exp(-(dx * dx + dy * dy) / (2.0 * sigma * sigma));
        double const along = (dx * std::cos(theta) + dy * std::sin(theta)) / size;
        map(r, c) = std::polar(mag, theta + 0.25 * kPi * along);
      }
    }
    raw.push_back(std::move(map));
  }
  RVec energy = RVec::Zero(size * size);
  for (auto const &m : raw)
    energy += m.data().cwiseAbs2();
  for (auto &m : raw) {
    for (Index p = 0; p < energy.size(); ++p)
      m.data()[p] = energy[p] > 0.0 ? m.data()[p] / std::sqrt(energy[p]) : Cx{};
  }
  return SensitivityMaps(std::move(raw));
}

CVec complex_gaussian_noise(Index n, double variance, std::uint64_t seed) {
  if (variance < 0.0)
    throw std::invalid_argument("complex_gaussian_noise: variance must be >= 0");
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, std::sqrt(variance / 2.0));
  CVec out(n);
  for (Index i = 0; i < n; ++i) {
    double const re = normal(rng);
    double const im = normal(rng);
    out[i] = {re, im};
  }
  return out;
}

Simulation simulate(ExperimentConfig const &config) {
  validate(config);
  Trajectory traj = config.trajectory == TrajectoryKind::radial
                        ? make_radial_trajectory(config.spokes, config.readout)
                        : make_spiral_trajectory(config.interleaves, config.readout);
  ForwardModel model(std::move(traj), make_sensitivities(config.size, config.coils));
  ComplexImage truth = make_phantom(config.size);
  KSpaceData data = model.forward(truth);
  double const signal = data.samples.squaredNorm();
  if (config.noise_var > 0.0) {
    CVec const noise = complex_gaussian_noise(data.size(), config.noise_var, config.seed);
    data.samples += noise;
    double const snr = 10.0 * std::log10(signal / noise.squaredNorm());
    return {std::move(truth), std::move(model), std::move(data), snr};
  }
  return {std::move(truth), std::move(model), std::move(data),
          std::numeric_limits<double>::infinity()};
}

std::string records_csv(std::vector<IterationRecord> const &records) {
  std::ostringstream os;
  os << kCsvHeader << '\n';
  for (auto const &r : records) {
    std::array<char, 32> time{};
    std::snprintf(time.data(), time.size(), "%.6f", r.seconds);
    os << r.iter << ',' << time.data() << ',' << format_double(r.cost) << ','
       << format_double(r.psnr) << ',' << r.inner_iters << '\n';
  }
  return os.str();
}

void write_image(std::filesystem::path const &path, ComplexImage const &img) {
  std::ofstream os(path, std::ios::binary);
  if (!os)
    throw std::runtime_error("write_image: cannot open " + path.string());
  os.write(kImageMagic.data(), kImageMagic.size());
  put_le(os, static_cast<std::uint32_t>(img.rows()));
  put_le(os, static_cast<std::uint32_t>(img.cols()));
  for (Index i = 0; i < img.size(); ++i)
    put_le(os, img.data()[i].real());
  for (Index i = 0; i < img.size(); ++i)
    put_le(os, img.data()[i].imag());
  if (!os)
    throw std::runtime_error("write_image: write failed for " + path.string());
}

ComplexImage read_image(std::filesystem::path const &path) {
  std::ifstream is(path, std::ios::binary);
  if (!is)
    throw std::runtime_error("read_image: cannot open " + path.string());
  std::array<char, 8> magic{};
  is.read(magic.data(), magic.size());
  if (!is || magic != kImageMagic)
    throw std::runtime_error("read_image: bad magic in " + path.string());
  auto const rows = static_cast<Index>(get_le32(is));
  auto const cols = static_cast<Index>(get_le32(is));
  ComplexImage img(rows, cols);
  std::vector<double> re(static_cast<std::size_t>(img.size()));
  for (auto &v : re)
    v = get_le_double(is);
  for (Index i = 0; i < img.size(); ++i)
    img.data()[i] = {re[static_cast<std::size_t>(i)], get_le_double(is)};
  if (!is)
    throw std::runtime_error("read_image: truncated file " + path.string());
  return img;
}

bool RunArtifact::all_ok() const {
  return std::all_of(runs.begin(), runs.end(), [](SolverRun const &r) { return r.ok(); });
}

RunArtifact run_experiment(ExperimentConfig const &config,
                           std::optional<std::filesystem::path> const &out_dir,
                           std::string const &suffix) {
  Simulation const sim = simulate(config);
  RunArtifact artifact{config, sim.input_snr_db, {}};
  if (out_dir)
    std::filesystem::create_directories(*out_dir);

  for (Method method : config.methods) {
    SolverRun run;
    run.method = method;
    run.label = std::string(to_string(method)) + suffix;
    try {
      SolveOptions options;
      options.reference = sim.truth;
      auto result = solve(sim.model, sim.data, solver_config(config, method), options);
      run.records = std::move(result.records);
      run.image = std::move(result.image);
    } catch (std::exception const &e) {
      run.error = e.what();
    }
    if (out_dir && run.ok()) {
      write_text(*out_dir / (run.label + ".csv"), records_csv(run.records));
      write_image(*out_dir / (run.label + ".img"), *run.image);
    }
    artifact.runs.push_back(std::move(run));
  }

  if (out_dir) {
    std::ostringstream manifest;
    manifest << "# experiment manifest\n" << emit_config(config);
    manifest << "# input_snr_db = " << format_double(sim.input_snr_db) << '\n';
    for (auto const &run : artifact.runs) {
      if (run.ok())
        manifest << "# run " << run.label << " ok " << run.label << ".csv " << run.label
                 << ".img\n";
      else
        manifest << "# run " << run.label << " failed: " << run.error << '\n';
    }
    write_text(*out_dir / ("manifest" + suffix + ".txt"), manifest.str());
    write_image(*out_dir / ("truth" + suffix + ".img"), sim.truth);
  }
  return artifact;
}

} // namespace cqnp
