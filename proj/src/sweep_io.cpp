#include "edicke/sweep_io.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <limits>
#include <sstream>

#include "edicke/eigenstate_stats.hpp"
#include "edicke/error.hpp"

namespace edicke {

using nlohmann::json;

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

std::ofstream open_for_write(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw Error(ErrorCode::OutputUnwritable, "cannot open " + path.string());
  return out;
}

void finish(std::ofstream& out, const std::filesystem::path& path) {
  out.flush();
  if (!out) throw Error(ErrorCode::OutputUnwritable, "write failed for " + path.string());
}

void ensure_dir(const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec || !std::filesystem::is_directory(dir)) {
    throw Error(ErrorCode::OutputUnwritable, "cannot create directory " + dir.string());
  }
}

// Every key of `doc` must exist in `schema`; nested objects are checked recursively.
void check_known_keys(const json& doc, const json& schema, const std::string& prefix) {
  if (!doc.is_object()) throw Error(ErrorCode::MalformedInput, "config must be a JSON object");
  for (const auto& [key, value] : doc.items()) {
    const std::string path = prefix.empty() ? key : prefix + "." + key;
    if (!schema.contains(key)) throw Error(ErrorCode::MalformedInput, "unknown config key '" + path + "'");
    if (schema[key].is_object()) check_known_keys(value, schema[key], path);
  }
}

EnergyWindow window_from(const json& v, const char* name) {
  if (!v.is_array() || v.size() != 2) {
    throw Error(ErrorCode::MalformedInput, std::string(name) + " must be [lo, hi]");
  }
  return {v[0].get<double>(), v[1].get<double>()};
}

template <typename F>
auto converting(F&& f) {
  try {
    return f();
  } catch (const json::exception& e) {
    throw Error(ErrorCode::MalformedInput, e.what());
  }
}

}  // namespace

// --- config -----------------------------------------------------------------

void SweepConfig::validate() const {
  base.validate();
  auto ascending = [](const std::vector<double>& g) {
    return !g.empty() && std::adjacent_find(g.begin(), g.end(), std::greater_equal<>()) == g.end();
  };
  if (!ascending(kappa_grid)) throw Error(ErrorCode::InvalidParams, "kappa_grid must be non-empty and strictly ascending");
  if (!ascending(lambda_grid)) throw Error(ErrorCode::InvalidParams, "lambda_grid must be non-empty and strictly ascending");
  for (double t : {thresholds.eta_max, thresholds.beta_min, thresholds.mean_r_min}) {
    if (!(t > 0.0 && t < 1.0)) throw Error(ErrorCode::InvalidParams, "thresholds must lie in (0, 1)");
  }
  if (fit_degree < 1) throw Error(ErrorCode::InvalidParams, "fit_degree must be >= 1");
  if (bins < 10) throw Error(ErrorCode::InvalidParams, "bins must be >= 10");
  if (workers < 1) throw Error(ErrorCode::InvalidParams, "workers must be >= 1");
}

json default_config_json() {
  return json{
      {"omega", 1.0},
      {"omega0", 1.0},
      {"j", 16},
      {"n_cutoff", 320},
      {"energy_window", {0.4, 4.0}},
      {"mid_window", {1.75, 2.25}},
      {"lambda", 1.0},
      {"kappa", 0.0},
      {"kappa_grid", {0.0}},
      {"lambda_grid", {1.0}},
      {"fit_degree", kDefaultFitDegree},
      {"bins", 201},
      {"thresholds", {{"eta_max", 0.3}, {"beta_min", 0.7}, {"mean_r_min", 0.48}}},
      {"workers", 1},
      {"output_dir", "out"},
  };
}

json load_config_json(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::MalformedInput, "cannot read config " + path.string());
  json file;
  try {
    file = json::parse(in);
  } catch (const json::parse_error& e) {
    throw Error(ErrorCode::MalformedInput, path.string() + ": " + e.what());
  }
  json doc = default_config_json();
  check_known_keys(file, doc, "");
  doc.merge_patch(file);
  return doc;
}

void apply_override(json& doc, const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos || eq == 0) {
    throw Error(ErrorCode::MalformedInput, "override '" + assignment + "' is not KEY=VALUE");
  }
  const std::string key = assignment.substr(0, eq);
  const std::string text = assignment.substr(eq + 1);

  const json schema = default_config_json();
  const json* node = &schema;
  json* target = &doc;
  std::size_t start = 0;
  while (true) {
    const auto dot = key.find('.', start);
    const std::string part = key.substr(start, dot == std::string::npos ? std::string::npos : dot - start);
    if (!node->is_object() || !node->contains(part)) {
      throw Error(ErrorCode::MalformedInput, "unknown config key '" + key + "'");
    }
    node = &(*node)[part];
    target = &(*target)[part];
    if (dot == std::string::npos) break;
    start = dot + 1;
  }
  if (node->is_object()) {
    throw Error(ErrorCode::MalformedInput, "'" + key + "' is a section; set one of its fields");
  }
  json value;
  try {
    value = json::parse(text);
  } catch (const json::parse_error&) {
    value = text;
  }
  *target = std::move(value);
}

ModelParams point_params_from_json(const json& doc) {
  return converting([&] {
    ModelParams p;
    p.omega = doc.at("omega").get<double>();
    p.omega0 = doc.at("omega0").get<double>();
    p.j = doc.at("j").get<double>();
    p.n_cutoff = doc.at("n_cutoff").get<int>();
    p.energy_window = window_from(doc.at("energy_window"), "energy_window");
    p.mid_window = window_from(doc.at("mid_window"), "mid_window");
    p.lambda = doc.at("lambda").get<double>();
    p.kappa = doc.at("kappa").get<double>();
    p.validate();
    return p;
  });
}

SweepConfig sweep_config_from_json(const json& doc) {
  return converting([&] {
    SweepConfig c;
    c.base = point_params_from_json(doc);
    c.base.lambda = 0.0;
    c.base.kappa = 0.0;
    c.kappa_grid = doc.at("kappa_grid").get<std::vector<double>>();
    c.lambda_grid = doc.at("lambda_grid").get<std::vector<double>>();
    c.fit_degree = doc.at("fit_degree").get<int>();
    c.bins = doc.at("bins").get<int>();
    const auto& t = doc.at("thresholds");
    c.thresholds = {t.at("eta_max").get<double>(), t.at("beta_min").get<double>(),
                    t.at("mean_r_min").get<double>()};
    c.workers = doc.at("workers").get<int>();
    c.output_dir = doc.at("output_dir").get<std::string>();
    c.validate();
    return c;
  });
}

// --- single point -----------------------------------------------------------

PointAnalysis analyze_point(const ModelParams& params, const PointAnalysisOptions& options) {
  params.validate();
  PointAnalysis a;
  a.params = params;

  std::optional<CachedSpectrum> cached;
  if (options.cache) cached = options.cache->load(params, options.sector, options.eigenstates);
  if (cached) {
    a.dataset = dataset_from_cache(*cached, params, options.sector);
  } else {
    const auto h = build_hamiltonian(params, options.sector);
    const auto eig = diagonalize(h, options.eigenstates);
    a.dataset = filter_energy_window(eig, params, options.sector);
    if (options.cache) {
      options.cache->store(params, options.sector, {eig.values, a.dataset.coefficients});
    }
  }
  auto& ds = a.dataset;
  a.dim = ds.full_dim;
  a.indicators.n_levels = static_cast<std::size_t>(ds.size());

  std::vector<double> energies(ds.energies.data(), ds.energies.data() + ds.energies.size());
  a.indicators.eta = a.indicators.beta = a.indicators.mean_r = kNaN;
  auto statistic = [&a](auto&& body) {
    try {
      body();
    } catch (const Error& e) {
      switch (e.code()) {
        case ErrorCode::TooFewLevels:
        case ErrorCode::TooFewSpacings:
        case ErrorCode::AllDegenerate:
        case ErrorCode::DegenerateFit:
        case ErrorCode::EmptyInput:
          a.indicator_errors.push_back(e.what());
          break;
        default:
          throw;
      }
    }
  };

  if (options.spacing_stats) {
    statistic([&] {
      a.unfolded = unfold(energies, options.fit_degree);
      const auto sel = drop_degenerate(a.unfolded.spacings);
      a.n_degenerate_spacings = sel.n_dropped;
      a.indicators.eta = eta_indicator(a.unfolded.spacings).eta;
      a.indicators.beta = fit_brody(a.unfolded.spacings).beta;
    });
  }
  if (options.ratio_stats) {
    statistic([&] {
      auto ratios = spacing_ratios(energies);
      a.n_degenerate_ratios = ratios.n_dropped;
      a.ratios = std::move(ratios.values);
      a.indicators.mean_r = mean_ratio(a.ratios);
    });
  }

  if (options.eigenstates) {
    const auto report = check_convergence(ds);
    ds.converged = report.flags;
    a.indicators.converged_fraction = report.converged_fraction;
    const auto sample = collect_coefficients(ds, params.mid_window);
    auto kl = kl_divergence(sample, options.bins);
    a.indicators.d_kl = kl.d_kl;
    a.n_mid_states = sample.n_states;
    a.coefficient_histogram = std::move(kl.histogram);
  } else {
    a.indicators.d_kl = kNaN;
    a.indicators.converged_fraction = kNaN;
  }
  return a;
}

Histogram spacing_histogram(const PointAnalysis& a) {
  const auto sel = drop_degenerate(a.unfolded.spacings);
  const double max_s = sel.kept.empty() ? 0.0 : *std::max_element(sel.kept.begin(), sel.kept.end());
  const double hi = std::max(4.0, std::ceil(max_s));
  return make_histogram(sel.kept, {0.0, hi, static_cast<int>(std::lround(hi / 0.1))});
}

Histogram ratio_histogram(const PointAnalysis& a) { return make_histogram(a.ratios, {0.0, 1.0, 20}); }

// --- sweeps -----------------------------------------------------------------

SweepResults compute_sweep(const SweepConfig& config, const SpectrumCache* cache) {
  config.validate();
  const std::size_t n_lambda = config.lambda_grid.size();
  const std::size_t n_points = config.kappa_grid.size() * n_lambda;

  SweepResults res;
  res.rows.resize(n_points);
  res.histograms.resize(n_points);
  std::vector<std::optional<std::string>> failures(n_points);

  // One diagonalization per worker; a multithreaded backend underneath would
  // make the numbers depend on the machine's thread layout.
  set_backend_threads(1);

#pragma omp parallel for schedule(dynamic, 1) num_threads(config.workers)
  for (std::size_t idx = 0; idx < n_points; ++idx) {
    ModelParams p = config.base;
    p.kappa = config.kappa_grid[idx / n_lambda];
    p.lambda = config.lambda_grid[idx % n_lambda];
    SweepResultRow& row = res.rows[idx];
    row.kappa = p.kappa;
    row.lambda = p.lambda;
    PointHistograms& hist = res.histograms[idx];
    hist.kappa = p.kappa;
    hist.lambda = p.lambda;
    try {
      PointAnalysisOptions opts;
      opts.fit_degree = config.fit_degree;
      opts.bins = config.bins;
      opts.cache = cache;
      const auto a = analyze_point(p, opts);
      row.dim = a.dim;
      row.n_levels = static_cast<long long>(a.indicators.n_levels);
      row.eta = a.indicators.eta;
      row.beta = a.indicators.beta;
      row.mean_r = a.indicators.mean_r;
      row.d_kl = a.indicators.d_kl;
      row.converged_fraction = a.indicators.converged_fraction;
      row.n_degenerate_dropped = static_cast<long long>(a.n_degenerate_spacings);
      if (!std::isnan(row.eta)) hist.spacing = spacing_histogram(a);
      if (!std::isnan(row.mean_r)) hist.ratio = ratio_histogram(a);
      hist.coefficient = a.coefficient_histogram;
      if (!a.indicator_errors.empty()) {
        std::string msg;
        for (const auto& e : a.indicator_errors) msg += (msg.empty() ? "" : "; ") + e;
        failures[idx] = msg;
      }
    } catch (const std::exception& e) {
      row.dim = -1;
      row.n_levels = -1;
      row.eta = row.beta = row.mean_r = row.d_kl = row.converged_fraction = kNaN;
      row.n_degenerate_dropped = -1;
      hist = PointHistograms{p.kappa, p.lambda, std::nullopt, std::nullopt, std::nullopt};
      failures[idx] = e.what();
    }
  }

  for (std::size_t idx = 0; idx < n_points; ++idx) {
    if (failures[idx]) res.errors.push_back({res.rows[idx].kappa, res.rows[idx].lambda, *failures[idx]});
  }
  return res;
}

SweepResults run_sweep(const SweepConfig& config, const SpectrumCache* cache) {
  config.validate();
  ensure_dir(config.output_dir);
  auto res = compute_sweep(config, cache);
  const auto& dir = config.output_dir;
  write_csv(res.rows, dir / "sweep.csv");
  for (Indicator which : {Indicator::Eta, Indicator::Beta, Indicator::MeanR}) {
    const auto boundary = boundary_from_rows(res.rows, which, threshold_for(config.thresholds, which));
    write_boundary_csv(boundary, dir / (std::string("boundary_") + indicator_name(which) + ".csv"));
  }
  for (std::size_t i = 0; i < res.histograms.size(); ++i) {
    const auto& ph = res.histograms[i];
    const auto& row = res.rows[i];
    json meta{{"kappa", ph.kappa}, {"lambda", ph.lambda}, {"dim", row.dim}, {"n_levels", row.n_levels}};
    if (ph.spacing) {
      json m = meta;
      m["kind"] = "spacing";
      m["eta"] = row.eta;
      m["beta"] = row.beta;
      m["n_degenerate_dropped"] = row.n_degenerate_dropped;
      write_histogram(*ph.spacing, m, dir / histogram_filename("spacing", ph.kappa, ph.lambda));
    }
    if (ph.ratio) {
      json m = meta;
      m["kind"] = "ratio";
      m["mean_r"] = row.mean_r;
      write_histogram(*ph.ratio, m, dir / histogram_filename("ratio", ph.kappa, ph.lambda));
    }
    if (ph.coefficient) {
      json m = meta;
      m["kind"] = "coeff";
      m["d_kl"] = row.d_kl;
      write_histogram(*ph.coefficient, m, dir / histogram_filename("coeff", ph.kappa, ph.lambda));
    }
  }
  if (!res.errors.empty()) write_errors_csv(res.errors, dir / "sweep_errors.csv");
  return res;
}

// --- files ------------------------------------------------------------------

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

void write_csv(const std::vector<SweepResultRow>& rows, const std::filesystem::path& path) {
  auto out = open_for_write(path);
  out << kSweepCsvHeader << '\n';
  for (const auto& r : rows) {
    out << format_double(r.kappa) << ',' << format_double(r.lambda) << ',' << r.dim << ','
        << r.n_levels << ',' << format_double(r.eta) << ',' << format_double(r.beta) << ','
        << format_double(r.mean_r) << ',' << format_double(r.d_kl) << ','
        << format_double(r.converged_fraction) << ',' << r.n_degenerate_dropped << '\n';
  }
  finish(out, path);
}

std::vector<SweepResultRow> read_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::MalformedInput, "cannot read " + path.string());
  std::string line;
  if (!std::getline(in, line) || line != kSweepCsvHeader) {
    throw Error(ErrorCode::MalformedInput, path.string() + ": unexpected header");
  }
  std::vector<SweepResultRow> rows;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::vector<std::string> f;
    std::stringstream ss(line);
    for (std::string cell; std::getline(ss, cell, ',');) f.push_back(cell);
    if (f.size() != 10) {
      throw Error(ErrorCode::MalformedInput, path.string() + ":" + std::to_string(line_no) + ": expected 10 fields");
    }
    auto num = [&](const std::string& s) {
      char* end = nullptr;
      const double v = std::strtod(s.c_str(), &end);
      if (end == s.c_str() || *end != '\0') {
        throw Error(ErrorCode::MalformedInput, path.string() + ":" + std::to_string(line_no) + ": bad number '" + s + "'");
      }
      return v;
    };
    auto integer = [&](const std::string& s) {
      char* end = nullptr;
      const long long v = std::strtoll(s.c_str(), &end, 10);
      if (end == s.c_str() || *end != '\0') {
        throw Error(ErrorCode::MalformedInput, path.string() + ":" + std::to_string(line_no) + ": bad integer '" + s + "'");
      }
      return v;
    };
    rows.push_back({num(f[0]), num(f[1]), integer(f[2]), integer(f[3]), num(f[4]), num(f[5]),
                    num(f[6]), num(f[7]), num(f[8]), integer(f[9])});
  }
  return rows;
}

void write_errors_csv(const std::vector<SweepPointError>& errors, const std::filesystem::path& path) {
  auto out = open_for_write(path);
  out << "kappa,lambda,message\n";
  for (const auto& e : errors) {
    std::string msg = e.message;
    std::replace(msg.begin(), msg.end(), '\n', ' ');
    std::string quoted;
    for (char ch : msg) {
      if (ch == '"') quoted += '"';
      quoted += ch;
    }
    out << format_double(e.kappa) << ',' << format_double(e.lambda) << ",\"" << quoted << "\"\n";
  }
  finish(out, path);
}

json histogram_to_json(const Histogram& h, const json& meta) {
  json doc{{"edges", h.edges}, {"densities", h.densities}, {"counts", h.counts}, {"meta", meta}};
  doc["meta"]["n_outside"] = h.n_outside;
  return doc;
}

Histogram histogram_from_json(const json& doc) {
  return converting([&] {
    Histogram h;
    h.edges = doc.at("edges").get<std::vector<double>>();
    h.densities = doc.at("densities").get<std::vector<double>>();
    h.counts = doc.at("counts").get<std::vector<std::uint64_t>>();
    if (doc.contains("meta") && doc["meta"].contains("n_outside")) {
      h.n_outside = doc["meta"]["n_outside"].get<std::uint64_t>();
    }
    if (h.edges.size() != h.densities.size() + 1 || h.counts.size() != h.densities.size()) {
      throw Error(ErrorCode::MalformedInput, "histogram arrays have inconsistent lengths");
    }
    return h;
  });
}

void write_histogram(const Histogram& h, const json& meta, const std::filesystem::path& path) {
  auto out = open_for_write(path);
  out << histogram_to_json(h, meta).dump() << '\n';
  finish(out, path);
}

void write_histograms(const std::vector<std::pair<Histogram, json>>& histos,
                      const std::filesystem::path& path) {
  json arr = json::array();
  for (const auto& [h, meta] : histos) arr.push_back(histogram_to_json(h, meta));
  auto out = open_for_write(path);
  out << arr.dump() << '\n';
  finish(out, path);
}

const char* indicator_name(Indicator which) noexcept {
  switch (which) {
    case Indicator::Eta:
      return "eta";
    case Indicator::Beta:
      return "beta";
    case Indicator::MeanR:
      return "mean_r";
  }
  return "?";
}

double threshold_for(const Thresholds& t, Indicator which) noexcept {
  switch (which) {
    case Indicator::Eta:
      return t.eta_max;
    case Indicator::Beta:
      return t.beta_min;
    case Indicator::MeanR:
      return t.mean_r_min;
  }
  return kNaN;
}

double indicator_value(const SweepResultRow& row, Indicator which) noexcept {
  switch (which) {
    case Indicator::Eta:
      return row.eta;
    case Indicator::Beta:
      return row.beta;
    case Indicator::MeanR:
      return row.mean_r;
  }
  return kNaN;
}

std::vector<BoundaryPoint> boundary_from_rows(const std::vector<SweepResultRow>& rows,
                                              Indicator which, double threshold) {
  std::vector<GridValue> grid;
  grid.reserve(rows.size());
  for (const auto& r : rows) grid.push_back({r.kappa, r.lambda, indicator_value(r, which)});
  return chaos_boundary(grid, which, threshold);
}

void write_boundary_csv(const std::vector<BoundaryPoint>& boundary, const std::filesystem::path& path) {
  auto out = open_for_write(path);
  out << "kappa,lambda_star,crossed\n";
  for (const auto& b : boundary) {
    out << format_double(b.kappa) << ',' << format_double(b.lambda_star) << ','
        << (b.crossed ? "true" : "false") << '\n';
  }
  finish(out, path);
}

std::string histogram_filename(const std::string& kind, double kappa, double lambda) {
  char buf[96];
  std::snprintf(buf, sizeof(buf), "hist_%s_%g_%g.json", kind.c_str(), kappa, lambda);
  return buf;
}

}  // namespace edicke
