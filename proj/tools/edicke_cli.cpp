// edicke: spectral and eigenstate chaos diagnostics for the extended Dicke model.
//
//   edicke <spectrum|spacing|ratio|eigstats|sweep|boundary> [--config PATH]
//          [--set KEY=VALUE]... [--out DIR] [--workers N]
//
// Settings are layered: built-in defaults, then the config file, then each
// --set in command-line order (later wins), then --out / --workers.
// Exit status: 0 ok, 1 usage or config error, 2 runtime failure.

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "edicke/eigenstate_stats.hpp"
#include "edicke/error.hpp"
#include "edicke/spectral_stats.hpp"
#include "edicke/sweep_io.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr int kExitUsage = 1;
constexpr int kExitRuntime = 2;
constexpr const char* kCacheEnv = "EDICKE_CACHE_DIR";

struct Invocation {
  std::string subcommand;
  std::string config_path;
  std::vector<std::string> overrides;
  std::string out_dir;
  int workers = 0;
  std::string sweep_csv;  // boundary only
};

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

json resolve_config(const Invocation& inv) {
  json doc = edicke::default_config_json();
  try {
    if (!inv.config_path.empty()) {
      if (!fs::exists(inv.config_path)) throw UsageError("--config: no such file: " + inv.config_path);
      doc = edicke::load_config_json(inv.config_path);
    }
    for (const auto& kv : inv.overrides) edicke::apply_override(doc, kv);
  } catch (const edicke::Error& e) {
    throw UsageError(e.what());
  }
  if (!inv.out_dir.empty()) doc["output_dir"] = inv.out_dir;
  if (inv.workers > 0) doc["workers"] = inv.workers;
  return doc;
}

std::optional<edicke::SpectrumCache> cache_from_env() {
  const char* dir = std::getenv(kCacheEnv);
  if (dir == nullptr || *dir == '\0') return std::nullopt;
  return edicke::SpectrumCache(dir);
}

fs::path prepare_out(const json& doc) {
  fs::path out = doc.at("output_dir").get<std::string>();
  std::error_code ec;
  fs::create_directories(out, ec);
  if (ec || !fs::is_directory(out)) {
    throw edicke::Error(edicke::ErrorCode::OutputUnwritable, "cannot create " + out.string());
  }
  return out;
}

json params_meta(const edicke::ModelParams& p) {
  return json{{"omega", p.omega},   {"omega0", p.omega0},   {"lambda", p.lambda},
              {"kappa", p.kappa},   {"j", p.j},             {"n_cutoff", p.n_cutoff},
              {"energy_window", {p.energy_window.lo, p.energy_window.hi}},
              {"mid_window", {p.mid_window.lo, p.mid_window.hi}}};
}

struct Prepared {
  json doc;
  edicke::ModelParams params;
  edicke::PointAnalysisOptions options;
  std::optional<edicke::SpectrumCache> cache;
};

struct Needs {
  bool spacing = false;
  bool ratio = false;
  bool eigenstates = false;
};

Prepared prepare_point(const Invocation& inv, Needs needs) {
  Prepared p;
  p.doc = resolve_config(inv);
  try {
    p.params = edicke::point_params_from_json(p.doc);
    p.options.fit_degree = p.doc.at("fit_degree").get<int>();
    p.options.bins = p.doc.at("bins").get<int>();
  } catch (const std::exception& e) {
    throw UsageError(e.what());
  }
  p.options.spacing_stats = needs.spacing;
  p.options.ratio_stats = needs.ratio;
  p.options.eigenstates = needs.eigenstates;
  p.cache = cache_from_env();
  return p;
}

int run_spectrum(const Invocation& inv) {
  auto prep = prepare_point(inv, {});
  const auto out = prepare_out(prep.doc);
  std::optional<edicke::CachedSpectrum> cached;
  if (prep.cache) cached = prep.cache->load(prep.params, edicke::Parity::Even, false);
  edicke::SpectralDataset ds;
  if (cached) {
    ds = edicke::dataset_from_cache(*cached, prep.params, edicke::Parity::Even);
  } else {
    const auto eig = edicke::diagonalize(edicke::build_hamiltonian(prep.params, edicke::Parity::Even), false);
    ds = edicke::filter_energy_window(eig, prep.params);
    if (prep.cache) prep.cache->store(prep.params, edicke::Parity::Even, {eig.values, std::nullopt});
  }
  std::ofstream csv(out / "spectrum.csv");
  csv << "index,window_index,energy,energy_per_atom\n";
  const double n_atoms = prep.params.n_atoms();
  for (Eigen::Index k = 0; k < ds.size(); ++k) {
    csv << k << ',' << ds.window_indices[static_cast<std::size_t>(k)] << ','
        << edicke::format_double(ds.energies[k]) << ','
        << edicke::format_double(ds.energies[k] / n_atoms) << '\n';
  }
  if (!csv.flush()) throw edicke::Error(edicke::ErrorCode::OutputUnwritable, "spectrum.csv");
  std::ofstream meta(out / "spectrum_meta.json");
  meta << json{{"dim", ds.full_dim}, {"n_levels", ds.size()}, {"params", params_meta(prep.params)}}.dump(2)
       << '\n';
  std::printf("dim=%lld n_levels=%lld -> %s\n", static_cast<long long>(ds.full_dim),
              static_cast<long long>(ds.size()), (out / "spectrum.csv").c_str());
  return 0;
}

// Statistics that could not be formed are runtime failures for single points.
void require_indicators(const edicke::PointAnalysis& a) {
  if (a.indicator_errors.empty()) return;
  std::string msg;
  for (const auto& e : a.indicator_errors) msg += (msg.empty() ? "" : "; ") + e;
  throw std::runtime_error(msg);
}

int run_spacing(const Invocation& inv) {
  auto prep = prepare_point(inv, {.spacing = true});
  const auto out = prepare_out(prep.doc);
  if (prep.cache) prep.options.cache = &*prep.cache;
  const auto a = edicke::analyze_point(prep.params, prep.options);
  require_indicators(a);
  json meta{{"kind", "spacing"},
            {"eta", a.indicators.eta},
            {"beta", a.indicators.beta},
            {"s0", edicke::poisson_wd_crossing()},
            {"dim", a.dim},
            {"n_levels", a.indicators.n_levels},
            {"n_spacings", a.unfolded.spacings.size()},
            {"n_degenerate_dropped", a.n_degenerate_spacings},
            {"fit_degree", a.unfolded.fit_degree},
            {"params", params_meta(prep.params)}};
  edicke::write_histogram(edicke::spacing_histogram(a), meta, out / "hist_spacing.json");
  std::printf("eta=%.6f beta=%.6f n_levels=%zu n_degenerate_dropped=%zu\n", a.indicators.eta,
              a.indicators.beta, a.indicators.n_levels, a.n_degenerate_spacings);
  return 0;
}

int run_ratio(const Invocation& inv) {
  auto prep = prepare_point(inv, {.ratio = true});
  const auto out = prepare_out(prep.doc);
  if (prep.cache) prep.options.cache = &*prep.cache;
  const auto a = edicke::analyze_point(prep.params, prep.options);
  // A fully degenerate spectrum leaves no ratios; report it instead of failing.
  const bool empty = a.ratios.empty() && a.n_degenerate_ratios > 0;
  if (!empty) require_indicators(a);
  json meta{{"kind", "ratio"},
            {"mean_r", empty ? json(nullptr) : json(a.indicators.mean_r)},
            {"dim", a.dim},
            {"n_levels", a.indicators.n_levels},
            {"n_ratios", a.ratios.size()},
            {"n_degenerate_dropped", a.n_degenerate_ratios},
            {"params", params_meta(prep.params)}};
  edicke::Histogram h;
  if (empty) {
    h.edges = {0.0, 1.0};
    h.densities = {0.0};
    h.counts = {0};
  } else {
    h = edicke::ratio_histogram(a);
  }
  edicke::write_histogram(h, meta, out / "hist_ratio.json");
  std::printf("mean_r=%.6f n_ratios=%zu n_degenerate_dropped=%zu\n", a.indicators.mean_r,
              a.ratios.size(), a.n_degenerate_ratios);
  return 0;
}

int run_eigstats(const Invocation& inv) {
  auto prep = prepare_point(inv, {.eigenstates = true});
  const auto out = prepare_out(prep.doc);
  if (prep.cache) prep.options.cache = &*prep.cache;
  const auto a = edicke::analyze_point(prep.params, prep.options);
  require_indicators(a);
  const auto& h = *a.coefficient_histogram;
  std::vector<double> reference(h.densities.size());
  for (std::size_t i = 0; i < reference.size(); ++i) {
    reference[i] = edicke::goe_coefficient_pdf(0.5 * (h.edges[i] + h.edges[i + 1]),
                                               static_cast<double>(a.dim));
  }
  json meta{{"kind", "coeff"},
            {"d_kl", a.indicators.d_kl},
            {"dim", a.dim},
            {"n_states", a.n_mid_states},
            {"converged_fraction", a.indicators.converged_fraction},
            {"goe_density_at_centers", reference},
            {"params", params_meta(prep.params)}};
  edicke::write_histogram(h, meta, out / "hist_coeff.json");
  std::printf("d_kl=%.6f n_states=%zu dim=%lld converged_fraction=%.6f\n", a.indicators.d_kl,
              a.n_mid_states, static_cast<long long>(a.dim), a.indicators.converged_fraction);
  return 0;
}

int run_sweep_cmd(const Invocation& inv) {
  const json doc = resolve_config(inv);
  edicke::SweepConfig config;
  try {
    config = edicke::sweep_config_from_json(doc);
  } catch (const edicke::Error& e) {
    throw UsageError(e.what());
  }
  auto cache = cache_from_env();
  const auto res = edicke::run_sweep(config, cache ? &*cache : nullptr);
  std::printf("%zu points, %zu failed -> %s\n", res.rows.size(), res.errors.size(),
              (config.output_dir / "sweep.csv").c_str());
  return res.errors.empty() ? 0 : kExitRuntime;
}

int run_boundary(const Invocation& inv) {
  const json doc = resolve_config(inv);
  edicke::Thresholds t;
  try {
    const auto& th = doc.at("thresholds");
    t = {th.at("eta_max").get<double>(), th.at("beta_min").get<double>(),
         th.at("mean_r_min").get<double>()};
  } catch (const std::exception& e) {
    throw UsageError(e.what());
  }
  const fs::path out = prepare_out(doc);
  const fs::path input = inv.sweep_csv.empty() ? out / "sweep.csv" : fs::path(inv.sweep_csv);
  if (!fs::exists(input)) throw UsageError("--sweep: no such file: " + input.string());
  const auto rows = edicke::read_csv(input);
  for (auto which : {edicke::Indicator::Eta, edicke::Indicator::Beta, edicke::Indicator::MeanR}) {
    const auto b = edicke::boundary_from_rows(rows, which, edicke::threshold_for(t, which));
    const auto path = out / (std::string("boundary_") + edicke::indicator_name(which) + ".csv");
    edicke::write_boundary_csv(b, path);
    std::printf("%s\n", path.c_str());
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  edicke::select_backend_kernels(argv);
  CLI::App app{"Quantum-chaos diagnostics for the extended Dicke model"};
  app.require_subcommand(1);
  Invocation inv;

  auto add_common = [&inv](CLI::App* sub) {
    sub->add_option("--config", inv.config_path, "JSON config file");
    sub->add_option("--set", inv.overrides, "KEY=VALUE override, dotted keys for nested fields")
        ->allow_extra_args(false)
        ->take_all();
    sub->add_option("--out", inv.out_dir, "output directory (overrides output_dir)");
    sub->add_option("--workers", inv.workers, "parallel grid points (overrides workers)")
        ->check(CLI::PositiveNumber);
  };

  struct Command {
    const char* name;
    const char* help;
    int (*run)(const Invocation&);
  };
  const Command commands[] = {
      {"spectrum", "write windowed eigenvalues", run_spectrum},
      {"spacing", "P(s) histogram with eta and Brody beta", run_spacing},
      {"ratio", "P(r) histogram with <r>", run_ratio},
      {"eigstats", "P(c) histogram with D_KL", run_eigstats},
      {"sweep", "run a (kappa, lambda) grid", run_sweep_cmd},
      {"boundary", "chaos boundaries from a sweep.csv", run_boundary},
  };
  std::vector<std::pair<CLI::App*, const Command*>> subs;
  for (const auto& c : commands) {
    auto* sub = app.add_subcommand(c.name, c.help);
    add_common(sub);
    if (std::string(c.name) == "boundary") {
      sub->add_option("--sweep", inv.sweep_csv, "sweep.csv to read (default <out>/sweep.csv)");
    }
    subs.emplace_back(sub, &c);
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  for (const auto& [sub, cmd] : subs) {
    if (!sub->parsed()) continue;
    inv.subcommand = cmd->name;
    try {
      return cmd->run(inv);
    } catch (const UsageError& e) {
      std::fprintf(stderr, "edicke %s: %s\n", cmd->name, e.what());
      return kExitUsage;
    } catch (const std::exception& e) {
      std::fprintf(stderr, "edicke %s: %s\n", cmd->name, e.what());
      return kExitRuntime;
    }
  }
  return kExitUsage;
}
