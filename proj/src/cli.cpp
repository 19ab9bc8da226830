#include "lrqi/cli.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <optional>
#include <ostream>

#include "lrqi/reporting.hpp"

namespace lrqi {

namespace {

struct Options {
  std::string fn;
  std::size_t n = 1000000;
  double noise_sigma = 0.0;
  std::uint64_t seed = 1;
  std::string data;
  int degree = 3;
  int lbar = 1;
  int lmax = 10;
  std::optional<int> laniso;
  std::string mode = "aniso";
  double mu = 1e-6;
  int m = 5;
  double kappa_max = 1e5;
  int grid_res = 101;
  std::string out;
};

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct DatasetError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

Rect domain_of(const std::string& fn) { return fn == "f1" ? Rect{0, 1, 0, 1} : Rect{-4, 4, -4, 4}; }

SampledFunction function_of(const std::string& fn) {
  return fn == "f1" ? SampledFunction(eval_f1) : SampledFunction(eval_f2);
}

struct Dataset {
  PointCloud cloud;
  std::optional<PointCloud> clean;  // noise-free values on the same sites
};

Dataset load_dataset(const Options& o) {
  if (!o.data.empty() && !o.fn.empty()) throw UsageError("--data and --fn are mutually exclusive");
  if (o.data.empty() && o.fn.empty()) throw UsageError("a dataset is required: --data FILE or --fn {f1,f2}");
  Dataset d;
  if (!o.data.empty()) {
    try {
      d.cloud = load_xyz(o.data);
    } catch (const std::exception& e) {
      throw DatasetError(e.what());
    }
    return d;
  }
  if (o.n == 0) throw UsageError("--n must be positive");
  d.cloud = generate_halton_cloud(o.n, domain_of(o.fn), function_of(o.fn));
  if (o.noise_sigma > 0) {
    d.clean = d.cloud;
    d.cloud = add_gaussian_noise(d.cloud, o.noise_sigma, o.seed);
  }
  return d;
}

RefinementMode mode_of(const std::string& s) {
  if (s == "iso") return RefinementMode::isotropic;
  if (s == "fault") return RefinementMode::fault_driven;
  return RefinementMode::anisotropic;
}

AdaptiveConfig config_of(const Options& o, RefinementMode mode) {
  AdaptiveConfig cfg = default_config(mode, o.lbar, o.degree);
  cfg.jump.L = o.lmax;
  cfg.L_aniso = o.laniso.value_or(o.lbar);
  cfg.qi.mu = o.mu;
  cfg.qi.m = o.m;
  cfg.qi.kappa_max = o.kappa_max;
  try {
    validate(cfg);
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }
  return cfg;
}

std::string sci(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2e", v);
  return buf;
}

void summary(std::ostream& out, const FitResult& r) {
  const auto& f = r.report.final();
  char buf[160];
  std::snprintf(buf, sizeof buf, "ndofs=%zu rmse=%.6e total_time=%.3fs", f.ndofs, f.rmse, r.report.total_time());
  out << buf;
  if (f.rmse_reference) out << " rmse_clean=" << sci(*f.rmse_reference);
  out << '\n';
}

std::ofstream open_file(const std::filesystem::path& p) {
  std::ofstream os(p);
  if (!os) throw std::runtime_error("cannot write " + p.string());
  return os;
}

void prepare_dir(const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (!std::filesystem::is_directory(dir)) throw std::runtime_error("cannot create directory " + dir.string());
}

void export_fit(const FitResult& r, const std::filesystem::path& dir, int L, int grid_res) {
  prepare_dir(dir);
  {
    auto os = open_file(dir / "report.csv");
    write_report_csv(r.report, os);
  }
  {
    auto os = open_file(dir / "faults.csv");
    write_faults_csv(r.faults, os);
  }
  {
    auto os = open_file(dir / "mesh.svg");
    write_mesh_svg(r.surface.spline.mesh, r.faults, L, os);
  }
  {
    auto os = open_file(dir / "surface.txt");
    write_surface_text(r.surface, os);
  }
  {
    auto os = open_file(dir / "surface_grid.csv");
    write_surface_grid(r.surface, grid_res, os);
  }
}

int cmd_generate(const Options& o, std::ostream& out) {
  if (o.fn.empty()) throw UsageError("generate needs --fn {f1,f2}");
  if (o.out.empty()) throw UsageError("generate needs --out FILE");
  const Dataset d = load_dataset(o);
  write_xyz(d.cloud, o.out);
  out << "wrote " << d.cloud.size() << " points to " << o.out << '\n';
  return 0;
}

int cmd_fit(const Options& o, std::ostream& out, bool exporting) {
  if (exporting && o.out.empty()) throw UsageError("export needs --out DIR");
  const AdaptiveConfig cfg = config_of(o, mode_of(o.mode));
  const Dataset d = load_dataset(o);
  const FitResult r = run_fit(d.cloud, cfg, d.clean ? &*d.clean : nullptr);
  out << "lbar,ndofs,rmse\n" << o.lbar << ',' << r.report.final().ndofs << ',' << sci(r.report.final().rmse) << '\n';
  if (!o.out.empty()) export_fit(r, o.out, cfg.jump.L, o.grid_res);
  summary(out, r);
  return 0;
}

int cmd_compare(const Options& o, std::ostream& out) {
  const AdaptiveConfig iso = config_of(o, RefinementMode::isotropic);
  const AdaptiveConfig aniso = config_of(o, RefinementMode::anisotropic);
  const Dataset d = load_dataset(o);
  const PointCloud* ref = d.clean ? &*d.clean : nullptr;
  const FitResult jb = run_fit(d.cloud, iso, ref);
  const FitResult ajb = run_fit(d.cloud, aniso, ref);
  const FitResult fd = run_fault_driven_fit(d.cloud, iso, ref);
  const std::vector<LabeledRun> runs{{"JB", o.lbar, RefinementMode::isotropic, &jb},
                                     {"AJB", o.lbar, RefinementMode::anisotropic, &ajb}};
  write_results_csv(runs, fd, out);
  write_speedup_csv(runs, fd, out);
  if (!o.out.empty()) write_reports(runs, fd, o.out, iso.jump.L, o.grid_res);
  summary(out, ajb);
  return 0;
}

void add_options(CLI::App& app, Options& o) {
  app.set_config("--config", "", "key=value file (keys are long flag names; flags win)");
  app.add_option("--fn", o.fn, "synthetic test function")->check(CLI::IsMember({"f1", "f2"}));
  app.add_option("--n", o.n, "number of Halton samples");
  app.add_option("--noise-sigma", o.noise_sigma, "Gaussian noise standard deviation")->check(CLI::NonNegativeNumber);
  app.add_option("--seed", o.seed, "noise seed");
  app.add_option("--data", o.data, "XYZ input file");
  app.add_option("--degree", o.degree, "spline bidegree (p,p)")->check(CLI::IsMember({2, 3}));
  app.add_option("--lbar", o.lbar, "minimal jump class");
  app.add_option("--lmax", o.lmax, "maximal level L");
  app.add_option("--laniso", o.laniso, "first one-directional iteration (default: lbar)");
  app.add_option("--mode", o.mode, "refinement mode")->check(CLI::IsMember({"iso", "aniso", "fault"}));
  app.add_option("--mu", o.mu, "ridge regularization");
  app.add_option("--m", o.m, "minimal points per local fit");
  app.add_option("--kappa-max", o.kappa_max, "condition number limit");
  app.add_option("--grid-res", o.grid_res, "probe grid resolution")->check(CLI::PositiveNumber);
  app.add_option("--out", o.out, "output file (generate) or directory");
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Adaptive LR B-spline fitting of scattered data with jump-driven refinement", "lrqi"};
  app.require_subcommand(1);
  Options o;
  CLI::App* gen = app.add_subcommand("generate", "sample f1/f2 on a Halton set and write XYZ");
  CLI::App* fit = app.add_subcommand("fit", "fit one surface and print ndofs/RMSE");
  CLI::App* cmp = app.add_subcommand("compare", "jump-driven iso/aniso versus fault-driven");
  CLI::App* exp = app.add_subcommand("export", "fit and write mesh, surface and classification files");
  // Options live on the top-level app so one key=value config file serves every command.
  add_options(app, o);
  for (CLI::App* s : {gen, fit, cmp, exp}) s->fallthrough();

  std::vector<std::string> rev(args.rbegin(), args.rend());
  try {
    app.parse(rev);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << '\n' << app.help();
    return 2;
  }

  CLI::App* active = app.get_subcommands().front();
  try {
    if (active == gen) return cmd_generate(o, out);
    if (active == fit) return cmd_fit(o, out, false);
    if (active == cmp) return cmd_compare(o, out);
    return cmd_fit(o, out, true);
  } catch (const UsageError& e) {
    err << "error: " << e.what() << '\n' << app.help();
    return 2;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  }
}

}  // namespace lrqi
