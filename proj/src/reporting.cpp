#include "lrqi/reporting.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <ostream>

namespace lrqi {

namespace {

double ratio(double num, double den) {
  if (num == den) return 1.0;
  return den > 0 ? num / den : std::numeric_limits<double>::infinity();
}

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

std::ofstream open_out(const std::filesystem::path& p) {
  std::ofstream os(p);
  if (!os) throw std::runtime_error("cannot write " + p.string());
  return os;
}

// Blue (low class) to red (high class).
std::string class_color(int cls, int L) {
  const double t = L > 1 ? std::clamp((cls - 1.0) / (L - 1.0), 0.0, 1.0) : 1.0;
  char buf[16];
  std::snprintf(buf, sizeof buf, "#%02x%02x%02x", static_cast<int>(255 * t), 40, static_cast<int>(255 * (1 - t)));
  return buf;
}

}  // namespace

Speedup compute_speedup(const FitReport& fault, const FitReport& jump) {
  return {ratio(fault.mark_refine_time(), jump.mark_refine_time()), ratio(fault.solve_time(), jump.solve_time()),
          ratio(fault.eval_time(), jump.eval_time()), ratio(fault.total_time(), jump.total_time())};
}

void write_report_csv(const FitReport& report, std::ostream& os) {
  os << "iteration,ndofs,rmse,rmse_reference,t_mark_refine,t_solve,t_eval\n";
  for (const auto& r : report.iterations) {
    os << r.iteration << ',' << r.ndofs << ',' << fmt("%.6e", r.rmse) << ','
       << (r.rmse_reference ? fmt("%.6e", *r.rmse_reference) : "") << ',' << fmt("%.6f", r.t_mark_refine) << ','
       << fmt("%.6f", r.t_solve) << ',' << fmt("%.6f", r.t_eval) << '\n';
  }
}

void write_faults_csv(const std::vector<FaultPoint>& points, std::ostream& os) {
  os << "x,y,kind,dir_x,dir_y,alignment,jump,class\n";
  for (const auto& p : points) {
    os << fmt("%.17g", p.location.x) << ',' << fmt("%.17g", p.location.y) << ',' << to_string(p.kind) << ','
       << fmt("%.17g", p.direction.x) << ',' << fmt("%.17g", p.direction.y) << ',' << to_string(p.alignment) << ','
       << fmt("%.17g", p.jump) << ',' << (p.jump_class ? std::to_string(*p.jump_class) : "") << '\n';
  }
}

void write_results_csv(const std::vector<LabeledRun>& runs, const FitResult& fault, std::ostream& os) {
  os << "label,lbar,mode,ndofs,rmse\n";
  for (const auto& r : runs) {
    const auto& f = r.result->report.final();
    os << r.label << ',' << r.L_bar << ',' << to_string(r.mode) << ',' << f.ndofs << ',' << fmt("%.6e", f.rmse)
       << '\n';
  }
  const auto& f = fault.report.final();
  os << "FD,," << to_string(RefinementMode::fault_driven) << ',' << f.ndofs << ',' << fmt("%.6e", f.rmse) << '\n';
}

void write_speedup_csv(const std::vector<LabeledRun>& runs, const FitResult& fault, std::ostream& os) {
  os << "label,lbar,mark_refine,solve,eval,total\n";
  for (const auto& r : runs) {
    const Speedup s = compute_speedup(fault.report, r.result->report);
    os << r.label << ',' << r.L_bar << ',' << fmt("%.4g", s.mark_refine) << ',' << fmt("%.4g", s.solve) << ','
       << fmt("%.4g", s.eval) << ',' << fmt("%.4g", s.total) << '\n';
  }
}

void write_mesh_svg(const LRMesh& mesh, const std::vector<FaultPoint>& points, int L, std::ostream& os) {
  const double size = 800.0;
  const Rect d = mesh.domain();
  const KnotGrid& g = mesh.grid();
  const auto sx = [&](double x) { return (x - d.x0) / d.width() * size; };
  const auto sy = [&](double y) { return size - (y - d.y0) / d.height() * size; };

  os << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
     << "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"" << size << "\" height=\"" << size
     << "\" viewBox=\"0 0 " << size << ' ' << size << "\">\n"
     << "<g stroke=\"black\" stroke-width=\"0.5\">\n";
  for (const auto& l : mesh.lines()) {
    double x1, x2, y1, y2;
    if (l.normal == Axis::x) {
      x1 = x2 = g.to_domain(Axis::x, l.fixed);
      y1 = g.to_domain(Axis::y, l.start);
      y2 = g.to_domain(Axis::y, l.end);
    } else {
      y1 = y2 = g.to_domain(Axis::y, l.fixed);
      x1 = g.to_domain(Axis::x, l.start);
      x2 = g.to_domain(Axis::x, l.end);
    }
    os << "<line x1=\"" << fmt("%.3f", sx(x1)) << "\" y1=\"" << fmt("%.3f", sy(y1)) << "\" x2=\""
       << fmt("%.3f", sx(x2)) << "\" y2=\"" << fmt("%.3f", sy(y2)) << "\"/>\n";
  }
  os << "</g>\n<g stroke=\"none\">\n";
  for (const auto& p : points) {
    os << "<circle cx=\"" << fmt("%.3f", sx(p.location.x)) << "\" cy=\"" << fmt("%.3f", sy(p.location.y))
       << "\" r=\"2\" fill=\"" << class_color(p.jump_class.value_or(L), L) << "\"/>\n";
  }
  os << "</g>\n</svg>\n";
}

void write_surface_grid(const Surface& surface, int n, std::ostream& os) {
  const Rect d = surface.spline.mesh.domain();
  os << "x,y,z\n";
  for (int j = 0; j < n; ++j)
    for (int i = 0; i < n; ++i) {
      const double x = n > 1 ? d.x0 + d.width() * i / (n - 1) : d.x0;
      const double y = n > 1 ? d.y0 + d.height() * j / (n - 1) : d.y0;
      os << fmt("%.17g", x) << ',' << fmt("%.17g", y) << ',' << fmt("%.17g", eval_surface(surface, x, y)) << '\n';
    }
}

void write_surface_text(const Surface& surface, std::ostream& os) {
  surface.spline.mesh.write(os);
  surface.spline.basis.write(os);
}

void write_reports(const std::vector<LabeledRun>& runs, const FitResult& fault, const std::filesystem::path& out,
                   int L, int grid_n) {
  std::error_code ec;
  std::filesystem::create_directories(out, ec);
  {
    auto os = open_out(out / "results.csv");
    write_results_csv(runs, fault, os);
  }
  {
    auto os = open_out(out / "speedup.csv");
    write_speedup_csv(runs, fault, os);
  }
  const FitResult& shown = runs.empty() ? fault : *runs.front().result;
  {
    auto os = open_out(out / "mesh.svg");
    write_mesh_svg(shown.surface.spline.mesh, shown.faults, L, os);
  }
  {
    auto os = open_out(out / "surface_grid.csv");
    write_surface_grid(shown.surface, grid_n, os);
  }
}

}  // namespace lrqi
