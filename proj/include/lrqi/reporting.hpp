#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "lrqi/adaptive_driver.hpp"

namespace lrqi {

/// Fault-driven over jump-driven time ratios per stage.
struct Speedup {
  double mark_refine = 1.0;
  double solve = 1.0;
  double eval = 1.0;
  double total = 1.0;
};

Speedup compute_speedup(const FitReport& fault, const FitReport& jump);

/// A jump-driven run with the label used in tables (e.g. "JB", "AJB").
struct LabeledRun {
  std::string label;
  int L_bar = 0;
  RefinementMode mode = RefinementMode::isotropic;
  const FitResult* result = nullptr;
};

void write_report_csv(const FitReport& report, std::ostream& os);
void write_faults_csv(const std::vector<FaultPoint>& points, std::ostream& os);
void write_results_csv(const std::vector<LabeledRun>& runs, const FitResult& fault, std::ostream& os);
void write_speedup_csv(const std::vector<LabeledRun>& runs, const FitResult& fault, std::ostream& os);
/// Meshlines as <line> elements, fault points as dots colored by jump class.
void write_mesh_svg(const LRMesh& mesh, const std::vector<FaultPoint>& points, int L, std::ostream& os);
/// x,y,z on an n x n probe grid over the domain.
void write_surface_grid(const Surface& surface, int n, std::ostream& os);
/// Mesh text followed by one line per B-spline.
void write_surface_text(const Surface& surface, std::ostream& os);

/// results.csv, speedup.csv, mesh.svg and surface_grid.csv for a comparison. The SVG and grid
/// are taken from the first jump-driven run.
void write_reports(const std::vector<LabeledRun>& runs, const FitResult& fault, const std::filesystem::path& out,
                   int L, int grid_n = 101);

}  // namespace lrqi
