#pragma once

#include <string>

#include "hyzeno/prolongation.hpp"
#include "hyzeno/simulator.hpp"

namespace hyzeno {

struct ExportOptions {
  /// Minimum spacing of exported flow samples. Segment endpoints are always
  /// kept; 0 keeps every integration sample.
  double sample_dt = 0.0;
};

/// Columns t,j,k,seg_id,branch_id,x1..xn; doubles in shortest round-trip form.
std::string run_to_csv(const ClassicalRun& run, const ExportOptions& opts = {});
std::string extended_to_csv(const ExtendedSolution& sol, const ExportOptions& opts = {});

/// JSON with segments, jumps, domain and the Zeno certificate.
std::string run_to_json(const ClassicalRun& run, const ExportOptions& opts = {});
/// JSON branch tree with lineage, ω-estimates and per-path Zeno events.
std::string extended_to_json(const ExtendedSolution& sol, const ExportOptions& opts = {});

/// Shortest decimal form that parses back to the same double.
std::string format_double(double v);

}  // namespace hyzeno
