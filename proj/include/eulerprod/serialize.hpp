#pragma once

#include <string>

#include "eulerprod/experiments.hpp"
#include "eulerprod/randmodel.hpp"

namespace eulerprod::serialize {

/// Ensemble JSON layout:
///   {"meta": {"method", "seed", "N", "M", "q", "weights", "grid",
///             "grid_hash"},
///    "samples": [[[re, im] per grid point] per sample]}
/// Grids carry explicit point lists so consumers never re-derive geometry.
void write_ensemble(const randmodel::Ensemble& e, const std::string& path);
randmodel::Ensemble read_ensemble(const std::string& path);

std::string grid_to_json(const randmodel::EvalGrid& grid);
randmodel::EvalGrid grid_from_json_file(const std::string& path);

/// Universality target files: {"kind": "const"|"poly"|"tabulated", ...}.
experiments::TargetFunction read_target(const std::string& path,
                                        const randmodel::EvalGrid& fallback_grid);

void write_comparison_json(const experiments::ComparisonReport& rep,
                           const std::string& path);
void write_comparison_csv(const experiments::ComparisonReport& rep,
                          const std::string& path);

void write_support_trace_json(const experiments::SupportApproxTrace& tr,
                              const std::string& path);
void write_support_trace_csv(const experiments::SupportApproxTrace& tr,
                             const std::string& path);

}  // namespace eulerprod::serialize
