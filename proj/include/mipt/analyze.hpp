#pragma once

// Turns run outputs into plot-ready tables:
//
// momentum -> momentum.csv
//   L, gamma, g0, l0, m, q, q_tilde, q_tilde_l0, C, C_err,
//   C_over_qt, C_over_qt_err, C_over_g0qt, C_over_g0qt_err
// and momentum_intercept.csv
//   L, gamma, g0, intercept, intercept_err
// (q -> 0 value of C/(g0 q_tilde) from the five lowest nonzero momenta).
//
// covariance -> covariance_dataset.csv
//   L, gamma, G_AB, G_AB_err, n_trajectories
//
// entropy -> entropy_profile.csv
//   L, gamma, ell, ell_tilde, S, S_err, S_scaled, C2, C2_err, ratio, ratio_err
// with S_scaled = S gamma / (J L).

#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "mipt/collapse.hpp"
#include "mipt/tables.hpp"

namespace mipt {

enum class AnalyzeMode { momentum, covariance, entropy };

AnalyzeMode parse_analyze_mode(const std::string& name);

struct AnalyzeResult {
  std::map<std::string, Table> tables;  ///< by output file name
};

/// Inputs are run directories or CSV files. All inputs must share the
/// family digest (same protocol up to gamma and L); covariance inputs must
/// not repeat an (L, gamma) cell. `force` skips both checks. A missing
/// column raises InvalidInput.
AnalyzeResult analyze(const std::vector<std::filesystem::path>& inputs, AnalyzeMode mode,
                      bool force = false);

void write_analysis(const AnalyzeResult& result, const std::filesystem::path& out_dir);

/// Reads a covariance table (covariance.csv, sweep_covariance.csv or
/// covariance_dataset.csv) as a scaling dataset.
collapse::ScalingDataset read_scaling_dataset(const std::filesystem::path& path);

}  // namespace mipt
