#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "sitn/calibration.hpp"
#include "sitn/eval.hpp"
#include "sitn/flow.hpp"
#include "sitn/types.hpp"

namespace sitn {

/// Shortest round-trip decimal rendering of a double (locale-free): parsing
/// the string recovers the exact bit pattern. Non-finite values render as
/// "inf", "-inf", "nan".
std::string format_double(double v);

/// Inverse of `format_double`; accepts anything strtod-like plus the three
/// non-finite spellings. Throws errc::bad_format on trailing garbage.
double parse_double(const std::string& s);

// --- Latent matrices -------------------------------------------------------
//
// Binary layout (little-endian):
//   magic "SITN" | u32 version = 1 | u64 count | u64 dim |
//   u32 layout = 0 (row-major) | count * dim * f32 values
//
// Values are stored in single precision: latents are detector inputs, not
// accumulators, and the format matches what GPU pipelines emit.

void write_latents(const std::string& path, const LatentMatrix& latents);
LatentMatrix read_latents(const std::string& path);

// --- Flow models ------------------------------------------------------------
//
// Binary layout (little-endian):
//   magic "SITF" | u32 version = 1 | u64 dim | u64 width | u32 layers |
//   per layer: u64 rows | u64 cols | rows*cols f32 weights | rows f32 biases

void save_flow(const std::string& path, const FlowModel& model);
FlowModel load_flow(const std::string& path);

// --- Calibration models -----------------------------------------------------
//
// JSON with lossless doubles so thresholds can be inspected and diffed.

void save_calibration(const std::string& path, const CalibrationModel& model);
CalibrationModel load_calibration(const std::string& path);

// --- Score tables -----------------------------------------------------------
//
// records.csv: header
//   id,s_ad,s_cv,q_ad,q_cv,s_sitn[,<method>...],label
// doubles rendered by format_double so files are byte-identical across runs.

void write_score_csv(const std::string& path,
                     const std::vector<ScoreRecord>& records);
std::vector<ScoreRecord> read_score_csv(const std::string& path);

void write_fpr_csv(const std::string& path,
                   const std::vector<FprPoint>& points);

void write_auroc_csv(const std::string& path,
                     const std::vector<MethodResult>& results);

// --- Experiment configs -----------------------------------------------------

/// Parses an experiment description from a JSON file. Unknown keys are
/// rejected (errc::bad_format) so typos cannot silently fall back to
/// defaults.
ExperimentConfig load_experiment_config(const std::string& path);

}  // namespace sitn
