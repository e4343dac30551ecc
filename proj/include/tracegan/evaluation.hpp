#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "tracegan/corpus.hpp"
#include "tracegan/image.hpp"
#include "tracegan/nets.hpp"

namespace tracegan {

// fraction of predictions equal to the unaltered label
double attack_success_rate(const std::vector<int>& predictions, int unaltered_index);

// 10*log10(255^2 / MSE) over all pixels and channels; inputs must be
// integral byte buffers. Equal images return +infinity (flagged, excluded
// from means downstream).
double psnr(const ImageBuffer& a, const ImageBuffer& b);

struct MeanPsnr {
  double mean = 0.0;      // over finite values only
  int finite_count = 0;
  int infinite_count = 0; // excluded from the mean
};
MeanPsnr mean_psnr(const std::vector<double>& values);

// mean local SSIM over an 11x11 Gaussian window (sigma 1.5), stability
// constants (0.01*255)^2 and (0.03*255)^2, averaged across channels; inputs
// must be integral byte buffers at least as large as the window
double ssim(const ImageBuffer& a, const ImageBuffer& b);

// argmax labels, ties broken toward the lowest index
std::vector<int> predict_labels(Surrogate& net, const std::vector<ImageBuffer>& patches,
                                int batch = 32);

// top-1 accuracy of the net on labeled patches
double baseline_accuracy(Surrogate& net, const LabeledPatchSet& data);

struct AttackReport {
  std::string victim_id;
  ClassDefinition class_def = ClassDefinition::Detection;
  double asr = 0.0;          // after attack
  double asr_before = 0.0;   // manipulated, unattacked
  double baseline_accuracy = 0.0;
  double mean_psnr = 0.0;
  int psnr_excluded = 0;     // infinite-PSNR pairs left out of the mean
  double mean_ssim = 0.0;
  int n_patches = 0;
};

enum class ReportFormat { Csv, Text };

// one row per report plus an averages row; deterministic ordering
std::string render_report(const std::vector<AttackReport>& reports, ReportFormat format);

void save_reports_json(const std::vector<AttackReport>& reports,
                       const std::filesystem::path& file);
std::vector<AttackReport> load_reports_json(const std::filesystem::path& file);

// binds a rendered table to its provenance
void write_metrics_manifest(const std::filesystem::path& file, const std::string& run_id,
                            const std::string& plan_hash, std::uint64_t seed,
                            const std::vector<std::pair<std::string, std::string>>& checkpoint_hashes,
                            const std::vector<std::string>& table_files);

}  // namespace tracegan
