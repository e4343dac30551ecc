#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "tracegan/image.hpp"

namespace tracegan {

// ---------------------------------------------------------------------------
// Manipulations

enum class ManipKind { Awgn, GaussianBlur, MedianFilter };

std::string manip_kind_name(ManipKind k);
ManipKind parse_manip_kind(const std::string& name);

struct ManipulationSpec {
  ManipKind kind = ManipKind::Awgn;
  double parameter = 0.0;

  std::string id() const;  // e.g. "awgn:1.5", "median:7"
  static ManipulationSpec parse(const std::string& id);

  bool operator==(const ManipulationSpec& o) const {
    return kind == o.kind && parameter == o.parameter;
  }
};

// Ordered set of active (kind, parameter) pairs. The standard table holds the
// fifteen pairs used throughout: awgn sigma {0.5,1,1.5,2,2.5}, blur sigma
// {1,1.5,2,2.5,3}, median window {3,5,7,9,11}.
class ManipulationTable {
 public:
  ManipulationTable() = default;
  explicit ManipulationTable(std::vector<ManipulationSpec> specs);

  static ManipulationTable standard();

  const std::vector<ManipulationSpec>& specs() const { return specs_; }
  std::size_t size() const { return specs_.size(); }
  bool contains(const ManipulationSpec& s) const { return index_of(s) >= 0; }
  int index_of(const ManipulationSpec& s) const;

  // kinds present, in enum order
  std::vector<ManipKind> kinds() const;

  ManipulationTable without(const std::vector<ManipulationSpec>& excluded) const;
  ManipulationTable only(const std::vector<ManipulationSpec>& kept) const;

 private:
  std::vector<ManipulationSpec> specs_;
};

// Applies one manipulation to a whole image. Noise sigma is interpreted on
// the byte (0..255) scale regardless of the image's declared scale; noise is
// drawn independently per channel. Blur uses a truncated normalized Gaussian
// kernel of odd side 2*ceil(3*sigma)+1; blur and median use reflect padding.
// Output is clipped to the declared scale. The seed only matters for awgn.
ImageBuffer apply_manipulation(const ImageBuffer& image, const ManipulationSpec& spec,
                               std::uint64_t seed);

// 1-D truncated, renormalized Gaussian taps (exposed for tests)
std::vector<double> gaussian_taps(double sigma);

// ---------------------------------------------------------------------------
// Patches

struct PatchOrigin {
  int row = 0;
  int col = 0;
  bool operator==(const PatchOrigin& o) const { return row == o.row && col == o.col; }
};

// Non-overlapping row-major tiling of the top-left region; remainder pixels
// are discarded. An image smaller than patch_size yields an empty list.
std::vector<PatchOrigin> patch_grid(int height, int width, int patch_size);
std::vector<std::pair<ImageBuffer, PatchOrigin>> extract_patches(const ImageBuffer& image,
                                                                 int patch_size = 256);

// ---------------------------------------------------------------------------
// Splits

struct DatasetSplit {
  std::vector<std::string> eval_ids;
  std::vector<std::string> investigator_ids;  // "I-set"
  std::vector<std::string> attacker_ids;      // "A-set"
  std::uint64_t seed = 0;

  const std::vector<std::string>& ids_of(const std::string& name) const;
};

// Deterministic 10/45/45-style split: |eval| ~ 10%, I and A bisect the rest
// (sizes differ by at most one). Requires at least 10 ids.
DatasetSplit split_dataset(std::vector<std::string> image_ids, std::uint64_t seed);

void save_split_manifest(const DatasetSplit& split, const std::filesystem::path& file);
DatasetSplit load_split_manifest(const std::filesystem::path& file);

// ---------------------------------------------------------------------------
// Class definitions and labels

enum class ClassDefinition { Detection, Identification, Parameterization };

std::string class_def_name(ClassDefinition d);
ClassDefinition parse_class_def(const std::string& name);

// Unaltered is label 0 under every definition.
inline constexpr int kUnalteredLabel = 0;

int class_count(ClassDefinition def, const ManipulationTable& table);
int label_of(const ManipulationSpec& spec, ClassDefinition def, const ManipulationTable& table);

// ---------------------------------------------------------------------------
// Paired samples

struct PairedSample {
  ImageBuffer unaltered;    // patch
  ImageBuffer manipulated;  // patch, same dims
  ManipulationSpec spec;
  std::string source_id;
  PatchOrigin origin;
  std::uint64_t manip_seed = 0;  // seed passed to apply_manipulation on the full image
};

class ImageProvider {
 public:
  virtual ~ImageProvider() = default;
  virtual std::vector<std::string> ids() const = 0;
  virtual ImageBuffer load(const std::string& id) const = 0;
};

class MemoryImageProvider : public ImageProvider {
 public:
  void add(std::string id, ImageBuffer img);
  std::vector<std::string> ids() const override;
  ImageBuffer load(const std::string& id) const override;

 private:
  std::vector<std::string> order_;
  std::vector<ImageBuffer> images_;
};

// Loads PNG images from a directory, id = filename.
class DirectoryImageProvider : public ImageProvider {
 public:
  explicit DirectoryImageProvider(std::filesystem::path dir);
  std::vector<std::string> ids() const override;
  ImageBuffer load(const std::string& id) const override;

 private:
  std::filesystem::path dir_;
  std::vector<std::string> ids_;
};

// Emits pixel-to-pixel paired samples: the manipulation is applied to the
// full source image before cropping, so window-based operations see true
// neighborhoods even at patch borders. Every spec must be in `table`.
std::vector<PairedSample> build_paired_batch(const ImageProvider& provider,
                                             const std::vector<std::string>& split_ids,
                                             int batch_size, const ManipulationTable& table,
                                             const std::vector<ManipulationSpec>& specs,
                                             int patch_size, std::uint64_t seed);

// Ablation data: unaltered and manipulated patches drawn independently, no
// correspondence between the two.
std::vector<PairedSample> build_unpaired_batch(const ImageProvider& provider,
                                               const std::vector<std::string>& split_ids,
                                               int batch_size, const ManipulationTable& table,
                                               const std::vector<ManipulationSpec>& specs,
                                               int patch_size, std::uint64_t seed);

// Labeled patches for classifier training/evaluation.
struct LabeledPatchSet {
  std::vector<ImageBuffer> patches;
  std::vector<int> labels;
  int num_classes = 0;
};

// Materializes up to `patches_per_image` tiles per (image, class). Class 0 is
// unaltered; manipulated classes follow the class definition over `table`.
LabeledPatchSet build_labeled_patches(const ImageProvider& provider,
                                      const std::vector<std::string>& ids,
                                      const ManipulationTable& table, ClassDefinition def,
                                      int patch_size, int patches_per_image,
                                      std::uint64_t seed);

}  // namespace tracegan
