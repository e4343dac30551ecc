#include "tracegan/corpus.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <stdexcept>

#include <json.hpp>

#include "tracegan/png_io.hpp"
#include "tracegan/rng.hpp"

namespace tracegan {

using nlohmann::json;

// ---------------------------------------------------------------------------
// Manipulations

std::string manip_kind_name(ManipKind k) {
  switch (k) {
    case ManipKind::Awgn: return "awgn";
    case ManipKind::GaussianBlur: return "blur";
    case ManipKind::MedianFilter: return "median";
  }
  throw std::logic_error("bad ManipKind");
}

ManipKind parse_manip_kind(const std::string& name) {
  if (name == "awgn") return ManipKind::Awgn;
  if (name == "blur" || name == "gaussian_blur") return ManipKind::GaussianBlur;
  if (name == "median" || name == "median_filter") return ManipKind::MedianFilter;
  throw std::invalid_argument("unknown manipulation kind: " + name);
}

std::string ManipulationSpec::id() const {
  std::string p = std::to_string(parameter);
  p.erase(p.find_last_not_of('0') + 1);
  if (!p.empty() && p.back() == '.') p.pop_back();
  return manip_kind_name(kind) + ":" + p;
}

ManipulationSpec ManipulationSpec::parse(const std::string& id) {
  auto colon = id.find(':');
  if (colon == std::string::npos)
    throw std::invalid_argument("manipulation id must be kind:parameter, got " + id);
  ManipulationSpec s;
  s.kind = parse_manip_kind(id.substr(0, colon));
  s.parameter = std::stod(id.substr(colon + 1));
  return s;
}

ManipulationTable::ManipulationTable(std::vector<ManipulationSpec> specs)
    : specs_(std::move(specs)) {
  for (std::size_t i = 0; i < specs_.size(); ++i)
    for (std::size_t j = i + 1; j < specs_.size(); ++j)
      if (specs_[i] == specs_[j])
        throw std::invalid_argument("duplicate manipulation spec " + specs_[i].id());
}

ManipulationTable ManipulationTable::standard() {
  std::vector<ManipulationSpec> s;
  for (double p : {0.5, 1.0, 1.5, 2.0, 2.5}) s.push_back({ManipKind::Awgn, p});
  for (double p : {1.0, 1.5, 2.0, 2.5, 3.0}) s.push_back({ManipKind::GaussianBlur, p});
  for (double p : {3.0, 5.0, 7.0, 9.0, 11.0}) s.push_back({ManipKind::MedianFilter, p});
  return ManipulationTable(std::move(s));
}

int ManipulationTable::index_of(const ManipulationSpec& s) const {
  for (std::size_t i = 0; i < specs_.size(); ++i)
    if (specs_[i] == s) return static_cast<int>(i);
  return -1;
}

std::vector<ManipKind> ManipulationTable::kinds() const {
  std::vector<ManipKind> out;
  for (ManipKind k : {ManipKind::Awgn, ManipKind::GaussianBlur, ManipKind::MedianFilter}) {
    for (const auto& s : specs_)
      if (s.kind == k) {
        out.push_back(k);
        break;
      }
  }
  return out;
}

ManipulationTable ManipulationTable::without(const std::vector<ManipulationSpec>& excluded) const {
  std::vector<ManipulationSpec> kept;
  for (const auto& s : specs_) {
    bool drop = std::any_of(excluded.begin(), excluded.end(),
                            [&](const ManipulationSpec& e) { return e == s; });
    if (!drop) kept.push_back(s);
  }
  return ManipulationTable(std::move(kept));
}

ManipulationTable ManipulationTable::only(const std::vector<ManipulationSpec>& kept) const {
  std::vector<ManipulationSpec> out;
  for (const auto& s : kept) {
    if (!contains(s))
      throw std::invalid_argument("spec not in table: " + s.id());
    out.push_back(s);
  }
  return ManipulationTable(std::move(out));
}

std::vector<double> gaussian_taps(double sigma) {
  if (!(sigma > 0.0)) throw std::invalid_argument("blur sigma must be positive");
  int radius = static_cast<int>(std::ceil(3.0 * sigma));
  std::vector<double> taps(2 * radius + 1);
  double sum = 0.0;
  for (int i = -radius; i <= radius; ++i) {
    double v = std::exp(-(static_cast<double>(i) * i) / (2.0 * sigma * sigma));
    taps[i + radius] = v;
    sum += v;
  }
  for (double& v : taps) v /= sum;
  return taps;
}

namespace {

// symmetric reflection: -1 -> 0, -2 -> 1, n -> n-1
int reflect_index(int i, int n) {
  while (i < 0 || i >= n) {
    if (i < 0) i = -1 - i;
    if (i >= n) i = 2 * n - 1 - i;
  }
  return i;
}

ImageBuffer add_awgn(const ImageBuffer& img, double sigma, std::uint64_t seed) {
  double s = img.scale == PixelScale::Byte ? sigma : sigma / 255.0;
  ImageBuffer out = img;
  Rng rng(seed);
  for (double& v : out.data) v += s * rng.normal();
  return out;
}

ImageBuffer gaussian_blur(const ImageBuffer& img, double sigma) {
  const std::vector<double> taps = gaussian_taps(sigma);
  const int radius = static_cast<int>(taps.size() / 2);
  const int h = img.height, w = img.width;
  ImageBuffer tmp(h, w, img.scale);
  // horizontal pass
  #pragma omp parallel for schedule(static)
  for (int r = 0; r < h; ++r) {
    for (int c = 0; c < w; ++c) {
      for (int ch = 0; ch < ImageBuffer::kChannels; ++ch) {
        double acc = 0.0;
        for (int t = -radius; t <= radius; ++t)
          acc += taps[t + radius] * img.at(r, reflect_index(c + t, w), ch);
        tmp.at(r, c, ch) = acc;
      }
    }
  }
  // vertical pass
  ImageBuffer out(h, w, img.scale);
  #pragma omp parallel for schedule(static)
  for (int r = 0; r < h; ++r) {
    for (int c = 0; c < w; ++c) {
      for (int ch = 0; ch < ImageBuffer::kChannels; ++ch) {
        double acc = 0.0;
        for (int t = -radius; t <= radius; ++t)
          acc += taps[t + radius] * tmp.at(reflect_index(r + t, h), c, ch);
        out.at(r, c, ch) = acc;
      }
    }
  }
  return out;
}

ImageBuffer median_filter(const ImageBuffer& img, int window) {
  const int h = img.height, w = img.width;
  const int radius = window / 2;
  ImageBuffer out(h, w, img.scale);
  #pragma omp parallel for schedule(static)
  for (int r = 0; r < h; ++r) {
    std::vector<double> vals(static_cast<std::size_t>(window) * window);
    for (int c = 0; c < w; ++c) {
      for (int ch = 0; ch < ImageBuffer::kChannels; ++ch) {
        std::size_t n = 0;
        for (int dr = -radius; dr <= radius; ++dr)
          for (int dc = -radius; dc <= radius; ++dc)
            vals[n++] = img.at(reflect_index(r + dr, h), reflect_index(c + dc, w), ch);
        auto mid = vals.begin() + static_cast<long>(n / 2);
        std::nth_element(vals.begin(), mid, vals.begin() + static_cast<long>(n));
        out.at(r, c, ch) = *mid;
      }
    }
  }
  return out;
}

}  // namespace

ImageBuffer apply_manipulation(const ImageBuffer& image, const ManipulationSpec& spec,
                               std::uint64_t seed) {
  if (image.height < 1 || image.width < 1)
    throw std::invalid_argument("apply_manipulation: empty image");
  switch (spec.kind) {
    case ManipKind::Awgn:
      if (!(spec.parameter > 0.0))
        throw std::invalid_argument("awgn sigma must be positive");
      return clip_to_scale(add_awgn(image, spec.parameter, seed));
    case ManipKind::GaussianBlur:
      if (!(spec.parameter > 0.0))
        throw std::invalid_argument("blur sigma must be positive");
      return clip_to_scale(gaussian_blur(image, spec.parameter));
    case ManipKind::MedianFilter: {
      double p = spec.parameter;
      int window = static_cast<int>(p);
      if (p != std::floor(p) || window < 1 || window % 2 == 0)
        throw std::invalid_argument("median window must be a positive odd integer");
      return clip_to_scale(median_filter(image, window));
    }
  }
  throw std::logic_error("bad ManipKind");
}

// ---------------------------------------------------------------------------
// Patches

std::vector<PatchOrigin> patch_grid(int height, int width, int patch_size) {
  if (patch_size < 1) throw std::invalid_argument("patch_size must be >= 1");
  std::vector<PatchOrigin> grid;
  for (int r = 0; r + patch_size <= height; r += patch_size)
    for (int c = 0; c + patch_size <= width; c += patch_size)
      grid.push_back({r, c});
  return grid;
}

std::vector<std::pair<ImageBuffer, PatchOrigin>> extract_patches(const ImageBuffer& image,
                                                                 int patch_size) {
  std::vector<std::pair<ImageBuffer, PatchOrigin>> out;
  for (const PatchOrigin& o : patch_grid(image.height, image.width, patch_size))
    out.emplace_back(crop(image, o.row, o.col, patch_size, patch_size), o);
  return out;
}

// ---------------------------------------------------------------------------
// Splits

const std::vector<std::string>& DatasetSplit::ids_of(const std::string& name) const {
  if (name == "eval") return eval_ids;
  if (name == "I") return investigator_ids;
  if (name == "A") return attacker_ids;
  throw std::invalid_argument("unknown split name: " + name);
}

DatasetSplit split_dataset(std::vector<std::string> image_ids, std::uint64_t seed) {
  if (image_ids.size() < 10)
    throw std::invalid_argument("split_dataset: need at least 10 image ids");
  std::sort(image_ids.begin(), image_ids.end());
  image_ids.erase(std::unique(image_ids.begin(), image_ids.end()), image_ids.end());
  if (image_ids.size() < 10)
    throw std::invalid_argument("split_dataset: need at least 10 distinct image ids");

  Rng rng(derive_seed(seed, "split"));
  for (std::size_t i = image_ids.size() - 1; i > 0; --i) {
    std::size_t j = rng.uniform_int(i + 1);
    std::swap(image_ids[i], image_ids[j]);
  }

  const std::size_t n = image_ids.size();
  const std::size_t n_eval = (n + 5) / 10;
  const std::size_t rest = n - n_eval;
  const std::size_t n_inv = (rest + 1) / 2;

  DatasetSplit split;
  split.seed = seed;
  split.eval_ids.assign(image_ids.begin(), image_ids.begin() + n_eval);
  split.investigator_ids.assign(image_ids.begin() + n_eval, image_ids.begin() + n_eval + n_inv);
  split.attacker_ids.assign(image_ids.begin() + n_eval + n_inv, image_ids.end());
  return split;
}

void save_split_manifest(const DatasetSplit& split, const std::filesystem::path& file) {
  json j;
  j["schema_version"] = 1;
  j["seed"] = split.seed;
  json images = json::array();
  auto emit = [&](const std::vector<std::string>& ids, const char* name) {
    for (const auto& id : ids) images.push_back({{"id", id}, {"split", name}});
  };
  emit(split.eval_ids, "eval");
  emit(split.investigator_ids, "I");
  emit(split.attacker_ids, "A");
  j["images"] = images;
  std::ofstream out(file);
  if (!out) throw std::runtime_error("cannot write split manifest: " + file.string());
  out << j.dump(2) << "\n";
}

DatasetSplit load_split_manifest(const std::filesystem::path& file) {
  std::ifstream in(file);
  if (!in) throw std::runtime_error("cannot read split manifest: " + file.string());
  json j = json::parse(in);
  DatasetSplit split;
  split.seed = j.at("seed").get<std::uint64_t>();
  for (const auto& e : j.at("images")) {
    const std::string name = e.at("split").get<std::string>();
    const std::string id = e.at("id").get<std::string>();
    if (name == "eval") split.eval_ids.push_back(id);
    else if (name == "I") split.investigator_ids.push_back(id);
    else if (name == "A") split.attacker_ids.push_back(id);
    else throw std::runtime_error("split manifest: unknown split " + name);
  }
  return split;
}

// ---------------------------------------------------------------------------
// Labels

std::string class_def_name(ClassDefinition d) {
  switch (d) {
    case ClassDefinition::Detection: return "detection";
    case ClassDefinition::Identification: return "identification";
    case ClassDefinition::Parameterization: return "parameterization";
  }
  throw std::logic_error("bad ClassDefinition");
}

ClassDefinition parse_class_def(const std::string& name) {
  if (name == "detection") return ClassDefinition::Detection;
  if (name == "identification" || name == "classification") return ClassDefinition::Identification;
  if (name == "parameterization") return ClassDefinition::Parameterization;
  throw std::invalid_argument("unknown class definition: " + name);
}

int class_count(ClassDefinition def, const ManipulationTable& table) {
  switch (def) {
    case ClassDefinition::Detection: return 2;
    case ClassDefinition::Identification: return 1 + static_cast<int>(table.kinds().size());
    case ClassDefinition::Parameterization: return 1 + static_cast<int>(table.size());
  }
  throw std::logic_error("bad ClassDefinition");
}

int label_of(const ManipulationSpec& spec, ClassDefinition def, const ManipulationTable& table) {
  int idx = table.index_of(spec);
  if (idx < 0)
    throw std::invalid_argument("label_of: spec outside configured set: " + spec.id());
  switch (def) {
    case ClassDefinition::Detection:
      return 1;
    case ClassDefinition::Identification: {
      auto kinds = table.kinds();
      for (std::size_t i = 0; i < kinds.size(); ++i)
        if (kinds[i] == spec.kind) return static_cast<int>(i) + 1;
      throw std::logic_error("kind not in table");
    }
    case ClassDefinition::Parameterization:
      return idx + 1;
  }
  throw std::logic_error("bad ClassDefinition");
}

// ---------------------------------------------------------------------------
// Providers

void MemoryImageProvider::add(std::string id, ImageBuffer img) {
  order_.push_back(std::move(id));
  images_.push_back(std::move(img));
}

std::vector<std::string> MemoryImageProvider::ids() const { return order_; }

ImageBuffer MemoryImageProvider::load(const std::string& id) const {
  for (std::size_t i = 0; i < order_.size(); ++i)
    if (order_[i] == id) return images_[i];
  throw std::invalid_argument("MemoryImageProvider: unknown id " + id);
}

DirectoryImageProvider::DirectoryImageProvider(std::filesystem::path dir) : dir_(std::move(dir)) {
  if (!std::filesystem::is_directory(dir_))
    throw std::invalid_argument("not a directory: " + dir_.string());
  for (const auto& e : std::filesystem::directory_iterator(dir_)) {
    if (!e.is_regular_file()) continue;
    std::string ext = e.path().extension().string();
    for (char& c : ext) c = static_cast<char>(std::tolower(c));
    if (ext == ".png" || ext == ".jpg" || ext == ".jpeg" || ext == ".ppm")
      ids_.push_back(e.path().filename().string());
  }
  std::sort(ids_.begin(), ids_.end());
}

std::vector<std::string> DirectoryImageProvider::ids() const { return ids_; }

ImageBuffer DirectoryImageProvider::load(const std::string& id) const {
  return read_image(dir_ / id);
}

// ---------------------------------------------------------------------------
// Paired and labeled samples

namespace {

struct SourcePick {
  std::string id;
  ImageBuffer image;
  PatchOrigin origin;
};

SourcePick pick_source(const ImageProvider& provider, const std::vector<std::string>& split_ids,
                       int patch_size, Rng& rng) {
  if (split_ids.empty()) throw std::invalid_argument("empty split");
  for (int attempt = 0; attempt < 64; ++attempt) {
    const std::string& id = split_ids[rng.uniform_int(split_ids.size())];
    ImageBuffer img = provider.load(id);
    auto grid = patch_grid(img.height, img.width, patch_size);
    if (grid.empty()) continue;
    PatchOrigin origin = grid[rng.uniform_int(grid.size())];
    return {id, std::move(img), origin};
  }
  throw std::runtime_error("no image in split large enough for the requested patch size");
}

void check_specs(const ManipulationTable& table, const std::vector<ManipulationSpec>& specs) {
  if (specs.empty()) throw std::invalid_argument("no manipulation specs requested");
  for (const auto& s : specs)
    if (!table.contains(s))
      throw std::invalid_argument("requested spec not in configured set: " + s.id());
}

}  // namespace

std::vector<PairedSample> build_paired_batch(const ImageProvider& provider,
                                             const std::vector<std::string>& split_ids,
                                             int batch_size, const ManipulationTable& table,
                                             const std::vector<ManipulationSpec>& specs,
                                             int patch_size, std::uint64_t seed) {
  check_specs(table, specs);
  std::vector<PairedSample> out(batch_size);
  // per-sample derived seeds keep this loop order-independent and parallelizable
  #pragma omp parallel for schedule(dynamic)
  for (int i = 0; i < batch_size; ++i) {
    Rng rng(derive_seed(seed, static_cast<std::uint64_t>(i)));
    SourcePick pick = pick_source(provider, split_ids, patch_size, rng);
    const ManipulationSpec& spec = specs[rng.uniform_int(specs.size())];
    std::uint64_t manip_seed = rng.next_u64();
    ImageBuffer manipulated_full = apply_manipulation(pick.image, spec, manip_seed);
    PairedSample s;
    s.unaltered = crop(pick.image, pick.origin.row, pick.origin.col, patch_size, patch_size);
    s.manipulated =
        crop(manipulated_full, pick.origin.row, pick.origin.col, patch_size, patch_size);
    s.spec = spec;
    s.source_id = pick.id;
    s.origin = pick.origin;
    s.manip_seed = manip_seed;
    out[i] = std::move(s);
  }
  return out;
}

std::vector<PairedSample> build_unpaired_batch(const ImageProvider& provider,
                                               const std::vector<std::string>& split_ids,
                                               int batch_size, const ManipulationTable& table,
                                               const std::vector<ManipulationSpec>& specs,
                                               int patch_size, std::uint64_t seed) {
  check_specs(table, specs);
  std::vector<PairedSample> out(batch_size);
  #pragma omp parallel for schedule(dynamic)
  for (int i = 0; i < batch_size; ++i) {
    Rng rng(derive_seed(seed, static_cast<std::uint64_t>(i) * 2 + 1));
    SourcePick real_pick = pick_source(provider, split_ids, patch_size, rng);
    SourcePick fake_pick = pick_source(provider, split_ids, patch_size, rng);
    const ManipulationSpec& spec = specs[rng.uniform_int(specs.size())];
    std::uint64_t manip_seed = rng.next_u64();
    ImageBuffer manipulated_full = apply_manipulation(fake_pick.image, spec, manip_seed);
    PairedSample s;
    s.unaltered =
        crop(real_pick.image, real_pick.origin.row, real_pick.origin.col, patch_size, patch_size);
    s.manipulated = crop(manipulated_full, fake_pick.origin.row, fake_pick.origin.col, patch_size,
                         patch_size);
    s.spec = spec;
    s.source_id = fake_pick.id;
    s.origin = fake_pick.origin;
    s.manip_seed = manip_seed;
    out[i] = std::move(s);
  }
  return out;
}

LabeledPatchSet build_labeled_patches(const ImageProvider& provider,
                                      const std::vector<std::string>& ids,
                                      const ManipulationTable& table, ClassDefinition def,
                                      int patch_size, int patches_per_image,
                                      std::uint64_t seed) {
  if (ids.empty()) throw std::invalid_argument("build_labeled_patches: empty id list");
  if (table.size() == 0) throw std::invalid_argument("build_labeled_patches: empty table");
  LabeledPatchSet set;
  set.num_classes = class_count(def, table);
  // keep classes roughly balanced: the unaltered class receives as many tiles
  // as one manipulated class would
  const int manip_classes = set.num_classes - 1;
  const int unaltered_per_image = std::max<int>(
      1, static_cast<int>((table.size() + manip_classes - 1) / manip_classes) * patches_per_image);

  for (std::size_t img_idx = 0; img_idx < ids.size(); ++img_idx) {
    ImageBuffer image = provider.load(ids[img_idx]);
    auto grid = patch_grid(image.height, image.width, patch_size);
    if (grid.empty()) continue;
    Rng rng(derive_seed(seed, "labeled:" + ids[img_idx]));

    auto sample_origins = [&](int count) {
      std::vector<PatchOrigin> chosen;
      for (int k = 0; k < count; ++k) chosen.push_back(grid[rng.uniform_int(grid.size())]);
      return chosen;
    };

    // quantize like the PNG store the patches come from downstream
    const ImageBuffer unaltered = quantize_bytes(image);
    for (const PatchOrigin& o : sample_origins(unaltered_per_image)) {
      set.patches.push_back(crop(unaltered, o.row, o.col, patch_size, patch_size));
      set.labels.push_back(kUnalteredLabel);
    }
    for (const auto& spec : table.specs()) {
      ImageBuffer manipulated = quantize_bytes(apply_manipulation(image, spec, rng.next_u64()));
      int label = label_of(spec, def, table);
      for (const PatchOrigin& o : sample_origins(patches_per_image)) {
        set.patches.push_back(crop(manipulated, o.row, o.col, patch_size, patch_size));
        set.labels.push_back(label);
      }
    }
  }
  if (set.patches.empty())
    throw std::runtime_error("build_labeled_patches: no image large enough for patch size");
  return set;
}

}  // namespace tracegan
