#include "tracegan/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace tracegan {

using nlohmann::json;

double attack_success_rate(const std::vector<int>& predictions, int unaltered_index) {
  if (predictions.empty())
    throw std::invalid_argument("attack_success_rate: empty prediction list");
  std::size_t hits = 0;
  for (int p : predictions)
    if (p == unaltered_index) ++hits;
  return static_cast<double>(hits) / static_cast<double>(predictions.size());
}

double psnr(const ImageBuffer& a, const ImageBuffer& b) {
  if (!a.same_shape(b)) throw std::invalid_argument("psnr: dimension mismatch");
  if (!is_integral_byte(a) || !is_integral_byte(b))
    throw std::invalid_argument("psnr: inputs must be integral byte buffers");
  double mse = 0.0;
  for (std::size_t i = 0; i < a.data.size(); ++i) {
    double d = a.data[i] - b.data[i];
    mse += d * d;
  }
  mse /= static_cast<double>(a.data.size());
  if (mse == 0.0) return std::numeric_limits<double>::infinity();
  return 10.0 * std::log10(255.0 * 255.0 / mse);
}

MeanPsnr mean_psnr(const std::vector<double>& values) {
  MeanPsnr out;
  double acc = 0.0;
  for (double v : values) {
    if (std::isinf(v)) {
      ++out.infinite_count;
    } else {
      acc += v;
      ++out.finite_count;
    }
  }
  if (out.finite_count > 0) out.mean = acc / out.finite_count;
  return out;
}

// ---------------------------------------------------------------------------
// SSIM: separable Gaussian-window moments over the valid region

namespace {

constexpr int kSsimWindow = 11;
constexpr double kSsimSigma = 1.5;
constexpr double kC1 = (0.01 * 255.0) * (0.01 * 255.0);
constexpr double kC2 = (0.03 * 255.0) * (0.03 * 255.0);

std::vector<double> ssim_window() {
  std::vector<double> w(kSsimWindow);
  double sum = 0.0;
  const int r = kSsimWindow / 2;
  for (int i = -r; i <= r; ++i) {
    w[i + r] = std::exp(-(static_cast<double>(i) * i) / (2.0 * kSsimSigma * kSsimSigma));
    sum += w[i + r];
  }
  for (double& v : w) v /= sum;
  return w;
}

// weighted valid-mode filtering along rows then columns
std::vector<double> filter_valid(const std::vector<double>& img, int h, int w,
                                 const std::vector<double>& taps) {
  const int k = static_cast<int>(taps.size());
  const int ow = w - k + 1, oh = h - k + 1;
  std::vector<double> rows(static_cast<std::size_t>(h) * ow);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < ow; ++x) {
      double acc = 0.0;
      for (int t = 0; t < k; ++t) acc += taps[t] * img[static_cast<std::size_t>(y) * w + x + t];
      rows[static_cast<std::size_t>(y) * ow + x] = acc;
    }
  std::vector<double> out(static_cast<std::size_t>(oh) * ow);
  for (int y = 0; y < oh; ++y)
    for (int x = 0; x < ow; ++x) {
      double acc = 0.0;
      for (int t = 0; t < k; ++t) acc += taps[t] * rows[static_cast<std::size_t>(y + t) * ow + x];
      out[static_cast<std::size_t>(y) * ow + x] = acc;
    }
  return out;
}

}  // namespace

double ssim(const ImageBuffer& a, const ImageBuffer& b) {
  if (!a.same_shape(b)) throw std::invalid_argument("ssim: dimension mismatch");
  if (a.height < kSsimWindow || a.width < kSsimWindow)
    throw std::invalid_argument("ssim: image smaller than the 11x11 window");
  if (!is_integral_byte(a) || !is_integral_byte(b))
    throw std::invalid_argument("ssim: inputs must be integral byte buffers");

  static const std::vector<double> taps = ssim_window();
  const int h = a.height, w = a.width;
  const std::size_t plane = static_cast<std::size_t>(h) * w;

  double channel_acc = 0.0;
  std::vector<double> xa(plane), xb(plane), xaa(plane), xbb(plane), xab(plane);
  for (int ch = 0; ch < 3; ++ch) {
    for (int y = 0; y < h; ++y)
      for (int x = 0; x < w; ++x) {
        const std::size_t i = static_cast<std::size_t>(y) * w + x;
        const double va = a.at(y, x, ch), vb = b.at(y, x, ch);
        xa[i] = va;
        xb[i] = vb;
        xaa[i] = va * va;
        xbb[i] = vb * vb;
        xab[i] = va * vb;
      }
    auto mu_a = filter_valid(xa, h, w, taps);
    auto mu_b = filter_valid(xb, h, w, taps);
    auto m_aa = filter_valid(xaa, h, w, taps);
    auto m_bb = filter_valid(xbb, h, w, taps);
    auto m_ab = filter_valid(xab, h, w, taps);

    double acc = 0.0;
    for (std::size_t i = 0; i < mu_a.size(); ++i) {
      const double ma = mu_a[i], mb = mu_b[i];
      const double var_a = m_aa[i] - ma * ma;
      const double var_b = m_bb[i] - mb * mb;
      const double cov = m_ab[i] - ma * mb;
      acc += ((2.0 * ma * mb + kC1) * (2.0 * cov + kC2)) /
             ((ma * ma + mb * mb + kC1) * (var_a + var_b + kC2));
    }
    channel_acc += acc / static_cast<double>(mu_a.size());
  }
  return channel_acc / 3.0;
}

// ---------------------------------------------------------------------------
// classification helpers

std::vector<int> predict_labels(Surrogate& net, const std::vector<ImageBuffer>& patches,
                                int batch) {
  std::vector<int> labels;
  labels.reserve(patches.size());
  const bool had_grads = grad_enabled();
  set_grad_enabled(false);
  for (std::size_t start = 0; start < patches.size(); start += batch) {
    const std::size_t end = std::min(patches.size(), start + batch);
    std::vector<const ImageBuffer*> ptrs;
    for (std::size_t i = start; i < end; ++i) ptrs.push_back(&patches[i]);
    Tensor probs = net.forward(patches_to_tensor(ptrs), false);
    for (int n = 0; n < probs.n; ++n) {
      int best = 0;
      double best_p = probs.at(n, 0, 0, 0);
      for (int k = 1; k < probs.c; ++k)
        if (probs.at(n, k, 0, 0) > best_p) {  // ties keep the lowest index
          best_p = probs.at(n, k, 0, 0);
          best = k;
        }
      labels.push_back(best);
    }
  }
  set_grad_enabled(had_grads);
  return labels;
}

double baseline_accuracy(Surrogate& net, const LabeledPatchSet& data) {
  if (data.num_classes != net.cfg().num_classes)
    throw std::invalid_argument("baseline_accuracy: label/class-count mismatch");
  if (data.patches.empty()) throw std::invalid_argument("baseline_accuracy: empty data");
  const std::vector<int> preds = predict_labels(net, data.patches);
  std::size_t hits = 0;
  for (std::size_t i = 0; i < preds.size(); ++i)
    if (preds[i] == data.labels[i]) ++hits;
  return static_cast<double>(hits) / static_cast<double>(preds.size());
}

// ---------------------------------------------------------------------------
// reports

namespace {

std::vector<AttackReport> sorted_reports(std::vector<AttackReport> reports) {
  std::sort(reports.begin(), reports.end(), [](const AttackReport& a, const AttackReport& b) {
    if (a.victim_id != b.victim_id) return a.victim_id < b.victim_id;
    return static_cast<int>(a.class_def) < static_cast<int>(b.class_def);
  });
  return reports;
}

AttackReport average_row(const std::vector<AttackReport>& reports) {
  AttackReport avg;
  avg.victim_id = "Avg.";
  for (const auto& r : reports) {
    avg.asr += r.asr;
    avg.asr_before += r.asr_before;
    avg.baseline_accuracy += r.baseline_accuracy;
    avg.mean_psnr += r.mean_psnr;
    avg.mean_ssim += r.mean_ssim;
    avg.psnr_excluded += r.psnr_excluded;
    avg.n_patches += r.n_patches;
  }
  const double n = static_cast<double>(reports.size());
  avg.asr /= n;
  avg.asr_before /= n;
  avg.baseline_accuracy /= n;
  avg.mean_psnr /= n;
  avg.mean_ssim /= n;
  return avg;
}

}  // namespace

std::string render_report(const std::vector<AttackReport>& reports, ReportFormat format) {
  if (reports.empty()) throw std::invalid_argument("render_report: no reports");
  std::vector<AttackReport> rows = sorted_reports(reports);
  rows.push_back(average_row(rows));

  std::ostringstream out;
  out << std::fixed << std::setprecision(4);
  const char* headers[] = {"victim",    "class_def", "asr",       "asr_before", "baseline_acc",
                           "mean_psnr", "mean_ssim", "psnr_excl", "n_patches"};
  auto cells = [&](const AttackReport& r) {
    std::ostringstream c;
    c << std::fixed << std::setprecision(4);
    c << r.victim_id << '\x1f' << (r.victim_id == "Avg." ? "-" : class_def_name(r.class_def))
      << '\x1f' << r.asr << '\x1f' << r.asr_before << '\x1f' << r.baseline_accuracy << '\x1f'
      << r.mean_psnr << '\x1f' << r.mean_ssim << '\x1f' << r.psnr_excluded << '\x1f'
      << r.n_patches;
    return c.str();
  };
  auto split = [](const std::string& s) {
    std::vector<std::string> parts;
    std::string cur;
    for (char ch : s) {
      if (ch == '\x1f') {
        parts.push_back(cur);
        cur.clear();
      } else {
        cur += ch;
      }
    }
    parts.push_back(cur);
    return parts;
  };

  std::vector<std::vector<std::string>> table;
  table.emplace_back(std::begin(headers), std::end(headers));
  for (const auto& r : rows) table.push_back(split(cells(r)));

  if (format == ReportFormat::Csv) {
    for (const auto& row : table) {
      for (std::size_t i = 0; i < row.size(); ++i) out << (i ? "," : "") << row[i];
      out << "\n";
    }
  } else {
    std::vector<std::size_t> widths(table[0].size(), 0);
    for (const auto& row : table)
      for (std::size_t i = 0; i < row.size(); ++i) widths[i] = std::max(widths[i], row[i].size());
    for (const auto& row : table) {
      for (std::size_t i = 0; i < row.size(); ++i)
        out << (i ? "  " : "") << std::setw(static_cast<int>(widths[i])) << std::left << row[i];
      out << "\n";
    }
  }
  return out.str();
}

namespace {
json report_to_json(const AttackReport& r) {
  return json{{"victim_id", r.victim_id},
              {"class_def", class_def_name(r.class_def)},
              {"asr", r.asr},
              {"asr_before", r.asr_before},
              {"baseline_accuracy", r.baseline_accuracy},
              {"mean_psnr", r.mean_psnr},
              {"psnr_excluded", r.psnr_excluded},
              {"mean_ssim", r.mean_ssim},
              {"n_patches", r.n_patches}};
}

AttackReport report_from_json(const json& j) {
  AttackReport r;
  r.victim_id = j.at("victim_id").get<std::string>();
  r.class_def = parse_class_def(j.at("class_def").get<std::string>());
  r.asr = j.at("asr").get<double>();
  r.asr_before = j.at("asr_before").get<double>();
  r.baseline_accuracy = j.at("baseline_accuracy").get<double>();
  r.mean_psnr = j.at("mean_psnr").get<double>();
  r.psnr_excluded = j.at("psnr_excluded").get<int>();
  r.mean_ssim = j.at("mean_ssim").get<double>();
  r.n_patches = j.at("n_patches").get<int>();
  return r;
}
}  // namespace

void save_reports_json(const std::vector<AttackReport>& reports,
                       const std::filesystem::path& file) {
  json arr = json::array();
  for (const auto& r : reports) arr.push_back(report_to_json(r));
  std::ofstream out(file);
  if (!out) throw std::runtime_error("cannot write reports: " + file.string());
  out << json{{"schema_version", 1}, {"reports", arr}}.dump(2) << "\n";
}

std::vector<AttackReport> load_reports_json(const std::filesystem::path& file) {
  std::ifstream in(file);
  if (!in) throw std::runtime_error("cannot read reports: " + file.string());
  json j = json::parse(in);
  std::vector<AttackReport> out;
  for (const auto& e : j.at("reports")) out.push_back(report_from_json(e));
  return out;
}

void write_metrics_manifest(const std::filesystem::path& file, const std::string& run_id,
                            const std::string& plan_hash, std::uint64_t seed,
                            const std::vector<std::pair<std::string, std::string>>& checkpoint_hashes,
                            const std::vector<std::string>& table_files) {
  json ckpts = json::object();
  for (const auto& [name, hash] : checkpoint_hashes) ckpts[name] = hash;
  json j{{"schema_version", 1}, {"run_id", run_id},          {"plan_hash", plan_hash},
         {"seed", seed},        {"checkpoint_hashes", ckpts}, {"tables", table_files}};
  std::ofstream out(file);
  if (!out) throw std::runtime_error("cannot write metrics manifest: " + file.string());
  out << j.dump(2) << "\n";
}

}  // namespace tracegan
