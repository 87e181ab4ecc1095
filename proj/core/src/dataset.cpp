#include "gmgan/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>

namespace gmgan {

Dataset::Dataset(Tensor samples, std::optional<std::vector<int>> labels, Modality modality)
    : samples_(std::move(samples)), labels_(std::move(labels)), modality_(modality) {
  if (samples_.rank() != 2) throw DimError("dataset samples must be [n x dim]");
  if (labels_ && static_cast<int64_t>(labels_->size()) != samples_.rows())
    throw DimError("label count does not match sample count");
}

const std::vector<int>& Dataset::labels() const {
  if (!labels_) throw UsageError("dataset is unlabeled");
  return *labels_;
}

int Dataset::label(int64_t i) const { return labels().at(static_cast<size_t>(i)); }

int64_t Dataset::n_classes() const {
  const auto& l = labels();
  if (l.empty()) return 0;
  return 1 + static_cast<int64_t>(*std::max_element(l.begin(), l.end()));
}

void Dataset::fetch(int64_t i, std::span<double> out) const {
  if (i < 0 || i >= size()) throw ParamError("sample index out of range");
  if (static_cast<int64_t>(out.size()) != dim()) throw DimError("fetch buffer has wrong width");
  std::memcpy(out.data(), samples_.v.data() + i * dim(), sizeof(double) * static_cast<size_t>(dim()));
  ++reads_;
}

void Dataset::set_image_dims(int64_t h, int64_t w, int64_t ch) {
  if (h < 1 || w < 1 || ch < 1) throw ParamError("image dimensions must be positive");
  if (h * w * ch != dim()) throw DimError("image dims do not multiply to sample width");
  h_ = h;
  w_ = w;
  ch_ = ch;
}

double normalize_pixel(uint8_t raw) { return static_cast<double>(raw) / 127.5 - 1.0; }

double denormalize_pixel(double value) { return (value + 1.0) * 127.5; }

Dataset gen_toy(int64_t n, double variance, Rng& rng) {
  if (n < 1) throw ParamError("toy dataset needs n >= 1");
  if (!(variance > 0.0)) throw ParamError("toy variance must be > 0");
  const double sd = std::sqrt(variance);
  Tensor samples = Tensor::zeros({n, 2});
  std::vector<int> labels(static_cast<size_t>(n));
  for (int64_t i = 0; i < n; ++i) {
    const int64_t k = rng.uniform_index(9);
    const double mx = static_cast<double>(k % 3) - 1.0;
    const double my = static_cast<double>(k / 3) - 1.0;
    samples.v[static_cast<size_t>(2 * i)] = mx + sd * rng.normal();
    samples.v[static_cast<size_t>(2 * i + 1)] = my + sd * rng.normal();
    labels[static_cast<size_t>(i)] = static_cast<int>(k);
  }
  Dataset ds(std::move(samples), std::move(labels), Modality::Points);
  return ds;
}

std::vector<Tensor> toy_means() {
  std::vector<Tensor> means;
  for (int64_t k = 0; k < 9; ++k)
    means.push_back(Tensor({2}, {static_cast<double>(k % 3) - 1.0, static_cast<double>(k / 3) - 1.0}));
  return means;
}

std::vector<Tensor> toy_covariances(double variance) {
  std::vector<Tensor> covs;
  for (int64_t k = 0; k < 9; ++k)
    covs.push_back(Tensor({2, 2}, {variance, 0.0, 0.0, variance}));
  return covs;
}

std::vector<double> toy_weights() { return std::vector<double>(9, 1.0 / 9.0); }

namespace {

uint32_t read_be32(std::istream& in, const std::string& path, size_t& offset) {
  unsigned char buf[4];
  in.read(reinterpret_cast<char*>(buf), 4);
  if (in.gcount() != 4)
    throw FormatError("truncated IDX file '" + path + "' at byte " + std::to_string(offset));
  offset += 4;
  return (static_cast<uint32_t>(buf[0]) << 24) | (static_cast<uint32_t>(buf[1]) << 16) |
         (static_cast<uint32_t>(buf[2]) << 8) | static_cast<uint32_t>(buf[3]);
}

}  // namespace

Dataset load_idx(const std::filesystem::path& images,
                 const std::optional<std::filesystem::path>& labels) {
  std::ifstream in(images, std::ios::binary);
  if (!in) throw IoError("cannot open IDX file '" + images.string() + "'");
  size_t offset = 0;
  const uint32_t magic = read_be32(in, images.string(), offset);
  if (magic != 0x00000803u)
    throw FormatError("bad image magic 0x" + std::to_string(magic) + " in '" + images.string() +
                      "' at byte 0 (expected 0x00000803)");
  const uint32_t n = read_be32(in, images.string(), offset);
  const uint32_t rows = read_be32(in, images.string(), offset);
  const uint32_t cols = read_be32(in, images.string(), offset);
  const size_t npix = static_cast<size_t>(n) * rows * cols;
  std::vector<unsigned char> bytes(npix);
  in.read(reinterpret_cast<char*>(bytes.data()), static_cast<std::streamsize>(npix));
  if (static_cast<size_t>(in.gcount()) != npix)
    throw FormatError("truncated IDX image payload in '" + images.string() + "' at byte " +
                      std::to_string(offset + static_cast<size_t>(in.gcount())));

  Tensor samples = Tensor::zeros({static_cast<int64_t>(n), static_cast<int64_t>(rows) * cols});
  for (size_t i = 0; i < npix; ++i) samples.v[i] = normalize_pixel(bytes[i]);

  std::optional<std::vector<int>> label_vec;
  if (labels) {
    std::ifstream lin(*labels, std::ios::binary);
    if (!lin) throw IoError("cannot open IDX file '" + labels->string() + "'");
    size_t loffset = 0;
    const uint32_t lmagic = read_be32(lin, labels->string(), loffset);
    if (lmagic != 0x00000801u)
      throw FormatError("bad label magic 0x" + std::to_string(lmagic) + " in '" +
                        labels->string() + "' at byte 0 (expected 0x00000801)");
    const uint32_t ln = read_be32(lin, labels->string(), loffset);
    if (ln != n)
      throw FormatError("label count " + std::to_string(ln) + " does not match image count " +
                        std::to_string(n) + " in '" + labels->string() + "'");
    std::vector<unsigned char> lbytes(ln);
    lin.read(reinterpret_cast<char*>(lbytes.data()), static_cast<std::streamsize>(ln));
    if (static_cast<size_t>(lin.gcount()) != ln)
      throw FormatError("truncated IDX label payload in '" + labels->string() + "' at byte " +
                        std::to_string(loffset + static_cast<size_t>(lin.gcount())));
    label_vec.emplace(lbytes.begin(), lbytes.end());
  }

  Dataset ds(std::move(samples), std::move(label_vec), Modality::Images);
  ds.set_image_dims(rows, cols, 1);
  NormRecord norm;
  norm.identity = false;
  norm.scale = 1.0 / 127.5;
  norm.offset = -1.0;
  ds.set_norm(norm);
  return ds;
}

Dataset subset(const Dataset& ds, int64_t per_class, uint64_t seed) {
  if (!ds.labeled()) throw ParamError("subset requires a labeled dataset");
  if (per_class < 0) throw ParamError("per_class must be >= 0");
  const int64_t n_classes = ds.n_classes();
  std::vector<std::vector<int64_t>> by_class(static_cast<size_t>(n_classes));
  for (int64_t i = 0; i < ds.size(); ++i)
    by_class[static_cast<size_t>(ds.label(i))].push_back(i);

  Rng rng(derive_seed(seed, "subset"));
  std::vector<int64_t> chosen;
  for (int64_t c = 0; c < n_classes; ++c) {
    auto& pool = by_class[static_cast<size_t>(c)];
    if (static_cast<int64_t>(pool.size()) < per_class)
      throw ParamError("class " + std::to_string(c) + " has only " + std::to_string(pool.size()) +
                       " samples, need " + std::to_string(per_class));
    for (int64_t i = static_cast<int64_t>(pool.size()) - 1; i > 0; --i)
      std::swap(pool[static_cast<size_t>(i)], pool[static_cast<size_t>(rng.uniform_index(i + 1))]);
    chosen.insert(chosen.end(), pool.begin(), pool.begin() + per_class);
  }
  std::sort(chosen.begin(), chosen.end());

  Tensor samples = Tensor::zeros({static_cast<int64_t>(chosen.size()), ds.dim()});
  std::vector<int> labels(chosen.size());
  for (size_t i = 0; i < chosen.size(); ++i) {
    std::memcpy(samples.v.data() + static_cast<int64_t>(i) * ds.dim(),
                ds.samples().v.data() + chosen[i] * ds.dim(),
                sizeof(double) * static_cast<size_t>(ds.dim()));
    labels[i] = ds.label(chosen[i]);
  }
  Dataset out(std::move(samples), std::move(labels), ds.modality());
  if (ds.modality() == Modality::Images)
    out.set_image_dims(ds.height(), ds.width(), ds.channels());
  out.set_norm(ds.norm());
  return out;
}

namespace {

// 28x28 glyph archetypes, one per class. Drawn in byte space [0, 255].
void draw_glyph(int cls, double cx, double cy, double thickness, std::vector<double>& img) {
  const int H = 28, W = 28;
  auto put = [&](int y, int x, double v) {
    if (y >= 0 && y < H && x >= 0 && x < W)
      img[static_cast<size_t>(y * W + x)] = std::max(img[static_cast<size_t>(y * W + x)], v);
  };
  auto stroke = [&](double y, double x) {
    const int r = static_cast<int>(std::lround(thickness));
    for (int dy = -r; dy <= r; ++dy)
      for (int dx = -r; dx <= r; ++dx)
        if (dy * dy + dx * dx <= r * r)
          put(static_cast<int>(std::lround(y)) + dy, static_cast<int>(std::lround(x)) + dx, 230.0);
  };
  const double span = 8.0;
  switch (cls) {
    case 0:  // horizontal bar
      for (double t = -span; t <= span; t += 0.5) stroke(cy, cx + t);
      break;
    case 1:  // vertical bar
      for (double t = -span; t <= span; t += 0.5) stroke(cy + t, cx);
      break;
    case 2:  // main diagonal
      for (double t = -span; t <= span; t += 0.5) stroke(cy + t, cx + t);
      break;
    case 3:  // anti-diagonal
      for (double t = -span; t <= span; t += 0.5) stroke(cy + t, cx - t);
      break;
    case 4:  // plus
      for (double t = -span; t <= span; t += 0.5) {
        stroke(cy, cx + t);
        stroke(cy + t, cx);
      }
      break;
    case 5:  // X
      for (double t = -span; t <= span; t += 0.5) {
        stroke(cy + t, cx + t);
        stroke(cy + t, cx - t);
      }
      break;
    case 6:  // square ring
      for (double t = -span; t <= span; t += 0.5) {
        stroke(cy - span, cx + t);
        stroke(cy + span, cx + t);
        stroke(cy + t, cx - span);
        stroke(cy + t, cx + span);
      }
      break;
    case 7:  // filled disc
      for (double yy = -span; yy <= span; yy += 0.5)
        for (double xx = -span; xx <= span; xx += 0.5)
          if (yy * yy + xx * xx <= span * span * 0.6) stroke(cy + yy, cx + xx);
      break;
    case 8:  // circle outline
      for (double a = 0.0; a < 6.2832; a += 0.05)
        stroke(cy + span * std::sin(a), cx + span * std::cos(a));
      break;
    case 9:  // T shape
      for (double t = -span; t <= span; t += 0.5) stroke(cy - span, cx + t);
      for (double t = -span; t <= span; t += 0.5) stroke(cy + t, cx);
      break;
    default:
      throw ParamError("glyph class out of range");
  }
}

}  // namespace

Dataset make_synth_images(int64_t per_class, uint64_t seed) {
  if (per_class < 1) throw ParamError("per_class must be >= 1");
  const int64_t n = per_class * 10;
  const int64_t dim = 28 * 28;
  Rng rng(derive_seed(seed, "synth-images"));
  Tensor samples = Tensor::zeros({n, dim});
  std::vector<int> labels(static_cast<size_t>(n));
  int64_t row = 0;
  for (int cls = 0; cls < 10; ++cls) {
    for (int64_t i = 0; i < per_class; ++i, ++row) {
      std::vector<double> img(static_cast<size_t>(dim), 10.0);
      const double cx = 13.5 + rng.uniform(-3.0, 3.0);
      const double cy = 13.5 + rng.uniform(-3.0, 3.0);
      const double thickness = 1.0 + rng.uniform(0.0, 1.2);
      draw_glyph(cls, cx, cy, thickness, img);
      for (int64_t p = 0; p < dim; ++p) {
        double v = img[static_cast<size_t>(p)] + 12.0 * rng.normal();
        v = std::min(255.0, std::max(0.0, v));
        const uint8_t byte = static_cast<uint8_t>(std::lround(v));
        samples.v[static_cast<size_t>(row * dim + p)] = normalize_pixel(byte);
      }
      labels[static_cast<size_t>(row)] = cls;
    }
  }
  Dataset ds(std::move(samples), std::move(labels), Modality::Images);
  ds.set_image_dims(28, 28, 1);
  NormRecord norm;
  norm.identity = false;
  norm.scale = 1.0 / 127.5;
  norm.offset = -1.0;
  ds.set_norm(norm);
  return ds;
}

}  // namespace gmgan
