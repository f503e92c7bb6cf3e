#include <array>
#include <cstdint>
#include <fstream>
#include <sstream>

#include "rbctl/csv.hpp"
#include "rbctl/errors.hpp"
#include "rbctl/surrogates.hpp"

namespace rbctl {

namespace {

constexpr std::array<char, 8> kMlpMagic = {'R', 'B', 'C', 'T', 'L', 'M', 'L', 'P'};
constexpr std::uint32_t kModelVersion = 1;

// Text blocks: a "#rbctl-model,<kind>,<version>" line, then for each block
// "@<name>,<rows>,<cols>" followed by <rows> comma-separated lines.
void write_block(std::ostream& out, const std::string& name, const Mat& m) {
  out << '@' << name << ',' << m.rows() << ',' << m.cols() << '\n';
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    for (Eigen::Index c = 0; c < m.cols(); ++c) {
      if (c) out << ',';
      out << format_double(m(r, c));
    }
    out << '\n';
  }
}

Mat scalar_block(std::initializer_list<double> values) {
  Mat m(1, static_cast<Eigen::Index>(values.size()));
  Eigen::Index i = 0;
  for (double v : values) m(0, i++) = v;
  return m;
}

struct Blocks {
  std::string kind;
  std::vector<std::pair<std::string, Mat>> items;

  const Mat& get(const std::string& name, const std::filesystem::path& path) const {
    for (const auto& [n, m] : items) {
      if (n == name) return m;
    }
    throw IoError("model file " + path.string() + " lacks block '" + name + "'");
  }
};

Blocks read_blocks(std::istream& in, const std::filesystem::path& path) {
  Blocks blocks;
  std::string line;
  std::getline(in, line);
  std::istringstream head(line);
  std::string tag, kind, version;
  std::getline(head, tag, ',');
  std::getline(head, kind, ',');
  std::getline(head, version, ',');
  if (tag != "#rbctl-model") throw IoError("not a model file: " + path.string());
  if (version != std::to_string(kModelVersion)) {
    throw IoError("unsupported model file version " + version + ": " + path.string());
  }
  blocks.kind = kind;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    if (line[0] != '@') throw IoError("malformed model file: " + path.string());
    std::istringstream spec(line.substr(1));
    std::string name, rows_s, cols_s;
    std::getline(spec, name, ',');
    std::getline(spec, rows_s, ',');
    std::getline(spec, cols_s, ',');
    const Eigen::Index rows = std::stol(rows_s), cols = std::stol(cols_s);
    Mat m(rows, cols);
    for (Eigen::Index r = 0; r < rows; ++r) {
      if (!std::getline(in, line)) throw IoError("truncated model file: " + path.string());
      std::istringstream fields(line);
      std::string f;
      for (Eigen::Index c = 0; c < cols; ++c) {
        if (!std::getline(fields, f, ',')) throw IoError("short row in model file: " + path.string());
        m(r, c) = std::strtod(f.c_str(), nullptr);
      }
    }
    blocks.items.emplace_back(name, std::move(m));
  }
  return blocks;
}

template <class T>
void put(std::ostream& out, T value) {
  out.write(reinterpret_cast<const char*>(&value), sizeof(T));
}

void put_vec(std::ostream& out, const Vec& v) {
  out.write(reinterpret_cast<const char*>(v.data()), static_cast<std::streamsize>(v.size() * sizeof(double)));
}

template <class T>
T get(std::istream& in) {
  T value{};
  in.read(reinterpret_cast<char*>(&value), sizeof(T));
  return value;
}

Vec get_vec(std::istream& in, Eigen::Index n) {
  Vec v(n);
  in.read(reinterpret_cast<char*>(v.data()), static_cast<std::streamsize>(n * sizeof(double)));
  return v;
}

void save_mlp(const std::filesystem::path& path, const MLPModel& model) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open for writing: " + path.string());
  out.write(kMlpMagic.data(), kMlpMagic.size());
  put<std::uint32_t>(out, kModelVersion);
  const auto& layers = model.network().layers();
  put<std::uint32_t>(out, static_cast<std::uint32_t>(layers.size()));
  for (int w : layers) put<std::uint32_t>(out, static_cast<std::uint32_t>(w));
  put_vec(out, model.input_low());
  put_vec(out, model.input_high());
  put_vec(out, model.output_low());
  put_vec(out, model.output_high());
  put_vec(out, model.network().parameters());
  if (!out) throw IoError("write failed: " + path.string());
}

std::unique_ptr<CoefficientRegressor> load_mlp(std::istream& in, const std::filesystem::path& path) {
  if (get<std::uint32_t>(in) != kModelVersion) throw IoError("unsupported MLP file version: " + path.string());
  const auto depth = get<std::uint32_t>(in);
  if (!in || depth < 2 || depth > 64) throw IoError("corrupt MLP header: " + path.string());
  std::vector<int> layers;
  for (std::uint32_t i = 0; i < depth; ++i) layers.push_back(static_cast<int>(get<std::uint32_t>(in)));
  MlpNetwork net(layers);
  Vec in_low = get_vec(in, layers.front()), in_high = get_vec(in, layers.front());
  Vec out_low = get_vec(in, layers.back()), out_high = get_vec(in, layers.back());
  net.set_parameters(get_vec(in, net.parameter_count()));
  if (!in) throw IoError("truncated MLP file: " + path.string());
  return std::make_unique<MLPModel>(std::move(net), std::move(in_low), std::move(in_high),
                                    std::move(out_low), std::move(out_high));
}

}  // namespace

void save_model(const std::filesystem::path& path, const CoefficientRegressor& model) {
  if (const auto* mlp = dynamic_cast<const MLPModel*>(&model)) {
    save_mlp(path, *mlp);
    return;
  }
  std::ofstream out(path);
  if (!out) throw IoError("cannot open for writing: " + path.string());
  out << "#rbctl-model," << to_string(model.kind()) << ',' << kModelVersion << '\n';
  if (const auto* kernel = dynamic_cast<const KernelModel*>(&model)) {
    write_block(out, "settings", scalar_block({kernel->beta(), kernel->lambda()}));
    write_block(out, "centers", kernel->centers());
    write_block(out, "coeffs", kernel->coeffs());
  } else if (const auto* gpr = dynamic_cast<const GPRModel*>(&model)) {
    write_block(out, "settings",
                scalar_block({gpr->hyper().scale, gpr->hyper().length, gpr->jitter()}));
    write_block(out, "inputs", gpr->inputs());
    write_block(out, "targets", gpr->normalized_targets());
    write_block(out, "mean", gpr->mean().transpose());
    write_block(out, "stddev", gpr->stddev().transpose());
  } else {
    throw std::invalid_argument("save_model: unsupported model type");
  }
  if (!out) throw IoError("write failed: " + path.string());
}

std::unique_ptr<CoefficientRegressor> load_model(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open for reading: " + path.string());
  std::array<char, 8> magic{};
  in.read(magic.data(), magic.size());
  if (in && magic == kMlpMagic) return load_mlp(in, path);
  in.clear();
  in.seekg(0);
  const Blocks blocks = read_blocks(in, path);
  if (blocks.kind == "kernel") {
    const Mat& s = blocks.get("settings", path);
    return std::make_unique<KernelModel>(blocks.get("centers", path), blocks.get("coeffs", path),
                                         s(0, 0), s(0, 1));
  }
  if (blocks.kind == "gpr") {
    const Mat& s = blocks.get("settings", path);
    return std::make_unique<GPRModel>(blocks.get("inputs", path), blocks.get("targets", path),
                                      blocks.get("mean", path).row(0).transpose(),
                                      blocks.get("stddev", path).row(0).transpose(),
                                      GprHyper{s(0, 0), s(0, 1)}, s(0, 2));
  }
  throw IoError("unknown model kind '" + blocks.kind + "' in " + path.string());
}

}  // namespace rbctl
