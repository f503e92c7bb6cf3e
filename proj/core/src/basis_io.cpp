#include "rbctl/basis_io.hpp"

#include <array>
#include <bit>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>

#include "rbctl/csv.hpp"
#include "rbctl/errors.hpp"

namespace rbctl {

namespace {

constexpr std::array<char, 8> kMagic = {'R', 'B', 'C', 'T', 'L', 'B', 'A', 'S'};
constexpr std::uint32_t kVersion = 1;

static_assert(std::endian::native == std::endian::little,
              "basis files are little-endian; add byte swapping for this platform");

template <class T>
void put(std::ostream& out, T value) {
  out.write(reinterpret_cast<const char*>(&value), sizeof(T));
}

template <class T>
T get(std::istream& in, const std::filesystem::path& path) {
  T value{};
  in.read(reinterpret_cast<char*>(&value), sizeof(T));
  if (!in) throw IoError("truncated basis file: " + path.string());
  return value;
}

}  // namespace

void save_basis(const std::filesystem::path& path, const ReducedBasis& basis) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open for writing: " + path.string());
  const auto p = basis.selected_params.empty() ? 0 : basis.selected_params.front().size();
  out.write(kMagic.data(), kMagic.size());
  put<std::uint32_t>(out, kVersion);
  put<std::uint32_t>(out, static_cast<std::uint32_t>(basis.family.size()));
  out.write(basis.family.data(), static_cast<std::streamsize>(basis.family.size()));
  put<std::uint64_t>(out, static_cast<std::uint64_t>(basis.state_dim()));
  put<std::uint64_t>(out, static_cast<std::uint64_t>(basis.size()));
  put<std::uint64_t>(out, static_cast<std::uint64_t>(p));
  put<double>(out, basis.tolerance_used);
  put<double>(out, basis.ip.weight);
  for (const Parameter& mu : basis.selected_params) {
    if (mu.size() != p) throw DimensionError("save_basis: parameters of mixed dimension");
    out.write(reinterpret_cast<const char*>(mu.data()), static_cast<std::streamsize>(p * sizeof(double)));
  }
  for (const Vec& v : basis.vectors) {
    out.write(reinterpret_cast<const char*>(v.data()),
              static_cast<std::streamsize>(v.size() * sizeof(double)));
  }
  if (!out) throw IoError("write failed: " + path.string());
}

ReducedBasis load_basis(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open for reading: " + path.string());
  std::array<char, 8> magic{};
  in.read(magic.data(), magic.size());
  if (!in || magic != kMagic) throw IoError("not a basis file: " + path.string());
  const auto version = get<std::uint32_t>(in, path);
  if (version != kVersion) {
    throw IoError("unsupported basis file version " + std::to_string(version) + ": " + path.string());
  }
  ReducedBasis basis;
  const auto name_len = get<std::uint32_t>(in, path);
  if (name_len > 4096) throw IoError("corrupt basis header: " + path.string());
  basis.family.resize(name_len);
  in.read(basis.family.data(), name_len);
  const auto n = static_cast<Eigen::Index>(get<std::uint64_t>(in, path));
  const auto count = get<std::uint64_t>(in, path);
  const auto p = static_cast<Eigen::Index>(get<std::uint64_t>(in, path));
  basis.tolerance_used = get<double>(in, path);
  basis.ip = InnerProduct(get<double>(in, path));
  for (std::uint64_t i = 0; i < count; ++i) {
    Parameter mu(p);
    in.read(reinterpret_cast<char*>(mu.data()), static_cast<std::streamsize>(p * sizeof(double)));
    basis.selected_params.push_back(std::move(mu));
  }
  for (std::uint64_t i = 0; i < count; ++i) {
    Vec v(n);
    in.read(reinterpret_cast<char*>(v.data()), static_cast<std::streamsize>(n * sizeof(double)));
    basis.vectors.push_back(std::move(v));
  }
  if (!in) throw IoError("truncated basis file: " + path.string());
  return basis;
}

void save_training_data(const std::filesystem::path& path, const TrainingData& data) {
  CsvWriter csv(path);
  std::vector<std::string> header;
  for (Eigen::Index i = 0; i < data.param_dim(); ++i) header.push_back("mu_" + std::to_string(i));
  for (Eigen::Index i = 0; i < data.basis_size(); ++i) header.push_back("alpha_" + std::to_string(i));
  csv.header(header);
  for (std::size_t r = 0; r < data.size(); ++r) {
    std::vector<double> row(data.params[r].data(), data.params[r].data() + data.params[r].size());
    row.insert(row.end(), data.coeffs[r].data(), data.coeffs[r].data() + data.coeffs[r].size());
    csv.row(row);
  }
}

TrainingData load_training_data(const std::filesystem::path& path) {
  const CsvTable table = read_csv(path);
  Eigen::Index p = 0;
  for (const std::string& name : table.header) {
    if (name.rfind("mu_", 0) == 0) ++p;
  }
  const auto width = static_cast<Eigen::Index>(table.header.size());
  if (p == 0) throw IoError("training data has no mu_ columns: " + path.string());
  TrainingData data;
  for (const auto& row : table.rows) {
    const Eigen::Map<const Vec> all(row.data(), width);
    data.params.push_back(all.head(p));
    data.coeffs.push_back(all.tail(width - p));
  }
  return data;
}

}  // namespace rbctl
