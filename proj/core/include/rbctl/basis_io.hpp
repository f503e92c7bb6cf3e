#pragma once

#include <filesystem>

#include "rbctl/greedy_rom.hpp"

namespace rbctl {

/// Binary basis file, version 1 (layout in docs/formats.md). The greedy
/// history is not stored; it goes to greedy_results.csv.
void save_basis(const std::filesystem::path& path, const ReducedBasis& basis);
ReducedBasis load_basis(const std::filesystem::path& path);

/// CSV with header mu_0..mu_{p-1}, alpha_0..alpha_{N-1}; values printed
/// with 17 significant digits so they read back bit-exactly.
void save_training_data(const std::filesystem::path& path, const TrainingData& data);
TrainingData load_training_data(const std::filesystem::path& path);

}  // namespace rbctl
