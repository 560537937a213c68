#pragma once

#include <cstdint>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <string_view>

#include "ising/model.hpp"

namespace ising {

/// Malformed or unreadable input file.
class FormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Model files are JSON:
//   { "n_spins": N, "couplings": [[i, j, value], ...], "biases": [b0, ..., bN-1] }
// with i < j, no duplicate pairs, and no other keys.

enum class CouplingListing { Sparse, Dense };

/// Sparse omits zero couplings; Dense lists every pair.
std::string model_to_json(const IsingModel& model,
                          CouplingListing listing = CouplingListing::Sparse);
IsingModel model_from_json(std::string_view text);

void write_model(const std::filesystem::path& path, const IsingModel& model,
                 CouplingListing listing = CouplingListing::Sparse);
IsingModel read_model(const std::filesystem::path& path);

// Dataset files are plain text:
//   # n_spins=N d=D seed=S
//   +1 -1 +1 ...
// one configuration per line, tokens separated by single spaces.

struct DatasetFile {
  SpinDataset data;
  std::uint64_t seed = 0;
};

std::string dataset_to_text(const SpinDataset& data, std::uint64_t seed);
DatasetFile dataset_from_text(std::string_view text);

void write_dataset(const std::filesystem::path& path, const SpinDataset& data,
                   std::uint64_t seed);
DatasetFile read_dataset(const std::filesystem::path& path);

std::string read_text_file(const std::filesystem::path& path);
void write_text_file(const std::filesystem::path& path, std::string_view text);

/// Shortest decimal that round-trips the double.
std::string format_number(double value);

}  // namespace ising
