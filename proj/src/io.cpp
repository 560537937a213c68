#include "ising/io.hpp"

#include <charconv>
#include <fstream>
#include <set>
#include <sstream>
#include <utility>

#include <json.hpp>

namespace ising {

using nlohmann::json;

std::string format_number(double value) {
  if (value == 0.0) return "0.0";
  return json(value).dump();
}

std::string model_to_json(const IsingModel& model, CouplingListing listing) {
  const std::size_t n = model.n_spins();
  const auto k = model.couplings();
  std::string out = "{\n  \"n_spins\": " + std::to_string(n) + ",\n  \"couplings\": [";
  bool first = true;
  std::size_t p = 0;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j, ++p) {
      if (listing == CouplingListing::Sparse && k[p] == 0.0) continue;
      out += first ? "\n    [" : ",\n    [";
      out += std::to_string(i) + ", " + std::to_string(j) + ", " + format_number(k[p]) + "]";
      first = false;
    }
  }
  out += first ? "],\n" : "\n  ],\n";
  out += "  \"biases\": [";
  for (std::size_t i = 0; i < n; ++i) {
    if (i) out += ", ";
    out += format_number(model.bias(i));
  }
  out += "]\n}\n";
  return out;
}

IsingModel model_from_json(std::string_view text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw FormatError(std::string("model file is not valid JSON: ") + e.what());
  }
  if (!doc.is_object()) throw FormatError("model file must be a JSON object");
  for (const auto& [key, _] : doc.items()) {
    if (key != "n_spins" && key != "couplings" && key != "biases") {
      throw FormatError("unknown key in model file: " + key);
    }
  }
  if (!doc.contains("n_spins") || !doc.contains("couplings") || !doc.contains("biases")) {
    throw FormatError("model file needs n_spins, couplings and biases");
  }
  const auto& jn = doc["n_spins"];
  if (!jn.is_number_unsigned() || jn.get<std::uint64_t>() == 0) {
    throw FormatError("n_spins must be a positive integer");
  }
  const std::size_t n = jn.get<std::size_t>();

  const auto& jb = doc["biases"];
  if (!jb.is_array() || jb.size() != n) throw FormatError("biases must be an array of n_spins numbers");
  std::vector<double> biases;
  biases.reserve(n);
  for (const auto& v : jb) {
    if (!v.is_number()) throw FormatError("bias values must be numbers");
    biases.push_back(v.get<double>());
  }

  const auto& jc = doc["couplings"];
  if (!jc.is_array()) throw FormatError("couplings must be an array");
  std::vector<double> couplings(IsingModel::pair_count(n), 0.0);
  std::set<std::pair<std::size_t, std::size_t>> seen;
  for (const auto& entry : jc) {
    if (!entry.is_array() || entry.size() != 3 || !entry[0].is_number_unsigned() ||
        !entry[1].is_number_unsigned() || !entry[2].is_number()) {
      throw FormatError("coupling entries must be [i, j, value] with integer i < j");
    }
    const auto i = entry[0].get<std::size_t>();
    const auto j = entry[1].get<std::size_t>();
    if (!(i < j) || j >= n) {
      throw FormatError("coupling pair (" + std::to_string(i) + ", " + std::to_string(j) +
                        ") must satisfy 0 <= i < j < n_spins");
    }
    if (!seen.emplace(i, j).second) {
      throw FormatError("duplicate coupling pair (" + std::to_string(i) + ", " +
                        std::to_string(j) + ")");
    }
    couplings[IsingModel::pair_index(i, j, n)] = entry[2].get<double>();
  }
  try {
    return IsingModel(n, std::move(couplings), std::move(biases));
  } catch (const std::invalid_argument& e) {
    throw FormatError(e.what());
  }
}

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text_file(const std::filesystem::path& path, std::string_view text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  if (!out) throw std::runtime_error("write failed: " + path.string());
}

void write_model(const std::filesystem::path& path, const IsingModel& model,
                 CouplingListing listing) {
  write_text_file(path, model_to_json(model, listing));
}

IsingModel read_model(const std::filesystem::path& path) {
  return model_from_json(read_text_file(path));
}

std::string dataset_to_text(const SpinDataset& data, std::uint64_t seed) {
  const std::size_t n = data.n_spins();
  std::string out = "# n_spins=" + std::to_string(n) + " d=" + std::to_string(data.size()) +
                    " seed=" + std::to_string(seed) + "\n";
  out.reserve(out.size() + data.size() * n * 3);
  for (std::size_t k = 0; k < data.size(); ++k) {
    const auto row = data[k];
    for (std::size_t i = 0; i < n; ++i) {
      if (i) out += ' ';
      out += row[i] > 0 ? "+1" : "-1";
    }
    out += '\n';
  }
  return out;
}

namespace {

std::uint64_t parse_header_field(std::string_view token, std::string_view key) {
  if (token.substr(0, key.size()) != key) {
    throw FormatError("dataset header: expected field " + std::string(key));
  }
  const auto digits = token.substr(key.size());
  std::uint64_t value = 0;
  const auto [ptr, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), value);
  if (ec != std::errc{} || ptr != digits.data() + digits.size() || digits.empty()) {
    throw FormatError("dataset header: bad value for " + std::string(key));
  }
  return value;
}

}  // namespace

DatasetFile dataset_from_text(std::string_view text) {
  std::istringstream in{std::string(text)};
  std::string line;
  if (!std::getline(in, line) || line.rfind("# ", 0) != 0) {
    throw FormatError("dataset file must start with '# n_spins=N d=D seed=S'");
  }
  std::istringstream header(line.substr(2));
  std::string t_n, t_d, t_s, extra;
  header >> t_n >> t_d >> t_s;
  if (header >> extra) throw FormatError("dataset header has trailing fields");
  const auto n = static_cast<std::size_t>(parse_header_field(t_n, "n_spins="));
  const auto d = static_cast<std::size_t>(parse_header_field(t_d, "d="));
  const auto seed = parse_header_field(t_s, "seed=");
  if (n == 0) throw FormatError("dataset header: n_spins must be positive");

  std::vector<Spin> spins;
  spins.reserve(n * d);
  std::size_t rows = 0;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream row(line);
    std::string token;
    std::size_t count = 0;
    while (row >> token) {
      if (token == "+1") {
        spins.push_back(1);
      } else if (token == "-1") {
        spins.push_back(-1);
      } else {
        throw FormatError("line " + std::to_string(rows + 2) + ": bad spin token '" + token + "'");
      }
      ++count;
    }
    if (count != n) {
      throw FormatError("line " + std::to_string(rows + 2) + ": expected " + std::to_string(n) +
                        " spins, got " + std::to_string(count));
    }
    ++rows;
  }
  if (rows != d) {
    throw FormatError("header declares d=" + std::to_string(d) + " but file has " +
                      std::to_string(rows) + " configurations");
  }
  return {SpinDataset(n, std::move(spins)), seed};
}

void write_dataset(const std::filesystem::path& path, const SpinDataset& data,
                   std::uint64_t seed) {
  write_text_file(path, dataset_to_text(data, seed));
}

DatasetFile read_dataset(const std::filesystem::path& path) {
  return dataset_from_text(read_text_file(path));
}

}  // namespace ising
