#pragma once
// Text model files and CSV datasets. Grammars are documented in FORMATS.md.

#include <filesystem>
#include <istream>
#include <string>
#include <vector>

#include "wdro/network.hpp"

namespace wdro::io {

/// Shortest round-trip decimal form used in every emitted file.
std::string format_real(double v);

std::string write_model(const Mlp& net);
/// Throws Error(Parse) with "line N:" prefixes on malformed input and
/// Error(ShapeMismatch) with line numbers when layer shapes do not chain.
Mlp read_model(std::istream& in);
Mlp read_model_string(const std::string& text);
Mlp load_model(const std::filesystem::path& path);

std::string write_dataset(const std::vector<LabeledSample>& data);
std::vector<LabeledSample> read_dataset(std::istream& in);
std::vector<LabeledSample> read_dataset_string(const std::string& text);
std::vector<LabeledSample> load_dataset(const std::filesystem::path& path);

/// Rejects samples whose dimension differs from the net or whose label is out of range.
void check_dataset(const Mlp& net, const std::vector<LabeledSample>& data);

std::string read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, const std::string& contents);

}  // namespace wdro::io
