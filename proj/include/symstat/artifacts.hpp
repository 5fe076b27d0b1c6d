#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "symstat/estimator.hpp"
#include "symstat/imaging.hpp"
#include "symstat/metrics.hpp"
#include "symstat/model.hpp"
#include "symstat/symbasis.hpp"

namespace symstat {

namespace fs = std::filesystem;

/// FNV-1a over raw bytes, printed as 16 hex digits.
std::string content_hash(const std::string& bytes);
std::string file_hash(const fs::path& path);

std::string read_file(const fs::path& path);
/// Writes via a temporary file and rename.
void write_file(const fs::path& path, const std::string& bytes);
nlohmann::json read_json(const fs::path& path);
void write_json(const fs::path& path, const nlohmann::json& doc);

/// <stem>.bin: magic "SYMBASIS", u32 version, u32 name length, group name,
/// i32 l_min, i32 l_max, then for each l, p, n the d_p x (2l+1) matrix in
/// row-major little-endian f64. <stem>.json carries the count table.
void write_basis(const fs::path& dir, const AngularBasisSet& basis, int n_q, const std::vector<int>& p_set);
/// Throws IoError if the file is malformed or belongs to another group.
AngularBasisSet read_basis(const fs::path& dir, std::shared_ptr<const PointGroup> group);

/// params.json + params.bin (f64: mu, then each v matrix row-major).
/// p_set is stored one-based.
void write_params(const fs::path& dir, const ModelParams& params, const std::string& stem = "params");
ModelParams read_params(const fs::path& dir, const std::string& stem = "params", int workers = 1);
nlohmann::json params_manifest(const ModelParams& params);
/// Rebuilds the signal model a params manifest describes.
std::shared_ptr<const SignalModel> model_from_manifest(const nlohmann::json& manifest, int workers = 1);

/// stack.json + stack.bin (complex64, image-major, row-major inside an
/// image) and truth.bin (f64 rotations and coefficients) when present.
void write_stack(const fs::path& dir, const ImageStack& stack);
ImageStack read_stack(const fs::path& dir);

/// <stem>.json + <stem>.bin (float32).
void write_volume(const fs::path& dir, const VolumeGrid& volume, const std::string& stem);
VolumeGrid read_volume(const fs::path& dir, const std::string& stem);

std::string fsc_csv(const FSCCurve& curve);
nlohmann::json report_json(const RunReport& report);

}  // namespace symstat
