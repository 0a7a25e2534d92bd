#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "fairstyle/core/tensor.hpp"

namespace fairstyle {

/// A fairstyle tensor together with the generator it was fitted for.
struct TensorDocument {
  FairStyleTensor tensor;
  std::string generator_fingerprint;
  std::vector<std::string> attribute_names;
  std::string created_at;  // ISO-8601 UTC; empty when unknown
  nlohmann::json provenance = nlohmann::json::object();  // config hash, seed, prompts
};

nlohmann::json to_json(const ChannelId& id);
ChannelId channel_from_json(const nlohmann::json& j);

nlohmann::json to_json(const TensorDocument& doc);
TensorDocument tensor_from_json(const nlohmann::json& j);

/// Hash of the tensor content (variant, targets, parameters, stats).
std::string tensor_hash(const FairStyleTensor& tensor);

void save_tensor(const std::filesystem::path& path, const TensorDocument& doc);
/// Loads and checks the fingerprint against `layout`; a mismatch throws
/// FingerprintMismatch, invalid addresses throw AddressError.
TensorDocument load_tensor(const std::filesystem::path& path, const StyleLayout& layout);

std::string utc_timestamp();

/// Writes `text` to a sibling temp file and renames it over `path`.
void write_atomic(const std::filesystem::path& path, const std::string& text);
nlohmann::json read_json(const std::filesystem::path& path);
void write_json(const std::filesystem::path& path, const nlohmann::json& j);

}  // namespace fairstyle
