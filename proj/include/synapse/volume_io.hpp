#pragma once

#include <filesystem>
#include <string>

#include "synapse/volume.hpp"

namespace synapse {

/// On-disk layout: a JSON header
///   {"dims":[nx,ny,nz],"dtype":"u8"|"u32"|"f32","order":"x-fastest"}
/// next to a little-endian raw file holding exactly nx*ny*nz elements. The raw
/// file path is the header path with its extension replaced by ".raw".
struct EncodedVolume {
  std::string header;
  std::string raw;
};

std::filesystem::path raw_path_for(const std::filesystem::path& header_path);

EncodedVolume encode_volume(const GrayVolume& v);
EncodedVolume encode_volume(const LabelVolume& v);
/// Stored as f32; values are rounded to single precision.
EncodedVolume encode_volume(const ScalarField& v);

/// `source` only labels error messages.
GrayVolume decode_gray(const EncodedVolume& files, const std::string& source);
LabelVolume decode_labels(const EncodedVolume& files, const std::string& source);
ScalarField decode_field(const EncodedVolume& files, const std::string& source);

GrayVolume read_gray(const std::filesystem::path& header_path);
LabelVolume read_labels(const std::filesystem::path& header_path);
ScalarField read_field(const std::filesystem::path& header_path);

template <typename V>
void write_volume(const std::filesystem::path& header_path, const V& volume);

std::string read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, const std::string& bytes);

}  // namespace synapse
