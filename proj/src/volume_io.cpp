#include "synapse/volume_io.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iterator>

#include <json.hpp>

namespace synapse {

namespace {

using json = nlohmann::json;

template <typename T>
void put_le(std::string& out, T value) {
  using U = std::conditional_t<sizeof(T) == 4, std::uint32_t, std::uint8_t>;
  const auto bits = std::bit_cast<U>(value);
  for (std::size_t b = 0; b < sizeof(T); ++b) out.push_back(static_cast<char>((bits >> (8 * b)) & 0xFF));
}

template <typename T>
T get_le(const char* p) {
  using U = std::conditional_t<sizeof(T) == 4, std::uint32_t, std::uint8_t>;
  U bits = 0;
  for (std::size_t b = 0; b < sizeof(T); ++b) bits |= static_cast<U>(static_cast<unsigned char>(p[b])) << (8 * b);
  return std::bit_cast<T>(bits);
}

std::string header_text(Dims d, const char* dtype) {
  json h;
  h["dims"] = {d.nx, d.ny, d.nz};
  h["dtype"] = dtype;
  h["order"] = "x-fastest";
  return h.dump(2) + "\n";
}

Dims parse_header(const std::string& text, const std::string& expected_dtype, const std::string& source) {
  json h;
  try {
    h = json::parse(text);
  } catch (const json::parse_error& e) {
    throw DataError(source + ": header is not valid JSON (" + e.what() + ")");
  }
  if (!h.is_object()) throw DataError(source + ": header must be a JSON object");
  if (!h.contains("dims") || !h["dims"].is_array() || h["dims"].size() != 3) {
    throw DataError(source + ": field 'dims' must be an array of three positive integers");
  }
  Dims d;
  int* axes[] = {&d.nx, &d.ny, &d.nz};
  for (std::size_t i = 0; i < 3; ++i) {
    const auto& v = h["dims"][i];
    if (!v.is_number_integer() || v.get<long long>() <= 0 || v.get<long long>() > (1LL << 20)) {
      throw DataError(source + ": field 'dims' must be an array of three positive integers");
    }
    *axes[i] = v.get<int>();
  }
  if (!h.contains("dtype") || !h["dtype"].is_string()) throw DataError(source + ": missing string field 'dtype'");
  if (h["dtype"].get<std::string>() != expected_dtype) {
    throw DataError(source + ": field 'dtype' is '" + h["dtype"].get<std::string>() + "', expected '" +
                    expected_dtype + "'");
  }
  if (h.contains("order") && h["order"] != "x-fastest") {
    throw DataError(source + ": field 'order' must be 'x-fastest'");
  }
  return d;
}

template <typename V, typename Disk>
V decode(const EncodedVolume& files, const char* dtype, const std::string& source) {
  const Dims d = parse_header(files.header, dtype, source);
  const std::size_t expected = d.voxel_count() * sizeof(Disk);
  if (files.raw.size() != expected) {
    throw DataError(source + ": raw data has " + std::to_string(files.raw.size()) + " bytes, expected " +
                    std::to_string(expected) + " for dims " + to_string(d));
  }
  std::vector<typename V::value_type> data(d.voxel_count());
  for (std::size_t i = 0; i < data.size(); ++i) {
    const Disk v = get_le<Disk>(files.raw.data() + i * sizeof(Disk));
    if constexpr (std::is_floating_point_v<Disk>) {
      if (!std::isfinite(v)) throw DataError(source + ": non-finite value at voxel " + std::to_string(i));
    }
    data[i] = static_cast<typename V::value_type>(v);
  }
  return V(d, std::move(data));
}

EncodedVolume load(const std::filesystem::path& header_path) {
  return {read_file(header_path), read_file(raw_path_for(header_path))};
}

}  // namespace

std::filesystem::path raw_path_for(const std::filesystem::path& header_path) {
  auto raw = header_path;
  raw.replace_extension(".raw");
  return raw;
}

EncodedVolume encode_volume(const GrayVolume& v) {
  EncodedVolume out{header_text(v.dims(), "u8"), {}};
  out.raw.assign(reinterpret_cast<const char*>(v.data().data()), v.size());
  return out;
}

EncodedVolume encode_volume(const LabelVolume& v) {
  EncodedVolume out{header_text(v.dims(), "u32"), {}};
  out.raw.reserve(v.size() * 4);
  for (auto id : v.data()) put_le<std::uint32_t>(out.raw, id);
  return out;
}

EncodedVolume encode_volume(const ScalarField& v) {
  EncodedVolume out{header_text(v.dims(), "f32"), {}};
  out.raw.reserve(v.size() * 4);
  for (auto s : v.data()) put_le<float>(out.raw, static_cast<float>(s));
  return out;
}

GrayVolume decode_gray(const EncodedVolume& files, const std::string& source) {
  return decode<GrayVolume, std::uint8_t>(files, "u8", source);
}
LabelVolume decode_labels(const EncodedVolume& files, const std::string& source) {
  return decode<LabelVolume, std::uint32_t>(files, "u32", source);
}
ScalarField decode_field(const EncodedVolume& files, const std::string& source) {
  return decode<ScalarField, float>(files, "f32", source);
}

GrayVolume read_gray(const std::filesystem::path& p) { return decode_gray(load(p), p.string()); }
LabelVolume read_labels(const std::filesystem::path& p) { return decode_labels(load(p), p.string()); }
ScalarField read_field(const std::filesystem::path& p) { return decode_field(load(p), p.string()); }

template <typename V>
void write_volume(const std::filesystem::path& header_path, const V& volume) {
  const auto files = encode_volume(volume);
  write_file(header_path, files.header);
  write_file(raw_path_for(header_path), files.raw);
}

template void write_volume(const std::filesystem::path&, const GrayVolume&);
template void write_volume(const std::filesystem::path&, const LabelVolume&);
template void write_volume(const std::filesystem::path&, const ScalarField&);

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError(path.string() + ": cannot open file");
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void write_file(const std::filesystem::path& path, const std::string& bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError(path.string() + ": cannot open file for writing");
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw DataError(path.string() + ": write failed");
}

}  // namespace synapse
