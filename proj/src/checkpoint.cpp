#include "handover/checkpoint.hpp"

#include <json.hpp>

#include <bit>
#include <fstream>

static_assert(std::endian::native == std::endian::little,
              "checkpoint serialization assumes a little-endian host");

namespace handover {

void save_checkpoint(const std::filesystem::path& path, const Checkpoint& ckpt) {
  const ModelDims dims = ckpt.params.dims();
  nlohmann::ordered_json header;
  header["format_version"] = kCheckpointFormatVersion;
  header["feature_dim"] = dims.feature_dim;
  header["embedding_dim"] = dims.embedding_dim;
  header["hidden_dim"] = dims.hidden_dim;
  header["seed"] = ckpt.seed;

  std::ofstream out(path, std::ios::trunc | std::ios::binary);
  if (!out) throw IoError("cannot open for writing: " + path.string());
  out << header.dump() << '\n';

  auto refs = tensor_refs(const_cast<ModelParams&>(ckpt.params));
  std::vector<float> payload;
  for (const auto& ref : refs) {
    Eigen::Map<const Mat<double>> m(ref.data, ref.rows, ref.cols);
    for (Eigen::Index r = 0; r < ref.rows; ++r)
      for (Eigen::Index c = 0; c < ref.cols; ++c) payload.push_back(static_cast<float>(m(r, c)));
  }
  out.write(reinterpret_cast<const char*>(payload.data()),
            static_cast<std::streamsize>(payload.size() * sizeof(float)));
  if (!out) throw IoError("failed writing checkpoint: " + path.string());
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open for reading: " + path.string());
  std::string header_line;
  if (!std::getline(in, header_line)) throw IoError("checkpoint has no header: " + path.string());

  nlohmann::json header;
  try {
    header = nlohmann::json::parse(header_line);
  } catch (const nlohmann::json::exception& e) {
    throw IoError("bad checkpoint header in " + path.string() + ": " + e.what());
  }
  int version = 0;
  try {
    version = header.at("format_version").get<int>();
  } catch (const nlohmann::json::exception& e) {
    throw IoError("bad checkpoint header in " + path.string() + ": " + e.what());
  }
  if (version != kCheckpointFormatVersion)
    throw IoError("unsupported checkpoint format version in " + path.string());

  ModelDims dims;
  Checkpoint ckpt;
  try {
    dims.feature_dim = header.at("feature_dim").get<int>();
    dims.embedding_dim = header.at("embedding_dim").get<int>();
    dims.hidden_dim = header.at("hidden_dim").get<int>();
    ckpt.seed = header.at("seed").get<std::uint64_t>();
  } catch (const nlohmann::json::exception& e) {
    throw IoError("bad checkpoint header in " + path.string() + ": " + e.what());
  }
  try {
    dims.validate();
  } catch (const std::invalid_argument& e) {
    throw IoError("bad checkpoint header in " + path.string() + ": " + e.what());
  }
  ckpt.params.set_zero(dims);

  auto refs = tensor_refs(ckpt.params);
  std::size_t total = 0;
  for (const auto& ref : refs) total += static_cast<std::size_t>(ref.size());
  std::vector<float> payload(total);
  in.read(reinterpret_cast<char*>(payload.data()),
          static_cast<std::streamsize>(total * sizeof(float)));
  if (static_cast<std::size_t>(in.gcount()) != total * sizeof(float))
    throw IoError("checkpoint payload truncated: " + path.string());
  char extra;
  if (in.read(&extra, 1)) throw IoError("checkpoint has trailing bytes: " + path.string());

  std::size_t k = 0;
  for (const auto& ref : refs) {
    Eigen::Map<Mat<double>> m(ref.data, ref.rows, ref.cols);
    for (Eigen::Index r = 0; r < ref.rows; ++r)
      for (Eigen::Index c = 0; c < ref.cols; ++c) m(r, c) = static_cast<double>(payload[k++]);
  }
  return ckpt;
}

}  // namespace handover
