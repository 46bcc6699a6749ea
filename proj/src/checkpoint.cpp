#include "simpdom/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <sstream>

#include "json.hpp"

#include "simpdom/errors.hpp"

namespace simpdom {

static_assert(std::endian::native == std::endian::little,
              "checkpoint I/O assumes a little-endian host");

namespace {

constexpr std::string_view kMagic = "SIMPDOM-CKPT";

std::string hex64(std::uint64_t v) {
  static const char* digits = "0123456789abcdef";
  std::string s(16, '0');
  for (int i = 15; i >= 0; --i) {
    s[static_cast<std::size_t>(i)] = digits[v & 0xf];
    v >>= 4;
  }
  return s;
}

std::span<const unsigned char> bytes_of(const std::vector<float>& v) {
  return {reinterpret_cast<const unsigned char*>(v.data()), v.size() * sizeof(float)};
}

}  // namespace

std::uint64_t fnv1a64(std::span<const unsigned char> bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char b : bytes) {
    h ^= b;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::filesystem::path vocab_path_for(const std::filesystem::path& checkpoint) {
  auto p = checkpoint;
  p += ".vocab.json";
  return p;
}

void save_checkpoint(const TrainedModel& model, const std::filesystem::path& path) {
  const auto& tagger = model.tagger;
  const auto& shape = tagger.shape();
  nlohmann::ordered_json manifest;
  manifest["format"] = "simpdom-checkpoint";
  manifest["version"] = kCheckpointVersion;
  manifest["vertical"] = model.vertical;
  manifest["attributes"] = model.attributes;
  manifest["config"] = tagger.config().to_json();
  manifest["shape"] = {{"words", shape.words},
                       {"chars", shape.chars},
                       {"tags", shape.tags},
                       {"attributes", shape.attributes}};
  manifest["vocab"] = vocab_path_for(path.filename()).string();

  auto tensors = nlohmann::ordered_json::array();
  std::uint64_t offset = 0;
  for (const auto& [name, t] : tagger.params().tensors()) {
    const auto bytes = bytes_of(t.value);
    nlohmann::ordered_json rec;
    rec["name"] = name;
    rec["shape"] = t.shape;
    rec["dtype"] = "f32";
    rec["offset"] = offset;
    rec["length"] = bytes.size();
    rec["checksum"] = hex64(fnv1a64(bytes));
    tensors.push_back(std::move(rec));
    offset += bytes.size();
  }
  manifest["data_bytes"] = offset;
  manifest["tensors"] = std::move(tensors);

  const std::string body = manifest.dump(1) + "\n";
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write checkpoint '" + path.string() + "'");
  out << kMagic << ' ' << kCheckpointVersion << ' ' << body.size() << '\n' << body;
  for (const auto& [_, t] : tagger.params().tensors()) {
    const auto bytes = bytes_of(t.value);
    out.write(reinterpret_cast<const char*>(bytes.data()),
              static_cast<std::streamsize>(bytes.size()));
  }
  if (!out) throw IoError("failed writing checkpoint '" + path.string() + "'");
  out.close();
  model.vocab.save(vocab_path_for(path));
}

TrainedModel load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open checkpoint '" + path.string() + "'");
  std::string blob((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());

  const auto eol = blob.find('\n');
  if (eol == std::string::npos) throw CorruptionError("checkpoint header is missing");
  std::istringstream header(blob.substr(0, eol));
  std::string magic;
  int version = 0;
  std::uint64_t manifest_bytes = 0;
  if (!(header >> magic >> version >> manifest_bytes) || magic != kMagic) {
    throw CorruptionError("not a checkpoint file: '" + path.string() + "'");
  }
  if (version != kCheckpointVersion) {
    throw CorruptionError("unsupported checkpoint version " + std::to_string(version));
  }
  const std::size_t manifest_start = eol + 1;
  if (blob.size() - manifest_start < manifest_bytes) {
    throw CorruptionError("checkpoint manifest is truncated");
  }
  nlohmann::json manifest;
  try {
    manifest = nlohmann::json::parse(blob.substr(manifest_start, manifest_bytes));
  } catch (const nlohmann::json::exception& e) {
    throw CorruptionError(std::string("checkpoint manifest is not valid JSON: ") + e.what());
  }

  const std::size_t data_start = manifest_start + manifest_bytes;
  const std::size_t data_size = blob.size() - data_start;
  try {
    if (manifest.at("data_bytes").get<std::uint64_t>() != data_size) {
      throw CorruptionError("checkpoint data section has " + std::to_string(data_size) +
                            " bytes, manifest says " +
                            std::to_string(manifest.at("data_bytes").get<std::uint64_t>()));
    }
    nn::ParamStore<float> params;
    for (const auto& rec : manifest.at("tensors")) {
      const auto name = rec.at("name").get<std::string>();
      if (rec.at("dtype").get<std::string>() != "f32") {
        throw CorruptionError("tensor '" + name + "' has unsupported dtype");
      }
      auto& t = params.add(name, rec.at("shape").get<std::vector<std::size_t>>());
      const auto off = rec.at("offset").get<std::uint64_t>();
      const auto len = rec.at("length").get<std::uint64_t>();
      if (len != t.size() * sizeof(float) || off > data_size || len > data_size - off) {
        throw CorruptionError("tensor '" + name + "' lies outside the data section");
      }
      std::memcpy(t.value.data(), blob.data() + data_start + off, len);
      if (hex64(fnv1a64(bytes_of(t.value))) != rec.at("checksum").get<std::string>()) {
        throw CorruptionError("checksum mismatch in tensor '" + name + "'");
      }
    }
    const auto& s = manifest.at("shape");
    ModelShape shape{s.at("words").get<int>(), s.at("chars").get<int>(), s.at("tags").get<int>(),
                     s.at("attributes").get<int>()};
    auto config = TrainConfig::from_json(manifest.at("config"));
    auto vocab_file = path.parent_path() / manifest.at("vocab").get<std::string>();
    Vocab vocab = Vocab::load(vocab_file);
    if (vocab.word_count() != shape.words || vocab.char_count() != shape.chars ||
        vocab.tag_count() != shape.tags) {
      throw CorruptionError("vocabulary file does not match the checkpoint");
    }
    return TrainedModel{manifest.at("vertical").get<std::string>(),
                        manifest.at("attributes").get<std::vector<std::string>>(),
                        std::move(vocab), NodeTagger<float>(config, shape, std::move(params))};
  } catch (const nlohmann::json::exception& e) {
    throw CorruptionError(std::string("malformed checkpoint manifest: ") + e.what());
  }
}

}  // namespace simpdom
