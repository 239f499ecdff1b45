#include "mrca/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <fstream>

#include "json.hpp"

static_assert(std::endian::native == std::endian::little,
              "checkpoint format requires a little-endian host");

namespace mrca {

using nlohmann::json;

namespace {

constexpr char kMagic[8] = {'M', 'R', 'C', 'A', 'C', 'K', 'P', 'T'};
constexpr std::uint32_t kVersion = 1;

json shape_to_json(const ShapeMeta &s) {
  return json{{"embed_dim", s.embed_dim},
              {"hidden_units", s.hidden_units},
              {"seq_len", s.seq_len},
              {"pool_size", s.pool_size},
              {"pool_stride", s.pool_stride},
              {"n_relations", s.n_relations}};
}

ShapeMeta shape_from_json(const json &j) {
  ShapeMeta s;
  s.embed_dim = j.at("embed_dim").get<int>();
  s.hidden_units = j.at("hidden_units").get<int>();
  s.seq_len = j.at("seq_len").get<int>();
  s.pool_size = j.at("pool_size").get<int>();
  s.pool_stride = j.at("pool_stride").get<int>();
  s.n_relations = j.at("n_relations").get<int>();
  return s;
}

}  // namespace

void save_checkpoint(const std::string &path, const Checkpoint &ckpt) {
  json manifest;
  manifest["shape"] = shape_to_json(ckpt.params.shape);
  manifest["output"] = to_string(ckpt.params.output);
  manifest["relations"] = ckpt.relations;
  manifest["embedding"] = {{"dim", ckpt.embedding.dim},
                           {"vocab_size", ckpt.embedding.vocab_size},
                           {"boost", ckpt.embedding.boost}};
  json tensors = json::array();
  std::uint64_t offset = 0;
  ckpt.params.tensors.for_each([&](const char *name, const Eigen::MatrixXd &m) {
    tensors.push_back({{"name", name},
                       {"rows", m.rows()},
                       {"cols", m.cols()},
                       {"offset", offset},
                       {"count", m.size()}});
    offset += static_cast<std::uint64_t>(m.size());
  });
  manifest["tensors"] = std::move(tensors);
  const std::string header = manifest.dump();

  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError("cannot write checkpoint: " + path);
  out.write(kMagic, sizeof(kMagic));
  std::uint32_t version = kVersion;
  out.write(reinterpret_cast<const char *>(&version), sizeof(version));
  std::uint64_t header_len = header.size();
  out.write(reinterpret_cast<const char *>(&header_len), sizeof(header_len));
  out.write(header.data(), static_cast<std::streamsize>(header.size()));
  ckpt.params.tensors.for_each([&](const char *, const Eigen::MatrixXd &m) {
    out.write(reinterpret_cast<const char *>(m.data()),
              static_cast<std::streamsize>(sizeof(double) * m.size()));
  });
  out.flush();
  if (!out) throw DataError("write failure on checkpoint: " + path);
}

Checkpoint load_checkpoint(const std::string &path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open checkpoint: " + path);
  char magic[8];
  in.read(magic, sizeof(magic));
  if (!in || std::memcmp(magic, kMagic, sizeof(kMagic)) != 0) {
    throw DataError(path + ": not a checkpoint file");
  }
  std::uint32_t version = 0;
  in.read(reinterpret_cast<char *>(&version), sizeof(version));
  if (!in || version != kVersion) {
    throw DataError(path + ": unsupported checkpoint version " +
                    std::to_string(version));
  }
  std::uint64_t header_len = 0;
  in.read(reinterpret_cast<char *>(&header_len), sizeof(header_len));
  if (!in || header_len == 0 || header_len > (1ull << 30)) {
    throw DataError(path + ": corrupt manifest length");
  }
  std::string header(header_len, '\0');
  in.read(header.data(), static_cast<std::streamsize>(header_len));
  if (!in) throw DataError(path + ": truncated manifest");
  json manifest;
  try {
    manifest = json::parse(header);
  } catch (const json::exception &e) {
    throw DataError(path + ": bad manifest: " + e.what());
  }

  Checkpoint ckpt;
  ckpt.params.shape = shape_from_json(manifest.at("shape"));
  ckpt.params.shape.validate();
  ckpt.params.output =
      output_kind_from_string(manifest.at("output").get<std::string>());
  ckpt.relations =
      manifest.at("relations").get<std::vector<std::string>>();
  ckpt.embedding.dim = manifest.at("embedding").at("dim").get<int>();
  ckpt.embedding.vocab_size =
      manifest.at("embedding").at("vocab_size").get<std::size_t>();
  ckpt.embedding.boost = manifest.at("embedding").at("boost").get<double>();
  if (ckpt.relations.size() !=
      static_cast<std::size_t>(ckpt.params.shape.n_relations)) {
    throw DataError(path + ": relation vocabulary size " +
                    std::to_string(ckpt.relations.size()) +
                    " does not match shape n_relations " +
                    std::to_string(ckpt.params.shape.n_relations));
  }

  ckpt.params.tensors = TensorSet::zeros(ckpt.params.shape);
  const json &tensors = manifest.at("tensors");
  std::size_t idx = 0;
  std::uint64_t expect_offset = 0;
  ckpt.params.tensors.for_each([&](const char *name, Eigen::MatrixXd &m) {
    if (idx >= tensors.size()) {
      throw DataError(path + ": manifest missing tensor " + name);
    }
    const json &t = tensors[idx++];
    if (t.at("name").get<std::string>() != name ||
        t.at("rows").get<Eigen::Index>() != m.rows() ||
        t.at("cols").get<Eigen::Index>() != m.cols() ||
        t.at("offset").get<std::uint64_t>() != expect_offset ||
        t.at("count").get<Eigen::Index>() != m.size()) {
      throw DataError(path + ": tensor " + name +
                      " inconsistent with shape metadata");
    }
    in.read(reinterpret_cast<char *>(m.data()),
            static_cast<std::streamsize>(sizeof(double) * m.size()));
    if (!in) throw DataError(path + ": truncated tensor " + name);
    expect_offset += static_cast<std::uint64_t>(m.size());
  });
  if (idx != tensors.size()) {
    throw DataError(path + ": manifest lists unexpected extra tensors");
  }
  return ckpt;
}

}  // namespace mrca
