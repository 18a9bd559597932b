#include "titan/nn/checkpoint.hpp"

#include <json.hpp>

#include <algorithm>
#include <cstdint>
#include <fstream>
#include <stdexcept>
#include <utility>

namespace titan::nn {

namespace {

using nlohmann::json;

constexpr char kMagic[8] = {'T', 'I', 'T', 'A', 'N', 'C', 'K', 'P'};
constexpr std::uint32_t kVersion = 1;

void write_u32(std::ofstream& out, std::uint32_t v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof v);
}

void write_u64(std::ofstream& out, std::uint64_t v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof v);
}

std::uint32_t read_u32(std::ifstream& in, const std::string& path) {
  std::uint32_t v = 0;
  if (!in.read(reinterpret_cast<char*>(&v), sizeof v))
    throw std::runtime_error("truncated checkpoint: " + path);
  return v;
}

std::uint64_t read_u64(std::ifstream& in, const std::string& path) {
  std::uint64_t v = 0;
  if (!in.read(reinterpret_cast<char*>(&v), sizeof v))
    throw std::runtime_error("truncated checkpoint: " + path);
  return v;
}

json read_header(std::ifstream& in, const std::string& path) {
  char magic[8];
  if (!in.read(magic, sizeof magic) || !std::equal(magic, magic + 8, kMagic))
    throw std::runtime_error("not a checkpoint file: " + path);
  const std::uint32_t version = read_u32(in, path);
  if (version != kVersion)
    throw std::runtime_error("unsupported checkpoint version " +
                             std::to_string(version) + ": " + path);
  const std::uint64_t len = read_u64(in, path);
  std::string header(len, '\0');
  if (!in.read(header.data(), static_cast<std::streamsize>(len)))
    throw std::runtime_error("truncated checkpoint header: " + path);
  json h = json::parse(header, nullptr, false);
  if (h.is_discarded())
    throw std::runtime_error("corrupt checkpoint header: " + path);
  return h;
}

}  // namespace

void save_checkpoint(const std::string& path, const std::string& kind,
                     const std::string& config_json, const ParamStore& params) {
  json header;
  header["kind"] = kind;
  header["config"] = config_json;
  json plist = json::array();
  for (const Param* p : params.items())
    plist.push_back({{"name", p->name}, {"rows", p->rows}, {"cols", p->cols}});
  header["params"] = std::move(plist);
  const std::string hs = header.dump();

  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open checkpoint for writing: " + path);
  out.write(kMagic, sizeof kMagic);
  write_u32(out, kVersion);
  write_u64(out, hs.size());
  out.write(hs.data(), static_cast<std::streamsize>(hs.size()));
  for (const Param* p : params.items())
    out.write(reinterpret_cast<const char*>(p->value.data()),
              static_cast<std::streamsize>(p->value.size() * sizeof(double)));
  if (!out) throw std::runtime_error("checkpoint write failed: " + path);
}

std::string load_checkpoint(const std::string& path, const std::string& kind,
                            ParamStore& params) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open checkpoint: " + path);
  const json h = read_header(in, path);

  const std::string file_kind = h.value("kind", "");
  if (file_kind != kind)
    throw std::runtime_error("checkpoint kind mismatch: file holds '" + file_kind +
                             "', expected '" + kind + "': " + path);

  const auto& plist = h.at("params");
  const auto& items = params.items();
  if (plist.size() != items.size())
    throw std::runtime_error("checkpoint parameter count mismatch (" +
                             std::to_string(plist.size()) + " vs " +
                             std::to_string(items.size()) + "): " + path);
  for (size_t i = 0; i < items.size(); ++i) {
    const auto& rec = plist[i];
    if (rec.at("name").get<std::string>() != items[i]->name ||
        rec.at("rows").get<int>() != items[i]->rows ||
        rec.at("cols").get<int>() != items[i]->cols)
      throw std::runtime_error("checkpoint parameter mismatch at '" +
                               items[i]->name + "': " + path);
  }
  for (Param* p : items) {
    if (!in.read(reinterpret_cast<char*>(p->value.data()),
                 static_cast<std::streamsize>(p->value.size() * sizeof(double))))
      throw std::runtime_error("truncated checkpoint payload: " + path);
  }
  return h.value("config", "");
}

std::pair<std::string, std::string> read_checkpoint_header(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open checkpoint: " + path);
  const json h = read_header(in, path);
  return {h.value("kind", ""), h.value("config", "")};
}

}  // namespace titan::nn
