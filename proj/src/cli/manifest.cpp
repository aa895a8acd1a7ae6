#include "impact/cli/manifest.hpp"

#include "impact/core.hpp"

#include <openssl/evp.h>

#include <array>
#include <fstream>
#include <memory>
#include <sstream>

namespace impact::cli {

Json to_json(const RunManifest& m) {
  Json outputs = Json::array();
  for (const auto& o : m.outputs) outputs.push_back({{"path", o.path}, {"bytes", o.bytes}, {"sha256", o.sha256}});
  return Json{{"tool", m.tool},
              {"version", m.version},
              {"experiment", m.experiment},
              {"seed", m.seed},
              {"config", m.config},
              {"started_utc", m.started_utc},
              {"wall_seconds", m.wall_seconds},
              {"stages", m.stages},
              {"outputs", outputs}};
}

RunManifest manifest_from_json(const Json& j) {
  RunManifest m;
  try {
    m.tool = j.at("tool").get<std::string>();
    m.version = j.at("version").get<std::string>();
    m.experiment = j.at("experiment").get<std::string>();
    m.seed = j.at("seed").get<std::uint64_t>();
    m.config = j.at("config");
    m.started_utc = j.at("started_utc").get<std::string>();
    m.wall_seconds = j.at("wall_seconds").get<double>();
    m.stages = j.at("stages");
    for (const auto& o : j.at("outputs"))
      m.outputs.push_back({o.at("path").get<std::string>(), o.at("bytes").get<std::uintmax_t>(),
                           o.at("sha256").get<std::string>()});
  } catch (const Json::exception& e) {
    throw DataError(std::string("manifest: ") + e.what());
  }
  return m;
}

RunManifest read_manifest(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError(path.string() + ": cannot open manifest");
  try {
    return manifest_from_json(Json::parse(in));
  } catch (const Json::parse_error& e) {
    throw DataError(path.string() + ": corrupt manifest: " + e.what());
  } catch (const DataError& e) {
    throw DataError(path.string() + ": " + e.what());
  }
}

void write_atomic(const fs::path& path, const std::string& content) {
  fs::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    out << content;
    out.flush();
    if (!out) throw DataError(tmp.string() + ": write failed");
  }
  fs::rename(tmp, path);
}

std::string sha256_hex(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError(path.string() + ": cannot open for hashing");
  std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)> ctx(EVP_MD_CTX_new(), EVP_MD_CTX_free);
  if (!ctx || EVP_DigestInit_ex(ctx.get(), EVP_sha256(), nullptr) != 1) throw NumericError("sha256: init failed");
  std::array<char, 1 << 16> buf;
  while (in.read(buf.data(), buf.size()) || in.gcount() > 0) {
    EVP_DigestUpdate(ctx.get(), buf.data(), static_cast<std::size_t>(in.gcount()));
    if (in.eof()) break;
  }
  std::array<unsigned char, EVP_MAX_MD_SIZE> md{};
  unsigned int len = 0;
  EVP_DigestFinal_ex(ctx.get(), md.data(), &len);
  std::ostringstream hex;
  hex << std::hex;
  for (unsigned int i = 0; i < len; ++i) hex << (md[i] < 16 ? "0" : "") << static_cast<int>(md[i]);
  return hex.str();
}

OutputDir::OutputDir(fs::path root) : root_(std::move(root)) { fs::create_directories(root_); }

fs::path OutputDir::file(const std::string& name) {
  const fs::path rel(name);
  require(!name.empty() && rel.is_relative(), "output name must be a relative path: " + name);
  for (const auto& part : rel) require(part != "..", "output name may not leave the run directory: " + name);
  if (std::find(names_.begin(), names_.end(), name) == names_.end()) names_.push_back(name);
  const fs::path full = root_ / rel;
  fs::create_directories(full.parent_path());
  return full;
}

void OutputDir::json(const std::string& name, const Json& doc) {
  std::ofstream out(file(name), std::ios::binary | std::ios::trunc);
  out << doc.dump(2) << '\n';
  if (!out) throw DataError(name + ": write failed");
}

std::vector<OutputFile> OutputDir::inventory() const {
  std::vector<OutputFile> out;
  for (const auto& n : names_) {
    const fs::path p = root_ / n;
    out.push_back({n, fs::file_size(p), sha256_hex(p)});
  }
  return out;
}

}  // namespace impact::cli
