#include "manifest.hpp"

#include <openssl/evp.h>

#include <array>
#include <chrono>
#include <ctime>
#include <fstream>
#include <memory>
#include <sstream>

#include "condbohm/error.hpp"

namespace condbohm::cli {

namespace fs = std::filesystem;

std::string sha256_file(const fs::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw Error(ErrorKind::io, "cannot read '" + path.string() + "' for hashing");
  const std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)> ctx(EVP_MD_CTX_new(), &EVP_MD_CTX_free);
  if (!ctx || EVP_DigestInit_ex(ctx.get(), EVP_sha256(), nullptr) != 1) {
    throw Error(ErrorKind::io, "SHA-256 initialisation failed");
  }
  std::array<char, 1 << 16> buf{};
  while (is) {
    is.read(buf.data(), buf.size());
    const auto n = static_cast<std::size_t>(is.gcount());
    if (n > 0 && EVP_DigestUpdate(ctx.get(), buf.data(), n) != 1) {
      throw Error(ErrorKind::io, "SHA-256 update failed");
    }
  }
  std::array<unsigned char, EVP_MAX_MD_SIZE> md{};
  unsigned int len = 0;
  if (EVP_DigestFinal_ex(ctx.get(), md.data(), &len) != 1) throw Error(ErrorKind::io, "SHA-256 finalisation failed");
  static constexpr char kHex[] = "0123456789abcdef";
  std::string out;
  out.reserve(2 * len);
  for (unsigned int i = 0; i < len; ++i) {
    out += kHex[md[i] >> 4];
    out += kHex[md[i] & 0xf];
  }
  return out;
}

void add_files(RunManifest& manifest, const fs::path& dir, const std::vector<fs::path>& files) {
  for (const fs::path& f : files) {
    manifest.files.push_back({f.generic_string(), sha256_file(dir / f), fs::file_size(dir / f)});
  }
}

Json to_json(const RunManifest& m) {
  Json files = Json::array();
  for (const ManifestFile& f : m.files) files.push_back({{"path", f.path}, {"sha256", f.sha256}, {"bytes", f.bytes}});
  return {{"artifact", m.artifact},
          {"version", m.version},
          {"subcommand", m.subcommand},
          {"seed", m.seed},
          {"config", m.config},
          {"started_utc", m.started_utc},
          {"finished_utc", m.finished_utc},
          {"files", files}};
}

RunManifest manifest_from_json(const Json& j) {
  try {
    RunManifest m;
    m.artifact = j.at("artifact").get<std::string>();
    m.version = j.at("version").get<std::string>();
    m.subcommand = j.at("subcommand").get<std::string>();
    m.seed = j.at("seed").get<std::uint64_t>();
    m.config = j.at("config").get<std::string>();
    m.started_utc = j.at("started_utc").get<std::string>();
    m.finished_utc = j.at("finished_utc").get<std::string>();
    for (const Json& f : j.at("files")) {
      m.files.push_back({f.at("path").get<std::string>(), f.at("sha256").get<std::string>(),
                         f.at("bytes").get<std::uintmax_t>()});
    }
    return m;
  } catch (const Json::exception& e) {
    throw Error(ErrorKind::config, std::string("malformed manifest: ") + e.what());
  }
}

void write_manifest(const RunManifest& manifest, const fs::path& dir) {
  std::ofstream os(dir / kManifestName, std::ios::binary);
  if (!os) throw Error(ErrorKind::io, "cannot write manifest in '" + dir.string() + "'");
  os << dump(to_json(manifest));
  os.flush();
  if (!os) throw Error(ErrorKind::io, "manifest write failed");
}

std::vector<std::string> verify_manifest(const fs::path& dir) {
  std::ifstream is(dir / kManifestName, std::ios::binary);
  if (!is) throw Error(ErrorKind::io, "no manifest in '" + dir.string() + "'");
  Json j;
  try {
    j = Json::parse(is);
  } catch (const Json::exception& e) {
    throw Error(ErrorKind::config, std::string("malformed manifest: ") + e.what());
  }
  std::vector<std::string> bad;
  for (const ManifestFile& f : manifest_from_json(j).files) {
    const fs::path p = dir / f.path;
    if (!fs::exists(p) || sha256_file(p) != f.sha256) bad.push_back(f.path);
  }
  return bad;
}

std::string utc_now() {
  const std::time_t t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

}  // namespace condbohm::cli
