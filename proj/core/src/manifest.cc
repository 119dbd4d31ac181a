#include "swarmrecon/manifest.h"

#include <openssl/evp.h>

#include <chrono>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "json_io.h"

namespace swarmrecon {

using internal::json;

std::string GitBlobHash(std::string_view content) {
  const std::string header = "blob " + std::to_string(content.size()) + '\0';
  EVP_MD_CTX* ctx = EVP_MD_CTX_new();
  if (ctx == nullptr) throw std::runtime_error("cannot allocate digest context");
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int length = 0;
  const bool ok = EVP_DigestInit_ex(ctx, EVP_sha1(), nullptr) == 1 &&
                  EVP_DigestUpdate(ctx, header.data(), header.size()) == 1 &&
                  EVP_DigestUpdate(ctx, content.data(), content.size()) == 1 &&
                  EVP_DigestFinal_ex(ctx, digest, &length) == 1;
  EVP_MD_CTX_free(ctx);
  if (!ok) throw std::runtime_error("SHA-1 digest failed");
  std::string hex;
  hex.reserve(2 * length);
  static constexpr char kDigits[] = "0123456789abcdef";
  for (unsigned int i = 0; i < length; ++i) {
    hex.push_back(kDigits[digest[i] >> 4]);
    hex.push_back(kDigits[digest[i] & 0xf]);
  }
  return hex;
}

std::string ReadFile(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  if (in.bad()) throw std::runtime_error("cannot read " + path.string());
  return ss.str();
}

std::string HashFile(const std::filesystem::path& path) { return GitBlobHash(ReadFile(path)); }

void WriteFileAtomic(const std::filesystem::path& path, std::string_view content) {
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + tmp.string());
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    out.flush();
    if (!out) throw std::runtime_error("cannot write " + tmp.string());
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    std::filesystem::remove(tmp, ec);
    throw std::runtime_error("cannot rename onto " + path.string());
  }
}

std::string UtcTimestamp() {
  const std::time_t now =
      std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

std::string RunManifest::ToJson() const {
  json j;
  j["format"] = "swarmrecon.run_manifest";
  j["command"] = command;
  j["argv"] = argv;
  j["seed"] = seed;
  j["scenario"] = scenario ? internal::ConfigToJson(*scenario) : json(nullptr);
  json params = json::object();
  for (const auto& [k, v] : parameters) params[k] = v;
  j["parameters"] = params;
  json in = json::array();
  for (const auto& i : inputs) in.push_back({{"path", i.path}, {"hash", i.hash}});
  j["inputs"] = in;
  j["outputs"] = outputs;
  j["started_at"] = started_at;
  j["finished_at"] = finished_at;
  j["status"] = status;
  return j.dump(2) + "\n";
}

RunManifest RunManifest::FromJson(std::string_view text) {
  try {
    const json j = json::parse(text);
    RunManifest m;
    m.command = j.at("command").get<std::string>();
    m.argv = j.at("argv").get<std::vector<std::string>>();
    m.seed = j.at("seed").get<std::uint64_t>();
    if (!j.at("scenario").is_null()) m.scenario = internal::ConfigFromJson(j.at("scenario"));
    for (const auto& [k, v] : j.at("parameters").items()) {
      m.parameters.emplace_back(k, v.get<std::string>());
    }
    for (const json& i : j.at("inputs")) {
      m.inputs.push_back({i.at("path").get<std::string>(), i.at("hash").get<std::string>()});
    }
    m.outputs = j.at("outputs").get<std::vector<std::string>>();
    m.started_at = j.at("started_at").get<std::string>();
    m.finished_at = j.at("finished_at").get<std::string>();
    m.status = j.at("status").get<std::string>();
    return m;
  } catch (const json::exception& e) {
    throw FormatError(std::string("malformed run manifest: ") + e.what());
  }
}

void WriteManifest(const RunManifest& manifest, const std::filesystem::path& path) {
  WriteFileAtomic(path, manifest.ToJson());
}

}  // namespace swarmrecon
