#include "fetch.hpp"

#include <sys/wait.h>
#include <unistd.h>

#include <array>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <stdexcept>

#include <openssl/evp.h>

#ifndef CPPHTTPLIB_OPENSSL_SUPPORT
#define CPPHTTPLIB_OPENSSL_SUPPORT
#endif
#include <httplib.h>
#include <json.hpp>

#include "tactsim/error.hpp"

namespace tactsim::cli {

namespace {

using json = nlohmann::json;
namespace fs = std::filesystem;

std::string to_hex(const unsigned char* digest, unsigned len) {
  static const char* hex = "0123456789abcdef";
  std::string out;
  out.reserve(2 * len);
  for (unsigned i = 0; i < len; ++i) {
    out.push_back(hex[digest[i] >> 4]);
    out.push_back(hex[digest[i] & 0xf]);
  }
  return out;
}

struct DigestCtx {
  EVP_MD_CTX* ctx = nullptr;
  DigestCtx() : ctx(EVP_MD_CTX_new()) {
    if (ctx == nullptr || EVP_DigestInit_ex(ctx, EVP_sha256(), nullptr) != 1) {
      throw IoError("SHA-256 context initialization failed");
    }
  }
  ~DigestCtx() { EVP_MD_CTX_free(ctx); }
  DigestCtx(const DigestCtx&) = delete;
  DigestCtx& operator=(const DigestCtx&) = delete;

  void update(const void* data, std::size_t size) {
    if (EVP_DigestUpdate(ctx, data, size) != 1) throw IoError("SHA-256 update failed");
  }
  std::string finish() {
    std::array<unsigned char, EVP_MAX_MD_SIZE> md{};
    unsigned len = 0;
    if (EVP_DigestFinal_ex(ctx, md.data(), &len) != 1) throw IoError("SHA-256 finalize failed");
    return to_hex(md.data(), len);
  }
};

bool valid_sha256(const std::string& s) {
  if (s.size() != 64) return false;
  for (char c : s) {
    if (!((c >= '0' && c <= '9') || (c >= 'a' && c <= 'f'))) return false;
  }
  return true;
}

/// Splits an http(s) URL into the origin httplib::Client expects and the
/// request path.
void split_url(const std::string& url, std::string* origin, std::string* path) {
  const std::size_t scheme = url.find("://");
  if (scheme == std::string::npos ||
      (url.rfind("http://", 0) != 0 && url.rfind("https://", 0) != 0)) {
    throw IoError("unsupported URL '" + url + "' (expected http:// or https://)");
  }
  const std::size_t slash = url.find('/', scheme + 3);
  if (slash == std::string::npos) {
    *origin = url;
    *path = "/";
  } else {
    *origin = url.substr(0, slash);
    *path = url.substr(slash);
  }
}

void download(const std::string& url, const fs::path& target) {
  std::string origin;
  std::string path;
  split_url(url, &origin, &path);

  std::ofstream out(target, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open '" + target.string() + "' for writing");

  httplib::Client client(origin);
  client.set_follow_location(true);
  client.set_connection_timeout(30, 0);
  client.set_read_timeout(300, 0);
  const httplib::Result res = client.Get(path, [&](const char* data, std::size_t size) {
    out.write(data, static_cast<std::streamsize>(size));
    return out.good();
  });
  out.close();
  if (!res) {
    throw IoError("download of '" + url + "' failed: " + httplib::to_string(res.error()));
  }
  if (res->status != 200) {
    throw IoError("download of '" + url + "' failed: HTTP " + std::to_string(res->status));
  }
  if (!out.good()) {
    throw IoError("short write while saving '" + target.string() + "'");
  }
}

/// Runs `tar -xf archive -C dir` (or unzip for .zip) without a shell.
void unpack_archive(const fs::path& archive, const fs::path& dir) {
  std::vector<std::string> args;
  if (archive.extension() == ".zip") {
    args = {"unzip", "-o", "-q", archive.string(), "-d", dir.string()};
  } else {
    args = {"tar", "-xf", archive.string(), "-C", dir.string()};
  }
  const pid_t pid = fork();
  if (pid < 0) throw IoError("fork failed while unpacking '" + archive.string() + "'");
  if (pid == 0) {
    std::vector<char*> argv;
    argv.reserve(args.size() + 1);
    for (std::string& a : args) argv.push_back(a.data());
    argv.push_back(nullptr);
    execvp(argv[0], argv.data());
    _exit(127);
  }
  int status = 0;
  if (waitpid(pid, &status, 0) < 0 || !WIFEXITED(status) || WEXITSTATUS(status) != 0) {
    throw IoError("unpacking '" + archive.string() + "' with " + args[0] + " failed");
  }
}

}  // namespace

std::string sha256_hex(const void* data, std::size_t size) {
  DigestCtx ctx;
  ctx.update(data, size);
  return ctx.finish();
}

std::string sha256_hex_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path + "'");
  DigestCtx ctx;
  std::array<char, 1 << 16> buf;
  while (in) {
    in.read(buf.data(), static_cast<std::streamsize>(buf.size()));
    const std::streamsize got = in.gcount();
    if (got > 0) ctx.update(buf.data(), static_cast<std::size_t>(got));
  }
  if (in.bad()) throw IoError("read error on '" + path + "'");
  return ctx.finish();
}

FetchManifest parse_fetchmanifest_impl(const json& doc) {
  if (!doc.is_object()) throw IoError("invalid manifest: top level must be an object");
  for (const auto& [key, value] : doc.items()) {
    (void)value;
    if (key != "homepage" && key != "base_url" && key != "files") {
      throw IoError("invalid manifest: unknown key '" + key + "'");
    }
  }
  FetchManifest manifest;
  if (doc.contains("homepage")) {
    if (!doc["homepage"].is_string()) throw IoError("invalid manifest: 'homepage' must be a string");
    manifest.homepage = doc["homepage"].get<std::string>();
  }
  if (doc.contains("base_url")) {
    if (!doc["base_url"].is_string()) throw IoError("invalid manifest: 'base_url' must be a string");
    manifest.base_url = doc["base_url"].get<std::string>();
  }
  if (!doc.contains("files") || !doc["files"].is_array()) {
    throw IoError("invalid manifest: missing 'files' array");
  }
  for (const json& entry : doc["files"]) {
    if (!entry.is_object()) throw IoError("invalid manifest: file entries must be objects");
    for (const auto& [key, value] : entry.items()) {
      (void)value;
      if (key != "path" && key != "url" && key != "sha256" && key != "unpack") {
        throw IoError("invalid manifest: unknown file key '" + key + "'");
      }
    }
    ManifestEntry e;
    if (!entry.contains("path") || !entry["path"].is_string()) {
      throw IoError("invalid manifest: every file needs a string 'path'");
    }
    e.path = entry["path"].get<std::string>();
    if (e.path.empty() || e.path.find('/') != std::string::npos ||
        e.path.find("..") != std::string::npos) {
      throw IoError("invalid manifest: file path '" + e.path + "' must be a bare file name");
    }
    if (entry.contains("url")) {
      if (!entry["url"].is_string()) throw IoError("invalid manifest: 'url' must be a string");
      e.url = entry["url"].get<std::string>();
    }
    if (entry.contains("sha256")) {
      if (entry["sha256"].is_null()) {
        e.sha256.clear();
      } else if (entry["sha256"].is_string()) {
        e.sha256 = entry["sha256"].get<std::string>();
        if (!valid_sha256(e.sha256)) {
          throw IoError("invalid manifest: sha256 for '" + e.path +
                        "' must be 64 lowercase hex characters");
        }
      } else {
        throw IoError("invalid manifest: 'sha256' must be a string or null");
      }
    }
    if (entry.contains("unpack")) {
      if (!entry["unpack"].is_boolean()) throw IoError("invalid manifest: 'unpack' must be a boolean");
      e.unpack = entry["unpack"].get<bool>();
    }
    manifest.files.push_back(std::move(e));
  }
  return manifest;
}

FetchManifest parse_fetch_manifest(const std::string& json_text) {
  json doc;
  try {
    doc = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw IoError(std::string("invalid manifest: ") + e.what());
  }
  return parse_fetchmanifest_impl(doc);
}

void fetch_dataset(const FetchManifest& manifest, const FetchOptions& options) {
  const std::string base =
      options.base_url_override.empty() ? manifest.base_url : options.base_url_override;
  fs::create_directories(options.out_dir);

  for (const ManifestEntry& entry : manifest.files) {
    const fs::path target = fs::path(options.out_dir) / entry.path;
    std::string url = entry.url.empty() ? entry.path : entry.url;
    if (url.find("://") == std::string::npos) {
      if (base.empty()) {
        throw IoError("entry '" + entry.path + "' has a relative url and no base_url is set");
      }
      url = base + (base.back() == '/' ? "" : "/") + url;
    }

    if (!entry.sha256.empty() && fs::exists(target) &&
        sha256_hex_file(target.string()) == entry.sha256) {
      std::cerr << entry.path << ": already present, digest verified\n";
    } else {
      const fs::path part = target.string() + ".part";
      std::cerr << entry.path << ": downloading " << url << "\n";
      download(url, part);
      const std::string digest = sha256_hex_file(part.string());
      if (entry.sha256.empty()) {
        throw std::invalid_argument(
            "entry '" + entry.path + "' is unpinned; computed sha256 " + digest +
            " — add it to the manifest to allow installation (download kept at " +
            part.string() + ")");
      }
      if (digest != entry.sha256) {
        throw std::invalid_argument("checksum mismatch for '" + entry.path + "': expected " +
                                    entry.sha256 + ", got " + digest +
                                    "; refusing to unpack (download kept at " + part.string() +
                                    ")");
      }
      fs::rename(part, target);
      std::cerr << entry.path << ": digest verified\n";
    }

    if (entry.unpack && options.allow_unpack) {
      std::cerr << entry.path << ": unpacking\n";
      unpack_archive(target, options.out_dir);
    }
  }
}

}  // namespace tactsim::cli
