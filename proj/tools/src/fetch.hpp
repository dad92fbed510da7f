#pragma once

#include <string>
#include <vector>

namespace tactsim::cli {

/// One downloadable artifact. `url` may be absolute or relative to the
/// manifest's base_url; `sha256` is the lowercase hex digest the download
/// must match ("" = unpinned: the fetch computes and prints the digest but
/// refuses to install the file).
struct ManifestEntry {
  std::string path;    ///< file name under the output directory
  std::string url;     ///< absolute, or relative to base_url; "" = path
  std::string sha256;  ///< 64 hex chars, or "" for unpinned
  bool unpack = false; ///< extract the archive after verification
};

struct FetchManifest {
  std::string homepage;  ///< informational project page
  std::string base_url;  ///< prefix for relative entry urls
  std::vector<ManifestEntry> files;
};

/// Parse the manifest schema above. Throws tactsim::IoError naming the
/// offending field; unknown keys are rejected.
FetchManifest parse_fetch_manifest(const std::string& json_text);

/// Lowercase hex SHA-256 of a file's bytes. Throws tactsim::IoError when the
/// file cannot be read.
std::string sha256_hex_file(const std::string& path);

/// Lowercase hex SHA-256 of a byte buffer.
std::string sha256_hex(const void* data, std::size_t size);

struct FetchOptions {
  std::string out_dir;
  std::string base_url_override;  ///< "" = use the manifest's base_url
  bool allow_unpack = true;
};

/// Download, verify, and optionally unpack every manifest entry. Files
/// already present with a matching digest are skipped. Throws
/// tactsim::IoError on network or filesystem failures and
/// std::invalid_argument on digest mismatches (fail closed: the unverified
/// download is left beside the target with a .part suffix and nothing is
/// unpacked).
void fetch_dataset(const FetchManifest& manifest, const FetchOptions& options);

}  // namespace tactsim::cli
