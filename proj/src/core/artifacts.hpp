#pragma once

// On-disk stage artifacts: provenance headers, digests and the family
// record format shared by the pipeline stages.

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "core/communities.hpp"

namespace quotefam::artifacts {

using json = nlohmann::json;

std::string sha256_hex(std::string_view bytes);
// IoError when the file cannot be read.
std::string sha256_file(const std::filesystem::path& path);

// "# quotefam <subcommand> config=<digest>"
std::string header_line(std::string_view subcommand, std::string_view config_digest);

// Writes header + body atomically (temp file then rename) and returns the
// digest of the full file contents.
std::string write_artifact(const std::filesystem::path& path, std::string_view subcommand,
                           std::string_view config_digest, std::string_view body);

// File contents with leading '#' lines removed. IoError when unreadable.
std::string read_body(const std::filesystem::path& path);

// One family per line. When `subfamily` is given it holds the sub-family id
// of every quote, by local index.
json family_record(const communities::Family& family, const std::vector<std::uint32_t>* subfamily = nullptr);

struct FamilyRecord {
  communities::Family family;
  std::optional<std::vector<std::uint32_t>> subfamily;
};

// FormatError on malformed records (line numbers count body lines).
std::vector<FamilyRecord> parse_family_records(std::string_view body);

}  // namespace quotefam::artifacts
