#include "core/artifacts.hpp"

#include <openssl/evp.h>

#include <fstream>
#include <memory>
#include <sstream>

#include "core/error.hpp"

namespace quotefam::artifacts {

namespace fs = std::filesystem;

std::string sha256_hex(std::string_view bytes) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)> ctx(EVP_MD_CTX_new(), EVP_MD_CTX_free);
  if (!ctx || EVP_DigestInit_ex(ctx.get(), EVP_sha256(), nullptr) != 1 ||
      EVP_DigestUpdate(ctx.get(), bytes.data(), bytes.size()) != 1 ||
      EVP_DigestFinal_ex(ctx.get(), digest, &len) != 1) {
    throw std::runtime_error("sha256 failed");
  }
  static constexpr char hex[] = "0123456789abcdef";
  std::string out;
  out.reserve(2 * len);
  for (unsigned int i = 0; i < len; ++i) {
    out += hex[digest[i] >> 4];
    out += hex[digest[i] & 15];
  }
  return out;
}

namespace {

std::string slurp(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  if (in.bad()) throw IoError("failed reading " + path.string());
  return ss.str();
}

}  // namespace

std::string sha256_file(const fs::path& path) { return sha256_hex(slurp(path)); }

std::string header_line(std::string_view subcommand, std::string_view config_digest) {
  std::string s = "# quotefam ";
  s += subcommand;
  s += " config=";
  s += config_digest;
  return s;
}

std::string write_artifact(const fs::path& path, std::string_view subcommand, std::string_view config_digest,
                           std::string_view body) {
  std::string contents = header_line(subcommand, config_digest);
  contents += '\n';
  contents += body;
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  fs::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write " + tmp.string());
    out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
    out.close();
    if (!out) throw IoError("failed writing " + tmp.string());
  }
  fs::rename(tmp, path);
  return sha256_hex(contents);
}

std::string read_body(const fs::path& path) {
  std::string all = slurp(path);
  std::size_t pos = 0;
  while (pos < all.size() && all[pos] == '#') {
    const auto nl = all.find('\n', pos);
    pos = nl == std::string::npos ? all.size() : nl + 1;
  }
  return all.substr(pos);
}

json family_record(const communities::Family& family, const std::vector<std::uint32_t>* subfamily) {
  json quotes = json::array();
  for (std::size_t i = 0; i < family.quotes.size(); ++i) {
    const auto& q = family.quotes[i];
    json jq = {{"id", q.id}, {"text", q.text}, {"mentions", q.mentions}};
    if (subfamily) jq["subfamily_id"] = subfamily->at(i);
    if (!q.timestamps.empty()) {
      json ts = json::array();
      for (const auto t : q.timestamps) ts.push_back(corpus::format_timestamp(t));
      jq["timestamps"] = std::move(ts);
    }
    quotes.push_back(std::move(jq));
  }
  return {{"family_id", family.id}, {"quotes", std::move(quotes)}};
}

std::vector<FamilyRecord> parse_family_records(std::string_view body) {
  std::vector<FamilyRecord> out;
  std::size_t lineno = 0, pos = 0;
  while (pos < body.size()) {
    auto nl = body.find('\n', pos);
    if (nl == std::string_view::npos) nl = body.size();
    const std::string_view line = body.substr(pos, nl - pos);
    pos = nl + 1;
    ++lineno;
    if (line.empty()) continue;
    try {
      const json j = json::parse(line);
      FamilyRecord rec;
      rec.family.id = j.at("family_id").get<communities::FamilyId>();
      bool with_sub = false;
      std::vector<std::uint32_t> labels;
      for (const auto& jq : j.at("quotes")) {
        corpus::Quote q;
        q.id = jq.at("id").get<corpus::QuoteId>();
        q.text = jq.at("text").get<std::string>();
        q.mentions = jq.at("mentions").get<std::uint64_t>();
        if (q.mentions < 1) throw FormatError("quote with no mentions", lineno);
        if (jq.contains("timestamps")) {
          for (const auto& t : jq.at("timestamps")) {
            const auto ts = corpus::parse_timestamp(t.get<std::string>());
            if (!ts) throw FormatError("bad timestamp", lineno);
            q.timestamps.push_back(*ts);
          }
          if (q.timestamps.size() != q.mentions) throw FormatError("timestamp count differs from mentions", lineno);
        }
        if (jq.contains("subfamily_id")) {
          with_sub = true;
          labels.push_back(jq.at("subfamily_id").get<std::uint32_t>());
        }
        rec.family.quotes.push_back(std::move(q));
      }
      if (with_sub) {
        if (labels.size() != rec.family.quotes.size()) throw FormatError("subfamily_id missing on some quotes", lineno);
        rec.subfamily = std::move(labels);
      }
      out.push_back(std::move(rec));
    } catch (const json::exception& e) {
      throw FormatError(std::string("bad family record: ") + e.what(), lineno);
    }
  }
  return out;
}

}  // namespace quotefam::artifacts
