#include "core/corpus.hpp"

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <istream>
#include <ostream>
#include <unordered_map>

#include "core/error.hpp"

namespace quotefam::corpus {

namespace {

bool is_space(char c) { return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v'; }

std::string_view trim(std::string_view s) {
  while (!s.empty() && is_space(s.front())) s.remove_prefix(1);
  while (!s.empty() && is_space(s.back())) s.remove_suffix(1);
  return s;
}

template <class Int>
bool parse_int(std::string_view s, Int& out) {
  if (s.empty()) return false;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  return ec == std::errc{} && ptr == s.data() + s.size();
}

std::vector<std::string_view> split(std::string_view s, char sep) {
  std::vector<std::string_view> parts;
  std::size_t start = 0;
  while (true) {
    const std::size_t pos = s.find(sep, start);
    if (pos == std::string_view::npos) {
      parts.push_back(s.substr(start));
      return parts;
    }
    parts.push_back(s.substr(start, pos - start));
    start = pos + 1;
  }
}

class MalformedTally {
 public:
  void record() { ++records_; }
  void malformed(std::size_t line) {
    if (malformed_ == 0) first_line_ = line;
    ++malformed_;
  }
  void finish(ParseResult& result) const {
    result.records = records_;
    result.malformed = malformed_;
    result.first_malformed_line = first_line_;
    if (malformed_ * 10 > records_) {
      throw FormatError(std::to_string(malformed_) + " of " + std::to_string(records_) +
                            " records malformed; first failure",
                        first_line_);
    }
  }

 private:
  std::size_t records_ = 0;
  std::size_t malformed_ = 0;
  std::size_t first_line_ = 0;
};

void check_stream(const std::istream& in) {
  if (in.bad()) throw IoError("failed reading mention stream");
}

ParseResult parse_memetracker(std::istream& in) {
  ParseResult result;
  MalformedTally tally;
  std::optional<Timestamp> block_time;
  std::optional<std::string> block_url;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::string_view view = line;
    if (!view.empty() && view.back() == '\r') view.remove_suffix(1);
    if (trim(view).empty()) {
      block_time.reset();
      block_url.reset();
      continue;
    }
    tally.record();
    if (view.size() < 2 || view[1] != '\t') {
      tally.malformed(line_no);
      continue;
    }
    const std::string_view payload = view.substr(2);
    switch (view[0]) {
      case 'P':
        block_url = std::string(trim(payload));
        break;
      case 'T':
        block_time = parse_timestamp(trim(payload));
        if (!block_time) tally.malformed(line_no);
        break;
      case 'Q': {
        const std::string_view text = trim(payload);
        if (text.empty()) {
          tally.malformed(line_no);
          break;
        }
        result.mentions.push_back(Mention{std::string(text), block_time, block_url});
        break;
      }
      case 'L':
        break;
      default:
        tally.malformed(line_no);
    }
  }
  check_stream(in);
  tally.finish(result);
  return result;
}

ParseResult parse_tsv(std::istream& in) {
  ParseResult result;
  MalformedTally tally;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::string_view view = line;
    if (!view.empty() && view.back() == '\r') view.remove_suffix(1);
    if (trim(view).empty() || view.front() == '#') continue;
    tally.record();
    const auto fields = split(view, '\t');
    std::uint64_t count = 0;
    if (fields.size() < 2 || fields.size() > 3 || trim(fields[0]).empty() ||
        !parse_int(fields[1], count) || count == 0) {
      tally.malformed(line_no);
      continue;
    }
    std::vector<Timestamp> stamps;
    if (fields.size() == 3) {
      bool ok = true;
      for (const auto part : split(fields[2], ',')) {
        const auto ts = parse_timestamp(trim(part));
        if (!ts) {
          ok = false;
          break;
        }
        stamps.push_back(*ts);
      }
      if (!ok || stamps.size() != count) {
        tally.malformed(line_no);
        continue;
      }
    }
    const std::string text(fields[0]);
    for (std::uint64_t i = 0; i < count; ++i) {
      Mention m{text, std::nullopt, std::nullopt};
      if (!stamps.empty()) m.timestamp = stamps[i];
      result.mentions.push_back(std::move(m));
    }
  }
  check_stream(in);
  tally.finish(result);
  return result;
}

}  // namespace

QuoteSet::QuoteSet(std::vector<Quote> quotes) : quotes_(std::move(quotes)) {
  for (std::size_t i = 0; i < quotes_.size(); ++i) {
    quotes_[i].id = static_cast<QuoteId>(i);
    total_mentions_ += quotes_[i].mentions;
  }
}

ParseResult parse_mention_stream(std::istream& in, StreamFormat format) {
  if (!in.good() && !in.eof()) throw IoError("mention stream is not readable");
  return format == StreamFormat::memetracker ? parse_memetracker(in) : parse_tsv(in);
}

std::string canonicalize(std::string_view text) {
  std::string out;
  out.reserve(text.size());
  bool pending_space = false;
  for (const char c : text) {
    if (is_space(c)) {
      pending_space = !out.empty();
      continue;
    }
    if (pending_space) {
      out.push_back(' ');
      pending_space = false;
    }
    out.push_back((c >= 'A' && c <= 'Z') ? static_cast<char>(c - 'A' + 'a') : c);
  }
  return out;
}

QuoteSet aggregate(std::span<const Mention> mentions, std::uint64_t min_mentions) {
  if (min_mentions < 1) throw DomainError("min_mentions must be at least 1");
  struct Group {
    std::string text;
    std::uint64_t count = 0;
    std::vector<Timestamp> stamps;
    bool all_stamped = true;
  };
  std::vector<Group> groups;
  std::unordered_map<std::string, std::size_t> index;
  for (const Mention& m : mentions) {
    std::string key = canonicalize(m.quote_text);
    if (key.empty()) continue;
    auto [it, inserted] = index.try_emplace(key, groups.size());
    if (inserted) groups.push_back(Group{std::move(key), 0, {}, true});
    Group& g = groups[it->second];
    ++g.count;
    if (m.timestamp) {
      g.stamps.push_back(*m.timestamp);
    } else {
      g.all_stamped = false;
    }
  }
  std::vector<Quote> kept;
  for (Group& g : groups) {
    if (g.count < min_mentions) continue;
    Quote q;
    q.text = std::move(g.text);
    q.mentions = g.count;
    // A partially stamped quote cannot satisfy the one-stamp-per-mention
    // invariant, so its stamps are dropped.
    if (g.all_stamped) {
      q.timestamps = std::move(g.stamps);
      std::sort(q.timestamps.begin(), q.timestamps.end());
    }
    kept.push_back(std::move(q));
  }
  return QuoteSet(std::move(kept));
}

std::vector<Mention> expand(const QuoteSet& quotes) {
  std::vector<Mention> out;
  out.reserve(quotes.total_mentions());
  for (const Quote& q : quotes.quotes()) {
    for (std::uint64_t i = 0; i < q.mentions; ++i) {
      Mention m{q.text, std::nullopt, std::nullopt};
      if (!q.timestamps.empty()) m.timestamp = q.timestamps[i];
      out.push_back(std::move(m));
    }
  }
  return out;
}

void write_tsv(std::ostream& out, const QuoteSet& quotes) {
  for (const Quote& q : quotes.quotes()) {
    out << q.text << '\t' << q.mentions;
    if (!q.timestamps.empty()) {
      out << '\t';
      for (std::size_t i = 0; i < q.timestamps.size(); ++i) {
        if (i) out << ',';
        out << format_timestamp(q.timestamps[i]);
      }
    }
    out << '\n';
  }
}

std::optional<Timestamp> parse_timestamp(std::string_view text) {
  if (!text.empty() && text.back() == 'Z') text.remove_suffix(1);
  if (text.size() != 19 || text[4] != '-' || text[7] != '-' || (text[10] != ' ' && text[10] != 'T') ||
      text[13] != ':' || text[16] != ':') {
    return std::nullopt;
  }
  int year = 0;
  unsigned month = 0, day = 0, hour = 0, minute = 0, second = 0;
  if (!parse_int(text.substr(0, 4), year) || !parse_int(text.substr(5, 2), month) ||
      !parse_int(text.substr(8, 2), day) || !parse_int(text.substr(11, 2), hour) ||
      !parse_int(text.substr(14, 2), minute) || !parse_int(text.substr(17, 2), second)) {
    return std::nullopt;
  }
  const std::chrono::year_month_day ymd{std::chrono::year{year}, std::chrono::month{month},
                                        std::chrono::day{day}};
  if (!ymd.ok() || hour > 23 || minute > 59 || second > 59) return std::nullopt;
  return std::chrono::sys_days{ymd} + std::chrono::hours{hour} + std::chrono::minutes{minute} +
         std::chrono::seconds{second};
}

std::string format_timestamp(Timestamp ts) {
  const auto days = std::chrono::floor<std::chrono::days>(ts);
  const std::chrono::year_month_day ymd{days};
  const std::chrono::hh_mm_ss hms{ts - days};
  char buf[64];
  std::snprintf(buf, sizeof buf, "%04d-%02u-%02uT%02ld:%02ld:%02lld", static_cast<int>(ymd.year()),
                static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()),
                static_cast<long>(hms.hours().count()), static_cast<long>(hms.minutes().count()),
                static_cast<long long>(hms.seconds().count()));
  return buf;
}

}  // namespace quotefam::corpus
