#pragma once

// Mention streams and the canonical set of distinct quotes.

#include <chrono>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace quotefam::corpus {

using Timestamp = std::chrono::sys_seconds;
using QuoteId = std::uint32_t;

enum class StreamFormat { memetracker, tsv };

struct Mention {
  std::string quote_text;
  std::optional<Timestamp> timestamp;
  std::optional<std::string> source_url;
};

struct Quote {
  QuoteId id = 0;
  std::string text;
  std::uint64_t mentions = 0;
  // Either empty or exactly `mentions` entries, ascending.
  std::vector<Timestamp> timestamps;
};

class QuoteSet {
 public:
  QuoteSet() = default;
  // Takes ownership; ids are rewritten to 0..n-1 in the given order.
  explicit QuoteSet(std::vector<Quote> quotes);

  std::span<const Quote> quotes() const noexcept { return quotes_; }
  const Quote& operator[](QuoteId id) const { return quotes_.at(id); }
  std::size_t size() const noexcept { return quotes_.size(); }
  bool empty() const noexcept { return quotes_.empty(); }
  std::uint64_t total_mentions() const noexcept { return total_mentions_; }

 private:
  std::vector<Quote> quotes_;
  std::uint64_t total_mentions_ = 0;
};

struct ParseResult {
  std::vector<Mention> mentions;
  std::size_t records = 0;
  std::size_t malformed = 0;
  std::size_t first_malformed_line = 0;
};

// Throws IoError on stream failure and FormatError (carrying the first bad
// line) when more than 10% of records are malformed.
ParseResult parse_mention_stream(std::istream& in, StreamFormat format);

// Groups mentions by canonical text in first-appearance order and drops
// quotes with fewer than min_mentions mentions.
QuoteSet aggregate(std::span<const Mention> mentions, std::uint64_t min_mentions = 5);

// Lowercase (ASCII), collapse whitespace runs, trim.
std::string canonicalize(std::string_view text);

// Inverse of aggregate for a QuoteSet; one Mention per counted mention.
std::vector<Mention> expand(const QuoteSet& quotes);

// Canonical TSV: text<TAB>count[<TAB>ts,ts,...] per quote, in id order.
void write_tsv(std::ostream& out, const QuoteSet& quotes);

// Accepts "YYYY-MM-DD HH:MM:SS" and "YYYY-MM-DDTHH:MM:SS", optional trailing 'Z'.
std::optional<Timestamp> parse_timestamp(std::string_view text);
// "YYYY-MM-DDTHH:MM:SS"
std::string format_timestamp(Timestamp ts);

}  // namespace quotefam::corpus
