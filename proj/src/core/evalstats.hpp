#pragma once

// Statistics for comparing two clusterings through human relevance marks.

#include <cstdint>
#include <iosfwd>
#include <map>
#include <span>
#include <string>
#include <vector>

namespace quotefam::evalstats {

enum class Mark { relevant, not_relevant, uncertain };

struct JudgedFamily {
  std::string family_id;
  std::vector<Mark> list_one;  // items from the evaluated method's family
  std::vector<Mark> list_two;  // extra items from the rival's overlapping families
};

struct PrecisionRecall {
  double precision = 0.0;
  double relative_recall = 0.0;
  double f_measure = 0.0;
};

// Pooled over all families; uncertain marks are ignored. DomainError when no
// list-one item carries a definite mark.
PrecisionRecall precision_relative_recall(std::span<const JudgedFamily> judged);

// Labels are arbitrary integers. DomainError on a length mismatch or empty
// input. Complete agreement under a single shared label gives 1.
double cohen_kappa(std::span<const int> a, std::span<const int> b);

// Paired sign-flip randomization test on the mean difference, p = (r+1)/(R+1).
// DomainError on a length mismatch, empty input or fewer than 100 iterations.
double approx_randomization_test(std::span<const double> a, std::span<const double> b, std::size_t iterations,
                                 std::uint64_t seed);

struct JudgmentRow {
  std::string family_id;
  int list = 1;
  std::string quote_text;
  Mark mark = Mark::uncertain;
};

// family_id<TAB>list{1|2}<TAB>quote_text<TAB>mark. Marks: relevant/1/yes,
// not_relevant/0/no, uncertain/?. FormatError on bad rows.
std::vector<JudgmentRow> parse_judgments(std::istream& in);

// Groups rows by family in first-appearance order.
std::vector<JudgedFamily> group_judgments(std::span<const JudgmentRow> rows);

// Per-family F-measure, used as the paired score for the randomization test.
// Families whose score is undefined give 0.
std::map<std::string, double> family_f_scores(std::span<const JudgedFamily> judged);

}  // namespace quotefam::evalstats
