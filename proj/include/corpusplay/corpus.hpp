#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <map>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <vector>

namespace corpusplay {

// A corpus passage: the grounding context handed to the challenger.
struct Document {
  std::string id;
  std::string text;
  std::string source;
  std::size_t token_estimate = 0;

  friend bool operator==(const Document&, const Document&) = default;
};

using TokenEstimator = std::function<std::size_t(std::string_view)>;

// ceil(bytes / 4).
std::size_t default_token_estimate(std::string_view text) noexcept;

inline constexpr std::size_t kDefaultSegmentBudget = 5992;

// Splits `text` into contiguous segments whose estimates are each <= budget.
// Cuts land just after the last whitespace byte inside the budget window; a
// window without whitespace is cut hard, backed off to a UTF-8 boundary.
// Concatenating the result reproduces `text` exactly. The estimator must be
// monotone in prefix length.
std::vector<std::string> segment_text(std::string_view text, std::size_t budget,
                                      const TokenEstimator& estimate = default_token_estimate);

struct IngestReport {
  std::size_t records = 0;
  std::size_t added = 0;      // documents stored (after segmentation)
  std::size_t malformed = 0;  // lines that were not {"text": string, ...}
  std::size_t empty = 0;      // records whose text was empty or whitespace
};

// Ordered, append-only document collection with seeded sampling.
//
// The store is built single-threaded; once ingestion is done it is only read,
// and sample() is const and safe to call concurrently.
class CorpusStore {
 public:
  explicit CorpusStore(std::uint64_t seed = 0, TokenEstimator estimator = default_token_estimate);

  // Reads line-delimited {"text": ..., "source"?: ...} records. `source` is
  // the tag for records that carry none. Throws IngestError if the file
  // cannot be opened.
  IngestReport ingest(const std::filesystem::path& path, const std::string& source,
                      std::size_t budget);
  IngestReport ingest(std::istream& in, const std::string& source, std::size_t budget);

  // Segments and appends one text; returns the number of documents added.
  std::size_t add_text(std::string_view text, const std::string& source, std::size_t budget);

  // Per-source target proportions. Empty means uniform over all documents.
  // Sources missing from a non-empty mix are never drawn.
  void set_source_mix(std::map<std::string, double> mix);
  const std::map<std::string, double>& source_mix() const noexcept { return mix_; }

  // n draws with replacement. Equal (seed, contents, mix, call_index) give
  // identical output; distinct call indices give independent streams.
  std::vector<Document> sample(std::size_t n, std::uint64_t call_index) const;

  // Persistence as line-delimited {id, text, source, token_estimate}.
  void save(const std::filesystem::path& path) const;
  static CorpusStore load(const std::filesystem::path& path, std::uint64_t seed = 0);

  std::size_t size() const noexcept { return docs_.size(); }
  bool empty() const noexcept { return docs_.empty(); }
  const std::vector<Document>& documents() const noexcept { return docs_; }
  const Document* find(std::string_view id) const;

  std::uint64_t seed() const noexcept { return seed_; }
  void set_seed(std::uint64_t seed) noexcept { seed_ = seed; }

 private:
  void append(Document doc);

  std::uint64_t seed_;
  TokenEstimator estimator_;
  std::vector<Document> docs_;
  std::unordered_map<std::string, std::size_t> by_id_;
  std::map<std::string, std::vector<std::size_t>> by_source_;
  std::map<std::string, double> mix_;
};

}  // namespace corpusplay
