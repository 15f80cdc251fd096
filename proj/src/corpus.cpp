#include "corpusplay/corpus.hpp"

#include <cmath>
#include <fstream>
#include <nlohmann/json.hpp>

#include "corpusplay/error.hpp"
#include "corpusplay/random.hpp"

namespace corpusplay {
namespace {

bool is_space(unsigned char c) {
  return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v';
}

bool all_space(std::string_view s) {
  for (unsigned char c : s)
    if (!is_space(c)) return false;
  return true;
}

// Largest prefix length whose estimate fits the budget.
std::size_t fitting_prefix(std::string_view text, std::size_t budget, const TokenEstimator& estimate) {
  if (estimate(text) <= budget) return text.size();
  std::size_t lo = 0, hi = text.size();  // estimate(lo) fits, estimate(hi) does not
  while (hi - lo > 1) {
    std::size_t mid = lo + (hi - lo) / 2;
    if (estimate(text.substr(0, mid)) <= budget)
      lo = mid;
    else
      hi = mid;
  }
  return lo;
}

}  // namespace

std::size_t default_token_estimate(std::string_view text) noexcept { return (text.size() + 3) / 4; }

std::vector<std::string> segment_text(std::string_view text, std::size_t budget,
                                      const TokenEstimator& estimate) {
  if (budget == 0) throw ConfigError("segment budget must be positive");
  std::vector<std::string> out;
  while (!text.empty()) {
    std::size_t limit = fitting_prefix(text, budget, estimate);
    if (limit == text.size()) {
      out.emplace_back(text);
      break;
    }
    if (limit == 0) throw IngestError("token estimator admits no prefix within the budget");
    std::size_t cut = 0;
    for (std::size_t i = limit; i-- > 0;) {
      if (is_space(static_cast<unsigned char>(text[i]))) {
        cut = i + 1;
        break;
      }
    }
    if (cut == 0) {
      cut = limit;
      while (cut > 0 && (static_cast<unsigned char>(text[cut]) & 0xC0) == 0x80) --cut;
      if (cut == 0) cut = limit;
    }
    out.emplace_back(text.substr(0, cut));
    text.remove_prefix(cut);
  }
  return out;
}

CorpusStore::CorpusStore(std::uint64_t seed, TokenEstimator estimator)
    : seed_(seed), estimator_(std::move(estimator)) {}

void CorpusStore::append(Document doc) {
  if (doc.text.empty()) throw IngestError("document text is empty");
  if (by_id_.contains(doc.id)) throw IngestError("duplicate document id: " + doc.id);
  std::size_t index = docs_.size();
  by_id_.emplace(doc.id, index);
  by_source_[doc.source].push_back(index);
  docs_.push_back(std::move(doc));
}

std::size_t CorpusStore::add_text(std::string_view text, const std::string& source, std::size_t budget) {
  if (all_space(text)) return 0;
  auto segments = segment_text(text, budget, estimator_);
  for (auto& seg : segments) {
    Document doc;
    doc.source = source;
    doc.token_estimate = estimator_(seg);
    doc.text = std::move(seg);
    // Sequential ids; a suffix resolves clashes with ids from a loaded store.
    std::string base = source + "-" + std::to_string(docs_.size());
    doc.id = base;
    for (int k = 1; by_id_.contains(doc.id); ++k) doc.id = base + "." + std::to_string(k);
    append(std::move(doc));
  }
  return segments.size();
}

IngestReport CorpusStore::ingest(const std::filesystem::path& path, const std::string& source,
                                 std::size_t budget) {
  std::ifstream in(path);
  if (!in) throw IngestError("cannot open corpus input: " + path.string());
  return ingest(in, source, budget);
}

IngestReport CorpusStore::ingest(std::istream& in, const std::string& source, std::size_t budget) {
  IngestReport report;
  std::string line;
  while (std::getline(in, line)) {
    if (all_space(line)) continue;
    ++report.records;
    auto record = nlohmann::json::parse(line, nullptr, /*allow_exceptions=*/false);
    if (!record.is_object() || !record.contains("text") || !record["text"].is_string() ||
        (record.contains("source") && !record["source"].is_string())) {
      ++report.malformed;
      continue;
    }
    const auto& text = record["text"].get_ref<const std::string&>();
    if (all_space(text)) {
      ++report.empty;
      continue;
    }
    std::string tag = record.contains("source") ? record["source"].get<std::string>() : source;
    report.added += add_text(text, tag, budget);
  }
  return report;
}

void CorpusStore::set_source_mix(std::map<std::string, double> mix) {
  double total = 0.0;
  for (const auto& [name, weight] : mix) {
    if (!(weight >= 0.0 && weight <= 1.0))
      throw ConfigError("source mix weight for '" + name + "' must lie in [0, 1]");
    total += weight;
  }
  if (!mix.empty() && std::abs(total - 1.0) > 1e-9)
    throw ConfigError("source mix weights must sum to 1");
  mix_ = std::move(mix);
}

std::vector<Document> CorpusStore::sample(std::size_t n, std::uint64_t call_index) const {
  if (docs_.empty()) throw Error("cannot sample from an empty corpus");
  Rng rng = make_rng(mix_seed({seed_, call_index, 0xC0B905ULL}));
  std::vector<Document> out;
  out.reserve(n);
  if (mix_.empty()) {
    for (std::size_t i = 0; i < n; ++i) out.push_back(docs_[uniform_index(rng, docs_.size())]);
    return out;
  }

  std::vector<std::pair<double, const std::vector<std::size_t>*>> cumulative;
  double acc = 0.0;
  for (const auto& [name, weight] : mix_) {
    if (weight <= 0.0) continue;
    auto it = by_source_.find(name);
    if (it == by_source_.end())
      throw ConfigError("source mix names '" + name + "' but the corpus has no such documents");
    acc += weight;
    cumulative.emplace_back(acc, &it->second);
  }
  for (std::size_t i = 0; i < n; ++i) {
    double u = uniform01(rng) * acc;
    const std::vector<std::size_t>* pool = cumulative.back().second;
    for (const auto& [edge, members] : cumulative) {
      if (u < edge) {
        pool = members;
        break;
      }
    }
    out.push_back(docs_[(*pool)[uniform_index(rng, pool->size())]]);
  }
  return out;
}

void CorpusStore::save(const std::filesystem::path& path) const {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IngestError("cannot write corpus store: " + path.string());
  for (const auto& d : docs_) {
    nlohmann::json j = {{"id", d.id}, {"text", d.text}, {"source", d.source},
                        {"token_estimate", d.token_estimate}};
    out << j.dump() << '\n';
  }
  if (!out) throw IngestError("write failed: " + path.string());
}

CorpusStore CorpusStore::load(const std::filesystem::path& path, std::uint64_t seed) {
  std::ifstream in(path);
  if (!in) throw IngestError("cannot open corpus store: " + path.string());
  CorpusStore store(seed);
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (all_space(line)) continue;
    auto j = nlohmann::json::parse(line, nullptr, false);
    if (!j.is_object() || !j.contains("id") || !j["id"].is_string() || !j.contains("text") ||
        !j["text"].is_string() || !j.contains("source") || !j["source"].is_string() ||
        !j.contains("token_estimate") || !j["token_estimate"].is_number_unsigned())
      throw IngestError(path.string() + ":" + std::to_string(lineno) + ": malformed store record");
    Document d{j["id"].get<std::string>(), j["text"].get<std::string>(), j["source"].get<std::string>(),
               j["token_estimate"].get<std::size_t>()};
    store.append(std::move(d));
  }
  return store;
}

const Document* CorpusStore::find(std::string_view id) const {
  auto it = by_id_.find(std::string(id));
  return it == by_id_.end() ? nullptr : &docs_[it->second];
}

}  // namespace corpusplay
