#include "hssc/data.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <random>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace hssc {

std::vector<std::string> tokenize(const std::string& raw) {
  std::string spaced;
  spaced.reserve(raw.size() * 2);
  for (unsigned char c : raw) {
    if (c < 128 && std::ispunct(c)) {
      spaced.push_back(' ');
      spaced.push_back(static_cast<char>(c));
      spaced.push_back(' ');
    } else {
      spaced.push_back(static_cast<char>(c < 128 ? std::tolower(c) : c));
    }
  }
  std::vector<std::string> tokens;
  std::istringstream in(spaced);
  std::string tok;
  while (in >> tok) tokens.push_back(tok);
  return tokens;
}

// ---------------------------------------------------------------------------
// Vocabulary

namespace {
const char* kReservedTokens[] = {"<pad>", "<unk>", "<bos>", "<eos>"};
}

Vocabulary::Vocabulary() {
  for (int i = 0; i < kReserved; ++i) {
    id_to_token_.emplace_back(kReservedTokens[i]);
    token_to_id_.emplace(kReservedTokens[i], i);
  }
}

Vocabulary Vocabulary::build(const std::vector<ReviewExample>& train, std::size_t cap) {
  if (train.empty()) throw std::runtime_error("build_vocab: empty training corpus");

  struct Entry {
    std::size_t count = 0;
    std::size_t first_seen = 0;
  };
  std::unordered_map<std::string, Entry> counts;
  std::vector<const std::string*> order;  // tokens in first-occurrence order
  std::size_t tick = 0;
  auto feed = [&](const std::vector<std::string>& tokens) {
    for (const auto& t : tokens) {
      auto [it, inserted] = counts.try_emplace(t);
      if (inserted) {
        it->second.first_seen = tick++;
        order.push_back(&it->first);
      }
      ++it->second.count;
    }
  };
  for (const auto& ex : train) {
    feed(ex.text);
    feed(ex.summary);
  }

  std::vector<const std::string*> ranked = order;
  std::stable_sort(ranked.begin(), ranked.end(), [&](const std::string* a, const std::string* b) {
    const auto& ea = counts[*a];
    const auto& eb = counts[*b];
    if (ea.count != eb.count) return ea.count > eb.count;
    return ea.first_seen < eb.first_seen;
  });
  if (ranked.size() > cap) ranked.resize(cap);

  Vocabulary v;
  for (const std::string* t : ranked) {
    v.token_to_id_.emplace(*t, static_cast<int>(v.id_to_token_.size()));
    v.id_to_token_.push_back(*t);
  }
  return v;
}

int Vocabulary::id(const std::string& token) const {
  auto it = token_to_id_.find(token);
  return it == token_to_id_.end() ? kUnk : it->second;
}

const std::string& Vocabulary::token(int id) const {
  if (id < 0 || id >= size())
    throw std::out_of_range("vocabulary id " + std::to_string(id) + " out of range (size " +
                            std::to_string(size()) + ")");
  return id_to_token_[static_cast<std::size_t>(id)];
}

std::vector<int> Vocabulary::encode(const std::vector<std::string>& tokens) const {
  std::vector<int> ids;
  ids.reserve(tokens.size());
  for (const auto& t : tokens) ids.push_back(id(t));
  return ids;
}

std::vector<std::string> Vocabulary::decode(const std::vector<int>& ids) const {
  std::vector<std::string> tokens;
  tokens.reserve(ids.size());
  for (int i : ids) tokens.push_back(token(i));
  return tokens;
}

void Vocabulary::save(const std::string& path) const {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write vocabulary file: " + path);
  for (const auto& t : id_to_token_) out << t << '\n';
}

Vocabulary Vocabulary::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read vocabulary file: " + path);
  Vocabulary v;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (lineno <= kReserved) {
      if (line != kReservedTokens[lineno - 1])
        throw std::runtime_error("vocabulary file " + path + " line " + std::to_string(lineno) +
                                 ": expected reserved token " +
                                 std::string(kReservedTokens[lineno - 1]) + ", got '" + line + "'");
      continue;
    }
    if (line.empty())
      throw std::runtime_error("vocabulary file " + path + " line " + std::to_string(lineno) +
                               ": empty token");
    v.token_to_id_.emplace(line, static_cast<int>(v.id_to_token_.size()));
    v.id_to_token_.push_back(line);
  }
  if (lineno < kReserved)
    throw std::runtime_error("vocabulary file " + path + ": missing reserved entries");
  return v;
}

// ---------------------------------------------------------------------------
// split

SplitResult split(const std::vector<ReviewExample>& corpus, std::size_t split_size) {
  if (split_size == 0) throw std::runtime_error("split: split_size must be positive");
  if (corpus.size() <= 2 * split_size)
    throw std::runtime_error("split: corpus of " + std::to_string(corpus.size()) +
                             " examples is too small for two splits of " +
                             std::to_string(split_size));
  SplitResult r;
  r.validation.assign(corpus.begin(), corpus.begin() + static_cast<std::ptrdiff_t>(split_size));
  r.test.assign(corpus.begin() + static_cast<std::ptrdiff_t>(split_size),
                corpus.begin() + static_cast<std::ptrdiff_t>(2 * split_size));
  r.train.assign(corpus.begin() + static_cast<std::ptrdiff_t>(2 * split_size), corpus.end());
  return r;
}

// ---------------------------------------------------------------------------
// batching

Batch make_batch(const std::vector<ReviewExample>& examples, const Vocabulary& vocab) {
  Batch b;
  b.size = static_cast<int>(examples.size());
  for (const auto& ex : examples) {
    b.max_source_len = std::max(b.max_source_len, static_cast<int>(ex.text.size()));
    b.max_summary_len = std::max(b.max_summary_len, static_cast<int>(ex.summary.size()));
  }
  for (const auto& ex : examples) {
    std::vector<int> src = vocab.encode(ex.text);
    b.source_len.push_back(static_cast<int>(src.size()));
    src.resize(static_cast<std::size_t>(b.max_source_len), Vocabulary::kPad);
    b.source.push_back(std::move(src));

    std::vector<int> sum_ids = vocab.encode(ex.summary);
    b.summary_len.push_back(static_cast<int>(sum_ids.size()));

    std::vector<int> input;
    input.reserve(static_cast<std::size_t>(b.max_summary_len) + 1);
    input.push_back(Vocabulary::kBos);
    input.insert(input.end(), sum_ids.begin(), sum_ids.end());
    input.resize(static_cast<std::size_t>(b.max_summary_len) + 1, Vocabulary::kPad);
    b.summary_input.push_back(std::move(input));

    std::vector<int> target = sum_ids;
    target.push_back(Vocabulary::kEos);
    target.resize(static_cast<std::size_t>(b.max_summary_len) + 1, Vocabulary::kPad);
    b.summary_target.push_back(std::move(target));

    b.label.push_back(ex.label - 1);
  }
  return b;
}

std::vector<Batch> make_batches(const std::vector<ReviewExample>& examples,
                                const Vocabulary& vocab, int batch_size,
                                std::uint64_t shuffle_seed) {
  if (batch_size < 1) throw std::invalid_argument("make_batches: batch_size must be >= 1");
  std::vector<std::size_t> idx(examples.size());
  for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
  std::mt19937_64 rng(shuffle_seed);
  std::shuffle(idx.begin(), idx.end(), rng);

  std::vector<Batch> batches;
  for (std::size_t start = 0; start < idx.size(); start += static_cast<std::size_t>(batch_size)) {
    const std::size_t end = std::min(idx.size(), start + static_cast<std::size_t>(batch_size));
    std::vector<ReviewExample> group;
    group.reserve(end - start);
    for (std::size_t i = start; i < end; ++i) group.push_back(examples[idx[i]]);
    batches.push_back(make_batch(group, vocab));
  }
  return batches;
}

// ---------------------------------------------------------------------------
// corpus files

std::vector<ReviewExample> load_corpus(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read corpus file: " + path);
  std::vector<ReviewExample> corpus;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    auto fail = [&](const std::string& why) {
      throw std::runtime_error("corpus file " + path + " line " + std::to_string(lineno) + ": " +
                               why);
    };
    nlohmann::json j = nlohmann::json::parse(line, nullptr, false);
    if (j.is_discarded() || !j.is_object()) fail("not a JSON object");
    if (!j.contains("text") || !j["text"].is_string()) fail("missing string field \"text\"");
    if (!j.contains("summary") || !j["summary"].is_string())
      fail("missing string field \"summary\"");
    if (!j.contains("label") || !j["label"].is_number_integer())
      fail("missing integer field \"label\"");
    ReviewExample ex;
    ex.text = tokenize(j["text"].get<std::string>());
    ex.summary = tokenize(j["summary"].get<std::string>());
    ex.label = j["label"].get<int>();
    if (ex.label < 1 || ex.label > 5) fail("label must be in 1..5");
    if (ex.text.empty()) fail("text tokenizes to nothing");
    if (ex.summary.empty()) fail("summary tokenizes to nothing");
    corpus.push_back(std::move(ex));
  }
  return corpus;
}

void save_corpus(const std::vector<ReviewExample>& corpus, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write corpus file: " + path);
  for (const auto& ex : corpus) {
    auto join = [](const std::vector<std::string>& tokens) {
      std::string s;
      for (std::size_t i = 0; i < tokens.size(); ++i) {
        if (i) s.push_back(' ');
        s += tokens[i];
      }
      return s;
    };
    nlohmann::json j{{"text", join(ex.text)}, {"summary", join(ex.summary)}, {"label", ex.label}};
    out << j.dump() << '\n';
  }
}

}  // namespace hssc
