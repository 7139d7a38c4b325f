#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

namespace hssc {

/// One (review text, summary, sentiment label) triple. Labels are the raw
/// 1..5 ratings; they are shifted to 0-based only inside batches.
struct ReviewExample {
  std::vector<std::string> text;
  std::vector<std::string> summary;
  int label = 0;
};

/// Lowercases, splits punctuation characters into standalone tokens, then
/// splits on whitespace. Deterministic; bytes outside ASCII pass through.
std::vector<std::string> tokenize(const std::string& raw);

/// Bidirectional token<->id map shared by source texts and summaries.
/// Ids 0..3 are reserved for PAD, UNK, BOS, EOS, in that order.
class Vocabulary {
 public:
  static constexpr int kPad = 0;
  static constexpr int kUnk = 1;
  static constexpr int kBos = 2;
  static constexpr int kEos = 3;
  static constexpr int kReserved = 4;

  /// Keeps the `cap` most frequent training-set tokens; frequency ties break
  /// by first occurrence. Everything else maps to UNK.
  static Vocabulary build(const std::vector<ReviewExample>& train, std::size_t cap);

  int size() const { return static_cast<int>(id_to_token_.size()); }
  int id(const std::string& token) const;  // UNK for out-of-vocabulary
  const std::string& token(int id) const;
  bool contains(const std::string& token) const { return token_to_id_.count(token) > 0; }

  std::vector<int> encode(const std::vector<std::string>& tokens) const;
  std::vector<std::string> decode(const std::vector<int>& ids) const;

  void save(const std::string& path) const;
  static Vocabulary load(const std::string& path);

 private:
  Vocabulary();
  std::unordered_map<std::string, int> token_to_id_;
  std::vector<std::string> id_to_token_;
};

struct SplitResult {
  std::vector<ReviewExample> validation;
  std::vector<ReviewExample> test;
  std::vector<ReviewExample> train;
};

/// Prefix split in corpus order: first `split_size` examples for validation,
/// the next `split_size` for test, the rest for training.
SplitResult split(const std::vector<ReviewExample>& corpus, std::size_t split_size);

/// Padded id matrices for a group of examples. Source rows carry no
/// sentinels; summary input rows are BOS-prefixed and summary target rows
/// EOS-suffixed. Positions past the true length hold PAD and contribute
/// nothing to any loss.
struct Batch {
  int size = 0;
  int max_source_len = 0;
  int max_summary_len = 0;  // gold summary token count, before BOS/EOS
  std::vector<std::vector<int>> source;          // [size][max_source_len]
  std::vector<int> source_len;
  std::vector<std::vector<int>> summary_input;   // [size][max_summary_len + 1], BOS first
  std::vector<std::vector<int>> summary_target;  // [size][max_summary_len + 1], EOS last
  std::vector<int> summary_len;
  std::vector<int> label;  // 0-based
};

Batch make_batch(const std::vector<ReviewExample>& examples, const Vocabulary& vocab);

/// Shuffles with a seeded generator and chunks into batches; the final short
/// batch is retained.
std::vector<Batch> make_batches(const std::vector<ReviewExample>& examples,
                                const Vocabulary& vocab, int batch_size,
                                std::uint64_t shuffle_seed);

/// Line-delimited corpus file: one JSON object per line with string fields
/// "text" and "summary" and integer field "label" in 1..5. Malformed lines
/// are reported with their line number. Records whose text or summary
/// tokenizes to nothing are rejected the same way.
std::vector<ReviewExample> load_corpus(const std::string& path);
void save_corpus(const std::vector<ReviewExample>& corpus, const std::string& path);

}  // namespace hssc
