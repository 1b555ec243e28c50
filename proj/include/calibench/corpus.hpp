#pragma once

#include <cstddef>
#include <filesystem>
#include <functional>
#include <map>
#include <string>
#include <string_view>
#include <vector>

namespace calibench {

enum class FileFormat { Csv, Jsonl };

FileFormat parse_file_format(std::string_view name);
const char* to_string(FileFormat format);

// Format implied by a file extension: ".jsonl"/".json" are JSONL, anything else CSV.
FileFormat format_from_extension(const std::filesystem::path& path);

// One (model, dataset, item) score with its binary label. Label 1 means
// positive (faithful); higher scores are evidence for the positive class.
struct ScoredRecord {
  std::string model_id;
  std::string dataset_id;
  std::string item_id;
  double score = 0.0;
  int label = 0;
};

// dataset_id -> domain_id. Iteration order of datasets() is insertion order.
class DomainRegistry {
 public:
  DomainRegistry() = default;

  // Throws DuplicateKey if the dataset is already mapped to a different domain.
  void add(const std::string& dataset_id, const std::string& domain_id);

  bool contains(const std::string& dataset_id) const;
  const std::string& domain_of(const std::string& dataset_id) const;

  const std::vector<std::string>& datasets() const { return datasets_; }
  std::vector<std::string> domains() const;
  std::size_t size() const { return datasets_.size(); }

 private:
  std::map<std::string, std::string> domain_by_dataset_;
  std::vector<std::string> datasets_;
};

DomainRegistry load_registry(const std::filesystem::path& path, FileFormat format);
DomainRegistry load_registry(const std::filesystem::path& path);

// The registry shipped for TRUE-shaped data. mnbm is placed in summarization.
DomainRegistry default_true_registry();

struct Slice {
  std::vector<double> scores;
  std::vector<int> labels;
};

// Validated, immutable collection of scored records. Safe to share across
// threads once built.
class BenchmarkCorpus {
 public:
  // Validates every invariant; throws Error on the first violation.
  static BenchmarkCorpus build(std::vector<ScoredRecord> records, DomainRegistry registry);

  const std::vector<ScoredRecord>& records() const { return records_; }
  const DomainRegistry& registry() const { return registry_; }
  const std::vector<std::string>& models() const { return models_; }
  const std::vector<std::string>& datasets() const { return datasets_; }

  bool has_model(const std::string& model) const;
  bool has_dataset(const std::string& dataset) const;
  bool covers(const std::string& model, const std::string& dataset) const;
  const std::string& domain_of(const std::string& dataset) const;

  // Number of items in a dataset (identical for every model covering it).
  std::size_t dataset_size(const std::string& dataset) const;

  // True when the (model, dataset) pair carries only one label class.
  bool is_degenerate(const std::string& model, const std::string& dataset) const;

 private:
  friend Slice slice(const BenchmarkCorpus&, const std::string&, const std::vector<std::string>&);

  BenchmarkCorpus() = default;

  std::vector<ScoredRecord> records_;
  DomainRegistry registry_;
  std::vector<std::string> models_;
  std::vector<std::string> datasets_;
  // (model, dataset) -> record indices sorted by item_id.
  std::map<std::pair<std::string, std::string>, std::vector<std::size_t>> index_;
  std::map<std::string, std::size_t> dataset_sizes_;
};

BenchmarkCorpus load_corpus(const std::filesystem::path& path, FileFormat format,
                            const std::filesystem::path& registry_path);

// Scores and labels for one model over the selected datasets, ordered by the
// corpus dataset order and then by item_id. Datasets the model does not cover
// contribute nothing.
Slice slice(const BenchmarkCorpus& corpus, const std::string& model,
            const std::vector<std::string>& datasets);

// Copy of the corpus with fn applied to every score of one model.
BenchmarkCorpus transform_scores(const BenchmarkCorpus& corpus, const std::string& model,
                                 const std::function<double(double)>& fn);

void write_corpus(const BenchmarkCorpus& corpus, const std::filesystem::path& path,
                  FileFormat format);
void write_registry(const DomainRegistry& registry, const std::filesystem::path& path,
                    FileFormat format);

}  // namespace calibench
