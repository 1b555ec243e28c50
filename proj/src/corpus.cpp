#include "calibench/corpus.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <set>
#include <sstream>
#include <tuple>
#include <unordered_map>
#include <unordered_set>

#include <json.hpp>

#include "calibench/errors.hpp"
#include "text_io.hpp"

namespace calibench {

using nlohmann::json;

FileFormat parse_file_format(std::string_view name) {
  if (name == "csv") return FileFormat::Csv;
  if (name == "jsonl") return FileFormat::Jsonl;
  throw Error(ErrorKind::InvalidSpec, "unknown file format '" + std::string(name) + "'");
}

const char* to_string(FileFormat format) {
  return format == FileFormat::Csv ? "csv" : "jsonl";
}

FileFormat format_from_extension(const std::filesystem::path& path) {
  auto ext = path.extension().string();
  for (char& c : ext) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return (ext == ".jsonl" || ext == ".json") ? FileFormat::Jsonl : FileFormat::Csv;
}

// ---------------------------------------------------------------------------
// DomainRegistry

void DomainRegistry::add(const std::string& dataset_id, const std::string& domain_id) {
  if (dataset_id.empty() || domain_id.empty()) {
    throw Error(ErrorKind::MalformedRow, "registry entry with empty dataset or domain");
  }
  auto it = domain_by_dataset_.find(dataset_id);
  if (it != domain_by_dataset_.end()) {
    if (it->second == domain_id) return;
    throw Error(ErrorKind::DuplicateKey, "dataset '" + dataset_id + "' registered to both '" +
                                             it->second + "' and '" + domain_id + "'");
  }
  domain_by_dataset_.emplace(dataset_id, domain_id);
  datasets_.push_back(dataset_id);
}

bool DomainRegistry::contains(const std::string& dataset_id) const {
  return domain_by_dataset_.count(dataset_id) != 0;
}

const std::string& DomainRegistry::domain_of(const std::string& dataset_id) const {
  auto it = domain_by_dataset_.find(dataset_id);
  if (it == domain_by_dataset_.end()) {
    throw Error(ErrorKind::UnregisteredDataset, "dataset '" + dataset_id + "' has no domain");
  }
  return it->second;
}

std::vector<std::string> DomainRegistry::domains() const {
  std::vector<std::string> out;
  for (const auto& d : datasets_) {
    const auto& dom = domain_by_dataset_.at(d);
    if (std::find(out.begin(), out.end(), dom) == out.end()) out.push_back(dom);
  }
  return out;
}

namespace {

std::string location(const std::filesystem::path& path, std::size_t line_no) {
  return path.filename().string() + ":" + std::to_string(line_no);
}

// Maps the header's column names to positions; throws if a required one is missing.
std::vector<std::size_t> resolve_columns(const std::vector<std::string>& header,
                                         const std::vector<std::string>& required,
                                         const std::filesystem::path& path) {
  std::vector<std::size_t> positions;
  for (const auto& name : required) {
    auto it = std::find_if(header.begin(), header.end(), [&](const std::string& h) {
      return detail::trim(h) == name;
    });
    if (it == header.end()) {
      throw Error(ErrorKind::MalformedRow,
                  location(path, 1) + ": header lacks required column '" + name + "'");
    }
    positions.push_back(static_cast<std::size_t>(it - header.begin()));
  }
  return positions;
}

int parse_label_text(std::string_view text, const std::string& where) {
  const auto t = detail::trim(text);
  if (t == "0") return 0;
  if (t == "1") return 1;
  throw Error(ErrorKind::MalformedRow, where + ": label must be 0 or 1, got '" + std::string(t) + "'");
}

double parse_score_text(std::string_view text, const std::string& where) {
  const auto value = detail::parse_double(text);
  if (!value || !std::isfinite(*value)) {
    throw Error(ErrorKind::MalformedRow,
                where + ": score must be a finite number, got '" + std::string(detail::trim(text)) + "'");
  }
  return *value;
}

std::string json_string_field(const json& obj, const char* key, const std::string& where) {
  auto it = obj.find(key);
  if (it == obj.end()) throw Error(ErrorKind::MalformedRow, where + ": missing field '" + key + "'");
  if (it->is_string()) return it->get<std::string>();
  if (it->is_number_integer()) return std::to_string(it->get<long long>());
  throw Error(ErrorKind::MalformedRow, where + ": field '" + key + "' must be a string");
}

std::vector<ScoredRecord> read_csv_records(const std::filesystem::path& path) {
  const auto lines = detail::read_lines(path);
  std::vector<ScoredRecord> records;
  if (lines.empty()) return records;
  const auto header = detail::split_csv_line(lines.front());
  if (!header) throw Error(ErrorKind::MalformedRow, location(path, 1) + ": malformed header");
  const auto cols = resolve_columns(*header, {"model", "dataset", "item", "score", "label"}, path);
  for (std::size_t i = 1; i < lines.size(); ++i) {
    if (detail::trim(lines[i]).empty()) continue;
    const auto where = location(path, i + 1);
    const auto fields = detail::split_csv_line(lines[i]);
    if (!fields || fields->size() != header->size()) {
      throw Error(ErrorKind::MalformedRow, where + ": expected " + std::to_string(header->size()) +
                                               " fields");
    }
    ScoredRecord r;
    r.model_id = std::string(detail::trim((*fields)[cols[0]]));
    r.dataset_id = std::string(detail::trim((*fields)[cols[1]]));
    r.item_id = std::string(detail::trim((*fields)[cols[2]]));
    r.score = parse_score_text((*fields)[cols[3]], where);
    r.label = parse_label_text((*fields)[cols[4]], where);
    if (r.model_id.empty() || r.dataset_id.empty() || r.item_id.empty()) {
      throw Error(ErrorKind::MalformedRow, where + ": empty model, dataset or item");
    }
    records.push_back(std::move(r));
  }
  return records;
}

std::vector<ScoredRecord> read_jsonl_records(const std::filesystem::path& path) {
  const auto lines = detail::read_lines(path);
  std::vector<ScoredRecord> records;
  for (std::size_t i = 0; i < lines.size(); ++i) {
    if (detail::trim(lines[i]).empty()) continue;
    const auto where = location(path, i + 1);
    json obj;
    try {
      obj = json::parse(lines[i]);
    } catch (const json::parse_error& e) {
      throw Error(ErrorKind::MalformedRow, where + ": invalid JSON (" + e.what() + ")");
    }
    if (!obj.is_object()) throw Error(ErrorKind::MalformedRow, where + ": expected a JSON object");
    ScoredRecord r;
    r.model_id = json_string_field(obj, "model", where);
    r.dataset_id = json_string_field(obj, "dataset", where);
    r.item_id = json_string_field(obj, "item", where);
    const auto score = obj.find("score");
    if (score == obj.end() || !score->is_number() || !std::isfinite(score->get<double>())) {
      throw Error(ErrorKind::MalformedRow, where + ": score must be a finite number");
    }
    r.score = score->get<double>();
    const auto label = obj.find("label");
    if (label != obj.end() && label->is_boolean()) {
      r.label = label->get<bool>() ? 1 : 0;
    } else if (label != obj.end() && label->is_number_integer() &&
               (label->get<long long>() == 0 || label->get<long long>() == 1)) {
      r.label = static_cast<int>(label->get<long long>());
    } else {
      throw Error(ErrorKind::MalformedRow,
                  where + ": label must be 0 or 1, got " + (label == obj.end() ? "nothing" : label->dump()));
    }
    records.push_back(std::move(r));
  }
  return records;
}

}  // namespace

DomainRegistry load_registry(const std::filesystem::path& path, FileFormat format) {
  DomainRegistry registry;
  const auto lines = detail::read_lines(path);
  if (format == FileFormat::Csv) {
    if (lines.empty()) return registry;
    const auto header = detail::split_csv_line(lines.front());
    if (!header) throw Error(ErrorKind::MalformedRow, location(path, 1) + ": malformed header");
    const auto cols = resolve_columns(*header, {"dataset", "domain"}, path);
    for (std::size_t i = 1; i < lines.size(); ++i) {
      if (detail::trim(lines[i]).empty()) continue;
      const auto fields = detail::split_csv_line(lines[i]);
      if (!fields || fields->size() != header->size()) {
        throw Error(ErrorKind::MalformedRow, location(path, i + 1) + ": malformed registry row");
      }
      registry.add(std::string(detail::trim((*fields)[cols[0]])),
                   std::string(detail::trim((*fields)[cols[1]])));
    }
  } else {
    for (std::size_t i = 0; i < lines.size(); ++i) {
      if (detail::trim(lines[i]).empty()) continue;
      const auto where = location(path, i + 1);
      json obj;
      try {
        obj = json::parse(lines[i]);
      } catch (const json::parse_error& e) {
        throw Error(ErrorKind::MalformedRow, where + ": invalid JSON (" + e.what() + ")");
      }
      registry.add(json_string_field(obj, "dataset", where), json_string_field(obj, "domain", where));
    }
  }
  return registry;
}

DomainRegistry load_registry(const std::filesystem::path& path) {
  return load_registry(path, format_from_extension(path));
}

DomainRegistry default_true_registry() {
  DomainRegistry r;
  for (const char* d : {"qags-c", "summeval", "frank", "qags-x", "mnbm"}) r.add(d, "summarization");
  for (const char* d : {"begin", "dialfact", "q2"}) r.add(d, "dialog");
  r.add("paws", "paraphrase");
  return r;
}

// ---------------------------------------------------------------------------
// BenchmarkCorpus

BenchmarkCorpus BenchmarkCorpus::build(std::vector<ScoredRecord> records, DomainRegistry registry) {
  if (records.empty()) throw Error(ErrorKind::EmptyCorpus, "no records");
  if (registry.size() == 0) throw Error(ErrorKind::EmptyCorpus, "registry defines no domain");

  BenchmarkCorpus corpus;
  std::unordered_set<std::string> seen_models;
  std::unordered_set<std::string> seen_datasets;
  std::set<std::tuple<std::string, std::string, std::string>> keys;

  for (std::size_t i = 0; i < records.size(); ++i) {
    const auto& r = records[i];
    const auto where = "record " + std::to_string(i + 1) + " (" + r.model_id + ", " + r.dataset_id +
                       ", " + r.item_id + ")";
    if (r.label != 0 && r.label != 1) {
      throw Error(ErrorKind::MalformedRow, where + ": label must be 0 or 1, got " + std::to_string(r.label));
    }
    if (!std::isfinite(r.score)) throw Error(ErrorKind::MalformedRow, where + ": score is not finite");
    if (!registry.contains(r.dataset_id)) {
      throw Error(ErrorKind::UnregisteredDataset, where + ": dataset '" + r.dataset_id + "' is not in the registry");
    }
    if (!keys.emplace(r.model_id, r.dataset_id, r.item_id).second) {
      throw Error(ErrorKind::DuplicateKey,
                  "(" + r.model_id + ", " + r.dataset_id + ", " + r.item_id + ") appears more than once");
    }
    if (seen_models.insert(r.model_id).second) corpus.models_.push_back(r.model_id);
    if (seen_datasets.insert(r.dataset_id).second) corpus.datasets_.push_back(r.dataset_id);
    corpus.index_[{r.model_id, r.dataset_id}].push_back(i);
  }

  for (auto& [key, indices] : corpus.index_) {
    std::sort(indices.begin(), indices.end(), [&](std::size_t a, std::size_t b) {
      return records[a].item_id < records[b].item_id;
    });
  }

  // Every model covering a dataset must score the same items with the same labels.
  for (const auto& dataset : corpus.datasets_) {
    const std::vector<std::size_t>* reference = nullptr;
    const std::string* reference_model = nullptr;
    for (const auto& model : corpus.models_) {
      auto it = corpus.index_.find({model, dataset});
      if (it == corpus.index_.end()) continue;
      if (!reference) {
        reference = &it->second;
        reference_model = &model;
        corpus.dataset_sizes_[dataset] = it->second.size();
        continue;
      }
      const auto& other = it->second;
      bool same = other.size() == reference->size();
      for (std::size_t k = 0; same && k < other.size(); ++k) {
        const auto& a = records[(*reference)[k]];
        const auto& b = records[other[k]];
        same = a.item_id == b.item_id && a.label == b.label;
      }
      if (!same) {
        throw Error(ErrorKind::InconsistentItems, "dataset '" + dataset + "': models '" + *reference_model +
                                                      "' and '" + model + "' disagree on items or labels");
      }
    }
  }

  corpus.records_ = std::move(records);
  corpus.registry_ = std::move(registry);
  return corpus;
}

bool BenchmarkCorpus::has_model(const std::string& model) const {
  return std::find(models_.begin(), models_.end(), model) != models_.end();
}

bool BenchmarkCorpus::has_dataset(const std::string& dataset) const {
  return dataset_sizes_.count(dataset) != 0;
}

bool BenchmarkCorpus::covers(const std::string& model, const std::string& dataset) const {
  return index_.count({model, dataset}) != 0;
}

const std::string& BenchmarkCorpus::domain_of(const std::string& dataset) const {
  if (!has_dataset(dataset)) throw Error(ErrorKind::UnknownDataset, "dataset '" + dataset + "'");
  return registry_.domain_of(dataset);
}

std::size_t BenchmarkCorpus::dataset_size(const std::string& dataset) const {
  auto it = dataset_sizes_.find(dataset);
  if (it == dataset_sizes_.end()) throw Error(ErrorKind::UnknownDataset, "dataset '" + dataset + "'");
  return it->second;
}

bool BenchmarkCorpus::is_degenerate(const std::string& model, const std::string& dataset) const {
  auto it = index_.find({model, dataset});
  if (it == index_.end()) return false;
  bool pos = false;
  bool neg = false;
  for (auto i : it->second) (records_[i].label == 1 ? pos : neg) = true;
  return !(pos && neg);
}

BenchmarkCorpus load_corpus(const std::filesystem::path& path, FileFormat format,
                            const std::filesystem::path& registry_path) {
  auto records = format == FileFormat::Csv ? read_csv_records(path) : read_jsonl_records(path);
  if (records.empty()) throw Error(ErrorKind::EmptyCorpus, "'" + path.string() + "' contains no records");
  return BenchmarkCorpus::build(std::move(records), load_registry(registry_path));
}

Slice slice(const BenchmarkCorpus& corpus, const std::string& model,
            const std::vector<std::string>& datasets) {
  if (!corpus.has_model(model)) throw Error(ErrorKind::UnknownModel, "model '" + model + "'");
  for (const auto& d : datasets) {
    if (!corpus.has_dataset(d)) throw Error(ErrorKind::UnknownDataset, "dataset '" + d + "'");
  }
  Slice out;
  for (const auto& d : corpus.datasets_) {
    if (std::find(datasets.begin(), datasets.end(), d) == datasets.end()) continue;
    auto it = corpus.index_.find({model, d});
    if (it == corpus.index_.end()) continue;
    for (auto i : it->second) {
      out.scores.push_back(corpus.records_[i].score);
      out.labels.push_back(corpus.records_[i].label);
    }
  }
  return out;
}

BenchmarkCorpus transform_scores(const BenchmarkCorpus& corpus, const std::string& model,
                                 const std::function<double(double)>& fn) {
  if (!corpus.has_model(model)) throw Error(ErrorKind::UnknownModel, "model '" + model + "'");
  auto records = corpus.records();
  for (auto& r : records) {
    if (r.model_id == model) r.score = fn(r.score);
  }
  return BenchmarkCorpus::build(std::move(records), corpus.registry());
}

void write_corpus(const BenchmarkCorpus& corpus, const std::filesystem::path& path, FileFormat format) {
  std::ostringstream out;
  if (format == FileFormat::Csv) {
    out << "model,dataset,item,score,label\n";
    for (const auto& r : corpus.records()) {
      out << detail::csv_escape(r.model_id) << ',' << detail::csv_escape(r.dataset_id) << ','
          << detail::csv_escape(r.item_id) << ',' << detail::format_double(r.score) << ',' << r.label << '\n';
    }
  } else {
    for (const auto& r : corpus.records()) {
      json obj = {{"model", r.model_id}, {"dataset", r.dataset_id}, {"item", r.item_id},
                  {"score", r.score}, {"label", r.label}};
      out << obj.dump() << '\n';
    }
  }
  detail::write_text_file(path, out.str());
}

void write_registry(const DomainRegistry& registry, const std::filesystem::path& path, FileFormat format) {
  std::ostringstream out;
  if (format == FileFormat::Csv) out << "dataset,domain\n";
  for (const auto& d : registry.datasets()) {
    if (format == FileFormat::Csv) {
      out << detail::csv_escape(d) << ',' << detail::csv_escape(registry.domain_of(d)) << '\n';
    } else {
      out << json{{"dataset", d}, {"domain", registry.domain_of(d)}}.dump() << '\n';
    }
  }
  detail::write_text_file(path, out.str());
}

}  // namespace calibench
