#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "textsculpt/composer.hpp"
#include "textsculpt/error.hpp"
#include "textsculpt/eval_metrics.hpp"
#include "textsculpt/model_clients.hpp"
#include "textsculpt/quality_gate.hpp"
#include "textsculpt/task_factory.hpp"

namespace textsculpt {

std::string tool_version();

// --- config ------------------------------------------------------------------

/// Key/value document with `[section]` headers; values are quoted strings,
/// integers, floats, booleans, or flat arrays of those. `#` starts a comment.
struct ConfigDoc {
  std::string text;      // verbatim source
  nlohmann::json values;  // {"section": {"key": value}}, top-level keys at the root
  std::filesystem::path base_dir;

  static ConfigDoc parse(const std::string& text, const std::filesystem::path& base_dir = {});
  static ConfigDoc load(const std::filesystem::path& path);

  /// Dotted lookup ("forge.count"); `fallback` when absent. Throws InvalidConfig on type mismatch.
  template <typename T>
  T get(const std::string& dotted, T fallback) const;
  bool has(const std::string& dotted) const;
  std::filesystem::path path(const std::string& dotted, const std::filesystem::path& fallback = {}) const;
};

struct ForgeConfig {
  std::uint64_t seed = 0;
  int count = 8;
  std::vector<TaskType> task_types{kAllTaskTypes, kAllTaskTypes + 4};
  int distraction_count = 2;
  int threads = 0;  // 0 = hardware concurrency
  int sample_attempts = 4;  // per-sample retries on a fresh stream before recording a failure
  std::filesystem::path fonts_dir;
  std::filesystem::path lexicon_path;
  std::filesystem::path templates_path;  // empty = built-in templates
  std::filesystem::path backgrounds_dir;  // empty = procedural backgrounds
  Size background_size{512, 384};
  IntRange text_words{1, 3};
  AugmentationPolicy policy;
  StyleRanges styles;
  int margin_px = 8;
  int placement_attempts = 64;
  TaskOptions task_options;
  ConfigDoc doc;

  /// Reads a config document. TEXTSCULPT_SEED, when set, overrides `seed`.
  static ForgeConfig from_doc(const ConfigDoc& doc);
  static ForgeConfig load(const std::filesystem::path& path);
  void validate() const;
  nlohmann::json snapshot() const;
};

struct BenchConfig {
  int per_type = 200;
  std::vector<TaskType> task_types{kAllTaskTypes, kAllTaskTypes + 4};

  static BenchConfig from_doc(const ConfigDoc& doc);
  static BenchConfig load(const std::filesystem::path& path);
};

/// Seed from TEXTSCULPT_SEED if set and numeric.
std::optional<std::uint64_t> seed_from_env();

// --- records -----------------------------------------------------------------

struct PairRecord {
  std::string sample_id;
  EditTask task;
  std::string source_path;  // relative to the manifest directory
  std::string target_path;
  std::vector<Rect> edited_regions;
  std::vector<Rect> distraction_regions;
  std::uint64_t seed = 0;
  std::string background_id;
  std::vector<TextBox> source_boxes;
  std::vector<TextBox> target_boxes;

  bool operator==(const PairRecord&) const = default;
};

struct BenchmarkItem {
  std::string item_id;
  std::string image_path;  // relative to the benchmark manifest directory
  std::vector<std::string> ocr_text;
  TaskType task_type = TaskType::Addition;
  std::string instruction;
  std::vector<std::string> edited_text_targets;
  int n_edit = 1;
  std::optional<std::vector<std::string>> expected_text_after;  // ground truth when known

  bool operator==(const BenchmarkItem&) const = default;
};

nlohmann::json to_json(const Rect& r);
nlohmann::json to_json(const TextBox& b);
nlohmann::json to_json(const EditOperation& op);
nlohmann::json to_json(const EditTask& t);
nlohmann::json to_json(const PairRecord& r);
nlohmann::json to_json(const BenchmarkItem& item);
nlohmann::json to_json(const WordAlignment& a);
nlohmann::json to_json(const SampleReport& r);
nlohmann::json to_json(const AggregateReport& a);

/// Parsers report the offending field via SchemaViolation; `line` prefixes messages.
PairRecord pair_record_from_json(const nlohmann::json& j, int line = 0);
BenchmarkItem benchmark_item_from_json(const nlohmann::json& j, int line = 0);
AggregateReport aggregate_from_json(const nlohmann::json& j);

/// One canonical (sorted-key, compact) JSON document per line. Throws DuplicateId.
void write_manifest(const std::filesystem::path& path, const std::vector<PairRecord>& records);
void write_benchmark(const std::filesystem::path& path, const std::vector<BenchmarkItem>& items);
/// Throws SchemaViolation(line, field), DuplicateId, Io.
std::vector<PairRecord> read_manifest(const std::filesystem::path& path);
std::vector<BenchmarkItem> read_benchmark(const std::filesystem::path& path);

/// Builds the benchmark item a forge pair implies (source image as input).
BenchmarkItem benchmark_item_from_pair(const PairRecord& pair, const std::string& image_path);

struct BalanceReport {
  bool balanced = false;
  std::map<TaskType, int> counts;
  std::string message;
};

/// Every category present with the same count (`per_type` when given).
BalanceReport validate_balance(const std::vector<BenchmarkItem>& items, std::optional<int> per_type = std::nullopt);

// --- orchestration -----------------------------------------------------------

/// Runs fn(0..n-1) on at most `threads` workers; the first exception is rethrown.
void parallel_for(int n, int threads, const std::function<void(int)>& fn);

/// Deterministic background for sample `index` (or a file from backgrounds_dir).
Image make_background(const ForgeConfig& cfg, Rng& rng, std::string* background_id = nullptr);

struct SampleFailure {
  int index = 0;
  std::string sample_id;
  std::string code;
  std::string message;
};

struct ForgeResult {
  std::vector<PairRecord> records;
  std::vector<SampleFailure> failures;
  std::filesystem::path out_dir;
  int exit_code = 0;  // 0 ok, 1 partial
};

std::string sample_id_for(int index);

/// Writes {out}/pairs/*.png, {out}/manifest.jsonl and {out}/run.json.
ForgeResult run_forge(const ForgeConfig& cfg, const std::filesystem::path& out_dir);

/// SHA-256 over (relative path, bytes) of every regular file, sorted by path.
std::string directory_hash(const std::filesystem::path& dir);

enum class OcrSource { Echo, Stub, Remote };
OcrSource parse_ocr_source(std::string_view s);

struct GateRecord {
  std::string sample_id;
  GateVerdict source;
  GateVerdict target;
  bool retained = false;
  std::string error;  // client failure; counts as not retained
};

struct GateRun {
  std::vector<GateRecord> records;
  int retained = 0;
};

/// Gates both images of every pair. Echo replays the manifest's ground-truth
/// boxes; stub/remote go through OcrClient. Writes {manifest dir}/gate.jsonl.
GateRun run_gate(const std::filesystem::path& manifest_path, OcrSource source,
                 const std::optional<ClientConfig>& ocr_cfg = std::nullopt);

/// bench.jsonl + images/{id}_src.png + fixtures/{id}_src.ocr.json from a forge run.
std::vector<BenchmarkItem> derive_benchmark(const std::filesystem::path& forge_dir, const std::filesystem::path& out_dir);

enum class EditorMode { Perfect, Identity };
EditorMode parse_editor_mode(std::string_view s);

/// Emits {id}.png for every forge pair, OCR and judge fixtures, and a
/// clients.json that points stub clients at them.
void simulate_editor(const std::filesystem::path& forge_dir, EditorMode mode, const std::filesystem::path& out_dir);

enum class ExpectedSource { GroundTruth, Judge };

struct EvalClients {
  ClientConfig ocr;
  ClientConfig judge;
  ExpectedSource expected = ExpectedSource::GroundTruth;
  std::optional<int> dilation_px;
  std::filesystem::path prompts_dir;  // empty = built-in prompts
  int threads = 0;

  static EvalClients load(const std::filesystem::path& path);
  nlohmann::json to_json() const;
};

struct SkippedItem {
  std::string item_id;
  std::string code;
  std::string message;
};

struct EvalRun {
  std::vector<SampleReport> reports;  // item order
  std::vector<SkippedItem> skipped;
  AggregateReport aggregate;
  nlohmann::json manifest;  // run.json document
  int exit_code = 0;
};

/// Throws MissingEditedImage when no item could be scored.
EvalRun run_eval(const std::filesystem::path& bench_path, const std::filesystem::path& edited_dir,
                 const EvalClients& clients, const std::filesystem::path& out_dir = {});

enum class ReportFormat { Table, Json };
std::string render_report(const std::filesystem::path& run_json, ReportFormat format);

}  // namespace textsculpt
