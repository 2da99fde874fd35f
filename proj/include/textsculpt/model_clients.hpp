#pragma once

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <semaphore>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "textsculpt/eval_metrics.hpp"
#include "textsculpt/quality_gate.hpp"

namespace textsculpt {

enum class Backend { Stub, Remote };
std::string_view to_string(Backend b);
Backend parse_backend(std::string_view s);

enum class ImageEncoding { Base64, Multipart };

struct ClientConfig {
  Backend backend = Backend::Stub;
  std::string endpoint;  // remote: http(s)://host[:port]/path
  std::filesystem::path fixtures_dir;
  double timeout_s = 30.0;
  int max_retries = 2;
  int max_in_flight = 4;
  ImageEncoding image_encoding = ImageEncoding::Base64;

  /// Throws InvalidConfig: stub needs fixtures_dir, remote needs endpoint.
  void validate() const;

  static ClientConfig from_json(const nlohmann::json& j, const std::filesystem::path& base_dir = {});
  nlohmann::json to_json() const;
};

/// A transport failure worth retrying (connection refused, 5xx, timeout).
class TransientError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct HttpRequest {
  std::string endpoint;
  std::string content_type;
  std::string body;
  double timeout_s = 30.0;
};

/// Returns the response body; throws TransientError on retryable failure.
using Transport = std::function<std::string(const HttpRequest&)>;
Transport http_transport();

using Sleeper = std::function<void(std::chrono::duration<double>)>;

struct RetryStats {
  int attempts = 0;
  std::vector<double> delays_s;
};

/// Exponential backoff with full jitter: before retry k (1-based) sleep
/// uniform(0, min(timeout_s, base_delay_s · 2^(k−1))).
class Retrier {
 public:
  Retrier(int max_retries, double timeout_s, double base_delay_s = 0.25, Sleeper sleeper = {},
          std::uint64_t jitter_seed = 0x5eed);

  /// Runs `attempt` until it succeeds. TransientError is retried up to
  /// max_retries times, then surfaces as RemoteUnavailable. A textsculpt::Error
  /// with code MalformedResponse is retried too and rethrown as is.
  std::string run(const std::function<std::string()>& attempt, RetryStats* stats = nullptr) const;

 private:
  int max_retries_;
  double timeout_s_;
  double base_delay_s_;
  Sleeper sleeper_;
  std::uint64_t jitter_seed_;
};

std::string base64_encode(std::span<const std::uint8_t> bytes);
std::vector<std::uint8_t> base64_decode(const std::string& text);
std::string sha256_hex(std::span<const std::uint8_t> bytes);
inline std::string sha256_hex(const std::string& s) {
  return sha256_hex(std::span<const std::uint8_t>(reinterpret_cast<const std::uint8_t*>(s.data()), s.size()));
}
std::string sha256_file(const std::filesystem::path& path);

/// Versioned prompt documents, `{name}.v{N}.txt`, keyed by `{name}.v{N}`.
class PromptSet {
 public:
  static PromptSet load(const std::filesystem::path& directory);
  static PromptSet builtin();

  /// Latest version of `name`. Throws MissingTemplate.
  const std::string& text(const std::string& name) const;
  std::string key(const std::string& name) const;
  /// `{name}.v{N}` → hex SHA-256 of the document bytes.
  std::map<std::string, std::string> hashes() const;

 private:
  struct Doc {
    int version = 0;
    std::string text;
  };
  std::map<std::string, Doc> docs_;
};

/// Parses an OCR payload (a list of {rect:[x,y,w,h], text, confidence}, or an
/// object with that list under "boxes"), checking every rect against
/// `image_size`. Throws MalformedResponse.
std::vector<TextBox> parse_ocr_payload(const nlohmann::json& payload, Size image_size);
nlohmann::json ocr_payload(const std::vector<TextBox>& boxes);

class OcrClient {
 public:
  explicit OcrClient(ClientConfig cfg, Transport transport = {}, Sleeper sleeper = {});

  /// Stub reads `{image_stem}.ocr.json` from fixtures_dir. Throws
  /// FixtureMissing, RemoteUnavailable, MalformedResponse.
  OcrResult detect_text(const std::filesystem::path& image) const;

  const ClientConfig& config() const { return cfg_; }

 private:
  ClientConfig cfg_;
  Transport transport_;
  Retrier retrier_;
  std::shared_ptr<std::counting_semaphore<>> slots_;
};

enum class JudgeMode { InferExpectedText, VisualQuality };
std::string_view to_string(JudgeMode m);
JudgeMode parse_judge_mode(std::string_view s);

struct JudgeRequest {
  std::string sample_id;
  std::filesystem::path source_image;
  std::filesystem::path edited_image;
  std::string instruction;
  JudgeMode mode = JudgeMode::VisualQuality;
};

struct JudgeResponse {
  std::optional<std::string> expected_full_text;
  std::optional<VisualQualityJudgment> judgment;
  std::string raw;
};

/// Strict schema check for one mode: {"expected": string} or three booleans
/// under "location", "style", "physical". Throws MalformedResponse.
JudgeResponse parse_judge_payload(const nlohmann::json& payload, JudgeMode mode, std::string raw);

/// Remote judge output: the body itself, or a string under "content"/"output",
/// must be JSON satisfying the schema. Prose is rejected.
JudgeResponse parse_judge_transcript(const std::string& body, JudgeMode mode);

class JudgeClient {
 public:
  JudgeClient(ClientConfig cfg, PromptSet prompts, Transport transport = {}, Sleeper sleeper = {});

  /// Stub reads `{sample_id}.judge.json`. Throws FixtureMissing,
  /// RemoteUnavailable, MalformedResponse.
  JudgeResponse judge(const JudgeRequest& request) const;

  const ClientConfig& config() const { return cfg_; }
  const PromptSet& prompts() const { return prompts_; }

  static std::string prompt_name(JudgeMode m);

 private:
  ClientConfig cfg_;
  PromptSet prompts_;
  Transport transport_;
  Retrier retrier_;
  std::shared_ptr<std::counting_semaphore<>> slots_;
};

/// Stub: `captions.json` in fixtures_dir maps caption → rewrite.
std::string rewrite_caption(const std::string& caption, const ClientConfig& cfg, const Transport& transport = {});

/// Stub: `images.json` maps prompt → image path (relative to fixtures_dir),
/// returned unchanged. Remote: the returned base64 PNG is written under `out_dir`.
std::filesystem::path generate_image(const std::string& prompt, const ClientConfig& cfg,
                                     const std::filesystem::path& out_dir = {}, const Transport& transport = {});

}  // namespace textsculpt
