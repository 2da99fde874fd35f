#include "textsculpt/model_clients.hpp"

#include <openssl/evp.h>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <regex>
#include <sstream>
#include <thread>

#define CPPHTTPLIB_OPENSSL_SUPPORT
#include <httplib.h>

#include "textsculpt/image.hpp"
#include "textsculpt/error.hpp"
#include "textsculpt/rng.hpp"

namespace textsculpt {

using nlohmann::json;
namespace fs = std::filesystem;

std::string_view to_string(Backend b) { return b == Backend::Stub ? "stub" : "remote"; }

Backend parse_backend(std::string_view s) {
  if (s == "stub") return Backend::Stub;
  if (s == "remote") return Backend::Remote;
  throw Error(ErrorCode::InvalidConfig, "unknown backend '" + std::string(s) + "'");
}

void ClientConfig::validate() const {
  if (backend == Backend::Stub && fixtures_dir.empty())
    throw Error(ErrorCode::InvalidConfig, "stub backend requires fixtures_dir");
  if (backend == Backend::Remote && endpoint.empty())
    throw Error(ErrorCode::InvalidConfig, "remote backend requires endpoint");
  if (!(timeout_s > 0)) throw Error(ErrorCode::InvalidConfig, "timeout_s must be positive");
  if (max_retries < 0) throw Error(ErrorCode::InvalidConfig, "max_retries must be >= 0");
  if (max_in_flight < 1) throw Error(ErrorCode::InvalidConfig, "max_in_flight must be >= 1");
}

ClientConfig ClientConfig::from_json(const json& j, const fs::path& base_dir) {
  if (!j.is_object()) throw Error(ErrorCode::InvalidConfig, "client config must be an object");
  ClientConfig c;
  try {
    c.backend = parse_backend(j.value("backend", std::string("stub")));
    c.endpoint = j.value("endpoint", std::string());
    if (j.contains("fixtures_dir")) {
      fs::path p = j.at("fixtures_dir").get<std::string>();
      c.fixtures_dir = p.is_relative() && !base_dir.empty() ? base_dir / p : p;
    }
    c.timeout_s = j.value("timeout_s", c.timeout_s);
    c.max_retries = j.value("max_retries", c.max_retries);
    c.max_in_flight = j.value("max_in_flight", c.max_in_flight);
    const auto enc = j.value("image_encoding", std::string("base64"));
    if (enc == "base64")
      c.image_encoding = ImageEncoding::Base64;
    else if (enc == "multipart")
      c.image_encoding = ImageEncoding::Multipart;
    else
      throw Error(ErrorCode::InvalidConfig, "unknown image_encoding '" + enc + "'");
  } catch (const json::exception& e) {
    throw Error(ErrorCode::InvalidConfig, e.what());
  }
  c.validate();
  return c;
}

json ClientConfig::to_json() const {
  json j;
  j["backend"] = std::string(to_string(backend));
  if (!endpoint.empty()) j["endpoint"] = endpoint;
  if (!fixtures_dir.empty()) j["fixtures_dir"] = fixtures_dir.generic_string();
  j["timeout_s"] = timeout_s;
  j["max_retries"] = max_retries;
  j["max_in_flight"] = max_in_flight;
  j["image_encoding"] = image_encoding == ImageEncoding::Base64 ? "base64" : "multipart";
  return j;
}

// --- transport -------------------------------------------------------------

Transport http_transport() {
  return [](const HttpRequest& req) -> std::string {
    static const std::regex url_re(R"(^(https?://[^/]+)(/.*)?$)");
    std::smatch m;
    if (!std::regex_match(req.endpoint, m, url_re))
      throw Error(ErrorCode::InvalidConfig, "bad endpoint '" + req.endpoint + "'");
    const std::string path = m[2].matched ? m[2].str() : "/";
    httplib::Client cli(m[1].str());
    const auto secs = std::chrono::duration<double>(req.timeout_s);
    cli.set_connection_timeout(std::chrono::duration_cast<std::chrono::microseconds>(secs));
    cli.set_read_timeout(std::chrono::duration_cast<std::chrono::microseconds>(secs));
    cli.set_write_timeout(std::chrono::duration_cast<std::chrono::microseconds>(secs));
    auto res = cli.Post(path, req.body, req.content_type);
    if (!res) throw TransientError("request failed: " + httplib::to_string(res.error()));
    if (res->status >= 500 || res->status == 429) throw TransientError("HTTP " + std::to_string(res->status));
    if (res->status >= 400)
      throw Error(ErrorCode::RemoteUnavailable, "HTTP " + std::to_string(res->status) + " from " + req.endpoint);
    return res->body;
  };
}

Retrier::Retrier(int max_retries, double timeout_s, double base_delay_s, Sleeper sleeper, std::uint64_t jitter_seed)
    : max_retries_(max_retries),
      timeout_s_(timeout_s),
      base_delay_s_(base_delay_s),
      sleeper_(sleeper ? std::move(sleeper) : Sleeper([](std::chrono::duration<double> d) {
        std::this_thread::sleep_for(d);
      })),
      jitter_seed_(jitter_seed) {}

std::string Retrier::run(const std::function<std::string()>& attempt, RetryStats* stats) const {
  Rng jitter(jitter_seed_);
  std::string last;
  for (int k = 0;; ++k) {
    if (stats) ++stats->attempts;
    try {
      return attempt();
    } catch (const TransientError& e) {
      last = e.what();
    } catch (const Error& e) {
      if (e.code() != ErrorCode::MalformedResponse) throw;
      if (k >= max_retries_) throw;
      last = e.what();
    }
    if (k >= max_retries_) {
      throw Error(ErrorCode::RemoteUnavailable,
                  "giving up after " + std::to_string(k + 1) + " attempt(s): " + last);
    }
    const double cap = std::min(timeout_s_, base_delay_s_ * std::ldexp(1.0, k));
    const double d = jitter.uniform(0.0, cap);
    if (stats) stats->delays_s.push_back(d);
    sleeper_(std::chrono::duration<double>(d));
  }
}

// --- encoding and hashing --------------------------------------------------

std::string base64_encode(std::span<const std::uint8_t> bytes) {
  std::string out(4 * ((bytes.size() + 2) / 3), '\0');
  const int n = EVP_EncodeBlock(reinterpret_cast<unsigned char*>(out.data()), bytes.data(),
                                static_cast<int>(bytes.size()));
  out.resize(static_cast<std::size_t>(n));
  return out;
}

std::vector<std::uint8_t> base64_decode(const std::string& text) {
  if (text.size() % 4 != 0) throw Error(ErrorCode::MalformedResponse, "base64 length not a multiple of 4");
  std::vector<std::uint8_t> out(text.size() / 4 * 3);
  const int n = EVP_DecodeBlock(out.data(), reinterpret_cast<const unsigned char*>(text.data()),
                                static_cast<int>(text.size()));
  if (n < 0) throw Error(ErrorCode::MalformedResponse, "invalid base64");
  std::size_t pad = 0;
  if (!text.empty() && text.back() == '=') ++pad;
  if (text.size() > 1 && text[text.size() - 2] == '=') ++pad;
  out.resize(static_cast<std::size_t>(n) - pad);
  return out;
}

std::string sha256_hex(std::span<const std::uint8_t> bytes) {
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), md, &len, EVP_sha256(), nullptr) != 1)
    throw Error(ErrorCode::Io, "sha256 failed");
  static const char* hex = "0123456789abcdef";
  std::string s;
  s.reserve(len * 2);
  for (unsigned i = 0; i < len; ++i) {
    s.push_back(hex[md[i] >> 4]);
    s.push_back(hex[md[i] & 15]);
  }
  return s;
}

namespace {

std::string read_file(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw Error(ErrorCode::Io, "cannot open " + p.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::vector<std::uint8_t> read_bytes(const fs::path& p) {
  const auto s = read_file(p);
  return {s.begin(), s.end()};
}

json parse_json_file(const fs::path& p, ErrorCode on_error) {
  const auto text = read_file(p);
  try {
    return json::parse(text);
  } catch (const json::exception& e) {
    throw Error(on_error, p.string() + ": " + e.what());
  }
}

}  // namespace

std::string sha256_file(const fs::path& path) { return sha256_hex(read_bytes(path)); }

// --- prompts ---------------------------------------------------------------

PromptSet PromptSet::load(const fs::path& directory) {
  static const std::regex name_re(R"(^(.+)\.v([0-9]+)\.txt$)");
  if (!fs::is_directory(directory)) throw Error(ErrorCode::Io, "prompt directory not found: " + directory.string());
  PromptSet set;
  std::vector<fs::path> files;
  for (const auto& e : fs::directory_iterator(directory))
    if (e.is_regular_file()) files.push_back(e.path());
  std::sort(files.begin(), files.end());
  for (const auto& f : files) {
    std::smatch m;
    const auto fname = f.filename().string();
    if (!std::regex_match(fname, m, name_re)) continue;
    const int v = std::stoi(m[2].str());
    auto& doc = set.docs_[m[1].str()];
    if (v > doc.version) doc = Doc{v, read_file(f)};
  }
  return set;
}

PromptSet PromptSet::builtin() {
  PromptSet set;
  set.docs_["judge_visual_quality"] = Doc{
      1,
      "You compare a source image with an edited image produced for the instruction below.\n"
      "Instruction: {instruction}\n"
      "Answer three yes/no questions about the edited text only:\n"
      "location: is the edited text at the position the instruction implies?\n"
      "style: does it match the font, color and size of the surrounding text?\n"
      "physical: does it follow the surface, perspective and lighting of the scene?\n"
      "Reply with JSON only: {\"location\": true|false, \"style\": true|false, \"physical\": true|false}\n"};
  set.docs_["judge_infer_expected_text"] = Doc{
      1,
      "You see a source image and an editing instruction.\n"
      "Instruction: {instruction}\n"
      "Write the complete text that should be visible in the image after the edit, in reading order.\n"
      "Reply with JSON only: {\"expected\": \"...\"}\n"};
  set.docs_["caption_rewrite"] = Doc{1,
                                     "Rewrite the caption below so that every piece of visible text is quoted "
                                     "verbatim and the scene is described concisely.\nCaption: {caption}\n"};
  return set;
}

const std::string& PromptSet::text(const std::string& name) const {
  auto it = docs_.find(name);
  if (it == docs_.end()) throw Error(ErrorCode::MissingTemplate, "no prompt named '" + name + "'");
  return it->second.text;
}

std::string PromptSet::key(const std::string& name) const {
  auto it = docs_.find(name);
  if (it == docs_.end()) throw Error(ErrorCode::MissingTemplate, "no prompt named '" + name + "'");
  return name + ".v" + std::to_string(it->second.version);
}

std::map<std::string, std::string> PromptSet::hashes() const {
  std::map<std::string, std::string> out;
  for (const auto& [name, doc] : docs_) out[name + ".v" + std::to_string(doc.version)] = sha256_hex(doc.text);
  return out;
}

namespace {

std::string substitute(std::string text, const std::string& key, const std::string& value) {
  const std::string needle = "{" + key + "}";
  for (std::size_t pos = 0; (pos = text.find(needle, pos)) != std::string::npos; pos += value.size())
    text.replace(pos, needle.size(), value);
  return text;
}

class SlotGuard {
 public:
  explicit SlotGuard(std::counting_semaphore<>& s) : s_(s) { s_.acquire(); }
  ~SlotGuard() { s_.release(); }
  SlotGuard(const SlotGuard&) = delete;
  SlotGuard& operator=(const SlotGuard&) = delete;

 private:
  std::counting_semaphore<>& s_;
};

std::string multipart_body(const std::string& boundary, const json& fields,
                           const std::vector<std::pair<std::string, std::string>>& files) {
  std::string b;
  for (const auto& [k, v] : fields.items()) {
    b += "--" + boundary + "\r\nContent-Disposition: form-data; name=\"" + k + "\"\r\n\r\n";
    b += v.is_string() ? v.get<std::string>() : v.dump();
    b += "\r\n";
  }
  for (const auto& [name, bytes] : files) {
    b += "--" + boundary + "\r\nContent-Disposition: form-data; name=\"" + name + "\"; filename=\"" + name +
         ".png\"\r\nContent-Type: image/png\r\n\r\n";
    b += bytes;
    b += "\r\n";
  }
  b += "--" + boundary + "--\r\n";
  return b;
}

HttpRequest make_request(const ClientConfig& cfg, json fields, const std::vector<std::pair<std::string, fs::path>>& images) {
  HttpRequest req;
  req.endpoint = cfg.endpoint;
  req.timeout_s = cfg.timeout_s;
  if (cfg.image_encoding == ImageEncoding::Base64) {
    for (const auto& [name, path] : images) fields[name] = base64_encode(read_bytes(path));
    req.content_type = "application/json";
    req.body = fields.dump();
  } else {
    static const std::string boundary = "textsculpt-boundary-7f3a9c";
    std::vector<std::pair<std::string, std::string>> files;
    for (const auto& [name, path] : images) files.emplace_back(name, read_file(path));
    req.content_type = "multipart/form-data; boundary=" + boundary;
    req.body = multipart_body(boundary, fields, files);
  }
  return req;
}

json parse_body(const std::string& body) {
  try {
    return json::parse(body);
  } catch (const json::exception&) {
    throw Error(ErrorCode::MalformedResponse, "response is not JSON");
  }
}

}  // namespace

// --- OCR -------------------------------------------------------------------

std::vector<TextBox> parse_ocr_payload(const json& payload, Size image_size) {
  const json* list = &payload;
  if (payload.is_object()) {
    if (!payload.contains("boxes")) throw Error(ErrorCode::MalformedResponse, "OCR object lacks 'boxes'");
    list = &payload.at("boxes");
  }
  if (!list->is_array()) throw Error(ErrorCode::MalformedResponse, "OCR payload must be a list");
  std::vector<TextBox> out;
  std::size_t i = 0;
  for (const auto& item : *list) {
    const auto where = "box " + std::to_string(i++);
    if (!item.is_object() || !item.contains("rect") || !item.contains("text"))
      throw Error(ErrorCode::MalformedResponse, where + ": needs rect and text");
    const auto& r = item.at("rect");
    if (!r.is_array() || r.size() != 4 || !std::all_of(r.begin(), r.end(), [](const json& v) { return v.is_number_integer(); }))
      throw Error(ErrorCode::MalformedResponse, where + ": rect must be [x,y,w,h] integers");
    if (!item.at("text").is_string()) throw Error(ErrorCode::MalformedResponse, where + ": text must be a string");
    TextBox b;
    b.rect = Rect{r[0].get<int>(), r[1].get<int>(), r[2].get<int>(), r[3].get<int>()};
    b.text = item.at("text").get<std::string>();
    if (item.contains("confidence")) {
      if (!item.at("confidence").is_number()) throw Error(ErrorCode::MalformedResponse, where + ": bad confidence");
      b.confidence = item.at("confidence").get<double>();
    }
    if (b.rect.w <= 0 || b.rect.h <= 0 || b.rect.x < 0 || b.rect.y < 0 || b.rect.right() > image_size.width ||
        b.rect.bottom() > image_size.height)
      throw Error(ErrorCode::MalformedResponse, where + ": rect outside the image bounds");
    out.push_back(std::move(b));
  }
  return out;
}

json ocr_payload(const std::vector<TextBox>& boxes) {
  json arr = json::array();
  for (const auto& b : boxes)
    arr.push_back({{"rect", {b.rect.x, b.rect.y, b.rect.w, b.rect.h}}, {"text", b.text}, {"confidence", b.confidence}});
  return arr;
}

OcrClient::OcrClient(ClientConfig cfg, Transport transport, Sleeper sleeper)
    : cfg_(std::move(cfg)),
      transport_(transport ? std::move(transport) : http_transport()),
      retrier_(cfg_.max_retries, cfg_.timeout_s, 0.25, std::move(sleeper)),
      slots_(std::make_shared<std::counting_semaphore<>>(std::max(1, cfg_.max_in_flight))) {
  cfg_.validate();
}

OcrResult OcrClient::detect_text(const fs::path& image) const {
  if (cfg_.backend == Backend::Stub) {
    const auto fixture = cfg_.fixtures_dir / (image.stem().string() + ".ocr.json");
    if (!fs::exists(fixture)) throw Error(ErrorCode::FixtureMissing, fixture.string());
    const auto size = read_image_size(image);
    return OcrResult::from_boxes(parse_ocr_payload(parse_json_file(fixture, ErrorCode::MalformedResponse), size));
  }
  const auto size = read_image_size(image);
  SlotGuard slot(*slots_);
  const auto body = retrier_.run([&] {
    const auto text = transport_(make_request(cfg_, json{{"task", "detect_text"}}, {{"image", image}}));
    parse_ocr_payload(parse_body(text), size);
    return text;
  });
  return OcrResult::from_boxes(parse_ocr_payload(parse_body(body), size));
}

// --- judge -----------------------------------------------------------------

std::string_view to_string(JudgeMode m) {
  return m == JudgeMode::InferExpectedText ? "infer_expected_text" : "visual_quality";
}

JudgeMode parse_judge_mode(std::string_view s) {
  if (s == "infer_expected_text") return JudgeMode::InferExpectedText;
  if (s == "visual_quality") return JudgeMode::VisualQuality;
  throw Error(ErrorCode::InvalidArgument, "unknown judge mode '" + std::string(s) + "'");
}

JudgeResponse parse_judge_payload(const json& payload, JudgeMode mode, std::string raw) {
  if (!payload.is_object()) throw Error(ErrorCode::MalformedResponse, "judge response must be a JSON object");
  JudgeResponse r;
  r.raw = std::move(raw);
  if (mode == JudgeMode::InferExpectedText) {
    if (!payload.contains("expected") || !payload.at("expected").is_string())
      throw Error(ErrorCode::MalformedResponse, "judge response needs string field 'expected'");
    r.expected_full_text = payload.at("expected").get<std::string>();
  } else {
    auto flag = [&](const char* k) {
      if (!payload.contains(k) || !payload.at(k).is_boolean())
        throw Error(ErrorCode::MalformedResponse, std::string("judge response needs boolean field '") + k + "'");
      return payload.at(k).get<bool>();
    };
    r.judgment = VisualQualityJudgment{flag("location"), flag("style"), flag("physical")};
  }
  return r;
}

JudgeResponse parse_judge_transcript(const std::string& body, JudgeMode mode) {
  json j;
  try {
    j = json::parse(body);
  } catch (const json::exception&) {
    throw Error(ErrorCode::MalformedResponse, "judge output is not JSON");
  }
  for (const char* k : {"content", "output"}) {
    if (j.is_object() && j.contains(k) && j.at(k).is_string()) {
      try {
        j = json::parse(j.at(k).get<std::string>());
      } catch (const json::exception&) {
        throw Error(ErrorCode::MalformedResponse, std::string("judge '") + k + "' is not JSON");
      }
      break;
    }
  }
  return parse_judge_payload(j, mode, body);
}

JudgeClient::JudgeClient(ClientConfig cfg, PromptSet prompts, Transport transport, Sleeper sleeper)
    : cfg_(std::move(cfg)),
      prompts_(std::move(prompts)),
      transport_(transport ? std::move(transport) : http_transport()),
      retrier_(cfg_.max_retries, cfg_.timeout_s, 0.25, std::move(sleeper)),
      slots_(std::make_shared<std::counting_semaphore<>>(std::max(1, cfg_.max_in_flight))) {
  cfg_.validate();
}

std::string JudgeClient::prompt_name(JudgeMode m) {
  return m == JudgeMode::InferExpectedText ? "judge_infer_expected_text" : "judge_visual_quality";
}

JudgeResponse JudgeClient::judge(const JudgeRequest& request) const {
  if (request.edited_image.empty()) throw Error(ErrorCode::InvalidArgument, "judge request needs an edited image");
  if (cfg_.backend == Backend::Stub) {
    const auto fixture = cfg_.fixtures_dir / (request.sample_id + ".judge.json");
    if (!fs::exists(fixture)) throw Error(ErrorCode::FixtureMissing, fixture.string());
    const auto raw = read_file(fixture);
    json j;
    try {
      j = json::parse(raw);
    } catch (const json::exception& e) {
      throw Error(ErrorCode::MalformedResponse, fixture.string() + ": " + e.what());
    }
    return parse_judge_payload(j, request.mode, raw);
  }
  const auto name = prompt_name(request.mode);
  json fields{{"id", request.sample_id},
              {"mode", std::string(to_string(request.mode))},
              {"prompt", substitute(prompts_.text(name), "instruction", request.instruction)},
              {"prompt_version", prompts_.key(name)}};
  std::vector<std::pair<std::string, fs::path>> images;
  if (!request.source_image.empty()) images.emplace_back("source_image", request.source_image);
  images.emplace_back("edited_image", request.edited_image);
  SlotGuard slot(*slots_);
  const auto body = retrier_.run([&] {
    const auto text = transport_(make_request(cfg_, fields, images));
    parse_judge_transcript(text, request.mode);
    return text;
  });
  return parse_judge_transcript(body, request.mode);
}

// --- caption / image -------------------------------------------------------

std::string rewrite_caption(const std::string& caption, const ClientConfig& cfg, const Transport& transport) {
  cfg.validate();
  if (cfg.backend == Backend::Stub) {
    const auto fixture = cfg.fixtures_dir / "captions.json";
    if (!fs::exists(fixture)) throw Error(ErrorCode::FixtureMissing, fixture.string());
    const auto j = parse_json_file(fixture, ErrorCode::MalformedResponse);
    if (!j.is_object() || !j.contains(caption)) throw Error(ErrorCode::FixtureMissing, "no caption fixture for '" + caption + "'");
    if (!j.at(caption).is_string()) throw Error(ErrorCode::MalformedResponse, "caption fixture must be a string");
    return j.at(caption).get<std::string>();
  }
  Retrier retrier(cfg.max_retries, cfg.timeout_s);
  const auto t = transport ? transport : http_transport();
  const auto body = retrier.run([&] {
    const auto text = t(make_request(cfg, json{{"task", "rewrite_caption"}, {"caption", caption}}, {}));
    const auto j = parse_body(text);
    if (!j.is_object() || !j.contains("caption") || !j.at("caption").is_string())
      throw Error(ErrorCode::MalformedResponse, "response needs string field 'caption'");
    return text;
  });
  return parse_body(body).at("caption").get<std::string>();
}

fs::path generate_image(const std::string& prompt, const ClientConfig& cfg, const fs::path& out_dir,
                        const Transport& transport) {
  cfg.validate();
  if (cfg.backend == Backend::Stub) {
    const auto fixture = cfg.fixtures_dir / "images.json";
    if (!fs::exists(fixture)) throw Error(ErrorCode::FixtureMissing, fixture.string());
    const auto j = parse_json_file(fixture, ErrorCode::MalformedResponse);
    if (!j.is_object() || !j.contains(prompt)) throw Error(ErrorCode::FixtureMissing, "no image fixture for prompt");
    if (!j.at(prompt).is_string()) throw Error(ErrorCode::MalformedResponse, "image fixture must be a path string");
    fs::path p = j.at(prompt).get<std::string>();
    return p.is_relative() ? cfg.fixtures_dir / p : p;
  }
  if (out_dir.empty()) throw Error(ErrorCode::InvalidArgument, "remote generate_image needs an output directory");
  Retrier retrier(cfg.max_retries, cfg.timeout_s);
  const auto t = transport ? transport : http_transport();
  const auto body = retrier.run([&] {
    const auto text = t(make_request(cfg, json{{"task", "generate_image"}, {"prompt", prompt}}, {}));
    const auto j = parse_body(text);
    if (!j.is_object() || !j.contains("image") || !j.at("image").is_string())
      throw Error(ErrorCode::MalformedResponse, "response needs base64 field 'image'");
    return text;
  });
  const auto bytes = base64_decode(parse_body(body).at("image").get<std::string>());
  const auto img = decode_png(bytes);
  fs::create_directories(out_dir);
  const auto path = out_dir / (sha256_hex(prompt).substr(0, 16) + ".png");
  write_png(img, path);
  return path;
}

}  // namespace textsculpt
