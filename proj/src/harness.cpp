#include "textsculpt/harness.hpp"

#include <algorithm>
#include <atomic>
#include <cctype>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <mutex>
#include <set>
#include <sstream>
#include <thread>

#include "textsculpt/error.hpp"
#include "textsculpt/image.hpp"
#include "textsculpt/text_corpus.hpp"
#include "textsculpt/typesetting.hpp"

namespace textsculpt {

using nlohmann::json;
namespace fs = std::filesystem;

std::string tool_version() { return TEXTSCULPT_VERSION; }

namespace {

std::string read_text(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw Error(ErrorCode::Io, "cannot open " + p.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text(const fs::path& p, const std::string& s) {
  if (p.has_parent_path()) fs::create_directories(p.parent_path());
  std::ofstream out(p, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::Io, "cannot write " + p.string());
  out << s;
  if (!out) throw Error(ErrorCode::Io, "write failed: " + p.string());
}

std::string trim(std::string_view s) {
  std::size_t a = 0, b = s.size();
  while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
  while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
  return std::string(s.substr(a, b - a));
}

[[noreturn]] void config_error(int line, const std::string& msg) {
  throw Error(ErrorCode::InvalidConfig, "line " + std::to_string(line) + ": " + msg);
}

// Cuts a `#` comment that is not inside a string.
std::string strip_comment(const std::string& line) {
  bool in_str = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (in_str && c == '\\') {
      ++i;
      continue;
    }
    if (c == '"') in_str = !in_str;
    if (c == '#' && !in_str) return line.substr(0, i);
  }
  return line;
}

class ValueParser {
 public:
  ValueParser(std::string_view s, int line) : s_(s), line_(line) {}

  json parse_all() {
    json v = value();
    skip_ws();
    if (pos_ != s_.size()) config_error(line_, "trailing characters after value");
    return v;
  }

 private:
  void skip_ws() {
    while (pos_ < s_.size() && (s_[pos_] == ' ' || s_[pos_] == '\t')) ++pos_;
  }

  json value() {
    skip_ws();
    if (pos_ >= s_.size()) config_error(line_, "missing value");
    const char c = s_[pos_];
    if (c == '"') return string();
    if (c == '[') return array();
    return scalar();
  }

  json string() {
    ++pos_;
    std::string out;
    while (pos_ < s_.size() && s_[pos_] != '"') {
      char c = s_[pos_++];
      if (c == '\\') {
        if (pos_ >= s_.size()) break;
        const char e = s_[pos_++];
        switch (e) {
          case 'n': c = '\n'; break;
          case 't': c = '\t'; break;
          case '"': c = '"'; break;
          case '\\': c = '\\'; break;
          default: config_error(line_, std::string("unknown escape \\") + e);
        }
      }
      out.push_back(c);
    }
    if (pos_ >= s_.size()) config_error(line_, "unterminated string");
    ++pos_;
    return out;
  }

  json array() {
    ++pos_;
    json arr = json::array();
    skip_ws();
    if (pos_ < s_.size() && s_[pos_] == ']') {
      ++pos_;
      return arr;
    }
    for (;;) {
      json v = value();
      if (v.is_array()) config_error(line_, "nested arrays are not supported");
      arr.push_back(std::move(v));
      skip_ws();
      if (pos_ >= s_.size()) config_error(line_, "unterminated array");
      if (s_[pos_] == ',') {
        ++pos_;
        skip_ws();
        if (pos_ < s_.size() && s_[pos_] == ']') {
          ++pos_;
          return arr;
        }
        continue;
      }
      if (s_[pos_] == ']') {
        ++pos_;
        return arr;
      }
      config_error(line_, "expected ',' or ']' in array");
    }
  }

  json scalar() {
    const std::size_t start = pos_;
    while (pos_ < s_.size() && s_[pos_] != ',' && s_[pos_] != ']' && s_[pos_] != ' ' && s_[pos_] != '\t') ++pos_;
    const std::string tok(s_.substr(start, pos_ - start));
    if (tok == "true") return true;
    if (tok == "false") return false;
    try {
      std::size_t used = 0;
      if (tok.find_first_of(".eE") == std::string::npos && tok.find("inf") == std::string::npos &&
          tok.find("nan") == std::string::npos) {
        const long long v = std::stoll(tok, &used, 10);
        if (used == tok.size()) return v;
      } else {
        const double v = std::stod(tok, &used);
        if (used == tok.size() && std::isfinite(v)) return v;
      }
    } catch (const std::exception&) {
    }
    config_error(line_, "cannot parse value '" + tok + "'");
  }

  std::string_view s_;
  int line_;
  std::size_t pos_ = 0;
};

bool valid_key(const std::string& k) {
  return !k.empty() && std::all_of(k.begin(), k.end(), [](unsigned char c) {
    return std::isalnum(c) || c == '_' || c == '-';
  });
}

std::vector<std::string> split_dotted(const std::string& s) {
  std::vector<std::string> parts;
  std::size_t start = 0;
  for (;;) {
    const auto dot = s.find('.', start);
    parts.push_back(s.substr(start, dot == std::string::npos ? std::string::npos : dot - start));
    if (dot == std::string::npos) return parts;
    start = dot + 1;
  }
}

const json* lookup(const json& root, const std::string& dotted) {
  const json* cur = &root;
  for (const auto& p : split_dotted(dotted)) {
    if (!cur->is_object() || !cur->contains(p)) return nullptr;
    cur = &cur->at(p);
  }
  return cur;
}

}  // namespace

ConfigDoc ConfigDoc::parse(const std::string& text, const fs::path& base_dir) {
  ConfigDoc doc;
  doc.text = text;
  doc.base_dir = base_dir;
  doc.values = json::object();
  json* section = &doc.values;
  std::istringstream in(text);
  std::string raw;
  int line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    const std::string line = trim(strip_comment(raw));
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') config_error(line_no, "unterminated section header");
      const std::string name = trim(std::string_view(line).substr(1, line.size() - 2));
      section = &doc.values;
      for (const auto& part : split_dotted(name)) {
        if (!valid_key(part)) config_error(line_no, "bad section name '" + name + "'");
        auto& next = (*section)[part];
        if (next.is_null()) next = json::object();
        if (!next.is_object()) config_error(line_no, "section '" + name + "' clashes with a key");
        section = &next;
      }
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) config_error(line_no, "expected key = value");
    const std::string key = trim(std::string_view(line).substr(0, eq));
    if (!valid_key(key)) config_error(line_no, "bad key '" + key + "'");
    if (section->contains(key)) config_error(line_no, "duplicate key '" + key + "'");
    (*section)[key] = ValueParser(std::string_view(line).substr(eq + 1), line_no).parse_all();
  }
  return doc;
}

ConfigDoc ConfigDoc::load(const fs::path& path) {
  return parse(read_text(path), fs::absolute(path).parent_path());
}

bool ConfigDoc::has(const std::string& dotted) const { return lookup(values, dotted) != nullptr; }

template <typename T>
T ConfigDoc::get(const std::string& dotted, T fallback) const {
  const json* v = lookup(values, dotted);
  if (!v) return fallback;
  auto mismatch = [&](const char* want) {
    return Error(ErrorCode::InvalidConfig, "'" + dotted + "' must be " + want);
  };
  if constexpr (std::is_same_v<T, bool>) {
    if (!v->is_boolean()) throw mismatch("a boolean");
    return v->get<bool>();
  } else if constexpr (std::is_same_v<T, std::string>) {
    if (!v->is_string()) throw mismatch("a string");
    return v->get<std::string>();
  } else if constexpr (std::is_same_v<T, std::vector<std::string>>) {
    if (!v->is_array() || !std::all_of(v->begin(), v->end(), [](const json& e) { return e.is_string(); }))
      throw mismatch("an array of strings");
    return v->get<std::vector<std::string>>();
  } else if constexpr (std::is_same_v<T, double>) {
    if (!v->is_number()) throw mismatch("a number");
    return v->get<double>();
  } else if constexpr (std::is_same_v<T, std::uint64_t>) {
    if (!v->is_number_integer() || v->get<long long>() < 0) throw mismatch("a non-negative integer");
    return v->get<std::uint64_t>();
  } else {
    if (!v->is_number_integer()) throw mismatch("an integer");
    return v->get<T>();
  }
}

template bool ConfigDoc::get<bool>(const std::string&, bool) const;
template int ConfigDoc::get<int>(const std::string&, int) const;
template double ConfigDoc::get<double>(const std::string&, double) const;
template std::uint64_t ConfigDoc::get<std::uint64_t>(const std::string&, std::uint64_t) const;
template std::string ConfigDoc::get<std::string>(const std::string&, std::string) const;
template std::vector<std::string> ConfigDoc::get<std::vector<std::string>>(const std::string&,
                                                                           std::vector<std::string>) const;

fs::path ConfigDoc::path(const std::string& dotted, const fs::path& fallback) const {
  const auto s = get<std::string>(dotted, std::string());
  if (s.empty()) return fallback;
  fs::path p(s);
  return p.is_relative() && !base_dir.empty() ? (base_dir / p).lexically_normal() : p;
}

std::optional<std::uint64_t> seed_from_env() {
  const char* v = std::getenv("TEXTSCULPT_SEED");
  if (!v || !*v) return std::nullopt;
  try {
    std::size_t used = 0;
    const auto s = std::stoull(v, &used, 0);
    if (used == std::string_view(v).size()) return s;
  } catch (const std::exception&) {
  }
  throw Error(ErrorCode::InvalidConfig, std::string("TEXTSCULPT_SEED is not an integer: ") + v);
}

namespace {

std::vector<TaskType> task_types_from(const ConfigDoc& doc, const std::string& key, std::vector<TaskType> fallback) {
  if (!doc.has(key)) return fallback;
  std::vector<TaskType> out;
  for (const auto& s : doc.get<std::vector<std::string>>(key, {})) {
    try {
      out.push_back(parse_task_type(s));
    } catch (const Error&) {
      throw Error(ErrorCode::InvalidConfig, "unknown task type '" + s + "' in " + key);
    }
  }
  if (out.empty()) throw Error(ErrorCode::InvalidConfig, key + " must not be empty");
  return out;
}

json task_types_json(const std::vector<TaskType>& types) {
  json arr = json::array();
  for (auto t : types) arr.push_back(std::string(to_string(t)));
  return arr;
}

}  // namespace

ForgeConfig ForgeConfig::from_doc(const ConfigDoc& doc) {
  ForgeConfig c;
  c.doc = doc;
  c.seed = doc.get<std::uint64_t>("seed", 0);
  if (auto env = seed_from_env()) c.seed = *env;
  c.count = doc.get<int>("forge.count", c.count);
  c.task_types = task_types_from(doc, "forge.task_types", c.task_types);
  c.distraction_count = doc.get<int>("forge.distraction_count", c.distraction_count);
  c.threads = doc.get<int>("forge.threads", c.threads);
  c.sample_attempts = doc.get<int>("forge.sample_attempts", c.sample_attempts);
  c.fonts_dir = doc.path("paths.fonts");
  c.lexicon_path = doc.path("paths.lexicon");
  c.templates_path = doc.path("paths.templates");
  c.backgrounds_dir = doc.path("paths.backgrounds");
  c.background_size.width = doc.get<int>("background.width", c.background_size.width);
  c.background_size.height = doc.get<int>("background.height", c.background_size.height);
  c.text_words.lo = doc.get<int>("text.min_words", c.text_words.lo);
  c.text_words.hi = doc.get<int>("text.max_words", c.text_words.hi);
  c.policy.p_number = doc.get<double>("text.p_number", c.policy.p_number);
  c.policy.p_symbol = doc.get<double>("text.p_symbol", c.policy.p_symbol);
  c.policy.p_casing = doc.get<double>("text.p_casing", c.policy.p_casing);
  c.policy.symbol_set = doc.get<std::string>("text.symbol_set", c.policy.symbol_set);
  c.policy.min_digits = doc.get<int>("text.min_digits", c.policy.min_digits);
  c.policy.max_digits = doc.get<int>("text.max_digits", c.policy.max_digits);
  auto& s = c.styles;
  s.size_min_px = doc.get<double>("style.size_min_px", s.size_min_px);
  s.size_max_px = doc.get<double>("style.size_max_px", s.size_max_px);
  s.rotation_max_deg = doc.get<double>("style.rotation_max_deg", s.rotation_max_deg);
  s.p_stroke = doc.get<double>("style.p_stroke", s.p_stroke);
  s.stroke_min_px = doc.get<double>("style.stroke_min_px", s.stroke_min_px);
  s.stroke_max_px = doc.get<double>("style.stroke_max_px", s.stroke_max_px);
  s.letter_spacing_max_px = doc.get<double>("style.letter_spacing_max_px", s.letter_spacing_max_px);
  s.line_spacing_min = doc.get<double>("style.line_spacing_min", s.line_spacing_min);
  s.line_spacing_max = doc.get<double>("style.line_spacing_max", s.line_spacing_max);
  s.max_width_fraction = doc.get<double>("style.max_width_fraction", s.max_width_fraction);
  s.max_lines = doc.get<int>("style.max_lines", s.max_lines);
  c.margin_px = doc.get<int>("composer.margin_px", c.margin_px);
  c.placement_attempts = doc.get<int>("composer.placement_attempts", c.placement_attempts);
  c.task_options.p_in_context = doc.get<double>("task.p_in_context", c.task_options.p_in_context);
  c.task_options.max_targets = doc.get<int>("task.max_targets", c.task_options.max_targets);
  c.task_options.max_attempts = doc.get<int>("task.max_attempts", c.task_options.max_attempts);
  return c;
}

ForgeConfig ForgeConfig::load(const fs::path& path) { return from_doc(ConfigDoc::load(path)); }

void ForgeConfig::validate() const {
  auto bad = [](const std::string& m) { return Error(ErrorCode::InvalidConfig, m); };
  if (count < 0) throw bad("forge.count must be >= 0");
  if (distraction_count < 0) throw bad("forge.distraction_count must be >= 0");
  if (threads < 0) throw bad("forge.threads must be >= 0");
  if (sample_attempts < 1) throw bad("forge.sample_attempts must be >= 1");
  if (task_types.empty()) throw bad("forge.task_types must not be empty");
  if (fonts_dir.empty()) throw bad("paths.fonts is required");
  if (lexicon_path.empty()) throw bad("paths.lexicon is required");
  if (!fs::is_directory(fonts_dir)) throw bad("font directory not found: " + fonts_dir.string());
  if (!fs::is_regular_file(lexicon_path)) throw bad("lexicon not found: " + lexicon_path.string());
  if (!templates_path.empty() && !fs::is_regular_file(templates_path))
    throw bad("templates not found: " + templates_path.string());
  if (!backgrounds_dir.empty() && !fs::is_directory(backgrounds_dir))
    throw bad("background directory not found: " + backgrounds_dir.string());
  if (background_size.width < 16 || background_size.height < 16) throw bad("background must be at least 16x16");
  if (text_words.lo < 1 || text_words.hi < text_words.lo) throw bad("text word range is empty");
  if (margin_px < 0 || placement_attempts < 1) throw bad("composer settings out of range");
  if (styles.size_min_px <= 0 || styles.size_max_px < styles.size_min_px) throw bad("style size range is empty");
  if (task_options.max_targets < 1 || task_options.max_attempts < 1) throw bad("task settings out of range");
  if (task_options.p_in_context < 0 || task_options.p_in_context > 1) throw bad("task.p_in_context must be in [0, 1]");
  try {
    policy.validate();
  } catch (const Error& e) {
    throw bad(e.what());
  }
}

json ForgeConfig::snapshot() const {
  json r;
  r["seed"] = seed;
  r["count"] = count;
  r["task_types"] = task_types_json(task_types);
  r["distraction_count"] = distraction_count;
  r["sample_attempts"] = sample_attempts;
  r["background"] = {{"width", background_size.width}, {"height", background_size.height}};
  r["fonts_dir"] = fonts_dir.generic_string();
  r["lexicon"] = lexicon_path.generic_string();
  r["templates"] = templates_path.generic_string();
  r["backgrounds_dir"] = backgrounds_dir.generic_string();
  if (!lexicon_path.empty() && fs::is_regular_file(lexicon_path)) r["lexicon_sha256"] = sha256_file(lexicon_path);
  if (!templates_path.empty() && fs::is_regular_file(templates_path))
    r["templates_sha256"] = sha256_file(templates_path);
  return json{{"text", doc.text}, {"resolved", r}};
}

BenchConfig BenchConfig::from_doc(const ConfigDoc& doc) {
  BenchConfig c;
  c.per_type = doc.get<int>("bench.per_type", c.per_type);
  c.task_types = task_types_from(doc, "bench.task_types", c.task_types);
  if (c.per_type < 1) throw Error(ErrorCode::InvalidConfig, "bench.per_type must be >= 1");
  return c;
}

BenchConfig BenchConfig::load(const fs::path& path) { return from_doc(ConfigDoc::load(path)); }

// --- records -----------------------------------------------------------------

json to_json(const Rect& r) { return json::array({r.x, r.y, r.w, r.h}); }

json to_json(const TextBox& b) {
  return json{{"rect", to_json(b.rect)}, {"text", b.text}, {"confidence", b.confidence}};
}

json to_json(const EditOperation& op) {
  return json{{"kind", std::string(to_string(op.kind))},
              {"target_text", op.target_text},
              {"new_text", op.new_text},
              {"mode", std::string(to_string(op.mode))}};
}

json to_json(const EditTask& t) {
  json ops = json::array();
  for (const auto& op : t.operations) ops.push_back(to_json(op));
  return json{{"task_type", std::string(to_string(t.task_type))},
              {"operations", ops},
              {"instruction", t.instruction},
              {"scene_text_before", t.scene_text_before},
              {"expected_text_after", t.expected_text_after},
              {"n_edit", t.n_edit}};
}

namespace {

json rects_json(const std::vector<Rect>& rs) {
  json a = json::array();
  for (const auto& r : rs) a.push_back(to_json(r));
  return a;
}

json boxes_json(const std::vector<TextBox>& bs) {
  json a = json::array();
  for (const auto& b : bs) a.push_back(to_json(b));
  return a;
}

class FieldReader {
 public:
  FieldReader(const json& j, int line, std::string prefix = {}) : j_(j), line_(line), prefix_(std::move(prefix)) {
    if (!j_.is_object()) fail("", "expected an object");
  }

  [[noreturn]] void fail(const std::string& field, const std::string& msg) const {
    const std::string name = prefix_.empty() ? field : (field.empty() ? prefix_ : prefix_ + "." + field);
    throw Error(ErrorCode::SchemaViolation,
                (line_ > 0 ? "line " + std::to_string(line_) + ": " : std::string()) + "field '" + name + "': " + msg);
  }

  bool has(const char* k) const { return j_.contains(k) && !j_.at(k).is_null(); }

  const json& at(const char* k) const {
    if (!j_.contains(k)) fail(k, "missing");
    return j_.at(k);
  }

  std::string str(const char* k) const {
    const auto& v = at(k);
    if (!v.is_string()) fail(k, "expected a string");
    return v.get<std::string>();
  }

  long long integer(const char* k) const {
    const auto& v = at(k);
    if (!v.is_number_integer()) fail(k, "expected an integer");
    return v.get<long long>();
  }

  std::uint64_t u64(const char* k) const {
    const auto& v = at(k);
    if (!v.is_number_unsigned() && !(v.is_number_integer() && v.get<long long>() >= 0))
      fail(k, "expected a non-negative integer");
    return v.get<std::uint64_t>();
  }

  double number(const char* k) const {
    const auto& v = at(k);
    if (!v.is_number()) fail(k, "expected a number");
    return v.get<double>();
  }

  std::vector<std::string> strings(const char* k) const {
    const auto& v = at(k);
    if (!v.is_array()) fail(k, "expected an array of strings");
    std::vector<std::string> out;
    for (const auto& e : v) {
      if (!e.is_string()) fail(k, "expected an array of strings");
      out.push_back(e.get<std::string>());
    }
    return out;
  }

  Rect rect_value(const json& v, const std::string& name) const {
    if (!v.is_array() || v.size() != 4 ||
        !std::all_of(v.begin(), v.end(), [](const json& e) { return e.is_number_integer(); }))
      fail(name, "expected [x, y, w, h] integers");
    return Rect{v[0].get<int>(), v[1].get<int>(), v[2].get<int>(), v[3].get<int>()};
  }

  std::vector<Rect> rects(const char* k) const {
    const auto& v = at(k);
    if (!v.is_array()) fail(k, "expected an array of rects");
    std::vector<Rect> out;
    for (std::size_t i = 0; i < v.size(); ++i) out.push_back(rect_value(v[i], std::string(k) + "[" + std::to_string(i) + "]"));
    return out;
  }

  std::vector<TextBox> boxes(const char* k) const {
    const auto& v = at(k);
    if (!v.is_array()) fail(k, "expected an array of boxes");
    std::vector<TextBox> out;
    for (std::size_t i = 0; i < v.size(); ++i) {
      const std::string name = std::string(k) + "[" + std::to_string(i) + "]";
      FieldReader r(v[i], line_, prefix_.empty() ? name : prefix_ + "." + name);
      TextBox b;
      b.rect = r.rect_value(r.at("rect"), "rect");
      b.text = r.str("text");
      b.confidence = r.number("confidence");
      out.push_back(std::move(b));
    }
    return out;
  }

  template <typename E, typename F>
  E enumeration(const char* k, F parse) const {
    const auto s = str(k);
    try {
      return parse(s);
    } catch (const Error&) {
      fail(k, "unknown value '" + s + "'");
    }
  }

  int line() const { return line_; }
  const std::string& prefix() const { return prefix_; }

 private:
  const json& j_;
  int line_;
  std::string prefix_;
};

EditTask task_from_json(const json& j, int line, const std::string& prefix) {
  FieldReader r(j, line, prefix);
  EditTask t;
  t.task_type = r.enumeration<TaskType>("task_type", parse_task_type);
  const auto& ops = r.at("operations");
  if (!ops.is_array()) r.fail("operations", "expected an array");
  for (std::size_t i = 0; i < ops.size(); ++i) {
    FieldReader o(ops[i], line, prefix + ".operations[" + std::to_string(i) + "]");
    EditOperation op;
    op.kind = o.enumeration<OpKind>("kind", parse_op_kind);
    op.target_text = o.str("target_text");
    op.new_text = o.str("new_text");
    op.mode = o.enumeration<EditMode>("mode", parse_edit_mode);
    t.operations.push_back(std::move(op));
  }
  t.instruction = r.str("instruction");
  t.scene_text_before = r.strings("scene_text_before");
  t.expected_text_after = r.strings("expected_text_after");
  t.n_edit = static_cast<int>(r.integer("n_edit"));
  try {
    validate_task(t);
  } catch (const Error& e) {
    r.fail("", e.what());
  }
  return t;
}

}  // namespace

json to_json(const PairRecord& r) {
  return json{{"sample_id", r.sample_id},
              {"task", to_json(r.task)},
              {"source_path", r.source_path},
              {"target_path", r.target_path},
              {"edited_regions", rects_json(r.edited_regions)},
              {"distraction_regions", rects_json(r.distraction_regions)},
              {"seed", r.seed},
              {"background_id", r.background_id},
              {"source_boxes", boxes_json(r.source_boxes)},
              {"target_boxes", boxes_json(r.target_boxes)}};
}

json to_json(const BenchmarkItem& item) {
  json j{{"item_id", item.item_id},
         {"image_path", item.image_path},
         {"ocr_text", item.ocr_text},
         {"task_type", std::string(to_string(item.task_type))},
         {"instruction", item.instruction},
         {"edited_text_targets", item.edited_text_targets},
         {"n_edit", item.n_edit}};
  if (item.expected_text_after) j["expected_text_after"] = *item.expected_text_after;
  return j;
}

json to_json(const WordAlignment& a) {
  json ops = json::array();
  for (const auto& s : a.ops) {
    json step{{"op", std::string(to_string(s.op))}};
    if (s.op != AlignOp::Insert) step["expected"] = s.expected;
    if (s.op != AlignOp::Delete) step["observed"] = s.observed;
    ops.push_back(std::move(step));
  }
  return json{{"substitutions", a.substitutions}, {"insertions", a.insertions}, {"deletions", a.deletions}, {"ops", ops}};
}

json to_json(const SampleReport& r) {
  return json{{"sample_id", r.sample_id},
              {"task_type", std::string(to_string(r.task_type))},
              {"ta", r.ta},
              {"vq", r.vq},
              {"bp", r.bp},
              {"n_edit", r.n_edit},
              {"alignment", to_json(r.alignment)},
              {"judgment",
               {{"location", r.judgment.location_ok}, {"style", r.judgment.style_ok}, {"physical", r.judgment.physical_ok}}}};
}

json to_json(const AggregateReport& a) {
  json per = json::object();
  for (const auto& [t, m] : a.per_type) {
    const auto it = a.counts.find(t);
    per[std::string(to_string(t))] = {{"ta", m.ta}, {"vq", m.vq}, {"bp", m.bp}, {"count", it == a.counts.end() ? 0 : it->second}};
  }
  return json{{"per_type", per},
              {"overall", {{"ta", a.overall.ta}, {"vq", a.overall.vq}, {"bp", a.overall.bp}}},
              {"avg", a.avg},
              {"total", a.total}};
}

AggregateReport aggregate_from_json(const json& j) {
  FieldReader r(j, 0, "aggregate");
  AggregateReport a;
  const auto& per = r.at("per_type");
  if (!per.is_object()) r.fail("per_type", "expected an object");
  for (const auto& [k, v] : per.items()) {
    FieldReader pr(v, 0, "aggregate.per_type." + k);
    TaskType t;
    try {
      t = parse_task_type(k);
    } catch (const Error&) {
      pr.fail("", "unknown task type");
    }
    a.per_type[t] = MetricTriple{pr.number("ta"), pr.number("vq"), pr.number("bp")};
    a.counts[t] = static_cast<int>(pr.integer("count"));
  }
  FieldReader o(r.at("overall"), 0, "aggregate.overall");
  a.overall = MetricTriple{o.number("ta"), o.number("vq"), o.number("bp")};
  a.avg = r.number("avg");
  a.total = static_cast<int>(r.integer("total"));
  return a;
}

PairRecord pair_record_from_json(const json& j, int line) {
  FieldReader r(j, line);
  PairRecord p;
  p.sample_id = r.str("sample_id");
  if (p.sample_id.empty()) r.fail("sample_id", "must not be empty");
  p.task = task_from_json(r.at("task"), line, "task");
  p.source_path = r.str("source_path");
  p.target_path = r.str("target_path");
  p.edited_regions = r.rects("edited_regions");
  p.distraction_regions = r.rects("distraction_regions");
  p.seed = r.u64("seed");
  p.background_id = r.str("background_id");
  p.source_boxes = r.has("source_boxes") ? r.boxes("source_boxes") : std::vector<TextBox>{};
  p.target_boxes = r.has("target_boxes") ? r.boxes("target_boxes") : std::vector<TextBox>{};
  return p;
}

BenchmarkItem benchmark_item_from_json(const json& j, int line) {
  FieldReader r(j, line);
  BenchmarkItem it;
  it.item_id = r.str("item_id");
  if (it.item_id.empty()) r.fail("item_id", "must not be empty");
  it.image_path = r.str("image_path");
  it.ocr_text = r.strings("ocr_text");
  it.task_type = r.enumeration<TaskType>("task_type", parse_task_type);
  it.instruction = r.str("instruction");
  it.edited_text_targets = r.strings("edited_text_targets");
  it.n_edit = static_cast<int>(r.integer("n_edit"));
  if (it.n_edit < 1) r.fail("n_edit", "must be >= 1");
  if (it.task_type == TaskType::Hybrid && it.edited_text_targets.size() != 3)
    r.fail("edited_text_targets", "hybrid items carry exactly three targets");
  if (r.has("expected_text_after")) it.expected_text_after = r.strings("expected_text_after");
  return it;
}

namespace {

template <typename T, typename IdFn>
void write_jsonl(const fs::path& path, const std::vector<T>& records, IdFn id_of) {
  std::set<std::string> seen;
  for (const auto& r : records)
    if (!seen.insert(id_of(r)).second) throw Error(ErrorCode::DuplicateId, "duplicate id '" + id_of(r) + "'");
  std::string out;
  for (const auto& r : records) {
    out += to_json(r).dump();
    out += '\n';
  }
  write_text(path, out);
}

template <typename T, typename ParseFn, typename IdFn>
std::vector<T> read_jsonl(const fs::path& path, ParseFn parse, IdFn id_of) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::Io, "cannot open " + path.string());
  std::vector<T> out;
  std::set<std::string> seen;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    json j;
    try {
      j = json::parse(line);
    } catch (const json::exception&) {
      throw Error(ErrorCode::SchemaViolation, "line " + std::to_string(line_no) + ": field '': not valid JSON");
    }
    T rec = parse(j, line_no);
    if (!seen.insert(id_of(rec)).second)
      throw Error(ErrorCode::DuplicateId, "line " + std::to_string(line_no) + ": duplicate id '" + id_of(rec) + "'");
    out.push_back(std::move(rec));
  }
  return out;
}

}  // namespace

void write_manifest(const fs::path& path, const std::vector<PairRecord>& records) {
  write_jsonl(path, records, [](const PairRecord& r) { return r.sample_id; });
}

void write_benchmark(const fs::path& path, const std::vector<BenchmarkItem>& items) {
  write_jsonl(path, items, [](const BenchmarkItem& i) { return i.item_id; });
}

std::vector<PairRecord> read_manifest(const fs::path& path) {
  return read_jsonl<PairRecord>(path, pair_record_from_json, [](const PairRecord& r) { return r.sample_id; });
}

std::vector<BenchmarkItem> read_benchmark(const fs::path& path) {
  return read_jsonl<BenchmarkItem>(path, benchmark_item_from_json, [](const BenchmarkItem& i) { return i.item_id; });
}

namespace {

std::vector<std::string> box_texts(const std::vector<TextBox>& boxes) {
  std::vector<std::string> out;
  for (const auto& b : reading_order(boxes)) out.push_back(b.text);
  return out;
}

}  // namespace

BenchmarkItem benchmark_item_from_pair(const PairRecord& pair, const std::string& image_path) {
  BenchmarkItem it;
  it.item_id = pair.sample_id;
  it.image_path = image_path;
  it.ocr_text = box_texts(pair.source_boxes);
  it.task_type = pair.task.task_type;
  it.instruction = pair.task.instruction;
  for (const auto& op : pair.task.operations)
    it.edited_text_targets.push_back(op.kind == OpKind::Remove ? op.target_text : op.new_text);
  it.n_edit = pair.task.n_edit;
  it.expected_text_after = box_texts(pair.target_boxes);
  return it;
}

BalanceReport validate_balance(const std::vector<BenchmarkItem>& items, std::optional<int> per_type) {
  BalanceReport r;
  for (auto t : kAllTaskTypes) r.counts[t] = 0;
  for (const auto& it : items) ++r.counts[it.task_type];
  const int first = r.counts.begin()->second;
  r.balanced = first > 0 && std::all_of(r.counts.begin(), r.counts.end(), [&](const auto& kv) {
                 return kv.second == first;
               });
  if (per_type && first != *per_type) r.balanced = false;
  std::ostringstream msg;
  bool sep = false;
  for (const auto& [t, n] : r.counts) {
    msg << (sep ? ", " : "") << to_string(t) << "=" << n;
    sep = true;
  }
  if (per_type) msg << " (expected " << *per_type << " per type)";
  r.message = msg.str();
  return r;
}

// --- orchestration -----------------------------------------------------------

void parallel_for(int n, int threads, const std::function<void(int)>& fn) {
  if (n <= 0) return;
  if (threads <= 0) threads = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
  threads = std::min(threads, n);
  std::atomic<int> next{0};
  std::atomic<bool> stop{false};
  std::exception_ptr first;
  std::mutex mu;
  auto worker = [&] {
    for (;;) {
      if (stop.load()) return;
      const int i = next.fetch_add(1);
      if (i >= n) return;
      try {
        fn(i);
      } catch (...) {
        std::lock_guard lock(mu);
        if (!first) first = std::current_exception();
        stop = true;
      }
    }
  };
  if (threads == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int t = 0; t < threads; ++t) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }
  if (first) std::rethrow_exception(first);
}

namespace {

std::vector<fs::path> list_images(const fs::path& dir) {
  std::vector<fs::path> out;
  for (const auto& e : fs::directory_iterator(dir)) {
    if (!e.is_regular_file()) continue;
    auto ext = e.path().extension().string();
    std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return std::tolower(c); });
    if (ext == ".png" || ext == ".jpg" || ext == ".jpeg") out.push_back(e.path());
  }
  std::sort(out.begin(), out.end());
  return out;
}

std::uint8_t clamp_byte(double v) { return static_cast<std::uint8_t>(std::clamp(std::lround(v), 0L, 255L)); }

}  // namespace

Image make_background(const ForgeConfig& cfg, Rng& rng, std::string* background_id) {
  if (!cfg.backgrounds_dir.empty()) {
    const auto files = list_images(cfg.backgrounds_dir);
    if (files.empty()) throw Error(ErrorCode::InvalidConfig, "no images in " + cfg.backgrounds_dir.string());
    const auto& f = files[rng.below(files.size())];
    if (background_id) *background_id = f.filename().string();
    Image img = read_image(f);
    for (int y = 0; y < img.height(); ++y)
      for (int x = 0; x < img.width(); ++x) {
        auto c = img.at(x, y);
        c.a = 255;
        img.set(x, y, c);
      }
    return img;
  }

  const int w = cfg.background_size.width, h = cfg.background_size.height;
  auto color = [&] {
    return std::array<double, 3>{rng.uniform(0, 255), rng.uniform(0, 255), rng.uniform(0, 255)};
  };
  const auto c0 = color(), c1 = color();
  const double angle = rng.uniform(0, 2 * M_PI);
  const double dx = std::cos(angle), dy = std::sin(angle);
  const double span = std::abs(dx) * w + std::abs(dy) * h;
  const double off = std::min(0.0, dx * w) + std::min(0.0, dy * h);

  struct Blob {
    double cx, cy, r;
    std::array<double, 3> c;
    double a;
  };
  std::vector<Blob> blobs;
  const int nb = rng.uniform_int(2, 5);
  for (int i = 0; i < nb; ++i)
    blobs.push_back({rng.uniform(0, w), rng.uniform(0, h), rng.uniform(0.1, 0.4) * std::min(w, h), color(),
                     rng.uniform(0.15, 0.45)});
  const double noise = rng.uniform(2.0, 10.0);

  Image img(w, h);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const double t = (dx * x + dy * y - off) / span;
      std::array<double, 3> px{};
      for (int k = 0; k < 3; ++k) px[k] = c0[k] + (c1[k] - c0[k]) * t;
      for (const auto& b : blobs) {
        const double d = std::hypot(x - b.cx, y - b.cy) / b.r;
        if (d >= 1) continue;
        const double a = b.a * (1 - d * d);
        for (int k = 0; k < 3; ++k) px[k] = px[k] * (1 - a) + b.c[k] * a;
      }
      const double n = rng.uniform(-noise, noise);
      img.set(x, y, {clamp_byte(px[0] + n), clamp_byte(px[1] + n), clamp_byte(px[2] + n), 255});
    }
  }
  if (background_id) *background_id = "procedural";
  return img;
}

std::string sample_id_for(int index) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "s%06d", index);
  return buf;
}

namespace {

int scene_entries_for(TaskType t) {
  switch (t) {
    case TaskType::Addition: return 0;
    case TaskType::Removal:
    case TaskType::Replacement: return 1;
    case TaskType::Hybrid: return 2;
  }
  return 0;
}

std::string run_id_for(const json& config) { return sha256_hex(config.dump()).substr(0, 16); }

}  // namespace

ForgeResult run_forge(const ForgeConfig& cfg, const fs::path& out_dir) {
  cfg.validate();
  FontRegistry registry = FontRegistry::from_directory(cfg.fonts_dir);
  const Lexicon lexicon = load_lexicon(cfg.lexicon_path);
  const TemplateBank bank = cfg.templates_path.empty() ? TemplateBank::builtin() : TemplateBank::load(cfg.templates_path);

  CorpusSource corpus;
  corpus.lexicon = &lexicon;
  corpus.policy = cfg.policy;
  corpus.length_range = cfg.text_words;

  ComposerOptions copts;
  copts.margin_px = cfg.margin_px;
  copts.max_attempts = cfg.placement_attempts;
  copts.styles = cfg.styles;
  copts.distraction_corpus = corpus;

  fs::create_directories(out_dir / "pairs");

  std::vector<std::optional<PairRecord>> slots(static_cast<std::size_t>(cfg.count));
  std::vector<std::optional<SampleFailure>> fails(static_cast<std::size_t>(cfg.count));

  parallel_for(cfg.count, cfg.threads, [&](int i) {
    const TaskType type = cfg.task_types[static_cast<std::size_t>(i) % cfg.task_types.size()];
    const std::string id = sample_id_for(i);
    Rng base = Rng::for_sample(cfg.seed, static_cast<std::uint64_t>(i));
    for (int attempt = 0; attempt < cfg.sample_attempts; ++attempt) {
      Rng rng = base.fork();
      try {
        PairRecord rec;
        rec.sample_id = id;
        rec.seed = cfg.seed;
        Image background = make_background(cfg, rng, &rec.background_id);
        std::vector<std::string> scene;
        for (int k = 0; k < scene_entries_for(type); ++k)
          scene.push_back(sample_text(lexicon, cfg.policy, cfg.text_words, rng).text);
        EditTask task = make_task(type, scene, corpus, bank, rng, cfg.task_options);
        CompositePair pair = synthesize_pair(background, task, registry, cfg.distraction_count, rng, copts);
        rec.task = std::move(pair.task);
        rec.source_path = "pairs/" + id + "_src.png";
        rec.target_path = "pairs/" + id + "_tgt.png";
        rec.edited_regions = std::move(pair.edited_regions);
        rec.distraction_regions = std::move(pair.distraction_regions);
        rec.source_boxes = std::move(pair.source_boxes);
        rec.target_boxes = std::move(pair.target_boxes);
        write_png(pair.source, out_dir / rec.source_path);
        write_png(pair.target, out_dir / rec.target_path);
        slots[static_cast<std::size_t>(i)] = std::move(rec);
        fails[static_cast<std::size_t>(i)].reset();
        return;
      } catch (const Error& e) {
        if (e.code() == ErrorCode::Io) throw;
        fails[static_cast<std::size_t>(i)] = SampleFailure{i, id, std::string(to_string(e.code())), e.what()};
      }
    }
  });

  ForgeResult result;
  result.out_dir = out_dir;
  for (std::size_t i = 0; i < slots.size(); ++i) {
    if (slots[i]) result.records.push_back(std::move(*slots[i]));
    if (fails[i]) result.failures.push_back(std::move(*fails[i]));
  }
  write_manifest(out_dir / "manifest.jsonl", result.records);

  json config = cfg.snapshot();
  json failures = json::array();
  for (const auto& f : result.failures)
    failures.push_back({{"index", f.index}, {"sample_id", f.sample_id}, {"code", f.code}, {"message", f.message}});
  json per_type = json::object();
  for (const auto& r : result.records) {
    auto& n = per_type[std::string(to_string(r.task.task_type))];
    n = n.is_null() ? 1 : n.get<int>() + 1;
  }
  json font_warnings = json::array();
  for (const auto& w : registry.warnings()) font_warnings.push_back(w.path.filename().string() + ": " + w.message);
  json run{{"kind", "forge"},
           {"run_id", run_id_for(config)},
           {"tool_version", tool_version()},
           {"config", config},
           {"requested", cfg.count},
           {"written", result.records.size()},
           {"failures", failures},
           {"per_type", per_type},
           {"font_warnings", font_warnings},
           {"manifest_sha256", sha256_file(out_dir / "manifest.jsonl")}};
  write_text(out_dir / "run.json", run.dump(2) + "\n");
  result.exit_code = result.failures.empty() ? 0 : 1;
  return result;
}

std::string directory_hash(const fs::path& dir) {
  std::vector<fs::path> files;
  for (const auto& e : fs::recursive_directory_iterator(dir))
    if (e.is_regular_file()) files.push_back(fs::relative(e.path(), dir));
  std::sort(files.begin(), files.end());
  std::string acc;
  for (const auto& f : files) {
    acc += f.generic_string();
    acc += '\0';
    acc += sha256_file(dir / f);
    acc += '\n';
  }
  return sha256_hex(acc);
}

// --- gate --------------------------------------------------------------------

OcrSource parse_ocr_source(std::string_view s) {
  if (s == "echo") return OcrSource::Echo;
  if (s == "stub") return OcrSource::Stub;
  if (s == "remote") return OcrSource::Remote;
  throw Error(ErrorCode::InvalidConfig, "unknown OCR backend '" + std::string(s) + "'");
}

namespace {

json verdict_json(const GateVerdict& v) {
  return json{{"retained", v.retained},
              {"word_accuracy", v.word_accuracy},
              {"matched", v.matched},
              {"expected_count", v.expected_count},
              {"alignment", to_json(v.alignment)}};
}

std::optional<std::vector<Rect>> regions_of(const std::vector<TextBox>& boxes) {
  if (boxes.empty()) return std::nullopt;
  std::vector<Rect> out;
  for (const auto& b : boxes) out.push_back(b.rect);
  return out;
}

}  // namespace

GateRun run_gate(const fs::path& manifest_path, OcrSource source, const std::optional<ClientConfig>& ocr_cfg) {
  const auto records = read_manifest(manifest_path);
  const fs::path dir = manifest_path.parent_path();
  std::optional<OcrClient> client;
  if (source != OcrSource::Echo) {
    if (!ocr_cfg) throw Error(ErrorCode::InvalidConfig, "stub/remote OCR needs a client config");
    ClientConfig c = *ocr_cfg;
    c.backend = source == OcrSource::Stub ? Backend::Stub : Backend::Remote;
    client.emplace(c);
  }

  GateRun run;
  run.records.resize(records.size());
  parallel_for(static_cast<int>(records.size()), client ? client->config().max_in_flight : 0, [&](int i) {
    const auto& rec = records[static_cast<std::size_t>(i)];
    GateRecord g;
    g.sample_id = rec.sample_id;
    try {
      auto detect = [&](const std::string& rel, const std::vector<TextBox>& truth) {
        return client ? client->detect_text(dir / rel) : OcrResult::from_boxes(truth);
      };
      g.source = gate_sample(full_text_words(rec.source_boxes), detect(rec.source_path, rec.source_boxes),
                             regions_of(rec.source_boxes));
      g.target = gate_sample(full_text_words(rec.target_boxes), detect(rec.target_path, rec.target_boxes),
                             regions_of(rec.target_boxes));
      g.retained = g.source.retained && g.target.retained;
    } catch (const Error& e) {
      g.error = e.what();
      g.retained = false;
    }
    run.records[static_cast<std::size_t>(i)] = std::move(g);
  });

  std::string out;
  for (const auto& g : run.records) {
    run.retained += g.retained ? 1 : 0;
    json j{{"sample_id", g.sample_id}, {"retained", g.retained}};
    if (g.error.empty()) {
      j["source"] = verdict_json(g.source);
      j["target"] = verdict_json(g.target);
    } else {
      j["error"] = g.error;
    }
    out += j.dump() + "\n";
  }
  write_text(dir / "gate.jsonl", out);
  return run;
}

// --- benchmark derivation and simulated editors ------------------------------

namespace {

void copy_file_over(const fs::path& from, const fs::path& to) {
  fs::create_directories(to.parent_path());
  fs::copy_file(from, to, fs::copy_options::overwrite_existing);
}

void write_json(const fs::path& p, const json& j) { write_text(p, j.dump(2) + "\n"); }

}  // namespace

std::vector<BenchmarkItem> derive_benchmark(const fs::path& forge_dir, const fs::path& out_dir) {
  const auto records = read_manifest(forge_dir / "manifest.jsonl");
  std::vector<BenchmarkItem> items;
  for (const auto& rec : records) {
    const std::string image = "images/" + rec.sample_id + "_src.png";
    copy_file_over(forge_dir / rec.source_path, out_dir / image);
    write_json(out_dir / "fixtures" / (rec.sample_id + "_src.ocr.json"), ocr_payload(rec.source_boxes));
    items.push_back(benchmark_item_from_pair(rec, image));
  }
  write_benchmark(out_dir / "bench.jsonl", items);
  return items;
}

EditorMode parse_editor_mode(std::string_view s) {
  if (s == "perfect") return EditorMode::Perfect;
  if (s == "identity") return EditorMode::Identity;
  throw Error(ErrorCode::InvalidArgument, "unknown editor mode '" + std::string(s) + "'");
}

void simulate_editor(const fs::path& forge_dir, EditorMode mode, const fs::path& out_dir) {
  const auto records = read_manifest(forge_dir / "manifest.jsonl");
  const bool perfect = mode == EditorMode::Perfect;
  for (const auto& rec : records) {
    const auto& boxes = perfect ? rec.target_boxes : rec.source_boxes;
    copy_file_over(forge_dir / (perfect ? rec.target_path : rec.source_path), out_dir / (rec.sample_id + ".png"));
    write_json(out_dir / "fixtures" / (rec.sample_id + ".ocr.json"), ocr_payload(boxes));
    write_json(out_dir / "fixtures" / (rec.sample_id + "_src.ocr.json"), ocr_payload(rec.source_boxes));
    write_json(out_dir / "fixtures" / (rec.sample_id + ".judge.json"),
               json{{"expected", join_words(box_texts(rec.target_boxes))},
                    {"location", perfect},
                    {"style", true},
                    {"physical", true}});
  }
  const json stub{{"backend", "stub"}, {"fixtures_dir", "fixtures"}};
  write_json(out_dir / "clients.json", json{{"ocr", stub}, {"judge", stub}, {"expected_source", "ground_truth"}});
}

// --- evaluation ----------------------------------------------------------------

EvalClients EvalClients::load(const fs::path& path) {
  json j;
  try {
    j = json::parse(read_text(path));
  } catch (const json::exception& e) {
    throw Error(ErrorCode::InvalidConfig, path.string() + ": " + e.what());
  }
  if (!j.is_object() || !j.contains("ocr") || !j.contains("judge"))
    throw Error(ErrorCode::InvalidConfig, "clients config needs 'ocr' and 'judge'");
  const fs::path base = fs::absolute(path).parent_path();
  EvalClients c;
  c.ocr = ClientConfig::from_json(j.at("ocr"), base);
  c.judge = ClientConfig::from_json(j.at("judge"), base);
  const auto src = j.value("expected_source", std::string("ground_truth"));
  if (src == "ground_truth")
    c.expected = ExpectedSource::GroundTruth;
  else if (src == "judge")
    c.expected = ExpectedSource::Judge;
  else
    throw Error(ErrorCode::InvalidConfig, "expected_source must be ground_truth or judge");
  if (j.contains("dilation_px")) {
    if (!j.at("dilation_px").is_number_integer() || j.at("dilation_px").get<int>() < 0)
      throw Error(ErrorCode::InvalidConfig, "dilation_px must be a non-negative integer");
    c.dilation_px = j.at("dilation_px").get<int>();
  }
  if (j.contains("prompts_dir")) {
    fs::path p = j.at("prompts_dir").get<std::string>();
    c.prompts_dir = p.is_relative() ? base / p : p;
  }
  c.threads = j.value("threads", 0);
  return c;
}

json EvalClients::to_json() const {
  json j{{"ocr", ocr.to_json()},
         {"judge", judge.to_json()},
         {"expected_source", expected == ExpectedSource::GroundTruth ? "ground_truth" : "judge"}};
  if (dilation_px) j["dilation_px"] = *dilation_px;
  return j;
}

EvalRun run_eval(const fs::path& bench_path, const fs::path& edited_dir, const EvalClients& clients,
                 const fs::path& out_dir) {
  const auto items = read_benchmark(bench_path);
  const fs::path bench_dir = bench_path.parent_path();
  const PromptSet prompts = clients.prompts_dir.empty() ? PromptSet::builtin() : PromptSet::load(clients.prompts_dir);
  const OcrClient ocr(clients.ocr);
  const JudgeClient judge(clients.judge, prompts);

  std::vector<std::optional<SampleReport>> reports(items.size());
  std::vector<std::optional<SkippedItem>> skips(items.size());

  parallel_for(static_cast<int>(items.size()), clients.threads, [&](int i) {
    const auto& item = items[static_cast<std::size_t>(i)];
    const fs::path edited = edited_dir / (item.item_id + ".png");
    const fs::path source = bench_dir / item.image_path;
    try {
      if (!fs::is_regular_file(edited))
        throw Error(ErrorCode::MissingEditedImage, item.item_id);

      std::vector<std::string> expected;
      if (clients.expected == ExpectedSource::GroundTruth && item.expected_text_after) {
        expected = tokenize_entries(*item.expected_text_after);
      } else {
        const auto r = judge.judge({item.item_id, source, edited, item.instruction, JudgeMode::InferExpectedText});
        expected = tokenize(*r.expected_full_text);
      }

      const OcrResult edited_ocr = ocr.detect_text(edited);
      const OcrResult source_ocr = ocr.detect_text(source);

      SampleReport rep;
      rep.sample_id = item.item_id;
      rep.task_type = item.task_type;
      rep.n_edit = item.n_edit;
      rep.alignment = align_words(expected, edited_ocr.full_text_words);
      rep.ta = text_accuracy(rep.alignment, item.n_edit);

      const auto vq = judge.judge({item.item_id, source, edited, item.instruction, JudgeMode::VisualQuality});
      rep.judgment = *vq.judgment;
      rep.vq = vq_score(rep.judgment);

      const Image a = read_image(source);
      const Image b = read_image(edited);
      const int dil = clients.dilation_px ? *clients.dilation_px : default_dilation_px(source_ocr.boxes, edited_ocr.boxes);
      const auto mask = build_exclusion_mask(a.size(), source_ocr.boxes, edited_ocr.boxes, dil);
      rep.bp = background_preservation(a, b, mask);
      reports[static_cast<std::size_t>(i)] = std::move(rep);
    } catch (const Error& e) {
      skips[static_cast<std::size_t>(i)] = SkippedItem{item.item_id, std::string(to_string(e.code())), e.what()};
    }
  });

  EvalRun run;
  for (std::size_t i = 0; i < items.size(); ++i) {
    if (reports[i]) run.reports.push_back(std::move(*reports[i]));
    if (skips[i]) run.skipped.push_back(std::move(*skips[i]));
  }
  if (run.reports.empty())
    throw Error(ErrorCode::MissingEditedImage, "no benchmark item could be scored (" +
                                                   std::to_string(run.skipped.size()) + " skipped)");
  run.aggregate = aggregate(run.reports);

  json config{{"clients", clients.to_json()},
              {"bench_sha256", sha256_file(bench_path)},
              {"prompt_hashes", prompts.hashes()}};
  json records = json::array();
  for (const auto& r : run.reports) records.push_back(to_json(r));
  json skipped = json::array();
  for (const auto& s : run.skipped) skipped.push_back({{"item_id", s.item_id}, {"code", s.code}, {"message", s.message}});
  run.manifest = json{{"kind", "eval"},
                      {"run_id", run_id_for(config)},
                      {"tool_version", tool_version()},
                      {"config", config},
                      {"items", items.size()},
                      {"records", records},
                      {"skipped", skipped},
                      {"aggregate", to_json(run.aggregate)}};
  run.exit_code = run.skipped.empty() ? 0 : 1;
  if (!out_dir.empty()) write_text(out_dir / "run.json", run.manifest.dump(2) + "\n");
  return run;
}

std::string render_report(const fs::path& run_json, ReportFormat format) {
  json j;
  try {
    j = json::parse(read_text(run_json));
  } catch (const json::exception& e) {
    throw Error(ErrorCode::SchemaViolation, run_json.string() + ": " + e.what());
  }
  FieldReader r(j, 0);
  const auto kind = r.str("kind");
  if (kind == "eval") {
    if (format == ReportFormat::Json) return r.at("aggregate").dump(2) + "\n";
    const auto agg = aggregate_from_json(r.at("aggregate"));
    return format_table(agg, r.str("run_id"));
  }
  if (kind == "forge") {
    json summary{{"run_id", r.at("run_id")},
                 {"requested", r.at("requested")},
                 {"written", r.at("written")},
                 {"failed", r.at("failures").size()},
                 {"per_type", r.at("per_type")}};
    if (format == ReportFormat::Json) return summary.dump(2) + "\n";
    std::ostringstream out;
    out << "forge run " << summary["run_id"].get<std::string>() << "\n";
    out << "  requested " << summary["requested"] << ", written " << summary["written"] << ", failed "
        << summary["failed"] << "\n";
    for (const auto& [t, n] : summary["per_type"].items()) out << "  " << t << ": " << n << "\n";
    return out.str();
  }
  r.fail("kind", "expected 'forge' or 'eval'");
}

}  // namespace textsculpt
