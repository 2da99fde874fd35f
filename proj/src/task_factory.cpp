#include "textsculpt/task_factory.hpp"

#include <algorithm>
#include <fstream>
#include <set>

#include "textsculpt/error.hpp"

namespace textsculpt {

std::string_view to_string(OpKind k) {
  switch (k) {
    case OpKind::Add: return "add";
    case OpKind::Replace: return "replace";
    case OpKind::Remove: return "remove";
  }
  return "?";
}

std::string_view to_string(EditMode m) { return m == EditMode::Whole ? "whole" : "in_context"; }

std::string_view to_string(TaskType t) {
  switch (t) {
    case TaskType::Addition: return "addition";
    case TaskType::Removal: return "removal";
    case TaskType::Replacement: return "replacement";
    case TaskType::Hybrid: return "hybrid";
  }
  return "?";
}

OpKind parse_op_kind(std::string_view s) {
  if (s == "add") return OpKind::Add;
  if (s == "replace") return OpKind::Replace;
  if (s == "remove") return OpKind::Remove;
  throw Error(ErrorCode::InvalidArgument, "unknown operation kind: " + std::string(s));
}

EditMode parse_edit_mode(std::string_view s) {
  if (s == "whole") return EditMode::Whole;
  if (s == "in_context") return EditMode::InContext;
  throw Error(ErrorCode::InvalidArgument, "unknown edit mode: " + std::string(s));
}

TaskType parse_task_type(std::string_view s) {
  for (auto t : kAllTaskTypes)
    if (to_string(t) == s) return t;
  throw Error(ErrorCode::InvalidArgument, "unknown task type: " + std::string(s));
}

int EditOperation::edit_words() const {
  const std::string& span = kind == OpKind::Remove ? target_text : new_text;
  return static_cast<int>(split_whitespace(span).size());
}

namespace {

int kind_rank(OpKind k) {
  switch (k) {
    case OpKind::Remove: return 0;
    case OpKind::Replace: return 1;
    case OpKind::Add: return 2;
  }
  return 3;
}

std::vector<EditOperation> in_application_order(std::vector<EditOperation> ops) {
  std::stable_sort(ops.begin(), ops.end(),
                   [](const EditOperation& a, const EditOperation& b) { return kind_rank(a.kind) < kind_rank(b.kind); });
  return ops;
}

// Positions (entry, start) where `needle` occurs as a contiguous word run.
std::vector<std::pair<std::size_t, std::size_t>> find_spans(const std::vector<std::vector<std::string>>& entries,
                                                            const std::vector<std::string>& needle) {
  std::vector<std::pair<std::size_t, std::size_t>> hits;
  if (needle.empty()) return hits;
  for (std::size_t e = 0; e < entries.size(); ++e) {
    const auto& words = entries[e];
    if (words.size() < needle.size()) continue;
    for (std::size_t s = 0; s + needle.size() <= words.size(); ++s)
      if (std::equal(needle.begin(), needle.end(), words.begin() + static_cast<std::ptrdiff_t>(s))) hits.emplace_back(e, s);
  }
  return hits;
}

}  // namespace

void validate_task(const EditTask& task) {
  auto fail = [](const std::string& why) { throw Error(ErrorCode::InvalidArgument, why); };
  if (task.operations.empty()) fail("task has no operations");
  if (task.n_edit <= 0) fail("n_edit must be positive");
  int adds = 0, removes = 0, replaces = 0;
  for (const auto& op : task.operations) {
    switch (op.kind) {
      case OpKind::Add:
        if (!op.target_text.empty() || split_whitespace(op.new_text).empty()) fail("add needs only new_text");
        ++adds;
        break;
      case OpKind::Remove:
        if (split_whitespace(op.target_text).empty() || !op.new_text.empty()) fail("remove needs only target_text");
        ++removes;
        break;
      case OpKind::Replace:
        if (split_whitespace(op.target_text).empty() || split_whitespace(op.new_text).empty())
          fail("replace needs target_text and new_text");
        ++replaces;
        break;
    }
    if (op.mode == EditMode::InContext) {
      const auto needle = split_whitespace(op.target_text);
      bool proper = false;
      for (const auto& entry : task.scene_text_before) {
        const auto words = split_whitespace(entry);
        if (words.size() > needle.size() && !find_spans({words}, needle).empty()) proper = true;
      }
      if (!proper) fail("in_context target must be a proper sub-span of a scene entry");
    }
  }
  switch (task.task_type) {
    case TaskType::Hybrid:
      if (adds != 1 || removes != 1 || replaces != 1 || task.operations.size() != 3)
        fail("hybrid task needs exactly one add, one remove and one replace");
      break;
    case TaskType::Addition:
      if (adds != static_cast<int>(task.operations.size())) fail("addition task may only add");
      break;
    case TaskType::Removal:
      if (removes != static_cast<int>(task.operations.size())) fail("removal task may only remove");
      break;
    case TaskType::Replacement:
      if (replaces != static_cast<int>(task.operations.size())) fail("replacement task may only replace");
      break;
  }
}

std::vector<EntryOutcome> apply_operations(const std::vector<std::string>& scene_text,
                                           const std::vector<EditOperation>& operations) {
  struct Entry {
    std::optional<std::size_t> source;
    std::string before;
    std::vector<std::string> words;
    bool alive = true;
  };
  std::vector<Entry> entries;
  for (std::size_t i = 0; i < scene_text.size(); ++i) entries.push_back({i, scene_text[i], split_whitespace(scene_text[i])});

  for (const auto& op : in_application_order(operations)) {
    if (op.kind == OpKind::Add) {
      entries.push_back({std::nullopt, "", split_whitespace(op.new_text)});
      continue;
    }
    const auto needle = split_whitespace(op.target_text);
    std::vector<std::vector<std::string>> live(entries.size());
    for (std::size_t i = 0; i < entries.size(); ++i)
      if (entries[i].alive) live[i] = entries[i].words;
    const auto hits = find_spans(live, needle);
    if (hits.size() != 1)
      throw Error(ErrorCode::AmbiguousTarget, "'" + op.target_text + "' matches " + std::to_string(hits.size()) +
                                                  " positions");
    auto& words = entries[hits[0].first].words;
    const auto first = words.begin() + static_cast<std::ptrdiff_t>(hits[0].second);
    const auto last = first + static_cast<std::ptrdiff_t>(needle.size());
    if (op.kind == OpKind::Remove) {
      words.erase(first, last);
      if (words.empty()) entries[hits[0].first].alive = false;
    } else {
      const auto replacement = split_whitespace(op.new_text);
      const auto at = words.erase(first, last);
      words.insert(at, replacement.begin(), replacement.end());
    }
  }

  std::vector<EntryOutcome> out;
  for (const auto& e : entries) {
    EntryOutcome o{e.source, e.before, std::nullopt};
    if (e.alive) o.after = join_words(e.words);
    out.push_back(std::move(o));
  }
  return out;
}

ExpectedEdit expected_text_after_edit(const std::vector<std::string>& scene_text,
                                      const std::vector<EditOperation>& operations) {
  ExpectedEdit out;
  for (const auto& o : apply_operations(scene_text, operations))
    if (o.after) out.text_after.push_back(*o.after);
  for (const auto& op : operations) out.n_edit += op.edit_words();
  return out;
}

// ---------------------------------------------------------------------------
// Instruction templates

TemplateBank::TemplateBank(const std::vector<std::string>& templates) {
  for (const auto& t : templates) {
    const bool has_t = t.find("{t}") != std::string::npos;
    const bool has_n = t.find("{n}") != std::string::npos;
    for (const char* ph : {"{t}", "{n}"})
      for (auto pos = t.find(ph); pos != std::string::npos; pos = t.find(ph, pos + 3))
        if (pos == 0 || t[pos - 1] != '"' || pos + 3 >= t.size() || t[pos + 3] != '"')
          throw Error(ErrorCode::InvalidArgument, "placeholder must be double-quoted in template: " + t);
    if (has_t && has_n)
      replace_.push_back(t);
    else if (has_t)
      remove_.push_back(t);
    else if (has_n)
      add_.push_back(t);
    else
      throw Error(ErrorCode::InvalidArgument, "template has no placeholder: " + t);
  }
}

TemplateBank TemplateBank::load(std::istream& in) {
  std::vector<std::string> lines;
  for (std::string line; std::getline(in, line);) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const auto first = line.find_first_not_of(" \t");
    if (first == std::string::npos || line[first] == '#') continue;
    lines.push_back(line.substr(first));
  }
  return TemplateBank(lines);
}

TemplateBank TemplateBank::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::Io, "cannot open template bank " + path.string());
  return load(in);
}

TemplateBank TemplateBank::builtin() {
  return TemplateBank(std::vector<std::string>{
      R"(Add the text "{n}" to the image.)",
      R"(Write "{n}" somewhere in the scene.)",
      R"(Replace the text "{t}" with "{n}".)",
      R"(Change "{t}" to "{n}".)",
      R"(Remove the text "{t}".)",
      R"(Erase "{t}" from the image.)",
  });
}

const std::vector<std::string>& TemplateBank::templates_for(OpKind k) const {
  switch (k) {
    case OpKind::Add: return add_;
    case OpKind::Replace: return replace_;
    case OpKind::Remove: return remove_;
  }
  return add_;
}

namespace {

std::string substitute(std::string tmpl, const std::string& key, const std::string& value) {
  for (auto pos = tmpl.find(key); pos != std::string::npos; pos = tmpl.find(key, pos + value.size()))
    tmpl.replace(pos, key.size(), value);
  return tmpl;
}

}  // namespace

std::string render_instruction(const std::vector<EditOperation>& operations, const TemplateBank& bank, Rng& rng) {
  std::string out;
  for (const auto& op : operations) {
    const auto& options = bank.templates_for(op.kind);
    if (options.empty()) throw Error(ErrorCode::MissingTemplate, std::string(to_string(op.kind)));
    std::string clause = rng.pick(options);
    // {t} first: new text may legitimately contain the literal "{t}".
    clause = substitute(std::move(clause), "{t}", op.target_text);
    clause = substitute(std::move(clause), "{n}", op.new_text);
    if (!out.empty()) out += ' ';
    out += clause;
  }
  return out;
}

std::vector<std::string> quoted_strings(const std::string& instruction) {
  std::vector<std::string> out;
  std::size_t pos = 0;
  while ((pos = instruction.find('"', pos)) != std::string::npos) {
    const auto end = instruction.find('"', pos + 1);
    if (end == std::string::npos) break;
    out.push_back(instruction.substr(pos + 1, end - pos - 1));
    pos = end + 1;
  }
  return out;
}

// ---------------------------------------------------------------------------
// Task construction

namespace {

struct Target {
  std::size_t entry;
  std::string text;
  EditMode mode;
};

std::size_t count_occurrences(const std::vector<std::vector<std::string>>& scene, const std::vector<std::string>& span) {
  return find_spans(scene, span).size();
}

std::optional<Target> pick_target(const std::vector<std::vector<std::string>>& scene, const std::set<std::size_t>& used,
                                  double p_in_context, Rng& rng) {
  std::vector<std::size_t> free;
  for (std::size_t i = 0; i < scene.size(); ++i)
    if (!used.count(i) && !scene[i].empty()) free.push_back(i);
  if (free.empty()) return std::nullopt;
  const std::size_t entry = rng.pick(free);
  const auto& words = scene[entry];

  if (words.size() >= 2 && rng.bernoulli(p_in_context)) {
    for (int attempt = 0; attempt < 8; ++attempt) {
      const auto len = 1 + rng.below(words.size() - 1);
      const auto start = rng.below(words.size() - len + 1);
      std::vector<std::string> span(words.begin() + static_cast<std::ptrdiff_t>(start),
                                    words.begin() + static_cast<std::ptrdiff_t>(start + len));
      if (count_occurrences(scene, span) == 1) return Target{entry, join_words(span), EditMode::InContext};
    }
  }
  if (count_occurrences(scene, words) == 1) return Target{entry, join_words(words), EditMode::Whole};
  return std::nullopt;
}

std::string fresh_text(const CorpusSource& corpus, Rng& rng, const std::string& avoid) {
  for (int i = 0; i < 16; ++i) {
    auto t = sample_text(*corpus.lexicon, corpus.policy, corpus.length_range, rng).text;
    if (t != avoid) return t;
  }
  return sample_text(*corpus.lexicon, corpus.policy, corpus.length_range, rng).text + " new";
}

}  // namespace

EditTask make_task(TaskType type, const std::vector<std::string>& scene_text, const CorpusSource& corpus,
                   const TemplateBank& bank, Rng& rng, const TaskOptions& options) {
  if (!corpus.lexicon) throw Error(ErrorCode::InvalidArgument, "make_task requires a lexicon");
  std::vector<std::vector<std::string>> scene;
  for (const auto& s : scene_text) scene.push_back(split_whitespace(s));

  const std::size_t entries = std::count_if(scene.begin(), scene.end(), [](const auto& w) { return !w.empty(); });
  if (type != TaskType::Addition && entries == 0)
    throw Error(ErrorCode::InsufficientSceneText, std::string(to_string(type)) + " needs scene text");
  if (type == TaskType::Hybrid && entries < 2)
    throw Error(ErrorCode::InsufficientSceneText, "hybrid needs two distinct scene entries");

  for (int attempt = 0; attempt < options.max_attempts; ++attempt) {
    std::vector<EditOperation> ops;
    std::set<std::size_t> used;
    bool ok = true;
    auto take = [&]() -> std::optional<Target> {
      auto t = pick_target(scene, used, options.p_in_context, rng);
      if (t) used.insert(t->entry);
      else ok = false;
      return t;
    };

    const int k = std::max(1, rng.uniform_int(1, std::max(1, options.max_targets)));
    switch (type) {
      case TaskType::Addition:
        for (int i = 0; i < k; ++i) ops.push_back(EditOperation::add(fresh_text(corpus, rng, "")));
        break;
      case TaskType::Removal:
        for (int i = 0; i < k && static_cast<std::size_t>(i) < entries; ++i)
          if (auto t = take()) ops.push_back(EditOperation::remove(t->text, t->mode));
        break;
      case TaskType::Replacement:
        for (int i = 0; i < k && static_cast<std::size_t>(i) < entries; ++i)
          if (auto t = take()) ops.push_back(EditOperation::replace(t->text, fresh_text(corpus, rng, t->text), t->mode));
        break;
      case TaskType::Hybrid: {
        auto rem = take();
        auto rep = take();
        if (!ok) break;
        ops.push_back(EditOperation::remove(rem->text, rem->mode));
        ops.push_back(EditOperation::replace(rep->text, fresh_text(corpus, rng, rep->text), rep->mode));
        ops.push_back(EditOperation::add(fresh_text(corpus, rng, "")));
        break;
      }
    }
    if (!ok || ops.empty()) continue;

    ops = in_application_order(std::move(ops));
    EditTask task;
    task.task_type = type;
    task.scene_text_before = scene_text;
    try {
      auto expected = expected_text_after_edit(scene_text, ops);
      task.expected_text_after = std::move(expected.text_after);
      task.n_edit = expected.n_edit;
    } catch (const Error& e) {
      if (e.code() == ErrorCode::AmbiguousTarget) continue;
      throw;
    }
    task.operations = std::move(ops);
    task.instruction = render_instruction(task.operations, bank, rng);
    validate_task(task);
    return task;
  }
  throw Error(ErrorCode::InsufficientSceneText,
              "could not draw unambiguous targets for " + std::string(to_string(type)));
}

}  // namespace textsculpt
