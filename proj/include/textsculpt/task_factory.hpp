#pragma once

#include <filesystem>
#include <istream>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "textsculpt/rng.hpp"
#include "textsculpt/text_corpus.hpp"

namespace textsculpt {

enum class OpKind { Add, Replace, Remove };
enum class EditMode { Whole, InContext };
enum class TaskType { Addition, Removal, Replacement, Hybrid };

inline constexpr TaskType kAllTaskTypes[] = {TaskType::Addition, TaskType::Removal, TaskType::Replacement,
                                             TaskType::Hybrid};

std::string_view to_string(OpKind k);
std::string_view to_string(EditMode m);
std::string_view to_string(TaskType t);
OpKind parse_op_kind(std::string_view s);
EditMode parse_edit_mode(std::string_view s);
TaskType parse_task_type(std::string_view s);

struct EditOperation {
  OpKind kind = OpKind::Add;
  std::string target_text;  // empty for Add
  std::string new_text;     // empty for Remove
  EditMode mode = EditMode::Whole;

  static EditOperation add(std::string text) { return {OpKind::Add, "", std::move(text), EditMode::Whole}; }
  static EditOperation remove(std::string target, EditMode m = EditMode::Whole) {
    return {OpKind::Remove, std::move(target), "", m};
  }
  static EditOperation replace(std::string target, std::string text, EditMode m = EditMode::Whole) {
    return {OpKind::Replace, std::move(target), std::move(text), m};
  }

  /// Words this operation contributes to N_edit.
  int edit_words() const;
  bool operator==(const EditOperation&) const = default;
};

struct EditTask {
  TaskType task_type = TaskType::Addition;
  std::vector<EditOperation> operations;
  std::string instruction;
  std::vector<std::string> scene_text_before;
  std::vector<std::string> expected_text_after;
  int n_edit = 0;

  bool operator==(const EditTask&) const = default;
};

/// Throws InvalidArgument when the task breaks an EditTask/EditOperation invariant.
void validate_task(const EditTask& task);

/// Fate of one scene entry under a list of operations.
struct EntryOutcome {
  std::optional<std::size_t> source_index;  // empty for added entries
  std::string before;                       // empty for added entries
  std::optional<std::string> after;         // empty when the entry was removed entirely

  bool changed() const { return !source_index || !after || *after != before; }
};

/// Applies operations (remove, then replace, then add; stable within a kind)
/// and reports what became of each entry. Output order: surviving scene
/// entries in scene order, then added entries. Throws AmbiguousTarget.
std::vector<EntryOutcome> apply_operations(const std::vector<std::string>& scene_text,
                                           const std::vector<EditOperation>& operations);

struct ExpectedEdit {
  std::vector<std::string> text_after;
  int n_edit = 0;
};

ExpectedEdit expected_text_after_edit(const std::vector<std::string>& scene_text,
                                      const std::vector<EditOperation>& operations);

/// Instruction templates keyed by the placeholders they use:
/// `{t}` only → remove, `{n}` only → add, both → replace.
class TemplateBank {
 public:
  TemplateBank() = default;
  explicit TemplateBank(const std::vector<std::string>& templates);

  static TemplateBank load(std::istream& in);
  static TemplateBank load(const std::filesystem::path& path);
  static TemplateBank builtin();

  const std::vector<std::string>& templates_for(OpKind k) const;

 private:
  std::vector<std::string> add_, replace_, remove_;
};

/// One clause per operation, joined by single spaces. Throws MissingTemplate.
std::string render_instruction(const std::vector<EditOperation>& operations, const TemplateBank& bank, Rng& rng);

/// Extracts the double-quoted substrings of an instruction, in order.
std::vector<std::string> quoted_strings(const std::string& instruction);

struct CorpusSource {
  const Lexicon* lexicon = nullptr;
  AugmentationPolicy policy;
  IntRange length_range{1, 3};
};

struct TaskOptions {
  double p_in_context = 0.5;
  int max_targets = 1;  // per non-hybrid task
  int max_attempts = 32;
};

EditTask make_task(TaskType type, const std::vector<std::string>& scene_text, const CorpusSource& corpus,
                   const TemplateBank& bank, Rng& rng, const TaskOptions& options = {});

}  // namespace textsculpt
