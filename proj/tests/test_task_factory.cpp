#include <gtest/gtest.h>

#include <algorithm>
#include <sstream>

#include "test_support.hpp"
#include "textsculpt/error.hpp"
#include "textsculpt/task_factory.hpp"

using namespace textsculpt;

namespace {

using Strings = std::vector<std::string>;

ErrorCode code_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no error thrown";
  return ErrorCode::Io;
}

const Lexicon& lexicon() {
  static const auto lex = load_lexicon(tstest::data_dir() / "lexicon" / "words.txt");
  return lex;
}

CorpusSource corpus() { return {&lexicon(), {}, {1, 3}}; }

// Word-splice oracle written independently of apply_operations: one op at a
// time, in the documented remove → replace → add order.
Strings splice_oracle(Strings scene, const std::vector<EditOperation>& ops) {
  std::vector<Strings> entries;
  for (const auto& s : scene) entries.push_back(split_whitespace(s));
  std::vector<bool> alive(entries.size(), true);
  for (OpKind kind : {OpKind::Remove, OpKind::Replace, OpKind::Add}) {
    for (const auto& op : ops) {
      if (op.kind != kind) continue;
      if (kind == OpKind::Add) {
        entries.push_back(split_whitespace(op.new_text));
        alive.push_back(true);
        continue;
      }
      const auto needle = split_whitespace(op.target_text);
      for (std::size_t e = 0; e < entries.size(); ++e) {
        if (!alive[e]) continue;
        auto& w = entries[e];
        auto it = std::search(w.begin(), w.end(), needle.begin(), needle.end());
        if (it == w.end()) continue;
        const auto pos = it - w.begin();
        w.erase(w.begin() + pos, w.begin() + pos + static_cast<std::ptrdiff_t>(needle.size()));
        if (kind == OpKind::Replace) {
          const auto rep = split_whitespace(op.new_text);
          w.insert(w.begin() + pos, rep.begin(), rep.end());
        }
        if (w.empty()) alive[e] = false;
        break;
      }
    }
  }
  Strings out;
  for (std::size_t e = 0; e < entries.size(); ++e)
    if (alive[e]) out.push_back(join_words(entries[e]));
  return out;
}

int recount(const std::vector<EditOperation>& ops) {
  int n = 0;
  for (const auto& op : ops) {
    std::istringstream in(op.kind == OpKind::Remove ? op.target_text : op.new_text);
    for (std::string w; in >> w;) ++n;
  }
  return n;
}

}  // namespace

TEST(ExpectedText, RemoveOnlyEntry) {
  const auto e = expected_text_after_edit({"SALE"}, {EditOperation::remove("SALE")});
  EXPECT_TRUE(e.text_after.empty());
  EXPECT_EQ(e.n_edit, 1);
}

TEST(ExpectedText, ReplaceWholeEntry) {
  const std::vector<EditOperation> ops{EditOperation::replace("OPEN", "CLOSED")};
  const auto e = expected_text_after_edit({"OPEN", "Cafe Mira"}, ops);
  EXPECT_EQ(e.text_after, (Strings{"CLOSED", "Cafe Mira"}));
  EXPECT_EQ(e.text_after, splice_oracle({"OPEN", "Cafe Mira"}, ops));
  EXPECT_EQ(e.n_edit, 1);
}

TEST(ExpectedText, HybridGrandOpening) {
  const std::vector<EditOperation> ops{EditOperation::remove("OPENING", EditMode::InContext),
                                       EditOperation::replace("SALE", "EVENT", EditMode::InContext),
                                       EditOperation::add("July 4")};
  const auto e = expected_text_after_edit({"GRAND OPENING SALE"}, ops);
  EXPECT_EQ(e.text_after, (Strings{"GRAND EVENT", "July 4"}));
  EXPECT_EQ(e.text_after, splice_oracle({"GRAND OPENING SALE"}, ops));
  EXPECT_EQ(e.n_edit, 4);
}

TEST(ExpectedText, AmbiguousTargets) {
  EXPECT_EQ(code_of([] { expected_text_after_edit({"SALE", "BIG SALE"}, {EditOperation::remove("SALE")}); }),
            ErrorCode::AmbiguousTarget);
  EXPECT_EQ(code_of([] { expected_text_after_edit({"OPEN"}, {EditOperation::remove("CLOSED")}); }),
            ErrorCode::AmbiguousTarget);
  // Whole-word matching: "OPEN" is not a word of "OPENING".
  EXPECT_EQ(code_of([] { expected_text_after_edit({"OPENING"}, {EditOperation::remove("OPEN")}); }),
            ErrorCode::AmbiguousTarget);
}

TEST(ExpectedText, OutcomesTrackSourceEntries) {
  const auto out = apply_operations({"A B", "C", "D"}, {EditOperation::remove("C"), EditOperation::add("E")});
  ASSERT_EQ(out.size(), 4u);
  EXPECT_FALSE(out[0].changed());
  EXPECT_TRUE(out[1].changed());
  EXPECT_FALSE(out[1].after.has_value());
  EXPECT_FALSE(out[3].source_index.has_value());
  EXPECT_EQ(*out[3].after, "E");
}

TEST(MakeTask, AdditionOnEmptyScene) {
  Rng rng(1);
  const auto t = make_task(TaskType::Addition, {}, corpus(), TemplateBank::builtin(), rng);
  ASSERT_EQ(t.operations.size(), 1u);
  EXPECT_EQ(t.operations[0].kind, OpKind::Add);
  EXPECT_EQ(t.expected_text_after, (Strings{t.operations[0].new_text}));
  EXPECT_EQ(t.n_edit, static_cast<int>(split_whitespace(t.operations[0].new_text).size()));
}

TEST(MakeTask, HybridOnThreeEntryScene) {
  const Strings scene{"OPEN NOW", "Cafe Mira", "EST 1999"};
  for (int seed = 0; seed < 50; ++seed) {
    Rng rng(seed);
    const auto t = make_task(TaskType::Hybrid, scene, corpus(), TemplateBank::builtin(), rng);
    ASSERT_EQ(t.operations.size(), 3u);
    int add = 0, rem = 0, rep = 0;
    std::string rem_target, rep_target;
    for (const auto& op : t.operations) {
      if (op.kind == OpKind::Add) ++add;
      if (op.kind == OpKind::Remove) ++rem, rem_target = op.target_text;
      if (op.kind == OpKind::Replace) ++rep, rep_target = op.target_text;
    }
    EXPECT_EQ(add, 1);
    EXPECT_EQ(rem, 1);
    EXPECT_EQ(rep, 1);
    // Targets sit in distinct entries.
    auto entry_of = [&](const std::string& target) {
      for (std::size_t i = 0; i < scene.size(); ++i) {
        const auto w = split_whitespace(scene[i]), n = split_whitespace(target);
        if (std::search(w.begin(), w.end(), n.begin(), n.end()) != w.end()) return i;
      }
      return scene.size();
    };
    EXPECT_NE(entry_of(rem_target), entry_of(rep_target));
  }
}

TEST(MakeTask, InsufficientScene) {
  Rng rng(1);
  EXPECT_EQ(code_of([&] { make_task(TaskType::Hybrid, {"OPEN NOW"}, corpus(), TemplateBank::builtin(), rng); }),
            ErrorCode::InsufficientSceneText);
  EXPECT_EQ(code_of([&] { make_task(TaskType::Removal, {}, corpus(), TemplateBank::builtin(), rng); }),
            ErrorCode::InsufficientSceneText);
  EXPECT_EQ(code_of([&] { make_task(TaskType::Replacement, {"  "}, corpus(), TemplateBank::builtin(), rng); }),
            ErrorCode::InsufficientSceneText);
}

TEST(MakeTask, InContextReplacementSplice) {
  const std::vector<EditOperation> ops{EditOperation::replace("NOW", "TODAY", EditMode::InContext)};
  const auto e = expected_text_after_edit({"OPEN NOW"}, ops);
  EXPECT_EQ(e.text_after, (Strings{"OPEN TODAY"}));
  EXPECT_EQ(e.text_after, splice_oracle({"OPEN NOW"}, ops));

  // make_task with p_in_context = 1 only ever picks proper sub-spans.
  TaskOptions opts;
  opts.p_in_context = 1.0;
  for (int seed = 0; seed < 30; ++seed) {
    Rng rng(seed);
    const auto t = make_task(TaskType::Replacement, {"OPEN NOW"}, corpus(), TemplateBank::builtin(), rng, opts);
    ASSERT_EQ(t.operations.size(), 1u);
    EXPECT_EQ(t.operations[0].mode, EditMode::InContext);
    EXPECT_TRUE(t.operations[0].target_text == "OPEN" || t.operations[0].target_text == "NOW");
  }
}

TEST(MakeTask, Deterministic) {
  const Strings scene{"OPEN NOW", "Cafe Mira", "EST 1999"};
  for (auto type : kAllTaskTypes) {
    Rng a(5), b(5);
    EXPECT_EQ(make_task(type, scene, corpus(), TemplateBank::builtin(), a),
              make_task(type, scene, corpus(), TemplateBank::builtin(), b));
  }
}

TEST(Instruction, SingleTemplateForced) {
  const TemplateBank bank(Strings{R"(Remove the text "{t}".)"});
  Rng rng(1);
  EXPECT_EQ(render_instruction({EditOperation::remove("SALE")}, bank, rng), R"(Remove the text "SALE".)");
}

TEST(Instruction, ReplaceQuotesBothStrings) {
  Rng rng(2);
  for (int i = 0; i < 20; ++i) {
    const auto s = render_instruction({EditOperation::replace("OPEN", "CLOSED")}, TemplateBank::builtin(), rng);
    EXPECT_EQ(quoted_strings(s), (Strings{"OPEN", "CLOSED"}));
  }
}

TEST(Instruction, HybridHasThreeClausesInOrder) {
  const std::vector<EditOperation> ops{EditOperation::remove("OPENING"), EditOperation::replace("SALE", "EVENT"),
                                       EditOperation::add("July 4")};
  const auto bank = TemplateBank::load(tstest::data_dir() / "templates" / "instructions.txt");
  Rng rng(3);
  for (int i = 0; i < 30; ++i) {
    const auto s = render_instruction(ops, bank, rng);
    // Each clause contributes its own quoted strings; order follows the operations.
    EXPECT_EQ(quoted_strings(s), (Strings{"OPENING", "SALE", "EVENT", "July 4"})) << s;
    int sentences = 0;
    for (std::size_t p = 0; p < s.size(); ++p)
      if ((s[p] == '.' || s[p] == '!') && (p + 1 == s.size() || s[p + 1] == ' ')) ++sentences;
    EXPECT_EQ(sentences, 3) << s;
  }
}

TEST(Instruction, MissingTemplate) {
  const TemplateBank bank(Strings{R"(Remove the text "{t}".)"});
  Rng rng(1);
  EXPECT_EQ(code_of([&] { render_instruction({EditOperation::add("X")}, bank, rng); }), ErrorCode::MissingTemplate);
  EXPECT_THROW(TemplateBank(Strings{"no placeholder"}), Error);
  EXPECT_THROW(TemplateBank(Strings{"unquoted {t}"}), Error);
}

TEST(TaskProperties, RoundTripNEditFaithfulness) {
  const auto bank = TemplateBank::load(tstest::data_dir() / "templates" / "instructions.txt");
  TaskOptions opts;
  opts.max_targets = 2;
  Rng rng(99);
  for (int i = 0; i < 400; ++i) {
    Strings scene;
    const int entries = 2 + static_cast<int>(rng.below(3));
    for (int e = 0; e < entries; ++e) scene.push_back(sample_text(lexicon(), {}, {1, 4}, rng).text);
    const auto type = kAllTaskTypes[i % 4];
    EditTask t;
    try {
      t = make_task(type, scene, corpus(), bank, rng, opts);
    } catch (const Error& e) {
      ASSERT_EQ(e.code(), ErrorCode::InsufficientSceneText);
      continue;
    }
    EXPECT_NO_THROW(validate_task(t));
    EXPECT_EQ(expected_text_after_edit(t.scene_text_before, t.operations).text_after, t.expected_text_after);
    EXPECT_EQ(splice_oracle(t.scene_text_before, t.operations), t.expected_text_after);
    EXPECT_EQ(t.n_edit, recount(t.operations));

    Strings from_ops;
    for (const auto& op : t.operations) {
      if (!op.target_text.empty()) from_ops.push_back(op.target_text);
      if (!op.new_text.empty()) from_ops.push_back(op.new_text);
    }
    auto quoted = quoted_strings(t.instruction);
    std::sort(quoted.begin(), quoted.end());
    std::sort(from_ops.begin(), from_ops.end());
    EXPECT_EQ(quoted, from_ops) << t.instruction;

    if (type == TaskType::Hybrid) EXPECT_EQ(t.operations.size(), 3u);
  }
}

TEST(TaskFactory, ValidateTaskRejectsBrokenInvariants) {
  EditTask t;
  t.task_type = TaskType::Hybrid;
  t.scene_text_before = {"A B", "C"};
  t.operations = {EditOperation::remove("C"), EditOperation::add("X")};
  t.n_edit = 2;
  EXPECT_THROW(validate_task(t), Error);
  t.task_type = TaskType::Removal;
  t.operations = {EditOperation::remove("C", EditMode::InContext)};
  t.n_edit = 1;
  EXPECT_THROW(validate_task(t), Error);
  t.operations = {EditOperation::remove("C")};
  EXPECT_NO_THROW(validate_task(t));
  t.n_edit = 0;
  EXPECT_THROW(validate_task(t), Error);
}

TEST(TaskFactory, EnumStringsRoundTrip) {
  for (auto t : kAllTaskTypes) EXPECT_EQ(parse_task_type(to_string(t)), t);
  for (auto k : {OpKind::Add, OpKind::Replace, OpKind::Remove}) EXPECT_EQ(parse_op_kind(to_string(k)), k);
  EXPECT_EQ(parse_edit_mode("in_context"), EditMode::InContext);
  EXPECT_THROW(parse_task_type("deletion"), Error);
}
