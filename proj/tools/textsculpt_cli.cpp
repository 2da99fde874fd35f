#include <CLI11.hpp>

#include <cstdlib>
#include <iostream>

#include "textsculpt/harness.hpp"

namespace fs = std::filesystem;
using namespace textsculpt;

namespace {

constexpr int kOk = 0;
constexpr int kPartial = 1;
constexpr int kFatal = 2;

int cmd_forge(const fs::path& config, std::optional<std::uint64_t> seed, const fs::path& out,
              std::optional<int> count, std::optional<int> distractions, std::optional<int> threads) {
  ForgeConfig cfg = ForgeConfig::load(config);
  if (seed) cfg.seed = *seed;
  if (count) cfg.count = *count;
  if (distractions) cfg.distraction_count = *distractions;
  if (threads) cfg.threads = *threads;
  cfg.validate();
  const auto result = run_forge(cfg, out);
  std::cout << "wrote " << result.records.size() << " of " << cfg.count << " pairs to " << out.string() << "\n";
  for (const auto& f : result.failures) std::cerr << "  skipped " << f.sample_id << ": " << f.message << "\n";
  return result.exit_code;
}

int cmd_gate(const fs::path& manifest, const std::string& backend, const fs::path& clients) {
  std::optional<ClientConfig> cfg;
  const auto source = parse_ocr_source(backend);
  if (source != OcrSource::Echo) {
    if (clients.empty()) throw textsculpt::Error(ErrorCode::InvalidConfig, "--clients is required for the " + backend + " backend");
    cfg = EvalClients::load(clients).ocr;
  }
  const auto run = run_gate(manifest, source, cfg);
  int errors = 0;
  for (const auto& r : run.records)
    if (!r.error.empty()) {
      ++errors;
      std::cerr << "  " << r.sample_id << ": " << r.error << "\n";
    }
  std::cout << "retained " << run.retained << " of " << run.records.size() << " samples\n";
  return errors == 0 ? kOk : kPartial;
}

int cmd_eval(const fs::path& bench, const fs::path& edited, const fs::path& clients, const fs::path& out) {
  const auto cfg = EvalClients::load(clients);
  fs::create_directories(out);
  const auto run = run_eval(bench, edited, cfg, out);
  for (const auto& s : run.skipped) std::cerr << "  skipped " << s.item_id << ": " << s.message << "\n";
  std::cout << format_table(run.aggregate, run.manifest.at("run_id").get<std::string>());
  return run.exit_code;
}

int cmd_check_bench(const fs::path& bench, const fs::path& config) {
  std::optional<int> per_type;
  if (!config.empty()) per_type = BenchConfig::load(config).per_type;
  const auto report = validate_balance(read_benchmark(bench), per_type);
  std::cout << (report.balanced ? "balanced: " : "unbalanced: ") << report.message << "\n";
  return report.balanced ? kOk : kPartial;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"textsculpt: synthetic scene-text editing pairs and benchmark evaluation"};
  app.set_version_flag("--version", tool_version());
  app.require_subcommand(1);

  fs::path config, out, manifest, bench, edited, clients, run, forge_dir;
  std::optional<std::uint64_t> seed;
  std::optional<int> count, distractions, threads;
  std::string backend = "echo", format = "table", mode = "perfect";

  auto* forge = app.add_subcommand("forge", "Generate source/target editing pairs");
  forge->add_option("--config", config, "Forge config file")->required()->check(CLI::ExistingFile);
  forge->add_option("--seed", seed, "Global seed (overrides config and TEXTSCULPT_SEED)");
  forge->add_option("--out", out, "Output directory")->required();
  forge->add_option("--count", count, "Number of samples");
  forge->add_option("--distractions", distractions, "Distraction texts per pair")->check(CLI::NonNegativeNumber);
  forge->add_option("--threads", threads, "Worker threads (0 = all cores)")->check(CLI::NonNegativeNumber);

  auto* gate = app.add_subcommand("gate", "OCR quality gate over a forge manifest");
  gate->add_option("--manifest", manifest, "manifest.jsonl")->required()->check(CLI::ExistingFile);
  gate->add_option("--ocr-backend", backend, "echo, stub or remote")
      ->check(CLI::IsMember({"echo", "stub", "remote"}));
  gate->add_option("--clients", clients, "Client config (JSON) for stub/remote OCR");

  auto* eval = app.add_subcommand("eval", "Score edited images against a benchmark");
  eval->add_option("--bench", bench, "bench.jsonl")->required()->check(CLI::ExistingFile);
  eval->add_option("--edited-dir", edited, "Directory holding {item_id}.png")->required()->check(CLI::ExistingDirectory);
  eval->add_option("--clients", clients, "Client config (JSON)")->required()->check(CLI::ExistingFile);
  eval->add_option("--out", out, "Output directory for run.json")->required();

  auto* report = app.add_subcommand("report", "Print a run summary");
  report->add_option("--run", run, "run.json")->required()->check(CLI::ExistingFile);
  report->add_option("--format", format, "table or json")->check(CLI::IsMember({"table", "json"}));

  auto* derive = app.add_subcommand("derive-bench", "Build a benchmark from a forge run");
  derive->add_option("--forge-dir", forge_dir, "Forge output directory")->required()->check(CLI::ExistingDirectory);
  derive->add_option("--out", out, "Benchmark directory")->required();

  auto* simulate = app.add_subcommand("simulate-editor", "Emit edited images and stub fixtures from a forge run");
  simulate->add_option("--forge-dir", forge_dir, "Forge output directory")->required()->check(CLI::ExistingDirectory);
  simulate->add_option("--mode", mode, "perfect or identity")->check(CLI::IsMember({"perfect", "identity"}));
  simulate->add_option("--out", out, "Edited-image directory")->required();

  auto* check = app.add_subcommand("check-bench", "Validate per-type balance of a benchmark");
  check->add_option("--bench", bench, "bench.jsonl")->required()->check(CLI::ExistingFile);
  check->add_option("--config", config, "Benchmark config declaring per_type");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*forge) return cmd_forge(config, seed, out, count, distractions, threads);
    if (*gate) return cmd_gate(manifest, backend, clients);
    if (*eval) return cmd_eval(bench, edited, clients, out);
    if (*report) {
      std::cout << render_report(run, format == "json" ? ReportFormat::Json : ReportFormat::Table);
      return kOk;
    }
    if (*derive) {
      const auto items = derive_benchmark(forge_dir, out);
      std::cout << "wrote " << items.size() << " items to " << (out / "bench.jsonl").string() << "\n";
      return kOk;
    }
    if (*simulate) {
      simulate_editor(forge_dir, parse_editor_mode(mode), out);
      std::cout << "wrote " << mode << " edits to " << out.string() << "\n";
      return kOk;
    }
    if (*check) return cmd_check_bench(bench, config);
  } catch (const textsculpt::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kFatal;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kFatal;
  }
  return kFatal;
}
