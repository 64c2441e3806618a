#include <atomic>
#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>
#include <thread>

#include "CLI11.hpp"
#include "separata/calculus.hpp"
#include "separata/corpus.hpp"
#include "separata/oracle.hpp"
#include "separata/search.hpp"

using namespace separata;

namespace {

constexpr int kExitError = 3;

struct SearchFlags {
  SearchLimits lim;
  SearchOptions opt;
  bool no_backjump = false;
  bool no_heuristic = false;

  void add(CLI::App& app) {
    app.add_option("--max-rounds", lim.max_structural_rounds, "structural rounds per branch")->check(CLI::PositiveNumber);
    app.add_option("--max-apps", lim.max_branch_rule_apps, "rule applications per branch")->check(CLI::PositiveNumber);
    app.add_option("--timeout-ms", lim.wall_clock_ms, "wall-clock budget per formula")->check(CLI::PositiveNumber);
    app.add_flag("--no-backjump", no_backjump, "explore every premise");
    app.add_flag("--no-heuristic", no_heuristic, "try atoms oldest first");
  }
  SearchOptions options() const { return {!no_backjump, !no_heuristic}; }
};

std::string read_file(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw std::runtime_error("cannot read " + path);
  std::ostringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

void print_stats(const Verdict& v) {
  std::cout << "rule applications: " << v.stats.rule_apps << "\n"
            << "branches: " << v.stats.branches << "\n"
            << "backjumps: " << v.stats.backjumps << "\n"
            << "time ms: " << v.stats.elapsed_ms << "\n";
}

int cmd_prove(const std::string& logic, const std::string& text, const SearchFlags& flags,
              const std::string& proof_mode, const std::string& proof_out, unsigned cm_size) {
  LogicConfig cfg = LogicConfig::parse(logic);
  Formula f = parse(text);
  Verdict v = prove(f, cfg, flags.lim, flags.options());
  std::cout << "formula: " << print(f) << "\n"
            << "logic: " << cfg.name() << "\n"
            << "verdict: " << to_string(v.kind) << "\n";
  if (v.kind == VerdictKind::ResourceExhausted) std::cout << "limit: " << to_string(v.limit) << "\n";
  print_stats(v);
  if (v.kind == VerdictKind::Valid) {
    if (!proof_mode.empty() || !proof_out.empty()) {
      std::cout << "proof nodes: " << derivation_size(*v.proof) << "\n";
      // Round-trip through the serialized form before showing anything.
      std::string json = to_json(*v.proof, cfg);
      auto [back, back_cfg] = from_json(json);
      CheckResult cr = check(*back, back_cfg);
      if (!cr) throw std::logic_error("derivation failed re-check: " + cr.message);
      std::cout << "proof check: ok\n";
      if (proof_mode == "text") std::cout << to_text(*v.proof, cfg);
      if (proof_mode == "tree") std::cout << json << "\n";
      if (!proof_out.empty()) {
        std::ofstream out(proof_out);
        if (!out) throw std::runtime_error("cannot write " + proof_out);
        out << json << "\n";
      }
    }
    return 0;
  }
  if (v.kind == VerdictKind::NotProved) {
    if (v.open_branch) std::cout << "open branch (unverified candidate): " << to_string(*v.open_branch) << "\n";
    if (cm_size > 0) {
      if (auto cm = find_countermodel(f, cm_size, cfg)) {
        std::cout << "countermodel at world " << cm->world << ":\n" << to_text(cm->model);
      } else {
        std::cout << "no countermodel up to " << cm_size << " worlds\n";
      }
    }
    return 1;
  }
  return 2;
}

struct Row {
  VerdictKind kind = VerdictKind::NotProved;
  std::uint64_t ms = 0;
  std::string error;
};

bool matches(Expected e, const Row& r) {
  if (!r.error.empty()) return false;
  return e == Expected::Valid ? r.kind == VerdictKind::Valid : r.kind != VerdictKind::Valid;
}

int cmd_bench(const std::string& path, const SearchFlags& flags, unsigned jobs) {
  std::vector<CorpusEntry> rows = load_corpus(path);
  std::vector<Row> results(rows.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i; (i = next++) < rows.size();) {
      try {
        Verdict v = prove(parse(rows[i].formula), LogicConfig::parse(rows[i].cfg), flags.lim, flags.options());
        results[i] = {v.kind, v.stats.elapsed_ms, ""};
      } catch (const std::exception& e) {
        results[i].error = e.what();
      }
    }
  };
  std::vector<std::thread> pool;
  for (unsigned t = 1; t < std::max(1u, jobs); ++t) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();

  int mismatches = 0;
  std::cout << std::left << std::setw(22) << "id" << std::setw(12) << "logic" << std::setw(16) << "expected"
            << std::setw(19) << "verdict" << std::right << std::setw(10) << "ms" << std::setw(10) << "ref s"
            << "  status\n";
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const Row& r = results[i];
    bool ok = matches(rows[i].expected, r);
    if (!ok) ++mismatches;
    std::ostringstream ref;
    if (rows[i].reference_seconds) ref << *rows[i].reference_seconds;
    else ref << "-";
    std::cout << std::left << std::setw(22) << rows[i].id << std::setw(12) << rows[i].cfg << std::setw(16)
              << to_string(rows[i].expected) << std::setw(19) << (r.error.empty() ? to_string(r.kind) : "error")
              << std::right << std::setw(10) << r.ms << std::setw(10) << ref.str() << "  " << (ok ? "ok" : "MISMATCH");
    if (!r.error.empty()) std::cout << " (" << r.error << ")";
    std::cout << "\n";
  }
  std::cout << (rows.size() - mismatches) << "/" << rows.size() << " rows match\n";
  return mismatches == 0 ? 0 : 1;
}

int cmd_check_model(const std::string& logic, const std::string& model_path, const std::string& text,
                    const std::string& world_text) {
  LogicConfig cfg = LogicConfig::parse(logic);
  FrameModel m = parse_model(read_file(model_path));
  if (auto bad = condition_violation(m, cfg)) {
    std::cerr << "model is not a " << cfg.name() << " frame: " << *bad << "\n";
    return kExitError;
  }
  World w = m.eps;
  if (!world_text.empty() && world_text != "eps") {
    std::size_t used = 0;
    unsigned long n = std::stoul(world_text, &used);
    if (used != world_text.size() || n >= m.size) throw std::runtime_error("bad world '" + world_text + "'");
    w = static_cast<World>(n);
  }
  bool r = eval(m, w, parse(text));
  std::cout << (r ? "true" : "false") << "\n";
  return r ? 0 : 1;
}

int cmd_check_proof(const std::string& path) {
  auto [d, cfg] = from_json(read_file(path));
  CheckResult cr = check(*d, cfg);
  if (cr) {
    std::cout << "ok (" << cfg.name() << ", " << derivation_size(*d) << " nodes)\n";
    return 0;
  }
  std::cout << "invalid at [";
  for (std::size_t i = 0; i < cr.path.size(); ++i) std::cout << (i ? "," : "") << cr.path[i];
  std::cout << "]: " << cr.message << "\n";
  return 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Labelled sequent prover for abstract separation logics"};
  app.require_subcommand(1);
  if (const char* seed = std::getenv("SEPARATA_SEED")) std::cerr << "seed: " << seed << " (search is deterministic)\n";

  std::string logic = "pasl+d", formula, proof_mode, proof_out, path, world;
  unsigned cm_size = 0, jobs = 1;
  SearchFlags flags;

  auto* prove_cmd = app.add_subcommand("prove", "search for a proof of one formula");
  prove_cmd->add_option("--logic", logic, "preset such as bbi, pasl+d or separata+");
  flags.add(*prove_cmd);
  prove_cmd->add_option("--proof", proof_mode, "print the derivation")->check(CLI::IsMember({"text", "tree"}));
  prove_cmd->add_option("--proof-out", proof_out, "write the derivation as JSON");
  prove_cmd->add_option("--countermodel-search", cm_size, "on failure, look for a countermodel up to N worlds");
  prove_cmd->add_option("formula", formula)->required();

  SearchFlags bench_flags;
  auto* bench_cmd = app.add_subcommand("bench", "run a corpus file");
  bench_flags.add(*bench_cmd);
  bench_cmd->add_option("--jobs", jobs, "rows run in parallel")->check(CLI::PositiveNumber);
  bench_cmd->add_option("corpus", path)->required();

  std::string model_logic = "bbi";
  auto* model_cmd = app.add_subcommand("check-model", "evaluate a formula in a finite model");
  model_cmd->add_option("--logic", model_logic, "frame conditions the model must satisfy");
  model_cmd->add_option("--world", world, "world to evaluate at (default eps)");
  model_cmd->add_option("model", path)->required();
  model_cmd->add_option("formula", formula)->required();

  auto* proof_cmd = app.add_subcommand("check-proof", "re-check a JSON derivation");
  proof_cmd->add_option("proof", path)->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int rc = app.exit(e);
    return rc == 0 ? 0 : kExitError;
  }

  try {
    if (*prove_cmd) return cmd_prove(logic, formula, flags, proof_mode, proof_out, cm_size);
    if (*bench_cmd) return cmd_bench(path, bench_flags, jobs);
    if (*model_cmd) return cmd_check_model(model_logic, path, formula, world);
    if (*proof_cmd) return cmd_check_proof(path);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitError;
  }
  return kExitError;
}
