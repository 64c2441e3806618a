// One PASS/FAIL line per acceptance criterion; exit status 1 if any fails.

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cstdio>
#include <functional>
#include <map>
#include <mutex>
#include <numeric>
#include <set>
#include <string>
#include <thread>
#include <vector>

#include "rule_soundness.hpp"
#include "separata/calculus.hpp"
#include "separata/corpus.hpp"
#include "separata/oracle.hpp"
#include "separata/search.hpp"
#include "separata/unify.hpp"
#include "support.hpp"

using namespace separata;
using namespace testing_support;

namespace {

struct Outcome {
  bool pass = true;
  std::string detail;
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

template <class F>
void parallel_for(std::size_t n, F f) {
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i; (i = next++) < n;) f(i);
  };
  unsigned k = std::max(1u, std::min<unsigned>(std::thread::hardware_concurrency(), 8));
  std::vector<std::thread> pool;
  for (unsigned t = 1; t < k; ++t) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();
}

std::vector<CorpusEntry> corpus(const std::string& name) {
  return load_corpus(std::string(SEPARATA_CORPUS_DIR) + "/" + name);
}

std::vector<CorpusEntry> full_corpus() {
  std::vector<CorpusEntry> all;
  for (const char* f : {"table1.corpus", "table2.corpus", "controls.corpus"}) {
    auto rows = corpus(f);
    all.insert(all.end(), rows.begin(), rows.end());
  }
  return all;
}

std::string formula_of(const std::vector<CorpusEntry>& rows, const std::string& id) {
  for (const auto& r : rows)
    if (r.id == id) return r.formula;
  throw std::runtime_error("no corpus row " + id);
}

struct Timed {
  Verdict v;
  double secs = 0;
};

Timed timed_prove(const std::string& text, const std::string& preset, SearchLimits lim = {}, SearchOptions opt = {}) {
  auto t0 = Clock::now();
  Verdict v = prove(parse(text), LogicConfig::parse(preset), lim, opt);
  return {std::move(v), seconds_since(t0)};
}

void fail(Outcome& o, const std::string& why) {
  o.pass = false;
  if (o.detail.size() < 600) o.detail += (o.detail.empty() ? "" : "; ") + why;
}

Outcome table1() {
  Outcome o;
  auto rows = corpus("table1.corpus");
  std::vector<std::pair<std::string, std::string>> jobs;  // id, preset
  for (int i = 1; i <= 17; ++i) {
    char id[8];
    std::snprintf(id, sizeof id, "t1-%02d", i);
    jobs.emplace_back(id, "pasl+d");
  }
  for (const char* p : {"bbi+p", "bbi+p+iu", "bbi+p+d", "pasl", "pasl+iu", "pasl+d", "separata+"})
    jobs.emplace_back("t1-18-pasl", p);
  for (const char* p : {"pasl+iu", "pasl+d"}) jobs.emplace_back("t1-19-pasl+d", p);
  double worst = 0;
  std::mutex mu;
  parallel_for(jobs.size(), [&](std::size_t i) {
    auto [id, preset] = jobs[i];
    Timed t = timed_prove(formula_of(rows, id), preset);
    std::lock_guard lock(mu);
    worst = std::max(worst, t.secs);
    if (t.v.kind != VerdictKind::Valid) fail(o, id + " under " + preset + ": " + to_string(t.v.kind));
    else if (t.secs >= 60) fail(o, id + " took " + std::to_string(t.secs) + "s");
  });
  if (o.pass) o.detail = std::to_string(jobs.size()) + " proofs, slowest " + std::to_string(worst) + "s";
  return o;
}

Outcome table2() {
  Outcome o;
  double worst = 0;
  for (const auto& r : corpus("table2.corpus")) {
    SearchLimits lim;
    lim.wall_clock_ms = 10000;
    Timed t = timed_prove(r.formula, "separata+", lim);
    worst = std::max(worst, t.secs);
    if (t.v.kind != VerdictKind::Valid) fail(o, r.id + ": " + to_string(t.v.kind));
    else if (t.secs >= 10) fail(o, r.id + " took " + std::to_string(t.secs) + "s");
  }
  if (o.pass) o.detail = "6 proofs, slowest " + std::to_string(worst) + "s";
  return o;
}

Outcome pin() {
  Outcome o;
  Timed t = timed_prove("emp -> ~((e1 |-> e2) -* ~(e1 |-> e2))", "separata+");
  if (t.v.kind == VerdictKind::Valid) fail(o, "returned Valid");
  else o.detail = std::string(to_string(t.v.kind)) + " after " + std::to_string(t.secs) + "s";
  return o;
}

Outcome negative_control() {
  Outcome o;
  Formula f = parse("(emp /\\ (a*b)) -> a");
  LogicConfig pasl = LogicConfig::pasl();
  auto cm = find_countermodel(f, 2, pasl);
  if (!cm) {
    fail(o, "no countermodel of size <= 2");
  } else {
    Model m{cm->model, {}, 1};
    if (cm->model.size > 2) fail(o, "countermodel has " + std::to_string(cm->model.size) + " worlds");
    if (!check_conditions(cm->model, pasl)) fail(o, "countermodel is not a pasl frame");
    if (forces(m, {}, cm->world, f)) fail(o, "independent evaluation says the formula holds");
  }
  Verdict v = prove(f, pasl);
  if (v.kind == VerdictKind::Valid) fail(o, "prove returned Valid");
  if (o.pass) o.detail = std::to_string(cm->model.size) + "-world countermodel; prove: " + to_string(v.kind);
  return o;
}

struct CorpusRun {
  std::vector<CorpusEntry> rows;
  std::vector<Verdict> base, no_backjump, no_heuristic;
};

CorpusRun run_corpus() {
  CorpusRun r;
  r.rows = full_corpus();
  std::size_t n = r.rows.size();
  r.base.resize(n);
  r.no_backjump.resize(n);
  r.no_heuristic.resize(n);
  parallel_for(3 * n, [&](std::size_t k) {
    const auto& row = r.rows[k % n];
    SearchOptions opt;
    auto* out = &r.base;
    if (k / n == 1) opt.backjump = false, out = &r.no_backjump;
    if (k / n == 2) opt.heuristic = false, out = &r.no_heuristic;
    (*out)[k % n] = prove(parse(row.formula), LogicConfig::parse(row.cfg), {}, opt);
  });
  return r;
}

Outcome proof_round_trip(const CorpusRun& r) {
  Outcome o;
  int checked = 0;
  for (const auto* vs : {&r.base, &r.no_backjump, &r.no_heuristic})
    for (std::size_t i = 0; i < r.rows.size(); ++i) {
      const Verdict& v = (*vs)[i];
      if (v.kind != VerdictKind::Valid) continue;
      ++checked;
      LogicConfig cfg = LogicConfig::parse(r.rows[i].cfg);
      if (!v.proof) {
        fail(o, r.rows[i].id + ": Valid without a derivation");
        continue;
      }
      if (auto c = check(*v.proof, cfg); !c) fail(o, r.rows[i].id + ": " + c.message);
      auto [back, back_cfg] = from_json(to_json(*v.proof, cfg));
      if (!(back_cfg == cfg) || !check(*back, back_cfg)) fail(o, r.rows[i].id + ": JSON round trip fails check");
    }
  if (o.pass) o.detail = std::to_string(checked) + " derivations checked, 0 failures";
  return o;
}

Outcome neutrality(const CorpusRun& r) {
  Outcome o;
  for (std::size_t i = 0; i < r.rows.size(); ++i) {
    VerdictKind k = r.base[i].kind;
    if (r.no_backjump[i].kind != k)
      fail(o, r.rows[i].id + ": " + to_string(k) + " vs " + to_string(r.no_backjump[i].kind) + " without backjumping");
    if (r.no_heuristic[i].kind != k)
      fail(o, r.rows[i].id + ": " + to_string(k) + " vs " + to_string(r.no_heuristic[i].kind) + " without the heuristic");
  }
  if (o.pass) o.detail = std::to_string(r.rows.size()) + " rows agree in all three modes";
  return o;
}

Outcome differential() {
  Outcome o;
  auto t0 = Clock::now();
  Rng rng(20261018);
  std::vector<Formula> fs;
  for (int i = 0; i < 500; ++i) fs.push_back(random_formula(rng, {"a", "b"}, 4));
  LogicConfig pasl = LogicConfig::pasl();
  std::atomic<int> valid{0}, exhausted{0};
  std::mutex mu;
  parallel_for(fs.size(), [&](std::size_t i) {
    SearchLimits lim;
    lim.wall_clock_ms = 10000;
    Verdict v = prove(fs[i], pasl, lim);
    if (v.kind == VerdictKind::ResourceExhausted) ++exhausted;
    if (v.kind != VerdictKind::Valid) return;
    ++valid;
    if (auto cm = find_countermodel(fs[i], 3, pasl)) {
      std::lock_guard lock(mu);
      fail(o, "Valid but refuted: " + print(fs[i]));
    }
  });
  double secs = seconds_since(t0);
  if (secs >= 600) fail(o, "took " + std::to_string(secs) + "s");
  if (o.pass)
    o.detail = std::to_string(valid.load()) + "/500 Valid, none refuted by 3-world frames; " +
               std::to_string(exhausted.load()) + " exhausted; " + std::to_string(secs) + "s";
  return o;
}

Outcome rule_soundness() {
  Outcome o;
  std::vector<RuleSoundness> res(kRuleCount);
  parallel_for(kRuleCount, [&](std::size_t i) { res[i] = check_rule_soundness(static_cast<RuleId>(i), 1000, 7919 * (i + 1)); });
  long falsified = 0, trials = 0;
  for (int i = 0; i < kRuleCount; ++i) {
    falsified += res[i].falsified;
    trials += res[i].trials;
    if (res[i].violations > 0 || !res[i].problem.empty())
      fail(o, std::string(rule_name(static_cast<RuleId>(i))) + ": " + std::to_string(res[i].violations) +
                  " violations, " + res[i].problem);
  }
  if (o.pass)
    o.detail = std::to_string(kRuleCount) + " rules, " + std::to_string(trials) + " instances, " +
               std::to_string(falsified) + " falsified conclusions, 0 violations";
  return o;
}

// Equivalence classes of the labels of s after normalizing in `order`.
std::vector<std::uint32_t> partition(const Sequent& s, const LogicConfig& cfg, const ScanOrder& order,
                                     bool& idempotent) {
  NormResult r = normalize(s, cfg, order);
  NormResult again = normalize(r.sequent, cfg, order);
  idempotent = again.applied.empty() && again.sequent == r.sequent;
  std::vector<Label> ls = labels_of(s);
  std::vector<std::uint32_t> cls;
  for (Label a : ls) {
    Label ra = representative(r.applied, a);
    std::uint32_t c = 0;
    while (c < cls.size() && representative(r.applied, ls[cls[c]]) != ra) ++c;
    cls.push_back(c < cls.size() ? cls[c] : static_cast<std::uint32_t>(cls.size()));
  }
  return cls;
}

Outcome unification() {
  Outcome o;
  Rng rng(424242);
  int bad_idem = 0, bad_order = 0, merged = 0;
  for (int i = 0; i < 10000; ++i) {
    LogicConfig cfg;
    cfg.partial_determinism = coin(rng);
    cfg.cancellativity = coin(rng);
    cfg.indivisible_unit = coin(rng);
    cfg.disjointness = coin(rng);
    std::uint32_t nl = static_cast<std::uint32_t>(1 + pick(rng, 12));
    std::size_t na = pick(rng, 21);
    Sequent s;
    auto lab = [&] { return Label::var(static_cast<std::uint32_t>(pick(rng, nl))); };
    for (std::size_t k = 0; k < na; ++k) s.add_rel({lab(), lab(), lab()});
    for (int k = 0; k < 2; ++k) s.add_formula(coin(rng) ? Side::Left : Side::Right, {lab(), Formula::prop("p")});
    bool idem = true;
    auto base = partition(s, cfg, kDefaultScanOrder, idem);
    if (!idem) ++bad_idem;
    if (std::set<std::uint32_t>(base.begin(), base.end()).size() < base.size()) ++merged;
    for (int k = 0; k < 3; ++k) {
      ScanOrder order = kDefaultScanOrder;
      std::shuffle(order.begin(), order.end(), rng);
      auto other = partition(s, cfg, order, idem);
      if (!idem) ++bad_idem;
      if (other != base) ++bad_order;
    }
  }
  if (bad_idem) fail(o, std::to_string(bad_idem) + " non-idempotent normalizations");
  if (bad_order) fail(o, std::to_string(bad_order) + " scan orders changed the partition");
  if (o.pass)
    o.detail = "10000 sequents x 4 scan orders; " + std::to_string(merged) + " with merged labels";
  return o;
}

Outcome axioms() {
  Outcome o;
  for (auto [f, p] : {std::pair{"(emp /\\ (a*b)) -> a", "bbi+iu"}, std::pair{"(emp /\\ (a*b)) -> a", "bbi+d"},
                      std::pair{"~emp -> (~emp * ~emp)", "bbi+s"}}) {
    Verdict v = prove(parse(f), LogicConfig::parse(p));
    if (v.kind != VerdictKind::Valid) fail(o, std::string(f) + " under " + p + ": " + to_string(v.kind));
  }
  if (o.pass) o.detail = "3 proofs";
  return o;
}

}  // namespace

int main() {
  int failures = 0;
  auto report = [&](int n, const char* name, const std::function<Outcome()>& fn) {
    auto t0 = Clock::now();
    Outcome o;
    try {
      o = fn();
    } catch (const std::exception& e) {
      o.pass = false;
      o.detail = std::string("exception: ") + e.what();
    }
    if (!o.pass) ++failures;
    std::printf("%s criterion %d (%s): %s [%.1fs]\n", o.pass ? "PASS" : "FAIL", n, name, o.detail.c_str(),
                seconds_since(t0));
    std::fflush(stdout);
  };
  report(1, "abstract benchmark verdicts", table1);
  report(2, "heap benchmark verdicts", table2);
  report(3, "incompleteness pin", pin);
  report(4, "countermodel control", negative_control);
  CorpusRun run;
  auto t0 = Clock::now();
  run = run_corpus();
  std::printf("(full corpus in three search modes: %.1fs)\n", seconds_since(t0));
  report(5, "derivations re-check", [&] { return proof_round_trip(run); });
  report(6, "prover vs oracle on random formulas", differential);
  report(7, "rule soundness", rule_soundness);
  report(8, "normalization properties", unification);
  report(9, "search options keep verdicts", [&] { return neutrality(run); });
  report(10, "extension axioms", axioms);
  return failures == 0 ? 0 : 1;
}
