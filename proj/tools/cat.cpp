// Command-line front end: explain, evaluate, compare, train.
//
// Exit codes: 0 success, 2 when some instance had no contrast, 1 for
// configuration or I/O errors.

#include <fstream>
#include <iomanip>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "cat/cat.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitError = 1;
constexpr int kExitNoContrast = 2;

struct ExplainArgs {
  std::string input;
  std::string config;
  std::string out;
  std::optional<std::string> attribution;
  std::optional<bool> early_exit;
  std::optional<std::size_t> beam_k;
  std::optional<std::size_t> budget;
  std::optional<std::size_t> jobs;
};

cat::RunConfig config_with_overrides(const std::string& path) {
  cat::RunConfig c = cat::load_config(path);
  cat::apply_env_overrides(c);
  return c;
}

int run_explain(const ExplainArgs& a) {
  cat::RunConfig c = config_with_overrides(a.config);
  if (a.attribution) c.attribution = cat::parse_attribution(*a.attribution);
  if (a.early_exit) c.params.early_exit = *a.early_exit;
  if (a.beam_k) c.params.beam_k = *a.beam_k;
  if (a.budget) c.params.edit_budget = *a.budget;
  if (a.jobs) c.jobs = *a.jobs;
  c.params.validate();

  const cat::Backends backends = cat::load_backends(c, cat::BackendNeeds::explain);
  std::vector<cat::DatasetRecord> records;
  const std::string input = a.input.empty() ? c.input : a.input;
  if (input.empty()) throw cat::Error(cat::Errc::config_error, "no input: pass --input or set 'input'");
  if (input == "-") {
    records = cat::load_dataset(std::cin, "<stdin>");
  } else {
    records = cat::load_dataset(a.input.empty() ? c.resolve(input) : input);
  }
  records = cat::sample_records(records, c.sample_size, c.params.seed);

  if (c.attribution == cat::AttributionMethod::integrated_gradients && !backends.classifier->gradients())
    std::cerr << "warning: classifier exposes no gradients; falling back to occlusion attribution\n";

  cat::ExplainSummary s;
  if (a.out.empty() || a.out == "-") {
    s = cat::run_explain(c, backends, records, std::cout);
  } else {
    std::ostringstream buf;
    s = cat::run_explain(c, backends, records, buf);
    cat::write_file(a.out, buf.str());
  }
  std::cerr << "explained " << records.size() << " instance(s): " << s.ok << " ok, " << s.no_contrast
            << " no_contrast (config " << cat::config_hash(c) << ", seed " << c.params.seed << ")\n";
  return s.no_contrast ? kExitNoContrast : kExitOk;
}

int run_evaluate(const std::string& explanations, const std::string& config, const std::string& format) {
  const cat::RunConfig c = config_with_overrides(config);
  const cat::Backends backends = cat::load_backends(c, cat::BackendNeeds::evaluate);
  const auto records = cat::metric_records(cat::load_contrast_pairs(explanations), &backends);
  const auto report = cat::aggregate(records);
  if (format != "json") std::cout << cat::report_table({{"CAT", report}});
  if (format != "table") {
    cat::Json j = cat::report_json(report);
    j["seed"] = c.params.seed;
    j["config_hash"] = cat::config_hash(c);
    std::cout << cat::dump_exact(j) << "\n";
  }
  return kExitOk;
}

int run_compare(const std::string& a, const std::string& b, const std::string& config, bool welch,
                const std::string& format) {
  std::optional<cat::RunConfig> c;
  std::optional<cat::Backends> backends;
  if (!config.empty()) {
    c = config_with_overrides(config);
    backends = cat::load_backends(*c, cat::BackendNeeds::evaluate);
  }
  const cat::Backends* bp = backends ? &*backends : nullptr;
  const auto ra = cat::metric_records(cat::load_contrast_pairs(a), bp);
  const auto rb = cat::metric_records(cat::load_contrast_pairs(b), bp);
  const auto report = cat::compare(ra, rb, welch ? cat::TestKind::welch : cat::TestKind::paired);
  if (format != "json") std::cout << cat::comparison_table(report);
  if (format != "table") {
    cat::Json j = cat::comparison_json(report);
    if (c) {
      j["seed"] = c->params.seed;
      j["config_hash"] = cat::config_hash(*c);
    }
    std::cout << cat::dump_exact(j) << "\n";
  }
  return kExitOk;
}

int run_train(const std::string& config, const std::string& target) {
  const cat::RunConfig c = config_with_overrides(config);
  const auto rep = cat::run_train(c, cat::parse_train_target(target));
  std::cout << "wrote " << rep.checkpoint << " (" << rep.detail << ")\n";
  if (rep.heldout_accuracy) std::cout << "held-out accuracy: " << std::fixed << std::setprecision(4) << *rep.heldout_accuracy << "\n";
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Contrastive attributed explanations for text classifiers"};
  app.require_subcommand(1);

  ExplainArgs ex;
  auto* explain = app.add_subcommand("explain", "generate contrastive explanations (JSONL)");
  explain->add_option("--input", ex.input, "dataset JSONL (id/text/label), or - for stdin");
  explain->add_option("--config", ex.config, "run config")->required();
  explain->add_option("--out", ex.out, "output JSONL (default stdout)");
  explain->add_option("--attribution", ex.attribution, "ig or occlusion")->check(CLI::IsMember({"ig", "occlusion"}));
  explain->add_flag_callback("--early-exit", [&] { ex.early_exit = true; }, "stop at the first flipping round");
  explain->add_flag_callback("--no-early-exit", [&] { ex.early_exit = false; }, "search the full edit budget");
  explain->add_option("--beam-k", ex.beam_k, "beam width / fills per site")->check(CLI::PositiveNumber);
  explain->add_option("--budget", ex.budget, "maximum number of word edits")->check(CLI::PositiveNumber);
  explain->add_option("--jobs", ex.jobs, "worker threads")->check(CLI::PositiveNumber);

  std::string eval_file, eval_config, eval_format = "both";
  auto* evaluate = app.add_subcommand("evaluate", "compute Flip/Dist/Cont/Fluency for an explanation file");
  evaluate->add_option("--explanations", eval_file, "explanation JSONL")->required()->check(CLI::ExistingFile);
  evaluate->add_option("--config", eval_config, "run config naming the metric backends")->required();
  evaluate->add_option("--format", eval_format, "table, json or both")->check(CLI::IsMember({"table", "json", "both"}));

  std::string cmp_a, cmp_b, cmp_config, cmp_format = "both";
  bool welch = false;
  auto* compare = app.add_subcommand("compare", "paired significance tests between two explanation files");
  compare->add_option("--a", cmp_a, "first explanation JSONL")->required()->check(CLI::ExistingFile);
  compare->add_option("--b", cmp_b, "second explanation JSONL")->required()->check(CLI::ExistingFile);
  compare->add_option("--config", cmp_config, "recompute metrics with these backends");
  compare->add_flag("--welch", welch, "unpaired Welch test instead of the paired test");
  compare->add_option("--format", cmp_format, "table, json or both")->check(CLI::IsMember({"table", "json", "both"}));

  std::string train_config, train_target;
  auto* train = app.add_subcommand("train", "train a reference backend and write its checkpoint");
  train->add_option("--config", train_config, "run config")->required();
  train->add_option("--target", train_target, "classifier, attribute-bank or filler")
      ->required()
      ->check(CLI::IsMember({"classifier", "attribute-bank", "filler"}));

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitError;
  }

  try {
    if (*explain) return run_explain(ex);
    if (*evaluate) return run_evaluate(eval_file, eval_config, eval_format);
    if (*compare) return run_compare(cmp_a, cmp_b, cmp_config, welch, cmp_format);
    if (*train) return run_train(train_config, train_target);
  } catch (const cat::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitError;
  }
  return kExitError;
}
