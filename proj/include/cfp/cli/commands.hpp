#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "cfp/cli/run_config.hpp"
#include "cfp/data/contact_map.hpp"
#include "cfp/data/ppi.hpp"
#include "cfp/eval/probe.hpp"
#include "cfp/model/checkpoint.hpp"
#include "cfp/objectives/trainer.hpp"

namespace cfp::cli {

// Exit codes shared by every subcommand.
inline constexpr int kExitOk = 0;
inline constexpr int kExitDataError = 1;
inline constexpr int kExitConfigError = 2;

// Training data resolved from a RunConfig.
struct Corpus {
  std::vector<tokenizer::TokenSequence> sequences;  // ordered by id
  std::map<std::string, std::size_t> index;
  std::optional<data::PPIGraph> graph;
  std::vector<objectives::ContactExample> contacts;
  std::vector<objectives::TokenClassExample> ss;
  std::vector<objectives::RegressExample> values;

  [[nodiscard]] std::size_t find(const std::string& id) const;
};

// Encodes every FASTA record (TruncationError beyond max_len - 2).
Corpus load_sequences(const std::string& fasta, std::size_t max_len);
// Adds the data the given injection task needs (data.ppi, data.contacts or
// data.labels).
void load_task_data(Corpus& corpus, const RunConfig& cfg, const std::string& task);

// Which losses a step carries.
struct StepPlan {
  bool mlm = false;
  std::vector<std::string> tasks;  // injection tasks
};

// Deterministic in (cfg.seed, step): batch membership and MLM corruption
// use seeds derived from both.
objectives::StepBatches make_step_batches(const RunConfig& cfg, const Corpus& corpus, std::uint64_t step,
                                          const StepPlan& plan);

// Plain-text metrics log: '#' header lines carrying the config hash and the
// full config text, a column line, then one comma-separated record per step
// ending in wall-clock milliseconds.
class MetricsLog {
 public:
  MetricsLog(const std::string& path, const RunConfig& cfg, const StepPlan& plan, std::uint64_t resume_step);
  void append(const objectives::LossReport& report, long long wall_ms);
  static std::string columns(const StepPlan& plan);

 private:
  std::string path_;
  StepPlan plan_;
};

model::Checkpoint make_checkpoint(const RunConfig& cfg, const model::Model& model, const objectives::Adam& adam);
RunConfig config_of(const model::Checkpoint& ckpt);

struct TrainResult {
  std::string final_checkpoint;
  std::string log_path;
  std::vector<std::string> checkpoints;  // periodic files still on disk
  std::vector<objectives::LossReport> reports;
};

struct PretrainOptions {
  std::optional<std::string> resume;
};

// Trains the configured model on data.fasta (MLM) plus data.ppi when set.
TrainResult cmd_pretrain(const RunConfig& cfg, const PretrainOptions& options = {});

// Base-checkpoint config with the new prompt registered and routed to
// `task`: every existing prompt frozen, the encoder frozen when requested.
RunConfig injection_config(RunConfig base, const std::string& prompt, const std::string& task, bool freeze_encoder);
// Loads cfg.inject_base, plugs in cfg.inject_prompt and trains it on
// cfg.inject_task.
TrainResult cmd_inject(const RunConfig& cfg);

struct EvalOptions {
  std::string checkpoint;
  std::string task;  // ppi | contact | ss3 | ss8 | regress
  std::vector<model::PromptSelection> selections = {{}};
  std::string fasta;
  std::string pairs;        // ppi truth
  std::string contacts;     // directory of <id>.cmap
  std::string labels;       // ss labels or regression values
  std::string scores;       // optional directory of <id>.scores matrices
  std::string predictions;  // optional ppi predictions (same TSV layout)
  ConfigMap flags;          // must agree with the checkpoint config
  std::optional<std::string> expect_hash;
};

// One record per selection (and per range class for contacts).
std::vector<eval::MetricRecord> cmd_eval(const EvalOptions& options);

struct FileError {
  std::string file;
  std::string message;
};

struct BuildContactsResult {
  std::vector<std::string> written;
  std::vector<data::SkipRecord> skipped;
  std::vector<FileError> errors;
  [[nodiscard]] int exit_code() const { return errors.empty() ? kExitOk : kExitDataError; }
};

// Every *.pdb in pdb_dir (sorted) -> one <stem>_<chain>.cmap per chain plus
// sequences.fasta and report.tsv in out_dir.
BuildContactsResult cmd_build_contacts(const std::string& pdb_dir, const std::string& out_dir, double threshold,
                                       data::Conformation tag);

struct SplitOptions {
  std::string ppi;
  data::SplitMode mode = data::SplitMode::BFS;
  double fraction = 0.2;
  std::uint64_t seed = 0;
  std::optional<std::string> root;
  std::string out_dir;
};

// train.tsv, test.tsv and split.txt in out_dir.
data::SplitSpec cmd_split(const SplitOptions& options);

struct ProbeOptions {
  std::string checkpoint;
  std::string fasta;
  std::string prompt;
  model::PromptSelection base;
  double cutoff = 1.0;
  std::string out_dir;
};

// <id>.csv per FASTA record.
std::vector<eval::ShiftReport> cmd_probe(const ProbeOptions& options);

// Contact score matrix: n lines of n whitespace-separated reals.
numerics::Tensor read_score_matrix(const std::string& path);
void write_score_matrix(const std::string& path, const numerics::Tensor& scores);

}  // namespace cfp::cli
