// cfp: prompt-injectable protein encoder toolkit.
#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>

#include "cfp/cli/commands.hpp"
#include "cfp/errors.hpp"

namespace {

using namespace cfp;
using cfp::cli::RunConfig;

struct Common {
  std::string config_file;
  std::vector<std::string> sets;
};

void add_common(CLI::App* cmd, Common& c) {
  cmd->add_option("--config", c.config_file, "key=value config file");
  cmd->add_option("--set", c.sets, "override, key=value (repeatable)");
}

ConfigMap overrides_of(const Common& c, const std::vector<std::pair<std::string, std::string>>& flags) {
  ConfigMap map;
  if (!c.config_file.empty()) map = read_config_file(c.config_file);
  for (const auto& [k, v] : flags) {
    if (!v.empty()) map[k] = v;
  }
  for (const auto& [k, v] : cli::parse_overrides(c.sets)) map[k] = v;
  return map;
}

model::PromptSelection parse_selection(const std::string& text) {
  if (text.empty() || text == "none") return {};
  return split(text, ',');
}

void print_train(const cli::TrainResult& r) {
  if (!r.reports.empty()) {
    const auto& first = r.reports.front();
    const auto& last = r.reports.back();
    std::cout << "steps " << first.step << ".." << last.step << "  L " << format_double(first.total) << " -> "
              << format_double(last.total) << "\n";
  }
  std::cout << "checkpoint " << r.final_checkpoint << "\nlog " << r.log_path << "\n";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Pluggable task prompts for a protein sequence encoder"};
  app.require_subcommand(1);

  Common pre;
  std::string pre_fasta, pre_ppi, pre_out, pre_steps, pre_seed, pre_resume;
  auto* pretrain = app.add_subcommand("pretrain", "multi-task prompt pretraining (MLM + PPI)");
  add_common(pretrain, pre);
  pretrain->add_option("--fasta", pre_fasta, "sequence FASTA (data.fasta)");
  pretrain->add_option("--ppi", pre_ppi, "interaction TSV (data.ppi)");
  pretrain->add_option("--out", pre_out, "output directory (run.out_dir)");
  pretrain->add_option("--steps", pre_steps, "optimizer steps (run.steps)");
  pretrain->add_option("--seed", pre_seed, "run seed (run.seed)");
  pretrain->add_option("--resume", pre_resume, "continue from this checkpoint");

  Common inj;
  std::string inj_base, inj_prompt, inj_task = "ppi", inj_fasta, inj_ppi, inj_contacts, inj_labels, inj_out, inj_steps;
  bool inj_train_encoder = false;
  auto* inject = app.add_subcommand("inject", "plug a new prompt into a trained checkpoint and train it");
  add_common(inject, inj);
  inject->add_option("--base", inj_base, "base checkpoint")->required();
  inject->add_option("--prompt", inj_prompt, "name of the new prompt")->required();
  inject->add_option("--task", inj_task, "ppi | contact | ss3 | ss8 | regress");
  inject->add_flag("--train-encoder", inj_train_encoder, "let the task loss update the encoder");
  inject->add_option("--fasta", inj_fasta, "sequence FASTA");
  inject->add_option("--ppi", inj_ppi, "interaction TSV");
  inject->add_option("--contacts", inj_contacts, "directory of <id>.cmap files");
  inject->add_option("--labels", inj_labels, "secondary-structure labels or regression values");
  inject->add_option("--out", inj_out, "output directory");
  inject->add_option("--steps", inj_steps, "optimizer steps");

  cli::EvalOptions ev;
  std::vector<std::string> ev_prompts;
  std::vector<std::string> ev_sets;
  std::string ev_hash, ev_out;
  auto* evalc = app.add_subcommand("eval", "evaluate a checkpoint on a downstream task");
  evalc->add_option("--checkpoint", ev.checkpoint, "checkpoint file")->required();
  evalc->add_option("--task", ev.task, "ppi | contact | ss3 | ss8 | regress")->required();
  evalc->add_option("--prompts", ev_prompts, "prompt selection, comma separated or 'none' (repeatable)");
  evalc->add_option("--fasta", ev.fasta, "sequence FASTA")->required();
  evalc->add_option("--pairs", ev.pairs, "interaction TSV with the true labels");
  evalc->add_option("--contacts", ev.contacts, "directory of <id>.cmap files");
  evalc->add_option("--labels", ev.labels, "secondary-structure labels or regression values");
  evalc->add_option("--scores", ev.scores, "directory of <id>.scores matrices used instead of the model");
  evalc->add_option("--predictions", ev.predictions, "interaction TSV used instead of the model");
  evalc->add_option("--set", ev_sets, "key=value the checkpoint config must agree with (repeatable)");
  evalc->add_option("--expect-hash", ev_hash, "refuse checkpoints with another config hash");
  evalc->add_option("--out", ev_out, "also write the records to this file");

  std::string bc_dir, bc_out, bc_tag = "native";
  double bc_threshold = cfp::data::kDefaultContactThreshold;
  auto* build = app.add_subcommand("build-contacts", "PDB directory to contact-map files");
  build->add_option("--pdb-dir", bc_dir, "directory of .pdb files")->required();
  build->add_option("--out", bc_out, "output directory")->required();
  build->add_option("--threshold", bc_threshold, "contact distance in angstrom");
  build->add_option("--tag", bc_tag, "native | interaction");

  cli::SplitOptions sp;
  std::string sp_mode = "bfs", sp_root;
  auto* splitc = app.add_subcommand("split", "BFS/DFS train/test split of an interaction graph");
  splitc->add_option("--ppi", sp.ppi, "interaction TSV")->required();
  splitc->add_option("--mode", sp_mode, "bfs | dfs");
  splitc->add_option("--fraction", sp.fraction, "fraction of nodes selected for test");
  splitc->add_option("--seed", sp.seed, "root seed");
  splitc->add_option("--root", sp_root, "fixed root id");
  splitc->add_option("--out", sp.out_dir, "output directory")->required();

  cli::ProbeOptions pr;
  std::string pr_base;
  auto* probe = app.add_subcommand("probe", "per-residue embedding shift caused by a prompt");
  probe->add_option("--checkpoint", pr.checkpoint, "checkpoint file")->required();
  probe->add_option("--fasta", pr.fasta, "sequence FASTA")->required();
  probe->add_option("--prompt", pr.prompt, "prompt to plug in")->required();
  probe->add_option("--base", pr_base, "prompts attached in both runs, comma separated");
  probe->add_option("--cutoff", pr.cutoff, "flag residues whose shift exceeds this");
  probe->add_option("--out", pr.out_dir, "output directory")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? cli::kExitOk : cli::kExitConfigError;
  }

  try {
    if (*pretrain) {
      const ConfigMap map = overrides_of(pre, {{"data.fasta", pre_fasta},
                                               {"data.ppi", pre_ppi},
                                               {"run.out_dir", pre_out},
                                               {"run.steps", pre_steps},
                                               {"run.seed", pre_seed}});
      const RunConfig cfg = RunConfig::from_map(map);
      cli::PretrainOptions options;
      if (!pre_resume.empty()) options.resume = pre_resume;
      print_train(cli::cmd_pretrain(cfg, options));
    } else if (*inject) {
      const model::Checkpoint base = model::read_checkpoint(inj_base);
      ConfigMap map = parse_config_text(base.config_text, inj_base);
      map["run.out_dir"] = (std::filesystem::path(map["run.out_dir"]) / ("inject-" + inj_prompt)).string();
      for (const auto& [k, v] : overrides_of(inj, {{"data.fasta", inj_fasta},
                                                   {"data.ppi", inj_ppi},
                                                   {"data.contacts", inj_contacts},
                                                   {"data.labels", inj_labels},
                                                   {"run.out_dir", inj_out},
                                                   {"run.steps", inj_steps}})) {
        map[k] = v;
      }
      RunConfig cfg = cli::injection_config(RunConfig::from_map(map), inj_prompt, inj_task, !inj_train_encoder);
      cfg.inject_base = inj_base;
      print_train(cli::cmd_inject(cfg));
    } else if (*evalc) {
      ev.selections.clear();
      for (const auto& p : ev_prompts) ev.selections.push_back(parse_selection(p));
      if (ev.selections.empty()) ev.selections.push_back({});
      ev.flags = cli::parse_overrides(ev_sets);
      if (!ev_hash.empty()) ev.expect_hash = ev_hash;
      std::string text = eval::MetricRecord::header() + "\n";
      for (const auto& r : cli::cmd_eval(ev)) text += r.to_csv() + "\n";
      std::cout << text;
      if (!ev_out.empty()) {
        std::ofstream out(ev_out, std::ios::binary);
        out << text;
        if (!out) throw DataError("cannot write " + ev_out);
      }
    } else if (*build) {
      const auto r = cli::cmd_build_contacts(bc_dir, bc_out, bc_threshold, data::parse_conformation(bc_tag));
      std::cout << r.written.size() << " maps, " << r.skipped.size() << " skipped residues, " << r.errors.size()
                << " failed files\n";
      for (const auto& e : r.errors) std::cerr << "error: " << e.file << ": " << e.message << "\n";
      return r.exit_code();
    } else if (*splitc) {
      sp.mode = data::parse_split_mode(sp_mode);
      if (!sp_root.empty()) sp.root = sp_root;
      const auto spec = cli::cmd_split(sp);
      std::cout << "root " << spec.root << ", " << spec.selected.size() << " selected, " << spec.train.size()
                << " train / " << spec.test.size() << " test edges\n";
    } else if (*probe) {
      pr.base = parse_selection(pr_base);
      const auto reports = cli::cmd_probe(pr);
      std::size_t flagged = 0;
      for (const auto& r : reports) flagged += r.flagged().size();
      std::cout << reports.size() << " reports, " << flagged << " flagged residues\n";
    }
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return cli::kExitConfigError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return cli::kExitDataError;
  }
  return cli::kExitOk;
}
