#include "cfp/cli/commands.hpp"

#include <algorithm>
#include <chrono>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <set>
#include <sstream>

#include "cfp/data/contact_map.hpp"
#include "cfp/data/fasta.hpp"
#include "cfp/data/labels.hpp"
#include "cfp/errors.hpp"
#include "cfp/eval/inference.hpp"
#include "cfp/eval/metrics.hpp"
#include "cfp/numerics/rng.hpp"

namespace fs = std::filesystem;

namespace cfp::cli {

using numerics::derive_seed;
using numerics::Rng;
using numerics::Tensor;
using objectives::LossReport;

namespace {

enum Stream : std::uint64_t { kMlmPick = 1, kMlmMask = 2, kPairPick = 3, kTaskPick = 4 };

void write_file(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write " + path.string());
  out << text;
  if (!out) throw DataError("failed writing " + path.string());
}

// k of n indices, increasing; everything when k is 0 or at least n.
std::vector<std::size_t> choose(std::size_t n, std::size_t k, std::uint64_t seed) {
  std::vector<std::size_t> all(n);
  std::iota(all.begin(), all.end(), 0);
  if (k == 0 || k >= n) return all;
  Rng rng(seed);
  for (std::size_t i = 0; i < k; ++i) std::swap(all[i], all[i + rng.below(n - i)]);
  all.resize(k);
  std::sort(all.begin(), all.end());
  return all;
}

std::string artifact_header(std::uint64_t hash) { return "# config_hash=" + hash_hex(hash) + "\n"; }

}  // namespace

std::size_t Corpus::find(const std::string& id) const {
  const auto it = index.find(id);
  if (it == index.end()) throw DataError("no sequence for protein '" + id + "'");
  return it->second;
}

Corpus load_sequences(const std::string& fasta, std::size_t max_len) {
  if (fasta.empty()) throw ConfigError("data.fasta is required");
  Corpus corpus;
  for (const auto& [id, residues] : data::parse_fasta(fasta)) {
    try {
      corpus.index[id] = corpus.sequences.size();
      corpus.sequences.push_back(tokenizer::encode(residues, max_len, id).trimmed());
    } catch (const EncodingError& e) {
      throw DataError(fasta + ": record '" + id + "': " + e.what());
    }
  }
  if (corpus.sequences.empty()) throw DataError(fasta + ": no sequences");
  return corpus;
}

void load_task_data(Corpus& corpus, const RunConfig& cfg, const std::string& task) {
  if (task == "ppi") {
    if (cfg.ppi.empty()) throw ConfigError("task ppi needs data.ppi");
    data::PPIGraph graph = data::parse_ppi_tsv(cfg.ppi).graph;
    if (graph.edges.empty()) throw DataError(cfg.ppi + ": no interactions");
    if (graph.label_width != cfg.model.ppi_labels) {
      throw DataError(cfg.ppi + ": " + std::to_string(graph.label_width) + " label columns but model.ppi_labels=" +
                      std::to_string(cfg.model.ppi_labels));
    }
    for (const auto& [id, residues] : graph.nodes) {
      if (!corpus.index.contains(id)) throw DataError(cfg.ppi + ": interaction endpoint '" + id + "' has no sequence");
    }
    corpus.graph = std::move(graph);
  } else if (task == "contact") {
    if (cfg.contacts.empty()) throw ConfigError("task contact needs data.contacts");
    corpus.contacts.clear();
    for (const auto& seq : corpus.sequences) {
      const fs::path file = fs::path(cfg.contacts) / (seq.source_id + ".cmap");
      if (!fs::exists(file)) continue;
      data::ContactMap map = data::read_contact_map(file.string());
      if (map.n != seq.residue_count()) {
        throw DataError(file.string() + ": map length " + std::to_string(map.n) + " but sequence has " +
                        std::to_string(seq.residue_count()) + " residues");
      }
      corpus.contacts.push_back({seq, std::move(map.bits)});
    }
    if (corpus.contacts.empty()) throw DataError(cfg.contacts + ": no contact maps match the sequences");
  } else if (task == "ss3" || task == "ss8") {
    if (cfg.labels.empty()) throw ConfigError("task " + task + " needs data.labels");
    corpus.ss.clear();
    for (auto& [id, labels] : data::parse_ss_labels(cfg.labels, task == "ss3" ? 3 : 8)) {
      const auto& seq = corpus.sequences[corpus.find(id)];
      if (labels.size() != seq.residue_count()) throw DataError(cfg.labels + ": label count mismatch for '" + id + "'");
      corpus.ss.push_back({seq, std::move(labels)});
    }
    if (corpus.ss.empty()) throw DataError(cfg.labels + ": no labelled sequences");
  } else if (task == "regress") {
    if (cfg.labels.empty()) throw ConfigError("task regress needs data.labels");
    corpus.values.clear();
    for (const auto& [id, value] : data::parse_values(cfg.labels)) {
      corpus.values.push_back({corpus.sequences[corpus.find(id)], value});
    }
    if (corpus.values.empty()) throw DataError(cfg.labels + ": no values");
  } else {
    throw ConfigError("unknown task '" + task + "'");
  }
}

namespace {

objectives::PairStepBatch pair_batch(const RunConfig& cfg, const Corpus& corpus, std::uint64_t step) {
  const data::PPIGraph& g = *corpus.graph;
  std::vector<std::string> ids;
  for (const auto& [id, residues] : g.nodes) ids.push_back(id);
  const std::size_t n = ids.size();
  const std::size_t total_pairs = n * (n - 1) / 2;
  const std::vector<double> zeros(g.label_width, 0.0);
  auto labels_of = [&](const std::string& a, const std::string& b) {
    const auto it = g.edges.find(data::canonical_edge(a, b));
    if (it == g.edges.end()) return zeros;
    return std::vector<double>(it->second.begin(), it->second.end());
  };

  std::vector<std::pair<std::size_t, std::size_t>> chosen;
  if (cfg.ppi_batch == 0 || cfg.ppi_batch >= total_pairs) {
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = i + 1; j < n; ++j) chosen.emplace_back(i, j);
    }
  } else {
    const std::size_t seed = derive_seed(cfg.seed, kPairPick, step);
    std::vector<data::EdgeKey> edges;
    for (const auto& [key, bits] : g.edges) edges.push_back(key);
    const std::size_t positives = std::min(edges.size(), (cfg.ppi_batch + 1) / 2);
    auto pos_of = [&](const std::string& id) {
      return static_cast<std::size_t>(std::lower_bound(ids.begin(), ids.end(), id) - ids.begin());
    };
    for (std::size_t e : choose(edges.size(), positives, seed)) {
      chosen.emplace_back(pos_of(edges[e].first), pos_of(edges[e].second));
    }
    Rng rng(derive_seed(seed, 1));
    const std::size_t wanted = cfg.ppi_batch - positives;
    for (std::size_t tries = 0; chosen.size() < positives + wanted && tries < 100 * cfg.ppi_batch; ++tries) {
      std::size_t i = rng.below(n);
      std::size_t j = rng.below(n);
      if (i == j) continue;
      if (i > j) std::swap(i, j);
      if (g.edges.contains(data::canonical_edge(ids[i], ids[j]))) continue;
      chosen.emplace_back(i, j);
    }
  }

  objectives::PairStepBatch batch;
  batch.prompts = cfg.prompts_for("ppi");
  std::map<std::size_t, std::size_t> local;
  auto local_of = [&](std::size_t node) {
    auto [it, inserted] = local.emplace(node, batch.proteins.size());
    if (inserted) batch.proteins.push_back(corpus.sequences[corpus.find(ids[node])]);
    return it->second;
  };
  for (const auto& [i, j] : chosen) {
    const std::size_t p = local_of(i);
    const std::size_t q = local_of(j);
    batch.pairs.push_back({p, q, labels_of(ids[i], ids[j])});
  }
  return batch;
}

template <typename T>
std::vector<T> pick(const std::vector<T>& items, std::size_t k, std::uint64_t seed) {
  std::vector<T> out;
  for (std::size_t i : choose(items.size(), k, seed)) out.push_back(items[i]);
  return out;
}

}  // namespace

objectives::StepBatches make_step_batches(const RunConfig& cfg, const Corpus& corpus, std::uint64_t step,
                                          const StepPlan& plan) {
  objectives::StepBatches batches;
  if (plan.mlm) {
    objectives::MlmStepBatch mlm;
    mlm.reduction = cfg.mlm_reduction;
    mlm.prompts = cfg.prompts_for(objectives::kConservationLoss);
    const std::uint64_t mask_base = derive_seed(cfg.seed, kMlmMask, step);
    for (std::size_t i : choose(corpus.sequences.size(), cfg.mlm_batch, derive_seed(cfg.seed, kMlmPick, step))) {
      mlm.items.push_back(tokenizer::apply_mlm_mask(corpus.sequences[i], cfg.mlm, derive_seed(mask_base, 0, i)));
    }
    batches.mlm = std::move(mlm);
  }
  const std::uint64_t task_seed = derive_seed(cfg.seed, kTaskPick, step);
  for (const std::string& task : plan.tasks) {
    if (task == "ppi") {
      if (!corpus.graph) throw ContractError("ppi task without a graph");
      batches.ppi = pair_batch(cfg, corpus, step);
    } else if (task == "contact") {
      batches.contact = objectives::ContactStepBatch{pick(corpus.contacts, cfg.task_batch, task_seed),
                                                     cfg.prompts_for("contact")};
    } else if (task == "ss3" || task == "ss8") {
      batches.ss = objectives::TokenClassStepBatch{task == "ss3" ? 3u : 8u, pick(corpus.ss, cfg.task_batch, task_seed),
                                                   cfg.prompts_for(task)};
    } else if (task == "regress") {
      batches.regress = objectives::RegressStepBatch{pick(corpus.values, cfg.task_batch, task_seed),
                                                     cfg.prompts_for("regress")};
    } else {
      throw ConfigError("unknown task '" + task + "'");
    }
  }
  return batches;
}

std::string MetricsLog::columns(const StepPlan& plan) {
  std::string line = "step,L_C";
  for (const auto& t : plan.tasks) line += ",L_" + t;
  return line + ",L_I,L,wall_ms\n";
}

MetricsLog::MetricsLog(const std::string& path, const RunConfig& cfg, const StepPlan& plan, std::uint64_t resume_step)
    : path_(path), plan_(plan) {
  std::string kept;
  if (resume_step > 0 && fs::exists(path)) {
    std::istringstream in(data::read_text_file(path));
    std::string line;
    while (std::getline(in, line)) {
      if (!line.empty() && line.front() != '#' && !line.starts_with("step,")) {
        const std::uint64_t step = std::stoull(line.substr(0, line.find(',')));
        if (step > resume_step) continue;
        kept += line + '\n';
      }
    }
  }
  std::string header = "# cfp metrics log\n" + artifact_header(cfg.hash());
  std::istringstream text(cfg.text());
  std::string line;
  while (std::getline(text, line)) header += "# " + line + '\n';
  write_file(path, header + columns(plan) + kept);
}

void MetricsLog::append(const LossReport& report, long long wall_ms) {
  std::string line = std::to_string(report.step) + ',' + format_double(report.conservation);
  for (const auto& t : plan_.tasks) {
    const objectives::TaskLoss* tl = report.task(t);
    line += ',' + (tl ? format_double(tl->value) : std::string("nan"));
  }
  line += ',' + format_double(report.injection) + ',' + format_double(report.total) + ',' + std::to_string(wall_ms);
  std::ofstream out(path_, std::ios::app | std::ios::binary);
  if (!out) throw DataError("cannot append to " + path_);
  out << line << '\n';
}

model::Checkpoint make_checkpoint(const RunConfig& cfg, const model::Model& model, const objectives::Adam& adam) {
  model::Checkpoint ckpt;
  ckpt.config_text = cfg.text();
  ckpt.config_hash = fnv1a64(ckpt.config_text);
  ckpt.step = adam.steps();
  model::append_model(ckpt, model);
  adam.save(ckpt, model);
  return ckpt;
}

RunConfig config_of(const model::Checkpoint& ckpt) {
  return RunConfig::from_map(parse_config_text(ckpt.config_text, "checkpoint config"));
}

namespace {

std::string step_name(std::uint64_t step) {
  std::string digits = std::to_string(step);
  return "step-" + std::string(digits.size() < 8 ? 8 - digits.size() : 0, '0') + digits + ".cfpt";
}

std::vector<fs::path> periodic_checkpoints(const fs::path& dir) {
  std::vector<fs::path> out;
  if (!fs::exists(dir)) return out;
  for (const auto& entry : fs::directory_iterator(dir)) {
    const std::string name = entry.path().filename().string();
    if (name.starts_with("step-") && name.ends_with(".cfpt")) out.push_back(entry.path());
  }
  std::sort(out.begin(), out.end());
  return out;
}

TrainResult run_training(const RunConfig& cfg, model::Model& model, objectives::Adam& adam, const Corpus& corpus,
                         const StepPlan& plan) {
  const fs::path out(cfg.out_dir);
  const fs::path ckpt_dir = out / "checkpoints";
  fs::create_directories(ckpt_dir);
  write_file(out / "config.txt", cfg.text());
  tokenizer::Vocabulary::standard().write((out / "vocab.txt").string());

  TrainResult result;
  result.log_path = (out / "metrics.log").string();
  MetricsLog log(result.log_path, cfg, plan, adam.steps());
  for (std::uint64_t step = adam.steps() + 1; step <= cfg.steps; ++step) {
    const auto start = std::chrono::steady_clock::now();
    const objectives::StepBatches batches = make_step_batches(cfg, corpus, step, plan);
    LossReport report = objectives::train_step(batches, model, cfg.routing, adam);
    const auto ms =
        std::chrono::duration_cast<std::chrono::milliseconds>(std::chrono::steady_clock::now() - start).count();
    log.append(report, ms);
    result.reports.push_back(std::move(report));
    if (cfg.checkpoint_every > 0 && step % cfg.checkpoint_every == 0) {
      model::write_checkpoint((ckpt_dir / step_name(step)).string(), make_checkpoint(cfg, model, adam));
      auto files = periodic_checkpoints(ckpt_dir);
      while (files.size() > cfg.keep_last) {
        fs::remove(files.front());
        files.erase(files.begin());
      }
    }
  }
  result.final_checkpoint = (out / "final.cfpt").string();
  model::write_checkpoint(result.final_checkpoint, make_checkpoint(cfg, model, adam));
  for (const auto& f : periodic_checkpoints(ckpt_dir)) result.checkpoints.push_back(f.string());
  return result;
}

void require_compatible(const RunConfig& cfg, const model::Checkpoint& ckpt) {
  ConfigMap now = cfg.to_map();
  ConfigMap then = parse_config_text(ckpt.config_text, "checkpoint config");
  now.erase("run.steps");
  then.erase("run.steps");
  if (now == then) return;
  for (const auto& [k, v] : now) {
    const auto it = then.find(k);
    if (it == then.end() || it->second != v) {
      throw ConfigError("resume checkpoint (config " + hash_hex(ckpt.config_hash) + ") has " + k + "=" +
                        (it == then.end() ? std::string("<unset>") : it->second) + ", run has " + v);
    }
  }
  throw ConfigError("resume checkpoint config differs from the run config");
}

}  // namespace

TrainResult cmd_pretrain(const RunConfig& cfg, const PretrainOptions& options) {
  cfg.validate();
  Corpus corpus = load_sequences(cfg.fasta, cfg.model.max_len);
  StepPlan plan;
  plan.mlm = true;
  if (!cfg.ppi.empty()) {
    load_task_data(corpus, cfg, "ppi");
    plan.tasks.push_back("ppi");
  }
  if (options.resume) {
    const model::Checkpoint ckpt = model::read_checkpoint(*options.resume);
    require_compatible(cfg, ckpt);
    if (ckpt.step > cfg.steps) throw ConfigError("resume checkpoint is past run.steps");
    model::Model m = model::load_model(ckpt);
    objectives::Adam adam(cfg.optim);
    adam.load(ckpt, m);
    return run_training(cfg, m, adam, corpus, plan);
  }
  model::Model m = model::Model::create(cfg.model, derive_seed(cfg.seed, 0));
  objectives::Adam adam(cfg.optim);
  return run_training(cfg, m, adam, corpus, plan);
}

RunConfig injection_config(RunConfig base, const std::string& prompt, const std::string& task, bool freeze_encoder) {
  if (prompt.empty()) throw ConfigError("inject needs a prompt name");
  if (std::find(base.model.prompts.begin(), base.model.prompts.end(), prompt) != base.model.prompts.end()) {
    throw ConfigError("prompt '" + prompt + "' already exists in the base model");
  }
  for (const auto& p : base.model.prompts) base.model.frozen_prompts.insert(p);
  base.model.prompts.push_back(prompt);
  base.routing.prompt_losses.clear();
  base.routing.prompt_losses[prompt] = {task};
  base.routing.encoder_losses.clear();
  if (!freeze_encoder) base.routing.encoder_losses.insert(task);
  base.inject_prompt = prompt;
  base.inject_task = task;
  base.freeze_encoder = freeze_encoder;
  base.validate();
  return base;
}

TrainResult cmd_inject(const RunConfig& cfg) {
  cfg.validate();
  if (cfg.inject_base.empty()) throw ConfigError("inject needs inject.base");
  if (cfg.inject_prompt.empty() ||
      std::find(cfg.model.prompts.begin(), cfg.model.prompts.end(), cfg.inject_prompt) == cfg.model.prompts.end()) {
    throw ConfigError("inject.prompt must name the prompt being injected");
  }
  const model::Checkpoint base_ckpt = model::read_checkpoint(cfg.inject_base);
  const model::Model base = model::load_model(base_ckpt);
  if (base.has_prompt(cfg.inject_prompt)) {
    throw ConfigError("prompt '" + cfg.inject_prompt + "' already exists in the base model");
  }

  model::ModelConfig without = cfg.model;
  without.prompts.erase(std::find(without.prompts.begin(), without.prompts.end(), cfg.inject_prompt));
  model::Model m = model::Model::skeleton(without);
  for (auto& p : m.parameters()) {
    if (!base.has(p.name) || base.value(p.name).shape() != p.value.shape()) {
      throw ConfigError("base checkpoint does not match the model configuration at " + p.name);
    }
    p.value = base.value(p.name);
  }
  m.add_prompt(cfg.inject_prompt, derive_seed(cfg.seed, 5), true);

  Corpus corpus = load_sequences(cfg.fasta, cfg.model.max_len);
  load_task_data(corpus, cfg, cfg.inject_task);
  StepPlan plan;
  plan.tasks.push_back(cfg.inject_task);
  objectives::Adam adam(cfg.optim);
  return run_training(cfg, m, adam, corpus, plan);
}

namespace {

std::vector<std::string> read_lines(const std::string& path) {
  std::istringstream in(data::read_text_file(path));
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (!line.empty() && line.front() != '#') lines.push_back(line);
  }
  return lines;
}

}  // namespace

Tensor read_score_matrix(const std::string& path) {
  const auto lines = read_lines(path);
  const std::size_t n = lines.size();
  Tensor t({n, n});
  for (std::size_t i = 0; i < n; ++i) {
    std::istringstream row(lines[i]);
    for (std::size_t j = 0; j < n; ++j) {
      if (!(row >> t(i, j))) throw FormatError(path + ":" + std::to_string(i + 1) + ": expected " + std::to_string(n) + " scores");
    }
    std::string extra;
    if (row >> extra) throw FormatError(path + ":" + std::to_string(i + 1) + ": too many scores");
  }
  return t;
}

void write_score_matrix(const std::string& path, const Tensor& scores) {
  std::string out;
  for (std::size_t i = 0; i < scores.rows(); ++i) {
    for (std::size_t j = 0; j < scores.cols(); ++j) {
      if (j) out += ' ';
      out += format_double(scores(i, j));
    }
    out += '\n';
  }
  write_file(path, out);
}

std::vector<eval::MetricRecord> cmd_eval(const EvalOptions& options) {
  const model::Checkpoint ckpt = model::read_checkpoint(options.checkpoint);
  const std::string hash = hash_hex(ckpt.config_hash);
  if (options.expect_hash && *options.expect_hash != hash) {
    throw ConfigError("checkpoint config hash " + hash + " does not match expected " + *options.expect_hash);
  }
  const ConfigMap stored = parse_config_text(ckpt.config_text, "checkpoint config");
  for (const auto& [k, v] : options.flags) {
    const auto it = stored.find(k);
    if (it == stored.end() || it->second != v) {
      throw ConfigError("checkpoint (config " + hash + ") has " + k + "=" +
                        (it == stored.end() ? std::string("<unset>") : it->second) + " but the flags say " + v);
    }
  }
  const model::Model m = model::load_model(ckpt);
  const std::string& task = options.task;
  const bool known_task = std::find(kInjectionTasks.begin(), kInjectionTasks.end(), task) != kInjectionTasks.end();
  if (!known_task) throw ConfigError("eval task must be one of ppi, contact, ss3, ss8, regress");
  if (options.fasta.empty()) throw ConfigError("eval needs --fasta");
  const Corpus corpus = load_sequences(options.fasta, m.config().max_len);

  std::vector<eval::MetricRecord> records;
  auto record = [&](const std::string& metric, double value, const model::PromptSelection& sel, std::string note) {
    records.push_back({task, metric, value, eval::selection_label(sel), hash, std::move(note)});
  };

  if (task == "ppi") {
    if (options.pairs.empty()) throw ConfigError("ppi eval needs --pairs");
    const data::PPIGraph truth = data::parse_ppi_tsv(options.pairs).graph;
    if (truth.label_width != m.config().ppi_labels && options.predictions.empty()) {
      throw DataError(options.pairs + ": label width does not match the pair head");
    }
    std::optional<data::PPIGraph> given;
    if (!options.predictions.empty()) given = data::parse_ppi_tsv(options.predictions).graph;
    for (const auto& sel : options.selections) {
      std::vector<std::vector<std::uint8_t>> pred;
      std::vector<std::vector<std::uint8_t>> gold;
      std::map<std::string, Tensor> cache;
      auto pooled_of = [&](const std::string& id) -> const Tensor& {
        auto it = cache.find(id);
        if (it == cache.end()) {
          it = cache.emplace(id, eval::pooled(m, corpus.sequences[corpus.find(id)], sel)).first;
        }
        return it->second;
      };
      for (const auto& [key, labels] : truth.edges) {
        gold.push_back(labels);
        if (given) {
          const auto it = given->edges.find(key);
          if (it == given->edges.end()) throw DataError(options.predictions + ": no prediction for " + key.first + "-" + key.second);
          pred.push_back(it->second);
        } else {
          pred.push_back(eval::logits_to_labels(eval::pair_logits(m, pooled_of(key.first), pooled_of(key.second))));
        }
      }
      std::size_t agree = 0;
      std::size_t slots = 0;
      for (std::size_t k = 0; k < gold.size(); ++k) {
        if (pred[k].size() != gold[k].size()) throw DataError("prediction width differs from truth width");
        for (std::size_t s = 0; s < gold[k].size(); ++s) agree += pred[k][s] == gold[k][s];
        slots += gold[k].size();
      }
      record("micro_f1", eval::micro_f1(pred, gold), sel, "pairs=" + std::to_string(gold.size()));
      record("accuracy", slots ? static_cast<double>(agree) / static_cast<double>(slots) : 0.0, sel,
             "pairs=" + std::to_string(gold.size()));
    }
  } else if (task == "contact") {
    if (options.contacts.empty()) throw ConfigError("contact eval needs --contacts");
    for (const auto& sel : options.selections) {
      for (const eval::RangeClass& range :
           {eval::RangeClass::short_range(), eval::RangeClass::medium_range(), eval::RangeClass::long_range()}) {
        double sum = 0.0;
        std::size_t count = 0;
        std::size_t short_of_k = 0;
        for (const auto& seq : corpus.sequences) {
          const fs::path file = fs::path(options.contacts) / (seq.source_id + ".cmap");
          if (!fs::exists(file)) continue;
          const data::ContactMap truth = data::read_contact_map(file.string());
          if (truth.n != seq.residue_count()) throw DataError(file.string() + ": length does not match the sequence");
          const Tensor scores = options.scores.empty()
                                    ? eval::contact_scores(m, seq, sel)
                                    : read_score_matrix((fs::path(options.scores) / (seq.source_id + ".scores")).string());
          const eval::PrecisionResult r = eval::precision_at_L_half(scores, truth, range);
          sum += r.precision;
          short_of_k += r.short_of_k;
          ++count;
        }
        if (count == 0) throw DataError(options.contacts + ": no contact maps match the sequences");
        record("P@L/2:" + range.name, sum / static_cast<double>(count), sel,
               "proteins=" + std::to_string(count) + ";short_of_k=" + std::to_string(short_of_k));
      }
    }
  } else if (task == "ss3" || task == "ss8") {
    if (options.labels.empty()) throw ConfigError(task + " eval needs --labels");
    const std::size_t classes = task == "ss3" ? 3 : 8;
    const auto labels = data::parse_ss_labels(options.labels, classes);
    for (const auto& sel : options.selections) {
      std::vector<int> pred;
      std::vector<int> gold;
      for (const auto& [id, truth] : labels) {
        const auto& seq = corpus.sequences[corpus.find(id)];
        if (truth.size() != seq.residue_count()) throw DataError(options.labels + ": label count mismatch for " + id);
        const auto p = eval::predict_ss(m, seq, sel, classes);
        pred.insert(pred.end(), p.begin(), p.end());
        gold.insert(gold.end(), truth.begin(), truth.end());
      }
      record(classes == 3 ? "Q3" : "Q8", eval::q_accuracy(pred, gold, classes), sel,
             "residues=" + std::to_string(gold.size()));
    }
  } else {
    if (options.labels.empty()) throw ConfigError("regress eval needs --labels");
    const auto values = data::parse_values(options.labels);
    for (const auto& sel : options.selections) {
      std::vector<double> pred;
      std::vector<double> gold;
      for (const auto& [id, v] : values) {
        pred.push_back(eval::predict_value(m, corpus.sequences[corpus.find(id)], sel));
        gold.push_back(v);
      }
      record("spearman", eval::spearman_rho(pred, gold), sel, "proteins=" + std::to_string(gold.size()));
    }
  }
  return records;
}

BuildContactsResult cmd_build_contacts(const std::string& pdb_dir, const std::string& out_dir, double threshold,
                                       data::Conformation tag) {
  if (!(threshold > 0.0)) throw ConfigError("threshold must be positive");
  if (!fs::is_directory(pdb_dir)) throw ConfigError("not a directory: " + pdb_dir);
  fs::create_directories(out_dir);
  ConfigMap params = {{"pdb_dir", pdb_dir}, {"threshold", format_double(threshold)}, {"tag", data::to_string(tag)}};
  const std::uint64_t hash = fnv1a64(to_config_text(params));

  std::vector<fs::path> files;
  for (const auto& entry : fs::directory_iterator(pdb_dir)) {
    if (entry.is_regular_file() && entry.path().extension() == ".pdb") files.push_back(entry.path());
  }
  std::sort(files.begin(), files.end());

  BuildContactsResult result;
  data::SequenceTable sequences;
  for (const fs::path& file : files) {
    data::PdbStructure s;
    try {
      s = data::parse_pdb(file.string());
    } catch (const Error& e) {
      result.errors.push_back({file.string(), e.what()});
      continue;
    }
    result.skipped.insert(result.skipped.end(), s.skipped.begin(), s.skipped.end());
    for (const data::Chain& chain : s.chains) {
      const std::string chain_id = chain.id == ' ' ? std::string("_") : std::string(1, chain.id);
      const std::string id = file.stem().string() + "_" + chain_id;
      const fs::path target = fs::path(out_dir) / (id + ".cmap");
      data::write_contact_map(target.string(), data::build_contact_map(chain.residues, threshold, tag));
      sequences[id] = chain.sequence();
      result.written.push_back(target.string());
    }
  }
  std::string report = artifact_header(hash);
  report += "file\tline\tkind\tmessage\n";
  for (const auto& e : result.errors) report += e.file + "\t0\terror\t" + e.message + '\n';
  for (const auto& s : result.skipped) report += s.file + '\t' + std::to_string(s.line) + "\tskip\t" + s.reason + '\n';
  write_file(fs::path(out_dir) / "report.tsv", report);
  if (!sequences.empty()) write_file(fs::path(out_dir) / "sequences.fasta", data::to_fasta(sequences));
  return result;
}

data::SplitSpec cmd_split(const SplitOptions& options) {
  if (options.out_dir.empty()) throw ConfigError("split needs an output directory");
  const data::PPIGraph g = data::parse_ppi_tsv(options.ppi).graph;
  const data::SplitSpec spec = data::split_graph(g, options.mode, options.fraction, options.seed, options.root);
  ConfigMap params = {{"ppi", options.ppi},
                      {"mode", data::to_string(options.mode)},
                      {"fraction", format_double(options.fraction)},
                      {"seed", std::to_string(options.seed)},
                      {"root", options.root.value_or("")}};
  const std::string header = artifact_header(fnv1a64(to_config_text(params)));
  fs::create_directories(options.out_dir);
  write_file(fs::path(options.out_dir) / "train.tsv", header + data::to_ppi_text(g, spec.train));
  write_file(fs::path(options.out_dir) / "test.tsv", header + data::to_ppi_text(g, spec.test));
  std::string summary = header;
  summary += "mode=" + data::to_string(spec.mode) + "\n";
  summary += "seed=" + std::to_string(spec.seed) + "\n";
  summary += "fraction=" + format_double(spec.fraction) + "\n";
  summary += "root=" + spec.root + "\n";
  summary += "selected=" + join(spec.selected) + "\n";
  summary += "train_edges=" + std::to_string(spec.train.size()) + "\n";
  summary += "test_edges=" + std::to_string(spec.test.size()) + "\n";
  write_file(fs::path(options.out_dir) / "split.txt", summary);
  return spec;
}

std::vector<eval::ShiftReport> cmd_probe(const ProbeOptions& options) {
  const model::Checkpoint ckpt = model::read_checkpoint(options.checkpoint);
  const model::Model m = model::load_model(ckpt);
  if (!m.has_prompt(options.prompt)) throw ConfigError("unknown prompt '" + options.prompt + "'");
  if (options.out_dir.empty()) throw ConfigError("probe needs an output directory");
  const Corpus corpus = load_sequences(options.fasta, m.config().max_len);
  fs::create_directories(options.out_dir);
  std::vector<eval::ShiftReport> reports;
  for (const auto& seq : corpus.sequences) {
    eval::ShiftReport r = eval::embedding_shift_probe(m, seq, options.prompt, options.cutoff, options.base);
    write_file(fs::path(options.out_dir) / (seq.source_id + ".csv"),
               artifact_header(ckpt.config_hash) + "# prompt=" + options.prompt +
                   " base=" + eval::selection_label(options.base) + " cutoff=" + format_double(options.cutoff) + "\n" +
                   r.to_csv());
    reports.push_back(std::move(r));
  }
  return reports;
}

}  // namespace cfp::cli
