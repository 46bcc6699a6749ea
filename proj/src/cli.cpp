#include "simpdom/cli.hpp"

#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "simpdom/cache.hpp"
#include "simpdom/checkpoint.hpp"
#include "simpdom/errors.hpp"
#include "simpdom/evaluator.hpp"
#include "simpdom/html.hpp"
#include "simpdom/simplifier.hpp"
#include "simpdom/synth.hpp"

namespace simpdom {

namespace fs = std::filesystem;
using ojson = nlohmann::ordered_json;

int exit_code_for(const std::exception& e) {
  if (dynamic_cast<const ArgumentError*>(&e) || dynamic_cast<const ConfigError*>(&e) ||
      dynamic_cast<const LookupError*>(&e)) {
    return kExitUsage;
  }
  if (dynamic_cast<const IoError*>(&e)) return kExitIo;
  if (dynamic_cast<const ParseError*>(&e) || dynamic_cast<const FormatError*>(&e) ||
      dynamic_cast<const SchemaError*>(&e) || dynamic_cast<const CorruptionError*>(&e) ||
      dynamic_cast<const EmptyDocumentError*>(&e) || dynamic_cast<const StructuralError*>(&e) ||
      dynamic_cast<const IncompatibleHeadError*>(&e)) {
    return kExitDataFormat;
  }
  if (dynamic_cast<const TrainingError*>(&e) || dynamic_cast<const OptimizerError*>(&e)) {
    return kExitDivergence;
  }
  return kExitFailure;
}

namespace {

struct Options {
  int jobs = 1;
  int verbose = 0;

  std::string corpus;
  std::string vertical;
  std::string source;
  std::string config_file;
  std::string checkpoint;
  std::string out_path;
  std::string loss_log;
  std::string cache_dir;
  std::string node_xpath;
  std::vector<std::string> pages;
  std::vector<std::string> gen_verticals;
  std::vector<std::uint64_t> seeds;

  int k = 3;
  std::uint64_t seed = 0;
  bool seed_set = false;
  int rotation = 0;
  int rotations = 1;
  int epochs = -1;
  int pretrain_epochs = -1;
  std::string head;
  int k_ancestors = -1;
  int max_friends = -1;
  bool untrimmed = false;
  bool all_sites = false;
  bool table = false;
  int sites = 2;
  int pages_per_site = 20;
};

void require_dir(const std::string& path, const char* what) {
  if (path.empty()) throw ArgumentError(std::string(what) + " is required");
  if (!fs::is_directory(path)) {
    throw ArgumentError(std::string(what) + " not found: " + path);
  }
}

TrainConfig base_config(const Options& o) {
  TrainConfig c;
  if (!o.config_file.empty()) {
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(read_file(o.config_file));
    } catch (const nlohmann::json::parse_error& e) {
      throw ConfigError("config file '" + o.config_file + "' is not valid JSON: " + e.what());
    }
    c = TrainConfig::from_json(j);
  }
  return c;
}

TrainConfig apply_overrides(TrainConfig c, const Options& o) {
  if (o.seed_set) c.seed = o.seed;
  if (o.epochs >= 0) c.epochs = o.epochs;
  if (!o.head.empty()) c.head = head_from_string(o.head);
  if (o.k_ancestors > 0) c.k_ancestors = o.k_ancestors;
  if (o.max_friends > 0) c.max_friends = o.max_friends;
  c.validate();
  return c;
}

std::vector<std::string> ids_of(const std::vector<SiteCorpus>& sites) {
  std::vector<std::string> ids;
  for (const auto& s : sites) ids.push_back(s.site_id);
  return ids;
}

std::vector<SiteCorpus> pick(const std::vector<SiteCorpus>& sites,
                             const std::vector<std::string>& ids) {
  std::vector<SiteCorpus> out;
  for (const auto* s : select_sites(sites, ids)) out.push_back(*s);
  return out;
}

ojson split_json(const Options& o, const SiteSplit& split) {
  return {{"k", o.k},
          {"seed", o.seed},
          {"rotation", o.rotation},
          {"train_sites", split.train},
          {"test_sites", split.test}};
}

SiteSplit make_split(const Options& o, const std::vector<SiteCorpus>& sites) {
  if (o.all_sites) return {ids_of(sites), {}};
  return seed_split(ids_of(sites), o.k, o.seed, o.rotation);
}

EpochHook progress(const Options& o, std::ostream& err) {
  if (o.verbose == 0) return {};
  return [&err](int epoch, double loss, const TrainedModel&) {
    err << "epoch " << epoch << " loss " << loss << "\n";
  };
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f || !(f << text)) throw IoError("cannot write '" + path + "'");
}

void emit(std::ostream& out, const ojson& j, const std::string& path = "") {
  const std::string text = j.dump(2) + "\n";
  if (!path.empty()) write_text(path, text);
  out << text;
}

int cmd_generate(const Options& o, std::ostream& out) {
  if (o.out_path.empty()) throw ArgumentError("--out is required");
  auto verticals = o.gen_verticals.empty() ? std::vector<std::string>{"book", "album"}
                                           : o.gen_verticals;
  for (const auto& v : verticals) {
    auto raw = synth_vertical(v, {o.sites, o.pages_per_site, o.seed});
    write_vertical(o.out_path, raw);
    out << ojson{{"vertical", v}, {"sites", raw.sites.size()},
                 {"pages", raw.sites.size() * static_cast<std::size_t>(o.pages_per_site)}}
               .dump()
        << "\n";
  }
  return kExitOk;
}

int cmd_preprocess(const Options& o, std::ostream& out) {
  require_dir(o.corpus, "corpus directory");
  TrainConfig c = apply_overrides(base_config(o), o);
  const fs::path cache = o.cache_dir.empty() ? cache_dir_from_env(".simpdom-cache")
                                             : fs::path(o.cache_dir);
  auto verticals = o.vertical.empty() ? list_verticals(o.corpus)
                                      : std::vector<std::string>{o.vertical};
  for (const auto& v : verticals) {
    for (const auto& e :
         preprocess_vertical(o.corpus, v, cache, c.k_ancestors, c.max_friends, o.jobs)) {
      out << ojson{{"vertical", e.vertical},
                   {"site", e.site},
                   {"cache", e.hit ? "hit" : "built"},
                   {"file", e.file.string()}}
                 .dump()
          << "\n";
    }
  }
  return kExitOk;
}

int cmd_train(const Options& o, std::ostream& out, std::ostream& err) {
  require_dir(o.corpus, "corpus directory");
  if (o.vertical.empty()) throw ArgumentError("--vertical is required");
  if (o.out_path.empty()) throw ArgumentError("--out is required");
  TrainConfig c = apply_overrides(base_config(o), o);
  auto sites = load_vertical(o.corpus, o.vertical, o.jobs);
  auto split = make_split(o, sites);
  auto train_sites = pick(sites, split.train);
  auto result = train(train_sites, c, progress(o, err));
  save_checkpoint(result.model, o.out_path);

  ojson log;
  log["command"] = "train";
  log["vertical"] = o.vertical;
  log["checkpoint"] = o.out_path;
  log["split"] = split_json(o, split);
  log["config"] = c.to_json();
  log["epoch_loss"] = result.epoch_loss;
  emit(out, log, o.loss_log.empty() ? o.out_path + ".loss.json" : o.loss_log);
  return kExitOk;
}

int cmd_finetune(const Options& o, std::ostream& out, std::ostream& err) {
  require_dir(o.corpus, "corpus directory");
  if (o.vertical.empty()) throw ArgumentError("--vertical is required");
  if (o.out_path.empty()) throw ArgumentError("--out is required");
  auto pretrained = load_checkpoint(o.checkpoint);
  TrainConfig c = apply_overrides(
      o.config_file.empty() ? pretrained.config() : base_config(o), o);
  auto sites = load_vertical(o.corpus, o.vertical, o.jobs);
  auto split = make_split(o, sites);
  auto train_sites = pick(sites, split.train);
  auto result = finetune(pretrained, train_sites, c, progress(o, err));
  save_checkpoint(result.model, o.out_path);

  ojson log;
  log["command"] = "finetune";
  log["vertical"] = o.vertical;
  log["source_vertical"] = pretrained.vertical;
  log["checkpoint"] = o.out_path;
  log["pretrained"] = o.checkpoint;
  log["split"] = split_json(o, split);
  log["config"] = result.model.config().to_json();
  log["epoch_loss"] = result.epoch_loss;
  emit(out, log, o.loss_log.empty() ? o.out_path + ".loss.json" : o.loss_log);
  return kExitOk;
}

int cmd_eval(const Options& o, std::ostream& out) {
  require_dir(o.corpus, "corpus directory");
  if (o.vertical.empty()) throw ArgumentError("--vertical is required");
  auto model = load_checkpoint(o.checkpoint);
  auto sites = load_vertical(o.corpus, o.vertical, o.jobs);
  SiteSplit split = o.all_sites ? SiteSplit{{}, ids_of(sites)}
                                : seed_split(ids_of(sites), o.k, o.seed, o.rotation);
  EvalReport report;
  report.protocol = "eval";
  report.vertical = o.vertical;
  report.k = o.k;
  report.config = model.config().to_json();
  RunRecord run{o.seed, o.rotation, split, evaluate(model, pick(sites, split.test)), std::nullopt};
  report.runs.push_back(std::move(run));
  if (o.table) {
    out << report.to_table();
    if (!o.out_path.empty()) write_text(o.out_path, report.to_json().dump(2) + "\n");
  } else {
    emit(out, report.to_json(), o.out_path);
  }
  return kExitOk;
}

int cmd_extract(const Options& o, std::ostream& out) {
  if (o.pages.empty()) throw ArgumentError("at least one page is required");
  auto model = load_checkpoint(o.checkpoint);
  for (const auto& path : o.pages) {
    auto tree = parse_page(read_file(path), fs::path(path).stem().string());
    auto ext = extract_page(model, tree);
    ojson j;
    j["page"] = path;
    j["vertical"] = model.vertical;
    j["attributes"] = ext.values;
    auto preds = ojson::array();
    for (const auto& p : ext.predictions) {
      if (p.label == model.tagger.shape().attributes) continue;
      preds.push_back({{"xpath", tree.node(p.node_id).indexed_xpath},
                       {"attribute", model.attributes[static_cast<std::size_t>(p.label)]},
                       {"probability", p.probability}});
    }
    j["predictions"] = std::move(preds);
    j["config"] = model.config().to_json();
    out << j.dump() << "\n";
  }
  return kExitOk;
}

ojson node_ref(const DomTree& tree, int id) {
  const auto& n = tree.node(id);
  return {{"xpath", n.indexed_xpath}, {"text", n.text.value_or("")}};
}

int cmd_inspect(const Options& o, std::ostream& out) {
  if (o.pages.empty()) throw ArgumentError("at least one page is required");
  const int k = o.k_ancestors > 0 ? o.k_ancestors : kDefaultAncestors;
  const int max_friends = o.max_friends > 0 ? o.max_friends : kDefaultMaxFriends;
  std::vector<DomTree> trees;
  for (const auto& path : o.pages) {
    trees.push_back(parse_page(read_file(path), fs::path(path).stem().string()));
  }
  // Pages given together are treated as one site for fixed-node detection.
  if (trees.size() > 1) {
    auto classes = classify_variable_nodes(trees);
    for (std::size_t i = 0; i < trees.size(); ++i) trees[i].set_node_classes(classes[i]);
  }
  for (std::size_t i = 0; i < trees.size(); ++i) {
    const auto& tree = trees[i];
    auto circles = o.untrimmed ? extract_circles(tree, k) : simplify(tree, k, max_friends);
    std::vector<int> order;
    for (const auto& [id, _] : circles) order.push_back(id);
    std::sort(order.begin(), order.end(), [&](int a, int b) {
      return tree.node(a).dfs_position < tree.node(b).dfs_position;
    });
    for (int id : order) {
      const auto& node = tree.node(id);
      if (!o.node_xpath.empty() && node.indexed_xpath != o.node_xpath) continue;
      const auto& c = circles.at(id);
      ojson j;
      j["page"] = o.pages[i];
      j["xpath"] = node.indexed_xpath;
      j["text"] = node.text.value_or("");
      j["partner"] = c.partner_id ? node_ref(tree, *c.partner_id) : ojson(nullptr);
      auto friends = ojson::array();
      for (int f : c.friend_ids) friends.push_back(node_ref(tree, f));
      j["friends"] = std::move(friends);
      out << j.dump() << "\n";
    }
  }
  return kExitOk;
}

void emit_report(const Options& o, const EvalReport& report, std::ostream& out) {
  if (o.table) {
    out << report.to_table();
    if (!o.out_path.empty()) write_text(o.out_path, report.to_json().dump(2) + "\n");
  } else {
    emit(out, report.to_json(), o.out_path);
  }
}

std::vector<std::uint64_t> seeds_of(const Options& o) {
  if (!o.seeds.empty()) return o.seeds;
  return {o.seed};
}

int cmd_experiment_intra(const Options& o, std::ostream& out) {
  require_dir(o.corpus, "corpus directory");
  if (o.vertical.empty()) throw ArgumentError("--vertical is required");
  TrainConfig c = apply_overrides(base_config(o), o);
  auto sites = load_vertical(o.corpus, o.vertical, o.jobs);
  emit_report(o, run_intra(sites, o.k, seeds_of(o), c, o.rotations), out);
  return kExitOk;
}

int cmd_experiment_cross(const Options& o, std::ostream& out) {
  require_dir(o.corpus, "corpus directory");
  if (o.vertical.empty() || o.source.empty()) {
    throw ArgumentError("--source and --vertical are required");
  }
  if (o.source == o.vertical) {
    throw ArgumentError("source and target vertical are both '" + o.vertical + "'");
  }
  TrainConfig fine = apply_overrides(base_config(o), o);
  TrainConfig pre = fine;
  if (o.pretrain_epochs >= 0) pre.epochs = o.pretrain_epochs;
  auto source = load_vertical(o.corpus, o.source, o.jobs);
  auto target = load_vertical(o.corpus, o.vertical, o.jobs);
  emit_report(o, run_cross(source, target, o.k, seeds_of(o), pre, fine, o.rotations), out);
  return kExitOk;
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  Options o;
  CLI::App app{"Attribute extraction from semi-structured detail pages", "simpdom"};
  app.require_subcommand(1);
  app.fallthrough();
  app.add_option("-j,--jobs", o.jobs, "Worker threads for parallel-safe stages")
      ->check(CLI::PositiveNumber);
  app.add_flag("-v,--verbose", o.verbose, "Print progress to stderr");

  auto add_corpus = [&](CLI::App* cmd) {
    cmd->add_option("--corpus", o.corpus, "Corpus root directory")->required();
  };
  auto add_split = [&](CLI::App* cmd) {
    cmd->add_option("--k", o.k, "Number of seed (training) sites");
    cmd->add_option("--seed", o.seed, "Seed for the site split and training")
        ->each([&](const std::string&) { o.seed_set = true; });
    cmd->add_option("--rotation", o.rotation, "Split rotation");
  };
  auto add_train = [&](CLI::App* cmd) {
    cmd->add_option("--config", o.config_file, "JSON training configuration");
    cmd->add_option("--epochs", o.epochs, "Override the number of epochs");
  };

  auto* gen = app.add_subcommand("generate", "Write a synthetic corpus");
  gen->add_option("--out", o.out_path, "Corpus root to write")->required();
  gen->add_option("--vertical", o.gen_verticals, "book and/or album (default both)");
  gen->add_option("--sites", o.sites, "Sites per vertical");
  gen->add_option("--pages", o.pages_per_site, "Pages per site");
  gen->add_option("--seed", o.seed, "Generator seed");

  auto* pre = app.add_subcommand("preprocess", "Parse and simplify a corpus into the cache");
  add_corpus(pre);
  pre->add_option("--vertical", o.vertical, "Only this vertical");
  pre->add_option("--cache-dir", o.cache_dir, "Cache directory (default $SIMPDOM_CACHE_DIR)");
  pre->add_option("--config", o.config_file, "JSON configuration (k_ancestors, max_friends)");

  auto* tr = app.add_subcommand("train", "Train a model on k seed sites");
  add_corpus(tr);
  tr->add_option("--vertical", o.vertical, "Vertical to train on")->required();
  add_split(tr);
  add_train(tr);
  tr->add_option("--head", o.head, "intra or cross");
  tr->add_flag("--all-sites", o.all_sites, "Train on every site of the vertical");
  tr->add_option("--out", o.out_path, "Checkpoint path")->required();
  tr->add_option("--loss-log", o.loss_log, "Loss log path (default <out>.loss.json)");

  auto* ft = app.add_subcommand("finetune", "Finetune a cross-head checkpoint on a new vertical");
  add_corpus(ft);
  ft->add_option("--checkpoint", o.checkpoint, "Pretrained checkpoint")->required();
  ft->add_option("--vertical", o.vertical, "Target vertical")->required();
  add_split(ft);
  add_train(ft);
  ft->add_flag("--all-sites", o.all_sites, "Finetune on every site of the vertical");
  ft->add_option("--out", o.out_path, "Checkpoint path")->required();
  ft->add_option("--loss-log", o.loss_log, "Loss log path (default <out>.loss.json)");

  auto* ev = app.add_subcommand("eval", "Score a checkpoint on the held-out sites of a split");
  add_corpus(ev);
  ev->add_option("--checkpoint", o.checkpoint, "Checkpoint")->required();
  ev->add_option("--vertical", o.vertical, "Vertical")->required();
  add_split(ev);
  ev->add_flag("--all-sites", o.all_sites, "Score every site");
  ev->add_flag("--table", o.table, "Print a text table instead of JSON");
  ev->add_option("--out", o.out_path, "Also write the JSON report here");

  auto* ex = app.add_subcommand("extract", "Extract attribute values from pages");
  ex->add_option("--checkpoint", o.checkpoint, "Checkpoint")->required();
  ex->add_option("pages", o.pages, "HTML files")->required();

  auto* ic = app.add_subcommand("inspect-circles", "Dump friend circles as JSON lines");
  ic->add_option("pages", o.pages, "HTML files (several are treated as one site)")->required();
  ic->add_option("--node-xpath", o.node_xpath, "Only the node with this indexed xpath");
  ic->add_option("--k", o.k_ancestors, "Ancestors to walk")->check(CLI::PositiveNumber);
  ic->add_option("--max-friends", o.max_friends, "Friends kept per node")
      ->check(CLI::PositiveNumber);
  ic->add_flag("--untrimmed", o.untrimmed, "Skip friend trimming");

  auto* exp = app.add_subcommand("experiment", "Few-shot experiment protocols");
  exp->require_subcommand(1);
  auto* intra = exp->add_subcommand("intra", "Train on k sites, test on the rest");
  add_corpus(intra);
  intra->add_option("--vertical", o.vertical, "Vertical")->required();
  intra->add_option("--k", o.k, "Number of seed sites");
  intra->add_option("--seeds", o.seeds, "Split seeds")->delimiter(',');
  intra->add_option("--rotations", o.rotations, "Rotations per seed")
      ->check(CLI::PositiveNumber);
  add_train(intra);
  intra->add_flag("--table", o.table, "Print a text table instead of JSON");
  intra->add_option("--out", o.out_path, "Also write the JSON report here");

  auto* cross = exp->add_subcommand("cross", "Pretrain on one vertical, finetune on another");
  add_corpus(cross);
  cross->add_option("--source", o.source, "Pretraining vertical")->required();
  cross->add_option("--vertical", o.vertical, "Target vertical")->required();
  cross->add_option("--k", o.k, "Number of seed sites");
  cross->add_option("--seeds", o.seeds, "Split seeds")->delimiter(',');
  cross->add_option("--rotations", o.rotations, "Rotations per seed")
      ->check(CLI::PositiveNumber);
  add_train(cross);
  cross->add_option("--pretrain-epochs", o.pretrain_epochs, "Epochs on the source vertical");
  cross->add_flag("--table", o.table, "Print a text table instead of JSON");
  cross->add_option("--out", o.out_path, "Also write the JSON report here");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (*gen) return cmd_generate(o, out);
    if (*pre) return cmd_preprocess(o, out);
    if (*tr) return cmd_train(o, out, err);
    if (*ft) return cmd_finetune(o, out, err);
    if (*ev) return cmd_eval(o, out);
    if (*ex) return cmd_extract(o, out);
    if (*ic) return cmd_inspect(o, out);
    if (*intra) return cmd_experiment_intra(o, out);
    if (*cross) return cmd_experiment_cross(o, out);
  } catch (const std::exception& e) {
    err << "simpdom: " << e.what() << "\n";
    return exit_code_for(e);
  }
  return kExitUsage;
}

}  // namespace simpdom
