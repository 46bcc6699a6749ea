#include "simpdom/evaluator.hpp"

#include <algorithm>
#include <cstdio>
#include <numeric>
#include <sstream>

#include "simpdom/errors.hpp"

namespace simpdom {

namespace {

double mean_of(const std::vector<double>& xs) {
  if (xs.empty()) return 0.0;
  return std::accumulate(xs.begin(), xs.end(), 0.0) / static_cast<double>(xs.size());
}

std::vector<SiteCorpus> copy_sites(std::span<const SiteCorpus> sites,
                                   const std::vector<std::string>& ids) {
  std::vector<SiteCorpus> out;
  for (const auto* s : select_sites(sites, ids)) out.push_back(*s);
  return out;
}

std::vector<std::string> site_ids(std::span<const SiteCorpus> sites) {
  std::vector<std::string> ids;
  for (const auto& s : sites) ids.push_back(s.site_id);
  return ids;
}

std::string fixed(double v, int digits = 4) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

nlohmann::ordered_json scores_json(const Scores& s) {
  nlohmann::ordered_json j;
  j["mean_f1"] = s.mean;
  j["site_f1"] = s.site_mean;
  nlohmann::ordered_json attrs;
  for (const auto& [name, c] : s.attributes) {
    attrs[name] = {{"f1", c.f1()}, {"correct", c.correct}, {"predicted", c.predicted},
                   {"gold", c.gold}};
  }
  j["attribute_f1"] = attrs;
  auto pages = nlohmann::ordered_json::array();
  for (const auto& p : s.pages) pages.push_back({{"site", p.site}, {"page", p.page}, {"f1", p.f1}});
  j["pages"] = std::move(pages);
  return j;
}

}  // namespace

double page_f1(const std::map<std::string, std::string>& predicted, const GoldMap& gold) {
  int gold_count = 0;
  for (const auto& [_, values] : gold) {
    if (!values.empty()) ++gold_count;
  }
  const auto pred_count = static_cast<int>(predicted.size());
  if (gold_count == 0 && pred_count == 0) return 1.0;
  int correct = 0;
  for (const auto& [attr, value] : predicted) {
    auto it = gold.find(attr);
    if (it != gold.end() && std::find(it->second.begin(), it->second.end(), value) != it->second.end()) {
      ++correct;
    }
  }
  const double p = pred_count ? static_cast<double>(correct) / pred_count : 0.0;
  const double r = gold_count ? static_cast<double>(correct) / gold_count : 0.0;
  return p + r == 0.0 ? 0.0 : 2.0 * p * r / (p + r);
}

SiteSplit seed_split(std::vector<std::string> sites, int k, std::uint64_t seed, int rotation) {
  const auto n = static_cast<int>(sites.size());
  if (k < 1 || k >= n) {
    throw ArgumentError("k must be in [1, " + std::to_string(n - 1) + "], got " +
                        std::to_string(k));
  }
  if (rotation < 0) throw ArgumentError("rotation must be non-negative");
  std::sort(sites.begin(), sites.end());
  if (std::adjacent_find(sites.begin(), sites.end()) != sites.end()) {
    throw ArgumentError("duplicate site id in split");
  }
  nn::Rng rng(seed);
  for (std::size_t i = sites.size(); i > 1; --i) {
    std::swap(sites[i - 1], sites[static_cast<std::size_t>(rng() % i)]);
  }
  SiteSplit split;
  std::vector<bool> used(sites.size(), false);
  for (int j = 0; j < k; ++j) {
    const auto idx = static_cast<std::size_t>((rotation + j) % n);
    used[idx] = true;
    split.train.push_back(sites[idx]);
  }
  for (std::size_t i = 0; i < sites.size(); ++i) {
    if (!used[i]) split.test.push_back(sites[i]);
  }
  return split;
}

double AttributeCounts::f1() const {
  if (predicted + gold == 0) return 1.0;
  return 2.0 * correct / static_cast<double>(predicted + gold);
}

Scores evaluate(const TrainedModel& model, std::span<const SiteCorpus> sites) {
  Scores s;
  std::vector<double> site_means;
  for (const auto& site : sites) {
    if (site.attributes != model.attributes) {
      throw SchemaError("site '" + site.site_id + "' does not match the model's attributes");
    }
    std::vector<double> f1s;
    for (const auto& page : site.pages) {
      auto ext = extract_page(model, page.tree);
      const double f1 = page_f1(ext.values, page.gold);
      f1s.push_back(f1);
      s.pages.push_back({site.site_id, page.page_id, f1});
      for (const auto& attr : model.attributes) {
        auto& c = s.attributes[attr];
        auto pred = ext.values.find(attr);
        auto gold = page.gold.find(attr);
        const bool has_gold = gold != page.gold.end() && !gold->second.empty();
        if (pred != ext.values.end()) ++c.predicted;
        if (has_gold) ++c.gold;
        if (pred != ext.values.end() && has_gold &&
            std::find(gold->second.begin(), gold->second.end(), pred->second) != gold->second.end()) {
          ++c.correct;
        }
      }
    }
    s.site_mean[site.site_id] = mean_of(f1s);
    site_means.push_back(s.site_mean[site.site_id]);
  }
  s.mean = mean_of(site_means);
  return s;
}

std::vector<const SiteCorpus*> select_sites(std::span<const SiteCorpus> sites,
                                            const std::vector<std::string>& ids) {
  std::vector<const SiteCorpus*> out;
  for (const auto& id : ids) {
    auto it = std::find_if(sites.begin(), sites.end(),
                           [&](const SiteCorpus& s) { return s.site_id == id; });
    if (it == sites.end()) throw LookupError("unknown site '" + id + "'");
    out.push_back(&*it);
  }
  return out;
}

double EvalReport::mean() const {
  std::vector<double> xs;
  for (const auto& r : runs) xs.push_back(r.scores.mean);
  return mean_of(xs);
}

double EvalReport::scratch_mean() const {
  std::vector<double> xs;
  for (const auto& r : runs) {
    if (r.scratch) xs.push_back(r.scratch->mean);
  }
  return mean_of(xs);
}

std::map<std::string, double> EvalReport::attribute_f1() const {
  std::map<std::string, AttributeCounts> total;
  for (const auto& r : runs) {
    for (const auto& [name, c] : r.scores.attributes) {
      total[name].correct += c.correct;
      total[name].predicted += c.predicted;
      total[name].gold += c.gold;
    }
  }
  std::map<std::string, double> out;
  for (const auto& [name, c] : total) out[name] = c.f1();
  return out;
}

nlohmann::ordered_json EvalReport::to_json() const {
  nlohmann::ordered_json j;
  j["protocol"] = protocol;
  j["vertical"] = vertical;
  if (!source_vertical.empty()) j["source_vertical"] = source_vertical;
  j["k"] = k;
  j["config"] = config;
  j["mean_f1"] = mean();
  if (protocol == "cross") {
    j["scratch_mean_f1"] = scratch_mean();
    j["delta_f1"] = mean() - scratch_mean();
  }
  j["attribute_f1"] = attribute_f1();
  auto runs_json = nlohmann::ordered_json::array();
  for (const auto& r : runs) {
    nlohmann::ordered_json rj;
    rj["seed"] = r.seed;
    rj["rotation"] = r.rotation;
    rj["train_sites"] = r.split.train;
    rj["test_sites"] = r.split.test;
    rj["scores"] = scores_json(r.scores);
    if (r.scratch) rj["scratch"] = scores_json(*r.scratch);
    runs_json.push_back(std::move(rj));
  }
  j["runs"] = std::move(runs_json);
  return j;
}

std::string EvalReport::to_table() const {
  const bool cross = protocol == "cross";
  std::ostringstream out;
  out << protocol << " | vertical " << vertical;
  if (!source_vertical.empty()) out << " | source " << source_vertical;
  out << " | k=" << k << "\n";

  std::vector<std::vector<std::string>> rows;
  rows.push_back({"seed", "rot", "train", "f1"});
  if (cross) {
    rows[0].push_back("scratch");
    rows[0].push_back("delta");
  }
  auto join = [](const std::vector<std::string>& xs) {
    std::string s;
    for (const auto& x : xs) s += (s.empty() ? "" : ",") + x;
    return s;
  };
  for (const auto& r : runs) {
    std::vector<std::string> row{std::to_string(r.seed), std::to_string(r.rotation),
                                 join(r.split.train), fixed(r.scores.mean)};
    if (cross) {
      const double sm = r.scratch ? r.scratch->mean : 0.0;
      row.push_back(fixed(sm));
      row.push_back(fixed(r.scores.mean - sm));
    }
    rows.push_back(std::move(row));
  }
  std::vector<std::string> total{"mean", "", "", fixed(mean())};
  if (cross) {
    total.push_back(fixed(scratch_mean()));
    total.push_back(fixed(mean() - scratch_mean()));
  }
  rows.push_back(std::move(total));
  for (const auto& [name, f1] : attribute_f1()) rows.push_back({"attr", "", name, fixed(f1)});

  std::vector<std::size_t> width(rows[0].size(), 0);
  for (const auto& row : rows) {
    for (std::size_t i = 0; i < row.size(); ++i) width[i] = std::max(width[i], row[i].size());
  }
  for (const auto& row : rows) {
    std::string line;
    for (std::size_t i = 0; i < row.size(); ++i) {
      std::string cell = row[i];
      cell.resize(width[i], ' ');
      line += (i ? "  " : "") + cell;
    }
    while (!line.empty() && line.back() == ' ') line.pop_back();
    out << line << "\n";
  }
  return out.str();
}

EvalReport run_intra(std::span<const SiteCorpus> sites, int k,
                     const std::vector<std::uint64_t>& seeds, const TrainConfig& config,
                     int rotations) {
  if (sites.empty()) throw ArgumentError("run_intra: no sites");
  if (seeds.empty()) throw ArgumentError("run_intra: no seeds");
  EvalReport report;
  report.protocol = "intra";
  report.vertical = sites.front().vertical;
  report.k = k;
  report.config = config.to_json();
  for (auto seed : seeds) {
    for (int r = 0; r < rotations; ++r) {
      RunRecord run{seed, r, seed_split(site_ids(sites), k, seed, r), {}, std::nullopt};
      TrainConfig c = config;
      c.seed = seed;
      auto train_sites = copy_sites(sites, run.split.train);
      auto test_sites = copy_sites(sites, run.split.test);
      auto trained = train(train_sites, c);
      run.scores = evaluate(trained.model, test_sites);
      report.runs.push_back(std::move(run));
    }
  }
  return report;
}

EvalReport run_cross(std::span<const SiteCorpus> source, std::span<const SiteCorpus> target,
                     int k, const std::vector<std::uint64_t>& seeds,
                     const TrainConfig& pretrain_config, const TrainConfig& finetune_config,
                     int rotations) {
  if (source.empty() || target.empty()) throw ArgumentError("run_cross: empty vertical");
  if (seeds.empty()) throw ArgumentError("run_cross: no seeds");
  if (source.front().vertical == target.front().vertical) {
    throw ArgumentError("source and target vertical are both '" + target.front().vertical +
                        "'; a vertical cannot be its own out-of-domain source");
  }
  TrainConfig pre = pretrain_config;
  pre.head = Head::kCross;
  TrainConfig fine = finetune_config;
  fine.head = Head::kCross;

  EvalReport report;
  report.protocol = "cross";
  report.vertical = target.front().vertical;
  report.source_vertical = source.front().vertical;
  report.k = k;
  report.config = {{"pretrain", pre.to_json()}, {"finetune", fine.to_json()}};

  auto pretrained = train(source, pre);
  for (auto seed : seeds) {
    for (int r = 0; r < rotations; ++r) {
      RunRecord run{seed, r, seed_split(site_ids(target), k, seed, r), {}, std::nullopt};
      TrainConfig c = fine;
      c.seed = seed;
      auto train_sites = copy_sites(target, run.split.train);
      auto test_sites = copy_sites(target, run.split.test);
      auto tuned = finetune(pretrained.model, train_sites, c);
      run.scores = evaluate(tuned.model, test_sites);
      auto scratch = train(train_sites, c);
      run.scratch = evaluate(scratch.model, test_sites);
      report.runs.push_back(std::move(run));
    }
  }
  return report;
}

}  // namespace simpdom
