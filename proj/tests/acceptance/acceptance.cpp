// One PASS/FAIL line per acceptance criterion; exit status 1 if any fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <iomanip>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "gradcheck.hpp"
#include "simpdom/checkpoint.hpp"
#include "simpdom/evaluator.hpp"
#include "simpdom/html.hpp"
#include "simpdom/ingest.hpp"
#include "simpdom/simplifier.hpp"
#include "simpdom/synth.hpp"
#include "support.hpp"

using namespace simpdom;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(double v, int digits = 4) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

std::string sci(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.1e", v);
  return buf;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

std::vector<SiteCorpus> pick(const std::vector<SiteCorpus>& sites,
                             const std::vector<std::string>& ids) {
  std::vector<SiteCorpus> out;
  for (const auto* s : select_sites(sites, ids)) out.push_back(*s);
  return out;
}

Outcome oracle_equivalence() {
  nn::Rng rng(1000);
  int trees = 0;
  for (; trees < 1000; ++trees) {
    auto tree = testing::random_tree(rng, 50, 6);
    for (int k = 1; k <= kDefaultAncestors; ++k) {
      if (extract_circles(tree, k) != testing::oracle_circles(tree, k)) {
        return {false, "mismatch on tree " + std::to_string(trees) + " at k=" + std::to_string(k)};
      }
    }
  }
  return {true, std::to_string(trees) + " trees, k=1..5"};
}

Outcome book_subtree() {
  auto tree = parse_page(read_file(testing::fixture("book_subtree.html")), "book");
  int rowling = -1;
  for (int id : tree.text_leaves()) {
    if (*tree.node(id).text == "J. K. Rowling") rowling = id;
  }
  if (rowling < 0) return {false, "no 'J. K. Rowling' leaf"};
  const auto circle = extract_circles(tree, kDefaultAncestors).at(rowling);
  const std::string partner =
      circle.partner_id ? *tree.node(*circle.partner_id).text : std::string("<none>");
  bool title = false;
  for (int f : circle.friend_ids) {
    title |= tree.node(f).text->find("Harry Potter and the Sorcerer's Stone") != std::string::npos;
  }
  return {partner == "by" && title,
          "partner='" + partner + "' title friend=" + (title ? "yes" : "no")};
}

Outcome gradient_suite() {
  std::ostringstream detail;
  bool ok = true;
  for (const auto& c : testing::gradient_suite(1)) {
    ok &= c.passed();
    detail << c.name << "=" << std::scientific << std::setprecision(1) << c.report.max_error
           << (c.passed() ? "" : "(!)") << " ";
    if (!c.passed()) detail << "[" << c.report.worst << "] ";
  }
  return {ok, detail.str()};
}

Outcome metric_checks() {
  GoldMap gold{{"title", {"A"}}, {"author", {"B"}}, {"price", {"C"}}};
  const double f1 = page_f1({{"title", "A"}, {"author", "X"}}, gold);
  bool ok = std::abs(f1 - 0.4) <= 1e-12;

  nn::Rng rng(3);
  double worst_sum = 0.0;
  for (int i = 0; i < 1000; ++i) {
    nn::Vec<double> h(7);
    for (Eigen::Index j = 0; j < h.size(); ++j) h(j) = nn::uniform(rng, -30, 30);
    worst_sum = std::max(worst_sum, std::abs(nn::softmax(h).sum() - 1.0));
  }
  const nn::Vec<double> uniform4 = nn::softmax<double>(nn::Vec<double>::Zero(4));
  double worst_ce = 0.0;
  for (int y = 0; y < 4; ++y) {
    worst_ce = std::max(worst_ce, std::abs(nn::cross_entropy(uniform4, y) - std::log(4.0)));
  }
  ok = ok && worst_sum <= 1e-9 && worst_ce <= 1e-9;
  return {ok, "page_f1=" + fmt(f1, 12) + " max|sum p - 1|=" + sci(worst_sum) +
                  " max|CE - ln4|=" + sci(worst_ce)};
}

struct IntraSetup {
  std::vector<SiteCorpus> train_sites, test_sites;
  TrainConfig config;
  std::string split;
};

IntraSetup intra_setup() {
  auto sites = build_vertical(synth_book({2, 20, 0}));
  std::vector<std::string> ids;
  for (const auto& s : sites) ids.push_back(s.site_id);
  auto split = seed_split(ids, 1, 1);
  IntraSetup setup;
  setup.train_sites = pick(sites, split.train);
  setup.test_sites = pick(sites, split.test);
  setup.config.seed = 1;
  setup.split = split.train[0] + "->" + split.test[0];
  return setup;
}

int failures = 0;

void report(const std::string& name, const std::function<Outcome()>& check) {
  const auto start = std::chrono::steady_clock::now();
  Outcome o;
  try {
    o = check();
  } catch (const std::exception& e) {
    o = {false, std::string("exception: ") + e.what()};
  }
  const double secs =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  failures += !o.pass;
  std::cout << (o.pass ? "PASS " : "FAIL ") << name << " (" << fmt(secs, 1) << "s) " << o.detail
            << std::endl;
}

}  // namespace

int main() {
  testing::TempDir dir("acceptance");
  const auto setup = intra_setup();
  double fc_f1 = -1.0;

  report("friend-circle oracle equivalence", oracle_equivalence);
  report("book subtree partner and friends", book_subtree);
  report("gradient suite", [] {
    const auto start = std::chrono::steady_clock::now();
    auto o = gradient_suite();
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    o.pass = o.pass && secs < 60.0;
    return o;
  });
  report("metric checks", metric_checks);

  report("synthetic intra-vertical F1 >= 0.95", [&] {
    auto result = train(setup.train_sites, setup.config);
    fs::create_directories(dir.path() / "run1");
    save_checkpoint(result.model, dir.path() / "run1" / "model.ckpt");
    std::ofstream(dir.path() / "run1.loss") << nlohmann::json(result.epoch_loss).dump();
    fc_f1 = evaluate(result.model, setup.test_sites).mean;
    return Outcome{fc_f1 >= 0.95, setup.split + " held-out F1=" + fmt(fc_f1)};
  });

  report("ablation without friend circle lowers F1", [&] {
    auto config = setup.config;
    config.use_friend_circle = false;
    auto result = train(setup.train_sites, config);
    const double f1 = evaluate(result.model, setup.test_sites).mean;
    return Outcome{fc_f1 >= 0.0 && f1 < fc_f1,
                   "with=" + fmt(fc_f1) + " without=" + fmt(f1)};
  });

  report("cross-vertical transfer", [&] {
    auto source = build_vertical(synth_album({2, 20, 0}));
    auto target = build_vertical(synth_book({2, 20, 0}));
    TrainConfig pre;
    pre.head = Head::kCross;
    pre.seed = 1;
    auto pretrained = train(source, pre);

    const auto a = dir.path() / "a" / "album.ckpt", b = dir.path() / "b" / "album.ckpt";
    fs::create_directories(a.parent_path());
    fs::create_directories(b.parent_path());
    save_checkpoint(pretrained.model, a);
    auto loaded = load_checkpoint(a);
    save_checkpoint(loaded, b);
    bool exact = slurp(a) == slurp(b);
    for (const auto& [name, t] : pretrained.model.tagger.params().tensors()) {
      exact = exact && loaded.tagger.params().at(name).value == t.value;
    }

    std::vector<std::string> ids;
    for (const auto& s : target) ids.push_back(s.site_id);
    int wins = 0;
    std::string runs;
    bool shapes = loaded.tagger.shape().attributes == 4;
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
      auto split = seed_split(ids, 1, seed);
      auto train_sites = pick(target, split.train);
      auto test_sites = pick(target, split.test);
      TrainConfig fine;
      fine.head = Head::kCross;
      fine.epochs = 1;
      fine.seed = seed;
      auto tuned = finetune(loaded, train_sites, fine);
      shapes = shapes && tuned.model.tagger.shape().attributes == 3;
      const double ft = evaluate(tuned.model, test_sites).mean;
      const double scratch = evaluate(train(train_sites, fine).model, test_sites).mean;
      wins += ft >= scratch;
      runs += " s" + std::to_string(seed) + ":" + fmt(ft, 3) + "/" + fmt(scratch, 3);
    }
    return Outcome{shapes && exact && wins >= 3,
                   std::string("M 4->3 ") + (shapes ? "ok" : "BAD") + ", round trip " +
                       (exact ? "bit-exact" : "DIFFERS") + ", finetuned>=scratch in " +
                       std::to_string(wins) + "/5 (ft/scratch" + runs + ")"};
  });

  report("determinism", [&] {
    auto result = train(setup.train_sites, setup.config);
    fs::create_directories(dir.path() / "run2");
    save_checkpoint(result.model, dir.path() / "run2" / "model.ckpt");
    std::ofstream(dir.path() / "run2.loss") << nlohmann::json(result.epoch_loss).dump();
    const auto one = dir.path() / "run1" / "model.ckpt", two = dir.path() / "run2" / "model.ckpt";
    const bool ckpt = slurp(one) == slurp(two) &&
                      slurp(vocab_path_for(one)) == slurp(vocab_path_for(two));
    const bool loss = slurp(dir.path() / "run1.loss") == slurp(dir.path() / "run2.loss");
    return Outcome{ckpt && loss, std::string("checkpoints ") + (ckpt ? "identical" : "DIFFER") +
                                     ", loss logs " + (loss ? "identical" : "DIFFER")};
  });

  std::cout << (failures == 0 ? "all criteria passed" : std::to_string(failures) + " failed")
            << std::endl;
  return failures == 0 ? 0 : 1;
}
