#include "simpdom/featurizer.hpp"

#include <fstream>

#include "json.hpp"

#include "simpdom/errors.hpp"
#include "simpdom/text.hpp"

namespace simpdom {

namespace {

constexpr int kVocabFormatVersion = 1;

Vocab::Table assign_ids(const std::map<std::string, int>& counts, int min_count) {
  Vocab::Table table;
  int next = 2;
  for (const auto& [token, count] : counts) {
    if (count >= min_count) table.emplace(token, next++);
  }
  return table;
}

void validate_table(const Vocab::Table& table, const char* name) {
  std::vector<char> seen(table.size() + 2, 0);
  for (const auto& [token, id] : table) {
    if (id < 2 || id >= static_cast<int>(seen.size()) || seen[id]) {
      throw ConfigError(std::string("vocab table '") + name +
                        "' ids must be dense from 2 and unique");
    }
    seen[id] = 1;
  }
}

std::vector<std::vector<int>> char_ids(const std::vector<std::string>& words,
                                       const Vocab& vocab) {
  std::vector<std::vector<int>> out;
  out.reserve(words.size());
  for (const auto& w : words) {
    std::vector<int> ids;
    for (const auto& ch : utf8_chars(w)) ids.push_back(vocab.char_id(ch));
    out.push_back(std::move(ids));
  }
  return out;
}

std::vector<int> word_ids(const std::vector<std::string>& words, const Vocab& vocab) {
  std::vector<int> out;
  out.reserve(words.size());
  for (const auto& w : words) out.push_back(vocab.word_id(w));
  return out;
}

}  // namespace

Vocab::Vocab(Table words, Table chars, Table tags)
    : words_(std::move(words)), chars_(std::move(chars)), tags_(std::move(tags)) {
  validate_table(words_, "words");
  validate_table(chars_, "chars");
  validate_table(tags_, "tags");
}

int Vocab::lookup(const Table& table, std::string_view token) {
  auto it = table.find(token);
  return it == table.end() ? kUnknownId : it->second;
}

int Vocab::word_id(std::string_view word) const { return lookup(words_, ascii_lower(word)); }
int Vocab::char_id(std::string_view ch) const { return lookup(chars_, ch); }
int Vocab::tag_id(std::string_view tag) const { return lookup(tags_, tag); }

std::string Vocab::to_json() const {
  nlohmann::ordered_json j;
  j["format"] = "simpdom-vocab";
  j["version"] = kVocabFormatVersion;
  j["reserved"] = {{"<pad>", kPadId}, {"<unk>", kUnknownId}};
  auto dump = [](const Table& t) {
    nlohmann::ordered_json m = nlohmann::ordered_json::object();
    for (const auto& [k, v] : t) m[k] = v;
    return m;
  };
  j["words"] = dump(words_);
  j["chars"] = dump(chars_);
  j["tags"] = dump(tags_);
  return j.dump(1) + "\n";
}

Vocab Vocab::from_json(std::string_view text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw FormatError(std::string("vocab: invalid JSON: ") + e.what(), 0);
  }
  if (!j.is_object() || !j.contains("reserved") || !j["reserved"].is_object()) {
    throw ConfigError("vocab: missing reserved-id manifest");
  }
  const auto& reserved = j["reserved"];
  if (reserved.value("<pad>", -1) != kPadId || reserved.value("<unk>", -1) != kUnknownId) {
    throw ConfigError("vocab: reserved ids must be <pad>=0 and <unk>=1");
  }
  auto read = [&](const char* name) {
    if (!j.contains(name) || !j[name].is_object()) {
      throw ConfigError(std::string("vocab: missing table '") + name + "'");
    }
    Table t;
    for (const auto& [k, v] : j[name].items()) {
      if (!v.is_number_integer()) throw ConfigError("vocab: non-integer id");
      t.emplace(k, v.get<int>());
    }
    return t;
  };
  return Vocab(read("words"), read("chars"), read("tags"));
}

void Vocab::save(const std::filesystem::path& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  out << to_json();
}

Vocab Vocab::load(const std::filesystem::path& path) {
  return from_json(read_file(path));
}

Vocab build_vocabs(std::span<const SiteCorpus> sites, int min_count) {
  if (sites.empty()) throw ArgumentError("build_vocabs: empty corpus");
  std::map<std::string, int> words, chars, tags;
  for (const auto& site : sites) {
    for (const auto& page : site.pages) {
      for (const auto& node : page.tree.nodes()) {
        ++tags[node.tag];
        if (!node.text) continue;
        for (const auto& w : split_words(*node.text)) {
          ++words[ascii_lower(w)];
          for (const auto& ch : utf8_chars(w)) ++chars[ch];
        }
      }
    }
  }
  return Vocab(assign_ids(words, min_count), assign_ids(chars, min_count),
               assign_ids(tags, 1));
}

int position_bucket(const DomNode& node, const DomTree& tree, int buckets) {
  if (buckets < 1) throw ArgumentError("position_bucket: buckets must be >= 1");
  const long long total = static_cast<long long>(tree.text_leaves().size());
  long long rank = tree.text_leaf_rank(node.id);
  if (total == 0 || rank == 0) return 1;
  long long bucket = (buckets * rank + total - 1) / total;
  return static_cast<int>(std::clamp<long long>(bucket, 1, buckets));
}

int leaf_tag_id(const DomNode& node, const Vocab& vocab) {
  if (!node.is_text_leaf()) {
    throw ArgumentError("leaf_tag_id: node " + node.indexed_xpath + " is not a text leaf");
  }
  return vocab.tag_id(node.tag);
}

NodeFeatures featurize(const DomNode& node, const FriendCircle& circle,
                       const DomTree& tree, const Vocab& vocab,
                       const FeatureCaps& caps) {
  NodeFeatures f;
  auto node_words = split_words(truncate_text(node.text.value_or(""), caps.node_words));
  f.node_word_ids = word_ids(node_words, vocab);
  f.node_char_ids = char_ids(node_words, vocab);

  if (circle.partner_id) {
    const auto& partner = tree.node(*circle.partner_id);
    auto words = split_words(truncate_text(partner.text.value_or(""), caps.node_words));
    f.partner_word_ids = word_ids(words, vocab);
    f.partner_char_ids = char_ids(words, vocab);
  }

  std::vector<std::string> friend_words;
  for (int id : circle.friend_ids) {
    const auto& fr = tree.node(id);
    for (auto& w : split_words(truncate_text(fr.text.value_or(""), caps.node_words))) {
      if (static_cast<int>(friend_words.size()) >= caps.friends_words) break;
      friend_words.push_back(std::move(w));
    }
  }
  f.friends_word_ids = word_ids(friend_words, vocab);
  f.friends_char_ids = char_ids(friend_words, vocab);

  for (const auto& tag : tag_path(node, tree)) f.xpath_tag_ids.push_back(vocab.tag_id(tag));
  f.leaf_tag_id = leaf_tag_id(node, vocab);
  f.position_bucket = position_bucket(node, tree, caps.buckets);
  return f;
}

}  // namespace simpdom
