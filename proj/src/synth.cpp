#include "simpdom/synth.hpp"

#include <algorithm>
#include <array>
#include <cstdio>
#include <fstream>
#include <functional>

#include "json.hpp"

#include "simpdom/errors.hpp"
#include "simpdom/neural/tensor.hpp"
#include "simpdom/text.hpp"

namespace simpdom {

namespace {

using Gen = std::function<std::string(nn::Rng&)>;

template <std::size_t N>
const char* pick(nn::Rng& rng, const std::array<const char*, N>& pool) {
  return pool[static_cast<std::size_t>(rng() % N)];
}

std::string digits(nn::Rng& rng, int n) {
  std::string s;
  for (int i = 0; i < n; ++i) s += static_cast<char>('0' + rng() % 10);
  return s;
}

constexpr std::array<const char*, 24> kFirst = {
    "Anna", "Ben", "Clara", "David", "Elena", "Frank", "Grace", "Henry",
    "Iris", "James", "Karen", "Louis", "Maria", "Nathan", "Olivia", "Peter",
    "Rosa", "Samuel", "Tara", "Victor", "Wendy", "Yusuf", "Zoe", "Martin"};
constexpr std::array<const char*, 24> kLast = {
    "Abbott", "Brennan", "Castillo", "Dunmore", "Ellison", "Fischer", "Garrow", "Holt",
    "Ibarra", "Jansen", "Kowalski", "Lindqvist", "Moreau", "Novak", "Okafor", "Pryce",
    "Quinlan", "Rourke", "Sato", "Thornton", "Ulrich", "Varga", "Whitlock", "Yates"};
constexpr std::array<const char*, 20> kAdjective = {
    "Silent", "Golden", "Hidden", "Broken", "Winter", "Crimson", "Distant", "Last",
    "Secret", "Burning", "Quiet", "Wild", "Lost", "Endless", "Hollow", "Northern",
    "Pale", "Restless", "Scarlet", "Forgotten"};
constexpr std::array<const char*, 20> kNoun = {
    "Garden", "River", "Kingdom", "Lantern", "Harbor", "Mirror", "Orchard", "Voyage",
    "Tower", "Empire", "Meadow", "Compass", "Citadel", "Horizon", "Island", "Forest",
    "Shadow", "Signal", "Bridge", "Archive"};
constexpr std::array<const char*, 12> kLabelWord = {
    "Northern", "Blue", "Granite", "Echo", "Velvet", "Atlas",
    "Harbor", "Signal", "Copper", "Lumen", "Orbit", "Meridian"};
constexpr std::array<const char*, 8> kCategory = {
    "Fiction", "Classics", "Poetry", "History", "Jazz", "Folk", "Bestsellers", "New"};
constexpr std::array<const char*, 6> kBadge = {
    "Bestseller", "Signed copy", "Limited edition", "Staff pick", "Free delivery", "Back in stock"};
constexpr std::array<const char*, 10> kFiller = {
    "a", "gripping", "tale", "of", "loss", "and", "hope", "across", "three", "generations"};

std::string person(nn::Rng& rng) { return std::string(pick(rng, kFirst)) + " " + pick(rng, kLast); }

std::string title(nn::Rng& rng) {
  std::string t = std::string("The ") + pick(rng, kAdjective) + " " + pick(rng, kNoun);
  if (rng() % 2) t += std::string(" of the ") + pick(rng, kNoun);
  return t;
}

std::string isbn_like(nn::Rng& rng) {
  return "978-" + digits(rng, 1) + "-" + digits(rng, 4) + "-" + digits(rng, 4) + "-" +
         digits(rng, 1);
}

std::string catalog_like(nn::Rng& rng) { return digits(rng, 4) + "-" + digits(rng, 5); }

std::string price(nn::Rng& rng) {
  return "$" + std::to_string(5 + rng() % 40) + "." + digits(rng, 2);
}

std::string record_label(nn::Rng& rng) {
  return std::string(pick(rng, kLabelWord)) + " " + pick(rng, kNoun) + " Records";
}

std::string year(nn::Rng& rng) { return std::to_string(1960 + rng() % 64); }

std::string blurb(nn::Rng& rng) {
  std::string s;
  const int n = 6 + static_cast<int>(rng() % 6);
  for (int i = 0; i < n; ++i) s += (i ? " " : "") + std::string(pick(rng, kFiller));
  return s + ".";
}

// A labelled row; `attribute` is empty for decoys.
struct Field {
  std::string label;
  std::string attribute;
  Gen value;
  double presence = 1.0;
};

struct VerticalSpec {
  std::string name;
  std::vector<std::string> attributes;
  std::vector<Field> fields;
  std::array<const char*, 2> shops;
};

VerticalSpec book_spec() {
  return {"book",
          {"title", "author", "isbn"},
          {{"by", "author", person},
           {"Edited by", "", person},
           {"ISBN:", "isbn", isbn_like},
           {"EAN:", "", isbn_like},
           {"Price:", "", price, 0.7}},
          {"Paper Lantern Books", "Readers Corner"}};
}

VerticalSpec album_spec() {
  return {"album",
          {"title", "artist", "label", "catalog"},
          {{"by", "artist", person},
           {"Produced by", "", person},
           {"Label:", "label", record_label},
           {"Cat. No.:", "catalog", catalog_like},
           {"Barcode:", "", catalog_like},
           {"Released:", "", year, 0.7}},
          {"Vinyl Vault", "Groove Street"}};
}

RawPage make_page(const VerticalSpec& spec, int family, const std::string& shop,
                  const std::string& page_id, nn::Rng& rng) {
  const std::string name = title(rng);
  std::vector<std::string> values;
  for (const auto& f : spec.fields) {
    std::string v;
    do {
      v = f.value(rng);
    } while (v == name || std::find(values.begin(), values.end(), v) != values.end());
    values.push_back(v);
  }

  GoldMap gold;
  gold["title"] = {name};
  for (std::size_t i = 0; i < spec.fields.size(); ++i) {
    if (!spec.fields[i].attribute.empty()) gold[spec.fields[i].attribute] = {values[i]};
  }

  std::vector<bool> present;
  for (const auto& f : spec.fields) present.push_back(nn::uniform01(rng) < f.presence);
  std::vector<std::string> crumbs;
  const int n_crumbs = 1 + static_cast<int>(rng() % 3);
  for (int i = 0; i < n_crumbs; ++i) crumbs.push_back(pick(rng, kCategory));

  std::string badge_html;
  for (const char* b : kBadge) {
    if (rng() % 3 == 0) badge_html += "<span>" + std::string(b) + "</span> ";
  }

  std::string h;
  if (family == 0) {
    h += "<html>\n<head><title>" + escape_html(shop) + "</title></head>\n<body>\n";
    h += "<div class=\"nav\"><a href=\"/\">Home</a> <a href=\"/browse\">Browse</a> "
         "<a href=\"/help\">Help</a></div>\n<div class=\"crumbs\">";
    for (const auto& c : crumbs) h += "<a href=\"#\">" + escape_html(c) + "</a> ";
    h += "</div>\n";
    h += "<div id=\"main\">\n  <h1>" + escape_html(name) + "</h1>\n";
    h += "  <div class=\"badges\">" + badge_html + "</div>\n";
    h += "  <table class=\"facts\">\n";
    for (std::size_t i = 0; i < spec.fields.size(); ++i) {
      if (!present[i]) continue;
      h += "    <tr><td><b>" + escape_html(spec.fields[i].label) + "</b></td><td><span>" +
           escape_html(values[i]) + "</span></td></tr>\n";
    }
    h += "  </table>\n  <p>" + blurb(rng) + "</p>\n";
    h += "  <ul class=\"links\"><li>Share</li><li>Wishlist</li></ul>\n</div>\n";
    h += "<div class=\"footer\">Copyright " + escape_html(shop) + "</div>\n</body>\n</html>\n";
  } else {
    h += "<html><head><title>" + escape_html(shop) + " online store</title></head><body>\n";
    h += "<div class=\"top\"><ul class=\"menu\"><li><a href=\"/\">Start</a></li>"
         "<li><a href=\"/c\">Catalogue</a></li><li><a href=\"/b\">Basket</a></li></ul></div>\n";
    h += "<div class=\"path\">";
    for (const auto& c : crumbs) h += "<span>" + escape_html(c) + "</span> / ";
    h += "</div>\n<div class=\"item\">\n";
    h += "<div class=\"head\"><div class=\"name\"><h1>" + escape_html(name) + "</h1></div></div>\n";
    h += "<div class=\"badges\">" + badge_html + "</div>\n";
    h += "<div class=\"details\">\n";
    for (std::size_t i = 0; i < spec.fields.size(); ++i) {
      if (!present[i]) continue;
      h += "  <div class=\"row\"><span class=\"k\"><strong>" + escape_html(spec.fields[i].label) +
           "</strong></span> <span class=\"v\">" + escape_html(values[i]) + "</span></div>\n";
    }
    h += "</div>\n<div class=\"about\"><p><em>" + blurb(rng) + "</em></p></div>\n";
    h += "<table class=\"ship\"><tr><td>Ships within two days</td></tr></table>\n";
    h += "</div>\n<div class=\"footer\"><p>" + escape_html(shop) + " online store</p></div>\n";
    h += "</body></html>\n";
  }
  return {page_id, std::move(h), std::move(gold)};
}

std::uint64_t name_salt(const std::string& name) {
  std::uint64_t h = 0;
  for (unsigned char c : name) h = h * 131 + c;
  return h % 1000;
}

RawVertical generate(const VerticalSpec& spec, const SynthOptions& options) {
  if (options.sites < 1 || options.pages_per_site < 1) {
    throw ArgumentError("synthetic corpus needs at least one site and one page");
  }
  RawVertical out{spec.name, spec.attributes, {}};
  for (int s = 0; s < options.sites; ++s) {
    nn::Rng rng(options.seed * 1000003ULL + static_cast<std::uint64_t>(s) * 7919ULL +
                name_salt(spec.name));
    const int family = s % 2;
    std::string shop = spec.shops[static_cast<std::size_t>(family)];
    if (s >= 2) shop += " " + std::to_string(s / 2 + 1);
    RawSite site{spec.name + "-" + std::string(1, static_cast<char>('a' + s % 26)) +
                     (s >= 26 ? std::to_string(s / 26) : ""),
                 {}};
    for (int p = 0; p < options.pages_per_site; ++p) {
      char id[16];
      std::snprintf(id, sizeof id, "%04d", p + 1);
      site.pages.push_back(make_page(spec, family, shop, id, rng));
    }
    out.sites.push_back(std::move(site));
  }
  return out;
}

}  // namespace

RawVertical synth_book(const SynthOptions& options) { return generate(book_spec(), options); }

RawVertical synth_album(const SynthOptions& options) { return generate(album_spec(), options); }

RawVertical synth_vertical(const std::string& name, const SynthOptions& options) {
  if (name == "book") return synth_book(options);
  if (name == "album") return synth_album(options);
  throw ArgumentError("unknown synthetic vertical '" + name + "' (expected book or album)");
}

std::vector<SiteCorpus> build_vertical(const RawVertical& vertical) {
  std::vector<SiteCorpus> out;
  for (const auto& site : vertical.sites) {
    out.push_back(build_site(vertical.name, site.site_id, vertical.attributes, site.pages));
  }
  return out;
}

void write_vertical(const std::filesystem::path& root, const RawVertical& vertical) {
  namespace fs = std::filesystem;
  const fs::path dir = root / vertical.name;
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError("cannot create '" + dir.string() + "': " + ec.message());
  auto write = [](const fs::path& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out || !(out << content)) throw IoError("cannot write '" + path.string() + "'");
  };
  std::string attrs;
  for (const auto& a : vertical.attributes) attrs += a + "\n";
  write(dir / "attributes.txt", attrs);
  for (const auto& site : vertical.sites) {
    fs::create_directories(dir / site.site_id / "pages", ec);
    if (ec) throw IoError("cannot create site directory: " + ec.message());
    std::string gt;
    for (const auto& page : site.pages) {
      write(dir / site.site_id / "pages" / (page.page_id + ".htm"), page.html);
      nlohmann::ordered_json line;
      line["page"] = page.page_id;
      line["attributes"] = page.gold;
      gt += line.dump() + "\n";
    }
    write(dir / site.site_id / "groundtruth.jsonl", gt);
  }
}

}  // namespace simpdom
