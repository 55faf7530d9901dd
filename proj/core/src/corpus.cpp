#include "spanclean/corpus.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

namespace spanclean {

namespace fs = std::filesystem;

namespace {

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot read " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path);
  out << content;
}

DocumentStore ingest_records_file(const std::string& path,
                                  const Alphabet& alphabet) {
  DocumentStore store;
  store.origin = path;
  const std::string text = read_file(path);

  std::size_t pos = 0;
  while (true) {
    std::size_t start = text.find("<RECORD", pos);
    if (start == std::string::npos) break;
    std::size_t cursor = start + 7;
    while (cursor < text.size() && text[cursor] == ' ') ++cursor;
    if (text.compare(cursor, 3, "ID=") != 0)
      throw Error("malformed record header at offset " +
                  std::to_string(start + 1) + " in " + path);
    cursor += 3;
    bool quoted = cursor < text.size() && text[cursor] == '"';
    if (quoted) ++cursor;
    std::size_t id_start = cursor;
    while (cursor < text.size() && text[cursor] != '"' && text[cursor] != '>')
      ++cursor;
    std::string id = text.substr(id_start, cursor - id_start);
    if (id.empty())
      throw Error("malformed record header (empty id) at offset " +
                  std::to_string(start + 1) + " in " + path);
    std::size_t end = text.find("</RECORD>", cursor);
    if (end == std::string::npos)
      throw Error("record " + id + " has no closing tag in " + path);
    end += 9;
    if (end < text.size() && text[end] == '\n') ++end;

    std::string body = text.substr(start, end - start);
    pos = end;

    if (store.documents.count(id))
      throw Error("duplicate record id " + id + " in " + path);
    std::size_t bad = alphabet.first_violation(body);
    if (bad != 0) {
      store.warnings.push_back("record " + id + ": character outside the alphabet at offset " +
                               std::to_string(bad) + "; document skipped");
      continue;
    }
    store.documents.emplace(id, Document{id, std::move(body)});
  }
  return store;
}

DocumentStore ingest_plain_dir(const std::string& path,
                               const Alphabet& alphabet) {
  DocumentStore store;
  store.origin = path;
  std::vector<std::string> names;
  for (const auto& entry : fs::directory_iterator(path))
    if (entry.is_regular_file()) names.push_back(entry.path().filename().string());
  std::sort(names.begin(), names.end());
  for (const auto& name : names) {
    std::string body = read_file((fs::path(path) / name).string());
    if (store.documents.count(name))
      throw Error("duplicate document id " + name);
    std::size_t bad = alphabet.first_violation(body);
    if (bad != 0) {
      store.warnings.push_back(name + ": character outside the alphabet at offset " +
                               std::to_string(bad) + "; document skipped");
      continue;
    }
    store.documents.emplace(name, Document{name, std::move(body)});
  }
  return store;
}

}  // namespace

DocumentStore ingest_corpus(const std::string& path, CorpusFormat format,
                            const Alphabet& alphabet) {
  switch (format) {
    case CorpusFormat::XmlRecords:
      return ingest_records_file(path, alphabet);
    case CorpusFormat::PlainDir:
      return ingest_plain_dir(path, alphabet);
  }
  throw Error("unknown corpus format");
}

void write_store_dir(const DocumentStore& store, const std::string& dir) {
  fs::create_directories(dir);
  for (const auto& [id, doc] : store.documents)
    write_file((fs::path(dir) / (id + ".xml")).string(), doc.text);
}

void write_store_records(const DocumentStore& store, const std::string& path) {
  std::ostringstream ss;
  for (const auto& [id, doc] : store.documents) {
    ss << doc.text;
    if (!doc.text.empty() && doc.text.back() != '\n') ss << "\n";
  }
  write_file(path, ss.str());
}

// ---------------------------------------------------------------------------
// synthetic corpus
// ---------------------------------------------------------------------------

namespace {

struct Rng {
  std::mt19937_64 eng;
  explicit Rng(uint64_t seed) : eng(seed) {}
  uint64_t next() { return eng(); }
  int range(int lo, int hi) {  // inclusive
    return lo + static_cast<int>(next() % static_cast<uint64_t>(hi - lo + 1));
  }
  bool chance(int pct) { return static_cast<int>(next() % 100) < pct; }
  template <typename T>
  const T& pick(const std::vector<T>& v) {
    return v[next() % v.size()];
  }
};

std::string two(int v) {
  std::string s = std::to_string(v);
  return s.size() < 2 ? "0" + s : s;
}

struct DateValue {
  int y, m, d;
};

// Formats observed in the wild: plain 8 digits, slash-separated, already
// normalized, and a rare five-digit-year typo.
std::string format_date(const DateValue& dv, int style) {
  switch (style) {
    case 0:
      return std::to_string(dv.y) + two(dv.m) + two(dv.d);
    case 1:
      return two(dv.m) + "/" + two(dv.d) + "/" + std::to_string(dv.y);
    case 2:
      return std::to_string(dv.y) + "-" + two(dv.m) + "-" + two(dv.d);
    default:
      return two(dv.m) + "/" + two(dv.d) + "/" + std::to_string(dv.y) + "0";
  }
}

const std::vector<std::string> kSurnames = {
    "Warm", "Gie",  "Fairm", "Lund", "Clinch", "Roble",
    "Hart", "Vang", "Mills", "Crane"};
const std::vector<std::string> kComplaints = {
    "chest pain",      "shortness of breath", "abdominal pain",
    "fever and chills", "dizziness",          "back pain"};
const std::vector<std::string> kMedNames = {
    "Aspirin",  "Lipitor",  "Coumadin",   "Norvasc",
    "Macrodantin", "Prednisone", "Lasix",  "Zestril"};
const std::vector<std::string> kUnits = {"mg", "ml", "tsp"};

struct AbbrPair {
  std::string abbr, full;
};
const std::vector<AbbrPair> kAbbrs = {
    {"CT", "Computed Tomography"},
    {"MRI", "Magnetic Resonance Imaging"},
    {"DVT", "Deep Vein Thrombosis"},
    {"TPA", "Tissue Plasminogen Activator"},
    {"IVP", "Intravenous Pyelogram"},
};
const std::vector<std::string> kVerbs = {"received", "had", "performed",
                                         "recommended"};

std::string make_record(Rng& rng, int id) {
  DateValue adm{rng.range(1990, 2014), rng.range(1, 12), rng.range(1, 28)};
  DateValue dis = adm;
  dis.d = std::min(28, adm.d + rng.range(1, 9));

  int adm_style = rng.chance(8) ? 3 : rng.range(0, 2);
  int dis_style = rng.chance(8) ? 3 : rng.range(0, 2);
  int free_style = rng.range(0, 2);

  // DD section: usually the discharge date again, sometimes inconsistent in
  // format or in value.
  DateValue dd = dis;
  int dd_style = dis_style;
  if (rng.chance(20)) dd_style = rng.range(0, 2);
  if (rng.chance(15)) dd.d = std::min(28, dd.d + rng.range(1, 3));

  int age = rng.range(19, 97);
  bool hyphen_age = rng.chance(30);
  const AbbrPair& ab1 = kAbbrs[static_cast<std::size_t>(rng.range(0, 4))];
  bool full1 = rng.chance(40);
  std::string verb1 = kVerbs[static_cast<std::size_t>(rng.range(0, 3))];

  std::ostringstream t;
  t << "<RECORD ID=\"" << id << "\">\n<TEXT>\n";
  t << rng.range(100000000, 999999999) << "\n";
  t << "FIH\n";
  t << rng.range(1000000, 9999999) << "\n";
  t << "HISTORY :\n";
  t << "The patient is a " << age << (hyphen_age ? "-year-old " : " year old ")
    << (rng.chance(50) ? "man" : "woman") << " admitted "
    << format_date(adm, free_style) << " for "
    << kComplaints[static_cast<std::size_t>(rng.range(0, 5))] << " .\n";
  t << "The patient " << verb1 << " " << (full1 ? ab1.full : ab1.abbr)
    << " scan on arrival .\n";
  t << "ADMISSION DATE :\n" << format_date(adm, adm_style) << "\n";
  t << "DISCHARGE DATE :\n" << format_date(dis, dis_style) << "\n";
  t << "HOSPITAL COURSE AND TREATMENT :\n";
  if (rng.chance(60)) {
    t << "The patient was admitted " << format_date(adm, rng.range(0, 2))
      << " and remained stable during the stay .\n";
  } else {
    t << "The hospital course was uneventful .\n";
  }
  if (rng.chance(50)) {
    const AbbrPair& ab2 = kAbbrs[static_cast<std::size_t>(rng.range(0, 4))];
    t << "Follow up imaging " << kVerbs[static_cast<std::size_t>(rng.range(0, 3))]
      << " " << (rng.chance(40) ? ab2.full : ab2.abbr) << " review .\n";
  }
  t << "FOLLOW-UP INSTRUCTIONS :\n";
  t << "The patient will be seen by Dr. "
    << kSurnames[static_cast<std::size_t>(rng.range(0, 9))]
    << " one week post-discharge .\n";

  t << "MEDICATIONS ON DISCHARGE :\n";
  int nmeds = rng.range(2, 4);
  std::vector<std::string> meds;
  std::vector<std::size_t> chosen;
  while (static_cast<int>(chosen.size()) < nmeds) {
    std::size_t m = static_cast<std::size_t>(rng.range(0, 7));
    if (std::find(chosen.begin(), chosen.end(), m) == chosen.end())
      chosen.push_back(m);
  }
  for (std::size_t m : chosen) {
    std::string line = kMedNames[m] + " " + std::to_string(rng.range(1, 500));
    if (rng.chance(15)) {
      line += " ";  // missing unit: dose followed by a bare space
    } else {
      line += " " + kUnits[static_cast<std::size_t>(rng.range(0, 2))];
      if (rng.chance(20)) line += " twice daily";
    }
    meds.push_back(std::move(line));
  }
  if (rng.chance(45)) {
    // improperly formatted list on one line
    for (std::size_t i = 0; i < meds.size(); ++i) {
      if (i) t << (rng.chance(50) ? " , " : " ; ");
      t << meds[i];
    }
    t << "\n";
  } else {
    for (const auto& m : meds) t << m << "\n";
  }

  t << "DD :\n" << format_date(dd, dd_style) << "\n";
  t << "</TEXT>\n</RECORD>\n";
  return t.str();
}

}  // namespace

DocumentStore gen_synthetic_corpus(uint64_t seed, int n) {
  if (n < 0) throw Error("record count must be non-negative");
  Rng rng(seed);
  DocumentStore store;
  store.origin = "synthetic(seed=" + std::to_string(seed) + ")";
  for (int i = 1; i <= n; ++i) {
    std::string id = std::to_string(i);
    store.documents.emplace(id, Document{id, make_record(rng, i)});
  }
  return store;
}

}  // namespace spanclean
