#include "defectmc/error.hpp"
#include "defectmc/tbmodel.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <istream>
#include <sstream>

namespace defectmc {

namespace {

constexpr const char* kMagic = "defectmc-couplings";
constexpr int kFormatVersion = 1;

class TableParser {
public:
  TableParser(std::string source) : source_(std::move(source)) {}

  [[noreturn]] void fail(const std::string& message) const {
    throw ConfigError(source_ + ":" + std::to_string(line_) + ": " + message);
  }

  void set_line(std::size_t line) { line_ = line; }

  int to_int(const std::string& token) const {
    int value = 0;
    const auto* end = token.data() + token.size();
    const auto [ptr, ec] = std::from_chars(token.data(), end, value);
    if (ec != std::errc() || ptr != end) fail("expected an integer, got '" + token + "'");
    return value;
  }

  double to_double(const std::string& token) const {
    try {
      std::size_t used = 0;
      const double value = std::stod(token, &used);
      if (used != token.size()) throw std::invalid_argument(token);
      return value;
    } catch (const std::exception&) {
      fail("expected a number, got '" + token + "'");
    }
  }

  SiteRole role(const std::string& token) const {
    if (token == "A" || token == "0") return SiteRole::A;
    if (token == "B" || token == "1") return SiteRole::B;
    fail("unknown basis site '" + token + "' (expected A, B, 0 or 1)");
  }

  int orbital(const MultiOrbitalModel& model, SiteRole r, const std::string& token) const {
    const auto it = model.orbitals.find(r);
    if (it == model.orbitals.end()) fail("orbitals of site " + to_string(r) + " not declared");
    const auto& labels = it->second;
    const auto named = std::find(labels.begin(), labels.end(), token);
    if (named != labels.end()) return static_cast<int>(named - labels.begin());
    const int index = to_int(token);
    if (index < 0 || index >= static_cast<int>(labels.size()))
      fail("orbital index " + token + " out of range for site " + to_string(r));
    return index;
  }

private:
  std::string source_;
  std::size_t line_ = 0;
};

std::vector<std::string> split(const std::string& line) {
  std::istringstream is(line);
  std::vector<std::string> tokens;
  for (std::string token; is >> token;) tokens.push_back(token);
  return tokens;
}

} // namespace

MultiOrbitalModel parse_coupling_table(std::istream& in, const std::string& source) {
  TableParser parser(source);
  MultiOrbitalModel model;
  enum class Section { Header, Hopping, Overlap } section = Section::Header;
  bool seen_magic = false;
  bool overlap_identity = false;
  std::vector<Coupling> overlap;

  std::string line;
  std::size_t number = 0;
  while (std::getline(in, line)) {
    ++number;
    parser.set_line(number);
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    const auto tokens = split(line);
    if (tokens.empty()) continue;

    if (!seen_magic) {
      if (tokens.size() != 2 || tokens[0] != kMagic)
        parser.fail(std::string("missing header line '") + kMagic + " <version>'");
      if (parser.to_int(tokens[1]) != kFormatVersion)
        parser.fail("unsupported format version " + tokens[1]);
      seen_magic = true;
      continue;
    }

    const std::string& head = tokens[0];
    if (head == "orbitals") {
      if (section != Section::Header) parser.fail("'orbitals' must precede coupling sections");
      if (tokens.size() < 2) parser.fail("'orbitals' needs a site role");
      const SiteRole r = parser.role(tokens[1]);
      if (model.orbitals.count(r)) parser.fail("orbitals of site " + tokens[1] + " declared twice");
      model.orbitals[r] = std::vector<std::string>(tokens.begin() + 2, tokens.end());
    } else if (head == "removable") {
      for (std::size_t t = 1; t < tokens.size(); ++t) model.removable_roles.push_back(parser.role(tokens[t]));
    } else if (head == "onsite") {
      if (tokens.size() != 4) parser.fail("expected 'onsite <site> <orbital> <energy>'");
      const SiteRole r = parser.role(tokens[1]);
      const int o = parser.orbital(model, r, tokens[2]);
      auto& energies = model.onsite[r];
      energies.resize(model.orbitals[r].size(), 0.0);
      energies[static_cast<std::size_t>(o)] = parser.to_double(tokens[3]);
    } else if (head == "hopping" && tokens.size() == 1) {
      section = Section::Hopping;
    } else if (head == "overlap" && tokens.size() == 1) {
      section = Section::Overlap;
    } else if (head == "overlap" && tokens.size() == 2 && tokens[1] == "identity") {
      overlap_identity = true;
    } else if (section != Section::Header) {
      if (tokens.size() != 8)
        parser.fail("expected 'di dj src_site src_orbital dst_site dst_orbital re im'");
      Coupling c;
      c.di = parser.to_int(tokens[0]);
      c.dj = parser.to_int(tokens[1]);
      const SiteRole src = parser.role(tokens[2]);
      const SiteRole dst = parser.role(tokens[4]);
      c.src_basis = src == SiteRole::A ? 0 : 1;
      c.dst_basis = dst == SiteRole::A ? 0 : 1;
      c.src_orbital = parser.orbital(model, src, tokens[3]);
      c.dst_orbital = parser.orbital(model, dst, tokens[5]);
      c.amplitude = Complex(parser.to_double(tokens[6]), parser.to_double(tokens[7]));
      if (std::abs(c.di) > kMaxCouplingRange || std::abs(c.dj) > kMaxCouplingRange)
        parser.fail("cell displacement exceeds third-neighbour range");
      (section == Section::Hopping ? model.couplings : overlap).push_back(c);
    } else {
      parser.fail("unknown directive '" + head + "'");
    }
  }
  parser.set_line(number);
  if (!seen_magic) parser.fail("empty coupling table");
  if (model.orbitals.empty()) parser.fail("no orbitals declared");
  if (overlap_identity && !overlap.empty())
    parser.fail("'overlap identity' conflicts with explicit overlap entries");
  if (!overlap.empty()) model.overlap = std::move(overlap);
  return model;
}

MultiOrbitalModel load_coupling_table(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open coupling table '" + path + "'");
  return parse_coupling_table(in, path);
}

} // namespace defectmc
