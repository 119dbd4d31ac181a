#include "swarmrecon/config_file.h"

#include <charconv>
#include <fstream>
#include <map>
#include <sstream>
#include <vector>

#include "swarmrecon/error.h"

namespace swarmrecon {
namespace {

struct Entry {
  std::string value;
  int line = 0;
};

std::string_view Trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

// Drops a trailing comment unless the '#' sits inside a string literal.
std::string_view StripComment(std::string_view s) {
  bool quoted = false;
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (s[i] == '"') quoted = !quoted;
    if (s[i] == '#' && !quoted) return s.substr(0, i);
  }
  return s;
}

[[noreturn]] void Fail(std::string_view source, int line,
                       const std::string& what) {
  std::ostringstream os;
  os << source << ":" << line << ": " << what;
  throw ConfigError(os.str());
}

class ValueReader {
 public:
  ValueReader(std::string_view source, std::string key, Entry entry)
      : source_(source), key_(std::move(key)), entry_(std::move(entry)) {}

  int Int() const {
    const std::string_view v = Trim(entry_.value);
    int out = 0;
    const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
    if (ec != std::errc() || ptr != v.data() + v.size()) {
      Fail(source_, entry_.line, "'" + key_ + "' expects an integer, got '" +
                                     std::string(v) + "'");
    }
    return out;
  }

  double Real() const {
    const std::string s(Trim(entry_.value));
    std::size_t used = 0;
    double out = 0.0;
    try {
      out = std::stod(s, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used == 0 || used != s.size()) {
      Fail(source_, entry_.line,
           "'" + key_ + "' expects a number, got '" + s + "'");
    }
    return out;
  }

  bool Bool() const {
    const std::string_view v = Trim(entry_.value);
    if (v == "true") return true;
    if (v == "false") return false;
    Fail(source_, entry_.line,
         "'" + key_ + "' expects true or false, got '" + std::string(v) + "'");
  }

  std::string String() const {
    const std::string_view v = Trim(entry_.value);
    if (v.size() < 2 || v.front() != '"' || v.back() != '"') {
      Fail(source_, entry_.line, "'" + key_ + "' expects a quoted string");
    }
    return std::string(v.substr(1, v.size() - 2));
  }

  // [[x, y], [x, y], ...]
  Positions CellList() const {
    std::string_view v = Trim(entry_.value);
    if (v.size() < 2 || v.front() != '[' || v.back() != ']') {
      Fail(source_, entry_.line, "'" + key_ + "' expects a list of [x, y] pairs");
    }
    v = Trim(v.substr(1, v.size() - 2));
    Positions cells;
    while (!v.empty()) {
      if (v.front() != '[') {
        Fail(source_, entry_.line, "'" + key_ + "': expected '[' in cell list");
      }
      const auto close = v.find(']');
      if (close == std::string_view::npos) {
        Fail(source_, entry_.line, "'" + key_ + "': unterminated cell");
      }
      const std::string_view pair = v.substr(1, close - 1);
      const auto comma = pair.find(',');
      if (comma == std::string_view::npos) {
        Fail(source_, entry_.line, "'" + key_ + "': cell needs two coordinates");
      }
      Cell c;
      const std::string_view xs = Trim(pair.substr(0, comma));
      const std::string_view ys = Trim(pair.substr(comma + 1));
      const auto rx = std::from_chars(xs.data(), xs.data() + xs.size(), c.x);
      const auto ry = std::from_chars(ys.data(), ys.data() + ys.size(), c.y);
      if (rx.ec != std::errc() || ry.ec != std::errc() ||
          rx.ptr != xs.data() + xs.size() || ry.ptr != ys.data() + ys.size()) {
        Fail(source_, entry_.line, "'" + key_ + "': cell coordinates must be integers");
      }
      cells.push_back(c);
      v = Trim(v.substr(close + 1));
      if (!v.empty()) {
        if (v.front() != ',') {
          Fail(source_, entry_.line, "'" + key_ + "': expected ',' between cells");
        }
        v = Trim(v.substr(1));
      }
    }
    return cells;
  }

  int line() const { return entry_.line; }

 private:
  std::string_view source_;
  std::string key_;
  Entry entry_;
};

}  // namespace

ScenarioConfig ParseScenarioConfig(std::string_view text,
                                   std::string_view source_name) {
  std::map<std::string, Entry> entries;
  std::istringstream in{std::string(text)};
  std::string raw;
  int line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    const std::string_view line = Trim(StripComment(raw));
    if (line.empty()) continue;
    if (line.front() == '[') {
      Fail(source_name, line_no, "tables are not supported in scenario files");
    }
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) {
      Fail(source_name, line_no, "expected 'key = value'");
    }
    std::string key(Trim(line.substr(0, eq)));
    if (key.empty()) Fail(source_name, line_no, "missing key");
    if (entries.contains(key)) {
      Fail(source_name, line_no, "duplicate key '" + key + "'");
    }
    entries[key] = Entry{std::string(Trim(line.substr(eq + 1))), line_no};
  }

  auto take = [&](const std::string& key) -> std::optional<ValueReader> {
    auto it = entries.find(key);
    if (it == entries.end()) return std::nullopt;
    ValueReader reader(source_name, key, it->second);
    entries.erase(it);
    return reader;
  };

  ScenarioKind kind = ScenarioKind::kAggregation;
  if (auto v = take("kind")) {
    const std::string name = v->String();
    const auto parsed = ParseScenarioKind(name);
    if (!parsed) Fail(source_name, v->line(), "unknown scenario kind '" + name + "'");
    kind = *parsed;
  } else {
    Fail(source_name, 0, "missing required key 'kind'");
  }

  ScenarioConfig config = DefaultConfig(kind);
  if (auto v = take("grid_size")) config.grid_size = v->Int();
  if (auto v = take("n_agents")) config.n_agents = v->Int();
  if (auto v = take("fixed_entities")) config.fixed_entities = v->CellList();
  if (auto v = take("episode_length")) config.episode_length = v->Int();
  if (auto v = take("perception_range")) config.perception_range = v->Int();
  if (auto v = take("reward_c")) config.reward_c = v->Real();
  if (auto v = take("aggregation_threshold_t"))
    config.aggregation_threshold_t = v->Real();
  if (auto v = take("exploration_penalty")) config.exploration_penalty = v->Real();
  if (auto v = take("aggregation_include_fixed"))
    config.aggregation_include_fixed = v->Bool();

  if (!entries.empty()) {
    const auto& [key, entry] = *entries.begin();
    Fail(source_name, entry.line, "unknown key '" + key + "'");
  }
  try {
    config.Validate();
  } catch (const ConfigError& e) {
    throw ConfigError(std::string(source_name) + ": " + e.what());
  }
  return config;
}

ScenarioConfig LoadScenarioConfig(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open scenario file '" + path.string() + "'");
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return ParseScenarioConfig(buffer.str(), path.string());
}

std::string FormatScenarioConfig(const ScenarioConfig& config) {
  std::ostringstream os;
  os.precision(17);
  os << "kind = \"" << ScenarioName(config.kind) << "\"\n";
  os << "grid_size = " << config.grid_size << "\n";
  os << "n_agents = " << config.n_agents << "\n";
  os << "fixed_entities = [";
  for (std::size_t i = 0; i < config.fixed_entities.size(); ++i) {
    if (i) os << ", ";
    os << "[" << config.fixed_entities[i].x << ", " << config.fixed_entities[i].y
       << "]";
  }
  os << "]\n";
  os << "episode_length = " << config.episode_length << "\n";
  os << "perception_range = " << config.perception_range << "\n";
  os << "reward_c = " << config.reward_c << "\n";
  os << "aggregation_threshold_t = " << config.aggregation_threshold_t << "\n";
  os << "exploration_penalty = " << config.exploration_penalty << "\n";
  os << "aggregation_include_fixed = "
     << (config.aggregation_include_fixed ? "true" : "false") << "\n";
  return os.str();
}

}  // namespace swarmrecon
