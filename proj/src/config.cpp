#include "condbohm/config.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>

#include "condbohm/io.hpp"

namespace condbohm {

namespace {

struct Entry {
  std::string value;
  int line = 0;
};

using Section = std::map<std::string, Entry, std::less<>>;

const std::map<std::string, std::vector<std::string>, std::less<>>& known_keys() {
  static const std::map<std::string, std::vector<std::string>, std::less<>> keys{
      {"run",
       {"scenario", "velocity_models", "lambda_sweep", "n_ensemble", "t_final", "dt", "dt_slice", "seed", "reseeds",
        "checkpoints", "bins", "n_starts", "starts", "stream_width", "output"}},
      {"grid", {"n1", "n2", "extent"}},
      {"physics", {"m1", "m2", "omega", "k", "epsilon"}},
  };
  return keys;
}

std::string_view trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

[[noreturn]] void fail_line(int line, const std::string& what) {
  throw Error(ErrorKind::config, "line " + std::to_string(line) + ": " + what);
}

[[noreturn]] void fail_key(const std::string& key, const Entry& e, const std::string& what) {
  throw Error(ErrorKind::config, "line " + std::to_string(e.line) + ": invalid value for '" + key + "': " + what);
}

/// Drops ';' comment lines and '#' comments outside double quotes.
std::string_view strip_comment(std::string_view s) {
  if (trim(s).starts_with(';')) return {};
  bool quoted = false;
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (s[i] == '"') quoted = !quoted;
    if (!quoted && s[i] == '#') return s.substr(0, i);
  }
  return s;
}

std::string unquote(std::string_view v, int line) {
  if (v.size() >= 2 && v.front() == '"' && v.back() == '"') return std::string(v.substr(1, v.size() - 2));
  if (v.find('"') != std::string_view::npos) fail_line(line, "unbalanced quotes");
  return std::string(v);
}

template <typename T>
std::optional<T> parse_number(std::string_view s) {
  s = trim(s);
  T v{};
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size() || s.empty()) return std::nullopt;
  if constexpr (std::is_floating_point_v<T>) {
    if (!std::isfinite(v)) return std::nullopt;
  }
  return v;
}

std::vector<std::string_view> split(std::string_view s, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  for (;;) {
    const auto pos = s.find(sep, start);
    out.push_back(trim(s.substr(start, pos - start)));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

class Reader {
 public:
  explicit Reader(std::map<std::string, Section, std::less<>> sections) : sections_(std::move(sections)) {}

  const Entry* find(std::string_view section, std::string_view key) const {
    const auto s = sections_.find(section);
    if (s == sections_.end()) return nullptr;
    const auto k = s->second.find(key);
    return k == s->second.end() ? nullptr : &k->second;
  }

  void real(std::string_view section, const std::string& key, double& out) const {
    if (const Entry* e = find(section, key)) {
      const auto v = parse_number<double>(e->value);
      if (!v) fail_key(key, *e, "expected a real number");
      out = *v;
    }
  }

  template <typename T>
  void integer(std::string_view section, const std::string& key, T& out) const {
    if (const Entry* e = find(section, key)) {
      const auto v = parse_number<T>(e->value);
      if (!v) fail_key(key, *e, "expected a non-negative integer");
      out = *v;
    }
  }

 private:
  std::map<std::string, Section, std::less<>> sections_;
};

}  // namespace

ExperimentConfig parse_config_text(std::string_view text) {
  std::map<std::string, Section, std::less<>> sections;
  std::string current;
  int line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const auto nl = text.find('\n', pos);
    const std::string_view raw = text.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos);
    pos = nl == std::string_view::npos ? text.size() + 1 : nl + 1;
    ++line_no;
    const std::string_view line = trim(strip_comment(raw));
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') fail_line(line_no, "unterminated section header");
      current = std::string(trim(line.substr(1, line.size() - 2)));
      if (!known_keys().contains(current)) fail_line(line_no, "unknown section '" + current + "'");
      sections[current];
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) fail_line(line_no, "expected 'key = value'");
    const std::string key(trim(line.substr(0, eq)));
    if (key.empty()) fail_line(line_no, "missing key before '='");
    if (current.empty()) fail_line(line_no, "key '" + key + "' outside a section");
    const auto& allowed = known_keys().at(current);
    if (std::find(allowed.begin(), allowed.end(), key) == allowed.end()) {
      fail_line(line_no, "unknown key '" + key + "' in [" + current + "]");
    }
    Section& sec = sections[current];
    if (sec.contains(key)) fail_line(line_no, "duplicate key '" + key + "'");
    sec[key] = Entry{unquote(trim(line.substr(eq + 1)), line_no), line_no};
  }

  const Reader r(std::move(sections));
  ExperimentConfig c;
  if (const Entry* e = r.find("run", "scenario")) {
    try {
      c.scenario = parse_scenario_name(e->value);
    } catch (const Error&) {
      fail_key("scenario", *e, "unknown scenario '" + e->value + "'");
    }
  }
  c.params = default_params(c.scenario);

  if (const Entry* e = r.find("run", "velocity_models")) {
    c.velocity_models.clear();
    for (std::string_view item : split(e->value, ',')) {
      try {
        c.velocity_models.push_back(parse_model_spec(item));
      } catch (const Error& err) {
        fail_key("velocity_models", *e, err.what());
      }
    }
  }
  if (const Entry* e = r.find("run", "lambda_sweep")) {
    c.lambda_sweep.clear();
    for (std::string_view item : split(e->value, ',')) {
      const auto v = parse_number<double>(item);
      if (!v) fail_key("lambda_sweep", *e, "expected a comma-separated list of reals");
      c.lambda_sweep.push_back(*v);
    }
  }
  if (const Entry* e = r.find("run", "starts")) {
    for (std::string_view item : split(e->value, ';')) {
      std::istringstream is{std::string(item)};
      std::string a, b, extra;
      is >> a >> b;
      const auto x1 = parse_number<double>(a);
      const auto x2 = parse_number<double>(b);
      if (!x1 || !x2 || (is >> extra)) fail_key("starts", *e, "expected 'x1 x2; x1 x2; ...'");
      c.starts.push_back({*x1, *x2});
    }
  }
  r.integer("run", "n_ensemble", c.n_ensemble);
  r.real("run", "t_final", c.t_final);
  r.real("run", "dt", c.dt);
  r.real("run", "dt_slice", c.dt_slice);
  r.integer("run", "seed", c.seed);
  r.integer("run", "reseeds", c.reseeds);
  r.integer("run", "checkpoints", c.checkpoints);
  r.integer("run", "bins", c.bins);
  r.integer("run", "n_starts", c.n_starts);
  r.real("run", "stream_width", c.stream_width);
  if (const Entry* e = r.find("run", "output")) c.output_dir = e->value;

  r.integer("grid", "n1", c.params.n1);
  r.integer("grid", "n2", c.params.n2);
  r.real("grid", "extent", c.params.extent);
  r.real("physics", "m1", c.params.m1);
  r.real("physics", "m2", c.params.m2);
  r.real("physics", "omega", c.params.omega);
  r.real("physics", "k", c.params.k);
  r.real("physics", "epsilon", c.params.epsilon);

  validate(c);
  return c;
}

ExperimentConfig parse_config(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw Error(ErrorKind::config, "cannot read config '" + path.string() + "'");
  std::ostringstream os;
  os << is.rdbuf();
  try {
    return parse_config_text(os.str());
  } catch (const Error& e) {
    throw Error(e.kind(), path.string() + ": " + e.what());
  }
}

std::string config_text(const ExperimentConfig& c) {
  std::ostringstream os;
  auto list = [](const auto& items, auto&& fmt, const char* sep) {
    std::string out;
    for (std::size_t i = 0; i < items.size(); ++i) {
      if (i) out += sep;
      out += fmt(items[i]);
    }
    return out;
  };
  os << "[run]\n";
  os << "scenario = " << to_string(c.scenario) << "\n";
  os << "velocity_models = " << list(c.velocity_models, [](const ModelSpec& m) { return m.label(); }, ", ") << "\n";
  os << "lambda_sweep = " << list(c.lambda_sweep, [](double v) { return format_double(v); }, ", ") << "\n";
  os << "n_ensemble = " << c.n_ensemble << "\n";
  os << "t_final = " << format_double(c.t_final) << "\n";
  os << "dt = " << format_double(c.dt) << "\n";
  os << "dt_slice = " << format_double(c.dt_slice) << "\n";
  os << "seed = " << c.seed << "\n";
  os << "reseeds = " << c.reseeds << "\n";
  os << "checkpoints = " << c.checkpoints << "\n";
  os << "bins = " << c.bins << "\n";
  os << "n_starts = " << c.n_starts << "\n";
  if (!c.starts.empty()) {
    os << "starts = "
       << list(c.starts, [](Point2 p) { return format_double(p.x1) + " " + format_double(p.x2); }, "; ") << "\n";
  }
  os << "stream_width = " << format_double(c.stream_width) << "\n";
  os << "output = \"" << c.output_dir.generic_string() << "\"\n";
  os << "\n[grid]\n";
  os << "n1 = " << c.params.n1 << "\n";
  os << "n2 = " << c.params.n2 << "\n";
  os << "extent = " << format_double(c.params.extent) << "\n";
  os << "\n[physics]\n";
  os << "m1 = " << format_double(c.params.m1) << "\n";
  os << "m2 = " << format_double(c.params.m2) << "\n";
  os << "omega = " << format_double(c.params.omega) << "\n";
  os << "k = " << format_double(c.params.k) << "\n";
  os << "epsilon = " << format_double(c.params.epsilon) << "\n";
  return os.str();
}

std::pair<int, int> parse_grid_size(std::string_view text) {
  const auto x = text.find_first_of("xX");
  if (x == std::string_view::npos) throw Error(ErrorKind::config, "grid size must look like N1xN2");
  const auto n1 = parse_number<int>(text.substr(0, x));
  const auto n2 = parse_number<int>(text.substr(x + 1));
  if (!n1 || !n2 || *n1 < 8 || *n2 < 8) {
    throw Error(ErrorKind::config, "grid size '" + std::string(text) + "' must be N1xN2 with N >= 8");
  }
  return {*n1, *n2};
}

}  // namespace condbohm
