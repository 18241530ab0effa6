/* Copyright 2026 The Spindec Authors. All Rights Reserved.
Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at
    http://www.apache.org/licenses/LICENSE-2.0
Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/

#include "spindec/config.hpp"

#include <cctype>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <vector>

namespace spindec {

namespace {

std::string trim(const std::string& s) {
  size_t b = 0, e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return s.substr(b, e - b);
}

struct Entry {
  std::string value;
  int line = 0;
  bool used = false;
};

/// Sectioned key/value file: "[section]" headers, "key = value" lines,
/// '#' comments. Keys may repeat only for the coupling entries.
class Reader {
 public:
  Reader(const std::string& text, const std::string& origin)
      : origin_(origin) {
    std::istringstream in(text);
    std::string raw;
    int lineno = 0;
    std::string section;
    while (std::getline(in, raw)) {
      ++lineno;
      std::string line = raw;
      if (const size_t hash = line.find('#'); hash != std::string::npos)
        line.resize(hash);
      line = trim(line);
      if (line.empty()) continue;
      if (line.front() == '[') {
        if (line.back() != ']')
          fail(lineno, "malformed section header '" + line + "'");
        section = trim(line.substr(1, line.size() - 2));
        if (section.empty()) fail(lineno, "empty section name");
        sections_[section];
        continue;
      }
      const size_t eq = line.find('=');
      if (eq == std::string::npos)
        fail(lineno, "expected 'key = value', got '" + line + "'");
      if (section.empty()) fail(lineno, "entry before any [section] header");
      const std::string key = trim(line.substr(0, eq));
      const std::string value = trim(line.substr(eq + 1));
      if (key.empty()) fail(lineno, "empty key");
      auto& sec = sections_[section];
      if (sec.count(key))
        fail(lineno, "duplicate key '" + key + "' in [" + section + "]");
      sec[key] = Entry{value, lineno, false};
    }
  }

  [[noreturn]] void fail(int line, const std::string& msg) const {
    throw ConfigError(origin_ + ":" + std::to_string(line) + ": " + msg);
  }

  [[noreturn]] void fail(const std::string& msg) const {
    throw ConfigError(origin_ + ": " + msg);
  }

  bool has_section(const std::string& s) const { return sections_.count(s); }

  std::optional<Entry*> find(const std::string& section,
                             const std::string& key) {
    auto sec = sections_.find(section);
    if (sec == sections_.end()) return std::nullopt;
    auto it = sec->second.find(key);
    if (it == sec->second.end()) return std::nullopt;
    it->second.used = true;
    return &it->second;
  }

  double number(const std::string& section, const std::string& key,
                double fallback) {
    auto e = find(section, key);
    if (!e) return fallback;
    return to_number(**e, key);
  }

  std::optional<double> number_opt(const std::string& section,
                                   const std::string& key) {
    auto e = find(section, key);
    if (!e) return std::nullopt;
    return to_number(**e, key);
  }

  std::optional<std::string> text_opt(const std::string& section,
                                      const std::string& key) {
    auto e = find(section, key);
    if (!e) return std::nullopt;
    return (*e)->value;
  }

  std::optional<std::vector<double>> numbers_opt(const std::string& section,
                                                 const std::string& key) {
    auto e = find(section, key);
    if (!e) return std::nullopt;
    std::vector<double> out;
    for (const std::string& item : split(**e)) out.push_back(to_number_text(item, **e, key));
    return out;
  }

  std::optional<std::vector<std::string>> strings_opt(
      const std::string& section, const std::string& key) {
    auto e = find(section, key);
    if (!e) return std::nullopt;
    return split(**e);
  }

  std::vector<std::string> split(const Entry& e) const {
    std::vector<std::string> out;
    std::string item;
    std::istringstream in(e.value);
    while (std::getline(in, item, ',')) {
      item = trim(item);
      if (item.empty()) fail(e.line, "empty list item");
      out.push_back(item);
    }
    if (out.empty()) fail(e.line, "empty list");
    return out;
  }

  double to_number(const Entry& e, const std::string& key) const {
    return to_number_text(e.value, e, key);
  }

  double to_number_text(const std::string& text, const Entry& e,
                        const std::string& key) const {
    char* end = nullptr;
    const double v = std::strtod(text.c_str(), &end);
    if (end != text.c_str() + text.size() || text.empty())
      fail(e.line, "key '" + key + "': '" + text + "' is not a number");
    return v;
  }

  const std::map<std::string, std::map<std::string, Entry>>& sections() const {
    return sections_;
  }

  std::map<std::string, std::map<std::string, Entry>>& sections() {
    return sections_;
  }

  /// Reject typos: every section and key must have been consumed.
  void check_all_used(const std::set<std::string>& known_sections) const {
    for (const auto& [name, entries] : sections_) {
      if (!known_sections.count(name))
        fail("unknown section [" + name + "]");
      for (const auto& [key, entry] : entries)
        if (!entry.used)
          fail(entry.line, "unknown key '" + key + "' in [" + name + "]");
    }
  }

 private:
  std::string origin_;
  std::map<std::string, std::map<std::string, Entry>> sections_;
};

std::set<int> to_spin_set(Reader& reader, const std::string& section,
                          const std::string& key,
                          const std::vector<double>& values, int n) {
  std::set<int> out;
  for (double v : values) {
    if (v < 1 || v > n || v != static_cast<int>(v))
      reader.fail("key '" + key + "' in [" + section +
                  "]: spin index out of range");
    out.insert(static_cast<int>(v));
  }
  return out;
}

}  // namespace

ExperimentConfig parse_config(const std::string& text,
                              const std::string& origin) {
  Reader reader(text, origin);
  ExperimentConfig cfg;
  SpinSystem& sys = cfg.sys;

  auto labels = reader.strings_opt("spins", "labels");
  if (!labels) reader.fail("missing 'labels' in [spins]");
  sys.labels = *labels;
  sys.n = static_cast<int>(sys.labels.size());
  if (sys.n < 1 || sys.n > kMaxSpins)
    reader.fail("spin count " + std::to_string(sys.n) + " outside [1, " +
                std::to_string(kMaxSpins) + "]");

  cfg.reference_mhz = reader.number_opt("spins", "reference_mhz");
  cfg.carrier_ppm = reader.number_opt("spins", "carrier_ppm");

  auto offset_hz = reader.numbers_opt("spins", "offset_hz");
  auto offset_ppm = reader.numbers_opt("spins", "offset_ppm");
  if (offset_hz && offset_ppm)
    reader.fail("give offsets either in Hz or in ppm, not both");
  if (offset_hz) {
    sys.offset_hz = *offset_hz;
  } else if (offset_ppm) {
    if (!cfg.reference_mhz || !cfg.carrier_ppm)
      reader.fail(
          "ppm offsets require both 'reference_mhz' and 'carrier_ppm'");
    for (double p : *offset_ppm)
      sys.offset_hz.push_back((p - *cfg.carrier_ppm) * *cfg.reference_mhz);
  } else {
    sys.offset_hz.assign(sys.n, 0.0);
  }
  if (static_cast<int>(sys.offset_hz.size()) != sys.n)
    reader.fail("offset count does not match the number of labels");

  if (auto weights = reader.numbers_opt("spins", "gradient_weights")) {
    sys.gradient_weights = *weights;
  } else {
    // 1.0 per spin, except a proton-like label defaults to gamma_H/gamma_C.
    for (const std::string& label : sys.labels)
      sys.gradient_weights.push_back(
          !label.empty() && label.front() == 'H' ? 3.977 : 1.0);
  }
  if (static_cast<int>(sys.gradient_weights.size()) != sys.n)
    reader.fail("gradient weight count does not match the number of labels");

  sys.gamma_ratio = reader.number("spins", "gamma_ratio", 1.0);

  if (auto system = reader.numbers_opt("spins", "system"))
    sys.system_spins = to_spin_set(reader, "spins", "system", *system, sys.n);
  else
    for (int k = 1; k <= std::min(sys.n, 2); ++k) sys.system_spins.insert(k);
  if (auto env = reader.numbers_opt("spins", "environment")) {
    sys.env_spins = to_spin_set(reader, "spins", "environment", *env, sys.n);
  } else {
    for (int k = 1; k <= sys.n; ++k)
      if (!sys.system_spins.count(k)) sys.env_spins.insert(k);
  }

  sys.j_hz = Eigen::MatrixXd::Zero(sys.n, sys.n);
  if (reader.has_section("couplings")) {
    for (auto& [key, entry] : reader.sections().at("couplings")) {
      entry.used = true;
      int i = 0, j = 0;
      char bracket = 0;
      if (std::sscanf(key.c_str(), "j[%d,%d%c", &i, &j, &bracket) != 3 ||
          bracket != ']')
        reader.fail(entry.line, "coupling key must look like 'j[i,j]', got '" +
                                    key + "'");
      if (i < 1 || i > sys.n || j < 1 || j > sys.n || i == j)
        reader.fail(entry.line, "coupling indices out of range in '" + key +
                                    "'");
      const double v = reader.to_number(entry, key);
      const double existing = sys.j_hz(i - 1, j - 1);
      if (existing != 0.0 && existing != v)
        reader.fail(entry.line,
                    "asymmetric J matrix: conflicting values for spins " +
                        std::to_string(i) + " and " + std::to_string(j));
      sys.j_hz(i - 1, j - 1) = v;
      sys.j_hz(j - 1, i - 1) = v;
    }
  }

  AcquisitionConfig& acq = cfg.acq;
  acq.dwell_s = reader.number("acquisition", "dwell_s", acq.dwell_s);
  acq.samples = static_cast<int>(
      reader.number("acquisition", "samples", acq.samples));
  acq.line_broadening_hz = reader.number("acquisition", "line_broadening_hz",
                                         acq.line_broadening_hz);
  if (auto detect = reader.numbers_opt("acquisition", "detect"))
    acq.detect =
        to_spin_set(reader, "acquisition", "detect", *detect, sys.n);
  else
    acq.detect = sys.system_spins;
  if (auto halve = reader.text_opt("acquisition", "halve_first_point")) {
    if (*halve == "true")
      acq.halve_first_point = true;
    else if (*halve == "false")
      acq.halve_first_point = false;
    else
      reader.fail("halve_first_point must be 'true' or 'false'");
  }
  if (auto mode = reader.text_opt("acquisition", "mode")) {
    if (*mode == "magnitude")
      acq.mode = SpectrumMode::Magnitude;
    else if (*mode == "real")
      acq.mode = SpectrumMode::Real;
    else
      reader.fail("acquisition mode must be 'magnitude' or 'real'");
  }

  ScanConfig& scan = cfg.scan;
  scan.t_start_s = reader.number("scan", "t_start_s", scan.t_start_s);
  scan.t_stop_s = reader.number("scan", "t_stop_s", scan.t_stop_s);
  scan.points = static_cast<int>(reader.number("scan", "points", scan.points));
  if (auto window = reader.text_opt("scan", "window_hz")) {
    const size_t colon = window->find(':');
    if (colon == std::string::npos)
      reader.fail("scan window must look like 'LO_HZ:HI_HZ'");
    char* end = nullptr;
    const std::string lo_s = trim(window->substr(0, colon));
    const std::string hi_s = trim(window->substr(colon + 1));
    const double lo = std::strtod(lo_s.c_str(), &end);
    if (end != lo_s.c_str() + lo_s.size() || lo_s.empty())
      reader.fail("scan window low bound is not a number");
    const double hi = std::strtod(hi_s.c_str(), &end);
    if (end != hi_s.c_str() + hi_s.size() || hi_s.empty())
      reader.fail("scan window high bound is not a number");
    if (!(lo < hi)) reader.fail("scan window bounds out of order");
    scan.window_hz = {lo, hi};
  }
  if (auto ref = reader.text_opt("scan", "reference_fit")) {
    std::filesystem::path p(*ref);
    if (p.is_relative())
      p = std::filesystem::path(origin).parent_path() / p;
    scan.reference_fit_path = p.string();
  }

  if (auto script = reader.text_opt("paths", "script")) {
    std::filesystem::path p(*script);
    if (p.is_relative())
      p = std::filesystem::path(origin).parent_path() / p;
    cfg.script_path = p.string();
  }
  cfg.output_dir = reader.text_opt("paths", "output_dir");

  // validation beyond the raw fields
  try {
    sys.validate();
  } catch (const std::invalid_argument& e) {
    reader.fail(e.what());
  }
  if (acq.dwell_s <= 0.0) reader.fail("dwell_s must be positive");
  if (acq.samples < 2) reader.fail("samples must be at least 2");
  if (acq.line_broadening_hz < 0.0)
    reader.fail("line_broadening_hz must be nonnegative");
  if (acq.detect.empty()) reader.fail("detect spin list is empty");
  for (int k : acq.detect)
    if (!sys.system_spins.count(k))
      reader.fail("detect spin " + std::to_string(k) +
                  " is not a system spin");
  if (scan.points < 2) reader.fail("scan needs at least 2 points");
  if (!(scan.t_stop_s > scan.t_start_s))
    reader.fail("scan t_stop_s must exceed t_start_s");
  if (scan.t_start_s < 0.0) reader.fail("scan t_start_s must be nonnegative");

  reader.check_all_used({"spins", "couplings", "acquisition", "scan", "paths"});

  return cfg;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return parse_config(buffer.str(), path);
}

}  // namespace spindec
