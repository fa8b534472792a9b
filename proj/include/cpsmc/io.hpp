// Copyright 2026 The cpsmc Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef CPSMC_IO_HPP
#define CPSMC_IO_HPP

#include <charconv>
#include <cmath>
#include <cstddef>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <initializer_list>
#include <istream>
#include <map>
#include <ostream>
#include <span>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <cpsmc/errors.hpp>
#include <cpsmc/events.hpp>
#include <cpsmc/multistream.hpp>
#include <cpsmc/smc.hpp>
#include <cpsmc/smcmc.hpp>
#include <cpsmc/summary.hpp>

namespace cpsmc {

/// Shortest round-trip decimal form of a double (17 significant digits).
inline std::string format_double(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

namespace detail {

inline std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return s.substr(first, last - first + 1);
}

inline bool parse_double(std::string_view s, double& out) {
  if (!s.empty() && s.front() == '+') s.remove_prefix(1);
  const auto* end = s.data() + s.size();
  const auto [ptr, ec] = std::from_chars(s.data(), end, out);
  return ec == std::errc{} && ptr == end && std::isfinite(out);
}

}  // namespace detail

/// Reads newline-separated event times. Blank lines are skipped. Out-of-order times are
/// sorted unless `strict`, in which case they are a parse error.
inline std::vector<double> parse_events(std::istream& in, bool strict = false) {
  std::vector<double> times;
  std::string line;
  std::size_t number = 0;
  while (std::getline(in, line)) {
    ++number;
    const auto text = detail::trim(line);
    if (text.empty()) continue;
    double t = 0.0;
    if (!detail::parse_double(text, t)) throw ParseError(number, "not a number: '" + std::string{text} + "'");
    if (strict && !times.empty() && t < times.back()) throw ParseError(number, "event times must be nondecreasing");
    times.push_back(t);
  }
  return times;
}

inline EventStream load_events(const std::filesystem::path& path, bool strict = false) {
  std::ifstream in{path};
  if (!in) throw std::runtime_error("cannot open " + path.string());
  return EventStream{parse_events(in, strict)};
}

inline void write_events(const std::filesystem::path& path, std::span<const double> times) {
  std::ofstream out{path};
  if (!out) throw std::runtime_error("cannot write " + path.string());
  for (double t : times) out << format_double(t) << '\n';
  if (!out) throw std::runtime_error("failed writing " + path.string());
}

/// Plain `key = value` lines; `#` starts a comment.
inline std::map<std::string, std::string> parse_key_values(std::istream& in) {
  std::map<std::string, std::string> out;
  std::string line;
  std::size_t number = 0;
  while (std::getline(in, line)) {
    ++number;
    std::string_view text = line;
    if (const auto hash = text.find('#'); hash != std::string_view::npos) text = text.substr(0, hash);
    text = detail::trim(text);
    if (text.empty()) continue;
    const auto eq = text.find('=');
    if (eq == std::string_view::npos) throw ParseError(number, "expected key = value");
    const auto key = detail::trim(text.substr(0, eq));
    if (key.empty()) throw ParseError(number, "empty key");
    out[std::string{key}] = std::string{detail::trim(text.substr(eq + 1))};
  }
  return out;
}

/// Parses a decimal or a fraction "a/b".
inline double parse_number(std::string_view s) {
  s = detail::trim(s);
  double x = 0.0;
  if (const auto slash = s.find('/'); slash != std::string_view::npos) {
    double a = 0.0;
    double b = 0.0;
    if (detail::parse_double(detail::trim(s.substr(0, slash)), a) &&
        detail::parse_double(detail::trim(s.substr(slash + 1)), b) && b != 0.0) {
      return a / b;
    }
  } else if (detail::parse_double(s, x)) {
    return x;
  }
  throw std::invalid_argument("not a number: '" + std::string{s} + "'");
}

/// Comma-separated writer with a fixed header; throws if the file cannot be written.
class CsvWriter {
 public:
  CsvWriter(const std::filesystem::path& path, std::initializer_list<std::string_view> header)
      : path_{path}, out_{path} {
    if (!out_) throw std::runtime_error("cannot write " + path.string());
    bool first = true;
    for (auto h : header) {
      out_ << (first ? "" : ",") << h;
      first = false;
    }
    out_ << '\n';
  }

  template <class... Ts>
  void row(const Ts&... fields) {
    bool first = true;
    ((out_ << (first ? "" : ",") << cell(fields), first = false), ...);
    out_ << '\n';
    if (!out_) throw std::runtime_error("failed writing " + path_.string());
  }

 private:
  static std::string cell(double x) { return format_double(x); }
  static std::string cell(std::size_t x) { return std::to_string(x); }
  static std::string cell(bool x) { return x ? "1" : "0"; }
  static std::string cell(const std::string& s) { return s; }

  std::filesystem::path path_;
  std::ofstream out_;
};

inline void write_intensity_csv(const std::filesystem::path& path, std::span<const double> times,
                                std::span<const IntensitySummary> summaries) {
  CsvWriter csv{path, {"update", "time", "mean", "q05", "q95"}};
  for (std::size_t i = 0; i < times.size(); ++i) {
    csv.row(i + 1, times[i], summaries[i].mean, summaries[i].q05, summaries[i].q95);
  }
}

inline void write_ess_csv(const std::filesystem::path& path, std::span<const UpdateDiagnostics> history) {
  CsvWriter csv{path, {"update", "time", "ess", "particles", "resampled"}};
  for (const auto& d : history) csv.row(d.update, d.time, d.ess, d.particles, d.resampled);
}

inline void write_changepoints_csv(const std::filesystem::path& path, std::span<const UpdateDiagnostics> history) {
  CsvWriter csv{path, {"update", "time", "k_mean", "t_star"}};
  for (const auto& d : history) csv.row(d.update, d.time, d.k_mean, d.t_star);
}

inline void write_unique_particles_csv(const std::filesystem::path& path, std::span<const UniqueCount> curve,
                                       std::span<const double> times) {
  CsvWriter csv{path, {"update", "time", "pre_resampling", "post_resampling"}};
  for (const auto& u : curve) csv.row(u.update, times[u.update - 1], u.pre_resampling, u.post_resampling);
}

inline void write_allocations_csv(const std::filesystem::path& path, std::span<const AllocationRecord> log) {
  CsvWriter csv{path, {"update", "stream", "score", "allocation", "ess", "resampled"}};
  for (const auto& a : log) csv.row(a.update, a.stream, a.score, a.allocation, a.ess, a.resampled);
}

inline void write_smcmc_csv(const std::filesystem::path& path, std::span<const SmcmcUpdate> updates) {
  CsvWriter csv{path, {"update", "time", "mean", "se", "q05", "q95", "k_mean", "k_se"}};
  for (std::size_t i = 0; i < updates.size(); ++i) {
    const auto& u = updates[i];
    csv.row(i + 1, u.time, u.intensity.mean, u.intensity_se, u.intensity.q05, u.intensity.q95, u.k_mean, u.k_se);
  }
}

}  // namespace cpsmc

#endif
