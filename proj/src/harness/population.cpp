#include "apm/harness/population.hpp"

#include <charconv>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include <fmt/format.h>

namespace apm::harness {

namespace {

constexpr std::string_view kHeader =
    "id,alpha,popa,gain,gamma,mu,mu_th,tau,tau_th,x,omega1,omega2,model_m,model_n,cached_m,cached_n";

std::vector<std::string_view> split(std::string_view s, char sep) {
  std::vector<std::string_view> out;
  while (true) {
    const auto at = s.find(sep);
    out.push_back(s.substr(0, at));
    if (at == std::string_view::npos) break;
    s.remove_prefix(at + 1);
  }
  return out;
}

template <typename T>
T parse(std::string_view s, int line) {
  T v{};
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size()) {
    throw std::runtime_error(fmt::format("population line {}: bad value '{}'", line, s));
  }
  return v;
}

std::set<int> parse_ids(std::string_view s, int line) {
  std::set<int> ids;
  if (s.empty()) return ids;
  for (auto item : split(s, ';')) ids.insert(parse<int>(item, line));
  return ids;
}

}  // namespace

std::vector<Follower> parse_population_csv(std::string_view text) {
  std::vector<Follower> out;
  int line_no = 0;
  bool header = true;
  for (auto line : split(text, '\n')) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (line.empty()) continue;
    if (header) {
      if (line != kHeader) throw std::runtime_error(fmt::format("population header must be '{}'", kHeader));
      header = false;
      continue;
    }
    const auto f = split(line, ',');
    if (f.size() != 16) throw std::runtime_error(fmt::format("population line {}: expected 16 fields", line_no));
    Follower follower;
    auto& s = follower.smu;
    s.id = parse<FollowerId>(f[0], line_no);
    s.alpha = parse<double>(f[1], line_no);
    s.popa = parse<double>(f[2], line_no);
    s.gain = parse<double>(f[3], line_no);
    s.gamma = parse<double>(f[4], line_no);
    s.mu = parse<double>(f[5], line_no);
    s.mu_th = parse<double>(f[6], line_no);
    s.tau = parse<double>(f[7], line_no);
    s.tau_th = parse<double>(f[8], line_no);
    s.x = parse<int>(f[9], line_no);
    s.omega1 = parse<double>(f[10], line_no);
    s.omega2 = parse<double>(f[11], line_no);
    s.model_m = parse<int>(f[12], line_no);
    s.model_n = parse<int>(f[13], line_no);
    follower.cache.cached_m = parse_ids(f[14], line_no);
    follower.cache.cached_n = parse_ids(f[15], line_no);
    validate(s);
    out.push_back(std::move(follower));
  }
  if (out.empty()) throw std::runtime_error("population file has no followers");
  return out;
}

std::vector<Follower> load_population_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error(fmt::format("cannot open population file {}", path.string()));
  std::ostringstream text;
  text << in.rdbuf();
  return parse_population_csv(text.str());
}

}  // namespace apm::harness
