#include "apm/harness/config.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <map>
#include <set>
#include <sstream>

#include <fmt/format.h>

#include "apm/error.hpp"

namespace apm::harness {

std::string_view to_string(SweepAxis axis) { return axis == SweepAxis::LambdaBar ? "LAMBDA_BAR" : "POPA_BAR"; }

std::string_view to_string(Method method) {
  switch (method) {
    case Method::EquilibriumDerived: return "EQUILIBRIUM_DERIVED";
    case Method::EquilibriumPaperForm: return "EQUILIBRIUM_PAPER_FORM";
    case Method::Drl: return "DRL";
    case Method::Random: return "RANDOM";
    case Method::Greedy: return "GREEDY";
  }
  return "?";
}

ConfigParseError::ConfigParseError(int line, const std::string& what)
    : ConfigError(fmt::format("line {}: {}", line, what)), line_(line) {}

ConfigValidationError::ConfigValidationError(std::string key, const std::string& what)
    : ConfigError(what), key_(std::move(key)) {}

namespace {

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

std::vector<std::string_view> split_list(std::string_view s) {
  std::vector<std::string_view> out;
  while (true) {
    const auto comma = s.find(',');
    out.push_back(trim(s.substr(0, comma)));
    if (comma == std::string_view::npos) break;
    s.remove_prefix(comma + 1);
  }
  return out;
}

struct Context {
  std::string key;
  int line = 0;

  [[noreturn]] void bad(std::string_view what) const {
    throw ConfigParseError(line, fmt::format("{}: {}", key, what));
  }
  [[noreturn]] void invalid(std::string_view what) const { throw ConfigValidationError(key, std::string(what)); }

  double number(std::string_view s) const {
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || ptr != s.data() + s.size() || !std::isfinite(v)) {
      bad(fmt::format("'{}' is not a number", s));
    }
    return v;
  }
  long long integer(std::string_view s) const {
    long long v = 0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || ptr != s.data() + s.size()) bad(fmt::format("'{}' is not an integer", s));
    return v;
  }
  double positive(std::string_view s) const {
    const double v = number(s);
    if (!(v > 0.0)) invalid(fmt::format("{} must be positive", key));
    return v;
  }
  double nonnegative(std::string_view s) const {
    const double v = number(s);
    if (v < 0.0) invalid(fmt::format("{} must be nonnegative", key));
    return v;
  }
  double weight(std::string_view s) const {
    const double v = number(s);
    if (v < 0.0 || v > 1.0) invalid(fmt::format("{} must be in [0, 1]", key));
    return v;
  }
  int count(std::string_view s) const {
    const long long v = integer(s);
    if (v <= 0 || v > 1'000'000'000) invalid(fmt::format("{} must be a positive integer", key));
    return static_cast<int>(v);
  }
  bool flag(std::string_view s) const {
    if (s == "1" || s == "true" || s == "yes" || s == "on") return true;
    if (s == "0" || s == "false" || s == "no" || s == "off") return false;
    bad(fmt::format("'{}' is not a boolean", s));
  }
};

Method parse_method(const Context& ctx, std::string_view s) {
  for (Method m : {Method::EquilibriumDerived, Method::EquilibriumPaperForm, Method::Drl, Method::Random, Method::Greedy}) {
    if (s == to_string(m)) return m;
  }
  ctx.bad(fmt::format("unknown method '{}'", s));
}

using Setter = std::function<void(ExperimentConfig&, std::string_view, const Context&)>;

struct KeyTable {
  std::vector<std::string_view> order;
  std::map<std::string_view, Setter, std::less<>> setters;

  void add(std::string_view key, Setter setter) {
    order.push_back(key);
    setters.emplace(key, std::move(setter));
  }
};

const KeyTable& key_table() {
  static const KeyTable table = [] {
    KeyTable t;
    // Leader.
    t.add("c", [](auto& c, auto v, auto& x) { c.scenario.la.c = x.positive(v); });
    t.add("c_a", [](auto& c, auto v, auto& x) { c.scenario.la.c_a = x.nonnegative(v); });
    t.add("c_l", [](auto& c, auto v, auto& x) { c.scenario.la.c_l = x.nonnegative(v); });
    t.add("phi_d", [](auto& c, auto v, auto& x) { c.scenario.la.phi_d = x.nonnegative(v); });
    t.add("kappa", [](auto& c, auto v, auto& x) { c.scenario.la.kappa = x.nonnegative(v); });
    t.add("lambda_m", [](auto& c, auto v, auto& x) { c.scenario.la.lambda_m = x.nonnegative(v); });
    t.add("lambda_n", [](auto& c, auto v, auto& x) { c.scenario.la.lambda_n = x.nonnegative(v); });
    t.add("f", [](auto& c, auto v, auto& x) { c.scenario.la.f = x.positive(v); });
    t.add("g_m", [](auto& c, auto v, auto& x) { c.scenario.la.g_m = x.nonnegative(v); });
    t.add("g_n", [](auto& c, auto v, auto& x) { c.scenario.la.g_n = x.nonnegative(v); });
    t.add("eta1", [](auto& c, auto v, auto& x) {
      c.scenario.la.eta1 = x.weight(v);
      c.scenario.la.eta2 = 1.0 - c.scenario.la.eta1;
    });
    t.add("eta2", [](auto& c, auto v, auto& x) {
      c.scenario.la.eta2 = x.weight(v);
      c.scenario.la.eta1 = 1.0 - c.scenario.la.eta2;
    });
    t.add("r_max", [](auto& c, auto v, auto& x) { c.scenario.la.r_max = x.positive(v); });
    t.add("p_max", [](auto& c, auto v, auto& x) { c.scenario.la.p_max = x.positive(v); });
    // Followers.
    t.add("followers", [](auto& c, auto v, auto& x) { c.scenario.followers = static_cast<std::size_t>(x.count(v)); });
    t.add("servers", [](auto& c, auto v, auto& x) { c.scenario.servers = static_cast<std::size_t>(x.count(v)); });
    t.add("models_m", [](auto& c, auto v, auto& x) { c.scenario.models_m = x.count(v); });
    t.add("models_n", [](auto& c, auto v, auto& x) { c.scenario.models_n = x.count(v); });
    t.add("alpha", [](auto& c, auto v, auto& x) { c.scenario.alpha = x.positive(v); });
    t.add("a", [](auto& c, auto v, auto& x) { c.scenario.a = x.positive(v); });
    t.add("b", [](auto& c, auto v, auto& x) { c.scenario.b = x.positive(v); });
    t.add("lambda_bar", [](auto& c, auto v, auto& x) { c.scenario.lambda_bar = x.positive(v); });
    t.add("popa", [](auto& c, auto v, auto& x) { c.scenario.popa = x.number(v); });
    t.add("popa_profile", [](auto& c, auto v, auto& x) {
      c.scenario.popa_profile.clear();
      for (auto item : split_list(v)) c.scenario.popa_profile.push_back(x.number(item));
    });
    t.add("mu_th", [](auto& c, auto v, auto& x) { c.scenario.mu_th = x.positive(v); });
    t.add("tau_th", [](auto& c, auto v, auto& x) { c.scenario.tau_th = x.positive(v); });
    t.add("omega1", [](auto& c, auto v, auto& x) {
      c.scenario.omega1 = x.weight(v);
      c.scenario.omega2 = 1.0 - c.scenario.omega1;
    });
    t.add("omega2", [](auto& c, auto v, auto& x) {
      c.scenario.omega2 = x.weight(v);
      c.scenario.omega1 = 1.0 - c.scenario.omega2;
    });
    t.add("avatars", [](auto& c, auto v, auto& x) { c.scenario.x = x.flag(v) ? 1 : 0; });
    t.add("gamma_min", [](auto& c, auto v, auto& x) { c.scenario.gamma.lo = x.positive(v); });
    t.add("gamma_max", [](auto& c, auto v, auto& x) { c.scenario.gamma.hi = x.positive(v); });
    t.add("mu_min", [](auto& c, auto v, auto& x) { c.scenario.mu.lo = x.number(v); });
    t.add("mu_max", [](auto& c, auto v, auto& x) { c.scenario.mu.hi = x.number(v); });
    t.add("tau_min", [](auto& c, auto v, auto& x) { c.scenario.tau.lo = x.positive(v); });
    t.add("tau_max", [](auto& c, auto v, auto& x) { c.scenario.tau.hi = x.positive(v); });
    // PoPA profile.
    auto points = [](std::uint64_t AvatarAttributeProfile::*field) {
      return [field](ExperimentConfig& c, std::string_view v, const Context& x) {
        c.profile.*field = static_cast<std::uint64_t>(x.count(v));
      };
    };
    t.add("s_attr", points(&AvatarAttributeProfile::s_attr));
    t.add("s_total", points(&AvatarAttributeProfile::s_total));
    t.add("t_attr", points(&AvatarAttributeProfile::t_attr));
    t.add("t_total", points(&AvatarAttributeProfile::t_total));
    t.add("r_n", [](auto& c, auto v, auto& x) { c.profile.r_n = static_cast<std::uint32_t>(x.count(v)); });
    t.add("r_l", [](auto& c, auto v, auto& x) { c.profile.r_l = static_cast<std::uint32_t>(x.count(v)); });
    // Learner.
    t.add("episodes", [](auto& c, auto v, auto& x) { c.train.episodes = x.count(v); });
    t.add("episode_length", [](auto& c, auto v, auto& x) { c.train.episode_length = x.count(v); });
    t.add("window", [](auto& c, auto v, auto& x) { c.train.window = x.count(v); });
    t.add("hidden_width", [](auto& c, auto v, auto& x) { c.train.hidden_width = x.count(v); });
    t.add("episodes_per_batch", [](auto& c, auto v, auto& x) { c.train.episodes_per_batch = x.count(v); });
    t.add("discount", [](auto& c, auto v, auto& x) {
      c.train.ppo.discount = x.positive(v);
      if (c.train.ppo.discount > 1.0) x.invalid("discount must be in (0, 1]");
    });
    t.add("gae_lambda", [](auto& c, auto v, auto& x) {
      c.train.ppo.gae_lambda = x.positive(v);
      if (c.train.ppo.gae_lambda > 1.0) x.invalid("gae_lambda must be in (0, 1]");
    });
    t.add("clip_ratio", [](auto& c, auto v, auto& x) {
      c.train.ppo.clip_ratio = x.positive(v);
      if (c.train.ppo.clip_ratio >= 1.0) x.invalid("clip_ratio must be in (0, 1)");
    });
    t.add("epochs", [](auto& c, auto v, auto& x) { c.train.ppo.epochs = x.count(v); });
    t.add("minibatch", [](auto& c, auto v, auto& x) { c.train.ppo.minibatch = x.count(v); });
    t.add("step_size", [](auto& c, auto v, auto& x) { c.train.ppo.step_size = x.positive(v); });
    t.add("entropy_coef", [](auto& c, auto v, auto& x) { c.train.ppo.entropy_coef = x.nonnegative(v); });
    t.add("value_coef", [](auto& c, auto v, auto& x) { c.train.ppo.value_coef = x.positive(v); });
    t.add("max_grad_norm", [](auto& c, auto v, auto& x) { c.train.ppo.max_grad_norm = x.positive(v); });
    t.add("train_seed", [](auto& c, auto v, auto& x) { c.train.seed = static_cast<std::uint64_t>(x.integer(v)); });
    t.add("resample", [](auto& c, auto v, auto& x) {
      if (v == "per_episode") c.train.resample = drl::Resampling::PerEpisode;
      else if (v == "fixed") c.train.resample = drl::Resampling::Fixed;
      else x.bad("expected per_episode or fixed");
    });
    t.add("observe", [](auto& c, auto v, auto& x) {
      if (v == "per_follower") c.train.observe = drl::ObservationMode::PerFollower;
      else if (v == "total") c.train.observe = drl::ObservationMode::Total;
      else x.bad("expected per_follower or total");
    });
    t.add("record_scope", [](auto& c, auto v, auto& x) {
      if (v == "episode") c.train.record_scope = drl::RecordScope::Episode;
      else if (v == "history") c.train.record_scope = drl::RecordScope::History;
      else x.bad("expected episode or history");
    });
    t.add("eval_episodes", [](auto& c, auto v, auto& x) { c.eval_episodes = x.count(v); });
    // Sweep.
    t.add("sweep_axis", [](auto& c, auto v, auto& x) {
      if (v == "LAMBDA_BAR") c.axis = SweepAxis::LambdaBar;
      else if (v == "POPA_BAR") c.axis = SweepAxis::PopaBar;
      else x.bad("expected LAMBDA_BAR or POPA_BAR");
    });
    t.add("sweep_values", [](auto& c, auto v, auto& x) {
      c.sweep_values.clear();
      for (auto item : split_list(v)) c.sweep_values.push_back(x.number(item));
    });
    t.add("methods", [](auto& c, auto v, auto& x) {
      c.methods.clear();
      for (auto item : split_list(v)) c.methods.push_back(parse_method(x, item));
    });
    t.add("seeds", [](auto& c, auto v, auto& x) {
      c.seeds.clear();
      for (auto item : split_list(v)) {
        const long long s = x.integer(item);
        if (s < 0) x.invalid("seeds must be nonnegative");
        c.seeds.push_back(static_cast<std::uint64_t>(s));
      }
    });
    t.add("output", [](auto& c, auto v, auto& x) {
      if (v.empty()) x.invalid("output must not be empty");
      c.output = std::string(v);
    });
    return t;
  }();
  return table;
}

}  // namespace

const std::vector<std::string_view>& config_keys() { return key_table().order; }

void validate(const ExperimentConfig& c) {
  auto check = [](bool ok, const char* key, const char* what) {
    if (!ok) throw ConfigValidationError(key, what);
  };
  const auto& s = c.scenario;
  check(s.la.p_max >= s.la.c, "p_max", "p_max must be at least c");
  check(s.a < s.b && s.b <= 1.0, "b", "hotspot bounds need 0 < a < b <= 1");
  check(s.gamma.lo <= s.gamma.hi, "gamma_max", "gamma_max must be at least gamma_min");
  check(s.mu.lo <= s.mu.hi, "mu_max", "mu_max must be at least mu_min");
  check(s.tau.lo <= s.tau.hi, "tau_max", "tau_max must be at least tau_min");
  check(s.popa_profile.empty() || s.popa_profile.size() == s.followers, "popa_profile",
        "popa_profile needs one entry per follower");
  check(c.profile.s_attr <= c.profile.s_total, "s_attr", "s_attr must not exceed s_total");
  check(c.profile.t_attr <= c.profile.t_total, "t_attr", "t_attr must not exceed t_total");
  check(c.profile.r_n >= 2, "r_n", "r_n must be at least 2");
  check(!c.sweep_values.empty(), "sweep_values", "sweep_values must not be empty");
  check(std::adjacent_find(c.sweep_values.begin(), c.sweep_values.end(), std::greater_equal<>()) == c.sweep_values.end(),
        "sweep_values", "sweep_values must be strictly increasing");
  if (c.axis == SweepAxis::LambdaBar) {
    check(c.sweep_values.front() > 0.0, "sweep_values", "lambda_bar sweep values must be positive");
  }
  check(!c.methods.empty(), "methods", "at least one method is required");
  check(!c.seeds.empty(), "seeds", "at least one seed is required");
  try {
    validate(c.scenario);
  } catch (const DomainError& e) {
    throw ConfigValidationError("scenario", e.what());
  }
}

ExperimentConfig parse_config(std::string_view text) {
  ExperimentConfig config;
  const auto& table = key_table();
  std::set<std::string, std::less<>> seen;
  int line_no = 0;
  while (!text.empty()) {
    ++line_no;
    const auto nl = text.find('\n');
    std::string_view line = text.substr(0, nl);
    text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);

    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') throw ConfigParseError(line_no, "unterminated section header");
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) throw ConfigParseError(line_no, "expected 'key = value'");
    const std::string_view key = trim(line.substr(0, eq));
    const std::string_view value = trim(line.substr(eq + 1));
    const auto it = table.setters.find(key);
    if (it == table.setters.end()) throw ConfigParseError(line_no, fmt::format("unknown key '{}'", key));
    if (!seen.insert(std::string(key)).second) throw ConfigParseError(line_no, fmt::format("duplicate key '{}'", key));
    if (value.empty()) throw ConfigParseError(line_no, fmt::format("{}: missing value", key));
    it->second(config, value, Context{std::string(key), line_no});
  }
  validate(config);
  return config;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(fmt::format("cannot open config {}", path.string()));
  std::ostringstream text;
  text << in.rdbuf();
  return parse_config(text.str());
}

}  // namespace apm::harness
