// Command-line front end: popa, solve, pseudonyms, train, sweep.
//
// Exit status: 0 on success, 1 when any sweep cell (or verification) fails,
// 2 on configuration or usage errors.

#include <cstdint>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <fmt/format.h>

#include "apm/drl/train.hpp"
#include "apm/error.hpp"
#include "apm/harness/config.hpp"
#include "apm/harness/population.hpp"
#include "apm/harness/report.hpp"
#include "apm/harness/sweep.hpp"
#include "apm/popa.hpp"
#include "apm/pseudonym.hpp"
#include "apm/stackelberg.hpp"

namespace {

using namespace apm;

constexpr int kExitFailure = 1;
constexpr int kExitConfig = 2;

harness::ExperimentConfig load_or_default(const std::string& path) {
  return path.empty() ? harness::ExperimentConfig{} : harness::load_config(path);
}

std::vector<std::vector<double>> parse_vectors(const std::string& text) {
  // "1,2;3" -> [[1, 2], [3]]
  std::vector<std::vector<double>> out;
  std::stringstream groups(text);
  std::string group;
  while (std::getline(groups, group, ';')) {
    std::vector<double> v;
    std::stringstream items(group);
    std::string item;
    while (std::getline(items, item, ',')) v.push_back(std::stod(item));
    out.push_back(std::move(v));
  }
  return out;
}

std::string read_file(const std::string& path, bool binary) {
  std::ifstream in(path, binary ? std::ios::binary : std::ios::in);
  if (!in) throw std::runtime_error(fmt::format("cannot open {}", path));
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

void write_file(const std::string& path, const std::string& data) {
  std::ofstream out(path, std::ios::binary);
  if (!out || !(out << data)) throw std::runtime_error(fmt::format("cannot write {}", path));
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Avatar pseudonym market: PoPA metric, Stackelberg pricing, pseudonym sets, learned pricing"};
  app.require_subcommand(1);

  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::string out_path;
  bool avatars = false;
  auto common = [&](CLI::App* sub) {
    sub->add_option("--config", config_path, "Experiment config file")->check(CLI::ExistingFile);
    sub->add_option("--seed", seed, "Random seed");
    sub->add_option("--out", out_path, "Output path");
  };

  // popa
  auto* popa_cmd = app.add_subcommand("popa", "Privacy of a personalized avatar, in bits");
  common(popa_cmd);
  std::optional<std::uint64_t> s_attr, s_total, t_attr, t_total;
  std::optional<std::uint32_t> r_n, r_l;
  popa_cmd->add_option("--s-attr", s_attr, "Attribute-related shape points");
  popa_cmd->add_option("--s-total", s_total, "All shape points");
  popa_cmd->add_option("--t-attr", t_attr, "Attribute-related texture points");
  popa_cmd->add_option("--t-total", t_total, "All texture points");
  popa_cmd->add_option("--r-n", r_n, "Random-digit alphabet size");
  popa_cmd->add_option("--r-l", r_l, "Number of random digits");

  // solve
  auto* solve_cmd = app.add_subcommand("solve", "Stackelberg equilibrium price and demands");
  common(solve_cmd);
  std::string mode_text = "derived";
  std::string population_path;
  std::optional<double> r_max_override, p_max_override;
  solve_cmd->add_option("--mode", mode_text, "derived | paper_form");
  solve_cmd->add_option("--population", population_path, "Population CSV (default: sampled from the config)")
      ->check(CLI::ExistingFile);
  solve_cmd->add_option("--r-max", r_max_override, "Override the pseudonym capacity");
  solve_cmd->add_option("--p-max", p_max_override, "Override the price ceiling");
  solve_cmd->add_flag("--avatars", avatars, "Followers buy avatar regeneration (x = 1)");

  // pseudonyms
  auto* ps_cmd = app.add_subcommand("pseudonyms", "Mint or verify pseudonym sets");
  ps_cmd->require_subcommand(1);
  auto* mint_cmd = ps_cmd->add_subcommand("mint", "Mint a pseudonym set");
  auto* verify_cmd = ps_cmd->add_subcommand("verify", "Verify a pseudonym set");
  common(mint_cmd);
  common(verify_cmd);
  std::string key_hex;
  std::uint32_t owner = 0;
  std::size_t count = 1;
  std::uint64_t epoch = 0;
  std::string vectors_text = "1";
  bool hex_text = false;
  std::string in_path;
  mint_cmd->add_option("--key", key_hex, "CA key, hex")->required();
  mint_cmd->add_option("--owner", owner, "Follower id");
  mint_cmd->add_option("--count", count, "Number of pseudonyms")->check(CLI::PositiveNumber);
  mint_cmd->add_option("--epoch", epoch, "Epoch");
  mint_cmd->add_option("--vectors", vectors_text, "Attribute vectors, e.g. \"0.1,0.2;0.3\"");
  mint_cmd->add_flag("--hex", hex_text, "Write the hex text form instead of binary");
  verify_cmd->add_option("--key", key_hex, "CA key, hex")->required();
  verify_cmd->add_option("--in", in_path, "Set file")->required()->check(CLI::ExistingFile);
  verify_cmd->add_flag("--hex", hex_text, "Input is the hex text form");

  // train
  auto* train_cmd = app.add_subcommand("train", "Train the pricing agent");
  common(train_cmd);
  std::string checkpoint_path;
  train_cmd->add_option("--checkpoint", checkpoint_path, "Write the final policy here");

  // sweep
  auto* sweep_cmd = app.add_subcommand("sweep", "Run a parameter sweep and write CSV + summary");
  common(sweep_cmd);
  sweep_cmd->add_flag("--avatars", avatars, "Followers buy avatar regeneration (x = 1)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitConfig;
  }

  try {
    auto config = load_or_default(config_path);
    if (avatars) config.scenario.x = 1;

    if (*popa_cmd) {
      auto p = config.profile;
      if (s_attr) p.s_attr = *s_attr;
      if (s_total) p.s_total = *s_total;
      if (t_attr) p.t_attr = *t_attr;
      if (t_total) p.t_total = *t_total;
      if (r_n) p.r_n = *r_n;
      if (r_l) p.r_l = *r_l;
      fmt::print("{:.6f}\n", compute_popa(p));
      return 0;
    }

    if (*solve_cmd) {
      const auto mode = parse_solver_mode(mode_text);
      if (!mode) {
        std::cerr << "unknown mode " << mode_text << "\n";
        return kExitConfig;
      }
      auto la = config.scenario.la;
      if (r_max_override) la.r_max = *r_max_override;
      if (p_max_override) la.p_max = *p_max_override;
      const auto population = population_path.empty()
                                  ? sample_population(config.scenario, seed.value_or(config.seeds.front()))
                                  : harness::load_population_csv(population_path);
      const auto eq = solve(population, la, *mode);
      std::string active;
      for (auto id : eq.active_set) active += (active.empty() ? "" : ";") + std::to_string(id);
      std::string demands;
      for (double r : eq.r_star) demands += (demands.empty() ? "" : ";") + fmt::format("{}", r);
      const std::string csv = fmt::format(
          "mode,p_star,total_demand,la_utility,binding,capacity_warning,active_set,r_star\n{},{},{},{},{},{},{},{}\n",
          to_string(eq.mode), eq.p_star, eq.total_demand(), eq.la_utility, to_string(eq.binding),
          eq.capacity_warning ? 1 : 0, active, demands);
      if (out_path.empty()) {
        fmt::print("{}", csv);
      } else {
        write_file(out_path, csv);
      }
      fmt::print("\nequilibrium ({} mode)\n  price         {:.6f}\n  total demand  {:.6f}\n  LA utility    {:.6f}\n"
                 "  binding       {}\n  active        {}/{}\n",
                 to_string(eq.mode), eq.p_star, eq.total_demand(), eq.la_utility, to_string(eq.binding),
                 eq.active_set.size(), eq.r_star.size());
      for (std::size_t i = 0; i < eq.r_star.size(); ++i) {
        fmt::print("  follower {:>3}  r* = {:.6f}  U = {:.6f}\n", population[i].smu.id, eq.r_star[i],
                   eq.smu_utilities[i]);
      }
      if (eq.capacity_warning) std::cerr << "warning: demand exceeds r_max even at p_max; rationed\n";
      return 0;
    }

    if (*mint_cmd || *verify_cmd) {
      const auto key = pseudonym::CaKey::from_hex(key_hex);
      const pseudonym::RandomPartSpec spec{config.profile.r_n, config.profile.r_l};
      if (*mint_cmd) {
        const auto vectors = parse_vectors(vectors_text);
        const auto fp = pseudonym::extract_attribute_fingerprint(owner, vectors);
        const auto set = pseudonym::mint_pseudonym_set(fp, count, epoch, key,
                                                       pseudonym::derive_owner_seed(seed.value_or(0), owner), spec);
        if (hex_text) {
          if (out_path.empty()) fmt::print("{}", pseudonym::to_hex_text(set));
          else write_file(out_path, pseudonym::to_hex_text(set));
        } else {
          if (out_path.empty()) {
            std::cerr << "binary output needs --out (or use --hex)\n";
            return kExitConfig;
          }
          const auto bytes = pseudonym::serialize(set);
          write_file(out_path, std::string(bytes.begin(), bytes.end()));
        }
        return 0;
      }
      const std::string data = read_file(in_path, !hex_text);
      pseudonym::PseudonymSet set;
      try {
        set = hex_text ? pseudonym::from_hex_text(data)
                       : pseudonym::deserialize(std::span(reinterpret_cast<const std::uint8_t*>(data.data()), data.size()));
      } catch (const std::exception& e) {
        fmt::print("invalid: {}\n", e.what());
        return kExitFailure;
      }
      const auto result = pseudonym::verify_pseudonym_set(set, key, spec);
      if (result) {
        fmt::print("valid: owner {} epoch {} ({} pseudonyms)\n", set.owner, set.epoch, set.pseudonyms.size());
        return 0;
      }
      for (const auto& reason : result.reasons) fmt::print("invalid: {}\n", reason);
      return kExitFailure;
    }

    if (*train_cmd) {
      auto tc = config.train;
      if (seed) tc.seed = *seed;
      const auto result = drl::train(tc, config.scenario);
      std::string csv = "episode,mean_utility,reward_rate,mean_price\n";
      for (const auto& r : result.curve) {
        csv += fmt::format("{},{},{},{}\n", r.episode, r.mean_utility, r.reward_rate, r.mean_price);
      }
      write_file(out_path.empty() ? "learning_curve.csv" : out_path, csv);
      if (!checkpoint_path.empty()) drl::save_checkpoint(result.policy, checkpoint_path);
      const double tail = drl::tail_mean_utility(result.curve);
      const double eq = drl::tail_mean_equilibrium(result.curve);
      fmt::print("final-100 mean utility {:.6f}, equilibrium {:.6f}, ratio {:.4f}\n", tail, eq, tail / eq);
      return 0;
    }

    if (*sweep_cmd) {
      if (seed) config.seeds = {*seed};
      if (!out_path.empty()) config.output = out_path;
      const auto rows = harness::run_sweep(config);
      for (const auto& r : rows) {
        if (r.error) std::cerr << fmt::format("cell {} {} seed {} failed: {}\n", r.sweep_value, to_string(r.method), r.seed, *r.error);
      }
      const auto files = harness::emit_report(rows, config.output);
      fmt::print("wrote {} and {}\n", files.csv.string(), files.summary.string());
      if (!files.any_success) std::cerr << "no successful cells\n";
      return files.any_failure ? kExitFailure : 0;
    }
  } catch (const harness::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitFailure;
  }
  return 0;
}
