#pragma once

#include <filesystem>
#include <string_view>
#include <vector>

#include "apm/market.hpp"

namespace apm::harness {

/// CSV with header
///   id,alpha,popa,gain,gamma,mu,mu_th,tau,tau_th,x,omega1,omega2,model_m,model_n,cached_m,cached_n
/// where cached_m / cached_n are ';'-separated model ids (may be empty).
std::vector<Follower> parse_population_csv(std::string_view text);
std::vector<Follower> load_population_csv(const std::filesystem::path& path);

}  // namespace apm::harness
