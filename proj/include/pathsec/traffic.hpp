#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "pathsec/types.hpp"

namespace pathsec {

/// Catalog shipped with the library: 19 indicator counters. Baseline volume is
/// concentrated on two benign bulk counters (f13, f14); the signature-union
/// features f1..f11 carry moderate rates so injected bursts are separable both
/// energetically (SPE) and entropically (significance test).
FeatureCatalog default_catalog();

/// Three attack suites with feature sets and threat levels W_r.
std::vector<AttackSignature> default_signatures();

/// Seeded baseline window: per tick a shared gamma load factor L_t scales all
/// rates, then each feature draws Poisson(rate_j * L_t * G_jt) with G_jt an
/// optional per-feature gamma (baseline_dispersion). Marginals are
/// negative-binomial-shaped: Var = r + (dL + d_j + dL*d_j) * r^2.
EventWindow generate_baseline(const FeatureCatalog& catalog, int N, std::uint64_t seed);

/// Poisson(poisson_rate) injection events; each picks a suite uniformly and
/// adds Poisson((intensity-1)*rate_j) counts on that suite's features over
/// burst_len contiguous rows. Labels record every event.
EventWindow inject_attacks(const EventWindow& window,
                           const FeatureCatalog& catalog,
                           const std::vector<AttackSignature>& signatures,
                           double poisson_rate, int burst_len, double intensity,
                           std::uint64_t seed);

/// Deterministic-count variant: exactly n_bursts injection events, same burst
/// mechanics; used by the experiment harness to hit an exact injected split.
EventWindow inject_attacks_exact(const EventWindow& window,
                                 const FeatureCatalog& catalog,
                                 const std::vector<AttackSignature>& signatures,
                                 int n_bursts, int burst_len, double intensity,
                                 std::uint64_t seed);

WindowStats window_stats(const EventWindow& window);

enum class WindowFormat { Csv, Json };

/// CSV: header `t,f1,...,f19`, one row per tick; labels in a sidecar
/// `<path>.labels.json`. JSON: one document {id, kind, N, features, rows, labels}.
void store_window(const EventWindow& window, const std::string& path, WindowFormat format);
EventWindow load_window(const std::string& path, WindowFormat format,
                        const FeatureCatalog& catalog);

/// One JSON config document holding the catalog and the signature set.
struct TrafficConfig {
  FeatureCatalog catalog;
  std::vector<AttackSignature> signatures;
};
TrafficConfig load_traffic_config(const std::string& path);
void store_traffic_config(const TrafficConfig& cfg, const std::string& path);
TrafficConfig default_traffic_config();

}  // namespace pathsec
