#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <complex>
#include <vector>

#include "apcal/constants.hpp"
#include "apcal/errors.hpp"
#include "apcal/numeric.hpp"
#include "apcal/observation.hpp"

using namespace apcal;
using cplx = std::complex<double>;

namespace {

ChannelTruth benchmark_truth(bool two_path = true) {
  ChannelTruth t;
  t.pos_a = {50.0, 50.0};
  t.pos_b = {0.0, 0.0};
  t.pos_reflector = {0.0, -10.0};
  t.offsets.clock_offset_s = 0.67e-6;
  t.offsets.phase_offset_rad = deg_to_rad(10.0);
  t.reflection_phase_rad = deg_to_rad(20.0);
  t.two_path = two_path;
  return t;
}

OfdmConfig small_cfg() {
  return make_ofdm_config(2.0e9, 60.0e3, 1.86e6, 10.0e-3,
                          3.9810717055349851e-21);  // N = 31
}

// Reference construction of one direction's noiseless mean, written out
// term by term: amplitude * carrier phase * per-subcarrier tilt * pilot.
std::vector<cplx> reference_mean(const ChannelTruth& t, const OfdmConfig& cfg,
                                 const PilotSequence& pilots, bool a_to_b) {
  const double dir = a_to_b ? 1.0 : -1.0;
  const double dt = dir * t.offsets.clock_offset_s;
  const double dphi = dir * t.offsets.phase_offset_rad;
  std::vector<cplx> mean(cfg.num_subcarriers);
  for (int k = 0; k < cfg.num_subcarriers; ++k) {
    const double n_df = cfg.subcarrier_index(k) * cfg.subcarrier_spacing_hz;
    const double tl = t.los_delay_s() + dt;
    cplx v = t.los_gain(cfg.carrier_freq_hz) *
             cis(-kTwoPi * cfg.carrier_freq_hz * tl - dphi) *
             cis(-kTwoPi * n_df * tl) * pilots.symbols[k];
    if (t.two_path) {
      const double tr = t.reflected_delay_s() + dt;
      v += t.reflected_gain(cfg.carrier_freq_hz) *
           cis(-kTwoPi * cfg.carrier_freq_hz * tr -
               (t.reflection_phase_rad + dphi)) *
           cis(-kTwoPi * n_df * tr) * pilots.symbols[k];
    }
    mean[k] = v;
  }
  return mean;
}

}  // namespace

TEST_CASE("constant pilots carry exactly the per-symbol energy") {
  const OfdmConfig cfg = small_cfg();
  const PilotSequence p = constant_pilots(cfg);
  REQUIRE(static_cast<int>(p.symbols.size()) == cfg.num_subcarriers);
  for (const cplx& s : p.symbols) {
    CHECK(s.imag() == 0.0);
    CHECK(s.real() == doctest::Approx(std::sqrt(cfg.symbol_energy_j())));
  }
}

TEST_CASE("qpsk pilots: constant modulus, deterministic, seed-sensitive") {
  const OfdmConfig cfg = small_cfg();
  const PilotSequence p1 = qpsk_pilots(cfg, 7);
  const PilotSequence p2 = qpsk_pilots(cfg, 7);
  const PilotSequence p3 = qpsk_pilots(cfg, 8);
  REQUIRE(p1.symbols.size() == p2.symbols.size());
  bool any_diff = false;
  const double amp = std::sqrt(cfg.symbol_energy_j());
  for (std::size_t k = 0; k < p1.symbols.size(); ++k) {
    CHECK(p1.symbols[k] == p2.symbols[k]);
    CHECK(std::abs(std::abs(p1.symbols[k]) - amp) < 1e-15);
    any_diff = any_diff || (p1.symbols[k] != p3.symbols[k]);
  }
  CHECK(any_diff);
}

TEST_CASE("link mean matches the explicit reference construction") {
  const OfdmConfig cfg = small_cfg();
  const PilotSequence p = qpsk_pilots(cfg, 3);
  for (bool two_path : {false, true}) {
    const ChannelTruth t = benchmark_truth(two_path);
    for (bool fwd : {true, false}) {
      const auto got = link_mean(t, cfg, p, fwd);
      const auto want = reference_mean(t, cfg, p, fwd);
      REQUIRE(got.size() == want.size());
      for (std::size_t k = 0; k < got.size(); ++k) {
        CHECK(std::abs(got[k] - want[k]) < 1e-18);
      }
    }
  }
}

TEST_CASE("path means sum to the link mean; single-path truth has no bounce") {
  const OfdmConfig cfg = small_cfg();
  const PilotSequence p = constant_pilots(cfg);
  const ChannelTruth t = benchmark_truth(true);
  const LinkPathMeans parts = link_path_means(t, cfg, p, true);
  const auto mean = link_mean(t, cfg, p, true);
  REQUIRE(parts.reflected.size() == parts.los.size());
  for (std::size_t k = 0; k < mean.size(); ++k) {
    CHECK(std::abs(parts.los[k] + parts.reflected[k] - mean[k]) < 1e-20);
  }
  CHECK(link_path_means(benchmark_truth(false), cfg, p, true).reflected.empty());
}

TEST_CASE("reverse direction equals forward with negated offsets") {
  const OfdmConfig cfg = small_cfg();
  const PilotSequence p = qpsk_pilots(cfg, 11);
  const ChannelTruth t = benchmark_truth(true);
  ChannelTruth neg = t;
  neg.offsets.clock_offset_s = -t.offsets.clock_offset_s;
  neg.offsets.phase_offset_rad = -t.offsets.phase_offset_rad;
  const auto rev = link_mean(t, cfg, p, false);
  const auto fwd_neg = link_mean(neg, cfg, p, true);
  for (std::size_t k = 0; k < rev.size(); ++k) {
    CHECK(std::abs(rev[k] - fwd_neg[k]) < 1e-18);
  }
}

TEST_CASE("noiseless synthesis returns the exact means") {
  const OfdmConfig cfg = small_cfg();
  const ChannelTruth t = benchmark_truth(true);
  const PilotSequence pa = qpsk_pilots(cfg, 1);
  const PilotSequence pb = qpsk_pilots(cfg, 2);
  const ObservationSet obs = synth_observation(
      t, cfg, LinkDirection::bidirectional, pa, pb, std::nullopt);
  const auto mab = link_mean(t, cfg, pa, true);
  const auto mba = link_mean(t, cfg, pb, false);
  REQUIRE(obs.y_ab.size() == mab.size());
  REQUIRE(obs.y_ba.size() == mba.size());
  for (std::size_t k = 0; k < mab.size(); ++k) {
    CHECK(obs.y_ab[k] == mab[k]);
    CHECK(obs.y_ba[k] == mba[k]);
  }
}

TEST_CASE("one-way observations leave the reverse containers empty") {
  const OfdmConfig cfg = small_cfg();
  const ChannelTruth t = benchmark_truth(false);
  const PilotSequence pa = constant_pilots(cfg);
  const ObservationSet obs =
      synth_observation(t, cfg, LinkDirection::uni_ab, pa, PilotSequence{}, 5);
  CHECK(obs.y_ba.empty());
  CHECK(obs.pilots_b.symbols.empty());
  CHECK(obs.y_ab.size() == static_cast<std::size_t>(cfg.num_subcarriers));
}

TEST_CASE("pilot length must match the grid") {
  const OfdmConfig cfg = small_cfg();
  PilotSequence bad = constant_pilots(cfg);
  bad.symbols.pop_back();
  CHECK_THROWS_AS((void)synth_observation(benchmark_truth(false), cfg,
                                          LinkDirection::uni_ab, bad,
                                          PilotSequence{}, std::nullopt),
                  ModelError);
}

TEST_CASE("noise is reproducible, direction-independent, and sized N0") {
  // Wide grid for a tight variance estimate: N = 20001 per direction.
  const OfdmConfig cfg =
      make_ofdm_config(10.0e9, 60.0e3, 1.2e9, 10.0e-3, 3.9810717055349851e-21);
  ChannelTruth t = benchmark_truth(false);
  const PilotSequence pa = constant_pilots(cfg);
  const PilotSequence pb = constant_pilots(cfg);
  const ObservationSet o1 =
      synth_observation(t, cfg, LinkDirection::bidirectional, pa, pb, 42);
  const ObservationSet o2 =
      synth_observation(t, cfg, LinkDirection::bidirectional, pa, pb, 42);
  const ObservationSet o3 =
      synth_observation(t, cfg, LinkDirection::bidirectional, pa, pb, 43);
  const auto mab = link_mean(t, cfg, pa, true);
  const auto mba = link_mean(t, cfg, pb, false);

  double acc = 0.0;
  bool seed_matters = false;
  bool directions_differ = false;
  for (std::size_t k = 0; k < mab.size(); ++k) {
    CHECK(o1.y_ab[k] == o2.y_ab[k]);
    CHECK(o1.y_ba[k] == o2.y_ba[k]);
    seed_matters = seed_matters || (o1.y_ab[k] != o3.y_ab[k]);
    const cplx wa = o1.y_ab[k] - mab[k];
    const cplx wb = o1.y_ba[k] - mba[k];
    directions_differ = directions_differ || (wa != wb);
    acc += std::norm(wa) + std::norm(wb);
  }
  CHECK(seed_matters);
  CHECK(directions_differ);
  const double var = acc / (2.0 * static_cast<double>(mab.size()));
  CHECK(var == doctest::Approx(cfg.noise_psd_w_hz).epsilon(0.025));
}
