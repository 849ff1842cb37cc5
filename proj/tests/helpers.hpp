#ifndef LOB_TEST_HELPERS_HPP
#define LOB_TEST_HELPERS_HPP

#include <algorithm>
#include <vector>

#include "lob/estimator.hpp"
#include "lob/model.hpp"
#include "lob/simulator.hpp"

namespace lob::test {

// Builds an estimation sample directly from a simulated L1 history (single
// session). ZI mode records every up-jump of the ask; GZI mode records the
// up-jumps carrying a trade, with s = executed volume - previous quote depth.
inline Sample sample_from_history(const L1History& h, int n, Mode mode,
                                  std::size_t max_in = 5000) {
  Sample sample;
  sample.n = n;
  sample.mode = mode;
  if (h.size() < 2) {
    sample.insufficient = true;
    return sample;
  }
  SessionSkeleton sk;
  sk.initial = h[0].state;
  std::size_t want = max_in + (max_in + 9) / 10;
  for (std::size_t i = 1; i < h.size(); ++i) {
    sk.dts.push_back(h[i].dt);
    sk.states.push_back(h[i].state);
    const L1State& prev = h[i - 1].state;
    const L1State& cur = h[i].state;
    if (cur.a > prev.a) {
      bool traded = h[i].trade < 0;  // buy market order against the ask
      if (mode == Mode::Zi || traded) {
        Observation o;
        o.session = 0;
        o.step = sk.states.size() - 1;
        o.a_prev = prev.a;
        o.q_prev = prev.q;
        o.a_new = cur.a;
        o.q_new = cur.a <= n ? cur.q : 0;
        o.s = mode == Mode::Gzi ? -h[i].trade - prev.q : 0;
        sample.obs.push_back(o);
        if (sample.obs.size() >= want) break;
      }
    }
  }
  sample.sessions.push_back(std::move(sk));
  sample.n_in = std::min(sample.obs.size(), max_in);
  sample.n_out = sample.obs.size() - sample.n_in;
  sample.insufficient = sample.obs.size() < 20;
  sample.all_unit_jumps = !sample.obs.empty();
  for (const auto& o : sample.obs)
    if (o.a_new - o.a_prev != 1) sample.all_unit_jumps = false;
  return sample;
}

// Simulates a Smith book until the requested number of ZI up-jump
// observations is available (or the event cap is hit).
inline Sample simulated_smith_sample(double kappa, double rho, double theta, int n,
                                     std::uint64_t seed, std::size_t n_obs,
                                     long max_events = 2000000) {
  TickGrid grid{n, 0.01, 0.0};
  SimConfig cfg;
  cfg.grid = grid;
  cfg.spec = smith_preset(theta, kappa, rho, grid);
  cfg.max_events = max_events;
  cfg.burn_in_events = 200;
  cfg.seed = seed;
  cfg.initial_a = n / 2 + 1;
  cfg.initial_b = n / 2;
  SimResult sim = simulate(cfg);
  return sample_from_history(sim.history, n, Mode::Zi, n_obs);
}

}  // namespace lob::test

#endif  // LOB_TEST_HELPERS_HPP
