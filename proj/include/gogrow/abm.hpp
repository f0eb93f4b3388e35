#pragma once

#include <algorithm>
#include <cassert>
#include <cmath>
#include <cstdint>
#include <future>
#include <istream>
#include <limits>
#include <queue>
#include <random>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "gogrow/errors.hpp"

namespace gogrow {

/// On-lattice go-or-grow model: motile/proliferative agents on a periodic
/// n-dimensional square lattice, volume exclusion, rate-r phenotype switching
/// and a fixed cell-cycle delay tau between switching and the division
/// attempt. Delta is carried for bookkeeping only; densities are per site.
struct LatticeParams {
  int n_dims = 2;
  int side = 100;          // sites per dimension (ell)
  double spacing = 1.0;    // Delta
  double seeding = 0.05;   // P_s
  double switch_rate = 1.0;    // r
  double cycle_delay = 1.0;    // tau
  double motility_rate = 10.0;

  long long sites() const {
    long long k = 1;
    for (int d = 0; d < n_dims; ++d) k *= side;
    return k;
  }

  void validate() const {
    if (n_dims < 1 || n_dims > 3)
      throw invalid_input_error("LatticeParams: n_dims must be 1, 2 or 3");
    if (side < 2) throw invalid_input_error("LatticeParams: side must be >= 2");
    if (!(spacing > 0.0)) throw invalid_input_error("LatticeParams: spacing > 0");
    if (!(seeding >= 0.0 && seeding <= 1.0))
      throw invalid_input_error("LatticeParams: seeding must be in [0, 1]");
    if (!(switch_rate > 0.0))
      throw invalid_input_error("LatticeParams: switch_rate > 0");
    if (!(cycle_delay > 0.0))
      throw invalid_input_error("LatticeParams: cycle_delay > 0");
    if (!(motility_rate >= 0.0))
      throw invalid_input_error("LatticeParams: motility_rate >= 0");
  }
};

/// Parse a flat key=value config ('#' starts a comment). Unknown keys are
/// rejected. Keys: n_dims, side, spacing, seeding, switch_rate, cycle_delay,
/// motility_rate.
inline LatticeParams parse_lattice_config(std::istream& in) {
  LatticeParams lp;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    auto trim = [](std::string s) {
      const auto a = s.find_first_not_of(" \t\r");
      if (a == std::string::npos) return std::string();
      const auto b = s.find_last_not_of(" \t\r");
      return s.substr(a, b - a + 1);
    };
    if (trim(line).empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw invalid_input_error("lattice config line " + std::to_string(lineno) +
                                ": expected key=value");
    const std::string key = trim(line.substr(0, eq));
    const std::string val = trim(line.substr(eq + 1));
    try {
      if (key == "n_dims") lp.n_dims = std::stoi(val);
      else if (key == "side") lp.side = std::stoi(val);
      else if (key == "spacing") lp.spacing = std::stod(val);
      else if (key == "seeding") lp.seeding = std::stod(val);
      else if (key == "switch_rate") lp.switch_rate = std::stod(val);
      else if (key == "cycle_delay") lp.cycle_delay = std::stod(val);
      else if (key == "motility_rate") lp.motility_rate = std::stod(val);
      else
        throw invalid_input_error("lattice config: unknown key '" + key + "'");
    } catch (const std::invalid_argument&) {
      throw invalid_input_error("lattice config: bad value for '" + key + "'");
    }
  }
  lp.validate();
  return lp;
}

/// Recorded density series of one run.
struct DensitySeries {
  std::vector<double> times;
  std::vector<double> m_density;
  std::vector<double> p_density;
  std::vector<double> total_density;
};

/// Pointwise ensemble statistics across runs.
struct EnsembleSeries {
  std::vector<double> times;
  std::vector<double> m_mean, m_std;
  std::vector<double> p_mean, p_std;
  std::vector<double> total_mean, total_std;
};

namespace detail {
enum : std::uint8_t { kEmpty = 0, kMotile = 1, kProliferative = 2 };

struct DivisionEvent {
  double time;
  std::int64_t site;
  std::uint64_t seq;  // deterministic tie-break
  bool operator>(const DivisionEvent& o) const {
    return time != o.time ? time > o.time : seq > o.seq;
  }
};
}  // namespace detail

/// Full simulation state. Occupancy, the motile-agent index (for O(1)
/// uniform choice), and the time-ordered division queue. Every proliferative
/// site owns exactly one queue entry scheduled cycle_delay after its switch.
class AbmState {
 public:
  AbmState(LatticeParams lp, std::uint64_t seed)
      : lp_(lp),
        rng_(seed),
        occupancy_(static_cast<std::size_t>(lp.sites())),
        slot_of_site_(static_cast<std::size_t>(lp.sites()), -1) {
    lp_.validate();
    if (lp_.seeding > 0.0) {
      std::bernoulli_distribution occupy(lp_.seeding);
      for (std::size_t s = 0; s < occupancy_.size(); ++s)
        if (lp_.seeding >= 1.0 || occupy(rng_)) place_motile(static_cast<std::int64_t>(s));
    }
  }

  const LatticeParams& params() const { return lp_; }
  double time() const { return t_; }
  std::int64_t num_motile() const {
    return static_cast<std::int64_t>(motile_sites_.size());
  }
  std::int64_t num_proliferative() const { return num_prolif_; }
  std::int64_t num_agents() const { return num_motile() + num_prolif_; }
  const std::vector<std::uint8_t>& occupancy() const { return occupancy_; }

  /// Advance to t_end, recording densities every record_dt (including t of
  /// the first call boundary). Appends to `out`.
  void run(double t_end, double record_dt, DensitySeries& out) {
    if (!(t_end > t_)) throw invalid_input_error("AbmState::run: t_end <= t");
    if (!(record_dt > 0.0))
      throw invalid_input_error("AbmState::run: record_dt <= 0");
    const double k_sites = static_cast<double>(lp_.sites());
    double next_record = t_;

    auto record_until = [&](double limit) {
      while (next_record <= limit + 1e-12 && next_record <= t_end + 1e-12) {
        out.times.push_back(next_record);
        out.m_density.push_back(static_cast<double>(num_motile()) / k_sites);
        out.p_density.push_back(static_cast<double>(num_prolif_) / k_sites);
        out.total_density.push_back(
            static_cast<double>(num_agents()) / k_sites);
        next_record += record_dt;
      }
    };

    std::uniform_real_distribution<double> unif(0.0, 1.0);
    const double per_agent = lp_.motility_rate + lp_.switch_rate;
    while (true) {
      const double total_rate = per_agent * static_cast<double>(num_motile());
      double t_markov = std::numeric_limits<double>::infinity();
      if (total_rate > 0.0) {
        const double u = std::max(unif(rng_), 1e-300);
        t_markov = t_ - std::log(u) / total_rate;
      }
      const double t_div = queue_.empty()
                               ? std::numeric_limits<double>::infinity()
                               : queue_.top().time;
      const double t_next = std::min(t_markov, t_div);
      if (t_next > t_end) {
        record_until(t_end);
        t_ = t_end;
        return;
      }
      record_until(t_next);
      t_ = t_next;
      if (t_div <= t_markov)
        complete_division();
      else
        markov_event();
    }
  }

  /// Internal-consistency check: counts match occupancy tallies, and the
  /// queue holds exactly one entry in (t, t + tau] per proliferative site.
  bool consistent() const {
    std::int64_t m = 0, p = 0;
    for (std::uint8_t o : occupancy_) {
      m += o == detail::kMotile;
      p += o == detail::kProliferative;
    }
    if (m != num_motile() || p != num_prolif_) return false;
    if (static_cast<std::int64_t>(queue_.size()) != p) return false;
    std::vector<std::int64_t> hits(occupancy_.size(), 0);
    auto copy = queue_;
    while (!copy.empty()) {
      const auto e = copy.top();
      copy.pop();
      if (e.time < t_ - 1e-12 || e.time > t_ + lp_.cycle_delay + 1e-12)
        return false;
      if (occupancy_[static_cast<std::size_t>(e.site)] != detail::kProliferative)
        return false;
      if (++hits[static_cast<std::size_t>(e.site)] > 1) return false;
    }
    for (std::size_t s = 0; s < motile_sites_.size(); ++s)
      if (occupancy_[static_cast<std::size_t>(motile_sites_[s])] !=
          detail::kMotile)
        return false;
    return true;
  }

 private:
  void place_motile(std::int64_t site) {
    occupancy_[static_cast<std::size_t>(site)] = detail::kMotile;
    slot_of_site_[static_cast<std::size_t>(site)] =
        static_cast<std::int64_t>(motile_sites_.size());
    motile_sites_.push_back(site);
  }

  void remove_motile(std::int64_t site) {
    const auto slot = slot_of_site_[static_cast<std::size_t>(site)];
    const std::int64_t last = motile_sites_.back();
    motile_sites_[static_cast<std::size_t>(slot)] = last;
    slot_of_site_[static_cast<std::size_t>(last)] = slot;
    motile_sites_.pop_back();
    slot_of_site_[static_cast<std::size_t>(site)] = -1;
  }

  std::int64_t neighbor(std::int64_t site, int direction) const {
    const int dim = direction / 2;
    const int sign = direction % 2 == 0 ? 1 : -1;
    std::int64_t stride = 1;
    for (int d = 0; d < dim; ++d) stride *= lp_.side;
    const std::int64_t coord = (site / stride) % lp_.side;
    std::int64_t moved = coord + sign;
    if (moved < 0) moved += lp_.side;
    if (moved >= lp_.side) moved -= lp_.side;
    return site + (moved - coord) * stride;
  }

  void markov_event() {
    std::uniform_int_distribution<std::int64_t> pick(0, num_motile() - 1);
    const std::int64_t site = motile_sites_[static_cast<std::size_t>(pick(rng_))];
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    const double p_move =
        lp_.motility_rate / (lp_.motility_rate + lp_.switch_rate);
    if (unif(rng_) < p_move) {
      const std::int64_t target = neighbor(site, pick_direction());
      if (occupancy_[static_cast<std::size_t>(target)] == detail::kEmpty) {
        remove_motile(site);
        occupancy_[static_cast<std::size_t>(site)] = detail::kEmpty;
        place_motile(target);
      }
      // occupied target: movement aborted, clock re-drawn next round
    } else {
      remove_motile(site);
      occupancy_[static_cast<std::size_t>(site)] = detail::kProliferative;
      ++num_prolif_;
      queue_.push({t_ + lp_.cycle_delay, site, seq_++});
    }
  }

  void complete_division() {
    const auto ev = queue_.top();
    queue_.pop();
    assert(occupancy_[static_cast<std::size_t>(ev.site)] ==
           detail::kProliferative);
    const std::int64_t target = neighbor(ev.site, pick_direction());
    if (occupancy_[static_cast<std::size_t>(target)] == detail::kEmpty)
      place_motile(target);  // daughter is motile
    // parent reverts to motile whether or not the placement succeeded
    occupancy_[static_cast<std::size_t>(ev.site)] = detail::kMotile;
    --num_prolif_;
    slot_of_site_[static_cast<std::size_t>(ev.site)] =
        static_cast<std::int64_t>(motile_sites_.size());
    motile_sites_.push_back(ev.site);
  }

  int pick_direction() {
    std::uniform_int_distribution<int> d(0, 2 * lp_.n_dims - 1);
    return d(rng_);
  }

  LatticeParams lp_;
  std::mt19937_64 rng_;
  std::vector<std::uint8_t> occupancy_;
  std::vector<std::int64_t> motile_sites_;
  std::vector<std::int64_t> slot_of_site_;
  std::priority_queue<detail::DivisionEvent, std::vector<detail::DivisionEvent>,
                      std::greater<detail::DivisionEvent>>
      queue_;
  double t_ = 0.0;
  std::int64_t num_prolif_ = 0;
  std::uint64_t seq_ = 0;
};

/// Seed the lattice (each site independently motile with probability P_s)
/// and return the fresh state at t = 0.
inline AbmState abm_init(const LatticeParams& lp, std::uint64_t seed) {
  return AbmState(lp, seed);
}

/// One complete run from a fresh state.
inline DensitySeries abm_run(const LatticeParams& lp, std::uint64_t seed,
                             double t_end, double record_dt) {
  AbmState state = abm_init(lp, seed);
  DensitySeries out;
  state.run(t_end, record_dt, out);
  return out;
}

/// splitmix64 mix; used to derive independent per-run streams from
/// (master seed, run index).
inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index) {
  std::uint64_t z = master + 0x9e3779b97f4a7c15ULL * (index + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

/// Pointwise mean/sample-std of density series across independent runs, in
/// the given seed order. Runs execute concurrently up to `threads`.
inline EnsembleSeries abm_ensemble(const LatticeParams& lp,
                                   const std::vector<std::uint64_t>& seeds,
                                   double t_end, double record_dt,
                                   int threads = 1) {
  if (seeds.size() < 2)
    throw invalid_input_error("abm_ensemble: need at least 2 seeds");
  if (threads < 1) threads = 1;

  std::vector<DensitySeries> runs(seeds.size());
  std::size_t next = 0;
  while (next < seeds.size()) {
    const std::size_t batch =
        std::min<std::size_t>(static_cast<std::size_t>(threads),
                              seeds.size() - next);
    std::vector<std::future<DensitySeries>> futs;
    for (std::size_t b = 0; b < batch; ++b)
      futs.push_back(std::async(std::launch::async,
                                [&, i = next + b] {
                                  return abm_run(lp, seeds[i], t_end, record_dt);
                                }));
    for (std::size_t b = 0; b < batch; ++b) runs[next + b] = futs[b].get();
    next += batch;
  }

  const std::size_t npts = runs.front().times.size();
  for (const auto& r : runs)
    if (r.times.size() != npts)
      throw invalid_input_error("abm_ensemble: runs recorded unequal grids");

  EnsembleSeries es;
  es.times = runs.front().times;
  auto stats = [&](auto getter, std::vector<double>& mean,
                   std::vector<double>& sd) {
    mean.resize(npts);
    sd.resize(npts);
    const double n = static_cast<double>(runs.size());
    for (std::size_t k = 0; k < npts; ++k) {
      double mu = 0.0;
      for (const auto& r : runs) mu += getter(r)[k];
      mu /= n;
      double ss = 0.0;
      for (const auto& r : runs) {
        const double d = getter(r)[k] - mu;
        ss += d * d;
      }
      mean[k] = mu;
      sd[k] = std::sqrt(ss / (n - 1.0));
    }
  };
  stats([](const DensitySeries& r) -> const std::vector<double>& { return r.m_density; },
        es.m_mean, es.m_std);
  stats([](const DensitySeries& r) -> const std::vector<double>& { return r.p_density; },
        es.p_mean, es.p_std);
  stats([](const DensitySeries& r) -> const std::vector<double>& { return r.total_density; },
        es.total_mean, es.total_std);
  return es;
}

}  // namespace gogrow
