// SPDX-License-Identifier: MIT

#include "sounder/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <map>
#include <numbers>
#include <optional>
#include <set>
#include <utility>

#include "sounder/calibration.hpp"
#include "sounder/channel.hpp"
#include "sounder/errors.hpp"
#include "sounder/linalg.hpp"
#include "sounder/mutual_info.hpp"
#include "sounder/rank1.hpp"
#include "sounder/rng.hpp"
#include "sounder/sensitivity.hpp"
#include "sounder/sounding.hpp"
#include "sounder/stats.hpp"
#include "sounder/util.hpp"

namespace sounder {

namespace {

using nlohmann::json;

constexpr double kInf = std::numeric_limits<double>::infinity();

// ---------------------------------------------------------------------------
// Experiment registry

struct Entry {
  ExperimentId id;
  const char* name;
  const char* blurb;
};

constexpr Entry kRegistry[] = {
    {ExperimentId::fig2_capacity, "fig2_capacity",
     "ergodic MI vs SNR for low-rank correlated channels under switched "
     "phase noise"},
    {ExperimentId::fig3_cdf, "fig3_cdf",
     "MI CDFs: physical vs effective vs correlation-damped synthetic channel"},
    {ExperimentId::fig4_bounds, "fig4_bounds",
     "rank-one capacity bound sandwich vs Monte Carlo over SNR"},
    {ExperimentId::fig5_variance, "fig5_variance",
     "measured-MI variance vs transmit array size, analytic vs Monte Carlo"},
    {ExperimentId::fig6_taylor, "fig6_taylor",
     "exact vs quadratic-surrogate MI distributions for balanced ranks"},
    {ExperimentId::fig7_laws, "fig7_laws",
     "closed-form log2-det law CDFs vs direct linearized Monte Carlo"},
    {ExperimentId::fig14_moments, "fig14_moments",
     "per-realization surrogate mean/variance vs Monte Carlo scatter"},
    {ExperimentId::calib_synth, "calib_synth",
     "synthetic calibration trace, offset/RMS round trip, MI overestimation"},
    {ExperimentId::seq_snr, "seq_snr",
     "m-sequence correlation SNR histograms under per-chip phase noise"},
    {ExperimentId::custom, "custom",
     "fully parameterized effective-channel Monte Carlo over an SNR grid"},
};

// ---------------------------------------------------------------------------
// Formatting

std::string fmt_g(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

std::string fmt_i(long long v) { return std::to_string(v); }

json params_echo(const ExperimentConfig& cfg) {
  return cfg.params.is_object() ? cfg.params : json::object();
}

std::string meta_block(const ExperimentConfig& cfg) {
  std::string s;
  s += "# version=";
  s += kToolkitVersion;
  s += "\n# experiment=" + experiment_name(cfg.id);
  s += "\n# seed=" + std::to_string(cfg.seed);
  s += "\n# config=" + params_echo(cfg).dump();
  s += "\n";
  return s;
}

json meta_json(const ExperimentConfig& cfg) {
  json m;
  m["version"] = kToolkitVersion;
  m["experiment"] = experiment_name(cfg.id);
  m["seed"] = cfg.seed;
  m["config"] = params_echo(cfg);
  return m;
}

/// CSV assembler: metadata block, then header, then rows (LF endings).
class Csv {
 public:
  explicit Csv(const ExperimentConfig& cfg) : s_(meta_block(cfg)) {}

  void header(std::initializer_list<const char*> cols) {
    bool first = true;
    for (const char* c : cols) {
      if (!first) s_ += ',';
      s_ += c;
      first = false;
    }
    s_ += '\n';
  }

  void row(std::initializer_list<std::string> cells) {
    bool first = true;
    for (const std::string& c : cells) {
      if (!first) s_ += ',';
      s_ += c;
      first = false;
    }
    s_ += '\n';
  }

  std::string take() { return std::move(s_); }

 private:
  std::string s_;
};

// ---------------------------------------------------------------------------
// Config reading

/// Typed reader over one JSON table.  With a Diagnostics sink it collects
/// every violation and hands back defaults so parsing can continue; without
/// one it throws validation_error at the first problem.
class ParamReader {
 public:
  ParamReader(const json& tbl, std::string prefix, Diagnostics* diags)
      : tbl_(tbl), prefix_(std::move(prefix)), diags_(diags) {
    if (!tbl_.is_object() && !tbl_.is_null()) {
      fail("", "must be a table of key/value pairs");
    }
  }

  bool has(const std::string& key) const {
    return tbl_.is_object() && tbl_.contains(key);
  }

  void fail(const std::string& key, const std::string& msg) {
    const std::string full = prefix_ + key + (key.empty() ? "" : ": ") + msg;
    if (diags_ != nullptr) {
      diags_->errors.push_back(full);
    } else {
      throw validation_error(full);
    }
  }

  void warn(const std::string& key, const std::string& msg) {
    if (diags_ != nullptr) {
      diags_->warnings.push_back(prefix_ + key + ": " + msg);
    }
  }

  double number(const std::string& key, double dflt, double lo = -kInf,
                double hi = kInf) {
    mark(key);
    if (!has(key)) return dflt;
    const json& v = tbl_.at(key);
    if (!v.is_number()) {
      fail(key, "must be a number");
      return dflt;
    }
    const double x = v.get<double>();
    if (!std::isfinite(x) || x < lo || x > hi) {
      fail(key, "must be in [" + fmt_g(lo) + ", " + fmt_g(hi) + "], got " +
                    fmt_g(x));
      return dflt;
    }
    return x;
  }

  long long integer(const std::string& key, long long dflt, long long lo,
                    long long hi) {
    mark(key);
    if (!has(key)) return dflt;
    const json& v = tbl_.at(key);
    if (!v.is_number_integer()) {
      fail(key, "must be an integer");
      return dflt;
    }
    const long long x = v.get<long long>();
    if (x < lo || x > hi) {
      fail(key, "must be in [" + std::to_string(lo) + ", " +
                    std::to_string(hi) + "], got " + std::to_string(x));
      return dflt;
    }
    return x;
  }

  bool boolean(const std::string& key, bool dflt) {
    mark(key);
    if (!has(key)) return dflt;
    const json& v = tbl_.at(key);
    if (!v.is_boolean()) {
      fail(key, "must be true or false");
      return dflt;
    }
    return v.get<bool>();
  }

  std::string choice(const std::string& key,
                     const std::vector<std::string>& allowed,
                     const std::string& dflt) {
    mark(key);
    if (!has(key)) return dflt;
    const json& v = tbl_.at(key);
    if (v.is_string()) {
      const std::string s = v.get<std::string>();
      for (const auto& a : allowed) {
        if (s == a) return s;
      }
    }
    std::string opts;
    for (const auto& a : allowed) {
      if (!opts.empty()) opts += ", ";
      opts += a;
    }
    fail(key, "must be one of {" + opts + "}");
    return dflt;
  }

  std::vector<double> number_list(const std::string& key,
                                  std::vector<double> dflt, double lo,
                                  double hi, std::size_t max_len = 1000) {
    mark(key);
    if (!has(key)) return dflt;
    const json& v = tbl_.at(key);
    if (!v.is_array() || v.empty() || v.size() > max_len) {
      fail(key, "must be a nonempty array of at most " +
                    std::to_string(max_len) + " numbers");
      return dflt;
    }
    std::vector<double> out;
    for (const auto& e : v) {
      if (!e.is_number()) {
        fail(key, "must contain numbers only");
        return dflt;
      }
      const double x = e.get<double>();
      if (!std::isfinite(x) || x < lo || x > hi) {
        fail(key, "entries must be in [" + fmt_g(lo) + ", " + fmt_g(hi) +
                      "], got " + fmt_g(x));
        return dflt;
      }
      out.push_back(x);
    }
    return out;
  }

  std::vector<long long> integer_list(const std::string& key,
                                      std::vector<long long> dflt,
                                      long long lo, long long hi,
                                      std::size_t max_len = 1000) {
    mark(key);
    if (!has(key)) return dflt;
    const json& v = tbl_.at(key);
    if (!v.is_array() || v.empty() || v.size() > max_len) {
      fail(key, "must be a nonempty array of at most " +
                    std::to_string(max_len) + " integers");
      return dflt;
    }
    std::vector<long long> out;
    for (const auto& e : v) {
      if (!e.is_number_integer()) {
        fail(key, "must contain integers only");
        return dflt;
      }
      const long long x = e.get<long long>();
      if (x < lo || x > hi) {
        fail(key, "entries must be in [" + std::to_string(lo) + ", " +
                      std::to_string(hi) + "], got " + std::to_string(x));
        return dflt;
      }
      out.push_back(x);
    }
    return out;
  }

  /// SNR grid: either an array of dB values or {"start","stop","step"}.
  std::vector<double> snr_grid(const std::string& key,
                               std::vector<double> dflt) {
    mark(key);
    if (!has(key)) return dflt;
    const json& v = tbl_.at(key);
    if (v.is_array()) {
      return number_list(key, std::move(dflt), -50.0, 100.0, 200);
    }
    if (v.is_object()) {
      std::set<std::string> known = {"start", "stop", "step"};
      for (auto it = v.begin(); it != v.end(); ++it) {
        if (known.count(it.key()) == 0) {
          fail(key, "unknown grid key '" + it.key() + "'");
          return dflt;
        }
      }
      if (!v.contains("start") || !v.contains("stop") ||
          !v.contains("step") || !v["start"].is_number() ||
          !v["stop"].is_number() || !v["step"].is_number()) {
        fail(key, "grid needs numeric start, stop, step");
        return dflt;
      }
      const double start = v["start"].get<double>();
      const double stop = v["stop"].get<double>();
      const double step = v["step"].get<double>();
      if (!(step > 0.0) || stop < start || start < -50.0 || stop > 100.0 ||
          (stop - start) / step > 200.0) {
        fail(key, "grid must satisfy -50 <= start <= stop <= 100, step > 0, "
                  "at most 200 points");
        return dflt;
      }
      std::vector<double> out;
      for (double x = start; x <= stop + 1e-9; x += step) out.push_back(x);
      return out;
    }
    fail(key, "must be an array of dB values or {start, stop, step}");
    return dflt;
  }

  /// Sub-table (object) under `key`; missing gives an empty table.
  json table(const std::string& key) {
    mark(key);
    if (!has(key)) return json::object();
    const json& v = tbl_.at(key);
    if (!v.is_object()) {
      fail(key, "must be a table/object");
      return json::object();
    }
    return v;
  }

  /// Raw value access (arrays of rows etc.); marks the key as consumed.
  const json* raw(const std::string& key) {
    mark(key);
    return has(key) ? &tbl_.at(key) : nullptr;
  }

  std::string prefix() const { return prefix_; }
  Diagnostics* diags() const { return diags_; }

  /// Report any keys never consumed by the experiment's schema.
  void check_unknown() {
    if (!tbl_.is_object()) return;
    for (auto it = tbl_.begin(); it != tbl_.end(); ++it) {
      if (seen_.count(it.key()) == 0) {
        fail(it.key(), "unknown key");
      }
    }
  }

 private:
  void mark(const std::string& key) { seen_.insert(key); }

  const json& tbl_;
  std::string prefix_;
  Diagnostics* diags_;
  std::set<std::string> seen_;
};

/// Complex scalar: a plain number (imaginary part 0) or a [re, im] pair.
std::optional<cxd> parse_complex(const json& v) {
  if (v.is_number()) return cxd(v.get<double>(), 0.0);
  if (v.is_array() && v.size() == 2 && v[0].is_number() && v[1].is_number()) {
    return cxd(v[0].get<double>(), v[1].get<double>());
  }
  return std::nullopt;
}

std::optional<CVec> parse_cvec(ParamReader& r, const std::string& key) {
  const json* v = r.raw(key);
  if (v == nullptr) return std::nullopt;
  if (!v->is_array() || v->empty() || v->size() > 4096) {
    r.fail(key, "must be a nonempty array of numbers or [re, im] pairs");
    return std::nullopt;
  }
  CVec out(static_cast<Eigen::Index>(v->size()));
  for (std::size_t i = 0; i < v->size(); ++i) {
    const auto c = parse_complex((*v)[i]);
    if (!c) {
      r.fail(key, "entry " + std::to_string(i) +
                      " must be a number or [re, im] pair");
      return std::nullopt;
    }
    out(static_cast<Eigen::Index>(i)) = *c;
  }
  return out;
}

std::optional<CMat> parse_cmat(ParamReader& r, const std::string& key) {
  const json* v = r.raw(key);
  if (v == nullptr) return std::nullopt;
  if (!v->is_array() || v->empty() || v->size() > 4096) {
    r.fail(key, "must be a nonempty array of rows");
    return std::nullopt;
  }
  const std::size_t rows = v->size();
  std::size_t cols = 0;
  CMat out;
  for (std::size_t i = 0; i < rows; ++i) {
    const json& rv = (*v)[i];
    if (!rv.is_array() || rv.empty() || rv.size() > 4096) {
      r.fail(key, "row " + std::to_string(i) + " must be a nonempty array");
      return std::nullopt;
    }
    if (i == 0) {
      cols = rv.size();
      out.resize(static_cast<Eigen::Index>(rows),
                 static_cast<Eigen::Index>(cols));
    } else if (rv.size() != cols) {
      r.fail(key, "rows must all have the same length");
      return std::nullopt;
    }
    for (std::size_t j = 0; j < cols; ++j) {
      const auto c = parse_complex(rv[j]);
      if (!c) {
        r.fail(key, "entry (" + std::to_string(i) + ", " + std::to_string(j) +
                        ") must be a number or [re, im] pair");
        return std::nullopt;
      }
      out(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = *c;
    }
  }
  return out;
}

std::optional<RMat> parse_rmat(ParamReader& r, const std::string& key) {
  const auto m = parse_cmat(r, key);
  if (!m) return std::nullopt;
  if (m->imag().cwiseAbs().maxCoeff() != 0.0) {
    r.fail(key, "must be real-valued");
    return std::nullopt;
  }
  return RMat(m->real());
}

/// Phase variance from either rms_deg or sigma_phi2 (rms_deg wins if both
/// are absent → dflt_rms_deg).  Emits the small-phase warning above 0.05.
double parse_phase_variance(ParamReader& r, double dflt_rms_deg) {
  double sigma2 = rms_degrees_to_variance(dflt_rms_deg);
  const bool has_rms = r.has("rms_deg");
  const bool has_var = r.has("sigma_phi2");
  if (has_rms && has_var) {
    r.fail("rms_deg", "give either rms_deg or sigma_phi2, not both");
  }
  if (has_var) {
    sigma2 = r.number("sigma_phi2", sigma2, 0.0, 10.0);
  } else {
    const double rms = r.number("rms_deg", dflt_rms_deg, 0.0, 180.0);
    sigma2 = rms_degrees_to_variance(rms);
  }
  if (sigma2 > 0.05) {
    r.warn(has_var ? "sigma_phi2" : "rms_deg",
           "phase variance " + fmt_g(sigma2) +
               " rad^2 exceeds 0.05; the small-phase-error approximations "
               "(linearization, closed-form laws, bounds) degrade");
  }
  return sigma2;
}

/// Cheap constant-correlation matrix: 1 on the diagonal, c elsewhere.
CMat constant_correlation(Eigen::Index m, double c) {
  CMat r = CMat::Constant(m, m, cxd(c, 0.0));
  r.diagonal().setConstant(1.0);
  return r;
}

double quantile_sorted(const std::vector<double>& sorted, double q) {
  const auto idx = static_cast<std::size_t>(
      std::floor(q * static_cast<double>(sorted.size() - 1)));
  return sorted[std::min(idx, sorted.size() - 1)];
}

// ---------------------------------------------------------------------------
// fig2_capacity

struct Fig2Params {
  long long m = 8;
  std::vector<long long> ranks{1, 2, 4, 8};
  std::vector<double> rms_levels{0.0, 3.5, 7.0};
  std::vector<double> snr{0, 5, 10, 15, 20, 25, 30, 35};
  long long trials = 10000;
};

Fig2Params parse_fig2(ParamReader& r) {
  Fig2Params p;
  p.m = r.integer("m", p.m, 2, 64);
  p.ranks = r.integer_list("ranks", p.ranks, 1, p.m, 64);
  p.rms_levels = r.number_list("rms_deg_levels", p.rms_levels, 0.0, 180.0, 16);
  for (double rms : p.rms_levels) {
    if (rms_degrees_to_variance(rms) > 0.05) {
      r.warn("rms_deg_levels",
             "level " + fmt_g(rms) +
                 " deg exceeds the small-phase-error envelope (0.05 rad^2)");
      break;
    }
  }
  p.snr = r.snr_grid("snr_db", p.snr);
  p.trials = r.integer("trials", p.trials, 100, 10000000);
  r.check_unknown();
  return p;
}

ExperimentResult run_fig2(const ExperimentConfig& cfg) {
  ParamReader r(cfg.params, "params.", nullptr);
  const Fig2Params p = parse_fig2(r);

  const SoundingPlan plan = regular_plan(p.m, p.m, 1.0,
                                         static_cast<double>(p.m + 1));
  Csv csv(cfg);
  csv.header({"rank", "rms_deg", "snr_db", "mi_mean", "mi_se"});
  for (std::size_t ri = 0; ri < p.ranks.size(); ++ri) {
    const CMat corr = make_lowrank_correlation(p.m, p.ranks[ri]);
    const ChannelModel channel =
        correlated_rayleigh_channel(corr, CorrelationSide::receive, p.m, p.m);
    for (std::size_t ni = 0; ni < p.rms_levels.size(); ++ni) {
      PhaseErrorModel noise;
      noise.sigma_phi2 = rms_degrees_to_variance(p.rms_levels[ni]);
      noise.correlation = PhaseCorrelation::fully_uncorrelated;
      for (std::size_t si = 0; si < p.snr.size(); ++si) {
        const std::uint64_t point =
            (ri * p.rms_levels.size() + ni) * p.snr.size() + si;
        const MIStats stats =
            mc_mi(channel, plan, noise, db_to_linear(p.snr[si]), p.trials,
                  cfg.seed, ThetaMode::exact, cfg.threads, point << 32);
        csv.row({fmt_i(p.ranks[ri]), fmt_g(p.rms_levels[ni]),
                 fmt_g(p.snr[si]), fmt_g(stats.mean), fmt_g(stats.se_mean)});
      }
    }
  }
  return {{{"fig2_capacity.csv", csv.take()}}};
}

// ---------------------------------------------------------------------------
// fig3_cdf

struct Fig3Params {
  long long m = 4;
  std::vector<double> couplings{0.7, 0.95};
  double rms_deg = 7.0;
  double snr_db = 20.0;
  long long trials = 10000;
  double sigma2 = 0.0;
};

Fig3Params parse_fig3(ParamReader& r) {
  Fig3Params p;
  p.m = r.integer("m", p.m, 2, 64);
  p.couplings = r.number_list("coupling", p.couplings, 0.0, 0.999, 16);
  p.sigma2 = parse_phase_variance(r, p.rms_deg);
  p.snr_db = r.number("snr_db", p.snr_db, -50.0, 100.0);
  p.trials = r.integer("trials", p.trials, 100, 10000000);
  r.check_unknown();
  return p;
}

ExperimentResult run_fig3(const ExperimentConfig& cfg) {
  ParamReader r(cfg.params, "params.", nullptr);
  const Fig3Params p = parse_fig3(r);

  const double rho = db_to_linear(p.snr_db);
  const double kappa = std::exp(-p.sigma2);
  const SoundingPlan plan = regular_plan(p.m, p.m, 1.0,
                                         static_cast<double>(p.m + 1));
  PhaseErrorModel noise;
  noise.sigma_phi2 = p.sigma2;
  noise.correlation = PhaseCorrelation::fully_uncorrelated;

  Csv csv(cfg);
  csv.header({"coupling", "variant", "mi", "cdf"});
  for (std::size_t ci = 0; ci < p.couplings.size(); ++ci) {
    const double c = p.couplings[ci];
    const ChannelModel physical = correlated_rayleigh_channel(
        constant_correlation(p.m, c), CorrelationSide::receive, p.m, p.m);
    const ChannelModel damped = correlated_rayleigh_channel(
        constant_correlation(p.m, c * kappa), CorrelationSide::receive, p.m,
        p.m);
    const std::uint64_t base = static_cast<std::uint64_t>(3 * ci);
    MIStats phys = mc_mi_physical(physical, rho, p.trials, cfg.seed,
                                  cfg.threads, base << 32);
    MIStats eff = mc_mi(physical, plan, noise, rho, p.trials, cfg.seed,
                        ThetaMode::exact, cfg.threads, (base + 1) << 32);
    MIStats syn = mc_mi_physical(damped, rho, p.trials, cfg.seed, cfg.threads,
                                 (base + 2) << 32);
    const std::pair<const char*, MIStats*> variants[] = {
        {"physical", &phys}, {"effective", &eff}, {"synthetic", &syn}};
    for (const auto& [label, stats] : variants) {
      std::sort(stats->samples.begin(), stats->samples.end());
      const auto n = static_cast<double>(stats->samples.size());
      for (std::size_t i = 0; i < stats->samples.size(); ++i) {
        csv.row({fmt_g(c), label, fmt_g(stats->samples[i]),
                 fmt_g((static_cast<double>(i) + 0.5) / n)});
      }
    }
  }
  return {{{"fig3_cdf.csv", csv.take()}}};
}

// ---------------------------------------------------------------------------
// fig4_bounds

struct Fig4Params {
  long long m_r = 4;
  long long m_t = 4;
  double rms_deg = 7.0;
  std::vector<double> snr{0, 5, 10, 15, 20, 25, 30, 35, 40};
  long long trials = 10000;
  double sigma2 = 0.0;
};

Fig4Params parse_fig4(ParamReader& r) {
  Fig4Params p;
  p.m_r = r.integer("m_r", p.m_r, 1, 32);
  p.m_t = r.integer("m_t", p.m_t, 1, 32);
  p.sigma2 = parse_phase_variance(r, p.rms_deg);
  p.snr = r.snr_grid("snr_db", p.snr);
  p.trials = r.integer("trials", p.trials, 100, 10000000);
  r.check_unknown();
  return p;
}

ExperimentResult run_fig4(const ExperimentConfig& cfg) {
  ParamReader r(cfg.params, "params.", nullptr);
  const Fig4Params p = parse_fig4(r);

  const ChannelModel channel = all_ones_channel(p.m_r, p.m_t);
  const SoundingPlan plan = regular_plan(
      p.m_r, p.m_t, 1.0, static_cast<double>(p.m_r + 1));
  PhaseErrorModel noise;
  noise.sigma_phi2 = p.sigma2;
  noise.correlation = PhaseCorrelation::fully_uncorrelated;

  Csv csv(cfg);
  csv.header({"snr_db", "lower_cool", "lower_c", "upper", "mc_mean", "mc_se"});
  for (std::size_t si = 0; si < p.snr.size(); ++si) {
    const double rho = db_to_linear(p.snr[si]);
    const MIStats stats =
        mc_mi(channel, plan, noise, rho, p.trials, cfg.seed, ThetaMode::exact,
              cfg.threads, static_cast<std::uint64_t>(si) << 32);
    csv.row({fmt_g(p.snr[si]),
             fmt_g(capacity_lower_bound_minor_sum(p.m_r, p.m_t, rho,
                                                  p.sigma2)),
             fmt_g(capacity_lower_bound_stream_split(p.m_r, p.m_t, rho,
                                                     p.sigma2)),
             fmt_g(capacity_upper_bound(p.m_r, p.m_t, rho, p.sigma2)),
             fmt_g(stats.mean), fmt_g(stats.se_mean)});
  }
  return {{{"fig4_bounds.csv", csv.take()}}};
}

// ---------------------------------------------------------------------------
// fig5_variance

struct Fig5Params {
  long long m_r = 10;
  std::vector<long long> m_t_values;
  double rms_deg = 3.5;
  double snr_db = 50.0;
  long long trials = 3000;
  double sigma2 = 0.0;
};

Fig5Params parse_fig5(ParamReader& r) {
  Fig5Params p;
  for (long long mt = 2; mt <= 20; ++mt) p.m_t_values.push_back(mt);
  p.m_r = r.integer("m_r", p.m_r, 1, 64);
  p.m_t_values = r.integer_list("m_t_values", p.m_t_values, 2, 64, 64);
  p.sigma2 = parse_phase_variance(r, p.rms_deg);
  p.snr_db = r.number("snr_db", p.snr_db, -50.0, 100.0);
  p.trials = r.integer("trials", p.trials, 100, 10000000);
  r.check_unknown();
  return p;
}

ExperimentResult run_fig5(const ExperimentConfig& cfg) {
  ParamReader r(cfg.params, "params.", nullptr);
  const Fig5Params p = parse_fig5(r);

  const double rho = db_to_linear(p.snr_db);
  Csv csv(cfg);
  csv.header({"m_t", "var_mc", "var_mc_se", "var_analytic", "var_iid_ref",
              "ratio_analytic_iid"});
  for (std::size_t ti = 0; ti < p.m_t_values.size(); ++ti) {
    const long long mt = p.m_t_values[ti];
    const ChannelModel channel = all_ones_channel(p.m_r, mt);
    const SoundingPlan plan =
        regular_plan(p.m_r, mt, 1.0, static_cast<double>(p.m_r + 1));
    PhaseErrorModel noise;
    noise.sigma_phi2 = p.sigma2;
    noise.correlation = PhaseCorrelation::fully_uncorrelated;
    const MIStats stats =
        mc_mi(channel, plan, noise, rho, p.trials, cfg.seed, ThetaMode::exact,
              cfg.threads, static_cast<std::uint64_t>(ti) << 32);
    // Standard error of the unbiased variance from the fourth central moment.
    const auto n = static_cast<double>(stats.samples.size());
    const double mu4 = pairwise_sum(stats.samples.size(), [&](std::size_t i) {
      const double d = stats.samples[i] - stats.mean;
      return d * d * d * d;
    }) / n;
    const double var_of_var =
        (mu4 - stats.variance * stats.variance * (n - 3.0) / (n - 1.0)) / n;
    const double var_analytic = mi_variance_high_snr(p.m_r, mt, p.sigma2);
    const double var_iid = mi_variance_iid_reference(p.m_r, mt);
    csv.row({fmt_i(mt), fmt_g(stats.variance),
             fmt_g(std::sqrt(std::max(0.0, var_of_var))), fmt_g(var_analytic),
             fmt_g(var_iid), fmt_g(var_analytic / var_iid)});
  }
  return {{{"fig5_variance.csv", csv.take()}}};
}

// ---------------------------------------------------------------------------
// fig6_taylor

struct Fig6Params {
  long long m = 4;
  std::vector<long long> ranks{1, 2, 3, 4};
  double rms_deg = 3.5;
  double snr_db = 30.0;
  long long trials = 10000;
  double sigma2 = 0.0;
};

Fig6Params parse_fig6(ParamReader& r) {
  Fig6Params p;
  p.m = r.integer("m", p.m, 2, 32);
  p.ranks = r.integer_list("ranks", p.ranks, 1, p.m, 32);
  p.sigma2 = parse_phase_variance(r, p.rms_deg);
  p.snr_db = r.number("snr_db", p.snr_db, -50.0, 100.0);
  p.trials = r.integer("trials", p.trials, 100, 10000000);
  r.check_unknown();
  return p;
}

ExperimentResult run_fig6(const ExperimentConfig& cfg) {
  ParamReader r(cfg.params, "params.", nullptr);
  const Fig6Params p = parse_fig6(r);

  const double rho = db_to_linear(p.snr_db);
  const SoundingPlan plan = regular_plan(p.m, p.m, 1.0,
                                         static_cast<double>(p.m + 1));
  PhaseErrorModel noise;
  noise.sigma_phi2 = p.sigma2;
  noise.correlation = PhaseCorrelation::fully_uncorrelated;
  const EffectiveSampler sampler(plan, noise);

  Csv csv(cfg);
  csv.header({"rank", "variant", "mi", "cdf"});
  for (std::size_t ki = 0; ki < p.ranks.size(); ++ki) {
    const CMat h = make_balanced_rank_k(p.m, p.ranks[ki]);
    const TaylorExpansion expansion = taylor_expand_mi(h, rho);
    std::vector<double> exact(static_cast<std::size_t>(p.trials));
    std::vector<double> taylor(static_cast<std::size_t>(p.trials));
    parallel_for(exact.size(), cfg.threads, [&](std::size_t i) {
      RngStream rng(cfg.seed, (static_cast<std::uint64_t>(ki) << 32) + i);
      const RMat phi = sampler.draw_phi(rng);
      const CMat theta = sampler.theta_for(phi, ThetaMode::exact);
      exact[i] = mutual_information(h.cwiseProduct(theta), rho);
      taylor[i] = expansion.eval(phi);
    });
    const std::pair<const char*, std::vector<double>*> variants[] = {
        {"exact", &exact}, {"taylor", &taylor}};
    for (const auto& [label, samples] : variants) {
      std::sort(samples->begin(), samples->end());
      const auto n = static_cast<double>(samples->size());
      for (std::size_t i = 0; i < samples->size(); ++i) {
        csv.row({fmt_i(p.ranks[ki]), label, fmt_g((*samples)[i]),
                 fmt_g((static_cast<double>(i) + 0.5) / n)});
      }
    }
  }
  return {{{"fig6_taylor.csv", csv.take()}}};
}

// ---------------------------------------------------------------------------
// fig7_laws

struct Fig7Case {
  long long m_r = 4;
  long long m_t = 4;
  double rms_deg = 3.5;
};

struct Fig7Params {
  std::vector<Fig7Case> cases{{4, 4, 3.5}, {4, 8, 7.0}, {16, 16, 3.5}};
  long long samples = 20000;
};

Fig7Params parse_fig7(ParamReader& r) {
  Fig7Params p;
  if (const json* v = r.raw("cases")) {
    p.cases.clear();
    if (!v->is_array() || v->empty() || v->size() > 16) {
      r.fail("cases", "must be a nonempty array of at most 16 case tables");
      p.cases = Fig7Params().cases;
    } else {
      for (std::size_t i = 0; i < v->size(); ++i) {
        ParamReader cr((*v)[i],
                       r.prefix() + "cases[" + std::to_string(i) + "].",
                       r.diags());
        Fig7Case c;
        c.m_r = cr.integer("m_r", c.m_r, 1, 64);
        c.m_t = cr.integer("m_t", c.m_t, 1, 64);
        c.rms_deg = cr.number("rms_deg", c.rms_deg, 0.0, 180.0);
        if (rms_degrees_to_variance(c.rms_deg) > 0.05) {
          cr.warn("rms_deg",
                  "phase variance exceeds 0.05 rad^2; the closed-form laws "
                  "assume small phase errors");
        }
        cr.check_unknown();
        p.cases.push_back(c);
      }
    }
  }
  p.samples = r.integer("samples", p.samples, 100, 200000);
  r.check_unknown();
  return p;
}

ExperimentResult run_fig7(const ExperimentConfig& cfg) {
  ParamReader r(cfg.params, "params.", nullptr);
  const Fig7Params p = parse_fig7(r);

  Csv csv(cfg);
  csv.header({"m_r", "m_t", "rms_deg", "variant", "value", "cdf"});
  for (std::size_t ci = 0; ci < p.cases.size(); ++ci) {
    const Fig7Case& c = p.cases[ci];
    const double sigma2 = rms_degrees_to_variance(c.rms_deg);
    std::vector<double> mc(static_cast<std::size_t>(p.samples));
    std::vector<double> approx(mc.size());
    std::vector<double> exact(mc.size());
    const std::uint64_t base = static_cast<std::uint64_t>(3 * ci);
    parallel_for(mc.size(), cfg.threads, [&](std::size_t i) {
      RngStream rng(cfg.seed, (base << 32) + i);
      mc[i] = sample_logdet_effective(c.m_r, c.m_t, sigma2,
                                      /*linearized=*/true, rng);
    });
    parallel_for(mc.size(), cfg.threads, [&](std::size_t i) {
      RngStream rng(cfg.seed, ((base + 1) << 32) + i);
      approx[i] = sample_logdet_law(c.m_r, c.m_t, sigma2,
                                    LogdetLaw::approximate, rng);
    });
    parallel_for(mc.size(), cfg.threads, [&](std::size_t i) {
      RngStream rng(cfg.seed, ((base + 2) << 32) + i);
      exact[i] =
          sample_logdet_law(c.m_r, c.m_t, sigma2, LogdetLaw::exact, rng);
    });
    const std::pair<const char*, std::vector<double>*> variants[] = {
        {"mc", &mc}, {"approx", &approx}, {"exact", &exact}};
    for (const auto& [label, samples] : variants) {
      std::sort(samples->begin(), samples->end());
      const auto n = static_cast<double>(samples->size());
      for (std::size_t i = 0; i < samples->size(); ++i) {
        csv.row({fmt_i(c.m_r), fmt_i(c.m_t), fmt_g(c.rms_deg), label,
                 fmt_g((*samples)[i]),
                 fmt_g((static_cast<double>(i) + 0.5) / n)});
      }
    }
  }
  return {{{"fig7_laws.csv", csv.take()}}};
}

// ---------------------------------------------------------------------------
// fig14_moments

struct Fig14Params {
  long long channels = 2000;
  long long draws = 10000;
  long long m = 4;
  double rms_deg = 3.5;
  double snr_db = 30.0;
  double sigma2 = 0.0;
};

Fig14Params parse_fig14(ParamReader& r) {
  Fig14Params p;
  p.channels = r.integer("channels", p.channels, 1, 100000);
  p.draws = r.integer("draws", p.draws, 100, 1000000);
  p.m = r.integer("m", p.m, 2, 16);
  p.sigma2 = parse_phase_variance(r, p.rms_deg);
  p.snr_db = r.number("snr_db", p.snr_db, -50.0, 100.0);
  r.check_unknown();
  return p;
}

ExperimentResult run_fig14(const ExperimentConfig& cfg) {
  ParamReader r(cfg.params, "params.", nullptr);
  const Fig14Params p = parse_fig14(r);

  const double rho = db_to_linear(p.snr_db);
  const SoundingPlan plan = regular_plan(p.m, p.m, 1.0,
                                         static_cast<double>(p.m + 1));
  PhaseErrorModel noise;
  noise.sigma_phi2 = p.sigma2;
  noise.correlation = PhaseCorrelation::fully_uncorrelated;
  const EffectiveSampler sampler(plan, noise);
  const ChannelModel channel = iid_rayleigh_channel(p.m, p.m);
  const RMat sigma_mat =
      p.sigma2 * RMat::Identity(p.m * p.m, p.m * p.m);

  const auto n_ch = static_cast<std::size_t>(p.channels);
  std::vector<double> mc_mean(n_ch), mc_se(n_ch), mc_var(n_ch),
      ta_mean(n_ch), ta_var(n_ch), mi0(n_ch);
  parallel_for(n_ch, cfg.threads, [&](std::size_t c) {
    RngStream rng(cfg.seed, c);
    const CMat h = draw_channel(channel, rng);
    const TaylorExpansion expansion = taylor_expand_mi(h, rho);
    const TaylorMoments tm = taylor_mi_moments(expansion, sigma_mat);
    std::vector<double> samples(static_cast<std::size_t>(p.draws));
    for (auto& s : samples) {
      const RMat phi = sampler.draw_phi(rng);
      const CMat theta = sampler.theta_for(phi, ThetaMode::exact);
      s = mutual_information(h.cwiseProduct(theta), rho);
    }
    const MeanVar mv = mean_variance(samples);
    mc_mean[c] = mv.mean;
    mc_var[c] = mv.variance;
    mc_se[c] = std::sqrt(mv.variance / static_cast<double>(p.draws));
    ta_mean[c] = tm.mean;
    ta_var[c] = tm.variance;
    mi0[c] = expansion.mi0;
  });

  Csv csv(cfg);
  csv.header({"channel", "mi_mc_mean", "mi_mc_se", "mi_mc_var", "taylor_mean",
              "taylor_var", "mi_noise_free"});
  for (std::size_t c = 0; c < n_ch; ++c) {
    csv.row({fmt_i(static_cast<long long>(c)), fmt_g(mc_mean[c]),
             fmt_g(mc_se[c]), fmt_g(mc_var[c]), fmt_g(ta_mean[c]),
             fmt_g(ta_var[c]), fmt_g(mi0[c])});
  }
  return {{{"fig14_moments.csv", csv.take()}}};
}

// ---------------------------------------------------------------------------
// calib_synth

struct CalibParams {
  std::string preset = "len511";
  long long snapshots = 1100;
  double rms_deg = 3.9;
  double delta_omega = 2.0 * std::numbers::pi * 0.378;
  std::string correlation = "fully_uncorrelated";
  double tau_c = 0.1;
  double rho_db = 20.0;
  long long ref_trials = 2000;
  bool write_trace = true;
  long long max_lag = 0;  // 0 -> m_r - 1
  double sigma2 = 0.0;
};

CalibParams parse_calib(ParamReader& r) {
  CalibParams p;
  p.preset = r.choice("preset", {"len511", "len31"}, p.preset);
  p.snapshots = r.integer("snapshots", p.snapshots, 5, 1000000);
  p.sigma2 = parse_phase_variance(r, p.rms_deg);
  p.rms_deg = std::sqrt(p.sigma2) * 180.0 / std::numbers::pi;
  p.delta_omega = r.number("delta_omega", p.delta_omega, -1e6, 1e6);
  p.correlation = r.choice(
      "correlation", {"fully_uncorrelated", "fully_correlated", "exponential"},
      p.correlation);
  p.tau_c = r.number("tau_c", p.tau_c, 1e-12, 1e6);
  p.rho_db = r.number("rho_db", p.rho_db, -50.0, 100.0);
  p.ref_trials = r.integer("ref_trials", p.ref_trials, 100, 1000000);
  p.write_trace = r.boolean("write_trace", p.write_trace);
  p.max_lag = r.integer("max_lag", p.max_lag, 0, 1000);
  r.check_unknown();
  return p;
}

ExperimentResult run_calib(const ExperimentConfig& cfg) {
  ParamReader r(cfg.params, "params.", nullptr);
  const CalibParams p = parse_calib(r);

  // Switched-sounder presets: antenna counts and slot timing of the two
  // hardware configurations the synthetic traces mimic.
  Eigen::Index m = 16;
  double t_r = 10.22e-6;
  double t_mimo = 19.46e-3;
  if (p.preset == "len31") {
    m = 23;
    t_r = 0.93e-6;
    t_mimo = 10.27e-3;
  }
  const double t_t = static_cast<double>(m + 1) * t_r;  // dummy-slot gap
  const SoundingPlan plan = regular_plan(m, m, t_r, t_t);

  PhaseErrorModel model;
  model.sigma_phi2 = p.sigma2;
  model.delta_omega = p.delta_omega;
  model.tau_c = p.tau_c;
  if (p.correlation == "fully_correlated") {
    model.correlation = PhaseCorrelation::fully_correlated;
  } else if (p.correlation == "exponential") {
    model.correlation = PhaseCorrelation::exponential;
  } else {
    model.correlation = PhaseCorrelation::fully_uncorrelated;
  }

  const CalibrationTrace trace =
      synth_trace(plan, model, p.snapshots, t_mimo, cfg.seed);
  const LinearPhaseFit fit = remove_linear_phase(trace);
  const double rms_est = rms_phase_degrees(trace, fit.residuals);
  const double ks = gaussian_cdf_deviation(
      snapshot_mean_removed(trace, fit.residuals), p.rms_deg);
  const long long max_lag = p.max_lag > 0 ? p.max_lag
                                          : static_cast<long long>(m - 1);
  const PhaseIncrementReport increments =
      phase_increment_levels(trace, fit.residuals,
                             static_cast<int>(max_lag));
  const CalibrationMiReport mi = calibration_mi_comparison(
      trace, db_to_linear(p.rho_db), p.ref_trials, cfg.seed, cfg.threads);

  ExperimentResult result;
  if (p.write_trace) {
    Csv trace_csv(cfg);
    trace_csv.header({"l", "k", "t_seconds", "re", "im"});
    const std::size_t k_slots = plan.times.size();
    for (std::size_t i = 0; i < trace.gain.size(); ++i) {
      trace_csv.row({fmt_i(static_cast<long long>(i / k_slots) + 1),
                     fmt_i(static_cast<long long>(i % k_slots) + 1),
                     fmt_g(trace.t[i]), fmt_g(trace.gain[i].real()),
                     fmt_g(trace.gain[i].imag())});
    }
    result.files.push_back({"calib_trace.csv", trace_csv.take()});
  }

  Csv lag_csv(cfg);
  lag_csv.header({"lag", "level_deg", "pair_count"});
  for (std::size_t i = 0; i < increments.lags.size(); ++i) {
    lag_csv.row({fmt_i(increments.lags[i]), fmt_g(increments.level_deg[i]),
                 fmt_i(static_cast<long long>(increments.pair_count[i]))});
  }
  result.files.push_back({"calib_sigma_alpha.csv", lag_csv.take()});

  json summary;
  summary["meta"] = meta_json(cfg);
  summary["preset"] = p.preset;
  summary["m_r"] = m;
  summary["m_t"] = m;
  summary["snapshots"] = p.snapshots;
  summary["samples"] = trace.gain.size();
  summary["delta_omega_true"] = p.delta_omega;
  summary["delta_omega_hat"] = fit.delta_omega_hat;
  summary["delta_omega_rel_error"] =
      p.delta_omega == 0.0
          ? fit.delta_omega_hat
          : (fit.delta_omega_hat - p.delta_omega) / p.delta_omega;
  summary["rms_deg_true"] = p.rms_deg;
  summary["rms_deg_est"] = rms_est;
  summary["ks_gaussian"] = ks;
  summary["alpha"] = {mi.alpha.real(), mi.alpha.imag()};
  summary["noise_var"] = mi.noise_var;
  summary["mi_effective_mean"] = mi.mi_effective_mean;
  summary["mi_reference_mean"] = mi.mi_reference_mean;
  summary["overestimation_ratio"] = mi.overestimation_ratio;
  summary["gain_effective"] = mi.gain_effective;
  summary["gain_reference"] = mi.gain_reference;
  result.files.push_back({"calib_summary.json", summary.dump(2) + "\n"});
  return result;
}

// ---------------------------------------------------------------------------
// seq_snr

struct SeqSnrParams {
  std::vector<long long> degrees{5, 9};
  double rms_deg = 3.9;
  std::string correlation = "exponential";
  double tau_c_chips = 100.0;
  long long draws = 400;
  double bin_db = 0.25;
  double sigma2 = 0.0;
};

SeqSnrParams parse_seq_snr(ParamReader& r) {
  SeqSnrParams p;
  p.degrees = r.integer_list("degrees", p.degrees, 2, 18, 8);
  p.sigma2 = parse_phase_variance(r, p.rms_deg);
  p.correlation =
      r.choice("correlation", {"fully_uncorrelated", "exponential"},
               p.correlation);
  p.tau_c_chips = r.number("tau_c_chips", p.tau_c_chips, 0.001, 1e9);
  p.draws = r.integer("draws", p.draws, 50, 100000);
  p.bin_db = r.number("bin_db", p.bin_db, 0.001, 10.0);
  r.check_unknown();
  return p;
}

ExperimentResult run_seq_snr(const ExperimentConfig& cfg) {
  ParamReader r(cfg.params, "params.", nullptr);
  const SeqSnrParams p = parse_seq_snr(r);

  const double sigma = std::sqrt(p.sigma2);
  const bool exponential = p.correlation == "exponential";
  const double chain = std::exp(-1.0 / p.tau_c_chips);

  ExperimentResult result;
  json summary;
  summary["meta"] = meta_json(cfg);
  summary["sequences"] = json::array();

  for (std::size_t di = 0; di < p.degrees.size(); ++di) {
    const MSequence seq = make_mseq(static_cast<int>(p.degrees[di]));
    const std::size_t n = seq.chips.size();
    std::vector<std::vector<double>> per_draw(
        static_cast<std::size_t>(p.draws));
    parallel_for(per_draw.size(), cfg.threads, [&](std::size_t i) {
      RngStream rng(cfg.seed, (static_cast<std::uint64_t>(di) << 32) + i);
      std::vector<double> phases(n);
      if (exponential) {
        phases[0] = sigma * rng.normal();
        const double spread = std::sqrt(1.0 - chain * chain) * sigma;
        for (std::size_t k = 1; k < n; ++k) {
          phases[k] = chain * phases[k - 1] + spread * rng.normal();
        }
      } else {
        for (auto& ph : phases) ph = sigma * rng.normal();
      }
      per_draw[i] = sequence_snr_db(seq, phases);
    });

    std::vector<double> pooled;
    pooled.reserve(per_draw.size() * (n - 2));
    for (const auto& d : per_draw) {
      pooled.insert(pooled.end(), d.begin(), d.end());
    }

    // Fixed-order binned histogram (bin centers at (k + 0.5) * bin_db).
    std::map<long long, long long> hist;
    for (double v : pooled) {
      ++hist[static_cast<long long>(std::floor(v / p.bin_db))];
    }
    Csv hist_csv(cfg);
    hist_csv.header({"snr_db", "count"});
    for (const auto& [bin, count] : hist) {
      hist_csv.row({fmt_g((static_cast<double>(bin) + 0.5) * p.bin_db),
                    fmt_i(count)});
    }
    result.files.push_back(
        {"seq_snr_hist_n" + std::to_string(n) + ".csv", hist_csv.take()});

    const double mean = pairwise_sum(pooled) /
                        static_cast<double>(pooled.size());
    std::sort(pooled.begin(), pooled.end());
    json entry;
    entry["degree"] = p.degrees[di];
    entry["n_chips"] = n;
    entry["samples"] = pooled.size();
    entry["noiseless_db"] =
        noiseless_sequence_snr_db(static_cast<int>(n));
    entry["mean_db"] = mean;
    entry["min_db"] = pooled.front();
    entry["max_db"] = pooled.back();
    entry["q001_db"] = quantile_sorted(pooled, 0.001);
    entry["median_db"] = quantile_sorted(pooled, 0.5);
    summary["sequences"].push_back(entry);
  }
  result.files.push_back({"seq_snr_summary.json", summary.dump(2) + "\n"});
  return result;
}

// ---------------------------------------------------------------------------
// custom

struct CustomParams {
  ChannelModel channel;
  SoundingPlan plan;
  PhaseErrorModel noise;
  std::vector<double> snr{0, 5, 10, 15, 20, 25, 30};
  long long trials = 10000;
  ThetaMode mode = ThetaMode::exact;
};

ChannelModel parse_channel(ParamReader& r) {
  const std::string kind = r.choice(
      "kind",
      {"iid_rayleigh", "all_ones", "deterministic_rank1",
       "correlated_rayleigh", "balanced_rank_k", "ricean",
       "synthetic_gaussian"},
      "iid_rayleigh");
  const long long m_r = r.integer("m_r", 4, 1, 64);
  const long long m_t = r.integer("m_t", 4, 1, 64);
  try {
    if (kind == "all_ones") {
      r.check_unknown();
      return all_ones_channel(m_r, m_t);
    }
    if (kind == "deterministic_rank1") {
      const bool has_g = r.has("g");
      const bool has_h = r.has("h");
      const auto g = parse_cvec(r, "g");
      const auto h = parse_cvec(r, "h");
      if (!has_g) r.fail("g", "required for deterministic_rank1");
      if (!has_h) r.fail("h", "required for deterministic_rank1");
      if (g && r.has("m_r") && g->size() != m_r) {
        r.fail("m_r", "inconsistent with the length of g");
      }
      if (h && r.has("m_t") && h->size() != m_t) {
        r.fail("m_t", "inconsistent with the length of h");
      }
      r.check_unknown();
      if (g && h) return deterministic_rank1_channel(*g, *h);
      return all_ones_channel(m_r, m_t);  // after a collected parse error
    }
    if (kind == "correlated_rayleigh") {
      const std::string side_name =
          r.choice("side", {"receive", "transmit"}, "receive");
      const CorrelationSide side = side_name == "receive"
                                       ? CorrelationSide::receive
                                       : CorrelationSide::transmit;
      const long long dim = side == CorrelationSide::receive ? m_r : m_t;
      CMat corr;
      if (r.has("correlation")) {
        const auto parsed = parse_cmat(r, "correlation");
        if (!parsed) return iid_rayleigh_channel(m_r, m_t);
        corr = *parsed;
      } else if (r.has("lowrank")) {
        const long long rank = r.integer("lowrank", 1, 1, dim);
        corr = make_lowrank_correlation(dim, rank);
      } else {
        const double c = r.number("coupling", 0.0, 0.0, 0.999);
        corr = constant_correlation(dim, c);
      }
      r.check_unknown();
      return correlated_rayleigh_channel(corr, side, m_r, m_t);
    }
    if (kind == "balanced_rank_k") {
      const long long k = r.integer("k", 1, 1, m_r);
      r.check_unknown();
      if (m_r != m_t) {
        r.fail("kind", "balanced_rank_k requires m_r == m_t");
        return iid_rayleigh_channel(m_r, m_t);
      }
      const CMat h = make_balanced_rank_k(m_r, k);
      // Deterministic channel: reuse the rank-one container via a synthetic
      // Gaussian with zero covariance around the fixed mean.
      return synthetic_gaussian_channel(
          vec(h), CMat::Zero(m_r * m_t, m_r * m_t), m_r, m_t);
    }
    if (kind == "ricean") {
      const bool has_mean = r.has("mean");
      const bool has_cov = r.has("cov");
      const auto mean = parse_cmat(r, "mean");
      const auto cov = parse_cmat(r, "cov");
      if (!has_mean) r.fail("mean", "required for ricean");
      if (!has_cov) r.fail("cov", "required for ricean");
      r.check_unknown();
      if (mean && cov) return ricean_channel(*mean, *cov);
      return iid_rayleigh_channel(m_r, m_t);
    }
    if (kind == "synthetic_gaussian") {
      const bool has_mean = r.has("mean_vec");
      const bool has_cov = r.has("cov");
      const auto mean = parse_cvec(r, "mean_vec");
      const auto cov = parse_cmat(r, "cov");
      if (!has_mean) r.fail("mean_vec", "required for synthetic_gaussian");
      if (!has_cov) r.fail("cov", "required for synthetic_gaussian");
      r.check_unknown();
      if (mean && cov) {
        return synthetic_gaussian_channel(*mean, *cov, m_r, m_t);
      }
      return iid_rayleigh_channel(m_r, m_t);
    }
    r.check_unknown();
    return iid_rayleigh_channel(m_r, m_t);
  } catch (const error& e) {
    r.fail("kind", std::string("cannot build channel: ") + e.what());
    return iid_rayleigh_channel(m_r, m_t);
  }
}

CustomParams parse_custom(ParamReader& r) {
  CustomParams p;

  const json channel_tbl = r.table("channel");
  ParamReader cr(channel_tbl, r.prefix() + "channel.", r.diags());
  p.channel = parse_channel(cr);

  const json plan_tbl = r.table("plan");
  ParamReader pr(plan_tbl, r.prefix() + "plan.", r.diags());
  const double t_r = pr.number("t_r", 1.0, 1e-12, 1e6);
  const double t_t = pr.number("t_t", static_cast<double>(p.channel.m_r + 1) *
                                          t_r,
                               1e-12, 1e9);
  pr.check_unknown();
  try {
    p.plan = regular_plan(p.channel.m_r, p.channel.m_t, t_r, t_t);
  } catch (const error& e) {
    pr.fail("t_t", std::string("cannot build plan: ") + e.what());
    p.plan = regular_plan(p.channel.m_r, p.channel.m_t, 1.0,
                          static_cast<double>(p.channel.m_r + 1));
  }

  const json noise_tbl = r.table("noise");
  ParamReader nr(noise_tbl, r.prefix() + "noise.", r.diags());
  p.noise.sigma_phi2 = parse_phase_variance(nr, 3.5);
  const std::string corr = nr.choice(
      "correlation",
      {"fully_uncorrelated", "fully_correlated", "exponential", "explicit"},
      "fully_uncorrelated");
  if (corr == "fully_correlated") {
    p.noise.correlation = PhaseCorrelation::fully_correlated;
  } else if (corr == "exponential") {
    p.noise.correlation = PhaseCorrelation::exponential;
    p.noise.tau_c = nr.number("tau_c", 1.0, 1e-12, 1e9);
  } else if (corr == "explicit") {
    p.noise.correlation = PhaseCorrelation::explicit_cov;
    const auto sigma = parse_rmat(nr, "explicit_sigma");
    if (sigma) {
      p.noise.explicit_sigma = *sigma;
      try {
        build_sigma_phi(p.plan, p.noise);
      } catch (const error& e) {
        nr.fail("explicit_sigma", e.what());
      }
    } else if (!nr.has("explicit_sigma")) {
      nr.fail("explicit_sigma", "required for explicit correlation");
    }
  }
  if (corr != "exponential") {
    nr.number("tau_c", 0.0, 0.0, 1e9);  // consume if present
  }
  p.noise.delta_omega = nr.number("delta_omega", 0.0, -1e12, 1e12);
  nr.check_unknown();

  p.snr = r.snr_grid("snr_db", p.snr);
  p.trials = r.integer("trials", p.trials, 100, 10000000);
  const std::string mode = r.choice("mode", {"exact", "linearized"}, "exact");
  p.mode = mode == "exact" ? ThetaMode::exact : ThetaMode::linearized;
  r.check_unknown();
  return p;
}

ExperimentResult run_custom(const ExperimentConfig& cfg) {
  ParamReader r(cfg.params, "params.", nullptr);
  const CustomParams p = parse_custom(r);

  Csv csv(cfg);
  csv.header({"snr_db", "mi_eff_mean", "mi_eff_se", "mi_phys_mean",
              "mi_phys_se", "mi_excess"});
  for (std::size_t si = 0; si < p.snr.size(); ++si) {
    const double rho = db_to_linear(p.snr[si]);
    const std::uint64_t base = static_cast<std::uint64_t>(si) << 32;
    const MIStats eff = mc_mi(p.channel, p.plan, p.noise, rho, p.trials,
                              cfg.seed, p.mode, cfg.threads, base);
    // Same stream block: the physical baseline sees the same channel draws,
    // so the excess column is a paired (low-noise) estimate.
    const MIStats phys = mc_mi_physical(p.channel, rho, p.trials, cfg.seed,
                                        cfg.threads, base);
    csv.row({fmt_g(p.snr[si]), fmt_g(eff.mean), fmt_g(eff.se_mean),
             fmt_g(phys.mean), fmt_g(phys.se_mean),
             fmt_g(eff.mean - phys.mean)});
  }
  return {{{"custom.csv", csv.take()}}};
}

// ---------------------------------------------------------------------------
// Shared parsing driver

void dispatch_parse(ExperimentId id, ParamReader& r) {
  switch (id) {
    case ExperimentId::fig2_capacity:
      parse_fig2(r);
      break;
    case ExperimentId::fig3_cdf:
      parse_fig3(r);
      break;
    case ExperimentId::fig4_bounds:
      parse_fig4(r);
      break;
    case ExperimentId::fig5_variance:
      parse_fig5(r);
      break;
    case ExperimentId::fig6_taylor:
      parse_fig6(r);
      break;
    case ExperimentId::fig7_laws:
      parse_fig7(r);
      break;
    case ExperimentId::fig14_moments:
      parse_fig14(r);
      break;
    case ExperimentId::calib_synth:
      parse_calib(r);
      break;
    case ExperimentId::seq_snr:
      parse_seq_snr(r);
      break;
    case ExperimentId::custom:
      parse_custom(r);
      break;
  }
}

ExperimentConfig parse_document(const json& doc, Diagnostics& diags) {
  ExperimentConfig cfg;
  if (!doc.is_object()) {
    diags.errors.push_back("config root must be a JSON object");
    return cfg;
  }
  static const std::set<std::string> kTopKeys = {"experiment", "seed",
                                                 "threads", "params"};
  for (auto it = doc.begin(); it != doc.end(); ++it) {
    if (kTopKeys.count(it.key()) == 0) {
      diags.errors.push_back("unknown top-level key '" + it.key() + "'");
    }
  }
  if (!doc.contains("experiment") || !doc["experiment"].is_string()) {
    diags.errors.push_back("'experiment' (string) is required");
    return cfg;
  }
  try {
    cfg.id = parse_experiment(doc["experiment"].get<std::string>());
  } catch (const error& e) {
    diags.errors.push_back(e.what());
    return cfg;
  }
  if (doc.contains("seed")) {
    if (!doc["seed"].is_number_integer() ||
        doc["seed"].get<long long>() < 0) {
      diags.errors.push_back("'seed' must be a nonnegative integer");
    } else {
      cfg.seed = doc["seed"].get<std::uint64_t>();
    }
  }
  if (doc.contains("threads")) {
    if (!doc["threads"].is_number_integer() ||
        doc["threads"].get<long long>() < 1 ||
        doc["threads"].get<long long>() > 256) {
      diags.errors.push_back("'threads' must be an integer in [1, 256]");
    } else {
      cfg.threads = static_cast<int>(doc["threads"].get<long long>());
    }
  }
  cfg.params = doc.contains("params") ? doc["params"] : json::object();
  if (!cfg.params.is_object()) {
    diags.errors.push_back("'params' must be a table/object");
    cfg.params = json::object();
  }
  ParamReader r(cfg.params, "params.", &diags);
  dispatch_parse(cfg.id, r);
  return cfg;
}

}  // namespace

// ---------------------------------------------------------------------------
// Public surface

std::string experiment_name(ExperimentId id) {
  for (const Entry& e : kRegistry) {
    if (e.id == id) return e.name;
  }
  throw validation_error("unknown experiment id");
}

ExperimentId parse_experiment(const std::string& name) {
  for (const Entry& e : kRegistry) {
    if (name == e.name) return e.id;
  }
  std::string names;
  for (const Entry& e : kRegistry) {
    if (!names.empty()) names += ", ";
    names += e.name;
  }
  throw validation_error("unknown experiment '" + name + "' (expected one of " +
                         names + ")");
}

std::vector<std::pair<std::string, std::string>> list_experiments() {
  std::vector<std::pair<std::string, std::string>> out;
  for (const Entry& e : kRegistry) {
    out.emplace_back(e.name, e.blurb);
  }
  return out;
}

Diagnostics validate_config(const nlohmann::json& doc) {
  Diagnostics diags;
  parse_document(doc, diags);
  return diags;
}

ExperimentConfig load_config(const nlohmann::json& doc) {
  Diagnostics diags;
  ExperimentConfig cfg = parse_document(doc, diags);
  if (!diags.ok()) {
    std::string joined;
    for (const auto& e : diags.errors) {
      if (!joined.empty()) joined += '\n';
      joined += e;
    }
    throw validation_error(joined);
  }
  return cfg;
}

ExperimentResult run_experiment(const ExperimentConfig& cfg) {
  switch (cfg.id) {
    case ExperimentId::fig2_capacity:
      return run_fig2(cfg);
    case ExperimentId::fig3_cdf:
      return run_fig3(cfg);
    case ExperimentId::fig4_bounds:
      return run_fig4(cfg);
    case ExperimentId::fig5_variance:
      return run_fig5(cfg);
    case ExperimentId::fig6_taylor:
      return run_fig6(cfg);
    case ExperimentId::fig7_laws:
      return run_fig7(cfg);
    case ExperimentId::fig14_moments:
      return run_fig14(cfg);
    case ExperimentId::calib_synth:
      return run_calib(cfg);
    case ExperimentId::seq_snr:
      return run_seq_snr(cfg);
    case ExperimentId::custom:
      return run_custom(cfg);
  }
  throw validation_error("unknown experiment id");
}

}  // namespace sounder
