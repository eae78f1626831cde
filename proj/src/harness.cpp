#include "gfra/harness.hpp"

#include <atomic>
#include <iostream>
#include <cmath>
#include <mutex>
#include <sstream>
#include <thread>

#include "gfra/bigamp.hpp"
#include "gfra/channel.hpp"
#include "gfra/codebook.hpp"
#include "gfra/framing.hpp"
#include "gfra/metrics.hpp"
#include "gfra/pilot_amp.hpp"
#include "gfra/rng.hpp"
#include "gfra/sic.hpp"
#include "gfra/urllc.hpp"

namespace gfra {

Scheme scheme_from_string(const std::string& s) {
  if (s == "semi_blind") return Scheme::kSemiBlind;
  if (s == "coherent_baseline") return Scheme::kCoherentBaseline;
  if (s == "codebook_baseline") return Scheme::kCodebookBaseline;
  throw InvalidConfig("unknown scheme: " + s);
}

std::string scheme_to_string(Scheme s) {
  switch (s) {
    case Scheme::kSemiBlind: return "semi_blind";
    case Scheme::kCoherentBaseline: return "coherent_baseline";
    case Scheme::kCodebookBaseline: return "codebook_baseline";
  }
  return "?";
}

namespace {

std::vector<BitVec> payload_list(const SystemConfig& cfg, const BitMat& bits,
                                 const std::vector<int>& devices, DeviceMode dm) {
  const PacketLayout lay = packet_layout(cfg, dm);
  std::vector<BitVec> out;
  for (int k : devices) {
    const BitVec& row = bits[k - 1];
    if (row.empty()) continue;
    BitVec p(lay.idx_data.size());
    for (size_t i = 0; i < lay.idx_data.size(); ++i) p[i] = row[lay.idx_data[i]];
    out.push_back(std::move(p));
  }
  return out;
}

std::int64_t pilot_iters(const SystemConfig& cfg) {
  return cfg.pilot_amp_iters > 0 ? cfg.pilot_amp_iters : cfg.U;
}

std::int64_t semi_blind_complexity(const SystemConfig& cfg, const DetectionOutcome& out, int L) {
  std::vector<int> ka_j, acc_prev;
  int prev = 0;
  for (const auto& d : out.per_iter) {
    ka_j.push_back(d.ka_remaining);
    acc_prev.push_back(prev);
    prev = d.accepted_count;
  }
  const bool sourced = cfg.mode == Mode::kSourced;
  if (cfg.Nsc > 1) {
    const int li = (cfg.bi() + cfg.bits_per_symbol() - 1) / cfg.bits_per_symbol();
    return c_mc(cfg.N, cfg.K, L, cfg.ref_len(), pilot_iters(cfg), cfg.U, ka_j, acc_prev, sourced,
                cfg.Nsc, li);
  }
  return c_sic(cfg.N, cfg.K, L, cfg.ref_len(), pilot_iters(cfg), cfg.U, ka_j, acc_prev, sourced);
}

// metrics for a sourced (or coexistence-sourced) outcome
void score_sourced(const SystemConfig& cfg, const FrameSet& frames,
                   const std::vector<int>& truth, int denom_k, const DetectionOutcome& out,
                   TrialResult& tr) {
  tr.aer = aer(truth, out.active_set, denom_k);
  tr.miss = miss_rate(truth, out.active_set);
  tr.fa = false_alarm_rate(truth, out.active_set, denom_k);
  const PacketLayout lay = packet_layout(cfg, DeviceMode::kSourced);
  tr.ber = ber(frames.bits, out.bits_est, truth, out.active_set, lay.idx_data,
               static_cast<int>(truth.size()), static_cast<int>(lay.idx_data.size()));
}

TrialResult run_semi_blind(const SystemConfig& cfg, std::uint64_t seed) {
  Rng rng(seed);
  ChannelRealization ch = sample_activity(cfg, rng);
  gen_channel(cfg, ch, rng);
  FrameSet frames = build_frames(cfg, ch.active_set, rng);

  const int nb = cfg.Nb;
  std::vector<DetectionOutcome> bands;
  for (int b = 0; b < nb; ++b) {
    if (b > 0) gen_channel(cfg, ch, rng);  // independent sub-band channel
    AngularObservation obs = synthesize_observation(cfg, ch, frames.X, rng);
    std::optional<MatrixXcd> ref;
    if (cfg.mode == Mode::kSourced) ref = reference_matrix(cfg);
    bands.push_back(semi_blind_detect(obs, cfg, rng, ref));
  }
  DetectionOutcome out = nb == 1 ? std::move(bands.front()) : concurrent_combine(bands, cfg);

  TrialResult tr;
  for (const auto& b : bands)
    for (const auto& d : b.per_iter) tr.bigamp_all_converged &= d.bigamp_converged;

  if (cfg.mode == Mode::kSourced) {
    score_sourced(cfg, frames, ch.active_set, cfg.K, out, tr);
    tr.pupe = pupe(payload_list(cfg, frames.bits, ch.active_set, DeviceMode::kSourced),
                   payload_list(cfg, out.bits_est,
                                out.active_set, DeviceMode::kSourced),
                   cfg.Ka);
  } else if (cfg.mode == Mode::kUnsourced) {
    tr.aer = tr.miss = tr.fa = tr.ber = std::nan("");
    tr.pupe = pupe(payload_list(cfg, frames.bits, ch.active_set, DeviceMode::kUnsourced),
                   out.messages, static_cast<int>(ch.active_set.size()));
  } else {  // non-orthogonal coexistence: split metrics by mode flag
    std::vector<int> truth_s, truth_u;
    int k_sourced = 0;
    for (int k = 1; k <= cfg.K; ++k)
      if (frames.dev_mode[k - 1] == DeviceMode::kSourced) ++k_sourced;
    for (int k : ch.active_set)
      (frames.dev_mode[k - 1] == DeviceMode::kSourced ? truth_s : truth_u).push_back(k);
    score_sourced(cfg, frames, truth_s, std::max(1, k_sourced), out, tr);
    tr.pupe = pupe(payload_list(cfg, frames.bits, truth_u, DeviceMode::kUnsourced), out.messages,
                   std::max<int>(1, truth_u.size()));
  }

  std::int64_t cx = 0;
  for (const auto& b : bands) cx += semi_blind_complexity(cfg, b, frames.L);
  tr.complexity = cx;
  tr.latency_s = latency_sbd_s(cfg.bits_per_packet(), cfg.M, cfg.scs_hz, cfg.Nsc);
  tr.outcome = std::move(out);
  return tr;
}

TrialResult run_coexist_orthogonal(const SystemConfig& cfg, std::uint64_t seed) {
  // two orthogonal resource blocks, one per device group
  Rng rng(seed);
  ChannelRealization ch_all = sample_activity(cfg, rng);

  const int k_s = cfg.K / 2;
  const int k_u = cfg.K - k_s;
  std::vector<int> act_s, act_u;
  for (int k : ch_all.active_set) (k <= k_s ? act_s : act_u).push_back(k);

  auto sub_run = [&](Mode mode, int k_sub, const std::vector<int>& act, int offset,
                     TrialResult& tr, double& pupe_out) {
    SystemConfig sub = cfg;
    sub.mode = mode;
    sub.K = k_sub;
    sub.Ka = static_cast<int>(act.size());
    sub.validate();
    ChannelRealization ch;
    ch.activity.assign(k_sub, 0);
    for (int k : act) {
      ch.active_set.push_back(k - offset);
      ch.activity[k - offset - 1] = 1;
    }
    gen_channel(sub, ch, rng);
    FrameSet frames = build_frames(sub, ch.active_set, rng);
    AngularObservation obs = synthesize_observation(sub, ch, frames.X, rng);
    std::optional<MatrixXcd> ref;
    if (mode == Mode::kSourced) ref = reference_matrix(sub);
    DetectionOutcome out = semi_blind_detect(obs, sub, rng, ref);
    for (const auto& d : out.per_iter) tr.bigamp_all_converged &= d.bigamp_converged;
    tr.complexity += semi_blind_complexity(sub, out, frames.L);
    tr.latency_s = std::max(tr.latency_s,
                            latency_sbd_s(sub.bits_per_packet(), sub.M, sub.scs_hz, sub.Nsc));
    if (mode == Mode::kSourced) {
      score_sourced(sub, frames, ch.active_set, sub.K, out, tr);
    } else {
      pupe_out = pupe(payload_list(sub, frames.bits, ch.active_set, DeviceMode::kUnsourced),
                      out.messages, std::max<int>(1, act.size()));
    }
    return out;
  };

  TrialResult tr;
  double pupe_u = 0.0;
  DetectionOutcome out_s = sub_run(Mode::kSourced, k_s, act_s, 0, tr, pupe_u);
  DetectionOutcome out_u = sub_run(Mode::kUnsourced, k_u, act_u, k_s, tr, pupe_u);
  tr.pupe = pupe_u;
  tr.outcome = std::move(out_s);
  for (auto& m : out_u.messages) tr.outcome.messages.push_back(std::move(m));
  return tr;
}

TrialResult run_coherent(const SystemConfig& cfg, std::uint64_t seed) {
  if (cfg.mode != Mode::kSourced)
    throw InvalidConfig("coherent_baseline supports sourced mode only");
  Rng rng(seed);
  ChannelRealization ch = sample_activity(cfg, rng);
  gen_channel(cfg, ch, rng);
  FrameSet frames = build_frames(cfg, ch.active_set, rng);
  AngularObservation obs = synthesize_observation(cfg, ch, frames.X, rng);
  DetectionOutcome out = coherent_detect(obs, cfg);

  TrialResult tr;
  score_sourced(cfg, frames, ch.active_set, cfg.K, out, tr);
  tr.pupe = pupe(payload_list(cfg, frames.bits, ch.active_set, DeviceMode::kSourced),
                 payload_list(cfg, out.bits_est, out.active_set, DeviceMode::kSourced), cfg.Ka);
  const int lp = cfg.ref_known_len();
  tr.complexity = c_amp(cfg.N, cfg.K, lp, pilot_iters(cfg)) +
                  c_ls(cfg.N, static_cast<int>(out.active_set.size()), frames.L - lp);
  tr.latency_s = latency_sbd_s(cfg.bits_per_packet(), cfg.M, cfg.scs_hz, 1);
  tr.outcome = std::move(out);
  return tr;
}

TrialResult run_codebook(const SystemConfig& cfg, std::uint64_t seed, const CodebookParams& cb) {
  Rng rng(seed);
  ChannelRealization ch = sample_activity(cfg, rng);
  gen_channel(cfg, ch, rng);

  // the codebook is common knowledge; fixed seed independent of the trial
  Rng cb_rng(derive_seed(0xC0DEB00Cull, cb.bits, cb.len));
  const MatrixXcd C = build_codebook(cb.bits, cb.len, cb_rng);

  std::vector<BitVec> sent;
  MatrixXcd X = MatrixXcd::Zero(cfg.K, cb.len);
  for (int k : ch.active_set) {
    BitVec msg(cb.bits);
    for (auto& b : msg) b = rng.uniform() < 0.5 ? 0 : 1;
    X.row(k - 1) = C.row(bits_to_uint(msg));
    sent.push_back(std::move(msg));
  }
  AngularObservation obs = synthesize_observation(cfg, ch, X, rng);

  PilotAmpOptions popt;
  popt.max_iter = static_cast<int>(pilot_iters(cfg));
  popt.damping = cfg.pilot_amp_damping;
  popt.eps = cfg.eps_amp;
  const std::vector<int> det = codeword_detect(obs.Y, C, cfg.Ka, popt);

  std::vector<BitVec> det_msgs;
  for (int idx : det) {
    BitVec m(cb.bits);
    for (int i = 0; i < cb.bits; ++i) m[cb.bits - 1 - i] = (idx >> i) & 1;
    det_msgs.push_back(std::move(m));
  }

  TrialResult tr;
  tr.aer = tr.miss = tr.fa = tr.ber = std::nan("");
  tr.pupe = pupe(sent, det_msgs, static_cast<int>(sent.size()));
  tr.complexity = c_amp(cfg.N, std::int64_t(1) << cb.bits, cb.len, pilot_iters(cfg));
  tr.latency_s = latency_ncd_s(cb.q, cb.len, cfg.scs_hz);
  tr.outcome.mode = Mode::kUnsourced;
  tr.outcome.messages = std::move(det_msgs);
  return tr;
}

}  // namespace

TrialResult run_single(const SystemConfig& cfg, Scheme scheme, std::uint64_t seed,
                       const CodebookParams& cb) {
  cfg.validate();
  switch (scheme) {
    case Scheme::kSemiBlind:
      return cfg.mode == Mode::kCoexistOrthogonal ? run_coexist_orthogonal(cfg, seed)
                                                  : run_semi_blind(cfg, seed);
    case Scheme::kCoherentBaseline:
      return run_coherent(cfg, seed);
    case Scheme::kCodebookBaseline:
      return run_codebook(cfg, seed, cb);
  }
  throw InvalidConfig("unhandled scheme");
}

namespace {

void set_field(SystemConfig& cfg, const std::string& name, double v) {
  if (name == "K") cfg.K = static_cast<int>(v);
  else if (name == "Ka") cfg.Ka = static_cast<int>(v);
  else if (name == "N") cfg.N = static_cast<int>(v);
  else if (name == "Bd") cfg.Bd = static_cast<int>(v);
  else if (name == "Bc") cfg.Bc = static_cast<int>(v);
  else if (name == "M") cfg.M = static_cast<int>(v);
  else if (name == "J") cfg.J = static_cast<int>(v);
  else if (name == "U") cfg.U = static_cast<int>(v);
  else if (name == "Nsc") cfg.Nsc = static_cast<int>(v);
  else if (name == "Nb") cfg.Nb = static_cast<int>(v);
  else if (name == "snr_db") cfg.snr_db = v;
  else if (name == "pmax_dbm") cfg.pmax_dbm = v;
  else if (name == "scs_hz") cfg.scs_hz = v;
  else if (name == "angular_spread_deg") cfg.angular_spread_deg = v;
  else if (name == "eps_amp") cfg.eps_amp = v;
  else if (name == "eps_sic") cfg.eps_sic = v;
  else if (name == "theta_add") cfg.theta_add = v;
  else if (name == "atpc_enabled") cfg.atpc_enabled = v != 0.0;
  else if (name == "atpc_alpha") cfg.atpc_alpha = v;
  else throw InvalidConfig("unknown sweep/system field: " + name);
}

}  // namespace

SystemConfig apply_sweep(const SystemConfig& base, const std::vector<SweepSpec>& sweeps,
                         const std::vector<int>& point) {
  SystemConfig cfg = base;
  for (size_t i = 0; i < sweeps.size(); ++i) set_field(cfg, sweeps[i].field, sweeps[i].values[point[i]]);
  return cfg;
}

ExperimentConfig experiment_from_toml(const TomlDoc& doc) {
  ExperimentConfig exp;
  auto sys = doc.find("system");
  if (sys != doc.end()) {
    for (const auto& [key, val] : sys->second) {
      if (key == "mode") {
        exp.base.mode = mode_from_string(val.as_string());
      } else if (key == "crc_poly") {
        BitVec p;
        for (const auto& b : val.as_array()) p.push_back(static_cast<std::uint8_t>(b.as_int()));
        exp.base.crc_poly = p;
      } else if (key == "P_range") {
        const auto& a = val.as_array();
        if (a.size() != 2) throw InvalidConfig("P_range must be [lo, hi]");
        exp.base.P_min = static_cast<int>(a[0].as_int());
        exp.base.P_max_paths = static_cast<int>(a[1].as_int());
      } else if (key == "d_range_km") {
        const auto& a = val.as_array();
        if (a.size() != 2) throw InvalidConfig("d_range_km must be [lo, hi]");
        exp.base.d_min_km = a[0].as_double();
        exp.base.d_max_km = a[1].as_double();
      } else if (key == "pathloss_a") {
        exp.base.pathloss_a = val.as_double();
      } else if (key == "pathloss_b") {
        exp.base.pathloss_b = val.as_double();
      } else if (key == "noise_psd_dbm_hz") {
        exp.base.noise_psd_dbm_hz = val.as_double();
      } else if (key == "bandwidth_hz") {
        exp.base.bandwidth_hz = val.as_double();
      } else if (key == "seed") {
        exp.base.seed = static_cast<std::uint64_t>(val.as_int());
      } else if (key == "sic_reestimate_rank") {
        exp.base.sic_reestimate_rank = val.as_bool();
      } else if (key == "pilot_amp_iters") {
        exp.base.pilot_amp_iters = static_cast<int>(val.as_int());
      } else if (key == "bigamp_damping") {
        exp.base.bigamp_damping = val.as_double();
      } else if (key == "pilot_amp_damping") {
        exp.base.pilot_amp_damping = val.as_double();
      } else if (key == "rank_guard_ratio") {
        exp.base.rank_guard_ratio = val.as_double();
      } else {
        set_field(exp.base, key, val.as_double());
      }
    }
  }
  if (auto sweep = doc.find("sweep"); sweep != doc.end()) {
    for (const auto& [key, val] : sweep->second) {
      SweepSpec spec;
      spec.field = key;
      for (const auto& v : val.as_array()) spec.values.push_back(v.as_double());
      if (spec.values.empty()) throw InvalidConfig("empty sweep list for " + key);
      exp.sweeps.push_back(std::move(spec));
    }
  }
  if (auto run = doc.find("run"); run != doc.end()) {
    for (const auto& [key, val] : run->second) {
      if (key == "trials") exp.trials = static_cast<int>(val.as_int());
      else if (key == "seed") exp.master_seed = static_cast<std::uint64_t>(val.as_int());
      else if (key == "threads") exp.threads = static_cast<int>(val.as_int());
      else if (key == "trace") exp.trace = val.as_bool();
      else if (key == "out") exp.out_csv = val.as_string();
      else if (key == "json") exp.out_json = val.as_string();
      else if (key == "schemes") {
        exp.schemes.clear();
        for (const auto& s : val.as_array()) exp.schemes.push_back(scheme_from_string(s.as_string()));
      } else throw InvalidConfig("unknown [run] key: " + key);
    }
  }
  if (auto cb = doc.find("codebook"); cb != doc.end()) {
    for (const auto& [key, val] : cb->second) {
      if (key == "bits") exp.cb.bits = static_cast<int>(val.as_int());
      else if (key == "len") exp.cb.len = static_cast<int>(val.as_int());
      else if (key == "q") exp.cb.q = static_cast<int>(val.as_int());
      else throw InvalidConfig("unknown [codebook] key: " + key);
    }
  }
  if (exp.trials < 1) throw InvalidConfig("[run] trials must be >= 1");
  exp.base.validate();
  return exp;
}

ExperimentConfig load_experiment(const std::string& path) {
  return experiment_from_toml(parse_toml_file(path));
}

namespace {

double mean_of(const std::vector<double>& v) {
  if (v.empty()) return 0.0;
  double s = 0.0;
  int n = 0;
  for (double x : v)
    if (std::isfinite(x)) {
      s += x;
      ++n;
    }
  return n > 0 ? s / n : std::nan("");
}

double ci95_of(const std::vector<double>& v) {
  double m = mean_of(v);
  if (!std::isfinite(m)) return std::nan("");
  double ss = 0.0;
  int n = 0;
  for (double x : v)
    if (std::isfinite(x)) {
      ss += (x - m) * (x - m);
      ++n;
    }
  if (n < 2) return 0.0;
  return 1.96 * std::sqrt(ss / (n - 1)) / std::sqrt(static_cast<double>(n));
}

}  // namespace

ResultTable run_experiment(const ExperimentConfig& exp) {
  ResultTable table;
  for (const auto& s : exp.sweeps) table.sweep_fields.push_back(s.field);

  // enumerate the cartesian product of sweep lists
  std::vector<std::vector<int>> points;
  std::vector<int> cur(exp.sweeps.size(), 0);
  if (exp.sweeps.empty()) {
    points.push_back({});
  } else {
    while (true) {
      points.push_back(cur);
      int d = static_cast<int>(cur.size()) - 1;
      while (d >= 0) {
        if (++cur[d] < static_cast<int>(exp.sweeps[d].values.size())) break;
        cur[d] = 0;
        --d;
      }
      if (d < 0) break;
    }
  }

  const int nthreads = exp.threads > 0
                           ? exp.threads
                           : std::max(1u, std::thread::hardware_concurrency());

  for (size_t pi = 0; pi < points.size(); ++pi) {
    const SystemConfig cfg = apply_sweep(exp.base, exp.sweeps, points[pi]);
    cfg.validate();
    for (Scheme scheme : exp.schemes) {
      if (exp.trace)
        std::cerr << "# sweep point " << (pi + 1) << "/" << points.size() << " scheme "
                  << scheme_to_string(scheme) << " (" << exp.trials << " trials)\n";
      std::vector<TrialResult> results(exp.trials);
      std::atomic<int> next{0};
      std::atomic<bool> failed{false};
      std::string error_msg;
      std::mutex err_mu;
      auto worker = [&] {
        int i;
        while ((i = next.fetch_add(1)) < exp.trials && !failed.load()) {
          try {
            const std::uint64_t seed = derive_seed(exp.master_seed, pi, i);
            results[i] = run_single(cfg, scheme, seed, exp.cb);
          } catch (const std::exception& e) {
            std::lock_guard<std::mutex> lock(err_mu);
            error_msg = e.what();
            failed.store(true);
          }
        }
      };
      std::vector<std::thread> pool;
      for (int t = 0; t < nthreads; ++t) pool.emplace_back(worker);
      for (auto& t : pool) t.join();
      if (failed.load()) throw NumericalError("trial failed: " + error_msg);

      ResultRow row;
      row.scheme = scheme_to_string(scheme);
      for (size_t i = 0; i < exp.sweeps.size(); ++i)
        row.sweep[exp.sweeps[i].field] = exp.sweeps[i].values[points[pi][i]];
      const double nv = cfg.noise_var();
      row.snr_tx_db = 10.0 * std::log10(cfg.pmax_mw() / nv);
      row.snr_rx_db = 10.0 * std::log10(cfg.mean_rx_elem_power() / nv);

      std::vector<double> a, mi, fa, be, pu, cx, conv;
      for (const auto& r : results) {
        a.push_back(r.aer);
        mi.push_back(r.miss);
        fa.push_back(r.fa);
        be.push_back(r.ber);
        pu.push_back(r.pupe);
        cx.push_back(static_cast<double>(r.complexity));
        conv.push_back(r.bigamp_all_converged ? 1.0 : 0.0);
      }
      row.aer = mean_of(a);
      row.miss = mean_of(mi);
      row.fa = mean_of(fa);
      row.ber = mean_of(be);
      row.pupe = mean_of(pu);
      row.complexity = mean_of(cx);
      row.trials = exp.trials;
      row.latency_ms = results.empty() ? 0.0 : results.front().latency_s * 1e3;

      if (scheme == Scheme::kCodebookBaseline) {
        row.pe = payload_efficiency_noncoherent(cfg.Bd, exp.cb.q, exp.cb.len);
      } else {
        row.pe = payload_efficiency_semiblind(cfg.Bd, cfg.bits_per_packet(), cfg.M);
      }
      const bool unsourced_primary =
          cfg.mode == Mode::kUnsourced || scheme == Scheme::kCodebookBaseline;
      row.ci95 = unsourced_primary ? ci95_of(pu) : ci95_of(a);
      row.trial_aer = std::move(a);
      row.trial_ber = std::move(be);
      row.trial_pupe = std::move(pu);
      for (double c : conv) row.trial_bigamp_converged.push_back(c != 0.0 ? 1 : 0);
      table.rows.push_back(std::move(row));
    }
  }
  return table;
}

namespace {

std::string fmt(double v) {
  if (!std::isfinite(v)) return "";
  std::ostringstream os;
  os.precision(10);
  os << v;
  return os.str();
}

}  // namespace

std::string to_csv(const ResultTable& table) {
  std::ostringstream os;
  os << "scheme";
  for (const auto& f : table.sweep_fields) os << "," << f;
  os << ",snr_tx_db,snr_rx_db,aer,miss_rate,false_alarm_rate,ber,pupe,pe,complexity,"
        "latency_ms,trials,ci95\r\n";
  for (const auto& r : table.rows) {
    os << r.scheme;
    for (const auto& f : table.sweep_fields) os << "," << fmt(r.sweep.at(f));
    os << "," << fmt(r.snr_tx_db) << "," << fmt(r.snr_rx_db) << "," << fmt(r.aer) << ","
       << fmt(r.miss) << "," << fmt(r.fa) << "," << fmt(r.ber) << "," << fmt(r.pupe) << ","
       << fmt(r.pe) << "," << fmt(r.complexity) << "," << fmt(r.latency_ms) << "," << r.trials
       << "," << fmt(r.ci95) << "\r\n";
  }
  return os.str();
}

std::string to_json(const ResultTable& table) {
  std::ostringstream os;
  os << "[";
  for (size_t i = 0; i < table.rows.size(); ++i) {
    const auto& r = table.rows[i];
    if (i) os << ",";
    os << "{\"scheme\":\"" << r.scheme << "\"";
    for (const auto& [k, v] : r.sweep) os << ",\"" << k << "\":" << v;
    auto num = [&](const char* k, double v) {
      os << ",\"" << k << "\":";
      if (std::isfinite(v))
        os << v;
      else
        os << "null";
    };
    num("snr_tx_db", r.snr_tx_db);
    num("snr_rx_db", r.snr_rx_db);
    num("aer", r.aer);
    num("miss_rate", r.miss);
    num("false_alarm_rate", r.fa);
    num("ber", r.ber);
    num("pupe", r.pupe);
    num("pe", r.pe);
    num("complexity", r.complexity);
    num("latency_ms", r.latency_ms);
    os << ",\"trials\":" << r.trials;
    num("ci95", r.ci95);
    os << "}";
  }
  os << "]";
  return os.str();
}

}  // namespace gfra
