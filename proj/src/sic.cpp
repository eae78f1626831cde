#include "gfra/sic.hpp"

#include <algorithm>
#include <cmath>

#include "gfra/rank_select.hpp"

namespace gfra {

namespace {
constexpr double kPilotFloor = 1e-9;

// Per-row channel energy of the pseudo-indexed estimates.
double col_energy(const MatrixXcd& H_act, int col) { return H_act.col(col).squaredNorm(); }

BitVec extract(const BitVec& row, const std::vector<int>& idx) {
  BitVec out(idx.size());
  for (size_t i = 0; i < idx.size(); ++i) out[i] = row[idx[i]];
  return out;
}

}  // namespace

std::vector<bool> phase_correct(MatrixXcd& H_act, MatrixXcd& X_act, cd x_p) {
  const int rows = static_cast<int>(X_act.rows());
  if (H_act.cols() != rows) throw InvalidConfig("phase_correct: dimension mismatch");
  std::vector<bool> ok(rows, true);
  for (int r = 0; r < rows; ++r) {
    const cd pilot = X_act(r, 0);
    if (std::abs(pilot) < kPilotFloor) {
      ok[r] = false;  // uncorrectable row, excluded from acceptance
      continue;
    }
    const cd sigma = x_p / pilot;
    X_act.row(r) *= sigma;
    X_act(r, 0) = x_p;  // exact by construction
    H_act.col(r) /= sigma;
  }
  return ok;
}

void resolve_sourced(const BitMat& b_rows, const MatrixXcd& H_act, const MatrixXcd& X_act,
                     const std::vector<bool>& valid, const SystemConfig& cfg, SicState& st) {
  const PacketLayout lay = packet_layout(cfg, DeviceMode::kSourced);
  const BitVec poly = cfg.effective_crc_poly();
  for (size_t r = 0; r < b_rows.size(); ++r) {
    if (!valid[r]) continue;
    const BitVec& row = b_rows[r];
    const BitVec id = extract(row, lay.idx_id);
    const BitVec crc = extract(row, lay.idx_crc);
    const int k_hat = bits_to_uint(id);
    if (k_hat < 1 || k_hat > cfg.K) continue;  // ID 0 reserved invalid
    if (!crc_check(id, crc, poly)) continue;
    const double e = col_energy(H_act, static_cast<int>(r));
    auto it = std::lower_bound(st.active_set.begin(), st.active_set.end(), k_hat);
    if (it != st.active_set.end() && *it == k_hat) {
      ++st.duplicate_conflicts;
      if (e <= st.energy[k_hat - 1]) continue;  // keep the stronger candidate
    } else {
      st.active_set.insert(it, k_hat);
      st.mode_flags.push_back(1);
    }
    st.energy[k_hat - 1] = e;
    st.H.col(k_hat - 1) = H_act.col(static_cast<int>(r));
    st.X.row(k_hat - 1) = X_act.row(static_cast<int>(r));
    st.B[k_hat - 1] = row;
  }
}

void accept_unsourced(const BitMat& b_rows, const MatrixXcd& H_act, const MatrixXcd& X_act,
                      const std::vector<bool>& valid, const SystemConfig& cfg, SicState& st) {
  const PacketLayout lay = packet_layout(cfg, DeviceMode::kUnsourced);
  const BitVec poly = cfg.effective_crc_poly();
  for (size_t r = 0; r < b_rows.size(); ++r) {
    if (!valid[r]) continue;
    const BitVec& row = b_rows[r];
    const BitVec payload = extract(row, lay.idx_data);
    const BitVec crc = extract(row, lay.idx_crc);
    if (!crc_check(payload, crc, poly)) continue;
    const double e = col_energy(H_act, static_cast<int>(r));
    // dedupe identical payloads, keep the stronger estimate for cancellation
    int dup = -1;
    for (size_t m = 0; m < st.messages.size(); ++m)
      if (st.messages[m] == payload) {
        dup = static_cast<int>(m);
        break;
      }
    if (dup >= 0) {
      ++st.duplicate_conflicts;
      if (e > st.H_ura.col(dup).squaredNorm()) {
        st.H_ura.col(dup) = H_act.col(static_cast<int>(r));
        st.X_ura.row(dup) = X_act.row(static_cast<int>(r));
        st.B_ura[dup] = row;
      }
      continue;
    }
    const int n = static_cast<int>(st.messages.size());
    st.messages.push_back(payload);
    st.mode_flags.push_back(0);
    st.H_ura.conservativeResize(H_act.rows(), n + 1);
    st.X_ura.conservativeResize(n + 1, X_act.cols());
    st.H_ura.col(n) = H_act.col(static_cast<int>(r));
    st.X_ura.row(n) = X_act.row(static_cast<int>(r));
    st.B_ura.push_back(row);
  }
}

namespace {

DetectionOutcome run_sic(const AngularObservation& obs, const SystemConfig& cfg, Rng& rng,
                         const std::optional<MatrixXcd>& known_reference) {
  const MatrixXcd& Y = obs.Y;
  const int L = obs.L;
  const VectorXcd constellation = psk_constellation(cfg.M);
  const cd xp = pilot_symbol();

  DetectionOutcome out;
  out.mode = cfg.mode;
  SicState st;
  st.H = MatrixXcd::Zero(cfg.N, cfg.K);
  st.X = MatrixXcd::Zero(cfg.K, L);
  st.B.assign(cfg.K, {});
  st.energy = VectorXd::Zero(cfg.K);
  st.H_ura = MatrixXcd::Zero(cfg.N, 0);
  st.X_ura = MatrixXcd::Zero(0, L);

  int ka_total = 0;
  try {
    const RankSelection sel =
        estimate_num_active(Y, std::min(cfg.K, std::min(cfg.N, L) - 1), cfg.rank_guard_ratio);
    ka_total = sel.k_hat;
    out.rank_estimate = sel.k_hat;
    out.rank_low_confidence = sel.low_confidence;
  } catch (const NumericalError&) {
    ka_total = 0;  // no signal
  }

  const double y_norm = Y.squaredNorm();
  const bool use_ri = known_reference.has_value() && cfg.mode == Mode::kSourced;

  for (int j = 1; j <= cfg.J; ++j) {
    MatrixXcd residual = Y - st.H * st.X;
    if (st.H_ura.cols() > 0) residual -= st.H_ura * st.X_ura;
    const int ka_j = ka_total - st.accepted();
    if (ka_j <= 0) break;
    const double res_energy = residual.squaredNorm();
    if (y_norm > 0.0 && res_energy / y_norm < cfg.eps_sic) break;

    int model_order = ka_j;
    if (cfg.sic_reestimate_rank) {
      try {
        const RankSelection rr = estimate_num_active(residual, ka_j, cfg.rank_guard_ratio);
        if (!rr.low_confidence) model_order = std::min(rr.k_hat, ka_j);
      } catch (const NumericalError&) {
        break;  // residual vanished
      }
    }

    BigAmpOptions bopt;
    bopt.max_iter = cfg.U;
    bopt.eps = cfg.eps_amp;
    bopt.damping = cfg.bigamp_damping;
    bopt.constellation = constellation;

    AmpState init;
    if (use_ri) {
      // restrict the reference rows to the devices not yet accepted
      std::vector<int> remaining;
      remaining.reserve(cfg.K);
      for (int k = 1; k <= cfg.K; ++k)
        if (!std::binary_search(st.active_set.begin(), st.active_set.end(), k))
          remaining.push_back(k);
      MatrixXcd xr_rem(remaining.size(), known_reference->cols());
      for (size_t i = 0; i < remaining.size(); ++i)
        xr_rem.row(i) = known_reference->row(remaining[i] - 1);
      init = ri_init(residual, cfg, xr_rem, model_order).state;
    } else {
      init = random_init(residual, model_order, constellation, rng);
    }

    BigAmpResult br = run_bigamp(residual, model_order, std::move(init), bopt);
    std::vector<bool> valid = phase_correct(br.H_act, br.X_act, xp);

    const int B = cfg.bits_per_packet();
    BitMat rows(model_order);
    for (int r = 0; r < model_order; ++r) {
      if (!valid[r]) continue;
      const VectorXcd data = br.X_act.row(r).segment(1, L - 1).transpose();
      rows[r] = demodulate(data, B, cfg.M);
    }

    if (cfg.mode == Mode::kSourced) {
      resolve_sourced(rows, br.H_act, br.X_act, valid, cfg, st);
    } else if (cfg.mode == Mode::kUnsourced) {
      accept_unsourced(rows, br.H_act, br.X_act, valid, cfg, st);
    } else {  // non-orthogonal coexistence: branch on the decoded mode bit
      std::vector<bool> as_sourced = valid, as_unsourced = valid;
      for (int r = 0; r < model_order; ++r) {
        if (!valid[r]) continue;
        const bool sourced_row = rows[r][0] == 1;
        as_sourced[r] = sourced_row;
        as_unsourced[r] = !sourced_row;
      }
      resolve_sourced(rows, br.H_act, br.X_act, as_sourced, cfg, st);
      accept_unsourced(rows, br.H_act, br.X_act, as_unsourced, cfg, st);
    }

    SicIterDiag diag;
    diag.residual_energy = res_energy;
    diag.accepted_count = st.accepted();
    diag.ka_remaining = ka_j;
    diag.model_order = model_order;
    diag.bigamp_iters = br.iters;
    diag.bigamp_converged = br.converged;
    out.per_iter.push_back(diag);
  }

  out.active_set = st.active_set;
  out.messages = st.messages;
  out.mode_flags = st.mode_flags;
  out.duplicate_conflicts = st.duplicate_conflicts;
  if (cfg.mode == Mode::kUnsourced) {
    // pseudo-indexed views in the primary fields
    out.H_est = st.H_ura;
    out.X_est = st.X_ura;
    out.bits_est = st.B_ura;
    out.active_set.resize(st.messages.size());
    for (size_t i = 0; i < st.messages.size(); ++i) out.active_set[i] = static_cast<int>(i + 1);
  } else {
    out.H_est = st.H;
    out.X_est = st.X;
    out.bits_est = st.B;
  }
  out.H_ura = st.H_ura;
  out.X_ura = st.X_ura;
  out.bits_ura = st.B_ura;
  return out;
}

}  // namespace

DetectionOutcome semi_blind_detect(const AngularObservation& obs, const SystemConfig& cfg,
                                   Rng& rng, const std::optional<MatrixXcd>& known_reference) {
  if (cfg.mode == Mode::kCoexistNonOrthogonal)
    return coexist_detect(obs, cfg, rng);
  if (cfg.mode == Mode::kCoexistOrthogonal)
    throw InvalidConfig("orthogonal coexistence runs as independent per-RB detections");
  return run_sic(obs, cfg, rng, known_reference);
}

DetectionOutcome coexist_detect(const AngularObservation& obs, const SystemConfig& cfg, Rng& rng) {
  if (cfg.mode != Mode::kCoexistNonOrthogonal)
    throw InvalidConfig("coexist_detect requires non-orthogonal coexistence mode");
  return run_sic(obs, cfg, rng, std::nullopt);
}

}  // namespace gfra
