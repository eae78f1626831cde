#include "gfra/pilot_amp.hpp"

#include <Eigen/SVD>
#include <cmath>

namespace gfra {

namespace {
constexpr double kNoiseFloor = 1e-13;
constexpr double kExpClamp = 700.0;
}  // namespace

PilotAmpResult joint_add_ce(const MatrixXcd& Yp, const MatrixXcd& Xp, const PilotAmpOptions& opt) {
  const int n = static_cast<int>(Yp.rows());
  const int lp = static_cast<int>(Yp.cols());
  const int k = static_cast<int>(Xp.rows());
  if (lp < 1) throw InvalidConfig("joint_add_ce: empty pilot block");
  if (Xp.cols() != lp) throw InvalidConfig("joint_add_ce: pilot length mismatch");
  if (!Yp.allFinite()) throw InvalidConfig("joint_add_ce: non-finite observation");

  const ArrayXXd axp2 = Xp.cwiseAbs2().array();  // K x Lp
  const double ypow = Yp.squaredNorm() / std::max(1, n * lp);

  PilotAmpResult r;
  r.noise_var = opt.noise_var_init.value_or(ypow / 101.0);
  const double colpow = axp2.rowwise().mean().mean();  // ~1 for PSK pilots
  const double tau0 =
      std::max(kVarFloor, (ypow - r.noise_var) / std::max(1e-12, opt.gamma0 * k * colpow));
  r.prior = SpikeSlabPrior::uniform(n, k, opt.gamma0, tau0);

  MatrixXcd h = MatrixXcd::Zero(n, k);
  ArrayXXd vh = ArrayXXd::Constant(n, k, opt.gamma0 * tau0);
  MatrixXcd g = MatrixXcd::Zero(n, lp);
  ArrayXXd vg = ArrayXXd::Zero(n, lp);
  ArrayXXd pi = ArrayXXd::Constant(n, k, opt.gamma0);
  MatrixXcd d_mean = MatrixXcd::Zero(n, k);
  ArrayXXd d_var = ArrayXXd::Zero(n, k);
  ArrayXXd Lex = ArrayXXd::Zero(n, k);  // slab/spike log-likelihood ratios

  const double beta = opt.damping;
  MatrixXcd h_prev = h;
  VectorXd supp_prev = VectorXd::Zero(k);

  for (int u = 1; u <= opt.max_iter; ++u) {
    r.iters = u;
    // output node update
    const ArrayXXd vp = (vh.matrix() * axp2.matrix()).array().max(kVarFloor);  // N x Lp
    const MatrixXcd phat = h * Xp - g.cwiseProduct(vp.matrix());
    const double s2 = std::max(r.noise_var, kNoiseFloor);
    const ArrayXXd den_z = s2 + vp;
    const ArrayXXd vz = s2 * vp / den_z;
    const MatrixXcd zhat =
        ((Yp.array() * vp) + s2 * phat.array()).matrix().cwiseQuotient(den_z.matrix());
    const MatrixXcd g_raw = (zhat - phat).cwiseQuotient(vp.matrix());
    const ArrayXXd vg_raw = ((1.0 - vz / vp) / vp).max(0.0);
    g = beta * g_raw + (1.0 - beta) * g;
    vg = beta * vg_raw + (1.0 - beta) * vg;

    // input node update
    const ArrayXXd vq = 1.0 / (vg.matrix() * axp2.matrix().transpose()).array().max(kVarFloor);
    const MatrixXcd qhat = h + vq.matrix().cwiseProduct(g * Xp.adjoint());

    // spike-and-slab posterior
    const ArrayXXd tau = r.prior.tau.max(kVarFloor);
    const ArrayXXd vq_f = vq.max(kVarFloor);
    const ArrayXXd den_d = tau + vq_f;
    d_var = tau * vq_f / den_d;
    d_mean = ((r.prior.mu * vq_f) + tau * qhat.array()).matrix().cwiseQuotient(den_d.matrix());
    Lex = (vq_f / den_d).log() + qhat.cwiseAbs2().array() / vq_f -
          (qhat.array() - r.prior.mu).abs2() / den_d;
    Lex = Lex.min(kExpClamp).max(-kExpClamp);
    pi = r.prior.gamma / (r.prior.gamma + (1.0 - r.prior.gamma) * (-Lex).exp());
    const MatrixXcd h_raw = pi.matrix().cwiseProduct(d_mean);
    const ArrayXXd vh_raw =
        (pi * (d_mean.cwiseAbs2().array() + d_var) - h_raw.cwiseAbs2().array()).max(0.0);
    h = beta * h_raw + (1.0 - beta) * h;
    vh = (beta * vh_raw + (1.0 - beta) * vh).max(kVarFloor);

    if (!h.allFinite()) throw NumericalError("pilot AMP diverged at iteration " + std::to_string(u));

    // EM refresh. The slab parameters (mu, tau) are tied across the whole
    // matrix; with per-column slabs the many inactive columns overfit noise
    // peaks. The sparsity ratio is per device so that antenna-averaged
    // support saturates for genuinely active devices.
    const ArrayXXd res2 = (Yp - phat).cwiseAbs2().array();
    const double s2_new =
        ((res2 / (1.0 + vp / s2)) + s2 * vp / (s2 + vp)).sum() / static_cast<double>(n * lp);
    r.noise_var = std::max(s2_new, kNoiseFloor);
    {
      const double den = std::max(pi.sum(), kVarFloor);
      const cd mu_new = (pi * d_mean.array()).sum() / den;
      const ArrayXXd dev = (d_mean.array() - r.prior.mu).abs2() + d_var;
      const double tau_new = (pi * dev).sum() / den;
      r.prior.mu.setConstant(mu_new);
      r.prior.tau.setConstant(std::max(tau_new, kVarFloor));
      for (int c = 0; c < k; ++c)
        r.prior.gamma.col(c).setConstant(std::clamp(pi.col(c).mean(), 1e-6, 1.0 - 1e-6));
    }

    // support probabilities keep drifting after h has settled; both must be
    // stationary before stopping
    const double dh = (h - h_prev).squaredNorm() / std::max(h.squaredNorm(), 1e-300);
    const VectorXd supp_now = pi.colwise().mean().matrix().transpose();
    const double ds = (supp_now - supp_prev).squaredNorm() / std::max(supp_now.squaredNorm(), 1e-300);
    supp_prev = supp_now;
    h_prev = h;
    if (u >= 2 && dh <= opt.eps && ds <= opt.eps) {
      r.converged = true;
      break;
    }
  }

  r.H = h;
  r.h_var = vh;
  r.pi = pi;
  r.mean_pi = pi.colwise().mean().matrix().transpose();

  // Device activity posterior: aggregate per-antenna evidence ratios
  //   Lambda_{n,k} = (1-gamma) + gamma * exp(Lex_{n,k})
  // across antennas. The per-element support average has a ceiling at the
  // cluster fraction and cannot reach 0.5 for clustered channels; the LLR
  // sum saturates and makes theta_add a genuine posterior threshold.
  r.support = VectorXd::Zero(k);
  const ArrayXXd shift = Lex.max(0.0);
  const ArrayXXd log_lambda =
      shift + ((1.0 - r.prior.gamma) * (-shift).exp() + r.prior.gamma * (Lex - shift).exp()).log();
  for (int c = 0; c < k; ++c) {
    const double llr = std::clamp(log_lambda.col(c).sum(), -kExpClamp, kExpClamp);
    r.support[c] = 1.0 / (1.0 + std::exp(-llr));
    if (r.support[c] > opt.theta_add) r.active.push_back(c);
  }
  return r;
}

MatrixXcd ls_data_detect(const MatrixXcd& Yd, const MatrixXcd& H_act) {
  const int ka = static_cast<int>(H_act.cols());
  if (ka == 0) return MatrixXcd::Zero(0, Yd.cols());
  if (H_act.rows() != Yd.rows()) throw InvalidConfig("ls_data_detect: dimension mismatch");
  Eigen::BDCSVD<MatrixXcd> svd(H_act, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const VectorXd& sv = svd.singularValues();
  const double s1 = sv[0];
  if (!(s1 > 0.0)) return MatrixXcd::Zero(ka, Yd.cols());
  const double smin = sv[sv.size() - 1];
  VectorXd inv(sv.size());
  if (smin > 0.0 && s1 / smin <= 1e10) {
    inv = sv.cwiseInverse();
  } else {
    // ridge fallback for near-singular H
    const double lambda = 1e-10 * s1 * s1;
    inv = (sv.array() / (sv.array().square() + lambda)).matrix();
  }
  return svd.matrixV() * inv.asDiagonal() * svd.matrixU().adjoint() * Yd;
}

DetectionOutcome coherent_detect(const AngularObservation& obs, const SystemConfig& cfg) {
  if (cfg.mode != Mode::kSourced)
    throw InvalidConfig("coherent baseline is defined for sourced mode");
  const int lp = cfg.ref_known_len();
  if (obs.L <= lp) throw InvalidConfig("coherent_detect: frame shorter than reference block");
  const MatrixXcd xr = reference_matrix(cfg);

  PilotAmpOptions popt;
  popt.max_iter = cfg.pilot_amp_iters > 0 ? cfg.pilot_amp_iters : cfg.U;
  popt.damping = cfg.pilot_amp_damping;
  popt.theta_add = cfg.theta_add;
  popt.eps = cfg.eps_amp;
  popt.gamma0 = std::min(0.9, static_cast<double>(std::max(cfg.Ka, 1)) / cfg.K);
  // drop the common pilot column: constant across devices, useless for ADD
  PilotAmpResult pr = joint_add_ce(obs.Y.middleCols(1, lp - 1), xr.rightCols(lp - 1), popt);

  DetectionOutcome out;
  out.mode = cfg.mode;
  const int nbits = cfg.bits_per_packet();
  out.H_est = MatrixXcd::Zero(cfg.N, cfg.K);
  out.X_est = MatrixXcd::Zero(cfg.K, obs.L);
  out.bits_est.assign(cfg.K, {});

  if (pr.active.empty()) return out;

  MatrixXcd h_act(cfg.N, pr.active.size());
  for (size_t j = 0; j < pr.active.size(); ++j) h_act.col(j) = pr.H.col(pr.active[j]);
  const MatrixXcd xd = ls_data_detect(obs.Y.rightCols(obs.L - lp), h_act);

  const PacketLayout lay = packet_layout(cfg);
  const BitVec poly = cfg.effective_crc_poly();
  const int bps = cfg.bits_per_symbol();
  const int known_bits = (lp - 1) * bps;     // whole symbols holding RI bits
  const int leftover = cfg.bi() + cfg.Bc - known_bits;  // RI bits in the data block (0 for BPSK)

  for (size_t j = 0; j < pr.active.size(); ++j) {
    const int k = pr.active[j] + 1;  // 1-based device id
    const VectorXcd row = xd.row(j).transpose();
    const BitVec data_bits = demodulate(row, leftover + cfg.Bd, cfg.M);
    BitVec pkt = id_bits(k, cfg.bi());
    const BitVec crc = crc_encode(pkt, poly);
    pkt.insert(pkt.end(), crc.begin(), crc.end());
    pkt.insert(pkt.end(), data_bits.begin() + leftover, data_bits.end());
    if (static_cast<int>(pkt.size()) != nbits)
      throw NumericalError("coherent_detect: packet size bookkeeping error");
    out.active_set.push_back(k);
    out.bits_est[k - 1] = std::move(pkt);
    out.H_est.col(k - 1) = h_act.col(j);
    out.X_est.row(k - 1).head(lp) = xr.row(k - 1);
    out.X_est.row(k - 1).tail(obs.L - lp) = xd.row(j);
  }

  SicIterDiag diag;
  diag.residual_energy = obs.Y.squaredNorm();
  diag.accepted_count = static_cast<int>(out.active_set.size());
  diag.ka_remaining = 0;
  diag.bigamp_iters = pr.iters;
  diag.bigamp_converged = pr.converged;
  out.per_iter.push_back(diag);
  return out;
}

}  // namespace gfra
