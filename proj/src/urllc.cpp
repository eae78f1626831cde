#include "gfra/urllc.hpp"

#include <algorithm>
#include <cmath>
#include <map>

namespace gfra {

std::vector<SubBlock> split_multicarrier(int device_k, std::span<const std::uint8_t> payload,
                                         const SystemConfig& cfg) {
  const int nsc = cfg.Nsc;
  const int bd = static_cast<int>(payload.size());
  if (nsc < 1) throw InvalidConfig("Nsc must be >= 1");
  if (nsc > bd) throw InvalidConfig("more subcarriers than payload bits");
  const BitVec poly = cfg.effective_crc_poly();
  const int chunk = (bd + nsc - 1) / nsc;

  std::vector<SubBlock> blocks(nsc);
  for (int s = 0; s < nsc; ++s) {
    const int lo = s * chunk;
    const int hi = std::min(bd, lo + chunk);
    BitVec sub(payload.begin() + lo, payload.begin() + std::max(lo, hi));
    blocks[s].payload_len = static_cast<int>(sub.size());
    sub.resize(chunk, 0);  // zero-pad the last block
    if (s == 0) {
      blocks[s].carries_id = true;
      BitVec id = id_bits(device_k, cfg.bi());
      BitVec crc = crc_encode(id, poly);
      BitVec bits(id);
      bits.insert(bits.end(), crc.begin(), crc.end());
      bits.insert(bits.end(), sub.begin(), sub.end());
      blocks[s].bits = std::move(bits);
    } else {
      BitVec crc = crc_encode(sub, poly);
      BitVec bits(crc);
      bits.insert(bits.end(), sub.begin(), sub.end());
      blocks[s].bits = std::move(bits);
    }
  }
  return blocks;
}

BitVec reassemble_multicarrier(const std::vector<SubBlock>& blocks, const SystemConfig& cfg) {
  BitVec payload;
  for (const auto& b : blocks) {
    const int off = b.carries_id ? cfg.bi() + cfg.Bc : cfg.Bc;
    payload.insert(payload.end(), b.bits.begin() + off, b.bits.begin() + off + b.payload_len);
  }
  return payload;
}

std::vector<int> energy_support(const VectorXcd& col, double fraction) {
  const double total = col.squaredNorm();
  if (total <= 0.0) return {};
  std::vector<int> idx(col.size());
  for (int i = 0; i < col.size(); ++i) idx[i] = i;
  std::sort(idx.begin(), idx.end(),
            [&](int a, int b) { return std::norm(col[a]) > std::norm(col[b]); });
  double acc = 0.0;
  std::vector<int> out;
  for (int i : idx) {
    out.push_back(i);
    acc += std::norm(col[i]);
    if (acc >= fraction * total) break;
  }
  std::sort(out.begin(), out.end());
  return out;
}

namespace {

double jaccard(const std::vector<int>& a, const std::vector<int>& b) {
  if (a.empty() && b.empty()) return 0.0;
  size_t i = 0, j = 0, inter = 0;
  while (i < a.size() && j < b.size()) {
    if (a[i] == b[j]) {
      ++inter;
      ++i;
      ++j;
    } else if (a[i] < b[j]) {
      ++i;
    } else {
      ++j;
    }
  }
  const size_t uni = a.size() + b.size() - inter;
  return uni == 0 ? 0.0 : static_cast<double>(inter) / uni;
}

// greedy maximum-similarity bipartite matching; returns perm[j] = anchor row
std::vector<int> greedy_match(const MatrixXd& sim, bool& low_confidence) {
  const int n = static_cast<int>(sim.rows());
  std::vector<int> perm(n, -1);
  std::vector<bool> row_used(n, false), col_used(n, false);
  for (int step = 0; step < n; ++step) {
    int bi = -1, bj = -1;
    double best = -1.0;
    double second = -1.0;
    for (int i = 0; i < n; ++i) {
      if (row_used[i]) continue;
      for (int j = 0; j < n; ++j) {
        if (col_used[j]) continue;
        if (sim(i, j) > best) {
          second = best;
          best = sim(i, j);
          bi = i;
          bj = j;
        } else if (sim(i, j) > second) {
          second = sim(i, j);
        }
      }
    }
    if (best - second < 0.1 && second >= 0.0) low_confidence = true;
    row_used[bi] = true;
    col_used[bj] = true;
    perm[bj] = bi;
  }
  return perm;
}

ArrayXd feature(const VectorXcd& col) {
  ArrayXd f = col.cwiseAbs2().array();
  const double s = f.sum();
  if (s > 0.0) f /= s;
  return f;
}

}  // namespace

AlignResult align_subcarriers(const std::vector<MatrixXcd>& h_per_subcarrier,
                              AlignMethod method) {
  if (h_per_subcarrier.size() < 2)
    throw InvalidConfig("align_subcarriers needs at least two subcarriers");
  const int ka = static_cast<int>(h_per_subcarrier[0].cols());
  AlignResult out;
  out.perm.resize(h_per_subcarrier.size());
  out.perm[0].resize(ka);
  for (int i = 0; i < ka; ++i) out.perm[0][i] = i;

  if (method == AlignMethod::kGreedy) {
    std::vector<std::vector<int>> anchor_supp(ka);
    for (int i = 0; i < ka; ++i) anchor_supp[i] = energy_support(h_per_subcarrier[0].col(i));
    for (size_t s = 1; s < h_per_subcarrier.size(); ++s) {
      if (h_per_subcarrier[s].cols() != ka)
        throw InvalidConfig("align_subcarriers: inconsistent column counts");
      MatrixXd sim(ka, ka);
      for (int j = 0; j < ka; ++j) {
        const std::vector<int> supp = energy_support(h_per_subcarrier[s].col(j));
        for (int i = 0; i < ka; ++i) sim(i, j) = jaccard(anchor_supp[i], supp);
      }
      out.perm[s] = greedy_match(sim, out.low_confidence);
    }
    return out;
  }

  // k-means over normalized energy vectors, centroids seeded by the anchor
  const int n = static_cast<int>(h_per_subcarrier[0].rows());
  std::vector<ArrayXd> centroids(ka);
  for (int i = 0; i < ka; ++i) centroids[i] = feature(h_per_subcarrier[0].col(i));
  std::vector<std::vector<ArrayXd>> feats(h_per_subcarrier.size());
  for (size_t s = 0; s < h_per_subcarrier.size(); ++s)
    for (int j = 0; j < ka; ++j) feats[s].push_back(feature(h_per_subcarrier[s].col(j)));
  for (int it = 0; it < 10; ++it) {
    std::vector<ArrayXd> sums(ka, ArrayXd::Zero(n));
    std::vector<int> counts(ka, 0);
    for (const auto& fs : feats)
      for (const auto& f : fs) {
        int best = 0;
        double bd = (f - centroids[0]).square().sum();
        for (int c = 1; c < ka; ++c) {
          const double d = (f - centroids[c]).square().sum();
          if (d < bd) {
            bd = d;
            best = c;
          }
        }
        sums[best] += f;
        ++counts[best];
      }
    for (int c = 0; c < ka; ++c)
      if (counts[c] > 0) centroids[c] = sums[c] / counts[c];
  }
  // greedy bijection of each subcarrier's columns onto the centroids; the
  // anchor's own bijection identifies which centroid is which device
  bool lc = false;
  auto assign = [&](const std::vector<ArrayXd>& fs) {
    MatrixXd sim(ka, ka);
    for (int c = 0; c < ka; ++c)
      for (int j = 0; j < ka; ++j) sim(c, j) = -(fs[j] - centroids[c]).square().sum();
    return greedy_match(sim, lc);
  };
  const std::vector<int> anchor_cluster_of_col = [&] {
    std::vector<int> inv(ka);
    const std::vector<int> a = assign(feats[0]);  // a[j] = cluster of anchor col j
    for (int j = 0; j < ka; ++j) inv[j] = a[j];
    return inv;
  }();
  std::vector<int> col_of_cluster(ka, -1);
  for (int j = 0; j < ka; ++j) col_of_cluster[anchor_cluster_of_col[j]] = j;
  for (size_t s = 1; s < h_per_subcarrier.size(); ++s) {
    const std::vector<int> a = assign(feats[s]);  // a[j] = cluster of col j
    out.perm[s].resize(ka);
    for (int j = 0; j < ka; ++j) out.perm[s][j] = col_of_cluster[a[j]];
  }
  out.low_confidence = lc;
  return out;
}

DetectionOutcome concurrent_combine(const std::vector<DetectionOutcome>& outcomes,
                                    const SystemConfig& cfg) {
  if (outcomes.empty()) throw InvalidConfig("concurrent_combine: no sub-band outcomes");
  if (outcomes.size() == 1) return outcomes.front();

  DetectionOutcome merged;
  merged.mode = outcomes.front().mode;

  // sourced part: union over device ids, payload conflicts by majority vote
  const PacketLayout lay = packet_layout(cfg, DeviceMode::kSourced);
  std::map<int, std::vector<const DetectionOutcome*>> hits;
  for (const auto& o : outcomes)
    for (int k : o.active_set)
      if (!o.bits_est.empty() && !o.bits_est[k - 1].empty()) hits[k].push_back(&o);

  const int n = static_cast<int>(outcomes.front().H_est.rows());
  const int l = static_cast<int>(outcomes.front().X_est.cols());
  merged.H_est = MatrixXcd::Zero(n, cfg.K);
  merged.X_est = MatrixXcd::Zero(cfg.K, l);
  merged.bits_est.assign(cfg.K, {});

  for (const auto& [k, lst] : hits) {
    // vote over the full payload row
    std::map<BitVec, int> votes;
    std::map<BitVec, double> energy;
    std::map<BitVec, const DetectionOutcome*> owner;
    for (const auto* o : lst) {
      const BitVec& row = o->bits_est[k - 1];
      ++votes[row];
      const double e = o->H_est.col(k - 1).squaredNorm();
      if (e > energy[row]) {
        energy[row] = e;
        owner[row] = o;
      }
    }
    const BitVec* best = nullptr;
    int best_votes = -1;
    double best_energy = -1.0;
    for (const auto& [row, v] : votes) {
      if (v > best_votes || (v == best_votes && energy[row] > best_energy)) {
        best_votes = v;
        best_energy = energy[row];
        best = &row;
      }
    }
    merged.active_set.push_back(k);
    merged.bits_est[k - 1] = *best;
    merged.H_est.col(k - 1) = owner[*best]->H_est.col(k - 1);
    merged.X_est.row(k - 1) = owner[*best]->X_est.row(k - 1);
  }
  std::sort(merged.active_set.begin(), merged.active_set.end());

  // unsourced part: set union of payload lists
  std::map<BitVec, bool> seen;
  for (const auto& o : outcomes)
    for (const auto& m : o.messages)
      if (!seen[m]) {
        seen[m] = true;
        merged.messages.push_back(m);
      }
  return merged;
}

}  // namespace gfra
