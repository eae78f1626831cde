#include "gfra/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <map>

namespace gfra {

namespace {
int set_diff_count(const std::vector<int>& a, const std::vector<int>& b) {
  // |a \ b| for sorted unique vectors
  int cnt = 0;
  for (int x : a)
    if (!std::binary_search(b.begin(), b.end(), x)) ++cnt;
  return cnt;
}
}  // namespace

double aer(const std::vector<int>& truth, const std::vector<int>& detected, int K) {
  if (K < 1) throw InvalidConfig("aer: K must be >= 1");
  return static_cast<double>(set_diff_count(truth, detected) + set_diff_count(detected, truth)) /
         K;
}

double miss_rate(const std::vector<int>& truth, const std::vector<int>& detected) {
  if (truth.empty()) return 0.0;
  return static_cast<double>(set_diff_count(truth, detected)) / truth.size();
}

double false_alarm_rate(const std::vector<int>& truth, const std::vector<int>& detected, int K) {
  const int inactive = K - static_cast<int>(truth.size());
  if (inactive <= 0) return 0.0;
  return static_cast<double>(set_diff_count(detected, truth)) / inactive;
}

double ber(const BitMat& bits, const BitMat& bits_hat, const std::vector<int>& truth,
           const std::vector<int>& detected, const std::vector<int>& idx_data, int ka, int bd) {
  if (ka == 0) return 0.0;  // defined as zero for an empty frame
  std::int64_t errors = 0;
  for (int k : truth) {
    if (!std::binary_search(detected.begin(), detected.end(), k)) {
      errors += bd;  // whole payload lost with the miss
      continue;
    }
    const BitVec& t = bits[k - 1];
    const BitVec& e = bits_hat[k - 1];
    for (int i : idx_data) errors += (t[i] != e[i]) ? 1 : 0;
  }
  return static_cast<double>(errors) / (static_cast<double>(ka) * bd);
}

double pupe(const std::vector<BitVec>& sent, const std::vector<BitVec>& detected, int ka) {
  if (ka == 0) return 0.0;
  std::map<BitVec, int> avail;
  for (const auto& m : detected) ++avail[m];
  int missing = 0;
  for (const auto& m : sent) {
    auto it = avail.find(m);
    if (it != avail.end() && it->second > 0)
      --it->second;
    else
      ++missing;
  }
  return static_cast<double>(missing) / ka;
}

double payload_efficiency_semiblind(int bd, int total_bits, int m_order) {
  const int bps = static_cast<int>(std::log2(m_order));
  const int l = (total_bits + bps - 1) / bps + 1;
  return static_cast<double>(bd) / l;
}

double payload_efficiency_noncoherent(int bd, int q_blocks, int codeword_len) {
  return static_cast<double>(bd) / (static_cast<double>(q_blocks) * codeword_len);
}

std::int64_t c_amp(std::int64_t n, std::int64_t k, std::int64_t lp, std::int64_t ua) {
  if (n < 0 || k < 0 || lp < 0 || ua < 0) throw InvalidConfig("negative complexity parameter");
  return ua * (4 * n * k * lp + 3 * k * lp + 16 * n * lp + 20 * n * k);
}

std::int64_t c_ls(std::int64_t n, std::int64_t ka, std::int64_t ld) {
  if (n < 0 || ka < 0 || ld < 0) throw InvalidConfig("negative complexity parameter");
  return ka * ka * ka + n * ka * ka + n * ka * ld;
}

std::int64_t c_svd(std::int64_t n, std::int64_t l) {
  if (n < 0 || l < 0) throw InvalidConfig("negative complexity parameter");
  return 2 * n * l * l + l * l * l + l + n * l;
}

std::int64_t c_init(std::int64_t n, std::int64_t k, std::int64_t ka, std::int64_t l,
                    std::int64_t lr, std::int64_t ua) {
  return c_amp(n, k, lr, ua) + c_ls(n, ka, l - lr);
}

std::int64_t c_jcse(std::int64_t n, std::int64_t ka, std::int64_t l, std::int64_t u) {
  if (n < 0 || ka < 0 || l < 0 || u < 0) throw InvalidConfig("negative complexity parameter");
  return u * (n * ka + ka * l + n * l);
}

std::int64_t c_res(std::int64_t n, std::int64_t accepted, std::int64_t l) {
  if (n < 0 || accepted < 0 || l < 0) throw InvalidConfig("negative complexity parameter");
  return n * accepted * l;
}

std::int64_t c_sic(std::int64_t n, std::int64_t k, std::int64_t l, std::int64_t lr,
                   std::int64_t ua, std::int64_t u, const std::vector<int>& ka_j,
                   const std::vector<int>& accepted_prev, bool sourced) {
  if (ka_j.size() != accepted_prev.size()) throw InvalidConfig("c_sic: ragged iteration lists");
  std::int64_t total = 0;
  for (size_t j = 0; j < ka_j.size(); ++j) {
    total += c_svd(n, l);
    if (sourced) total += c_init(n, k, ka_j[j], l, lr, ua);
    total += c_jcse(n, ka_j[j], l, u);
    total += c_res(n, accepted_prev[j], l);
  }
  return total;
}

std::int64_t c_mc(std::int64_t n, std::int64_t k, std::int64_t l, std::int64_t lr,
                  std::int64_t ua, std::int64_t u, const std::vector<int>& ka_j,
                  const std::vector<int>& accepted_prev, bool sourced, int nsc,
                  std::int64_t li) {
  if (nsc < 1) throw InvalidConfig("c_mc: nsc must be >= 1");
  const std::int64_t lsc = (l - lr) / nsc;
  const std::int64_t l1 = lsc + lr;
  const std::int64_t l2 = lsc + lr - li;
  std::int64_t total = c_sic(n, k, l1, lr, ua, u, ka_j, accepted_prev, sourced);
  const std::int64_t ka_max = ka_j.empty() ? 0 : *std::max_element(ka_j.begin(), ka_j.end());
  total += static_cast<std::int64_t>(nsc - 1) * (c_svd(n, l2) + c_jcse(n, ka_max, l2, u));
  return total;
}

double latency_ncd_s(int q_blocks, int codeword_len, double scs_hz) {
  return static_cast<double>(q_blocks) * codeword_len / scs_hz;
}

double latency_sbd_s(int bits, int m_order, double scs_hz, int nsc) {
  const int bps = static_cast<int>(std::log2(m_order));
  const int syms = (bits + bps - 1) / bps + 1;
  return static_cast<double>(syms) / (scs_hz * nsc);
}

}  // namespace gfra
