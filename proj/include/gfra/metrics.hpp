#pragma once

#include <cstdint>
#include <vector>

#include "gfra/types.hpp"

namespace gfra {

// Activity error rate: (|A \ Ahat| + |Ahat \ A|) / K. Sets of device ids.
double aer(const std::vector<int>& truth, const std::vector<int>& detected, int K);

// Disaggregated counterparts (Fig.-style miss/false-alarm probabilities).
double miss_rate(const std::vector<int>& truth, const std::vector<int>& detected);
double false_alarm_rate(const std::vector<int>& truth, const std::vector<int>& detected, int K);

// Bit error rate over the payload field, counting the payload of every
// missed device as fully lost: (errors over A n Ahat + Bd |A \ Ahat|)/(Ka Bd).
// Rows of bits/bits_hat are device-indexed packet rows.
double ber(const BitMat& bits, const BitMat& bits_hat, const std::vector<int>& truth,
           const std::vector<int>& detected, const std::vector<int>& idx_data, int ka, int bd);

// Per-user probability of error: fraction of transmitted messages missing
// from the detected list (multiset semantics for duplicates).
double pupe(const std::vector<BitVec>& sent, const std::vector<BitVec>& detected, int ka);

// Payload efficiencies.
double payload_efficiency_semiblind(int bd, int total_bits, int m_order);
double payload_efficiency_noncoherent(int bd, int q_blocks, int codeword_len);

// ---- analytic complexity (complex multiplications) ----

std::int64_t c_amp(std::int64_t n, std::int64_t k, std::int64_t lp, std::int64_t ua);
std::int64_t c_ls(std::int64_t n, std::int64_t ka, std::int64_t ld);
std::int64_t c_svd(std::int64_t n, std::int64_t l);
std::int64_t c_init(std::int64_t n, std::int64_t k, std::int64_t ka, std::int64_t l,
                    std::int64_t lr, std::int64_t ua);
std::int64_t c_jcse(std::int64_t n, std::int64_t ka, std::int64_t l, std::int64_t u);
std::int64_t c_res(std::int64_t n, std::int64_t accepted, std::int64_t l);

// SIC total: per-iteration sums of rank selection, initialization (sourced
// only), JCSE, and residual computation. ka_j and accepted_prev hold the
// per-iteration values; vectors must have equal length.
std::int64_t c_sic(std::int64_t n, std::int64_t k, std::int64_t l, std::int64_t lr,
                   std::int64_t ua, std::int64_t u, const std::vector<int>& ka_j,
                   const std::vector<int>& accepted_prev, bool sourced);

// Multi-carrier deployment on top of c_sic.
std::int64_t c_mc(std::int64_t n, std::int64_t k, std::int64_t l, std::int64_t lr,
                  std::int64_t ua, std::int64_t u, const std::vector<int>& ka_j,
                  const std::vector<int>& accepted_prev, bool sourced, int nsc,
                  std::int64_t li);

// ---- transmission latency in seconds ----

double latency_ncd_s(int q_blocks, int codeword_len, double scs_hz);
// bits = Bd + Bc (+ Bi for the sourced variant)
double latency_sbd_s(int bits, int m_order, double scs_hz, int nsc);

}  // namespace gfra
