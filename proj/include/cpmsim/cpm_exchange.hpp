#pragma once

#include <Eigen/Dense>
#include <iosfwd>
#include <span>
#include <vector>

#include "cpmsim/channel_model.hpp"
#include "cpmsim/rng.hpp"
#include "cpmsim/rssi_feedback.hpp"

namespace cpmsim {

// Time-sharing schedule of the exploration phase: transmitter j owns the K
// consecutive slots {j*K, ..., j*K + K - 1} (0-based), so the phase spans
// exactly K^2 slots and exactly one transmitter is active per slot.
struct ExplorationSchedule {
  int tx_count = 0;
  int slot_count = 0;  // K^2

  int active_tx(int slot) const { return slot / tx_count; }
  int block_start(int tx) const { return tx * tx_count; }
};

ExplorationSchedule build_schedule(int tx_count);

// Power-modulation map of one transmitter: coeffs is the K x K row-stochastic
// matrix of combination weights (row = slot within the block, column = gain
// index), and power_map(t, k) = p_max * coeffs(t, k) / g_max of link
// (k -> owner). The transmit power on block slot t is
// row t of power_map * (owner's local CSI vector).
struct ModulationMatrix {
  int owner = 0;
  Eigen::MatrixXd coeffs;
  Eigen::MatrixXd power_map;
  Eigen::PartialPivLU<Eigen::MatrixXd> solver;  // factorization of power_map

  // bounds_into_owner[k] = support of link (k -> owner). Throws if coeffs is
  // not row-stochastic, not square, or yields a power_map with condition
  // number above 1e8.
  static ModulationMatrix build(int owner, const Eigen::MatrixXd& coeffs,
                                std::span<const GainBounds> bounds_into_owner,
                                double p_max);

  static ModulationMatrix identity(int owner,
                                   std::span<const GainBounds> bounds_into_owner,
                                   double p_max);
};

// One transmitter's estimate of the full channel matrix. Column j of
// values (entries gain(k, j, s) over k) is the estimate of transmitter j's
// local CSI; column `owner` holds the owner's own local CSI verbatim.
struct CsiEstimate {
  int owner = 0;
  ChannelMatrix values;
};

struct ExchangeOptions {
  // Bypass quantization and feedback errors: observations carry the exact
  // RS power. Used to isolate the linear-inversion path.
  bool exact_feedback = false;
  // Per-transmitter combination matrices; empty means identity for all.
  std::vector<Eigen::MatrixXd> coeff_overrides;
  // When set, one JSON line per (band, slot) with the emitted power and the
  // per-receiver true/observed RS powers.
  std::ostream* trace = nullptr;
  int trace_trial = 0;
};

// Power emitted by mod.owner on the given slot of its block:
// dot(power_map row, local gains on the band). Always within [0, p_max]
// for row-stochastic coeffs and in-bounds CSI.
double exploration_power(const ModulationMatrix& mod, int slot_in_block,
                         const LocalCsi& local, int band, double p_max);

// Inverts the K-observation linear system of one block: solves
// power_map * x = (observed - sigma2), divides by the anchor gain (the
// observing link's own local estimate) and clamps each component into the
// bounds of link (k -> block owner). Throws on a nonpositive anchor.
std::vector<double> estimate_remote_csi(
    std::span<const FeedbackObservation> observations,
    const ModulationMatrix& mod, double anchor_gain, double sigma2,
    std::span<const GainBounds> bounds_into_owner);

// Full exploration phase over all bands: runs the schedule, collects one
// RSSI feedback per receiver per slot, and assembles every transmitter's
// global CSI estimate (own column copied from its local CSI).
std::vector<CsiEstimate> run_exchange(const ChannelMatrix& truth,
                                      const std::vector<LocalCsi>& local,
                                      const NetworkConfig& config, Rng& rng,
                                      const ExchangeOptions& options = {});

}  // namespace cpmsim
