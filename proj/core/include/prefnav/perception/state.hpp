#pragma once
/**
 * @file  state.hpp
 * @brief Policy state vectors.
 *
 * Fixed order: [l (L), d_G, dalpha_G, k_H, d_H, dalpha_H, pred d_H, pred dalpha_H].
 * d_G is dropped when the goal distance is disabled; the two predicted
 * entries exist only for the S_LSTM layout.
 */

#include <prefnav/geom/pose.hpp>
#include <prefnav/perception/human.hpp>

#include <Eigen/Core>

#include <optional>
#include <utility>

namespace prefnav::perception {

enum class StateVariant { kVae, kLstm };

struct StateLayout {
  StateVariant variant = StateVariant::kVae;
  int latent = 8;
  bool include_goal_distance = true;
  /// Forces the human fields to the sentinel (detection disabled).
  bool mask_human = false;

  [[nodiscard]] int size() const noexcept {
    return latent + (include_goal_distance ? 2 : 1) + 3 + (variant == StateVariant::kLstm ? 2 : 0);
  }
  /// Index of k_H inside the vector.
  [[nodiscard]] int human_offset() const noexcept { return latent + (include_goal_distance ? 2 : 1); }
};

struct PosePrediction {
  double d_H = -1.0;
  double dalpha_H = 0.0;
};

/// Throws Error when the latent size or the presence of `pred` disagrees
/// with the layout.
[[nodiscard]] Eigen::VectorXd assemble_state(const StateLayout& layout, const Eigen::VectorXd& latent,
                                             const geom::PolarRef& goal, const HumanObservation& obs,
                                             const std::optional<PosePrediction>& pred = std::nullopt);

}  // namespace prefnav::perception
