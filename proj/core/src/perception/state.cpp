#include <prefnav/perception/state.hpp>

#include <prefnav/error.hpp>

namespace prefnav::perception {

Eigen::VectorXd assemble_state(const StateLayout& layout, const Eigen::VectorXd& latent, const geom::PolarRef& goal,
                               const HumanObservation& obs, const std::optional<PosePrediction>& pred) {
  if (latent.size() != layout.latent) throw Error("assemble_state: latent has the wrong size");
  const bool lstm = layout.variant == StateVariant::kLstm;
  if (lstm != pred.has_value())
    throw Error(lstm ? "assemble_state: S_LSTM state needs a pose prediction"
                     : "assemble_state: S_VAE state takes no pose prediction");
  const HumanObservation h = layout.mask_human ? HumanObservation::none() : obs;

  Eigen::VectorXd s(layout.size());
  Eigen::Index k = 0;
  s.head(layout.latent) = latent;
  k += layout.latent;
  if (layout.include_goal_distance) s[k++] = goal.distance;
  s[k++] = goal.bearing;
  s[k++] = h.k_H;
  s[k++] = h.d_H;
  s[k++] = h.dalpha_H;
  if (lstm) {
    s[k++] = layout.mask_human ? -1.0 : pred->d_H;
    s[k++] = layout.mask_human ? 0.0 : pred->dalpha_H;
  }
  return s;
}

}  // namespace prefnav::perception
