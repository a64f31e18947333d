#include "synapse/synapse_set.hpp"

namespace synapse {

std::vector<TbarPrediction> SynapseSet::tbars() const {
  std::vector<TbarPrediction> out;
  out.reserve(synapses.size());
  for (const auto& s : synapses) out.push_back(s.tbar);
  return out;
}

std::vector<Point3> SynapseSet::tbar_positions() const {
  std::vector<Point3> out;
  out.reserve(synapses.size());
  for (const auto& s : synapses) out.push_back(s.tbar.pos);
  return out;
}

SynapseSet resolve_partner_bodies(const SynapseSet& gt, const LabelVolume& labels, const GrayVolume* gray,
                                  double shift_radius) {
  if (shift_radius > 0.0 && gray == nullptr) throw InvalidArgument("shifting PSD positions needs a gray volume");
  SynapseSet out = gt;
  for (auto& s : out.synapses) {
    for (auto& p : s.partners) {
      if (p.body != 0 || !p.pos) continue;
      if (!labels.contains(*p.pos)) {
        throw InvalidArgument("PSD position " + to_string(*p.pos) + " lies outside volume " + to_string(labels.dims()));
      }
      const Point3 at = shift_radius > 0.0 ? brightest_in_ball(*gray, *p.pos, shift_radius) : *p.pos;
      p.body = labels(at);
    }
  }
  return out;
}

}  // namespace synapse
