#include "synapse/connectome.hpp"

#include <algorithm>

namespace synapse {

Edge ConnectomeGraph::key(BodyId pre, BodyId post) const {
  if (!directed_ && post < pre) std::swap(pre, post);
  return {pre, post};
}

void ConnectomeGraph::add(BodyId pre, BodyId post, std::int64_t weight) {
  if (pre == 0 || post == 0) throw InvalidArgument("graph edges cannot touch body 0");
  if (weight < 1) throw InvalidArgument("graph edge weight must be >= 1");
  edges_[key(pre, post)] += weight;
}

std::int64_t ConnectomeGraph::weight(BodyId pre, BodyId post) const {
  const auto it = edges_.find(key(pre, post));
  return it == edges_.end() ? 0 : it->second;
}

std::int64_t ConnectomeGraph::total_weight() const {
  std::int64_t total = 0;
  for (const auto& [e, w] : edges_) total += w;
  return total;
}

std::int64_t ConnectomeGraph::max_weight() const {
  std::int64_t best = 0;
  for (const auto& [e, w] : edges_) best = std::max(best, w);
  return best;
}

std::vector<Edge> union_edges(const ConnectomeGraph& a, const ConnectomeGraph& b) {
  std::vector<Edge> out;
  for (const auto& [e, w] : a.edges()) out.push_back(e);
  for (const auto& [e, w] : b.edges()) out.push_back(e);
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

BodyFilter BodyFilter::only(std::set<BodyId> bodies) {
  BodyFilter f;
  f.admissible_ = std::move(bodies);
  return f;
}

BodyFilter BodyFilter::from_ground_truth(const SynapseSet& gt, const LabelVolume& labels) {
  std::set<BodyId> bodies;
  for (const auto& s : gt.synapses) {
    if (!labels.contains(s.tbar.pos)) {
      throw InvalidArgument("ground-truth T-bar " + to_string(s.tbar.pos) + " lies outside the segmentation");
    }
    if (labels(s.tbar.pos) != 0) bodies.insert(labels(s.tbar.pos));
    for (const auto& p : s.partners)
      if (p.body != 0) bodies.insert(p.body);
  }
  return only(std::move(bodies));
}

ConnectomeGraph build_graph(const SynapseSet& synapses, const LabelVolume& labels, double psd_threshold,
                            BuildReport* report) {
  ConnectomeGraph g(true);
  for (std::size_t i = 0; i < synapses.synapses.size(); ++i) {
    const auto& s = synapses.synapses[i];
    if (!labels.contains(s.tbar.pos)) {
      throw InvalidArgument("T-bar " + to_string(s.tbar.pos) + " lies outside volume " + to_string(labels.dims()));
    }
    const BodyId pre = labels(s.tbar.pos);
    if (pre == 0) {
      if (report) report->skipped_tbars.push_back(i);
      continue;
    }
    for (const auto& p : s.partners) {
      if (p.confidence < psd_threshold || p.body == 0 || p.body == pre) continue;
      g.add(pre, p.body);
    }
  }
  return g;
}

ConnectomeGraph threshold_graph(const ConnectomeGraph& g, std::int64_t t) {
  if (t < 1) throw InvalidArgument("edge threshold t must be >= 1, got " + std::to_string(t));
  ConnectomeGraph out(g.directed());
  for (const auto& [e, w] : g.edges())
    if (w >= t) out.add(e.pre, e.post, 1);
  return out;
}

ConnectomeGraph filter_bodies(const ConnectomeGraph& g, const BodyFilter& f) {
  ConnectomeGraph out(g.directed());
  for (const auto& [e, w] : g.edges())
    if (f.admits(e.pre) && f.admits(e.post)) out.add(e.pre, e.post, w);
  return out;
}

ConnectomeGraph undirect_graph(const ConnectomeGraph& g) {
  ConnectomeGraph out(false);
  for (const auto& [e, w] : g.edges()) out.add(e.pre, e.post, w);
  return out;
}

SynapseSet collapse_ground_truth(const SynapseSet& gt, const LabelVolume& labels) {
  SynapseSet out = resolve_partner_bodies(gt, labels, nullptr, 0.0);
  for (auto& s : out.synapses) {
    if (!labels.contains(s.tbar.pos)) {
      throw InvalidArgument("ground-truth T-bar " + to_string(s.tbar.pos) + " lies outside the segmentation");
    }
    const BodyId own = labels(s.tbar.pos);
    std::vector<Partner> kept;
    for (const auto& p : s.partners) {
      if (p.body == own) continue;
      auto it = std::find_if(kept.begin(), kept.end(), [&](const Partner& k) { return k.body == p.body; });
      if (it == kept.end()) {
        kept.push_back(p);
      } else if (p.confidence > it->confidence) {
        *it = p;
      }
    }
    s.partners = std::move(kept);
  }
  return out;
}

}  // namespace synapse
