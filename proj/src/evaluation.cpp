#include "cascade/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <stdexcept>

#include "cascade/errors.hpp"

namespace cascade {

namespace {

std::vector<Arc> sorted_unique(std::span<const Arc> arcs) {
  std::vector<Arc> out(arcs.begin(), arcs.end());
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

double entropy(const std::map<std::size_t, std::size_t>& counts, double n) {
  double h = 0.0;
  for (auto [label, c] : counts) {
    double p = static_cast<double>(c) / n;
    h -= p * std::log(p);
  }
  return h;
}

}  // namespace

double ConfusionCounts::accuracy() const {
  if (total() == 0) throw std::invalid_argument("accuracy: empty universe");
  return static_cast<double>(tp + tn) / static_cast<double>(total());
}

ConfusionCounts arc_accuracy(std::span<const Arc> truth, std::span<const Arc> learned,
                             std::span<const Arc> universe) {
  auto u = sorted_unique(universe);
  if (u.empty()) throw std::invalid_argument("arc_accuracy: empty universe");
  auto t = sorted_unique(truth);
  auto l = sorted_unique(learned);
  auto inside = [&](const std::vector<Arc>& arcs, const char* what) {
    if (!std::includes(u.begin(), u.end(), arcs.begin(), arcs.end())) {
      throw std::invalid_argument(std::string("arc_accuracy: ") + what + " arc outside the universe");
    }
  };
  inside(t, "truth");
  inside(l, "learned");
  ConfusionCounts c;
  for (const Arc& a : u) {
    bool is_true = std::binary_search(t.begin(), t.end(), a);
    bool is_learned = std::binary_search(l.begin(), l.end(), a);
    if (is_true && is_learned) {
      ++c.tp;
    } else if (is_true) {
      ++c.fn;
    } else if (is_learned) {
      ++c.fp;
    } else {
      ++c.tn;
    }
  }
  return c;
}

std::vector<Arc> group_pair_universe(const std::vector<std::vector<NodeIndex>>& groups) {
  std::vector<Arc> out;
  for (const auto& g : groups) {
    for (NodeIndex u : g) {
      for (NodeIndex v : g) {
        if (u != v) out.push_back({u, v});
      }
    }
  }
  return sorted_unique(out);
}

std::vector<Arc> group_social_universe(const std::vector<std::vector<NodeIndex>>& groups,
                                       const Digraph& social) {
  std::vector<Arc> out;
  for (const auto& g : groups) {
    std::vector<NodeIndex> sorted(g.begin(), g.end());
    std::sort(sorted.begin(), sorted.end());
    for (NodeIndex u : sorted) {
      for (NodeIndex v : social.out(u)) {
        if (std::binary_search(sorted.begin(), sorted.end(), v)) out.push_back({u, v});
      }
    }
  }
  return sorted_unique(out);
}

std::string to_string(Universe universe) {
  return universe == Universe::kGroupPairs ? "group-pairs" : "group-social";
}

Universe parse_universe(const std::string& name) {
  if (name == "group-pairs") return Universe::kGroupPairs;
  if (name == "group-social") return Universe::kGroupSocial;
  throw InputError("unknown arc universe '" + name + "' (expected group-pairs or group-social)");
}

double nmi(std::span<const std::size_t> a, std::span<const std::size_t> b) {
  if (a.size() != b.size()) throw std::invalid_argument("nmi: labelings differ in length");
  if (a.size() < 2) throw std::invalid_argument("nmi: need at least two elements");
  const double n = static_cast<double>(a.size());
  std::map<std::size_t, std::size_t> ca, cb;
  std::map<std::pair<std::size_t, std::size_t>, std::size_t> joint;
  for (std::size_t i = 0; i < a.size(); ++i) {
    ++ca[a[i]];
    ++cb[b[i]];
    ++joint[{a[i], b[i]}];
  }
  double ha = entropy(ca, n), hb = entropy(cb, n);
  if (ca.size() == 1 && cb.size() == 1) return 1.0;
  if (ca.size() == 1 || cb.size() == 1) return 0.0;
  double mi = 0.0;
  for (auto [key, c] : joint) {
    double pxy = static_cast<double>(c) / n;
    double px = static_cast<double>(ca[key.first]) / n;
    double py = static_cast<double>(cb[key.second]) / n;
    mi += pxy * std::log(pxy / (px * py));
  }
  return std::clamp(2.0 * mi / (ha + hb), 0.0, 1.0);
}

Summary summarize(std::span<const double> values) {
  Summary s;
  if (values.empty()) return s;
  double sum = 0.0;
  for (double v : values) sum += v;
  s.mean = sum / static_cast<double>(values.size());
  if (values.size() > 1) {
    double sq = 0.0;
    for (double v : values) sq += (v - s.mean) * (v - s.mean);
    s.stdev = std::sqrt(sq / static_cast<double>(values.size() - 1));
  }
  return s;
}

}  // namespace cascade
