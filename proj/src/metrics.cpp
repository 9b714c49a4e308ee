#include "advis/metrics.hpp"

#include "advis/errors.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <utility>

namespace advis {

NmiNormalizer parse_nmi_normalizer(const std::string& s) {
  if (s == "arithmetic")
    return NmiNormalizer::arithmetic;
  if (s == "geometric")
    return NmiNormalizer::geometric;
  if (s == "max")
    return NmiNormalizer::max;
  throw InvalidArgument("unknown NMI normalizer '" + s + "'");
}

double nmi(const std::vector<int>& a, const std::vector<int>& b, NmiNormalizer normalizer) {
  if (a.size() != b.size())
    throw InvalidArgument("nmi: label vectors differ in length");
  if (a.empty())
    throw InvalidArgument("nmi: empty input");

  std::map<int, double> ca, cb;
  std::map<std::pair<int, int>, double> joint;
  for (std::size_t i = 0; i < a.size(); ++i) {
    ca[a[i]] += 1.0;
    cb[b[i]] += 1.0;
    joint[{a[i], b[i]}] += 1.0;
  }
  const double n = static_cast<double>(a.size());
  auto entropy = [n](const std::map<int, double>& counts) {
    double h = 0.0;
    for (const auto& [_, c] : counts)
      h -= (c / n) * std::log(c / n);
    return h;
  };
  const double ha = entropy(ca), hb = entropy(cb);
  double mi = 0.0;
  for (const auto& [key, c] : joint)
    mi += (c / n) * std::log(c * n / (ca[key.first] * cb[key.second]));

  if (ha == 0.0 && hb == 0.0)
    return 1.0;
  double denom = 0.0;
  switch (normalizer) {
  case NmiNormalizer::arithmetic: denom = 0.5 * (ha + hb); break;
  case NmiNormalizer::geometric: denom = std::sqrt(ha * hb); break;
  case NmiNormalizer::max: denom = std::max(ha, hb); break;
  }
  if (denom <= 0.0)
    return 0.0;
  return std::clamp(mi / denom, 0.0, 1.0);
}

} // namespace advis
