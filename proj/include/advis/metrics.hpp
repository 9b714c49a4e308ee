#pragma once

#include <string>
#include <vector>

namespace advis {

enum class NmiNormalizer { arithmetic, geometric, max };

NmiNormalizer parse_nmi_normalizer(const std::string& s);

/// Normalized mutual information between two labelings of the same points.
double nmi(const std::vector<int>& a, const std::vector<int>& b,
           NmiNormalizer normalizer = NmiNormalizer::arithmetic);

} // namespace advis
