#pragma once

#include "dqwalk/channel.hpp"
#include "dqwalk/channel_io.hpp"
#include "dqwalk/csv.hpp"
#include "dqwalk/moments.hpp"

#include <json.hpp>

#include <ostream>
#include <utility>
#include <vector>

namespace dqwalk {

inline void write_series_csv(std::ostream& os, const MomentSeries& s) {
  os << "t,first,second,variance\n";
  for (int t = 0; t <= s.t_max(); ++t) {
    const auto i = static_cast<std::size_t>(t);
    os << t << ',' << format_double(s.first[i]) << ',' << format_double(s.second[i]) << ','
       << format_double(s.variance[i]) << '\n';
  }
}

/// Oracle moments as a series CSV with the same columns.
inline void write_series_csv(std::ostream& os, const std::vector<std::pair<double, double>>& moments) {
  os << "t,first,second,variance\n";
  for (std::size_t t = 0; t < moments.size(); ++t) {
    const auto [x1, x2] = moments[t];
    os << t << ',' << format_double(x1) << ',' << format_double(x2) << ',' << format_double(x2 - x1 * x1) << '\n';
  }
}

inline nlohmann::json series_to_json(const MomentSeries& s, const WalkChannel& channel) {
  nlohmann::json psi0 = nlohmann::json::array();
  for (std::size_t i = 0; i < 4; ++i) psi0.push_back(s.psi0[i].real());
  return {{"label", s.label},
          {"channel", channel_to_json(channel)},
          {"initial_coin", psi0},
          {"n_k", s.n_k},
          {"quadrature_exact", s.quadrature_exact},
          {"max_imag_residue", s.max_imag_residue},
          {"t", s.t_max()},
          {"first", s.first},
          {"second", s.second},
          {"variance", s.variance},
          {"warnings", s.warnings}};
}

}  // namespace dqwalk
