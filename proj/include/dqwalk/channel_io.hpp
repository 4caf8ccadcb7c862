#pragma once

// JSON channel files:
//   { "label": str,
//     "terms": [ {"n": int, "l": int, "i": "R"|"L", "j": "R"|"L", "re": float, "im": float}, ... ] }

#include "dqwalk/channel.hpp"

#include <json.hpp>

#include <fstream>
#include <string>

namespace dqwalk {

inline std::string coin_name(Coin c) { return c == Coin::R ? "R" : "L"; }

inline Coin parse_coin_name(const std::string& s) {
  if (s == "R") return Coin::R;
  if (s == "L") return Coin::L;
  throw Error(ErrorKind::InvalidChannelFile, "coin index must be \"R\" or \"L\", got \"" + s + "\"");
}

inline nlohmann::json channel_to_json(const WalkChannel& channel) {
  nlohmann::json terms = nlohmann::json::array();
  for (const auto& t : channel.terms()) {
    terms.push_back({{"n", t.n},
                     {"l", t.l},
                     {"i", coin_name(t.i)},
                     {"j", coin_name(t.j)},
                     {"re", t.amp.real()},
                     {"im", t.amp.imag()}});
  }
  return {{"label", channel.label()}, {"terms", terms}};
}

/// Parses and validates completeness; invalid channels are rejected.
inline WalkChannel channel_from_json(const nlohmann::json& j) {
  std::vector<KrausTerm> terms;
  std::string label;
  try {
    label = j.value("label", std::string{});
    const auto& arr = j.at("terms");
    if (!arr.is_array()) throw Error(ErrorKind::InvalidChannelFile, "\"terms\" must be an array");
    for (const auto& item : arr) {
      KrausTerm t;
      t.n = item.at("n").get<int>();
      t.l = item.at("l").get<int>();
      t.i = parse_coin_name(item.at("i").get<std::string>());
      t.j = parse_coin_name(item.at("j").get<std::string>());
      t.amp = Complex(item.at("re").get<double>(), item.value("im", 0.0));
      if (t.n < 0) throw Error(ErrorKind::InvalidChannelFile, "Kraus index n must be >= 0");
      terms.push_back(t);
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::InvalidChannelFile, e.what());
  }
  WalkChannel channel(std::move(terms), std::move(label));
  validate_completeness(channel);
  return channel;
}

inline WalkChannel load_channel_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::InvalidChannelFile, "cannot open " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::InvalidChannelFile, path + ": " + e.what());
  }
  return channel_from_json(j);
}

}  // namespace dqwalk
