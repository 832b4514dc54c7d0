#include "mtorl/data/journey.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <map>

#include "json.hpp"
#include "mtorl/common/errors.hpp"
#include "mtorl/common/log.hpp"

namespace mtorl::data {

namespace {

using nlohmann::json;

bool is_blank(const std::string& line) {
  return std::all_of(line.begin(), line.end(), [](unsigned char c) { return std::isspace(c); });
}

bool read_number_array(const json& j, std::vector<double>* out) {
  if (!j.is_array()) return false;
  out->clear();
  out->reserve(j.size());
  for (const auto& v : j) {
    if (!v.is_number()) return false;
    out->push_back(v.get<double>());
  }
  return true;
}

// Returns false when the record is malformed in any way.
bool parse_observation_line(const std::string& line, std::string* user_id, Observation* obs) {
  json j = json::parse(line, nullptr, false);
  if (j.is_discarded() || !j.is_object()) return false;
  if (!j.contains("user_id") || !j["user_id"].is_string()) return false;
  if (!j.contains("ts") || !j["ts"].is_number_integer()) return false;
  if (!j.contains("channel") || !j["channel"].is_number_integer()) return false;
  if (!j.contains("q") || !read_number_array(j["q"], &obs->q)) return false;
  if (!j.contains("gain") || !j["gain"].is_number()) return false;
  if (!j.contains("cost") || !j["cost"].is_number()) return false;
  *user_id = j["user_id"].get<std::string>();
  if (user_id->empty()) return false;
  obs->ts = j["ts"].get<std::int64_t>();
  obs->channel = j["channel"].get<int>();
  obs->gain = j["gain"].get<double>();
  obs->cost = j["cost"].get<double>();
  if (obs->channel < 0 || obs->cost < 0.0) return false;
  if (!std::isfinite(obs->gain) || !std::isfinite(obs->cost)) return false;
  for (double v : obs->q) {
    if (!std::isfinite(v)) return false;
  }
  return true;
}

std::ifstream open_or_throw(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path);
  return in;
}

}  // namespace

std::vector<Journey> parse_journeys(std::istream& in, ParseStats* stats) {
  ParseStats local;
  std::map<std::string, std::vector<Observation>> by_user;  // map: sorted by user_id
  std::string line;
  while (std::getline(in, line)) {
    if (is_blank(line)) continue;
    ++local.lines_total;
    std::string user_id;
    Observation obs;
    if (!parse_observation_line(line, &user_id, &obs)) {
      ++local.lines_bad;
      continue;
    }
    by_user[user_id].push_back(std::move(obs));
  }
  std::vector<Journey> journeys;
  journeys.reserve(by_user.size());
  for (auto& [user_id, observations] : by_user) {
    Journey j;
    j.user_id = user_id;
    j.observations = std::move(observations);
    std::stable_sort(j.observations.begin(), j.observations.end(),
                     [](const Observation& a, const Observation& b) { return a.ts < b.ts; });
    journeys.push_back(std::move(j));
  }
  if (local.lines_bad > 0) {
    logging::warn("skipped " + std::to_string(local.lines_bad) + " of " +
                  std::to_string(local.lines_total) + " journey lines");
  }
  if (stats != nullptr) *stats = local;
  return journeys;
}

std::vector<Journey> load_journeys(const std::string& path, ParseStats* stats) {
  auto in = open_or_throw(path);
  return parse_journeys(in, stats);
}

void parse_profiles(std::istream& in, std::vector<Journey>& journeys, ParseStats* stats) {
  ParseStats local;
  std::map<std::string, std::vector<double>> profiles;
  std::string line;
  while (std::getline(in, line)) {
    if (is_blank(line)) continue;
    ++local.lines_total;
    json j = json::parse(line, nullptr, false);
    std::vector<double> f;
    if (j.is_discarded() || !j.is_object() || !j.contains("user_id") || !j["user_id"].is_string() ||
        !j.contains("f") || !read_number_array(j["f"], &f)) {
      ++local.lines_bad;
      continue;
    }
    bool finite = true;
    for (double v : f) finite = finite && std::isfinite(v);
    if (!finite) {
      ++local.lines_bad;
      continue;
    }
    profiles[j["user_id"].get<std::string>()] = std::move(f);
  }
  for (Journey& journey : journeys) {
    auto it = profiles.find(journey.user_id);
    if (it != profiles.end()) journey.f = it->second;
  }
  if (stats != nullptr) *stats = local;
}

void load_profiles(const std::string& path, std::vector<Journey>& journeys, ParseStats* stats) {
  auto in = open_or_throw(path);
  parse_profiles(in, journeys, stats);
}

void write_journeys(std::ostream& out, const std::vector<Journey>& journeys) {
  for (const Journey& journey : journeys) {
    for (const Observation& obs : journey.observations) {
      json j;
      j["user_id"] = journey.user_id;
      j["ts"] = obs.ts;
      j["channel"] = obs.channel;
      j["q"] = obs.q;
      j["gain"] = obs.gain;
      j["cost"] = obs.cost;
      out << j.dump() << '\n';
    }
  }
}

void save_journeys(const std::string& path, const std::vector<Journey>& journeys) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write " + path);
  write_journeys(out, journeys);
}

void write_profiles(std::ostream& out, const std::vector<Journey>& journeys) {
  for (const Journey& journey : journeys) {
    json j;
    j["user_id"] = journey.user_id;
    j["f"] = journey.f;
    out << j.dump() << '\n';
  }
}

void save_profiles(const std::string& path, const std::vector<Journey>& journeys) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write " + path);
  write_profiles(out, journeys);
}

}  // namespace mtorl::data
