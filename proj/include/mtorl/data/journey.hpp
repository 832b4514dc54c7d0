#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

namespace mtorl::data {

// One ad exposure: channel shown, touch features, observed gain, spend.
struct Observation {
  std::int64_t ts = 0;
  int channel = 0;
  std::vector<double> q;
  double gain = 0.0;
  double cost = 0.0;

  bool operator==(const Observation&) const = default;
};

// A user's chronological exposure list plus static profile features.
struct Journey {
  std::string user_id;
  std::vector<double> f;
  std::vector<Observation> observations;  // sorted by ts

  bool operator==(const Journey&) const = default;
};

struct ParseStats {
  std::size_t lines_total = 0;  // non-empty lines seen
  std::size_t lines_bad = 0;    // skipped as malformed

  double bad_fraction() const {
    return lines_total == 0 ? 0.0 : static_cast<double>(lines_bad) / static_cast<double>(lines_total);
  }
};

// Journey log: JSON lines, one observation per line:
//   {"user_id": str, "ts": int, "channel": int, "q": [real...], "gain": real, "cost": real}
// Malformed lines are skipped and counted. Journeys come back sorted by
// user_id with observations stably sorted by ts.
std::vector<Journey> parse_journeys(std::istream& in, ParseStats* stats);
std::vector<Journey> load_journeys(const std::string& path, ParseStats* stats);

// Profile file: JSON lines {"user_id": str, "f": [real...]}. Attaches f to
// matching journeys; unknown users are ignored, repeats keep the last entry.
void parse_profiles(std::istream& in, std::vector<Journey>& journeys, ParseStats* stats);
void load_profiles(const std::string& path, std::vector<Journey>& journeys, ParseStats* stats);

void write_journeys(std::ostream& out, const std::vector<Journey>& journeys);
void save_journeys(const std::string& path, const std::vector<Journey>& journeys);
void write_profiles(std::ostream& out, const std::vector<Journey>& journeys);
void save_profiles(const std::string& path, const std::vector<Journey>& journeys);

}  // namespace mtorl::data
