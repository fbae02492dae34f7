#include "graphtube/reports.hpp"

#include <ctime>

#include "json.hpp"

#include "graphtube/errors.hpp"

namespace graphtube {

using nlohmann::json;

namespace {

std::string dump(const json& j) { return j.dump(2); }

}  // namespace

std::string to_json(const HitProbReport& r) {
  json j;
  j["schema_version"] = r.schema_version;
  j["level"] = r.level;
  j["n_paths"] = r.n_paths;
  j["missing"] = r.missing;
  j["counts"] = r.counts;
  j["empirical"] = r.empirical;
  j["targets"] = r.targets;
  j["z_scores"] = r.z_scores;
  j["wilson_lo"] = r.wilson_lo;
  j["wilson_hi"] = r.wilson_hi;
  j["abs_tol"] = r.abs_tol;
  j["max_abs_dev"] = r.max_abs_dev;
  j["pass"] = r.pass;
  return dump(j);
}

std::string to_json(const StartInsensitivityReport& r) {
  json j;
  j["schema_version"] = r.schema_version;
  j["tv"] = r.tv;
  j["p_value"] = r.p_value;
  j["n_permutations"] = r.n_permutations;
  j["seed"] = r.seed;
  j["missing_a"] = r.missing_a;
  j["missing_b"] = r.missing_b;
  j["pass"] = r.pass;
  return dump(j);
}

std::string to_json(const OccupationReport& r) {
  json j;
  j["schema_version"] = r.schema_version;
  j["levels"] = r.levels;
  j["mean"] = r.mean;
  j["se"] = r.se;
  j["ratio"] = r.ratio;
  j["band"] = r.band;
  j["band_limit"] = r.band_limit;
  j["horizon"] = r.horizon;
  j["pass"] = r.pass;
  return dump(j);
}

std::string to_json(const RadialLawReport& r) {
  json j;
  j["schema_version"] = r.schema_version;
  j["ks"] = r.ks;
  j["ks_critical"] = r.ks_critical;
  j["n_samples"] = r.n_samples;
  j["stride"] = r.stride;
  j["burn_in"] = r.burn_in;
  j["pass"] = r.pass;
  return dump(j);
}

std::string to_json(const ResidualReport& r) {
  json j;
  j["schema_version"] = r.schema_version;
  j["function_name"] = r.function_name;
  j["estimate"] = r.estimate;
  j["se"] = r.se;
  j["dt"] = r.dt;
  j["bias_budget"] = r.bias_budget;
  j["n_paths"] = r.n_paths;
  j["pass"] = r.pass;
  return dump(j);
}

std::string to_json(const MarginalDistanceReport& r) {
  json j;
  j["schema_version"] = r.schema_version;
  j["times"] = r.times;
  j["tv"] = r.tv;
  j["w1"] = r.w1;
  j["total"] = r.total;
  j["pass"] = r.pass;
  return dump(j);
}

std::string to_json(const RunManifest& m) {
  json j;
  j["schema_version"] = m.schema_version;
  j["code_version"] = m.code_version;
  j["config_hash"] = m.config_hash;
  j["rng"] = {{"master_seed", m.master_seed}, {"streams", m.rng_streams}};
  j["wall_clock_seconds"] = m.wall_clock_seconds;
  j["total_paths"] = m.total_paths;
  j["boundary_exits"] = m.boundary_exits;
  j["halving"] = {{"events_total", m.halving_events_total},
                  {"p99", m.halving_p99},
                  {"max_depth", m.max_halving_depth}};
  json ex = json::array();
  for (const auto& [name, pass] : m.experiments)
    ex.push_back({{"name", name}, {"pass", pass}});
  j["experiments"] = ex;
  j["pass"] = m.pass;
  j["timestamp"] = m.timestamp;
  return dump(j);
}

std::string weights_to_json(const KirchhoffWeights& w, double quadrature_tol) {
  json j;
  j["schema_version"] = kSchemaVersion;
  j["p"] = std::vector<double>(w.p.data(), w.p.data() + w.p.size());
  j["quadrature_tol"] = quadrature_tol;
  return dump(j);
}

uint64_t fnv1a(const std::string& data) {
  uint64_t h = 14695981039346656037ULL;
  for (const unsigned char c : data) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

std::string fnv1a_hex(const std::string& data) {
  static const char* digits = "0123456789abcdef";
  uint64_t h = fnv1a(data);
  std::string out(16, '0');
  for (int i = 15; i >= 0; --i) {
    out[i] = digits[h & 0xf];
    h >>= 4;
  }
  return out;
}

std::string canonical_json(const std::string& text) {
  try {
    return json::parse(text).dump();
  } catch (const json::parse_error& e) {
    throw ParseError(std::string("JSON parse error: ") + e.what());
  }
}

std::string rfc3339_utc_now() {
  const std::time_t now = std::time(nullptr);
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

}  // namespace graphtube
