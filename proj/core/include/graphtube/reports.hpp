#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "graphtube/estimators.hpp"
#include "graphtube/weights.hpp"

namespace graphtube {

/// Run-level provenance record.  Timestamps and wall-clock live only here;
/// the per-experiment reports stay bitwise reproducible under reruns with
/// the same seed, irrespective of worker count.
struct RunManifest {
  int schema_version = kSchemaVersion;
  std::string code_version = "0.1.0";
  std::string config_hash;  ///< FNV-1a (64-bit, hex) of the canonical config dump
  uint64_t master_seed = 0;
  long rng_streams = 0;  ///< one per simulated path, across every batch of the run
  double wall_clock_seconds = 0.0;
  long total_paths = 0;
  long boundary_exits = 0;       ///< confined paths leaving the tube; must be 0
  long halving_events_total = 0; ///< confined sub-step halvings across all paths
  long halving_p99 = 0;          ///< 99th percentile of per-path halving events
  long max_halving_depth = 0;
  std::vector<std::pair<std::string, bool>> experiments;  ///< name -> pass
  bool pass = false;  ///< conjunction over experiments
  std::string timestamp;  ///< RFC 3339 UTC
};

/// Canonical JSON dumps (sorted keys, 2-space indent, shortest round-trip
/// doubles): byte-stable functions of the report values.
std::string to_json(const HitProbReport& r);
std::string to_json(const StartInsensitivityReport& r);
std::string to_json(const OccupationReport& r);
std::string to_json(const RadialLawReport& r);
std::string to_json(const ResidualReport& r);
std::string to_json(const MarginalDistanceReport& r);
std::string to_json(const RunManifest& m);

/// Weight report {"p": [...], "quadrature_tol": ..., "schema_version": ...}.
std::string weights_to_json(const KirchhoffWeights& w, double quadrature_tol);

/// FNV-1a 64-bit hash, and its fixed-width hex form for manifests.
uint64_t fnv1a(const std::string& data);
std::string fnv1a_hex(const std::string& data);

/// Re-serializes arbitrary JSON text in the canonical form used for hashing
/// (sorted keys, no insignificant whitespace).
std::string canonical_json(const std::string& text);

/// Current UTC time as RFC 3339 (manifest use only).
std::string rfc3339_utc_now();

}  // namespace graphtube
