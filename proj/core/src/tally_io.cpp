#include "mpqkd/tally_io.hpp"

#include <json.hpp>

namespace mpqkd {

using nlohmann::ordered_json;

namespace {

ordered_json pair_json(const protosim::PairTally& t) {
  ordered_json j;
  j["pairs"] = t.pairs;
  j["z_pairs"] = t.z_pairs;
  j["x_pairs"] = t.x_pairs;
  j["mismatch_pairs"] = t.mismatch_pairs;
  j["z_basis"] = t.z_basis;
  j["z_errors"] = t.z_errors;
  j["x_kept"] = t.x_kept;
  j["x_errors"] = t.x_errors;
  return j;
}

std::uint64_t count(const ordered_json& j, const char* key) {
  if (!j.contains(key) || !j.at(key).is_number_unsigned()) {
    throw SnapshotError(std::string("snapshot: missing or invalid count '") + key + "'");
  }
  return j.at(key).get<std::uint64_t>();
}

protosim::PairTally pair_from(const ordered_json& j) {
  protosim::PairTally t;
  t.pairs = count(j, "pairs");
  t.z_pairs = count(j, "z_pairs");
  t.x_pairs = count(j, "x_pairs");
  t.mismatch_pairs = count(j, "mismatch_pairs");
  t.z_basis = count(j, "z_basis");
  t.z_errors = count(j, "z_errors");
  t.x_kept = count(j, "x_kept");
  t.x_errors = count(j, "x_errors");
  return t;
}

}  // namespace

std::string write_snapshot(const TallySnapshot& s) {
  ordered_json doc;
  doc["schema"] = std::string(kTallySchema);
  doc["version"] = kTallyVersion;
  doc["config"] = ordered_json::parse(to_json(s.config));
  doc["seed"] = s.seed;
  doc["rounds"] = s.tallies.rounds;
  doc["slices"] = s.tallies.slices;
  doc["effective"] = s.tallies.effective;
  doc["effective_zz"] = s.tallies.effective_zz;
  doc["round_counts"] = s.tallies.round_counts;
  doc["box2"] = pair_json(s.tallies.box2);
  if (s.tallies.has_box7) doc["box7"] = pair_json(s.tallies.box7);
  return doc.dump(1);
}

TallySnapshot read_snapshot(std::string_view text) {
  ordered_json doc;
  try {
    doc = ordered_json::parse(text);
  } catch (const ordered_json::parse_error& e) {
    throw SnapshotError(std::string("snapshot: malformed JSON: ") + e.what());
  }
  if (!doc.is_object() || doc.value("schema", "") != kTallySchema) throw SnapshotError("snapshot: unknown schema");
  if (!doc.contains("version") || doc["version"] != kTallyVersion) throw SnapshotError("snapshot: unsupported version");
  if (!doc.contains("config")) throw SnapshotError("snapshot: missing config");

  TallySnapshot s;
  s.config = parse_config(doc["config"].dump());
  s.seed = count(doc, "seed");
  const auto slices = count(doc, "slices");
  if (slices < 2 || slices > 256) throw SnapshotError("snapshot: invalid slice count");
  s.tallies = protosim::Tallies(static_cast<int>(slices));
  s.tallies.rounds = count(doc, "rounds");
  s.tallies.effective = count(doc, "effective");
  s.tallies.effective_zz = count(doc, "effective_zz");
  const auto& counts = doc["round_counts"];
  if (!counts.is_array() || counts.size() != s.tallies.round_counts.size()) {
    throw SnapshotError("snapshot: round_counts has the wrong size");
  }
  for (std::size_t i = 0; i < counts.size(); ++i) {
    if (!counts[i].is_number_unsigned()) throw SnapshotError("snapshot: round_counts must hold non-negative integers");
    s.tallies.round_counts[i] = counts[i].get<std::uint64_t>();
  }
  if (!doc.contains("box2")) throw SnapshotError("snapshot: missing box2");
  s.tallies.box2 = pair_from(doc["box2"]);
  if (doc.contains("box7")) {
    s.tallies.has_box7 = true;
    s.tallies.box7 = pair_from(doc["box7"]);
  }
  return s;
}

}  // namespace mpqkd
