#pragma once

#include <cstdint>
#include <string>

#include "relscat/error.hpp"
#include "relscat/inverse.hpp"
#include "relscat/scatter.hpp"
#include "relscat/verify.hpp"

namespace relscat {

// Embedded in every artifact.
struct Provenance {
  std::string command;
  uint64_t config_hash = 0;
  AmplitudeConvention convention;
};

// Rounds to 12 significant digits; artifacts only ever carry rounded values.
double round12(double x);

std::string table_json(const AmplitudeTable& t, const Provenance& p);
// conv, if given, receives the convention recorded in the artifact.
AmplitudeTable table_from_json(const std::string& text, AmplitudeConvention* conv = nullptr);
// One row per (outgoing, incident) pair: directions, re, im.
std::string table_csv(const AmplitudeTable& t, const Provenance& p);

std::string layers_json(const StripResult& r, const Provenance& p);
std::string verify_json(const VerifyReport& r, const Provenance& p);
std::string error_json(const Error& e, const Provenance& p);

// "# config_hash=..., convention=..." line for CSV artifacts.
std::string csv_header(const Provenance& p);

}  // namespace relscat
