#pragma once

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>

#include <json.hpp>

#include "berkson/identify.hpp"
#include "berkson/model.hpp"
#include "berkson/verify.hpp"

namespace berkson {

// Numbers are serialized with 17 significant digits so a double round-trips
// losslessly through text.
inline std::string format_double(double x) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", x);
  return buf;
}

// Writes atomically: temp file in the same directory, then rename.
inline void write_file(const std::filesystem::path& path,
                       const std::string& content) {
  const std::filesystem::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open " + tmp.string());
    out << content;
    if (!out) throw std::runtime_error("write failed: " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

inline std::string dataset_to_csv(const Dataset& data) {
  std::string out = "x0,y\n";
  for (const Observation& row : data.rows) {
    out += format_double(row.x0);
    out += row.y ? ",1\n" : ",0\n";
  }
  return out;
}

inline Dataset dataset_from_csv(std::istream& in) {
  Dataset data;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (lineno == 1 && line == "x0,y") continue;
    const auto comma = line.find(',');
    if (comma == std::string::npos)
      throw std::runtime_error("malformed CSV row at line " +
                               std::to_string(lineno));
    try {
      std::size_t used = 0;
      const double x0 = std::stod(line.substr(0, comma), &used);
      const std::string ystr = line.substr(comma + 1);
      if (used != comma || (ystr != "0" && ystr != "1"))
        throw std::invalid_argument("bad field");
      data.rows.push_back({x0, ystr == "1" ? 1 : 0});
    } catch (const std::exception&) {
      throw std::runtime_error("malformed CSV row at line " +
                               std::to_string(lineno));
    }
  }
  return data;
}

inline Dataset dataset_from_csv_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  return dataset_from_csv(in);
}

inline const char* case_tag_name(CaseTag tag) {
  switch (tag) {
    case CaseTag::EqualVariances: return "EqualVariances";
    case CaseTag::RightSlopeZero: return "RightSlopeZero";
    case CaseTag::BothSlopesZero: return "BothSlopesZero";
    case CaseTag::GeneralCase: return "GeneralCase";
    case CaseTag::IdentityExceptional: return "IdentityExceptional";
  }
  return "unknown";
}

inline const char* theorem_name(TheoremTag tag) {
  switch (tag) {
    case TheoremTag::FuncKnownTau: return "FuncKnownTau";
    case TheoremTag::StructKnownTau: return "StructKnownTau";
    case TheoremTag::FuncUnknownTau: return "FuncUnknownTau";
    case TheoremTag::StructUnknownTau: return "StructUnknownTau";
  }
  return "unknown";
}

inline nlohmann::json to_json(const SolutionReport& rep) {
  nlohmann::json j;
  j["case"] = case_tag_name(rep.case_tag);
  j["roots"] = rep.roots;
  j["count"] = rep.roots.size();
  j["is_identity"] = rep.is_identity;
  j["truncated"] = rep.truncated;
  j["tangency"] = rep.tangency;
  return j;
}

inline nlohmann::json to_json(const Verdict& v) {
  nlohmann::json j;
  j["identifiable"] = v.identifiable;
  j["theorem"] = theorem_name(v.theorem);
  j["support_points"] = v.support_points;
  j["note"] = v.note;
  return j;
}

inline nlohmann::json to_json(const FitResult& r) {
  nlohmann::json j;
  j["estimate"] = {{"b0", r.estimate.b0},
                   {"b1", r.estimate.b1},
                   {"s", r.estimate.s}};
  if (r.tau2_known) j["tau2_known"] = *r.tau2_known;
  j["loglik"] = r.loglik;
  j["iterations"] = r.iterations;
  j["converged"] = r.converged;
  j["gradient_norm"] = r.gradient_norm;
  j["warnings"] = r.warnings;
  return j;
}

inline nlohmann::json to_json(const CertReport& rep) {
  nlohmann::json j;
  j["lemma"] = lemma_name(rep.lemma);
  j["grid"] = rep.grid;
  j["tolerance"] = rep.tolerance;
  j["max_violation"] = rep.max_violation;
  j["passed"] = rep.passed;
  nlohmann::json offenders = nlohmann::json::array();
  for (const Offender& o : rep.offenders)
    offenders.push_back({{"x", o.x},
                         {"v", o.v},
                         {"extra", o.extra},
                         {"violation", o.violation}});
  j["offenders"] = offenders;
  return j;
}

}  // namespace berkson
