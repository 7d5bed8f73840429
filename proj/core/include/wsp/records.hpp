#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "wsp/experiments.hpp"

namespace wsp {

inline constexpr const char* kSchemaVersion = "1.0";

/// Parse failure in a CSV/JSON input file; line is 1-based (0 when unknown).
class FileParseError : public std::runtime_error {
public:
  FileParseError(const std::string& path, int line, const std::string& what);
  const std::string& path() const noexcept { return path_; }
  int line() const noexcept { return line_; }

private:
  std::string path_;
  int line_;
};

/// Shortest round-trip decimal form of a double (std::to_chars).
std::string format_double(double v);

// ---- CSV file formats ----
// Vectors: one decimal value per line, '.' separator.
// Matrices: one row per line, comma-separated decimals, equal row lengths.

std::string vector_to_csv(const Vector& v);
Vector vector_from_csv(const std::string& text, const std::string& path = "<string>");
void write_vector_csv(const std::string& path, const Vector& v);
Vector read_vector_csv(const std::string& path);

std::string matrix_to_csv(const Matrix& a);
Matrix matrix_from_csv(const std::string& text, const std::string& path = "<string>");
void write_matrix_csv(const std::string& path, const Matrix& a);
Matrix read_matrix_csv(const std::string& path);

/// One RFC-4180 row: fields quoted only when they contain ',', '"' or
/// newlines; quotes doubled.
std::string csv_row(const std::vector<std::string>& fields);

void write_text_file(const std::string& path, const std::string& text);
std::string read_text_file(const std::string& path);

// ---- JSON record format ----
// Every document is {"schema_version", "kind", "payload", "provenance"} with
// kind one of: matrix, signal, observation, solve_report, certificate,
// counterexample, summary. Round trips are lossless for all payload kinds.

struct Provenance {
  std::uint64_t seed = 0;
  std::string config_echo = "{}"; // JSON text
  std::string tool_version;       // defaults to the library version
};

std::string matrix_record(const MeasurementEnsemble& e, const Provenance& p = {});
std::string signal_record(const Signal& x, const Provenance& p = {});
std::string observation_record(const PhaselessObservation& obs, const Provenance& p = {});
std::string phaseless_report_record(const PhaselessSolveReport& r, const Provenance& p = {});
std::string certificate_record(const CertificateReport& r, const Provenance& p = {});
std::string counterexample_record(const WnspCounterexample& cex, const WnspSearchStats& stats,
                                  const Provenance& p = {});
std::string wnsp_notfound_record(const WnspSearchStats& stats, const Provenance& p = {});

MeasurementEnsemble matrix_from_record(const std::string& json);
Signal signal_from_record(const std::string& json);
PhaselessObservation observation_from_record(const std::string& json);
PhaselessSolveReport phaseless_report_from_record(const std::string& json);
CertificateReport certificate_from_record(const std::string& json);
WnspCounterexample counterexample_from_record(const std::string& json);

/// kind field of a record document.
std::string record_kind(const std::string& json);

// ---- Experiment configs and summaries ----

std::string experiment_config_to_json(const ExperimentConfig& cfg);
ExperimentConfig experiment_config_from_json(const std::string& text,
                                             const std::string& path = "<string>");

struct ExperimentSummary {
  ExperimentConfig config;
  std::string csv_path;
  std::int64_t rows = 0;
  double wall_clock_ms = 0.0; // excluded from determinism comparisons
  std::optional<BoundSummary> bound; // present when bound verification ran
};

std::string summary_record(const ExperimentSummary& s, const Provenance& p = {});

} // namespace wsp
