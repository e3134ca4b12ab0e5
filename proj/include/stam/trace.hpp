#pragma once

#include <optional>
#include <string>
#include <vector>

#include "stam/types.hpp"

namespace stam {

// One logged row of a run. Accuracies are absent for problems with no
// dataset. objective may be +inf (indicator constraint violated on purpose);
// everything else is finite for a healthy run.
struct TraceRecord {
  long t = 0;
  long epoch = 0;
  double objective = 0.0;
  double eta = 0.0;
  double dist_sq_proxy = 0.0;
  double combined = 0.0;
  double z_residual = 0.0;
  double merit = 0.0;
  std::optional<double> train_accuracy;
  std::optional<double> test_accuracy;
  double gamma = 0.0;
  double beta = 0.0;
  double lambda = 0.0;
};

struct TraceSink {
  virtual ~TraceSink() = default;
  virtual void emit(const TraceRecord& rec) = 0;
  virtual void flush() {}
};

class MemoryTrace : public TraceSink {
 public:
  void emit(const TraceRecord& rec) override { records.push_back(rec); }
  std::vector<TraceRecord> records;
};

inline constexpr const char* kTraceCsvHeader =
    "t,epoch,objective,eta,dist_sq_proxy,combined,z_residual,merit,"
    "train_acc,test_acc,gamma,beta,lambda";

// Writes the fixed header up front and one row per record. Formatting uses
// shortest round-trip decimal (locale independent), so traces are byte-stable
// across reruns; absent accuracies become empty fields.
class CsvTraceWriter : public TraceSink {
 public:
  explicit CsvTraceWriter(const std::string& path);
  ~CsvTraceWriter() override;

  void emit(const TraceRecord& rec) override;
  void flush() override;
  const std::string& path() const { return path_; }

 private:
  std::string path_;
  void* file_ = nullptr;  // FILE*
};

// Shortest round-trip decimal form of v ("inf"/"-inf"/"nan" sentinels).
std::string format_double(double v);

// Parses a trace CSV produced by CsvTraceWriter; header must match exactly.
std::vector<TraceRecord> parse_trace_csv(const std::string& path);

// Run summaries and compare tables live next to the traces.
std::string read_text_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& content);

// FNV-1a over the raw bytes, as a 16-digit hex string; used to fingerprint
// config files in summaries.
std::string digest_hex(const std::string& bytes);

}  // namespace stam
