#include "stam/trace.hpp"

#include <array>
#include <charconv>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>
#include <system_error>

namespace stam {

std::string format_double(double v) {
  std::array<char, 64> buf;
  const auto res = std::to_chars(buf.data(), buf.data() + buf.size(), v);
  return std::string(buf.data(), res.ptr);
}

namespace {

double parse_double(std::string_view field, const std::string& path, size_t line_no) {
  double v = 0.0;
  const auto res = std::from_chars(field.data(), field.data() + field.size(), v);
  if (res.ec != std::errc() || res.ptr != field.data() + field.size())
    throw ConfigError(path + ":" + std::to_string(line_no) + ": bad numeric field '" +
                          std::string(field) + "'",
                      static_cast<int>(line_no));
  return v;
}

long parse_long(std::string_view field, const std::string& path, size_t line_no) {
  long v = 0;
  const auto res = std::from_chars(field.data(), field.data() + field.size(), v);
  if (res.ec != std::errc() || res.ptr != field.data() + field.size())
    throw ConfigError(path + ":" + std::to_string(line_no) + ": bad integer field '" +
                          std::string(field) + "'",
                      static_cast<int>(line_no));
  return v;
}

std::vector<std::string_view> split_csv_line(std::string_view line) {
  std::vector<std::string_view> out;
  size_t start = 0;
  while (true) {
    const size_t comma = line.find(',', start);
    if (comma == std::string_view::npos) {
      out.push_back(line.substr(start));
      break;
    }
    out.push_back(line.substr(start, comma - start));
    start = comma + 1;
  }
  return out;
}

}  // namespace

CsvTraceWriter::CsvTraceWriter(const std::string& path) : path_(path) {
  FILE* f = std::fopen(path.c_str(), "wb");
  if (!f) throw ConfigError("cannot open trace file for writing: " + path);
  file_ = f;
  std::fputs(kTraceCsvHeader, f);
  std::fputc('\n', f);
}

CsvTraceWriter::~CsvTraceWriter() {
  if (file_) std::fclose(static_cast<FILE*>(file_));
}

void CsvTraceWriter::emit(const TraceRecord& r) {
  std::string line;
  line.reserve(256);
  line += std::to_string(r.t);
  line += ',';
  line += std::to_string(r.epoch);
  for (double v : {r.objective, r.eta, r.dist_sq_proxy, r.combined, r.z_residual, r.merit}) {
    line += ',';
    line += format_double(v);
  }
  line += ',';
  if (r.train_accuracy) line += format_double(*r.train_accuracy);
  line += ',';
  if (r.test_accuracy) line += format_double(*r.test_accuracy);
  for (double v : {r.gamma, r.beta, r.lambda}) {
    line += ',';
    line += format_double(v);
  }
  line += '\n';
  std::fwrite(line.data(), 1, line.size(), static_cast<FILE*>(file_));
}

void CsvTraceWriter::flush() {
  if (file_) std::fflush(static_cast<FILE*>(file_));
}

std::vector<TraceRecord> parse_trace_csv(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open trace file: " + path);
  std::string line;
  if (!std::getline(in, line)) throw ConfigError(path + ": empty trace file");
  if (line != kTraceCsvHeader)
    throw ConfigError(path + ": unexpected CSV header '" + line + "'");

  std::vector<TraceRecord> records;
  size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const auto fields = split_csv_line(line);
    if (fields.size() != 13)
      throw ConfigError(path + ":" + std::to_string(line_no) + ": expected 13 fields, got " +
                            std::to_string(fields.size()),
                        static_cast<int>(line_no));
    TraceRecord r;
    r.t = parse_long(fields[0], path, line_no);
    r.epoch = parse_long(fields[1], path, line_no);
    r.objective = parse_double(fields[2], path, line_no);
    r.eta = parse_double(fields[3], path, line_no);
    r.dist_sq_proxy = parse_double(fields[4], path, line_no);
    r.combined = parse_double(fields[5], path, line_no);
    r.z_residual = parse_double(fields[6], path, line_no);
    r.merit = parse_double(fields[7], path, line_no);
    if (!fields[8].empty()) r.train_accuracy = parse_double(fields[8], path, line_no);
    if (!fields[9].empty()) r.test_accuracy = parse_double(fields[9], path, line_no);
    r.gamma = parse_double(fields[10], path, line_no);
    r.beta = parse_double(fields[11], path, line_no);
    r.lambda = parse_double(fields[12], path, line_no);
    records.push_back(r);
  }
  return records;
}

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open file: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot open file for writing: " + path);
  out << content;
}

std::string digest_hex(const std::string& bytes) {
  std::uint64_t h = 0xCBF29CE484222325ull;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001B3ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return std::string(buf);
}

}  // namespace stam
