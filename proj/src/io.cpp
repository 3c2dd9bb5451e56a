#include "fastmks/io.hpp"

#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <random>

#include "fastmks/errors.hpp"

namespace fastmks {

namespace {

std::string trim(const std::string& s) {
  std::size_t b = 0, e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return s.substr(b, e - b);
}

std::vector<std::string> split(const std::string& line, char delim) {
  std::vector<std::string> cells;
  std::size_t start = 0;
  while (true) {
    const std::size_t pos = line.find(delim, start);
    if (pos == std::string::npos) {
      cells.push_back(line.substr(start));
      return cells;
    }
    cells.push_back(line.substr(start, pos - start));
    start = pos + 1;
  }
}

bool parse_cell(const std::string& cell, double& out) {
  const std::string t = trim(cell);
  if (t.empty()) return false;
  const char* last = t.data() + t.size();
  const auto [ptr, ec] = std::from_chars(t.data(), last, out);
  return ec == std::errc() && ptr == last;
}

std::string format_cell(double v) {
  char buf[32];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, ptr);
}

std::ifstream open_input(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open '" + path + "'");
  return in;
}

std::ofstream open_output(const std::string& path) {
  std::ofstream out(path);
  if (!out) throw ParseError("cannot write '" + path + "'");
  return out;
}

}  // namespace

Dataset load_vectors(const std::string& path) {
  std::ifstream in = open_input(path);
  std::vector<std::vector<double>> rows;
  std::string line;
  std::size_t line_no = 0;
  char delim = 0;
  std::size_t width = 0;
  bool header_allowed = true;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (trim(line).empty()) continue;
    if (delim == 0) delim = line.find('\t') != std::string::npos ? '\t' : ',';
    const std::vector<std::string> cells = split(line, delim);
    std::vector<double> row(cells.size());
    std::size_t bad = cells.size();
    for (std::size_t c = 0; c < cells.size(); ++c) {
      if (!parse_cell(cells[c], row[c])) {
        bad = c;
        break;
      }
    }
    if (bad != cells.size()) {
      if (header_allowed) {
        header_allowed = false;
        continue;
      }
      throw ParseError(path + ": row " + std::to_string(line_no) + ": bad number '" +
                       trim(cells[bad]) + "'");
    }
    header_allowed = false;
    if (width == 0) width = row.size();
    if (row.size() != width)
      throw ParseError(path + ": row " + std::to_string(line_no) + ": expected " +
                       std::to_string(width) + " columns, got " + std::to_string(row.size()));
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw ParseError(path + ": no data rows");
  return Dataset::from_vectors(std::move(rows));
}

Dataset load_sequences(const std::string& path) {
  std::ifstream in = open_input(path);
  std::vector<std::string> seqs;
  std::string line;
  std::size_t line_no = 0;
  std::size_t record_line = 0;
  const auto close_record = [&] {
    if (!seqs.empty() && seqs.back().empty())
      throw ParseError(path + ": empty record at line " + std::to_string(record_line));
  };
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const std::string t = trim(line);
    if (t.empty()) continue;
    if (t[0] == '>') {
      close_record();
      seqs.emplace_back();
      record_line = line_no;
      continue;
    }
    if (seqs.empty())
      throw ParseError(path + ": line " + std::to_string(line_no) +
                       ": sequence data before first '>' header");
    for (const char ch : t)
      if (!std::isspace(static_cast<unsigned char>(ch)))
        seqs.back().push_back(static_cast<char>(std::toupper(static_cast<unsigned char>(ch))));
  }
  close_record();
  if (seqs.empty()) throw ParseError(path + ": no FASTA records");
  return Dataset::from_sequences(std::move(seqs));
}

void write_vectors(const std::string& path, const std::vector<std::vector<double>>& rows) {
  std::ofstream out = open_output(path);
  for (const auto& row : rows) {
    for (std::size_t c = 0; c < row.size(); ++c) {
      if (c > 0) out << ',';
      out << format_cell(row[c]);
    }
    out << '\n';
  }
}

void write_sequences(const std::string& path, const std::vector<std::string>& sequences) {
  std::ofstream out = open_output(path);
  for (std::size_t i = 0; i < sequences.size(); ++i)
    out << ">seq" << i << '\n' << sequences[i] << '\n';
}

std::vector<std::vector<double>> generate_uniform_cube(std::size_t n, std::size_t dim,
                                                       std::uint64_t seed) {
  if (dim == 0) throw InvalidArgument("dim must be >= 1");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::vector<std::vector<double>> rows(n, std::vector<double>(dim));
  for (auto& row : rows)
    for (double& x : row) x = unit(rng);
  return rows;
}

std::vector<std::vector<double>> generate_clusters(std::size_t n, std::size_t dim,
                                                   std::size_t clusters, double sigma,
                                                   std::uint64_t seed) {
  if (dim == 0) throw InvalidArgument("dim must be >= 1");
  if (clusters == 0) throw InvalidArgument("clusters must be >= 1");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::normal_distribution<double> noise(0.0, sigma);
  std::vector<std::vector<double>> centers(clusters, std::vector<double>(dim));
  for (auto& center : centers)
    for (double& x : center) x = unit(rng);
  std::uniform_int_distribution<std::size_t> pick(0, clusters - 1);
  std::vector<std::vector<double>> rows(n, std::vector<double>(dim));
  for (auto& row : rows) {
    const std::vector<double>& center = centers[pick(rng)];
    for (std::size_t j = 0; j < dim; ++j) row[j] = center[j] + noise(rng);
  }
  return rows;
}

std::vector<std::vector<double>> generate_sphere(std::size_t n, std::size_t dim,
                                                 std::uint64_t seed) {
  if (dim == 0) throw InvalidArgument("dim must be >= 1");
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::vector<std::vector<double>> rows(n, std::vector<double>(dim));
  for (auto& row : rows) {
    double norm_sq = 0.0;
    do {
      norm_sq = 0.0;
      for (double& x : row) {
        x = gauss(rng);
        norm_sq += x * x;
      }
    } while (norm_sq == 0.0);
    const double norm = std::sqrt(norm_sq);
    for (double& x : row) x /= norm;
  }
  return rows;
}

std::vector<std::string> generate_sequences(std::size_t n, std::size_t min_length,
                                            std::size_t max_length, std::uint64_t seed) {
  if (min_length == 0 || max_length < min_length)
    throw InvalidArgument("need 1 <= min_length <= max_length");
  static const char kAlphabet[] = "ACDEFGHIKLMNPQRSTVWY";
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<std::size_t> length(min_length, max_length);
  std::uniform_int_distribution<std::size_t> letter(0, sizeof(kAlphabet) - 2);
  std::vector<std::string> seqs(n);
  for (auto& s : seqs) {
    s.resize(length(rng));
    for (char& ch : s) ch = kAlphabet[letter(rng)];
  }
  return seqs;
}

}  // namespace fastmks
