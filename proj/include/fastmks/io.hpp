#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "fastmks/kernels.hpp"

namespace fastmks {

// Delimiter (comma or tab) is detected from the first line; a first row with
// any non-numeric cell is treated as a header and skipped.
Dataset load_vectors(const std::string& path);

// FASTA: '>' header lines start a record, sequence lines are concatenated and
// uppercased.
Dataset load_sequences(const std::string& path);

// Emits the shortest decimal form of each value that parses back to the same
// bits, so a written file reloads exactly.
void write_vectors(const std::string& path, const std::vector<std::vector<double>>& rows);
void write_sequences(const std::string& path, const std::vector<std::string>& sequences);

std::vector<std::vector<double>> generate_uniform_cube(std::size_t n, std::size_t dim,
                                                       std::uint64_t seed);
std::vector<std::vector<double>> generate_clusters(std::size_t n, std::size_t dim,
                                                   std::size_t clusters, double sigma,
                                                   std::uint64_t seed);
std::vector<std::vector<double>> generate_sphere(std::size_t n, std::size_t dim,
                                                 std::uint64_t seed);
std::vector<std::string> generate_sequences(std::size_t n, std::size_t min_length,
                                            std::size_t max_length, std::uint64_t seed);

}  // namespace fastmks
