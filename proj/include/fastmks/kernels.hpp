#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "fastmks/errors.hpp"

namespace fastmks {

// Counts kernel evaluations. Every evaluation routed through Kernel::eval
// ticks it exactly once; with cached self-kernels an induced distance costs
// exactly one tick. Linear scan over n points costs exactly n ticks, which is
// the baseline all speedups are measured against.
struct EvalCounter {
  std::uint64_t count = 0;
  void tick() { ++count; }
};

// Sparse p-gram profile of a byte string: (gram, count) pairs sorted by gram.
// self_dot caches the profile's dot product with itself.
struct PgramTable {
  std::vector<std::pair<std::string, double>> grams;
  double self_dot = 0.0;
};

PgramTable build_pgram_table(const std::string& seq, int p);
double pgram_dot(const PgramTable& x, const PgramTable& y);

// Non-owning view of one point. Exactly one of vec/seq is set; grams is
// attached when a p-spectrum kernel has been prepared for the owning dataset.
struct PointRef {
  const std::vector<double>* vec = nullptr;
  const std::string* seq = nullptr;
  const PgramTable* grams = nullptr;
};

enum class KernelKind {
  Linear,
  Polynomial,
  Cosine,
  Gaussian,
  HyperbolicTangent,
  PSpectrum,
};

// Mercer kernel (hyperbolic tangent only conditionally so; a failed metric
// check surfaces as NotPositiveSemidefinite from induced_distance).
class Kernel {
 public:
  Kernel() = default;  // linear

  static Kernel linear();
  static Kernel polynomial(int degree, double offset);
  static Kernel cosine();
  static Kernel gaussian(double bandwidth);
  static Kernel hyperbolic_tangent(double scale, double offset);
  static Kernel p_spectrum(int p);

  // Spec strings: "linear", "polynomial:d=10,c=1", "cosine",
  // "gaussian:sigma=1", "tanh:s=1,c=0", "pspectrum:p=3".
  // parse(spec()) round-trips; unknown names raise InvalidArgument listing
  // the valid ones.
  static Kernel parse(const std::string& spec);
  std::string spec() const;

  KernelKind kind() const { return kind_; }
  // True exactly for the kernels with K(x,x) = 1 for every point: cosine and
  // gaussian. Enables the tighter unit-sphere prune bound.
  bool normalized() const {
    return kind_ == KernelKind::Cosine || kind_ == KernelKind::Gaussian;
  }
  bool string_domain() const { return kind_ == KernelKind::PSpectrum; }
  int pgram_length() const { return p_; }

  // One counter tick per call. Symmetric bit-for-bit: eval(x,y) and eval(y,x)
  // run the identical accumulation order.
  double eval(const PointRef& x, const PointRef& y, EvalCounter& counter) const;

 private:
  KernelKind kind_ = KernelKind::Linear;
  int degree_ = 1;
  double offset_ = 0.0;
  double bandwidth_ = 1.0;
  double scale_ = 1.0;
  int p_ = 3;
};

// Immutable point collection, either dense vectors or byte strings. prepare()
// attaches what a kernel needs (p-gram tables, self-kernel cache); after that
// the dataset is safe for concurrent readers.
class Dataset {
 public:
  Dataset() = default;

  // Rows must be non-empty, rectangular and finite.
  static Dataset from_vectors(std::vector<std::vector<double>> rows);
  static Dataset from_sequences(std::vector<std::string> seqs);

  bool string_domain() const { return string_domain_; }
  std::size_t size() const {
    return string_domain_ ? sequences_.size() : vectors_.size();
  }
  std::size_t dimension() const { return dimension_; }

  const std::vector<double>& vector_at(std::size_t i) const { return vectors_[i]; }
  const std::string& sequence_at(std::size_t i) const { return sequences_[i]; }
  PointRef point(std::size_t i) const;

  // Builds p-gram tables when the kernel needs them. No counter ticks; gram
  // counting is preprocessing, not kernel evaluation.
  void prepare_grams(const Kernel& kernel);
  // prepare_grams + self-kernel cache: exactly size() counter ticks.
  void prepare(const Kernel& kernel, EvalCounter& counter);

  bool prepared() const { return prepared_; }
  double self_kernel(std::size_t i) const { return self_kernels_[i]; }

  // FNV-1a over the raw content; used to bind persisted indexes to the data
  // they were built from.
  std::uint64_t fingerprint() const { return fingerprint_; }

 private:
  std::vector<std::vector<double>> vectors_;
  std::vector<std::string> sequences_;
  std::size_t dimension_ = 0;
  bool string_domain_ = false;
  int pgram_p_ = 0;
  std::vector<PgramTable> pgrams_;
  std::vector<double> self_kernels_;
  bool prepared_ = false;
  std::uint64_t fingerprint_ = 0;
};

// Owning wrapper for a query point that is not part of a Dataset.
class QueryPoint {
 public:
  static QueryPoint vector(std::vector<double> v);
  static QueryPoint sequence(std::string s, const Kernel& kernel);
  PointRef ref() const;

 private:
  std::vector<double> vec_;
  std::string seq_;
  PgramTable grams_;
  bool string_domain_ = false;
  bool has_grams_ = false;
};

// d_K(x,y) = sqrt(K(x,x) + K(y,y) - 2 K(x,y)) between two dataset points,
// using the self-kernel cache, so it costs exactly one counter tick.
// Radicands in [-1e-9, 0) clamp to 0; below that raises
// NotPositiveSemidefinite.
double induced_distance(const Kernel& kernel, const Dataset& data,
                        std::size_t i, std::size_t j, EvalCounter& counter);

}  // namespace fastmks
