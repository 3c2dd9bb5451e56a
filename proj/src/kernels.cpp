#include "fastmks/kernels.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstring>
#include <map>
#include <sstream>

namespace fastmks {

namespace {

double dot(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

double squared_distance(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i];
    s += d * d;
  }
  return s;
}

// Integer power by repeated multiplication; deterministic across platforms,
// unlike std::pow for integral exponents.
double pow_int(double base, int exponent) {
  double r = 1.0;
  for (int i = 0; i < exponent; ++i) r *= base;
  return r;
}

void require_vectors(const PointRef& x, const PointRef& y, const char* kernel) {
  if (x.vec == nullptr || y.vec == nullptr)
    throw KernelDomainError(std::string(kernel) + " kernel requires vector points");
  if (x.vec->size() != y.vec->size())
    throw KernelDomainError(std::string(kernel) + " kernel: dimension mismatch");
}

double parse_number(const std::string& s, const std::string& spec) {
  try {
    std::size_t used = 0;
    const double v = std::stod(s, &used);
    if (used != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw InvalidArgument("kernel spec '" + spec + "': bad number '" + s + "'");
  }
}

int parse_int(const std::string& s, const std::string& spec) {
  const double v = parse_number(s, spec);
  const int i = static_cast<int>(v);
  if (static_cast<double>(i) != v)
    throw InvalidArgument("kernel spec '" + spec + "': '" + s + "' is not an integer");
  return i;
}

// Shortest decimal form that round-trips, for canonical spec strings.
std::string format_number(double v) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

std::uint64_t fnv1a_bytes(std::uint64_t h, const void* data, std::size_t len) {
  const auto* p = static_cast<const unsigned char*>(data);
  for (std::size_t i = 0; i < len; ++i) {
    h ^= p[i];
    h *= 0x100000001b3ull;
  }
  return h;
}

}  // namespace

PgramTable build_pgram_table(const std::string& seq, int p) {
  PgramTable t;
  if (p <= 0) throw InvalidArgument("p-spectrum length must be positive");
  if (seq.size() < static_cast<std::size_t>(p)) return t;  // empty profile
  std::map<std::string, double> counts;
  for (std::size_t i = 0; i + p <= seq.size(); ++i)
    counts[seq.substr(i, static_cast<std::size_t>(p))] += 1.0;
  t.grams.assign(counts.begin(), counts.end());
  for (const auto& [gram, c] : t.grams) t.self_dot += c * c;
  return t;
}

double pgram_dot(const PgramTable& x, const PgramTable& y) {
  double s = 0.0;
  auto ix = x.grams.begin();
  auto iy = y.grams.begin();
  while (ix != x.grams.end() && iy != y.grams.end()) {
    if (ix->first < iy->first) {
      ++ix;
    } else if (iy->first < ix->first) {
      ++iy;
    } else {
      s += ix->second * iy->second;
      ++ix;
      ++iy;
    }
  }
  return s;
}

Kernel Kernel::linear() { return Kernel(); }

Kernel Kernel::polynomial(int degree, double offset) {
  if (degree < 1) throw InvalidArgument("polynomial degree must be >= 1");
  Kernel k;
  k.kind_ = KernelKind::Polynomial;
  k.degree_ = degree;
  k.offset_ = offset;
  return k;
}

Kernel Kernel::cosine() {
  Kernel k;
  k.kind_ = KernelKind::Cosine;
  return k;
}

Kernel Kernel::gaussian(double bandwidth) {
  if (!(bandwidth > 0.0)) throw InvalidArgument("gaussian bandwidth must be > 0");
  Kernel k;
  k.kind_ = KernelKind::Gaussian;
  k.bandwidth_ = bandwidth;
  return k;
}

Kernel Kernel::hyperbolic_tangent(double scale, double offset) {
  Kernel k;
  k.kind_ = KernelKind::HyperbolicTangent;
  k.scale_ = scale;
  k.offset_ = offset;
  return k;
}

Kernel Kernel::p_spectrum(int p) {
  if (p < 1) throw InvalidArgument("p-spectrum length must be >= 1");
  Kernel k;
  k.kind_ = KernelKind::PSpectrum;
  k.p_ = p;
  return k;
}

Kernel Kernel::parse(const std::string& spec) {
  std::string name = spec;
  std::string args;
  if (const auto colon = spec.find(':'); colon != std::string::npos) {
    name = spec.substr(0, colon);
    args = spec.substr(colon + 1);
  }
  std::map<std::string, std::string> kv;
  if (!args.empty()) {
    std::stringstream ss(args);
    std::string item;
    while (std::getline(ss, item, ',')) {
      const auto eq = item.find('=');
      if (eq == std::string::npos)
        throw InvalidArgument("kernel spec '" + spec + "': expected key=value, got '" + item + "'");
      kv[item.substr(0, eq)] = item.substr(eq + 1);
    }
  }
  auto take = [&](const char* key, const char* fallback) {
    auto it = kv.find(key);
    std::string v = it == kv.end() ? std::string(fallback) : it->second;
    if (it != kv.end()) kv.erase(it);
    return v;
  };
  Kernel k;
  if (name == "linear") {
    k = linear();
  } else if (name == "polynomial") {
    k = polynomial(parse_int(take("d", "2"), spec), parse_number(take("c", "1"), spec));
  } else if (name == "cosine") {
    k = cosine();
  } else if (name == "gaussian") {
    k = gaussian(parse_number(take("sigma", "1"), spec));
  } else if (name == "tanh") {
    k = hyperbolic_tangent(parse_number(take("s", "1"), spec), parse_number(take("c", "0"), spec));
  } else if (name == "pspectrum") {
    k = p_spectrum(parse_int(take("p", "3"), spec));
  } else {
    throw InvalidArgument(
        "unknown kernel '" + name +
        "'; valid: linear, polynomial, cosine, gaussian, tanh, pspectrum");
  }
  if (!kv.empty())
    throw InvalidArgument("kernel spec '" + spec + "': unknown parameter '" + kv.begin()->first + "'");
  return k;
}

std::string Kernel::spec() const {
  switch (kind_) {
    case KernelKind::Linear:
      return "linear";
    case KernelKind::Polynomial:
      return "polynomial:d=" + std::to_string(degree_) + ",c=" + format_number(offset_);
    case KernelKind::Cosine:
      return "cosine";
    case KernelKind::Gaussian:
      return "gaussian:sigma=" + format_number(bandwidth_);
    case KernelKind::HyperbolicTangent:
      return "tanh:s=" + format_number(scale_) + ",c=" + format_number(offset_);
    case KernelKind::PSpectrum:
      return "pspectrum:p=" + std::to_string(p_);
  }
  return "linear";
}

double Kernel::eval(const PointRef& x, const PointRef& y, EvalCounter& counter) const {
  counter.tick();
  switch (kind_) {
    case KernelKind::Linear:
      require_vectors(x, y, "linear");
      return dot(*x.vec, *y.vec);
    case KernelKind::Polynomial:
      require_vectors(x, y, "polynomial");
      return pow_int(dot(*x.vec, *y.vec) + offset_, degree_);
    case KernelKind::Cosine: {
      require_vectors(x, y, "cosine");
      const double nx = std::sqrt(dot(*x.vec, *x.vec));
      const double ny = std::sqrt(dot(*y.vec, *y.vec));
      if (nx == 0.0 || ny == 0.0)
        throw KernelDomainError("cosine kernel undefined for the zero vector");
      return dot(*x.vec, *y.vec) / (nx * ny);
    }
    case KernelKind::Gaussian:
      require_vectors(x, y, "gaussian");
      return std::exp(-squared_distance(*x.vec, *y.vec) / (2.0 * bandwidth_ * bandwidth_));
    case KernelKind::HyperbolicTangent:
      require_vectors(x, y, "tanh");
      return std::tanh(scale_ * dot(*x.vec, *y.vec) + offset_);
    case KernelKind::PSpectrum: {
      if (x.seq == nullptr || y.seq == nullptr)
        throw KernelDomainError("pspectrum kernel requires string points");
      PgramTable tmpx, tmpy;
      const PgramTable* tx = x.grams;
      const PgramTable* ty = y.grams;
      if (tx == nullptr) {
        tmpx = build_pgram_table(*x.seq, p_);
        tx = &tmpx;
      }
      if (ty == nullptr) {
        tmpy = build_pgram_table(*y.seq, p_);
        ty = &tmpy;
      }
      // The merge-join walks both tables in gram order, so the accumulation
      // sequence (and hence the bits) is the same for (x,y) and (y,x).
      return pgram_dot(*tx, *ty);
    }
  }
  throw InvalidArgument("corrupt kernel kind");
}

Dataset Dataset::from_vectors(std::vector<std::vector<double>> rows) {
  if (rows.empty()) throw InvalidArgument("dataset must contain at least one point");
  Dataset d;
  d.dimension_ = rows.front().size();
  if (d.dimension_ == 0) throw InvalidArgument("points must have at least one coordinate");
  for (std::size_t r = 0; r < rows.size(); ++r) {
    if (rows[r].size() != d.dimension_)
      throw InvalidArgument("row " + std::to_string(r) + ": expected " +
                            std::to_string(d.dimension_) + " coordinates, got " +
                            std::to_string(rows[r].size()));
    for (const double v : rows[r])
      if (!std::isfinite(v))
        throw InvalidArgument("row " + std::to_string(r) + ": non-finite coordinate");
  }
  d.vectors_ = std::move(rows);
  std::uint64_t h = 0xcbf29ce484222325ull;
  const char tag = 'V';
  h = fnv1a_bytes(h, &tag, 1);
  const std::uint64_t n = d.vectors_.size(), dim = d.dimension_;
  h = fnv1a_bytes(h, &n, sizeof n);
  h = fnv1a_bytes(h, &dim, sizeof dim);
  for (const auto& row : d.vectors_)
    h = fnv1a_bytes(h, row.data(), row.size() * sizeof(double));
  d.fingerprint_ = h;
  return d;
}

Dataset Dataset::from_sequences(std::vector<std::string> seqs) {
  if (seqs.empty()) throw InvalidArgument("dataset must contain at least one sequence");
  for (std::size_t i = 0; i < seqs.size(); ++i)
    if (seqs[i].empty())
      throw InvalidArgument("sequence " + std::to_string(i) + " is empty");
  Dataset d;
  d.string_domain_ = true;
  d.sequences_ = std::move(seqs);
  std::uint64_t h = 0xcbf29ce484222325ull;
  const char tag = 'S';
  h = fnv1a_bytes(h, &tag, 1);
  const std::uint64_t n = d.sequences_.size();
  h = fnv1a_bytes(h, &n, sizeof n);
  for (const auto& s : d.sequences_) {
    const std::uint64_t len = s.size();
    h = fnv1a_bytes(h, &len, sizeof len);
    h = fnv1a_bytes(h, s.data(), s.size());
  }
  d.fingerprint_ = h;
  return d;
}

PointRef Dataset::point(std::size_t i) const {
  PointRef r;
  if (string_domain_) {
    r.seq = &sequences_[i];
    if (!pgrams_.empty()) r.grams = &pgrams_[i];
  } else {
    r.vec = &vectors_[i];
  }
  return r;
}

void Dataset::prepare_grams(const Kernel& kernel) {
  if (!kernel.string_domain()) return;
  if (!string_domain_)
    throw KernelDomainError("pspectrum kernel requires a string dataset");
  const int p = kernel.pgram_length();
  if (!pgrams_.empty() && pgram_p_ == p) return;
  pgrams_.clear();
  pgrams_.reserve(sequences_.size());
  for (const auto& s : sequences_) pgrams_.push_back(build_pgram_table(s, p));
  pgram_p_ = p;
}

void Dataset::prepare(const Kernel& kernel, EvalCounter& counter) {
  if (!kernel.string_domain() && string_domain_)
    throw KernelDomainError("vector kernel applied to a string dataset");
  prepare_grams(kernel);
  self_kernels_.resize(size());
  for (std::size_t i = 0; i < size(); ++i)
    self_kernels_[i] = kernel.eval(point(i), point(i), counter);
  prepared_ = true;
}

QueryPoint QueryPoint::vector(std::vector<double> v) {
  QueryPoint q;
  q.vec_ = std::move(v);
  return q;
}

QueryPoint QueryPoint::sequence(std::string s, const Kernel& kernel) {
  QueryPoint q;
  q.string_domain_ = true;
  q.seq_ = std::move(s);
  if (kernel.string_domain()) {
    q.grams_ = build_pgram_table(q.seq_, kernel.pgram_length());
    q.has_grams_ = true;
  }
  return q;
}

PointRef QueryPoint::ref() const {
  PointRef r;
  if (string_domain_) {
    r.seq = &seq_;
    if (has_grams_) r.grams = &grams_;
  } else {
    r.vec = &vec_;
  }
  return r;
}

double induced_distance(const Kernel& kernel, const Dataset& data,
                        std::size_t i, std::size_t j, EvalCounter& counter) {
  if (!data.prepared())
    throw InvalidArgument("induced_distance requires a prepared dataset (self-kernel cache)");
  const double kij = kernel.eval(data.point(i), data.point(j), counter);
  const double radicand = data.self_kernel(i) + data.self_kernel(j) - 2.0 * kij;
  if (radicand < -1e-9)
    throw NotPositiveSemidefinite(
        "kernel is not positive semidefinite on this data: d^2(" + std::to_string(i) +
        "," + std::to_string(j) + ") = " + std::to_string(radicand));
  return radicand <= 0.0 ? 0.0 : std::sqrt(radicand);
}

}  // namespace fastmks
