#pragma once

#include <cstddef>
#include <limits>
#include <map>
#include <vector>

namespace hyzeno {

inline constexpr double kInfinity = std::numeric_limits<double>::infinity();

/// A point (t, j, k): ordinary time, jump count, Zeno index.
struct HybridTime {
  double t = 0.0;
  std::size_t j = 0;
  std::size_t k = 0;
};

/// The interval [t_start, t_end] x {j} x {k}. Only the final segment of a
/// domain may have t_end = +inf.
struct DomainSegment {
  double t_start = 0.0;
  double t_end = 0.0;
  std::size_t j = 0;
  std::size_t k = 0;

  bool unbounded() const { return t_end == kInfinity; }
  friend bool operator==(const DomainSegment&, const DomainSegment&) = default;
};

/// Segment of a classical (two-index) hybrid time domain.
struct ClassicalSegment {
  double t_start = 0.0;
  double t_end = 0.0;
  std::size_t j = 0;

  friend bool operator==(const ClassicalSegment&, const ClassicalSegment&) = default;
};

using ClassicalDomain = std::vector<ClassicalSegment>;

/// Checks the classical domain shape: jump indices 0, 1, 2, ... with shared
/// endpoints and nondecreasing times, unbounded only at the end.
bool is_valid_classical_domain(const ClassicalDomain& domain);

/// Componentwise suprema. sup_t is +inf when the last segment is unbounded;
/// sup_j and sup_zeno are finite for any materialized domain.
struct Suprema {
  double t = 0.0;
  std::size_t j = 0;
  std::size_t zeno = 0;

  friend bool operator==(const Suprema&, const Suprema&) = default;
};

/// How a level's completeness was established. Finite data cannot witness an
/// unbounded domain, so completeness is recorded from simulator certificates.
enum class LevelCompletion {
  None,           // truncated, nothing certified
  Zeno,           // geometric accumulation of jump times certified
  UnboundedFlow,  // flow reached the horizon while still in the flow set
};

class ExtendedHybridTimeDomain {
 public:
  ExtendedHybridTimeDomain() = default;

  /// Appends a segment, enforcing: same k -> j+1 starting at the previous
  /// end; next k -> j = 0 starting no earlier than the previous end.
  /// Throws Error(MonotonicityViolation).
  void append(const DomainSegment& seg);

  const std::vector<DomainSegment>& segments() const { return segments_; }
  bool empty() const { return segments_.empty(); }
  std::size_t size() const { return segments_.size(); }

  /// (0, 0, 0) for the empty domain.
  Suprema suprema() const;

  bool has_level(std::size_t k) const;
  std::vector<std::size_t> levels() const;

  /// Throws Error(UnknownLevel).
  void certify_level(std::size_t k, LevelCompletion completion);
  LevelCompletion completion(std::size_t k) const;

  /// An unbounded final segment or a completeness certificate. Throws UnknownLevel.
  bool is_complete(std::size_t k) const;

  /// Complete with finite sup_t, i.e. certified by the Zeno detector.
  bool is_zeno(std::size_t k) const;

  /// Drops k from the level-k segments. Throws UnknownLevel.
  ClassicalDomain project(std::size_t k) const;

  /// For every level k followed by level k+1: level k contains at least two
  /// jumps, its trailing flow intervals shrink, and the remaining gap to the
  /// start of level k+1 is no longer than the last interval.
  bool accumulation_consistent() const;

 private:
  std::vector<DomainSegment> segments_;
  std::map<std::size_t, LevelCompletion> completion_;
};

/// Functional form of ExtendedHybridTimeDomain::append.
ExtendedHybridTimeDomain append_segment(ExtendedHybridTimeDomain domain, const DomainSegment& seg);

}  // namespace hyzeno
