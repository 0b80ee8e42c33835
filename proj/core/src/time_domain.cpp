#include "hyzeno/time_domain.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/format.h>

#include "hyzeno/error.hpp"

namespace hyzeno {

bool is_valid_classical_domain(const ClassicalDomain& domain) {
  for (std::size_t i = 0; i < domain.size(); ++i) {
    const auto& s = domain[i];
    if (s.j != i) return false;
    if (!(s.t_start <= s.t_end) || s.t_start < 0.0) return false;
    if (s.t_end == kInfinity && i + 1 != domain.size()) return false;
    if (i > 0 && domain[i - 1].t_end != s.t_start) return false;
  }
  return true;
}

void ExtendedHybridTimeDomain::append(const DomainSegment& seg) {
  if (!(seg.t_start <= seg.t_end) || seg.t_start < 0.0 || std::isnan(seg.t_end)) {
    throw Error(ErrorCode::MonotonicityViolation,
                fmt::format("segment [{}, {}] is not a valid interval", seg.t_start, seg.t_end));
  }
  if (segments_.empty()) {
    if (seg.j != 0) {
      throw Error(ErrorCode::MonotonicityViolation, "first segment must have jump index 0");
    }
    segments_.push_back(seg);
    return;
  }
  const auto& last = segments_.back();
  if (last.unbounded()) {
    throw Error(ErrorCode::MonotonicityViolation, "cannot append after an unbounded segment");
  }
  if (seg.k == last.k) {
    if (seg.j != last.j + 1) {
      throw Error(ErrorCode::MonotonicityViolation,
                  fmt::format("jump index {} does not follow {}", seg.j, last.j));
    }
    if (seg.t_start != last.t_end) {
      throw Error(ErrorCode::MonotonicityViolation,
                  fmt::format("segment starts at {} but previous ends at {}", seg.t_start, last.t_end));
    }
  } else if (seg.k == last.k + 1) {
    if (seg.j != 0) {
      throw Error(ErrorCode::MonotonicityViolation, "new Zeno level must restart at j = 0");
    }
    if (seg.t_start < last.t_end) {
      throw Error(ErrorCode::MonotonicityViolation,
                  fmt::format("level {} starts at {} before level {} ends at {}", seg.k, seg.t_start,
                              last.k, last.t_end));
    }
  } else {
    throw Error(ErrorCode::MonotonicityViolation,
                fmt::format("Zeno index step {} -> {} is illegal", last.k, seg.k));
  }
  segments_.push_back(seg);
}

Suprema ExtendedHybridTimeDomain::suprema() const {
  Suprema s;
  for (const auto& seg : segments_) {
    s.t = std::max(s.t, seg.t_end);
    s.j = std::max(s.j, seg.j);
    s.zeno = std::max(s.zeno, seg.k);
  }
  return s;
}

bool ExtendedHybridTimeDomain::has_level(std::size_t k) const {
  return std::any_of(segments_.begin(), segments_.end(), [k](const auto& s) { return s.k == k; });
}

std::vector<std::size_t> ExtendedHybridTimeDomain::levels() const {
  std::vector<std::size_t> out;
  for (const auto& s : segments_) {
    if (out.empty() || out.back() != s.k) out.push_back(s.k);
  }
  return out;
}

void ExtendedHybridTimeDomain::certify_level(std::size_t k, LevelCompletion completion) {
  if (!has_level(k)) throw Error(ErrorCode::UnknownLevel, fmt::format("no level {}", k));
  completion_[k] = completion;
}

LevelCompletion ExtendedHybridTimeDomain::completion(std::size_t k) const {
  if (!has_level(k)) throw Error(ErrorCode::UnknownLevel, fmt::format("no level {}", k));
  auto it = completion_.find(k);
  return it == completion_.end() ? LevelCompletion::None : it->second;
}

bool ExtendedHybridTimeDomain::is_complete(std::size_t k) const {
  const auto level = project(k);
  if (level.back().t_end == kInfinity) return true;
  return completion(k) != LevelCompletion::None;
}

bool ExtendedHybridTimeDomain::is_zeno(std::size_t k) const {
  return is_complete(k) && completion(k) == LevelCompletion::Zeno;
}

ClassicalDomain ExtendedHybridTimeDomain::project(std::size_t k) const {
  ClassicalDomain out;
  for (const auto& s : segments_) {
    if (s.k == k) out.push_back({s.t_start, s.t_end, s.j});
  }
  if (out.empty()) throw Error(ErrorCode::UnknownLevel, fmt::format("no level {}", k));
  return out;
}

bool ExtendedHybridTimeDomain::accumulation_consistent() const {
  const auto ks = levels();
  for (std::size_t i = 0; i + 1 < ks.size(); ++i) {
    const auto level = project(ks[i]);
    if (level.size() < 3) return false;
    const double next_start = project(ks[i + 1]).front().t_start;
    // Trailing jump times t_1 < t_2 < ... and their gaps.
    std::vector<double> gaps;
    for (std::size_t s = 1; s < level.size(); ++s) gaps.push_back(level[s].t_end - level[s].t_start);
    // The very last segment is the zero-length post-jump stub; skip it.
    if (!gaps.empty() && gaps.back() == 0.0) gaps.pop_back();
    if (gaps.size() < 2) return false;
    const std::size_t tail = std::min<std::size_t>(gaps.size(), 4);
    for (std::size_t g = gaps.size() - tail + 1; g < gaps.size(); ++g) {
      if (gaps[g] > gaps[g - 1]) return false;
    }
    const double ratio = gaps.back() / gaps[gaps.size() - 2];
    if (!(ratio < 1.0)) return false;
    const double predicted = gaps.back() * ratio / (1.0 - ratio);
    const double remaining = next_start - level.back().t_end;
    if (remaining < 0.0 || remaining > 2.0 * predicted + 1e-12) return false;
  }
  return true;
}

ExtendedHybridTimeDomain append_segment(ExtendedHybridTimeDomain domain, const DomainSegment& seg) {
  domain.append(seg);
  return domain;
}

}  // namespace hyzeno
