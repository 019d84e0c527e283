#pragma once

// Conversion of EVITA and CVSS ratings into probabilities.

#include <stdexcept>
#include <type_traits>
#include <variant>

namespace defgraph {

/// EVITA attack-likelihood factors, each rated 0..3.
struct EvitaLikelihoodRating {
  int expertise = 0;
  int knowledge_of_target = 0;
  int window_of_opportunity = 0;
  int equipment = 0;

  bool operator==(const EvitaLikelihoodRating&) const = default;

  int sum() const { return expertise + knowledge_of_target + window_of_opportunity + equipment; }
};

/// EVITA impact factors. Levels 0..3 encode none, low, medium, high.
struct EvitaImpactRating {
  int safety = 0;
  int privacy = 0;
  int operational = 0;
  int financial = 0;

  bool operator==(const EvitaImpactRating&) const = default;

  int sum() const { return safety + privacy + operational + financial; }
};

/// CVSS scores on the 0..10 scale. The temporal score is the base score
/// after temporal adjustment and never exceeds it.
struct CvssRating {
  double base_score = 0.0;
  double temporal_score = 0.0;

  bool operator==(const CvssRating&) const = default;
};

/// Where a root node's prior came from.
using PriorRating = std::variant<EvitaLikelihoodRating, CvssRating>;

namespace detail {

inline bool is_level(int v) { return v >= 0 && v <= 3; }

}  // namespace detail

inline bool is_valid(const EvitaLikelihoodRating& r) {
  return detail::is_level(r.expertise) && detail::is_level(r.knowledge_of_target) &&
         detail::is_level(r.window_of_opportunity) && detail::is_level(r.equipment);
}

inline bool is_valid(const EvitaImpactRating& r) {
  return detail::is_level(r.safety) && detail::is_level(r.privacy) && detail::is_level(r.operational) &&
         detail::is_level(r.financial);
}

inline bool is_valid(const CvssRating& r) {
  return r.temporal_score >= 0.0 && r.temporal_score <= r.base_score && r.base_score <= 10.0;
}

inline bool is_valid(const PriorRating& r) {
  return std::visit([](const auto& v) { return is_valid(v); }, r);
}

/// Probability that the rated countermeasure element detects the attack:
/// the sum of the four factors over the maximum total of 12.
inline double evita_prior(const EvitaLikelihoodRating& rating) {
  if (!is_valid(rating)) throw std::invalid_argument("EVITA likelihood factors must lie in 0..3");
  return static_cast<double>(rating.sum()) / 12.0;
}

/// The temporal score scaled to [0,1]. The base score is kept for reporting.
inline double cvss_prior(const CvssRating& rating) {
  if (!is_valid(rating)) throw std::invalid_argument("CVSS scores need 0 <= temporal <= base <= 10");
  return rating.temporal_score / 10.0;
}

inline double impact_score(const EvitaImpactRating& rating) {
  if (!is_valid(rating)) throw std::invalid_argument("EVITA impact levels must lie in 0..3");
  return static_cast<double>(rating.sum()) / 12.0;
}

inline double prior_from(const PriorRating& rating) {
  return std::visit(
      [](const auto& r) -> double {
        if constexpr (std::is_same_v<std::decay_t<decltype(r)>, EvitaLikelihoodRating>) {
          return evita_prior(r);
        } else {
          return cvss_prior(r);
        }
      },
      rating);
}

}  // namespace defgraph
