#pragma once

#include <optional>
#include <string>

#include "ldq/dist.hpp"

namespace ldq {

struct ClassSplit {
  double p;  // probability an arrival is class 1
  DistributionSpec class1;
  DistributionSpec class2;
};

/// GI/GI/1 input: one arrival law and either a service law or a two-class
/// split. With a split, `service()` is the mixture p*B1 + (1-p)*B2.
class QueueModel {
 public:
  QueueModel(DistributionSpec arrival, DistributionSpec service)
      : arrival_(std::move(arrival)), service_(std::move(service)) {}

  QueueModel(DistributionSpec arrival, ClassSplit split)
      : arrival_(std::move(arrival)),
        service_(make_mixture({{split.p, split.class1}, {1.0 - split.p, split.class2}})),
        split_(std::move(split)) {
    detail::require(split_->p > 0.0 && split_->p < 1.0, "class-1 probability must lie in (0, 1)");
  }

  const DistributionSpec& arrival() const { return arrival_; }
  const DistributionSpec& service() const { return service_; }
  const std::optional<ClassSplit>& split() const { return split_; }

  double lambda() const { return 1.0 / mean(arrival_); }
  double rho() const { return mean(service_) / mean(arrival_); }

  bool stable() const { return rho() < 1.0; }

  /// P(B > A) > 0, decided from the support endpoints.
  bool has_delays() const { return upper_endpoint(service_) > lower_endpoint(arrival_); }

  void require_stable() const {
    if (!stable()) {
      throw Error(Errc::unstable, "load rho=" + std::to_string(rho()) + " is not below 1");
    }
  }

  void require_delays() const {
    if (!has_delays()) throw Error(Errc::no_delays, "service never exceeds an inter-arrival time");
  }

 private:
  DistributionSpec arrival_;
  DistributionSpec service_;
  std::optional<ClassSplit> split_;
};

}  // namespace ldq
