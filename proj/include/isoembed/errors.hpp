#pragma once
#include <stdexcept>
#include <string>

namespace isoembed {

// Base for every failure raised by a pipeline stage. `property` names the
// geometric property that could not be established.
class Error : public std::runtime_error {
 public:
  Error(std::string stage, std::string property, const std::string& what)
      : std::runtime_error(what), stage_(std::move(stage)), property_(std::move(property)) {}
  const std::string& stage() const { return stage_; }
  const std::string& property() const { return property_; }
  virtual std::string kind() const { return "Error"; }

 private:
  std::string stage_, property_;
};

#define ISOEMBED_ERROR(Name, Stage, Property)                              \
  class Name : public Error {                                              \
   public:                                                                 \
    explicit Name(const std::string& what) : Error(Stage, Property, what) {} \
    std::string kind() const override { return #Name; }                    \
  };

ISOEMBED_ERROR(ConfigError, "config", "configuration schema")
ISOEMBED_ERROR(ShellCapError, "lattice", "finite translate shell")
ISOEMBED_ERROR(CoverageError, "fields", "charts cover the fundamental domain")
ISOEMBED_ERROR(NotShortError, "metric", "g - du.du positive-definite")
ISOEMBED_ERROR(ScalingError, "metric", "short after scaling")
ISOEMBED_ERROR(GenericityError, "freemap", "projection direction outside the degenerate set")
ISOEMBED_ERROR(PositivityError, "decompose", "positive coefficients on the chart")
ISOEMBED_ERROR(RankError, "perturb", "free map (full row rank of first and second derivatives)")
ISOEMBED_ERROR(NonContractionError, "perturb", "fixed-point contraction")
ISOEMBED_ERROR(BudgetError, "perturb", "|u_eps - u_0| <= eps")
ISOEMBED_ERROR(StagingExhaustedError, "perturb", "du.du = dw.dw + h on the chart")
ISOEMBED_ERROR(DimensionError, "pipeline", "q >= s_n + n + 5")
ISOEMBED_ERROR(FormatError, "io", "artifact schema")

#undef ISOEMBED_ERROR

}  // namespace isoembed
