#pragma once

#include <stdexcept>
#include <string>

namespace copilot {

/// Base of every error the engine raises. `kind()` is a stable machine name
/// used in structured error bodies and traces.
class Error : public std::runtime_error {
 public:
  Error(std::string kind, const std::string& what)
      : std::runtime_error(what), kind_(std::move(kind)) {}

  const std::string& kind() const noexcept { return kind_; }

 private:
  std::string kind_;
};

#define COPILOT_DEFINE_ERROR(Name)                                   \
  class Name : public Error {                                        \
   public:                                                           \
    explicit Name(const std::string& what) : Error(#Name, what) {}   \
  };

COPILOT_DEFINE_ERROR(ConfigError)
COPILOT_DEFINE_ERROR(FetchError)
COPILOT_DEFINE_ERROR(EmptyDocument)
COPILOT_DEFINE_ERROR(CorpusError)
COPILOT_DEFINE_ERROR(ProviderError)
COPILOT_DEFINE_ERROR(ProviderContractViolation)
COPILOT_DEFINE_ERROR(DimensionError)
COPILOT_DEFINE_ERROR(DegenerateVector)
COPILOT_DEFINE_ERROR(IndexFormatError)
COPILOT_DEFINE_ERROR(IndexNotBuilt)
COPILOT_DEFINE_ERROR(IndexBusy)
COPILOT_DEFINE_ERROR(ReplayMiss)
COPILOT_DEFINE_ERROR(ScriptGap)
COPILOT_DEFINE_ERROR(DatasetError)
COPILOT_DEFINE_ERROR(LeakageError)
COPILOT_DEFINE_ERROR(RangeError)
COPILOT_DEFINE_ERROR(EvalError)
COPILOT_DEFINE_ERROR(NotFound)

#undef COPILOT_DEFINE_ERROR

/// Remote model call failed after retries. Carries the endpoint name so the
/// service can surface it with a 502.
class GatewayError : public Error {
 public:
  GatewayError(std::string endpoint, const std::string& what)
      : Error("GatewayError", endpoint + ": " + what), endpoint_(std::move(endpoint)) {}

  const std::string& endpoint() const noexcept { return endpoint_; }

 private:
  std::string endpoint_;
};

}  // namespace copilot
