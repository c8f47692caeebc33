#pragma once

#include <stdexcept>
#include <string>

#include "corrspec/corrspec.h"

namespace cli {

enum ExitCode : int { kSuccess = 0, kInternal = 1, kConfigError = 2, kNotIdentifiable = 3, kIoError = 4 };

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct StatisticalError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct IoError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct InternalError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Translate a failing library call into the matching CLI error.
inline void check(csp_status status, const std::string &context) {
  if (status == CSP_OK)
    return;
  const std::string what = context + ": " + csp_last_error();
  switch (status) {
  case CSP_INVALID_ARGUMENT: throw ConfigError(what);
  case CSP_UNMEASURABLE: throw StatisticalError(what);
  default: throw InternalError(what);
  }
}

template <class T, void (*Destroy)(T *)> class Handle {
public:
  Handle() = default;
  Handle(const Handle &) = delete;
  Handle &operator=(const Handle &) = delete;
  ~Handle() { Destroy(ptr_); }

  T *get() const { return ptr_; }
  T **out() {
    Destroy(ptr_);
    ptr_ = nullptr;
    return &ptr_;
  }

private:
  T *ptr_ = nullptr;
};

using Dataset = Handle<csp_fringe_dataset, csp_fringe_dataset_destroy>;
using AllanResult = Handle<csp_allan_result, csp_allan_result_destroy>;
using DetectionModel = Handle<csp_detection_model, csp_detection_model_destroy>;
using DetectionBenchmark = Handle<csp_detection_benchmark, csp_detection_benchmark_destroy>;
using RemoteRun = Handle<csp_remote_run, csp_remote_run_destroy>;

} // namespace cli
