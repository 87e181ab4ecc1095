#pragma once

#include <stdexcept>
#include <string>

namespace gmgan {

// Error taxonomy shared by every module. The CLI catches Error and turns it
// into a one-line diagnostic plus a nonzero exit code.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Tensor/layer shape disagreements.
struct DimError : Error {
  using Error::Error;
};

// NaN/Inf showed up where finite values are required, or a matrix that must
// be positive definite is not.
struct NumericError : Error {
  using Error::Error;
};

// API misuse: consuming a trace twice, stepping without gradients, etc.
struct UsageError : Error {
  using Error::Error;
};

// Invalid argument values (out-of-range sizes, bad config keys, ...).
struct ParamError : Error {
  using Error::Error;
};

// Malformed files: checkpoints, IDX containers, config files.
struct FormatError : Error {
  using Error::Error;
};

// Filesystem failures.
struct IoError : Error {
  using Error::Error;
};

// Operation applied to a data modality it is not defined for.
struct ModalityError : Error {
  using Error::Error;
};

}  // namespace gmgan
