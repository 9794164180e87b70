#ifndef RELAYSIM_ERRORS_HPP
#define RELAYSIM_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace relaysim {

/// Root of the library's exception hierarchy.  Everything thrown on a
/// well-defined failure path derives from Error; plain std exceptions are
/// reserved for precondition violations (programming mistakes).
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

/// Problems with user-supplied inputs: config files, model files, CSV files,
/// malformed datasets.  Command-line tools map these to exit code 2.
class InputError : public Error {
 public:
  using Error::Error;
};

/// Numerical or solver failures on otherwise well-formed inputs.
/// Command-line tools map these to exit code 3.
class NumericError : public Error {
 public:
  using Error::Error;
};

// --- input-side failures -------------------------------------------------

class ConfigError : public InputError {
 public:
  using InputError::InputError;
};

class ModelFormatError : public InputError {
 public:
  using InputError::InputError;
};

class CsvFormatError : public InputError {
 public:
  using InputError::InputError;
};

/// Training requires a minimum number of samples to make a train/validation
/// split meaningful.
class DatasetTooSmall : public InputError {
 public:
  using InputError::InputError;
};

// --- signal-processing failures ------------------------------------------

/// Fewer samples supplied than one full cycle of the fundamental.
class InsufficientSamples : public NumericError {
 public:
  using NumericError::NumericError;
};

/// Sample rate is not a usable integer multiple of the fundamental.
class InvalidRate : public NumericError {
 public:
  using NumericError::NumericError;
};

// --- network / solver failures --------------------------------------------

/// The nodal admittance matrix could not be factorized.
class SingularNetwork : public NumericError {
 public:
  using NumericError::NumericError;
};

/// The junction bus has no outgoing line sections to scan for.
class NoRemoteLines : public NumericError {
 public:
  using NumericError::NumericError;
};

/// Fixed-point iteration on the in-feed current failed to settle.
class NoConvergence : public NumericError {
 public:
  using NumericError::NumericError;
};

/// The single-loop fault equation has a vanishing series impedance.
class DegenerateLoop : public NumericError {
 public:
  using NumericError::NumericError;
};

/// Cannot form an apparent impedance because the compensated loop current
/// is (numerically) zero.
class ZeroLoopCurrent : public NumericError {
 public:
  using NumericError::NumericError;
};

/// Cannot form the in-feed factor because the relay-side current is zero.
class ZeroRelayCurrent : public NumericError {
 public:
  using NumericError::NumericError;
};

/// Wind-farm current injection is undefined at zero terminal voltage.
class ZeroVoltage : public NumericError {
 public:
  using NumericError::NumericError;
};

/// In-feed factor magnitude left the trusted band for adaptive resetting.
class KOutOfRange : public NumericError {
 public:
  using NumericError::NumericError;
};

/// Zone reaches must stay strictly nested (|Z1| < |Z2| < |Z3|).
class NestingViolation : public NumericError {
 public:
  using NumericError::NumericError;
};

/// A zone-2 rule needs at least one remote line to scan.
class EmptyRemotes : public NumericError {
 public:
  using NumericError::NumericError;
};

/// Gradient-descent training produced non-finite parameters or loss.
class Diverged : public NumericError {
 public:
  using NumericError::NumericError;
};

}  // namespace relaysim

#endif  // RELAYSIM_ERRORS_HPP
