#ifndef SONOSCOPE_ERRORS_H_
#define SONOSCOPE_ERRORS_H_

#include <stdexcept>
#include <string>

namespace sonoscope {

// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

#define SONOSCOPE_DEFINE_ERROR(Name)         \
  class Name : public Error {                \
   public:                                   \
    using Error::Error;                      \
  }

// Audio ingestion.
SONOSCOPE_DEFINE_ERROR(FormatError);
SONOSCOPE_DEFINE_ERROR(UnsupportedError);
SONOSCOPE_DEFINE_ERROR(EmptyInputError);
SONOSCOPE_DEFINE_ERROR(InsufficientDataError);
SONOSCOPE_DEFINE_ERROR(IoError);

// Feature extraction and stacking.
SONOSCOPE_DEFINE_ERROR(TooShortError);
SONOSCOPE_DEFINE_ERROR(RangeError);
SONOSCOPE_DEFINE_ERROR(SizeError);
SONOSCOPE_DEFINE_ERROR(SelectionError);

// Network.
SONOSCOPE_DEFINE_ERROR(ShapeError);
SONOSCOPE_DEFINE_ERROR(ConfigError);

// Metrics.
SONOSCOPE_DEFINE_ERROR(LabelError);
SONOSCOPE_DEFINE_ERROR(EmptyError);
SONOSCOPE_DEFINE_ERROR(DegenerateError);

#undef SONOSCOPE_DEFINE_ERROR

// Raised when a training loss becomes non-finite.
class DivergenceError : public Error {
 public:
  DivergenceError(int epoch, const std::string& what)
      : Error(what), epoch_(epoch) {}
  int epoch() const { return epoch_; }

 private:
  int epoch_;
};

}  // namespace sonoscope

#endif  // SONOSCOPE_ERRORS_H_
