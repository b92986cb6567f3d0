#pragma once

#include <stdexcept>
#include <string>

namespace sylvinit {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Operand dimensions are incompatible.
class ShapeError : public Error {
public:
    using Error::Error;
};

/// A scalar argument is outside its admissible range.
class ParameterError : public Error {
public:
    using Error::Error;
};

class InsufficientDataError : public Error {
public:
    using Error::Error;
};

class LabelError : public Error {
public:
    using Error::Error;
};

/// Labels carry too little class structure (e.g. a single class for LDA).
class DegenerateLabelsError : public Error {
public:
    using Error::Error;
};

/// All-zero activations reached a layer that is being initialized.
class DegenerateActivationError : public Error {
public:
    using Error::Error;
};

class ConfigError : public Error {
public:
    using Error::Error;
};

class FormatError : public Error {
public:
    using Error::Error;
};

class IoError : public Error {
public:
    using Error::Error;
};

}  // namespace sylvinit
