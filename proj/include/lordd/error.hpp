#pragma once

#include <stdexcept>
#include <string>

namespace lordd {

// Root of every error the toolkit raises. Subclasses name the failing stage
// so callers (the CLI in particular) can map them to exit codes.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class IoError : public Error { using Error::Error; };
class ParseError : public Error { using Error::Error; };
class ValidationError : public Error { using Error::Error; };
class MaskingError : public Error { using Error::Error; };
class TemplateError : public Error { using Error::Error; };
class TokenizationError : public Error { using Error::Error; };
class ContextError : public Error { using Error::Error; };
class ConfigError : public Error { using Error::Error; };
class ArgumentError : public Error { using Error::Error; };
class NumericError : public Error { using Error::Error; };

}  // namespace lordd
