#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace ambiprobe {

// Base of every error thrown by the library. The CLI maps the category onto
// an exit code, so each subclass picks one.
class Error : public std::runtime_error {
 public:
  enum class Category { Data, Runtime };

  Error(Category category, const std::string& what)
      : std::runtime_error(what), category_(category) {}

  Category category() const noexcept { return category_; }

 private:
  Category category_;
};

#define AMBIPROBE_DEFINE_ERROR(Name, Cat)                          \
  class Name : public Error {                                      \
   public:                                                         \
    explicit Name(const std::string& what) : Error(Cat, what) {}   \
  }

// Shape mismatch between operands.
AMBIPROBE_DEFINE_ERROR(DimensionError, Category::Runtime);
// NaN/Inf where finite values are required.
AMBIPROBE_DEFINE_ERROR(NumericDomainError, Category::Runtime);
// Cosine similarity with a zero-norm argument.
AMBIPROBE_DEFINE_ERROR(UndefinedSimilarityError, Category::Runtime);
// Pearson correlation of a sample with zero variance.
AMBIPROBE_DEFINE_ERROR(UndefinedCorrelationError, Category::Runtime);
// Violated precondition of an API call.
AMBIPROBE_DEFINE_ERROR(ContractError, Category::Runtime);
// Loss became non-finite during training.
AMBIPROBE_DEFINE_ERROR(DivergenceError, Category::Runtime);
// Bad or empty user input.
AMBIPROBE_DEFINE_ERROR(InputError, Category::Data);
// Corrupt or truncated binary artifact.
AMBIPROBE_DEFINE_ERROR(IntegrityError, Category::Data);
// Artifact produced by a different checkpoint.
AMBIPROBE_DEFINE_ERROR(CompatibilityError, Category::Data);
// Invalid configuration.
AMBIPROBE_DEFINE_ERROR(ConfigError, Category::Data);
// Not enough candidates for negative sampling.
AMBIPROBE_DEFINE_ERROR(SamplingError, Category::Data);
// Dataset cannot be partitioned as requested.
AMBIPROBE_DEFINE_ERROR(SplitError, Category::Data);
// Filesystem failure.
AMBIPROBE_DEFINE_ERROR(IoError, Category::Runtime);

#undef AMBIPROBE_DEFINE_ERROR

// Parse failure carrying the 1-based line number of the offending input.
class ParseError : public Error {
 public:
  ParseError(std::size_t line, const std::string& what)
      : Error(Category::Data, "line " + std::to_string(line) + ": " + what),
        line_(line) {}

  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

}  // namespace ambiprobe
