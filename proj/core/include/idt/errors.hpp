#pragma once

#include <stdexcept>
#include <string>

namespace idt {

/// Root of the library's error hierarchy.
class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

// Distribution construction and queries.
class WeightSumError : public Error { public: using Error::Error; };
class PosteriorRangeError : public Error { public: using Error::Error; };
class GeometryError : public Error { public: using Error::Error; };
class OffSupportError : public Error { public: using Error::Error; };
class DegenerateCostError : public Error { public: using Error::Error; };

// Scores, hypothesis classes, families.
class UnsupportedScoreError : public Error { public: using Error::Error; };
class NonMonotoneError : public Error { public: using Error::Error; };
class FamilyTooLargeError : public Error { public: using Error::Error; };

// Estimation.
class EmptyLogError : public Error { public: using Error::Error; };
class InconsistentLogError : public Error { public: using Error::Error; };
class NoConsistentClassError : public Error { public: using Error::Error; };
class MissingAttributeError : public Error { public: using Error::Error; };

// Construction factories and agent specs.
class ParameterRangeError : public Error { public: using Error::Error; };

// File formats and CLI configuration.
class ParseError : public Error { public: using Error::Error; };

}  // namespace idt
