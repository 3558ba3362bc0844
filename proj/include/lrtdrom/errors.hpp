#pragma once

#include <stdexcept>
#include <string>

namespace lrtdrom {

// All library failures derive from Error so callers can catch one type.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct GeometryError : Error { using Error::Error; };
struct AssemblyError : Error { using Error::Error; };
struct DomainError : Error { using Error::Error; };
struct SolverError : Error { using Error::Error; };
struct ConfigError : Error { using Error::Error; };
struct FormatError : Error { using Error::Error; };
struct DimensionError : Error { using Error::Error; };
struct BudgetError : Error { using Error::Error; };

}  // namespace lrtdrom
