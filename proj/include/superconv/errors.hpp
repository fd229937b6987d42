#pragma once

#include <cstddef>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>

namespace superconv {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Shapes that do not fit together (dimension or order mismatch, index out of range).
class StructuralError : public Error {
public:
  using Error::Error;
};

/// Input that violates a documented precondition (non-Hermitian matrix, bad parameter).
class ValidationError : public Error {
public:
  using Error::Error;
};

/// Model file that cannot be parsed or does not match the schema.
class ParseError : public Error {
public:
  using Error::Error;
};

/// An iterative routine failed to reach its stopping criterion.
class NumericalError : public Error {
public:
  using Error::Error;
};

/// A computed quantity disagrees with an identity it must satisfy by construction.
class ConsistencyError : public Error {
public:
  using Error::Error;
};

/// Two eigenvalues in distinct degeneracy blocks are closer than the gap guard.
///
/// The averaging step would divide by their difference. Stage and order are
/// attached by the Kolmogorov driver when the error crosses its boundary.
class SmallDenominatorError : public Error {
public:
  SmallDenominatorError(std::size_t j, std::size_t k, double gap, double guard,
                        std::optional<int> stage = std::nullopt,
                        std::optional<int> order = std::nullopt)
      : Error(describe(j, k, gap, guard, stage, order)), j_(j), k_(k), gap_(gap),
        guard_(guard), stage_(stage), order_(order) {}

  std::size_t first_index() const noexcept { return j_; }
  std::size_t second_index() const noexcept { return k_; }
  double gap() const noexcept { return gap_; }
  double guard() const noexcept { return guard_; }
  std::optional<int> stage() const noexcept { return stage_; }
  std::optional<int> order() const noexcept { return order_; }

  SmallDenominatorError with_context(int stage, int order) const {
    return SmallDenominatorError(j_, k_, gap_, guard_, stage, order);
  }

private:
  static std::string describe(std::size_t j, std::size_t k, double gap, double guard,
                              std::optional<int> stage, std::optional<int> order) {
    std::ostringstream os;
    os.precision(17);
    os << "small denominator: eigenvalues " << j << " and " << k << " differ by " << gap
       << " (gap guard " << guard << ")";
    if (stage) os << " at stage " << *stage;
    if (order) os << ", order p=" << *order;
    return os.str();
  }

  std::size_t j_, k_;
  double gap_, guard_;
  std::optional<int> stage_, order_;
};

}  // namespace superconv
