#pragma once

#include <complex>
#include <stdexcept>
#include <string>

namespace sl {

using cplx = std::complex<double>;

inline constexpr double kPi = 3.14159265358979323846;

enum class ErrorKind {
    InvalidArgument,
    Io,
    Parse,
    InvalidContour,
    StepFailure,
    NearPole,
    ZeroOnContour,
    NonIntegerWinding,
    CountMismatch,
    NewtonDivergence,
    CrossCheckFailure,
    PoleOnContour,
    IllConditioned,
    DegreeViolation,
    VerificationFailure,
    FitResidualTooLarge,
    HeadEscaped,
    HeadTooLarge,
};

const char* to_string(ErrorKind kind);

class Error : public std::runtime_error {
  public:
    Error(ErrorKind kind, const std::string& message)
        : std::runtime_error(std::string(to_string(kind)) + ": " + message), kind_(kind) {}

    ErrorKind kind() const { return kind_; }

  private:
    ErrorKind kind_;
};

// Square root with the branch fixed by arg(rho) in (-pi/2, pi/2].
inline cplx sqrt_lambda(cplx la) {
    cplx r = std::sqrt(la);
    if (r.real() < 0.0 || (r.real() == 0.0 && r.imag() < 0.0)) r = -r;
    return r;
}

}  // namespace sl
