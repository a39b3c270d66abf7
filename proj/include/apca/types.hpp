#pragma once

#include <Eigen/Dense>
#include <stdexcept>
#include <string>

namespace apca {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using Index = Eigen::Index;

/// Base class for all library errors.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Matrix or vector shapes are incompatible with the requested operation.
class DimensionMismatch : public Error {
public:
    using Error::Error;
};

/// Invalid data: non-finite entries, bad labels, malformed files.
class DataError : public Error {
public:
    using Error::Error;
};

/// ZZ^T is singular and no ridge was supplied for the projector inverse.
class SingularGram : public Error {
public:
    using Error::Error;
};

/// A selected eigenvalue of the augmented matrix has an imaginary part
/// beyond tolerance, so the fit cannot be realified safely.
class ComplexSpectrum : public Error {
public:
    using Error::Error;
};

/// The encoder-recovery system carries no usable information even under
/// the pseudo-inverse tolerance.
class DegenerateEncoder : public Error {
public:
    using Error::Error;
};

/// A classification routine received labels with only one class.
class SingleClass : public Error {
public:
    using Error::Error;
};

/// Stratified folds cannot be formed with both classes in every fold.
class InfeasibleStratification : public Error {
public:
    using Error::Error;
};

} // namespace apca
