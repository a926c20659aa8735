#pragma once

#include <Eigen/Core>
#include <Eigen/Geometry>

#include <stdexcept>
#include <string>

namespace gradlattice {

template <typename Scalar>
using Vec3T = Eigen::Matrix<Scalar, 3, 1>;

using Vec3 = Vec3T<double>;
using Vec3i = Eigen::Vector3i;
using Box3 = Eigen::AlignedBox3d;

enum class ErrorKind {
  invalid_input,  // malformed data, violated preconditions, bad configuration
  numerical,      // singular or indefinite systems, failed solves
};

/// Error raised by every module. Carries the module name so the CLI can
/// report where a pipeline stage failed.
class Error : public std::runtime_error {
 public:
  Error(std::string module, const std::string& message,
        ErrorKind kind = ErrorKind::invalid_input)
      : std::runtime_error(module + ": " + message),
        module_(std::move(module)),
        kind_(kind) {}

  const std::string& module() const noexcept { return module_; }
  ErrorKind kind() const noexcept { return kind_; }

 private:
  std::string module_;
  ErrorKind kind_;
};

}  // namespace gradlattice
