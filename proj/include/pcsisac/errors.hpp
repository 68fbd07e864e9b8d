#pragma once

#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace pcsisac {

/// The power constraint sum p A^2 = 1 cannot be met on the given support.
class InfeasibleSupport : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// An iterative solver hit its iteration cap.
class SolverNotConverged : public std::runtime_error {
public:
    SolverNotConverged(const std::string& what, int iterations, double residual)
        : std::runtime_error(what), iterations_(iterations), residual_(residual) {}

    int iterations() const noexcept { return iterations_; }
    double residual() const noexcept { return residual_; }

private:
    int iterations_;
    double residual_;
};

/// One bisection step of CFAR threshold calibration.
struct CalibrationStep {
    double alpha;
    double empirical_pfa;
};

class CalibrationFailed : public std::runtime_error {
public:
    CalibrationFailed(const std::string& what, std::vector<CalibrationStep> trace)
        : std::runtime_error(what), trace_(std::move(trace)) {}

    const std::vector<CalibrationStep>& trace() const noexcept { return trace_; }

private:
    std::vector<CalibrationStep> trace_;
};

}  // namespace pcsisac
