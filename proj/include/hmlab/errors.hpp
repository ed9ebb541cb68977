#ifndef HMLAB_ERRORS_HPP
#define HMLAB_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace hmlab {

struct OutsideTubularNeighborhood : std::runtime_error {
    explicit OutsideTubularNeighborhood(const std::string& m) : std::runtime_error(m) {}
};
struct NonTangentInput : std::runtime_error {
    explicit NonTangentInput(const std::string& m) : std::runtime_error(m) {}
};
struct SingularMetric : std::runtime_error {
    explicit SingularMetric(const std::string& m) : std::runtime_error(m) {}
};
struct ChartFailure : std::runtime_error {
    explicit ChartFailure(const std::string& m) : std::runtime_error(m) {}
};
struct BallExceedsDomain : std::runtime_error {
    explicit BallExceedsDomain(const std::string& m) : std::runtime_error(m) {}
};
struct ProjectionFailure : std::runtime_error {
    explicit ProjectionFailure(const std::string& m) : std::runtime_error(m) {}
};
struct StepFailure : std::runtime_error {
    explicit StepFailure(const std::string& m) : std::runtime_error(m) {}
};
struct OscillationTooLarge : std::runtime_error {
    explicit OscillationTooLarge(const std::string& m) : std::runtime_error(m) {}
};
struct LinearSolveFailure : std::runtime_error {
    explicit LinearSolveFailure(const std::string& m) : std::runtime_error(m) {}
};
struct SingularCoupling : std::runtime_error {
    explicit SingularCoupling(const std::string& m) : std::runtime_error(m) {}
};
struct ScaleBelowGrid : std::runtime_error {
    explicit ScaleBelowGrid(const std::string& m) : std::runtime_error(m) {}
};
struct InsufficientHistory : std::runtime_error {
    explicit InsufficientHistory(const std::string& m) : std::runtime_error(m) {}
};
struct ChartExit : std::runtime_error {
    explicit ChartExit(const std::string& m) : std::runtime_error(m) {}
};
struct NoContraction : std::runtime_error {
    explicit NoContraction(const std::string& m) : std::runtime_error(m) {}
};
struct ConfigError : std::runtime_error {
    explicit ConfigError(const std::string& m) : std::runtime_error(m) {}
};

}  // namespace hmlab

#endif
